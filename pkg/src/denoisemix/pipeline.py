"""End-to-end orchestration: load corpora, emit batches, verify emissions.

Emission layout (one directory per run):

  batch-000000.jsonl ...   one JSON record per line
  manifest.json            embedded config, corpus sizes, mix plan, hashes

Given (config, seed) the emitted directory is byte-identical across runs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus_io, records, sampler, tokenizer
from .config import PipelineConfig
from .noising import NoiseTrace
from .records import (
    FRAMING_TOKENS,
    Batch,
    PackedPair,
    Task,
    TrainingRecord,
    assemble_batches,
    build_windows,
    make_bitext_record,
    make_dict_record,
    make_mono_record,
    pack_bitext,
)
from .rng import Rng
from .sampler import MixPlan, SampleStream, build_mix_plan
from .tokenizer import TokenSeq, Vocab, build_vocab, decode, encode, tokenize_words


class PipelineError(Exception):
    pass


@dataclass
class LoadedData:
    mono_shards: list[corpus_io.MonoShard]
    bitext_shards: list[corpus_io.BitextShard]
    dictionary: corpus_io.Dictionary | None
    manifest: corpus_io.CorpusManifest
    # per-language sentence windows (lists of tokenized sentences)
    windows: dict[str, list[list[list[str]]]]
    # per-direction tokenized pairs
    pairs: dict[tuple[str, str], list[tuple[list[str], list[str]]]]


def load_data(cfg: PipelineConfig) -> LoadedData:
    if not cfg.mono:
        raise PipelineError("config lists no monolingual corpora")
    mono_shards = [corpus_io.load_mono(m["path"], m["lang"]) for m in cfg.mono]
    bitext_shards = []
    for b in cfg.bitext:
        shard = corpus_io.load_bitext(b["path"], b["src"], b["tgt"])
        if cfg.max_pairs is not None and len(shard.pairs) > cfg.max_pairs:
            shard = corpus_io.BitextShard(
                src_lang=shard.src_lang,
                tgt_lang=shard.tgt_lang,
                pairs=shard.pairs[: cfg.max_pairs],
                source_path=shard.source_path,
                skipped=shard.skipped,
            )
        bitext_shards.append(shard)
    dictionary = None
    if cfg.dict_dir:
        langs = set(cfg.languages) | {m["lang"] for m in cfg.mono}
        dictionary = corpus_io.load_dictionary(cfg.dict_dir, langs)
    manifest = corpus_io.build_manifest([*mono_shards, *bitext_shards], dictionary)

    max_words = cfg.max_len - FRAMING_TOKENS
    sentences_by_lang: dict[str, list[str]] = {}
    for shard in mono_shards:
        sentences_by_lang.setdefault(shard.lang, []).extend(shard.sentences)
    windows = {
        lang: build_windows(sentences, tokenize_words, max_words)
        for lang, sentences in sentences_by_lang.items()
    }
    pairs: dict[tuple[str, str], list[tuple[list[str], list[str]]]] = {}
    for shard in bitext_shards:
        bucket = pairs.setdefault((shard.src_lang, shard.tgt_lang), [])
        bucket.extend(
            (tokenize_words(src), tokenize_words(tgt)) for src, tgt in shard.pairs
        )
    return LoadedData(
        mono_shards=mono_shards,
        bitext_shards=bitext_shards,
        dictionary=dictionary,
        manifest=manifest,
        windows=windows,
        pairs=pairs,
    )


def load_or_build_vocab(cfg: PipelineConfig, data: LoadedData) -> Vocab:
    path = Path(cfg.vocab_path)
    if path.exists():
        return Vocab.from_json(path.read_text(encoding="utf-8"))
    vocab = build_vocab([*data.mono_shards, *data.bitext_shards], cfg.vocab_size)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(vocab.to_json() + "\n", encoding="utf-8")
    return vocab


def restrict_tasks(plan: MixPlan, tasks: list[str]) -> MixPlan:
    """Zero out unselected tasks and renormalize the task distribution."""
    keep = {t: plan.task_probs.get(t, 0.0) for t in sampler.TASKS}
    for t in sampler.TASKS:
        if t not in tasks:
            keep[t] = 0.0
    total = sum(keep.values())
    if total == 0:
        raise PipelineError(f"no data for requested tasks {tasks}")
    task_probs = {t: p / total for t, p in keep.items()}
    return MixPlan(
        mono_probs=plan.mono_probs,
        dict_probs=plan.dict_probs,
        bitext_probs=plan.bitext_probs,
        task_probs=task_probs,
    )


class _PairFeed:
    """Feeds sampled pairs of one direction to the packer, with pushback so
    the overflow probe pair is reused by the next record."""

    def __init__(self, stream: SampleStream, direction, pairs, first_index: int):
        self._stream = stream
        self._direction = direction
        self._pairs = pairs
        self._pending = [first_index]

    def pushback(self, item) -> None:
        self._pending.append(item[0])

    def __iter__(self):
        return self

    def __next__(self):
        if self._pending:
            idx = self._pending.pop()
        else:
            idx = self._stream.next_index("bitext", self._direction)
        src, tgt = self._pairs[idx]
        return idx, src, tgt


@dataclass
class EmitResult:
    out_dir: Path
    num_records: int
    num_batches: int
    total_tokens: int
    plan: MixPlan


def build_records(cfg: PipelineConfig, data: LoadedData, vocab: Vocab):
    """Yield `cfg.num_records` deterministic training records."""
    plan = build_mix_plan(data.manifest, cfg.sampler_config())
    plan = restrict_tasks(plan, cfg.tasks)
    root = Rng(cfg.seed)
    stream = SampleStream(
        plan,
        {lang: len(w) for lang, w in data.windows.items()},
        {d: len(p) for d, p in data.pairs.items()},
        root,
    )
    noise_cfg = cfg.noise_config()
    dict_cfg = cfg.dict_noise_config()
    dictionary = data.dictionary or corpus_io.Dictionary()
    draws = stream.draws()
    # leftover probe pairs pushed back per direction live inside the feeds
    feeds: dict = {}
    for i in range(cfg.num_records):
        draw = next(draws)
        rng = root.split(f"record:{i}")
        if draw.task == "mono":
            window = data.windows[draw.bucket][draw.index]
            yield make_mono_record(
                window,
                draw.bucket,
                vocab,
                noise_cfg,
                rng,
                max_len=cfg.max_len,
                provenance={"lang": draw.bucket, "window": draw.index},
                keep_trace=cfg.trace,
            )
        elif draw.task == "dict":
            window = data.windows[draw.bucket][draw.index]
            yield make_dict_record(
                window,
                draw.bucket,
                dictionary,
                vocab,
                dict_cfg,
                noise_cfg,
                rng,
                max_len=cfg.max_len,
                provenance={"lang": draw.bucket, "window": draw.index},
                keep_trace=cfg.trace,
            )
        else:
            direction = draw.bucket
            feed = feeds.get(direction)
            if feed is None or not feed._pending:
                feed = _PairFeed(stream, direction, data.pairs[direction], draw.index)
                feeds[direction] = feed
            else:
                feed._pending.append(draw.index)
            packed = pack_bitext(feed, direction[0], direction[1], cfg.max_len)
            yield make_bitext_record(
                packed,
                vocab,
                noise_cfg,
                rng,
                max_len=cfg.max_len,
                provenance={"direction": f"{direction[0]}-{direction[1]}"},
                keep_trace=cfg.trace,
            )


def emit(cfg: PipelineConfig, out_dir: str | Path) -> EmitResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = load_data(cfg)
    vocab = load_or_build_vocab(cfg, data)
    plan = restrict_tasks(build_mix_plan(data.manifest, cfg.sampler_config()), cfg.tasks)
    num_records = 0
    total_tokens = 0
    num_batches = 0
    for num_batches, batch in enumerate(
        assemble_batches(build_records(cfg, data, vocab), cfg.token_budget), start=1
    ):
        lines = [records.record_to_line(r, with_trace=cfg.trace) for r in batch.records]
        path = out_dir / f"batch-{num_batches - 1:06d}.jsonl"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        num_records += len(batch.records)
        total_tokens += batch.token_count
    vocab_hash = hashlib.sha256(vocab.to_json().encode("utf-8")).hexdigest()
    manifest = {
        "config": cfg.to_json_dict(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "vocab_hash": vocab_hash,
        "corpus_manifest": json.loads(data.manifest.to_json()),
        "mix_plan": plan.to_json_dict(),
        "num_records": num_records,
        "num_batches": num_batches,
        "total_tokens": total_tokens,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return EmitResult(out_dir, num_records, num_batches, total_tokens, plan)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(name, passed, detail))

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def _expected_decode(words: list[str], vocab: Vocab) -> list[str]:
    return [w if vocab.id_of(w) != vocab.unk_id else tokenizer.UNK for w in words]


def read_emission(out_dir: str | Path):
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
    recs = []
    for path in sorted(out_dir.glob("batch-*.jsonl")):
        for line in path.read_text(encoding="utf-8").splitlines():
            recs.append(json.loads(line))
    return manifest, recs


def verify(out_dir: str | Path, mix_tolerance: float = 0.05) -> VerifyReport:
    """Re-check the pipeline invariants on an emitted directory.

    Reloads the corpora named in the embedded config, replays each record's
    provenance, and checks: target reconstruction for mono/dict, clean
    targets for bitext, packing lengths and segment alignment, mask-ratio
    and replacement-rate statistics (when traces are present), and the
    empirical task mix against the plan.
    """
    manifest, recs = read_emission(out_dir)
    cfg = PipelineConfig(**manifest["config"])
    data = load_data(cfg)
    vocab = load_or_build_vocab(cfg, data)
    report = VerifyReport()

    if len(recs) != manifest["num_records"]:
        report.add("record-count", False, f"{len(recs)} != {manifest['num_records']}")
    else:
        report.add("record-count", True, f"{len(recs)} records")

    recon_bad = []
    purity_bad = []
    pack_bad = []
    length_bad = []
    task_counts = {t: 0 for t in sampler.TASKS}
    masked_words = 0
    input_words = 0
    replacements = 0
    dict_words = 0
    for i, rec in enumerate(recs):
        task = rec["task"]
        task_counts[task] += 1
        if len(rec["source_ids"]) > cfg.max_len or len(rec["target_ids"]) > cfg.max_len:
            length_bad.append(i)
        seq = TokenSeq(ids=tuple(rec["target_ids"]), lang=rec["tgt_lang"])
        if task in ("mono", "dict"):
            window = data.windows[rec["provenance"]["lang"]][rec["provenance"]["window"]]
            clean = [w for s in window for w in s]
            if rec["truncated"]:
                clean = clean[: len(decode(seq, vocab))]
            if decode(seq, vocab) != _expected_decode(clean, vocab):
                recon_bad.append(i)
        else:
            src_lang, tgt_lang = rec["src_lang"], rec["tgt_lang"]
            bucket = data.pairs[(src_lang, tgt_lang)]
            chosen = [(idx, list(bucket[idx][0]), list(bucket[idx][1])) for idx in rec["provenance"]["pair_indices"]]
            packed = pack_bitext(iter(chosen), src_lang, tgt_lang, cfg.max_len)
            if packed.num_segments != len(packed.target_segments) or packed.num_segments != len(
                rec["provenance"]["pair_indices"]
            ):
                pack_bad.append(i)
            expected = encode(
                records._join_segments(packed.target_segments), tgt_lang, vocab, target=True
            )
            if tuple(rec["target_ids"]) != expected.ids:
                purity_bad.append(i)
        trace = rec.get("trace")
        if trace:
            masked_words += trace["masked_words"]
            input_words += trace["input_words"]
            if task == "dict":
                replacements += len(trace["replacements"])
                window = data.windows[rec["provenance"]["lang"]][rec["provenance"]["window"]]
                dict_words += sum(len(s) for s in window)

    report.add(
        "reconstruction",
        not recon_bad,
        f"{len(recon_bad)} violation(s)" + (f", first at record {recon_bad[0]}" if recon_bad else ""),
    )
    report.add(
        "bitext-purity",
        not purity_bad,
        f"{len(purity_bad)} violation(s)" + (f", first at record {purity_bad[0]}" if purity_bad else ""),
    )
    report.add("packing-alignment", not pack_bad, f"{len(pack_bad)} violation(s)")
    report.add("max-len", not length_bad, f"{len(length_bad)} over-length record(s)")

    if input_words:
        ratio = masked_words / input_words
        ok = abs(ratio - cfg.mask_ratio) < 0.02
        report.add("mask-ratio", ok, f"observed {ratio:.4f} vs configured {cfg.mask_ratio}")
    if dict_words and data.dictionary is not None:
        rate = replacements / dict_words
        expected_rate = _expected_replacement_rate(cfg, data)
        # 99% binomial CI half-width plus slack for coverage estimation
        half = 2.576 * math.sqrt(max(expected_rate * (1 - expected_rate), 1e-9) / dict_words) + 0.01
        ok = abs(rate - expected_rate) < half
        report.add(
            "replacement-rate",
            ok,
            f"observed {rate:.4f} vs expected {expected_rate:.4f} (tol {half:.4f})",
        )

    total = len(recs)
    if total:
        plan_probs = manifest["mix_plan"]["task_probs"]
        tv = 0.5 * sum(
            abs(task_counts[t] / total - plan_probs.get(t, 0.0)) for t in sampler.TASKS
        )
        report.add("task-mix", tv < mix_tolerance, f"TV distance {tv:.4f} (tol {mix_tolerance})")
    return report


def _expected_replacement_rate(cfg: PipelineConfig, data: LoadedData) -> float:
    """Mean replacement probability over the dict-task corpus words.

    A word is replaced when the drawn language differs from its own and has
    a dictionary entry; each language is drawn at p_r / |L|.
    """
    langs = cfg.languages
    if not langs or data.dictionary is None:
        return 0.0
    covered = 0
    total = 0
    for lang, windows in data.windows.items():
        for window in windows:
            for sentence in window:
                for word in sentence:
                    total += 1
                    for target in langs:
                        if target != lang and data.dictionary.lookup(word, target):
                            covered += 1
    if total == 0:
        return 0.0
    return cfg.p_r * covered / (total * len(langs))
