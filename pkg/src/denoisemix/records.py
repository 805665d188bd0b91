"""Training record construction and batch assembly.

A record is one (noised source, clean target) pair:

  MONO    target is the clean window, source is its permuted+masked form
  DICT    like MONO but with dictionary replacement applied before masking
  BITEXT  source is a noised concatenation of sampled parallel pairs, the
          target is the clean concatenation of their references -- the
          target side is never noised

Batches are greedy token-budget fills preserving stream order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .corpus_io import Dictionary
from .noising import (
    DictNoiseConfig,
    NoiseConfig,
    NoiseTrace,
    apply_g_phi,
    dictionary_noise,
    permute_sentences,
    span_mask,
)
from .rng import Rng
from .tokenizer import EOS, TokenSeq, Vocab, encode

# source framing adds <lang> </s>; target framing adds <lang> ... </s>
FRAMING_TOKENS = 2


class RecordError(Exception):
    pass


class Task(str, Enum):
    MONO = "mono"
    DICT = "dict"
    BITEXT = "bitext"


@dataclass
class TrainingRecord:
    task: Task
    source: TokenSeq
    target: TokenSeq
    src_lang: str
    tgt_lang: str
    provenance: dict
    truncated: bool = False
    trace: NoiseTrace | None = None

    def __post_init__(self):
        if self.task in (Task.MONO, Task.DICT):
            if self.src_lang != self.tgt_lang:
                raise RecordError(f"{self.task} record with src {self.src_lang} != tgt {self.tgt_lang}")
        elif self.src_lang == self.tgt_lang:
            raise RecordError("bitext record with equal source and target language")

    @property
    def token_count(self) -> int:
        return len(self.source.ids) + len(self.target.ids)

    def to_json_dict(self, with_trace: bool = False) -> dict:
        out = {
            "task": self.task.value,
            "src_lang": self.src_lang,
            "tgt_lang": self.tgt_lang,
            "source_ids": list(self.source.ids),
            "target_ids": list(self.target.ids),
            "provenance": self.provenance,
            "truncated": self.truncated,
        }
        if with_trace and self.trace is not None:
            out["trace"] = self.trace.to_json_dict()
        return out


def build_windows(sentences: list[str], tokenize, max_words: int) -> list[list[list[str]]]:
    """Group consecutive sentences into windows of at most `max_words` words.

    Each window is a list of tokenized sentences; a single over-long
    sentence becomes its own window (truncated later during encoding).
    """
    windows: list[list[list[str]]] = []
    current: list[list[str]] = []
    count = 0
    for sentence in sentences:
        words = tokenize(sentence)
        if not words:
            continue
        if current and count + len(words) > max_words:
            windows.append(current)
            current = []
            count = 0
        current.append(words)
        count += len(words)
    if current:
        windows.append(current)
    return windows


def _fit_window(sentences: list[list[str]], max_len: int) -> tuple[list[list[str]], bool]:
    """Drop trailing sentences until the window fits max_len after framing."""
    budget = max_len - FRAMING_TOKENS
    kept: list[list[str]] = []
    count = 0
    truncated = False
    for words in sentences:
        if kept and count + len(words) > budget:
            truncated = True
            break
        kept.append(words)
        count += len(words)
    if count > budget:  # single over-long sentence
        overflow = count - budget
        kept[-1] = kept[-1][: len(kept[-1]) - overflow]
        truncated = True
        if not kept[-1]:
            kept.pop()
    return kept, truncated


def make_mono_record(
    sentences: list[list[str]],
    lang: str,
    vocab: Vocab,
    noise_cfg: NoiseConfig,
    rng: Rng,
    max_len: int = 256,
    provenance: dict | None = None,
    keep_trace: bool = False,
) -> TrainingRecord:
    """Denoising record: source = g_phi(x), target = clean x."""
    if not sentences:
        raise RecordError("empty input window")
    kept, truncated = _fit_window(sentences, max_len)
    trace = NoiseTrace() if keep_trace else None
    noised = apply_g_phi(kept, noise_cfg, rng, trace)
    clean = [w for s in kept for w in s]
    return TrainingRecord(
        task=Task.MONO,
        source=_encode_clipped(noised, lang, vocab, max_len),
        target=encode(clean, lang, vocab, target=True),
        src_lang=lang,
        tgt_lang=lang,
        provenance=provenance or {},
        truncated=truncated,
        trace=trace,
    )


def make_dict_record(
    sentences: list[list[str]],
    lang: str,
    dictionary: Dictionary,
    vocab: Vocab,
    dict_cfg: DictNoiseConfig,
    noise_cfg: NoiseConfig,
    rng: Rng,
    max_len: int = 256,
    provenance: dict | None = None,
    keep_trace: bool = False,
) -> TrainingRecord:
    """Dictionary-denoising record: source = g_phi(g_psi(x)), target = clean x.

    Replacement runs first, per sentence, so later mask spans can swallow
    replaced words.
    """
    if not sentences:
        raise RecordError("empty input window")
    kept, truncated = _fit_window(sentences, max_len)
    trace = NoiseTrace() if keep_trace else None
    replaced = [dictionary_noise(s, lang, dictionary, dict_cfg, rng, trace) for s in kept]
    noised = apply_g_phi(replaced, noise_cfg, rng, trace)
    clean = [w for s in kept for w in s]
    return TrainingRecord(
        task=Task.DICT,
        source=_encode_clipped(noised, lang, vocab, max_len),
        target=encode(clean, lang, vocab, target=True),
        src_lang=lang,
        tgt_lang=lang,
        provenance=provenance or {},
        truncated=truncated,
        trace=trace,
    )


def _encode_clipped(words: list[str], lang: str, vocab: Vocab, max_len: int) -> TokenSeq:
    # Replacement splices can push a noised source past max_len; clip the tail.
    budget = max_len - FRAMING_TOKENS
    return encode(words[:budget], lang, vocab)


@dataclass
class PackedPair:
    src_lang: str
    tgt_lang: str
    source_segments: list[list[str]]
    target_segments: list[list[str]]
    pair_indices: list[int]
    truncated: bool = False

    @property
    def num_segments(self) -> int:
        return len(self.source_segments)


def pack_bitext(
    pairs: Iterator[tuple[int, list[str], list[str]]],
    src_lang: str,
    tgt_lang: str,
    max_len: int,
) -> PackedPair:
    """Greedily concatenate sampled pairs while both sides fit max_len.

    `pairs` yields (index, source words, target words) in sampled order;
    consumption stops at the first pair that would overflow either side
    (pushed back to the iterator when it supports `pushback`, so the probe
    is not lost).  Segment alignment is positional: source segment i
    translates target segment i.  A first pair that alone overflows is
    truncated on both sides proportionally.
    """
    if src_lang == tgt_lang:
        raise RecordError("bitext pack with equal source and target language")
    budget = max_len - FRAMING_TOKENS
    src_segments: list[list[str]] = []
    tgt_segments: list[list[str]] = []
    indices: list[int] = []
    src_count = tgt_count = 0
    truncated = False
    for idx, src_words, tgt_words in pairs:
        sep = 1 if src_segments else 0  # EOS separator between segments
        if src_segments and (
            src_count + sep + len(src_words) > budget
            or tgt_count + sep + len(tgt_words) > budget
        ):
            if hasattr(pairs, "pushback"):
                pairs.pushback((idx, src_words, tgt_words))
            break
        if not src_segments and (len(src_words) > budget or len(tgt_words) > budget):
            scale = min(budget / len(src_words), budget / len(tgt_words))
            src_words = src_words[: max(1, int(len(src_words) * scale))]
            tgt_words = tgt_words[: max(1, int(len(tgt_words) * scale))]
            truncated = True
        src_segments.append(list(src_words))
        tgt_segments.append(list(tgt_words))
        indices.append(idx)
        src_count += sep + len(src_words)
        tgt_count += sep + len(tgt_words)
        if truncated:
            break
    if not src_segments:
        raise RecordError("no pairs to pack")
    return PackedPair(
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        source_segments=src_segments,
        target_segments=tgt_segments,
        pair_indices=indices,
        truncated=truncated,
    )


def _join_segments(segments: list[list[str]]) -> list[str]:
    out: list[str] = []
    for i, seg in enumerate(segments):
        if i:
            out.append(EOS)
        out.extend(seg)
    return out


def make_bitext_record(
    packed: PackedPair,
    vocab: Vocab,
    noise_cfg: NoiseConfig,
    rng: Rng,
    max_len: int = 256,
    provenance: dict | None = None,
    keep_trace: bool = False,
) -> TrainingRecord:
    """Translation record: source = g_phi(x), target = clean y (never noised)."""
    trace = NoiseTrace() if keep_trace else None
    # Segments play the role of sentences for permutation; separators are
    # ordinary maskable positions in the noised source.  The clean target
    # keeps its original segment order.
    permuted = permute_sentences(packed.source_segments, noise_cfg, rng, trace)
    noised = span_mask(_join_segments(permuted), noise_cfg, rng, trace)
    target_words = _join_segments(packed.target_segments)
    prov = dict(provenance or {})
    prov["pair_indices"] = list(packed.pair_indices)
    return TrainingRecord(
        task=Task.BITEXT,
        source=_encode_clipped(noised, packed.src_lang, vocab, max_len),
        target=encode(target_words, packed.tgt_lang, vocab, target=True),
        src_lang=packed.src_lang,
        tgt_lang=packed.tgt_lang,
        provenance=prov,
        truncated=packed.truncated,
        trace=trace,
    )


@dataclass
class Batch:
    records: list[TrainingRecord] = field(default_factory=list)

    @property
    def token_count(self) -> int:
        return sum(r.token_count for r in self.records)


def assemble_batches(records: Iterable[TrainingRecord], token_budget: int) -> Iterator[Batch]:
    """Greedy order-preserving fill; every record lands in exactly one batch."""
    batch = Batch()
    for record in records:
        if record.token_count > token_budget:
            raise RecordError(
                f"record of {record.token_count} tokens exceeds budget {token_budget}"
            )
        if batch.records and batch.token_count + record.token_count > token_budget:
            yield batch
            batch = Batch()
        batch.records.append(record)
    if batch.records:
        yield batch


def record_to_line(record: TrainingRecord, with_trace: bool = False) -> str:
    return json.dumps(record.to_json_dict(with_trace), sort_keys=True)
