"""Loading and validation of monolingual corpora, bitext, and dictionaries.

File formats:
  - monolingual: UTF-8 text, one sentence per line
  - bitext: UTF-8 TSV, ``source<TAB>target`` per line
  - dictionaries: a directory of ``<src>-<tgt>.txt`` files, each line holding
    a source word, a whitespace run, and its translation (which may itself be
    a multi-word phrase)

All loaded objects are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

_LANG_RE = re.compile(r"^[a-z]{2,3}$")


class CorpusError(Exception):
    """Raised for unusable corpus files or invalid language codes."""


def check_lang(code: str) -> str:
    """Validate an ISO-639-1/3 language code, returning it unchanged."""
    if not _LANG_RE.match(code):
        raise CorpusError(f"invalid language code {code!r} (want lowercase [a-z]{{2,3}})")
    return code


@dataclass(frozen=True)
class MonoShard:
    lang: str
    sentences: tuple[str, ...]
    source_path: str


@dataclass(frozen=True)
class BitextShard:
    src_lang: str
    tgt_lang: str
    pairs: tuple[tuple[str, str], ...]
    source_path: str
    skipped: int = 0  # malformed lines dropped during load


@dataclass(frozen=True)
class Dictionary:
    """Word translations keyed by (source word, target language).

    Lookup is exact-match on the word string; translations per key are
    deduplicated, in first-seen file order (stable, so a uniform random
    choice over them is reproducible).
    """

    entries: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)

    def lookup(self, word: str, lang: str) -> tuple[str, ...]:
        return self.entries.get((word, lang), ())

    def coverage(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for (_, lang) in self.entries:
            counts[lang] = counts.get(lang, 0) + 1
        return counts


@dataclass(frozen=True)
class CorpusManifest:
    mono_sizes: dict[str, int]
    bitext_sizes: dict[tuple[str, str], int]
    dict_coverage: dict[str, int]

    def to_json(self) -> str:
        return json.dumps(
            {
                "mono_sizes": self.mono_sizes,
                "bitext_sizes": {f"{s}-{t}": n for (s, t), n in self.bitext_sizes.items()},
                "dict_coverage": self.dict_coverage,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CorpusManifest":
        raw = json.loads(text)
        bitext = {}
        for key, n in raw["bitext_sizes"].items():
            src, tgt = key.split("-")
            bitext[(src, tgt)] = n
        return cls(raw["mono_sizes"], bitext, raw["dict_coverage"])


def _read_utf8_lines(path: Path) -> list[str]:
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise CorpusError(f"file not found: {path}")
    lines = []
    for i, raw in enumerate(data.split(b"\n"), start=1):
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise CorpusError(f"{path}: invalid UTF-8 on line {i}: {e}")
    return lines


def load_mono(path: str | Path, lang: str) -> MonoShard:
    """Load a one-sentence-per-line monolingual file, dropping blank lines."""
    path = Path(path)
    check_lang(lang)
    sentences = tuple(s.strip() for s in _read_utf8_lines(path) if s.strip())
    if not sentences:
        raise CorpusError(f"{path}: zero usable lines")
    return MonoShard(lang=lang, sentences=sentences, source_path=str(path))


def load_bitext(
    path: str | Path,
    src: str,
    tgt: str,
    reject_threshold: float = 0.01,
) -> BitextShard:
    """Load a source<TAB>target bitext file.

    Malformed lines (no tab, or an empty side) are skipped and counted;
    exceeding `reject_threshold` as a fraction of non-blank lines aborts.
    """
    path = Path(path)
    check_lang(src)
    check_lang(tgt)
    if src == tgt:
        raise CorpusError(f"bitext source and target language are both {src!r}")
    pairs = []
    skipped = 0
    total = 0
    for line in _read_utf8_lines(path):
        if not line.strip():
            continue
        total += 1
        left, sep, right = line.partition("\t")
        left, right = left.strip(), right.strip()
        if not sep or not left or not right:
            skipped += 1
            continue
        pairs.append((left, right))
    if total and skipped / total > reject_threshold:
        raise CorpusError(
            f"{path}: {skipped}/{total} malformed lines exceeds "
            f"reject threshold {reject_threshold:.0%}"
        )
    if not pairs:
        raise CorpusError(f"{path}: zero usable pairs")
    if skipped:
        log.warning("%s: skipped %d malformed line(s)", path, skipped)
    return BitextShard(
        src_lang=src, tgt_lang=tgt, pairs=tuple(pairs), source_path=str(path), skipped=skipped
    )


def load_dictionary(directory: str | Path, langs: set[str]) -> Dictionary:
    """Load every ``<src>-<tgt>.txt`` file in `directory` touching `langs`.

    Repeated source words accumulate alternative translations; everything
    after the first whitespace run of a line is the translation.
    """
    directory = Path(directory)
    for code in langs:
        check_lang(code)
    entries: dict[tuple[str, str], list[str]] = {}
    found = False
    for path in sorted(directory.glob("*-*.txt")):
        stem_parts = path.stem.split("-")
        if len(stem_parts) != 2:
            continue
        src, tgt = stem_parts
        if src not in langs or tgt not in langs:
            continue
        found = True
        for i, line in enumerate(_read_utf8_lines(path), start=1):
            if not line.strip():
                continue
            parts = line.strip().split(None, 1)
            if len(parts) != 2:
                log.warning("%s:%d: malformed dictionary line %r, skipped", path, i, line)
                continue
            word, translation = parts
            bucket = entries.setdefault((word, tgt), [])
            if translation not in bucket:
                bucket.append(translation)
    if not found:
        raise CorpusError(f"no dictionary file for languages {sorted(langs)} in {directory}")
    return Dictionary({k: tuple(v) for k, v in entries.items()})


def build_manifest(
    shards: list[MonoShard | BitextShard],
    dictionary: Dictionary | None = None,
) -> CorpusManifest:
    """Aggregate exact size counts over all loaded shards.

    Output is independent of shard ordering; registering the same
    (path, lang) twice is an error.
    """
    mono: dict[str, int] = {}
    bitext: dict[tuple[str, str], int] = {}
    seen = set()
    has_mono = False
    for shard in shards:
        if isinstance(shard, MonoShard):
            key = (shard.source_path, shard.lang)
            if key in seen:
                raise CorpusError(f"duplicate shard registration: {key}")
            seen.add(key)
            mono[shard.lang] = mono.get(shard.lang, 0) + len(shard.sentences)
            has_mono = True
        elif isinstance(shard, BitextShard):
            key = (shard.source_path, f"{shard.src_lang}-{shard.tgt_lang}")
            if key in seen:
                raise CorpusError(f"duplicate shard registration: {key}")
            seen.add(key)
            direction = (shard.src_lang, shard.tgt_lang)
            bitext[direction] = bitext.get(direction, 0) + len(shard.pairs)
        else:
            raise TypeError(f"not a shard: {shard!r}")
    if not has_mono:
        raise CorpusError("at least one monolingual shard is required")
    coverage = dictionary.coverage() if dictionary is not None else {}
    return CorpusManifest(
        mono_sizes=dict(sorted(mono.items())),
        bitext_sizes=dict(sorted(bitext.items())),
        dict_coverage=dict(sorted(coverage.items())),
    )
