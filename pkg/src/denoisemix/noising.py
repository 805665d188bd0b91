"""The two noising functions applied to source sequences.

Dictionary noising replaces each word, independently, with a translation
into a uniformly drawn other language at total probability `p_r` (each
language carries p_r/|L|); words without an entry for the drawn language
are kept, and the sentence's own language never replaces.

The inherited denoising corruption is sentence permutation followed by span
masking: span lengths are Poisson(span_lambda), each whole span collapses
into a single MASK token, and masking stops once mask_ratio of the words
are covered.

Everything is pure given (input, config, rng state): same seed, same bytes.
The per-word decision loops run on the compiled kernel backend when built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernels
from .corpus_io import Dictionary
from .rng import Rng, poisson_cdf_table
from .tokenizer import MASK


class NoiseConfigError(Exception):
    pass


@dataclass(frozen=True)
class DictNoiseConfig:
    p_r: float = 0.4
    languages: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.p_r <= 1.0:
            raise NoiseConfigError(f"p_r must be in [0,1], got {self.p_r}")
        if self.p_r > 0 and not self.languages:
            raise NoiseConfigError("languages must be nonempty when p_r > 0")
        if len(set(self.languages)) != len(self.languages):
            raise NoiseConfigError("languages must be unique")


@dataclass(frozen=True)
class NoiseConfig:
    mask_ratio: float = 0.35
    span_lambda: float = 3.5
    permute_sentences: bool = True

    def __post_init__(self):
        if not 0.0 <= self.mask_ratio <= 1.0:
            raise NoiseConfigError(f"mask_ratio must be in [0,1], got {self.mask_ratio}")
        if self.span_lambda <= 0:
            raise NoiseConfigError(f"span_lambda must be positive, got {self.span_lambda}")


@dataclass
class ReplacementEvent:
    position: int  # word index in the input
    lang: str
    original: str
    replacement: str


@dataclass
class NoiseTrace:
    """Per-call record of noise events, for post-hoc statistical checks."""

    replacements: list[ReplacementEvent] = field(default_factory=list)
    mask_spans: list[tuple[int, int]] = field(default_factory=list)  # (start, length)
    masked_words: int = 0
    input_words: int = 0
    sentence_order: list[int] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "replacements": [
                [e.position, e.lang, e.original, e.replacement] for e in self.replacements
            ],
            "mask_spans": [list(s) for s in self.mask_spans],
            "masked_words": self.masked_words,
            "input_words": self.input_words,
            "sentence_order": self.sentence_order,
        }


def dictionary_noise(
    words: list[str],
    lang: str,
    dictionary: Dictionary,
    cfg: DictNoiseConfig,
    rng: Rng,
    trace: NoiseTrace | None = None,
) -> list[str]:
    """Replace words with random-language translations at total rate p_r.

    A drawn language equal to `lang`, or one without a dictionary entry for
    the word, keeps the original.  Multi-word translations are spliced in as
    separate words.  Identity when p_r == 0.
    """
    if cfg.p_r == 0.0 or not words:
        return list(words)
    decisions, rng.state = kernels.draw_replacements(
        rng.state, len(words), cfg.p_r, len(cfg.languages)
    )
    out: list[str] = []
    for i, word in enumerate(words):
        choice = decisions[i]
        if choice < 0:
            out.append(word)
            continue
        target = cfg.languages[choice]
        if target == lang:
            out.append(word)
            continue
        translations = dictionary.lookup(word, target)
        if not translations:
            out.append(word)
            continue
        picked = translations[0] if len(translations) == 1 else rng.choice(translations)
        out.extend(picked.split())
        if trace is not None:
            trace.replacements.append(ReplacementEvent(i, target, word, picked))
    return out


_CDF_CACHE: dict[float, tuple[float, ...]] = {}


def _cdf(lam: float) -> tuple[float, ...]:
    table = _CDF_CACHE.get(lam)
    if table is None:
        table = _CDF_CACHE[lam] = poisson_cdf_table(lam)
    return table


def span_mask(
    words: list[str],
    cfg: NoiseConfig,
    rng: Rng,
    trace: NoiseTrace | None = None,
) -> list[str]:
    """Collapse Poisson-length spans into single MASK tokens.

    Masks exactly round(mask_ratio * len(words)) words when room permits;
    spans never overlap and unmasked words keep their relative order.
    """
    n = len(words)
    target = int(round(cfg.mask_ratio * n))
    if trace is not None:
        trace.input_words += n
    if target == 0 or n == 0:
        return list(words)
    flags, masked, rng.state = kernels.draw_span_mask(
        rng.state, n, target, _cdf(cfg.span_lambda)
    )
    out = []
    for i, word in enumerate(words):
        if flags[i] == 2:
            out.append(MASK)
        elif flags[i] == 0:
            out.append(word)
    if trace is not None:
        trace.masked_words += masked
        start = None
        for i in range(n):
            if flags[i] == 2:
                if start is not None:
                    trace.mask_spans.append((start, i - start))
                start = i
            elif flags[i] == 0 and start is not None:
                trace.mask_spans.append((start, i - start))
                start = None
        if start is not None:
            trace.mask_spans.append((start, n - start))
    return out


def permute_sentences(
    sentences: list[list[str]],
    cfg: NoiseConfig,
    rng: Rng,
    trace: NoiseTrace | None = None,
) -> list[list[str]]:
    """Uniform random reordering of sentences (identity when disabled)."""
    if not cfg.permute_sentences or len(sentences) <= 1:
        if trace is not None:
            trace.sentence_order = list(range(len(sentences)))
        return [list(s) for s in sentences]
    order = rng.permutation(len(sentences))
    if trace is not None:
        trace.sentence_order = order
    return [list(sentences[i]) for i in order]


def apply_g_phi(
    sentences: list[list[str]],
    cfg: NoiseConfig,
    rng: Rng,
    trace: NoiseTrace | None = None,
) -> list[str]:
    """Permute sentences, flatten, then span-mask the result."""
    permuted = permute_sentences(sentences, cfg, rng, trace)
    flat = [w for sentence in permuted for w in sentence]
    return span_mask(flat, cfg, rng, trace)
