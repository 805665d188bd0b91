"""Pure-Python decision kernels.

Fallback twin of the compiled `_speedups` extension.  Both modules must stay
draw-for-draw identical: they consume the same SplitMix64 state and produce
byte-equal decisions for equal inputs (covered by the parity tests).
"""

from __future__ import annotations

from ..rng import Rng

BACKEND = "python"


def draw_replacements(state: int, n: int, p_r: float, n_langs: int):
    """Per-word replacement decisions for dictionary noising.

    Returns (decisions, new_state).  decisions[i] is the index of the drawn
    target language, or -1 to keep the word.  Each language is drawn with
    probability p_r / n_langs; total replacement probability is p_r.
    """
    rng = Rng(0)
    rng.state = state
    decisions = []
    for _ in range(n):
        if rng.random() < p_r:
            decisions.append(rng.randrange(n_langs))
        else:
            decisions.append(-1)
    return decisions, rng.state


def draw_span_mask(state: int, n: int, target: int, cdf: tuple):
    """Span-mask placement over `n` positions until `target` words are masked.

    Span lengths come from the tabulated Poisson CDF (zero-length draws are
    resampled); each span starts at a uniformly chosen unmasked position,
    extends right without crossing already-masked positions or the sequence
    end, and is capped by the remaining budget.

    Returns (flags, masked_count, new_state) with flags[i] = 0 unmasked,
    1 masked span interior, 2 span start.
    """
    rng = Rng(0)
    rng.state = state
    flags = bytearray(n)
    masked = 0
    while masked < target and masked < n:
        length = rng.poisson(cdf, min_value=1)
        if length > target - masked:
            length = target - masked
        k = rng.randrange(n - masked)
        idx = 0
        seen = 0
        for idx in range(n):
            if flags[idx] == 0:
                if seen == k:
                    break
                seen += 1
        flags[idx] = 2
        masked += 1
        pos = idx + 1
        covered = 1
        while covered < length and pos < n and flags[pos] == 0:
            flags[pos] = 1
            masked += 1
            covered += 1
            pos += 1
    return flags, masked, rng.state
