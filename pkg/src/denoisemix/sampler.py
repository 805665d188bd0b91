"""Language, direction, and task sampling for the combined objective.

Buckets are drawn with probability size^alpha / sum(size^alpha); alpha < 1
flattens size imbalance.  Direction sampling additionally halves every
to-English direction and renormalizes, limiting decoder-side English.
Task sampling applies the same exponential rule over per-task data volumes,
where the mono and dict tasks both count the monolingual sentence total and
bitext counts the pair total.

Defaults: alpha_mono=0.5, alpha_bitext=0.3, alpha_task=0.3.

Weights are computed on size ratios (size / max size), so scaling every
count by a common factor yields byte-identical plans.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

from .corpus_io import CorpusManifest
from .rng import Rng

TASKS = ("mono", "dict", "bitext")


class SamplerError(Exception):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    alpha_mono: float = 0.5
    alpha_bitext: float = 0.3
    alpha_task: float = 0.3
    halve_to_english: bool = True
    english_code: str = "en"
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha_mono", "alpha_bitext", "alpha_task"):
            if getattr(self, name) < 0:
                raise SamplerError(f"{name} must be >= 0")


@dataclass(frozen=True)
class MixPlan:
    mono_probs: dict[str, float]
    dict_probs: dict[str, float]
    bitext_probs: dict[tuple[str, str], float]
    task_probs: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "mono_probs": self.mono_probs,
            "dict_probs": self.dict_probs,
            "bitext_probs": {f"{s}-{t}": p for (s, t), p in self.bitext_probs.items()},
            "task_probs": self.task_probs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def exponential_weights(sizes: dict, alpha: float) -> dict:
    """size^alpha / sum(size^alpha); zero-size keys get probability 0."""
    if alpha < 0:
        raise SamplerError(f"alpha must be >= 0, got {alpha}")
    positive = {k: s for k, s in sizes.items() if s > 0}
    if not positive:
        raise SamplerError("all sizes are zero")
    # Ratios to the max size make the result exactly scale-invariant.
    top = max(positive.values())
    weights = {k: (s / top) ** alpha for k, s in positive.items()}
    total = sum(weights[k] for k in sorted(weights, key=repr))
    out = {k: 0.0 for k in sizes}
    for k, w in weights.items():
        out[k] = w / total
    return out


def direction_weights(bitext_sizes: dict, cfg: SamplerConfig) -> dict:
    """Exponential weights over directions, with to-English halving."""
    if not bitext_sizes:
        raise SamplerError("no bitext directions")
    probs = exponential_weights(bitext_sizes, cfg.alpha_bitext)
    if not cfg.halve_to_english:
        return probs
    halved = {
        d: (p * 0.5 if d[1] == cfg.english_code else p) for d, p in probs.items()
    }
    total = sum(halved[k] for k in sorted(halved, key=repr))
    return {d: p / total for d, p in halved.items()}


def task_weights(manifest: CorpusManifest, cfg: SamplerConfig) -> dict[str, float]:
    """Exponential weights over per-task data volumes."""
    mono_total = sum(manifest.mono_sizes.values())
    if mono_total == 0:
        raise SamplerError("manifest has no monolingual data")
    bitext_total = sum(manifest.bitext_sizes.values())
    volumes = {"mono": mono_total, "dict": mono_total, "bitext": bitext_total}
    return exponential_weights(volumes, cfg.alpha_task)


def build_mix_plan(manifest: CorpusManifest, cfg: SamplerConfig) -> MixPlan:
    mono_probs = exponential_weights(manifest.mono_sizes, cfg.alpha_mono)
    if manifest.bitext_sizes:
        bitext_probs = direction_weights(manifest.bitext_sizes, cfg)
    else:
        bitext_probs = {}
    return MixPlan(
        mono_probs=mono_probs,
        dict_probs=dict(mono_probs),
        bitext_probs=bitext_probs,
        task_probs=task_weights(manifest, cfg),
    )


def _categorical(items: list, probs: list[float], rng: Rng):
    u = rng.random()
    acc = 0.0
    for item, p in zip(items, probs):
        acc += p
        if u < acc:
            return item
    return items[-1]


class EpochCycler:
    """Cycles through bucket indices in seeded epoch permutations.

    Every item appears exactly once per epoch, so any window of 2n
    consecutive draws covers the whole bucket.
    """

    def __init__(self, n: int, rng: Rng):
        if n <= 0:
            raise SamplerError("empty bucket")
        self.n = n
        self._rng = rng
        self._order = rng.permutation(n)
        self._pos = 0

    def next(self) -> int:
        idx = self._order[self._pos]
        self._pos += 1
        if self._pos == self.n:
            self._rng.shuffle(self._order)
            self._pos = 0
        return idx


@dataclass(frozen=True)
class Draw:
    task: str
    bucket: object  # language code for mono/dict, (src, tgt) for bitext
    index: int


class SampleStream:
    """Unbounded deterministic stream of (task, bucket, item index) draws.

    `bucket_sizes` maps mono/dict language codes and bitext directions to
    item counts; buckets with positive plan probability must be nonempty.
    """

    def __init__(
        self,
        plan: MixPlan,
        mono_bucket_sizes: dict[str, int],
        bitext_bucket_sizes: dict[tuple[str, str], int],
        rng: Rng,
    ):
        self.plan = plan
        self._rng = rng.split("draws")
        self._cyclers: dict = {}
        self._mono_sizes = mono_bucket_sizes
        self._bitext_sizes = bitext_bucket_sizes
        for task in ("mono", "dict"):
            probs = plan.mono_probs if task == "mono" else plan.dict_probs
            for lang, p in probs.items():
                if p > 0 and mono_bucket_sizes.get(lang, 0) <= 0:
                    raise SamplerError(f"plan references empty mono bucket {lang!r}")
        for direction, p in plan.bitext_probs.items():
            if p > 0 and bitext_bucket_sizes.get(direction, 0) <= 0:
                raise SamplerError(f"plan references empty bitext bucket {direction}")

    def _cycler(self, task: str, bucket) -> EpochCycler:
        key = (task, bucket)
        cyc = self._cyclers.get(key)
        if cyc is None:
            if task == "bitext":
                n = self._bitext_sizes[bucket]
            else:
                n = self._mono_sizes[bucket]
            cyc = self._cyclers[key] = EpochCycler(n, self._rng.split(f"bucket:{key}"))
        return cyc

    def next_index(self, task: str, bucket) -> int:
        """Advance the (task, bucket) cycler; also used by bitext packing."""
        return self._cycler(task, bucket).next()

    def draws(self) -> Iterator[Draw]:
        tasks = [t for t in TASKS if self.plan.task_probs.get(t, 0.0) > 0]
        task_p = [self.plan.task_probs[t] for t in tasks]
        mono_langs = sorted(l for l, p in self.plan.mono_probs.items() if p > 0)
        mono_p = [self.plan.mono_probs[l] for l in mono_langs]
        directions = sorted(d for d, p in self.plan.bitext_probs.items() if p > 0)
        dir_p = [self.plan.bitext_probs[d] for d in directions]
        while True:
            task = _categorical(tasks, task_p, self._rng)
            if task == "bitext":
                bucket = _categorical(directions, dir_p, self._rng)
            else:
                bucket = _categorical(mono_langs, mono_p, self._rng)
            yield Draw(task=task, bucket=bucket, index=self.next_index(task, bucket))


def sample_stream(
    plan: MixPlan,
    mono_bucket_sizes: dict[str, int],
    bitext_bucket_sizes: dict[tuple[str, str], int],
    rng: Rng,
) -> Iterator[Draw]:
    return SampleStream(plan, mono_bucket_sizes, bitext_bucket_sizes, rng).draws()
