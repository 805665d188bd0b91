"""Pipeline configuration: one JSON file driving every stage.

The file round-trips unchanged through load/save; CLI flags override
individual fields after loading.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .noising import DictNoiseConfig, NoiseConfig
from .sampler import SamplerConfig


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    # data sources
    mono: list[dict] = field(default_factory=list)  # {"path", "lang"}
    bitext: list[dict] = field(default_factory=list)  # {"path", "src", "tgt"}
    dict_dir: str | None = None
    languages: list[str] = field(default_factory=list)  # replacement pool L
    max_pairs: int | None = None
    # tokenizer
    vocab_size: int = 8192
    vocab_path: str = "vocab.json"
    # noising
    p_r: float = 0.4
    mask_ratio: float = 0.35
    span_lambda: float = 3.5
    permute_sentences: bool = True
    # sampling
    alpha_mono: float = 0.5
    alpha_bitext: float = 0.3
    alpha_task: float = 0.3
    halve_to_english: bool = True
    english_code: str = "en"
    # emission
    seed: int = 0
    max_len: int = 256
    token_budget: int = 8192
    num_records: int = 1000
    tasks: list[str] = field(default_factory=lambda: ["mono", "dict", "bitext"])
    trace: bool = False

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    # sub-config views
    def noise_config(self) -> NoiseConfig:
        return NoiseConfig(
            mask_ratio=self.mask_ratio,
            span_lambda=self.span_lambda,
            permute_sentences=self.permute_sentences,
        )

    def dict_noise_config(self) -> DictNoiseConfig:
        return DictNoiseConfig(p_r=self.p_r, languages=tuple(self.languages))

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(
            alpha_mono=self.alpha_mono,
            alpha_bitext=self.alpha_bitext,
            alpha_task=self.alpha_task,
            halve_to_english=self.halve_to_english,
            english_code=self.english_code,
            seed=self.seed,
        )
