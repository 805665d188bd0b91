"""Command-line front door.

Subcommands:
  build-vocab   build and write the vocabulary file
  stats         print corpus sizes and the sampling plan (optionally with
                Monte-Carlo frequencies for comparison)
  emit          write training batches + manifest to a directory
  verify        re-check pipeline invariants on an emitted directory
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline, sampler
from .config import PipelineConfig
from .rng import Rng
from .sampler import SampleStream, build_mix_plan
from .tokenizer import build_vocab

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "trace", False):
        cfg.trace = True
    if getattr(args, "tasks", None):
        cfg.tasks = args.tasks
    if getattr(args, "max_pairs", None) is not None:
        cfg.max_pairs = args.max_pairs
    if getattr(args, "num_records", None) is not None:
        cfg.num_records = args.num_records
    return cfg


def cmd_build_vocab(args) -> int:
    cfg = _load_config(args)
    data = pipeline.load_data(cfg)
    vocab = build_vocab([*data.mono_shards, *data.bitext_shards], cfg.vocab_size)
    out = Path(cfg.vocab_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(vocab.to_json() + "\n", encoding="utf-8")
    print(f"wrote {len(vocab)} tokens to {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _load_config(args)
    data = pipeline.load_data(cfg)
    plan = pipeline.restrict_tasks(
        build_mix_plan(data.manifest, cfg.sampler_config()), cfg.tasks
    )
    out = {
        "corpus": json.loads(data.manifest.to_json()),
        "alphas": {
            "alpha_mono": cfg.alpha_mono,
            "alpha_bitext": cfg.alpha_bitext,
            "alpha_task": cfg.alpha_task,
        },
        "mix_plan": plan.to_json_dict(),
    }
    if args.empirical:
        stream = SampleStream(
            plan,
            {lang: len(w) for lang, w in data.windows.items()},
            {d: len(p) for d, p in data.pairs.items()},
            Rng(cfg.seed),
        )
        task_counts: dict[str, int] = {}
        bucket_counts: dict[str, int] = {}
        draws = stream.draws()
        n = args.empirical
        for _ in range(n):
            d = next(draws)
            task_counts[d.task] = task_counts.get(d.task, 0) + 1
            key = d.bucket if isinstance(d.bucket, str) else f"{d.bucket[0]}-{d.bucket[1]}"
            bucket_counts[f"{d.task}:{key}"] = bucket_counts.get(f"{d.task}:{key}", 0) + 1
        out["empirical"] = {
            "draws": n,
            "task_freqs": {t: c / n for t, c in sorted(task_counts.items())},
            "bucket_freqs": {k: c / n for k, c in sorted(bucket_counts.items())},
        }
    print(json.dumps(out, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_emit(args) -> int:
    cfg = _load_config(args)
    result = pipeline.emit(cfg, args.out)
    print(
        f"emitted {result.num_records} records / {result.total_tokens} tokens "
        f"in {result.num_batches} batch file(s) to {result.out_dir}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    report = pipeline.verify(args.dir)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: {check.detail}")
    if args.json:
        Path(args.json).write_text(
            json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return EXIT_OK if report.ok else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="denoisemix",
        description="Multilingual denoising pretraining data pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--jobs", type=int, default=None, help="parallelism degree (reserved)")

    p = sub.add_parser("build-vocab", help="build and write the vocabulary")
    add_common(p)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("stats", help="print corpus sizes and sampling plan")
    add_common(p)
    p.add_argument("--empirical", type=int, default=0, metavar="N",
                   help="also draw N samples and report empirical frequencies")
    p.add_argument("--tasks", nargs="+", choices=list(sampler.TASKS), default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("emit", help="emit training batches")
    add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trace", action="store_true", help="keep per-record noise traces")
    p.add_argument("--tasks", nargs="+", choices=list(sampler.TASKS), default=None)
    p.add_argument("--max-pairs", type=int, default=None, dest="max_pairs")
    p.add_argument("--num-records", type=int, default=None, dest="num_records")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("verify", help="re-check invariants on an emitted directory")
    p.add_argument("dir", help="emitted directory")
    p.add_argument("--json", default=None, help="also write a JSON report here")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as e:  # surface everything as exit code + message
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
