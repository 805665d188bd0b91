import hashlib
import json
from pathlib import Path

import pytest

from denoisemix import cli, pipeline
from denoisemix.config import PipelineConfig


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


def dir_digest(path: Path) -> str:
    h = hashlib.sha256()
    for f in sorted(path.iterdir()):
        h.update(f.name.encode())
        h.update(f.read_bytes())
    return h.hexdigest()


class TestBuildVocabCmd:
    def test_writes_vocab_specials_first(self, toy_workspace, capsys):
        assert run_cli("build-vocab", "--config", toy_workspace["config_path"]) == 0
        vocab = json.loads(Path(toy_workspace["config"]["vocab_path"]).read_text())
        assert vocab["tokens"][:5] == ["<pad>", "<unk>", "<s>", "</s>", "<mask>"]
        assert vocab["tokens"][5:8] == ["<lang_aa>", "<lang_bb>", "<lang_en>"]

    def test_rerun_identical_bytes(self, toy_workspace):
        path = Path(toy_workspace["config"]["vocab_path"])
        run_cli("build-vocab", "--config", toy_workspace["config_path"])
        first = path.read_bytes()
        run_cli("build-vocab", "--config", toy_workspace["config_path"])
        assert path.read_bytes() == first

    def test_size_too_small_exits_2(self, toy_workspace, capsys):
        cfg = dict(toy_workspace["config"], vocab_size=4)
        bad = toy_workspace["dir"] / "bad.json"
        bad.write_text(json.dumps(cfg))
        assert run_cli("build-vocab", "--config", bad) == 2
        assert "special" in capsys.readouterr().err


class TestStatsCmd:
    def test_paper_default_alphas_echoed(self, toy_workspace, capsys):
        assert run_cli("stats", "--config", toy_workspace["config_path"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["alphas"] == {"alpha_mono": 0.5, "alpha_bitext": 0.3, "alpha_task": 0.3}
        for dist in ("mono_probs", "dict_probs", "task_probs"):
            assert abs(sum(out["mix_plan"][dist].values()) - 1.0) < 1e-9

    def test_empirical_close_to_analytic(self, toy_workspace, capsys):
        assert run_cli("stats", "--config", toy_workspace["config_path"],
                       "--empirical", 100_000) == 0
        out = json.loads(capsys.readouterr().out)
        plan = out["mix_plan"]["task_probs"]
        emp = out["empirical"]["task_freqs"]
        tv = 0.5 * sum(abs(emp.get(t, 0.0) - plan[t]) for t in plan)
        assert tv < 0.01

    def test_mono_only_manifest_zero_bitext(self, toy_workspace, capsys):
        cfg = dict(toy_workspace["config"], bitext=[])
        path = toy_workspace["dir"] / "mono_only.json"
        path.write_text(json.dumps(cfg))
        assert run_cli("stats", "--config", path) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["mix_plan"]["task_probs"]["bitext"] == 0.0


class TestEmitCmd:
    def test_emit_counts_match_files(self, toy_workspace):
        out = toy_workspace["dir"] / "out"
        assert run_cli("emit", "--config", toy_workspace["config_path"], "--out", out) == 0
        manifest, recs = pipeline.read_emission(out)
        assert manifest["num_records"] == len(recs) == toy_workspace["config"]["num_records"]
        total = sum(len(r["source_ids"]) + len(r["target_ids"]) for r in recs)
        assert manifest["total_tokens"] == total

    def test_same_seed_identical_directories(self, toy_workspace):
        a = toy_workspace["dir"] / "out_a"
        b = toy_workspace["dir"] / "out_b"
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", a)
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", b)
        assert dir_digest(a) == dir_digest(b)

    def test_task_filter(self, toy_workspace):
        out = toy_workspace["dir"] / "out_mono"
        assert run_cli("emit", "--config", toy_workspace["config_path"],
                       "--out", out, "--tasks", "mono") == 0
        _, recs = pipeline.read_emission(out)
        assert recs and all(r["task"] == "mono" for r in recs)

    def test_all_tasks_present(self, toy_workspace):
        out = toy_workspace["dir"] / "out_all"
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", out)
        _, recs = pipeline.read_emission(out)
        assert {r["task"] for r in recs} == {"mono", "dict", "bitext"}

    def test_token_budget_respected(self, toy_workspace):
        out = toy_workspace["dir"] / "out_budget"
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", out)
        budget = toy_workspace["config"]["token_budget"]
        for f in sorted(out.glob("batch-*.jsonl")):
            tokens = sum(
                len(r["source_ids"]) + len(r["target_ids"])
                for r in map(json.loads, f.read_text().splitlines())
            )
            assert tokens <= budget


class TestVerifyCmd:
    def test_clean_emission_passes(self, toy_workspace, capsys):
        out = toy_workspace["dir"] / "out_v"
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", out, "--trace")
        assert run_cli("verify", out) == 0
        printed = capsys.readouterr().out
        assert "FAIL" not in printed

    def test_corrupted_target_fails_with_index(self, toy_workspace, capsys):
        out = toy_workspace["dir"] / "out_c"
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", out)
        # corrupt one mono/dict target token in the first batch file
        batch = sorted(out.glob("batch-*.jsonl"))[0]
        lines = batch.read_text().splitlines()
        for i, line in enumerate(lines):
            rec = json.loads(line)
            if rec["task"] in ("mono", "dict"):
                rec["target_ids"][1] = rec["target_ids"][1] + 1
                lines[i] = json.dumps(rec, sort_keys=True)
                break
        batch.write_text("\n".join(lines) + "\n")
        assert run_cli("verify", out) == 1
        printed = capsys.readouterr().out
        assert "FAIL reconstruction" in printed
        assert "record" in printed

    def test_json_report_mirrors_stdout(self, toy_workspace, capsys):
        out = toy_workspace["dir"] / "out_j"
        run_cli("emit", "--config", toy_workspace["config_path"], "--out", out)
        report_path = toy_workspace["dir"] / "report.json"
        run_cli("verify", out, "--json", report_path)
        report = json.loads(report_path.read_text())
        printed = capsys.readouterr().out
        for check in report["checks"]:
            assert check["name"] in printed
        assert report["ok"]

    def test_replacement_rate_within_ci(self, toy_workspace, capsys):
        out = toy_workspace["dir"] / "out_rate"
        cfg = dict(toy_workspace["config"], num_records=400, trace=True)
        path = toy_workspace["dir"] / "rate.json"
        path.write_text(json.dumps(cfg))
        run_cli("emit", "--config", path, "--out", out)
        assert run_cli("verify", out) == 0
        assert "replacement-rate" in capsys.readouterr().out


class TestConfig:
    def test_roundtrip(self, toy_workspace, tmp_path):
        cfg = PipelineConfig.load(toy_workspace["config_path"])
        saved = tmp_path / "again.json"
        cfg.save(saved)
        assert PipelineConfig.load(saved).to_json() == cfg.to_json()

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"nope": 1}))
        with pytest.raises(Exception, match="unknown"):
            PipelineConfig.load(path)

    def test_flag_overrides_win(self, toy_workspace):
        out = toy_workspace["dir"] / "out_seedflag"
        run_cli("emit", "--config", toy_workspace["config_path"],
                "--out", out, "--seed", 999, "--num-records", 10)
        manifest, recs = pipeline.read_emission(out)
        assert manifest["seed"] == 999
        assert len(recs) == 10
