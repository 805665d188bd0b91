import json
import random

import pytest

from denoisemix.corpus_io import Dictionary


def synth_word(lang: str, k: int) -> str:
    return f"{lang}w{k}"


def make_sentences(lang: str, n: int, vocab_size: int = 40, seed: int = 0,
                   min_len: int = 4, max_len: int = 9) -> list[str]:
    """Deterministic synthetic sentences over a small per-language lexicon."""
    rnd = random.Random(f"{lang}:{seed}")
    out = []
    for _ in range(n):
        length = rnd.randint(min_len, max_len)
        out.append(" ".join(synth_word(lang, rnd.randrange(vocab_size)) for _ in range(length)))
    return out


def full_coverage_dictionary(src_lang: str, target_langs: list[str], vocab_size: int = 40) -> Dictionary:
    """Every source word translates into every target language."""
    entries = {}
    for k in range(vocab_size):
        for tgt in target_langs:
            entries[(synth_word(src_lang, k), tgt)] = (synth_word(tgt, k),)
    return Dictionary(entries)


@pytest.fixture
def toy_workspace(tmp_path):
    """On-disk toy corpus: 3 mono languages, 4 bitext directions, dictionaries."""
    langs = ["aa", "bb", "en"]
    vocab_size = 40
    mono = []
    for lang, n in [("aa", 120), ("bb", 80), ("en", 150)]:
        path = tmp_path / f"mono.{lang}.txt"
        path.write_text("\n".join(make_sentences(lang, n, vocab_size)) + "\n", encoding="utf-8")
        mono.append({"path": str(path), "lang": lang})

    bitext = []
    rnd = random.Random(7)
    for src, tgt, n in [("en", "aa", 60), ("aa", "en", 60), ("en", "bb", 50), ("bb", "en", 50)]:
        lines = []
        for _ in range(n):
            length = rnd.randint(4, 8)
            ks = [rnd.randrange(vocab_size) for _ in range(length)]
            left = " ".join(synth_word(src, k) for k in ks)
            right = " ".join(synth_word(tgt, k) for k in ks)
            lines.append(f"{left}\t{right}")
        path = tmp_path / f"bitext.{src}-{tgt}.tsv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        bitext.append({"path": str(path), "src": src, "tgt": tgt})

    dict_dir = tmp_path / "dicts"
    dict_dir.mkdir()
    for src in langs:
        for tgt in langs:
            if src == tgt:
                continue
            lines = [f"{synth_word(src, k)} {synth_word(tgt, k)}" for k in range(vocab_size)]
            (dict_dir / f"{src}-{tgt}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    config = {
        "mono": mono,
        "bitext": bitext,
        "dict_dir": str(dict_dir),
        "languages": langs,
        "vocab_size": 512,
        "vocab_path": str(tmp_path / "vocab.json"),
        "seed": 11,
        "max_len": 64,
        "token_budget": 1024,
        "num_records": 200,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return {"dir": tmp_path, "config": config, "config_path": config_path, "langs": langs}
