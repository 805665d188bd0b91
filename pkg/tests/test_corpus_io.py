import pytest

from denoisemix.corpus_io import (
    CorpusError,
    CorpusManifest,
    Dictionary,
    build_manifest,
    check_lang,
    load_bitext,
    load_dictionary,
    load_mono,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadMono:
    def test_blank_lines_dropped(self, tmp_path):
        path = write(tmp_path / "c.txt", "a b\n\nc\n")
        shard = load_mono(path, "en")
        assert shard.sentences == ("a b", "c")
        assert shard.lang == "en"

    def test_empty_file_errors(self, tmp_path):
        path = write(tmp_path / "c.txt", "\n\n")
        with pytest.raises(CorpusError, match="zero usable lines"):
            load_mono(path, "en")

    def test_missing_file_errors(self, tmp_path):
        with pytest.raises(CorpusError, match="not found"):
            load_mono(tmp_path / "nope.txt", "en")

    def test_invalid_utf8_reports_line(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_bytes(b"ok\n\xff\xfe bad\n")
        with pytest.raises(CorpusError, match="line 2"):
            load_mono(path, "en")

    def test_order_preserved(self, tmp_path):
        lines = [f"sentence {i}" for i in range(50)]
        path = write(tmp_path / "c.txt", "\n".join(lines))
        assert list(load_mono(path, "en").sentences) == lines

    def test_bad_lang_code(self, tmp_path):
        path = write(tmp_path / "c.txt", "x\n")
        with pytest.raises(CorpusError, match="language code"):
            load_mono(path, "EN")


class TestLoadBitext:
    def test_basic_pair(self, tmp_path):
        path = write(tmp_path / "b.tsv", "hello\tbonjour\n")
        shard = load_bitext(path, "en", "fr")
        assert shard.pairs == (("hello", "bonjour"),)

    def test_malformed_line_skipped_and_counted(self, tmp_path):
        lines = [f"s{i}\tt{i}" for i in range(200)] + ["no tab here"]
        path = write(tmp_path / "b.tsv", "\n".join(lines))
        shard = load_bitext(path, "en", "fr")
        assert len(shard.pairs) == 200
        assert shard.skipped == 1

    def test_same_language_rejected(self, tmp_path):
        path = write(tmp_path / "b.tsv", "a\tb\n")
        with pytest.raises(CorpusError, match="both"):
            load_bitext(path, "en", "en")

    def test_reject_threshold_aborts(self, tmp_path):
        lines = ["good\tpair"] * 10 + ["broken"] * 5
        path = write(tmp_path / "b.tsv", "\n".join(lines))
        with pytest.raises(CorpusError, match="threshold"):
            load_bitext(path, "en", "fr")
        # a looser threshold lets it through
        shard = load_bitext(path, "en", "fr", reject_threshold=0.5)
        assert len(shard.pairs) == 10


class TestLoadDictionary:
    def test_single_entry(self, tmp_path):
        write(tmp_path / "en-fr.txt", "dog chien\n")
        d = load_dictionary(tmp_path, {"en", "fr"})
        assert d.lookup("dog", "fr") == ("chien",)

    def test_accumulation_dedup(self, tmp_path):
        write(tmp_path / "en-fr.txt", "dog chien\ndog clebs\ndog chien\n")
        d = load_dictionary(tmp_path, {"en", "fr"})
        assert set(d.lookup("dog", "fr")) == {"chien", "clebs"}
        assert len(d.lookup("dog", "fr")) == 2

    def test_absent_word_empty(self, tmp_path):
        write(tmp_path / "en-fr.txt", "dog chien\n")
        d = load_dictionary(tmp_path, {"en", "fr"})
        assert d.lookup("cat", "fr") == ()

    def test_multiword_translation(self, tmp_path):
        write(tmp_path / "en-fr.txt", "potato pomme de terre\n")
        d = load_dictionary(tmp_path, {"en", "fr"})
        assert d.lookup("potato", "fr") == ("pomme de terre",)

    def test_no_files_errors(self, tmp_path):
        with pytest.raises(CorpusError, match="no dictionary file"):
            load_dictionary(tmp_path, {"en", "fr"})

    def test_lookup_is_pure(self, tmp_path):
        write(tmp_path / "en-fr.txt", "dog chien\n")
        d = load_dictionary(tmp_path, {"en", "fr"})
        assert d.lookup("dog", "fr") == d.lookup("dog", "fr")


class TestManifest:
    def test_additivity(self, tmp_path):
        a = load_mono(write(tmp_path / "a.txt", "x\ny\nz\n"), "en")
        b = load_mono(write(tmp_path / "b.txt", "p\nq\nr\ns\n"), "en")
        manifest = build_manifest([a, b])
        assert manifest.mono_sizes == {"en": 7}

    def test_mono_only_is_valid(self, tmp_path):
        a = load_mono(write(tmp_path / "a.txt", "x\n"), "en")
        manifest = build_manifest([a])
        assert manifest.bitext_sizes == {}

    def test_order_invariant_serialization(self, tmp_path):
        a = load_mono(write(tmp_path / "a.txt", "x\ny\n"), "en")
        b = load_mono(write(tmp_path / "b.txt", "u\n"), "fr")
        c = load_bitext(write(tmp_path / "c.tsv", "x\tu\n"), "en", "fr")
        assert build_manifest([a, b, c]).to_json() == build_manifest([c, b, a]).to_json()

    def test_duplicate_registration_errors(self, tmp_path):
        a = load_mono(write(tmp_path / "a.txt", "x\n"), "en")
        with pytest.raises(CorpusError, match="duplicate"):
            build_manifest([a, a])

    def test_requires_mono(self, tmp_path):
        c = load_bitext(write(tmp_path / "c.tsv", "x\tu\n"), "en", "fr")
        with pytest.raises(CorpusError, match="monolingual"):
            build_manifest([c])

    def test_roundtrip(self):
        m = CorpusManifest({"en": 3}, {("en", "fr"): 2}, {"fr": 10})
        assert CorpusManifest.from_json(m.to_json()).to_json() == m.to_json()

    def test_counts_match_bruteforce(self, tmp_path):
        lines = [f"s {i}" for i in range(37)]
        path = write(tmp_path / "a.txt", "\n".join(lines) + "\n")
        shard = load_mono(path, "en")
        # independent recount straight off the file
        recount = sum(1 for l in path.read_text().splitlines() if l.strip())
        assert build_manifest([shard]).mono_sizes["en"] == recount == 37


def test_check_lang():
    assert check_lang("en") == "en"
    assert check_lang("nep") == "nep"
    for bad in ("", "e", "EN", "engl", "e1"):
        with pytest.raises(CorpusError):
            check_lang(bad)
