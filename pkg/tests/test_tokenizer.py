import pytest
from hypothesis import given, strategies as st

from denoisemix.corpus_io import MonoShard
from denoisemix.tokenizer import (
    CORE_SPECIALS,
    TokenSeq,
    Vocab,
    VocabError,
    build_vocab,
    decode,
    encode,
    lang_tag,
    tokenize_words,
)


def shard(lang, sentences):
    return MonoShard(lang=lang, sentences=tuple(sentences), source_path="<mem>")


class TestTokenizeWords:
    def test_punctuation_split(self):
        assert tokenize_words("the dog.") == ["the", "dog", "."]

    def test_empty(self):
        assert tokenize_words("") == []

    def test_whitespace_collapse(self):
        assert tokenize_words("a  b") == ["a", "b"]

    def test_leading_and_trailing(self):
        assert tokenize_words('"hi!"') == ['"', "hi", "!", '"']

    def test_all_punctuation_chunk(self):
        assert tokenize_words("...") == [".", ".", "."]

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = tokenize_words(text)
        assert tokenize_words(" ".join(once)) == once

    @given(st.text(max_size=80))
    def test_no_empty_tokens(self, text):
        assert all(tokenize_words(text))


class TestBuildVocab:
    def test_frequency_order(self):
        v = build_vocab([shard("en", ["a a b"])], size=CORE_SPECIALS.__len__() + 1 + 1)
        assert "a" in v.tokens
        assert "b" not in v.tokens

    def test_lexicographic_tiebreak(self):
        v = build_vocab([shard("en", ["b c"])], size=len(CORE_SPECIALS) + 1 + 1)
        assert "b" in v.tokens and "c" not in v.tokens

    def test_shard_order_invariance(self):
        shards = [shard("en", ["x y z"]), shard("fr", ["u v w"])]
        a = build_vocab(shards, 64).to_json()
        b = build_vocab(list(reversed(shards)), 64).to_json()
        assert a == b

    def test_size_too_small(self):
        with pytest.raises(VocabError, match="special"):
            build_vocab([shard("en", ["a"])], size=3)

    def test_specials_first(self):
        v = build_vocab([shard("en", ["a b"]), shard("fr", ["c"])], 64)
        assert v.tokens[:5] == CORE_SPECIALS
        assert v.tokens[5:7] == (lang_tag("en"), lang_tag("fr"))


class TestEncodeDecode:
    @pytest.fixture
    def vocab(self):
        return build_vocab([shard("en", ["dog cat runs fast"])], 64)

    def test_source_framing(self, vocab):
        seq = encode(["dog"], "en", vocab)
        assert seq.ids == (vocab.id_of("dog"), vocab.lang_tag_id("en"), vocab.eos_id)

    def test_target_framing(self, vocab):
        seq = encode(["dog"], "en", vocab, target=True)
        assert seq.ids == (vocab.lang_tag_id("en"), vocab.id_of("dog"), vocab.eos_id)

    def test_oov_maps_to_unk(self, vocab):
        seq = encode(["zebra"], "en", vocab)
        assert seq.ids[0] == vocab.unk_id

    def test_roundtrip(self, vocab):
        words = ["dog", "cat", "runs", "fast"]
        assert decode(encode(words, "en", vocab), vocab) == words
        assert decode(encode(words, "en", vocab, target=True), vocab) == words

    def test_unk_survives_decode(self, vocab):
        assert decode(encode(["zebra"], "en", vocab), vocab) == ["<unk>"]

    def test_out_of_range_id_errors(self, vocab):
        with pytest.raises(VocabError, match="out of range"):
            decode(TokenSeq(ids=(len(vocab) + 5,), lang="en"), vocab)

    def test_vocab_json_roundtrip(self, vocab):
        again = Vocab.from_json(vocab.to_json())
        assert again.tokens == vocab.tokens
        assert again.langs == vocab.langs
