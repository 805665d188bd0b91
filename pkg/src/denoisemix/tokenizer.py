"""Word-level tokenization and vocabulary handling.

The vocabulary is a frequency cutoff over word types with a fixed special
block at the low ids: PAD, UNK, BOS, EOS, MASK, then one ``<lang_xx>`` tag
per language (sorted by code).  Sequence framing:

  source:  tokens ... <lang_src> </s>
  target:  <lang_tgt> tokens ... </s>
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .corpus_io import BitextShard, MonoShard, check_lang

PAD, UNK, BOS, EOS, MASK = "<pad>", "<unk>", "<s>", "</s>", "<mask>"
CORE_SPECIALS = (PAD, UNK, BOS, EOS, MASK)


def lang_tag(lang: str) -> str:
    return f"<lang_{lang}>"


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize_words(text: str) -> list[str]:
    """Split on whitespace, then peel leading/trailing punctuation.

    Total function; re-tokenizing the space-joined output is a no-op.
    """
    tokens = []
    for chunk in text.split():
        start = 0
        end = len(chunk)
        while start < end and _is_punct(chunk[start]):
            tokens.append(chunk[start])
            start += 1
        trailing = []
        while end > start and _is_punct(chunk[end - 1]):
            trailing.append(chunk[end - 1])
            end -= 1
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(reversed(trailing))
    return tokens


class VocabError(Exception):
    pass


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    langs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def bos_id(self) -> int:
        return 2

    @property
    def eos_id(self) -> int:
        return 3

    @property
    def mask_id(self) -> int:
        return 4

    @property
    def num_specials(self) -> int:
        return len(CORE_SPECIALS) + len(self.langs)

    def id_of(self, token: str) -> int:
        return self._ids.get(token, self.unk_id)

    def lang_tag_id(self, lang: str) -> int:
        tid = self._ids.get(lang_tag(lang))
        if tid is None:
            raise VocabError(f"no language tag for {lang!r} in vocab")
        return tid

    def token_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.tokens):
            raise VocabError(f"id {idx} out of range for vocab of size {len(self.tokens)}")
        return self.tokens[idx]

    def is_special(self, idx: int) -> bool:
        return idx < self.num_specials

    def to_json(self) -> str:
        return json.dumps({"langs": list(self.langs), "tokens": list(self.tokens)})

    @classmethod
    def from_json(cls, text: str) -> "Vocab":
        raw = json.loads(text)
        return cls(tokens=tuple(raw["tokens"]), langs=tuple(raw["langs"]))


@dataclass(frozen=True)
class TokenSeq:
    ids: tuple[int, ...]
    lang: str


def build_vocab(shards, size: int) -> Vocab:
    """Keep the most frequent word types, ties broken lexicographically.

    `shards` may mix MonoShard and BitextShard (both sides counted).
    Deterministic under any shard ordering.
    """
    langs = set()
    counts: Counter[str] = Counter()
    for shard in shards:
        if isinstance(shard, MonoShard):
            langs.add(shard.lang)
            for sentence in shard.sentences:
                counts.update(tokenize_words(sentence))
        elif isinstance(shard, BitextShard):
            langs.update((shard.src_lang, shard.tgt_lang))
            for src, tgt in shard.pairs:
                counts.update(tokenize_words(src))
                counts.update(tokenize_words(tgt))
        else:
            raise TypeError(f"not a shard: {shard!r}")
    langs_sorted = tuple(sorted(check_lang(code) for code in langs))
    n_special = len(CORE_SPECIALS) + len(langs_sorted)
    if size <= n_special:
        raise VocabError(f"vocab size {size} must exceed the {n_special} special tokens")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [w for w, _ in ranked[: size - n_special]]
    tokens = tuple(CORE_SPECIALS) + tuple(lang_tag(code) for code in langs_sorted) + tuple(kept)
    return Vocab(tokens=tokens, langs=langs_sorted)


def encode(words: list[str], lang: str, vocab: Vocab, target: bool = False) -> TokenSeq:
    """Map words to ids with framing; OOV words become UNK."""
    body = [vocab.id_of(w) for w in words]
    if target:
        ids = [vocab.lang_tag_id(lang)] + body + [vocab.eos_id]
    else:
        ids = body + [vocab.lang_tag_id(lang), vocab.eos_id]
    return TokenSeq(ids=tuple(ids), lang=lang)


def decode(seq: TokenSeq, vocab: Vocab, keep_separators: bool = False) -> list[str]:
    """Inverse of encode, dropping framing and special tokens.

    UNK survives as the literal "<unk>" string so lossy positions stay
    visible.  With keep_separators, interior EOS tokens (used as packing
    separators) are kept; the final framing EOS is always dropped.
    """
    words = []
    for idx in seq.ids:
        token = vocab.token_of(idx)
        if vocab.is_special(idx) and idx != vocab.unk_id:
            if keep_separators and idx == vocab.eos_id:
                words.append(token)
            continue
        words.append(token)
    if keep_separators and words and words[-1] == EOS:
        words.pop()
    return words
