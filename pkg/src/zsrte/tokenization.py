"""Tokenizer contract and implementations.

The rest of the package only needs: stable subtoken ids for each word, ids
for free text (relation names), the three marker ids, and the vocabulary
size. Anything satisfying that contract plugs in.
"""

from __future__ import annotations

import zlib
from typing import Protocol, runtime_checkable

PAD_ID = 0
CLS_ID = 1
SEP_ID = 2
_NUM_SPECIAL = 3


@runtime_checkable
class WordTokenizer(Protocol):
    pad_id: int
    cls_id: int
    sep_id: int
    vocab_size: int

    def word_ids(self, word: str) -> list[int]:
        """Subtoken ids for one word, in order. Never empty."""
        ...

    def text_ids(self, text: str) -> list[int]:
        """Subtoken ids for whitespace-separated free text."""
        ...


class HashTokenizer:
    """Deterministic open-vocabulary tokenizer for desk-scale runs and tests.

    Words are lowercased and cut into fixed-width character pieces; each piece
    hashes (crc32) into a fixed id range. No vocabulary files, no network,
    stable across platforms and processes.
    """

    def __init__(self, vocab_size: int = 32768, piece_chars: int = 5):
        if vocab_size <= _NUM_SPECIAL:
            raise ValueError("vocab_size must exceed the special token count")
        if piece_chars < 1:
            raise ValueError("piece_chars must be positive")
        self.pad_id = PAD_ID
        self.cls_id = CLS_ID
        self.sep_id = SEP_ID
        self.vocab_size = vocab_size
        self.piece_chars = piece_chars

    def _piece_id(self, piece: str) -> int:
        return _NUM_SPECIAL + zlib.crc32(piece.encode("utf-8")) % (self.vocab_size - _NUM_SPECIAL)

    def word_ids(self, word: str) -> list[int]:
        word = word.lower()
        if not word:
            return [self._piece_id("")]
        n = self.piece_chars
        return [self._piece_id(word[i : i + n]) for i in range(0, len(word), n)]

    def text_ids(self, text: str) -> list[int]:
        ids: list[int] = []
        for word in text.split():
            ids.extend(self.word_ids(word))
        return ids


class HFTokenizer:
    """Adapter wrapping a Hugging Face tokenizer behind the word contract."""

    def __init__(self, tokenizer):
        self._tok = tokenizer
        for attr in ("pad_token_id", "cls_token_id", "sep_token_id"):
            if getattr(tokenizer, attr, None) is None:
                raise ValueError(f"wrapped tokenizer lacks {attr}")
        self.pad_id = tokenizer.pad_token_id
        self.cls_id = tokenizer.cls_token_id
        self.sep_id = tokenizer.sep_token_id
        self.vocab_size = len(tokenizer)

    @classmethod
    def from_pretrained(cls, name_or_path: str) -> "HFTokenizer":
        from transformers import AutoTokenizer

        return cls(AutoTokenizer.from_pretrained(name_or_path))

    def word_ids(self, word: str) -> list[int]:
        ids = self._tok.encode(word, add_special_tokens=False)
        if not ids:
            unk = self._tok.unk_token_id
            if unk is None:
                raise ValueError(f"word {word!r} produced no subtokens and tokenizer has no unk id")
            ids = [unk]
        return list(ids)

    def text_ids(self, text: str) -> list[int]:
        ids: list[int] = []
        for word in text.split():
            ids.extend(self.word_ids(word))
        return ids
