"""Word-level vocabulary and fixed-length tokenizer."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import DataError

log = logging.getLogger(__name__)

CONTEXT_LENGTH = 77

PAD = "<|pad|>"
UNK = "<|unk|>"
SOT = "<|startoftext|>"
EOT = "<|endoftext|>"
SPECIAL_TOKENS = (PAD, UNK, SOT, EOT)

# words stay whole, every punctuation mark becomes its own token
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def split_words(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class Vocabulary:
    def __init__(self, tokens: Iterable[str]):
        self.tokens: list[str] = list(tokens)
        self._index: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            if tok in self._index:
                raise DataError(f"duplicate vocabulary entry {tok!r} at line {i + 1}")
            self._index[tok] = i
        missing = [t for t in SPECIAL_TOKENS if t not in self._index]
        if missing:
            raise DataError(f"vocabulary lacks special tokens {missing}")
        self.pad_id = self._index[PAD]
        self.unk_id = self._index[UNK]
        self.sot_id = self._index[SOT]
        self.eot_id = self._index[EOT]

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocabulary":
        words = set()
        for text in texts:
            words.update(split_words(text))
        words.difference_update(SPECIAL_TOKENS)
        return cls(list(SPECIAL_TOKENS) + sorted(words))

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        return self._index.get(token, self.unk_id)

    def token_of(self, idx: int) -> str:
        return self.tokens[idx]

    def encode(self, text: str) -> list[int]:
        """Ids for ``text`` without SOT/EOT or padding."""
        return [self.id_of(w) for w in split_words(text)]

    def decode(self, ids: Iterable[int], skip_special: bool = True) -> str:
        specials = {self.pad_id, self.sot_id, self.eot_id}
        words = [self.tokens[i] for i in ids if not (skip_special and i in specials)]
        return " ".join(words)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        path = Path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise DataError(f"{path}: cannot read vocabulary ({exc})") from exc
        try:
            return cls([ln for ln in lines if ln])
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]
    length: int  # SOT + content + EOT, before padding
    truncated: bool

    @property
    def eot_index(self) -> int:
        return self.length - 1


def tokenize(text: str, vocab: Vocabulary, context_length: int = CONTEXT_LENGTH) -> TokenSequence:
    """Wrap ``text`` with SOT/EOT and pad to ``context_length``.

    Content tokens beyond the budget are dropped (SOT/EOT always survive) and
    the result is flagged as truncated.
    """
    content = vocab.encode(text)
    budget = context_length - 2
    truncated = len(content) > budget
    if truncated:
        log.warning("text truncated from %d to %d tokens", len(content), budget)
        content = content[:budget]
    ids = [vocab.sot_id, *content, vocab.eot_id]
    length = len(ids)
    ids += [vocab.pad_id] * (context_length - length)
    return TokenSequence(tuple(ids), length, truncated)
