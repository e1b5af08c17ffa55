"""Closed-vocabulary prompt tokenizer and trainable token embeddings."""
from __future__ import annotations

import re
from typing import Iterable, Sequence

import torch
from torch import nn

PAD, UNK, NULL = 0, 1, 2
_SPECIAL = ("<pad>", "<unk>", "<null>")
_TOKEN = re.compile(r"[a-z0-9]+")
TEMPLATE_WORDS = ("a", "an", "with", "and", "objects", "object", "room")


def tokenize(prompt: str) -> list[str]:
    return _TOKEN.findall(prompt.lower())


def prompt_for(room_type: str, count: int) -> str:
    """Training prompt template built from a room's ground truth."""
    return f"a {room_type.replace('_', ' ')} with {count} objects"


class TextVocab:
    def __init__(self, words: Iterable[str]):
        uniq = sorted(set(words) - set(_SPECIAL))
        self.words = list(_SPECIAL) + uniq
        self._index = {w: i for i, w in enumerate(self.words)}

    @classmethod
    def from_corpus(cls, room_types: Iterable[str], categories: Iterable[str], n_max: int) -> "TextVocab":
        words = set(TEMPLATE_WORDS)
        for name in list(room_types) + list(categories):
            words.update(tokenize(name.replace("_", " ")))
        words.update(str(i) for i in range(n_max + 1))
        return cls(words)

    def __len__(self) -> int:
        return len(self.words)

    def ids(self, prompt: str) -> list[int]:
        toks = tokenize(prompt)
        if not toks:
            return [NULL]
        return [self._index.get(w, UNK) for w in toks]

    def batch(self, prompts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        """Padded id matrix and padding mask (True at padding)."""
        seqs = [self.ids(p) for p in prompts]
        length = max(len(s) for s in seqs)
        ids = torch.full((len(seqs), length), PAD, dtype=torch.long)
        for i, s in enumerate(seqs):
            ids[i, : len(s)] = torch.tensor(s)
        return ids, ids == PAD

    def to_json(self) -> list[str]:
        return list(self.words)

    @classmethod
    def from_json(cls, words: list[str]) -> "TextVocab":
        v = cls(())
        v.words = list(words)
        v._index = {w: i for i, w in enumerate(v.words)}
        return v


def null_batch(n: int) -> tuple[torch.Tensor, torch.Tensor]:
    ids = torch.full((n, 1), NULL, dtype=torch.long)
    return ids, torch.zeros((n, 1), dtype=torch.bool)


class TextEncoder(nn.Module):
    """Per-token embedding lookup; row ``NULL`` is the unconditional feature."""

    def __init__(self, vocab_size: int, dim: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, dim, padding_idx=PAD)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        return self.embed(ids)
