"""Prompt layout: SOT, learnable context slots, description tokens, EOT, padding."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import AssemblyError, ConfigError
from ..numerics import Tensor, matmul
from .descriptions import ClassDescription, ensemble_descriptions
from .vocab import CONTEXT_LENGTH, Vocabulary

POSITIONS = ("end", "middle")
PROMPT_KINDS = ("descriptor", "class")


class SlotKind(enum.IntEnum):
    SOT = 0
    CONTEXT = 1
    DESC = 2
    EOT = 3
    PAD = 4


@dataclass(frozen=True)
class PromptSpec:
    context_len: int = 8
    class_specific: bool = True
    description_position: str = "end"
    ensemble_size: int = 1
    prompt_kind: str = "descriptor"
    descriptors_k: int = 4

    def __post_init__(self):
        if self.context_len < 0:
            raise ConfigError(f"context_len must be >= 0, got {self.context_len}")
        if self.ensemble_size < 1:
            raise ConfigError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if self.description_position not in POSITIONS:
            raise ConfigError(f"description_position must be one of {POSITIONS}")
        if self.prompt_kind not in PROMPT_KINDS:
            raise ConfigError(f"prompt_kind must be one of {PROMPT_KINDS}")
        if self.descriptors_k < 1:
            raise ConfigError(f"descriptors_k must be >= 1, got {self.descriptors_k}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PromptSpec":
        return cls(**d)

    def context_shape(self, n_classes: int, width: int) -> tuple[int, ...]:
        if self.class_specific:
            return (n_classes, self.context_len, width)
        return (self.context_len, width)


@dataclass(frozen=True)
class PromptSequence:
    class_index: int
    token_ids: tuple[int, ...]  # PAD id at context slots
    slots: tuple[tuple[SlotKind, int], ...]  # (kind, token id or context index m)
    context_rows: tuple[int, ...]  # row into the flattened context bank, -1 elsewhere
    eot_index: int

    @property
    def n_context(self) -> int:
        return sum(1 for kind, _ in self.slots if kind == SlotKind.CONTEXT)

    @property
    def length(self) -> int:
        return self.eot_index + 1


def assemble_prompt(
    spec: PromptSpec,
    class_index: int,
    description_tokens: list[int] | tuple[int, ...],
    vocab: Vocabulary,
    context_length: int = CONTEXT_LENGTH,
) -> PromptSequence:
    """Lay out one class prompt.

    ``end`` puts all M contexts before the description; ``middle`` puts the
    first ceil(M/2) before it and the rest after.
    """
    m = spec.context_len
    used = 1 + m + len(description_tokens) + 1
    if used > context_length:
        raise AssemblyError(
            f"prompt for class {class_index} needs {used} tokens, {used - context_length} over the {context_length} cap"
        )
    row0 = class_index * m if spec.class_specific else 0
    before = m if spec.description_position == "end" else (m + 1) // 2

    slots: list[tuple[SlotKind, int]] = [(SlotKind.SOT, vocab.sot_id)]
    slots += [(SlotKind.CONTEXT, j) for j in range(before)]
    slots += [(SlotKind.DESC, t) for t in description_tokens]
    slots += [(SlotKind.CONTEXT, j) for j in range(before, m)]
    slots.append((SlotKind.EOT, vocab.eot_id))
    eot_index = len(slots) - 1
    slots += [(SlotKind.PAD, vocab.pad_id)] * (context_length - len(slots))

    ids = tuple(vocab.pad_id if kind == SlotKind.CONTEXT else v for kind, v in slots)
    rows = tuple(row0 + v if kind == SlotKind.CONTEXT else -1 for kind, v in slots)
    return PromptSequence(class_index, ids, tuple(slots), rows, eot_index)


def prompt_texts(spec: PromptSpec, descriptions: list[ClassDescription]) -> list[list[str]]:
    """Per class, the ``ensemble_size`` texts that fill the description slots."""
    if spec.prompt_kind == "class":
        return [[cd.class_name] * spec.ensemble_size for cd in descriptions]
    return [ensemble_descriptions(cd, spec.descriptors_k, spec.ensemble_size) for cd in descriptions]


def build_prompts(
    spec: PromptSpec, descriptions: list[ClassDescription], vocab: Vocabulary
) -> list[PromptSequence]:
    """All prompts, class-major: index ``k * ensemble_size + j``."""
    prompts = []
    for k, texts in enumerate(prompt_texts(spec, descriptions)):
        for text in texts:
            prompts.append(assemble_prompt(spec, k, vocab.encode(text), vocab))
    return prompts


def embed_prompts(prompts: list[PromptSequence], contexts: Tensor | None, token_embedding: Tensor) -> Tensor:
    """Embedding sequences ``[N, S, d]`` with context vectors scattered into their slots.

    The scatter is a product with a constant 0/1 placement matrix so that
    gradients reach ``contexts`` through the ordinary matmul rule.
    """
    ids = np.array([p.token_ids for p in prompts], dtype=np.int64)
    rows = np.array([p.context_rows for p in prompts], dtype=np.int64)
    n, s = ids.shape
    d = token_embedding.shape[-1]
    base = token_embedding[ids]
    if contexts is None or contexts.size == 0:
        return base
    bank = contexts.reshape(-1, d)
    keep = (rows < 0).astype(np.float64)[..., None]
    placement = np.zeros((n * s, bank.shape[0]))
    flat = rows.reshape(-1)
    hit = np.flatnonzero(flat >= 0)
    placement[hit, flat[hit]] = 1.0
    scattered = matmul(Tensor(placement), bank).reshape(n, s, d)
    return base * keep + scattered
