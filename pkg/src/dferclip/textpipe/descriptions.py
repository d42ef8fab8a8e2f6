"""Facial-expression descriptors and the text built from them."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, DataError

# order in which the seven basic expressions are usually listed
BASIC_EXPRESSIONS = ("neutral", "happiness", "sadness", "surprise", "fear", "disgust", "anger")
EXTRA_EXPRESSIONS = ("contempt", "anxiety", "helplessness", "disappointment")
DEFAULT_DESCRIPTORS_K = 4


@dataclass(frozen=True)
class ClassDescription:
    class_name: str
    descriptors: tuple[str, ...]
    k_used: int = DEFAULT_DESCRIPTORS_K

    def __post_init__(self):
        if not self.descriptors:
            raise DataError(f"class {self.class_name!r} has no descriptors")
        if not 1 <= self.k_used <= len(self.descriptors):
            raise ConfigError(
                f"k_used={self.k_used} out of range for {self.class_name!r} ({len(self.descriptors)} descriptors)"
            )

    @property
    def text(self) -> str:
        return build_description(self, self.k_used)


def join_descriptors(phrases: list[str] | tuple[str, ...]) -> str:
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + ", and " + phrases[-1] + "."


def build_description(cd: ClassDescription, k: int) -> str:
    """Join the first ``k`` descriptors: ``"a, b, and c."``.  A single descriptor is returned as is."""
    if not 1 <= k <= len(cd.descriptors):
        raise ConfigError(f"k={k} out of range for {cd.class_name!r} ({len(cd.descriptors)} descriptors)")
    return join_descriptors(cd.descriptors[:k])


def ensemble_descriptions(cd: ClassDescription, k: int, members: int) -> list[str]:
    """Alternative descriptions for prompt ensembling.

    Member ``j`` takes ``k`` descriptors starting at offset ``j * k``,
    wrapping around the list, so member 0 is the plain top-``k`` text.
    """
    if members < 1:
        raise ConfigError(f"ensemble size must be >= 1, got {members}")
    build_description(cd, k)  # validates k
    n = len(cd.descriptors)
    out = []
    for j in range(members):
        picked = [cd.descriptors[(j * k + i) % n] for i in range(k)]
        out.append(join_descriptors(picked))
    return out


def default_descriptions_path() -> Path:
    return Path(str(resources.files("dferclip.textpipe").joinpath("descriptions.json")))


def load_descriptions(path: str | Path | None = None) -> dict[str, tuple[str, ...]]:
    """Read a ``{class_name: [descriptor, ...]}`` JSON file (the shipped one by default)."""
    path = Path(path) if path is not None else default_descriptions_path()
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: cannot load descriptions ({exc})") from exc
    if not isinstance(raw, dict):
        raise DataError(f"{path}: expected a JSON object of class -> descriptors")
    out = {}
    for name, phrases in raw.items():
        if not isinstance(phrases, list) or not phrases or not all(isinstance(p, str) for p in phrases):
            raise DataError(f"{path}: class {name!r} needs a non-empty list of strings")
        out[name] = tuple(phrases)
    return out


def class_descriptions(
    classes: list[str] | tuple[str, ...], table: dict[str, tuple[str, ...]], k: int = DEFAULT_DESCRIPTORS_K
) -> list[ClassDescription]:
    missing = [c for c in classes if c not in table]
    if missing:
        raise DataError(f"no descriptors for classes {missing}")
    return [ClassDescription(c, table[c], k) for c in classes]


def expression_classes(n: int) -> tuple[str, ...]:
    names = BASIC_EXPRESSIONS + EXTRA_EXPRESSIONS
    if not 2 <= n <= len(names):
        raise ConfigError(f"class count must be in [2, {len(names)}], got {n}")
    return names[:n]
