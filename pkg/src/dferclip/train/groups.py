from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import IntegrityError
from ..model import DFERCLIP, Parameter

GROUP_PREFIXES = {
    "image": ("image.",),
    "temporal": ("temporal.", "log_tau"),
    "context": ("prompt.",),
    "frozen": ("text.",),
}


@dataclass
class ParamGroups:
    image: list[tuple[str, Parameter]] = field(default_factory=list)
    temporal: list[tuple[str, Parameter]] = field(default_factory=list)
    context: list[tuple[str, Parameter]] = field(default_factory=list)
    frozen: list[tuple[str, Parameter]] = field(default_factory=list)

    def trainable(self) -> dict[str, list[tuple[str, Parameter]]]:
        return {"image": self.image, "temporal": self.temporal, "context": self.context}

    def size(self, group: str) -> int:
        return sum(p.size for _, p in getattr(self, group))

    def all_named(self) -> list[tuple[str, Parameter]]:
        return self.image + self.temporal + self.context + self.frozen


def partition_parameters(model: DFERCLIP) -> ParamGroups:
    """Split parameters into the three trainable groups and the frozen text encoder."""
    groups = ParamGroups()
    unassigned = []
    for name, p in model.named_parameters():
        for group, prefixes in GROUP_PREFIXES.items():
            if name.startswith(prefixes):
                getattr(groups, group).append((name, p))
                break
        else:
            unassigned.append(name)
    if unassigned:
        raise IntegrityError(f"parameters not assigned to any group: {unassigned}")
    still_trainable = [n for n, p in groups.frozen if p.requires_grad]
    if still_trainable:
        raise IntegrityError(f"frozen-group parameters still require grad: {still_trainable}")
    return groups
