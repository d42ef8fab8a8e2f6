from __future__ import annotations

from bisect import bisect_right
from typing import Sequence


def lr_at_epoch(lr0: float, epoch: int, milestones: Sequence[int] = (30, 40), gamma: float = 0.1) -> float:
    """Step decay: ``lr0 * gamma ** (number of milestones <= epoch)``."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return lr0 * gamma ** bisect_right(sorted(milestones), epoch)
