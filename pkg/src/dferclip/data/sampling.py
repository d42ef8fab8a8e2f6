from __future__ import annotations

import numpy as np

from ..errors import ConfigError, DataError
from .clips import VideoClip

SAMPLING_MODES = ("uniform_segment", "center")


def segment_indices(n: int, T: int, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
    """One frame index per equal segment of ``range(n)``.

    Eval picks ``floor((i + 0.5) n / T)``, the segment midpoint; training picks
    uniformly inside ``[floor(i n / T), floor((i + 1) n / T))``.  When
    ``n < T`` segments are shorter than a frame and indices repeat.
    """
    if T <= 0:
        raise ConfigError(f"T must be positive, got {T}")
    if n <= 0:
        raise DataError("cannot sample from an empty clip")
    i = np.arange(T)
    if not train:
        return np.floor((i + 0.5) * n / T).astype(np.int64)
    if rng is None:
        raise ConfigError("training-mode sampling needs an rng")
    lo = (i * n) // T
    hi = np.maximum(lo + 1, ((i + 1) * n) // T)
    return lo + (rng.random(T) * (hi - lo)).astype(np.int64)


def center_indices(n: int, T: int) -> np.ndarray:
    if T <= 0:
        raise ConfigError(f"T must be positive, got {T}")
    if n < T:
        return segment_indices(n, T)
    start = (n - T) // 2
    return np.arange(start, start + T)


def sample_frames(
    clip: VideoClip,
    T: int,
    mode: str = "uniform_segment",
    rng: np.random.Generator | None = None,
    train: bool = False,
) -> np.ndarray:
    """``T`` frames of ``clip`` in temporal order, ``[T, 3, H, W]``."""
    if mode == "uniform_segment":
        idx = segment_indices(clip.n_frames, T, train, rng)
    elif mode == "center":
        idx = center_indices(clip.n_frames, T)
    else:
        raise ConfigError(f"unknown sampling mode {mode!r}; expected one of {SAMPLING_MODES}")
    return clip.frames[idx]
