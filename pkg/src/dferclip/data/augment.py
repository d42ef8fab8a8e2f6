"""Clip-level augmentation: one random transform shared by every frame of a clip."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

AUGMENT_FLAGS = ("flip", "crop", "rotate", "jitter")


@dataclass(frozen=True)
class AugmentParams:
    flip: bool = False
    crop: tuple[float, float, float, float] | None = None  # top, left, height, width in pixels
    angle: float | None = None  # degrees, counter-clockwise
    gain: tuple[float, float, float] | None = None
    bias: tuple[float, float, float] | None = None


def draw_params(
    rng: np.random.Generator,
    flags: tuple[str, ...] | frozenset[str],
    H: int,
    W: int,
    scale: tuple[float, float] = (0.7, 1.0),
    ratio: tuple[float, float] = (3 / 4, 4 / 3),
    max_angle: float = 10.0,
) -> AugmentParams:
    unknown = set(flags) - set(AUGMENT_FLAGS)
    if unknown:
        raise ValueError(f"unknown augmentation flags {sorted(unknown)}")
    flip = "flip" in flags and bool(rng.random() < 0.5)
    crop = None
    if "crop" in flags:
        area = H * W * rng.uniform(*scale)
        aspect = np.exp(rng.uniform(np.log(ratio[0]), np.log(ratio[1])))
        ch = float(min(H, np.sqrt(area / aspect)))
        cw = float(min(W, np.sqrt(area * aspect)))
        crop = (float(rng.uniform(0, H - ch)), float(rng.uniform(0, W - cw)), ch, cw)
    angle = float(rng.uniform(-max_angle, max_angle)) if "rotate" in flags else None
    gain = bias = None
    if "jitter" in flags:
        gain = tuple(float(g) for g in rng.uniform(0.8, 1.2, size=3))
        bias = tuple(float(b) for b in rng.uniform(-0.1, 0.1, size=3))
    return AugmentParams(flip, crop, angle, gain, bias)


def _sample_grid(H: int, W: int, p: AugmentParams) -> np.ndarray | None:
    """Source coordinates ``[2, H, W]`` for crop-resize then rotation, or None if neither applies."""
    if p.crop is None and p.angle is None:
        return None
    yy, xx = np.meshgrid(np.arange(H, dtype=np.float64), np.arange(W, dtype=np.float64), indexing="ij")
    if p.angle is not None:
        # inverse rotation about the image centre
        cy, cx = (H - 1) / 2.0, (W - 1) / 2.0
        a = np.deg2rad(p.angle)
        dy, dx = yy - cy, xx - cx
        yy = cy + np.cos(a) * dy - np.sin(a) * dx
        xx = cx + np.sin(a) * dy + np.cos(a) * dx
    if p.crop is not None:
        top, left, ch, cw = p.crop
        yy = top + (yy + 0.5) * ch / H - 0.5
        xx = left + (xx + 0.5) * cw / W - 0.5
    return np.stack([yy, xx])


def apply_params(frames: np.ndarray, p: AugmentParams) -> np.ndarray:
    """Apply ``p`` to every frame of ``[T, 3, H, W]``."""
    out = np.asarray(frames, dtype=np.float64)
    if p.flip:
        out = out[..., ::-1]
    T, C, H, W = out.shape
    grid = _sample_grid(H, W, p)
    if grid is not None:
        warped = np.empty_like(out)
        for t in range(T):
            for c in range(C):
                warped[t, c] = ndimage.map_coordinates(out[t, c], grid, order=1, mode="nearest")
        out = warped
    if p.gain is not None:
        g = np.asarray(p.gain)[None, :, None, None]
        b = np.asarray(p.bias)[None, :, None, None]
        out = np.clip(out * g + b, 0.0, 1.0)
    return np.ascontiguousarray(out)


def augment(
    frames: np.ndarray,
    rng: np.random.Generator,
    flags: tuple[str, ...] | frozenset[str] = (),
    train: bool = True,
) -> np.ndarray:
    """Draw one transform and apply it to the whole clip.  Identity outside training."""
    if not train or not flags:
        return np.asarray(frames, dtype=np.float64)
    _, _, H, W = np.shape(frames)
    return apply_params(frames, draw_params(rng, flags, H, W))
