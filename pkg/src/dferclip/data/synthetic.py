"""Seeded synthetic stand-in for a facial-expression video corpus.

Each class owns a template: a bright square at a class-specific location and
tint whose intensity oscillates at a class-specific temporal frequency over a
grey background.  A clip is its class template plus i.i.d. Gaussian noise,
clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..textpipe import expression_classes
from .clips import N_FOLDS, ClipRef, DatasetManifest, VideoClip, save_clip, save_manifest

_TINTS = np.array(
    [[1.0, 0.2, 0.2], [0.2, 1.0, 0.2], [0.2, 0.2, 1.0], [1.0, 1.0, 0.2], [0.2, 1.0, 1.0], [1.0, 0.2, 1.0]]
)


@dataclass(frozen=True)
class SyntheticSpec:
    C: int = 7
    clips_per_class: int = 30
    raw_frames_per_clip: int = 16
    noise: float = 0.05
    H: int = 16
    W: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.C < 2:
            raise ConfigError(f"synthetic data needs at least 2 classes, got {self.C}")
        if self.clips_per_class < 1 or self.raw_frames_per_clip < 1:
            raise ConfigError("clips_per_class and raw_frames_per_clip must be positive")
        if self.noise < 0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")
        if self.H < 4 or self.W < 4:
            raise ConfigError("frames must be at least 4x4")


def class_template(k: int, spec: SyntheticSpec) -> np.ndarray:
    """Noise-free ``[F, 3, H, W]`` frames for class ``k``."""
    F, H, W = spec.raw_frames_per_clip, spec.H, spec.W
    side_h, side_w = max(2, H // 4), max(2, W // 4)
    cells_w = W // side_w
    cell = k % (cells_w * (H // side_h))
    top, left = (cell // cells_w) * side_h, (cell % cells_w) * side_w
    freq = 1 + k % 3
    phase = 2.0 * math.pi * k / spec.C
    t = np.arange(F)
    level = 0.55 + 0.35 * np.sin(2.0 * math.pi * freq * t / F + phase)

    frames = np.full((F, 3, H, W), 0.3)
    tint = _TINTS[k % len(_TINTS)]
    frames[:, :, top:top + side_h, left:left + side_w] = (level[:, None] * tint[None, :])[:, :, None, None]
    return frames


def templates(spec: SyntheticSpec) -> np.ndarray:
    return np.stack([class_template(k, spec) for k in range(spec.C)])


def template_oracle(frames: np.ndarray, spec: SyntheticSpec) -> int:
    """Nearest class template in squared error."""
    d = ((templates(spec) - frames[None]) ** 2).reshape(spec.C, -1).sum(axis=1)
    return int(np.argmin(d))


def generate_synthetic(spec: SyntheticSpec, out_dir: str | Path | None = None) -> tuple[DatasetManifest, list[VideoClip]]:
    """Build the clips (class-interleaved, folds round-robin) and optionally write them.

    With ``out_dir`` the clip files go to ``out_dir/clips/`` and the manifest
    to ``out_dir/manifest.json``.
    """
    rng = np.random.default_rng(spec.seed)
    temps = templates(spec)
    classes = list(expression_classes(spec.C))
    clips: list[VideoClip] = []
    refs: list[ClipRef] = []
    i = 0
    for j in range(spec.clips_per_class):
        for k in range(spec.C):
            frames = temps[k] + spec.noise * rng.standard_normal(temps[k].shape)
            np.clip(frames, 0.0, 1.0, out=frames)
            sid = f"syn_{i:05d}"
            fold = i % N_FOLDS
            clips.append(VideoClip(frames, k, sid, fold))
            refs.append(ClipRef(f"clips/{sid}.bin", k, fold, sid))
            i += 1
    manifest = DatasetManifest(classes, refs, spec.H, spec.W, spec.seed, synthetic=asdict(spec))
    if out_dir is not None:
        out = Path(out_dir)
        (out / "clips").mkdir(parents=True, exist_ok=True)
        for clip, ref in zip(clips, refs):
            save_clip(clip, out / ref.path)
        save_manifest(manifest, out / "manifest.json")
        manifest.root = out
    return manifest, clips

