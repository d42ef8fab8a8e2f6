"""Clip and manifest types plus their on-disk formats."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import container
from ..errors import DataError

N_FOLDS = 5


@dataclass
class VideoClip:
    """``frames`` is ``[T_raw, 3, H, W]`` with values in [0, 1]."""

    frames: np.ndarray
    label: int
    source_id: str = ""
    fold: int | None = None

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 4 or self.frames.shape[0] < 1 or self.frames.shape[1] != 3:
            raise DataError(f"clip {self.source_id!r}: frames must be [T>=1, 3, H, W], got {self.frames.shape}")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class ClipRef:
    path: str
    label: int
    fold: int | None = None
    source_id: str = ""


@dataclass
class DatasetManifest:
    classes: list[str]
    clips: list[ClipRef]
    H: int
    W: int
    seed: int | None = None
    root: Path | None = field(default=None, compare=False)
    synthetic: dict | None = None

    def __post_init__(self):
        c = len(self.classes)
        for ref in self.clips:
            if not 0 <= ref.label < c:
                raise DataError(f"manifest clip {ref.path!r}: label {ref.label} outside [0, {c})")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.clips], dtype=np.int64)

    def resolve(self, ref: ClipRef) -> Path:
        p = Path(ref.path)
        return p if p.is_absolute() or self.root is None else self.root / p

    def load(self, ref: ClipRef) -> VideoClip:
        clip = load_clip(self.resolve(ref), n_classes=self.n_classes)
        if clip.frames.shape[2:] != (self.H, self.W):
            raise DataError(f"{self.resolve(ref)}: frame size {clip.frames.shape[2:]} != manifest {self.H}x{self.W}")
        return clip

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "H": self.H,
            "W": self.W,
            "seed": self.seed,
            "synthetic": self.synthetic,
            "clips": [
                {"path": r.path, "label": r.label, "fold": r.fold, "source_id": r.source_id} for r in self.clips
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, root: Path | None = None, source: str = "<manifest>") -> "DatasetManifest":
        try:
            clips = [
                ClipRef(str(c["path"]), int(c["label"]), None if c.get("fold") is None else int(c["fold"]),
                        str(c.get("source_id", "")))
                for c in d["clips"]
            ]
            return cls(list(d["classes"]), clips, int(d["H"]), int(d["W"]), d.get("seed"), root, d.get("synthetic"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise DataError(f"{source}: {exc}") from exc
            raise DataError(f"{source}: malformed manifest ({exc!r})") from exc


def save_clip(clip: VideoClip, path: str | Path) -> None:
    meta = {"kind": "clip", "label": int(clip.label), "source_id": clip.source_id, "fold": clip.fold}
    container.write(path, meta, {"frames": clip.frames})


def load_clip(path: str | Path, n_classes: int | None = None) -> VideoClip:
    meta, blobs = container.read(path)
    if "frames" not in blobs:
        raise DataError(f"{path}: no 'frames' blob")
    label = meta.get("label")
    if not isinstance(label, int) or label < 0 or (n_classes is not None and label >= n_classes):
        raise DataError(f"{path}: label {label!r} out of range")
    try:
        return VideoClip(blobs["frames"], label, meta.get("source_id", ""), meta.get("fold"))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text(json.dumps(manifest.to_dict(), indent=2), encoding="utf-8")


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"{path}: cannot read manifest ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed manifest JSON ({exc})") from exc
    return DatasetManifest.from_dict(raw, root=path.parent, source=str(path))


def load_dataset(path: str | Path) -> tuple[DatasetManifest, list[VideoClip]]:
    """Manifest plus every clip it references, in manifest order."""
    manifest = load_manifest(path)
    return manifest, [manifest.load(r) for r in manifest.clips]
