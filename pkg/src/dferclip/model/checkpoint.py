from __future__ import annotations

from pathlib import Path

from .. import container
from .network import DFERCLIP


def save_checkpoint(model: DFERCLIP, path: str | Path, extra: dict | None = None) -> None:
    meta = {"kind": "checkpoint", **model.metadata()}
    if extra:
        meta["extra"] = extra
    container.write(path, meta, model.state_dict())


def load_checkpoint(path: str | Path) -> tuple[DFERCLIP, dict]:
    meta, blobs = container.read(path)
    model = DFERCLIP.from_metadata(meta)
    model.load_state_dict(blobs)
    return model, meta
