"""Train/test splits: 5-fold cross-validation and a single 80/20 holdout."""

from __future__ import annotations

import numpy as np

from ..data import N_FOLDS, DatasetManifest
from ..errors import ProtocolError

def _items(dataset) -> list:
    return list(dataset.clips) if isinstance(dataset, DatasetManifest) else list(dataset)


def kfold_protocol(dataset, fold: int, n_folds: int = N_FOLDS) -> tuple[list, list]:
    """Test on ``fold``, train on the rest.

    ``dataset`` is a manifest or any sequence of objects carrying ``.fold``;
    the returned lists hold the same objects in their original order.
    """
    if not 0 <= fold < n_folds:
        raise ProtocolError(f"fold {fold} outside [0, {n_folds})")
    items = _items(dataset)
    missing = [i for i, it in enumerate(items) if getattr(it, "fold", None) is None]
    if missing:
        raise ProtocolError(f"{len(missing)} clips have no fold label (first at index {missing[0]})")
    bad = [it.fold for it in items if not 0 <= it.fold < n_folds]
    if bad:
        raise ProtocolError(f"fold label {bad[0]} outside [0, {n_folds})")
    test = [it for it in items if it.fold == fold]
    train = [it for it in items if it.fold != fold]
    if not test:
        raise ProtocolError(f"fold {fold} is empty")
    return train, test


def holdout_split(dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[list, list]:
    """One stratified split, ``test_fraction`` of each class held out.

    Every class with at least two clips keeps at least one on each side.
    """
    if not 0 < test_fraction < 1:
        raise ProtocolError(f"test_fraction must be in (0, 1), got {test_fraction}")
    items = _items(dataset)
    if len(items) < 2:
        raise ProtocolError("need at least two clips for a holdout split")
    rng = np.random.default_rng(seed)
    labels = np.array([it.label for it in items])
    test_idx: set[int] = set()
    for k in np.unique(labels):
        idx = np.flatnonzero(labels == k)
        n_test = int(round(test_fraction * idx.size))
        if idx.size >= 2:
            n_test = min(max(n_test, 1), idx.size - 1)
        test_idx.update(rng.permutation(idx)[:n_test].tolist())
    train = [it for i, it in enumerate(items) if i not in test_idx]
    test = [it for i, it in enumerate(items) if i in test_idx]
    return train, test


def split(dataset, protocol: str = "kfold", fold: int = 0, seed: int = 0) -> tuple[list, list]:
    if protocol == "kfold":
        return kfold_protocol(dataset, fold)
    if protocol == "holdout":
        return holdout_split(dataset, seed=seed)
    raise ProtocolError(f"unknown protocol {protocol!r}; expected 'kfold' or 'holdout'")
