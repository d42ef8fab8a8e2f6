from collections import Counter
from dataclasses import dataclass

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dferclip.data import SyntheticSpec, generate_synthetic
from dferclip.errors import ProtocolError
from dferclip.evalcli import holdout_split, kfold_protocol, split


@dataclass
class Item:
    label: int
    fold: int | None
    name: str = ""


def _round_robin(n, C=2):
    return [Item(i % C, i % 5, f"c{i}") for i in range(n)]


def test_ten_clips_two_per_fold():
    items = _round_robin(10)
    for f in range(5):
        train, test = kfold_protocol(items, f)
        assert len(test) == 2 and len(train) == 8
        assert [it.name for it in test] == [f"c{f}", f"c{f + 5}"]


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 60))
def test_folds_partition(n):
    items = _round_robin(n)
    seen = Counter()
    for f in range(5):
        train, test = kfold_protocol(items, f)
        assert not {id(x) for x in train} & {id(x) for x in test}
        assert len(train) + len(test) == n
        seen.update(it.name for it in test)
    assert seen == Counter(it.name for it in items)


def test_manifest_input():
    manifest, _ = generate_synthetic(SyntheticSpec(C=2, clips_per_class=5, raw_frames_per_clip=2, H=4, W=4))
    train, test = kfold_protocol(manifest, 1)
    assert [r.fold for r in test] == [1, 1]
    assert len(train) == 8


def test_kfold_errors():
    with pytest.raises(ProtocolError, match="fold 5"):
        kfold_protocol(_round_robin(10), 5)
    with pytest.raises(ProtocolError, match="no fold label"):
        kfold_protocol([Item(0, None), Item(1, 0)], 0)
    with pytest.raises(ProtocolError, match="empty"):
        kfold_protocol([Item(0, 0), Item(1, 0)], 3)
    with pytest.raises(ProtocolError, match="outside"):
        kfold_protocol([Item(0, 7)], 0)


def test_holdout_eighty_twenty():
    items = [Item(i % 3, None, f"c{i}") for i in range(30)]
    train, test = holdout_split(items, 0.2, seed=0)
    assert len(test) == 6 and len(train) == 24
    assert Counter(it.label for it in test) == {0: 2, 1: 2, 2: 2}
    assert {it.name for it in train}.isdisjoint(it.name for it in test)
    again = holdout_split(items, 0.2, seed=0)
    assert [it.name for it in again[1]] == [it.name for it in test]
    other = holdout_split(items, 0.2, seed=1)
    assert [it.name for it in other[1]] != [it.name for it in test]


def test_holdout_small_class_keeps_both_sides():
    items = [Item(0, None), Item(0, None), Item(1, None), Item(1, None), Item(1, None)]
    train, test = holdout_split(items, 0.2)
    for k in (0, 1):
        assert any(it.label == k for it in train) and any(it.label == k for it in test)


def test_split_dispatch():
    items = _round_robin(10)
    assert split(items, "kfold", 2) == kfold_protocol(items, 2)
    with pytest.raises(ProtocolError, match="loso"):
        split(items, "loso")
    with pytest.raises(ProtocolError):
        holdout_split(items, 1.5)
