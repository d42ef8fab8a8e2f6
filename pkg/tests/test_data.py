import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dferclip.data import (
    AugmentParams,
    DatasetManifest,
    SyntheticSpec,
    VideoClip,
    apply_params,
    augment,
    center_indices,
    draw_params,
    generate_synthetic,
    load_clip,
    load_dataset,
    load_manifest,
    sample_frames,
    save_clip,
    segment_indices,
    template_oracle,
)
from dferclip.errors import ConfigError, DataError
from dferclip.textpipe import expression_classes


def _clip(n, H=4, W=5, label=0):
    # frame t is filled with value t so sampled indices can be read back
    frames = np.broadcast_to(np.arange(n, dtype=float)[:, None, None, None], (n, 3, H, W)).copy()
    return VideoClip(frames, label, "c")


def _idx(frames):
    return frames[:, 0, 0, 0].astype(int).tolist()


# ---- sampling


def test_eval_identity_when_lengths_match():
    assert _idx(sample_frames(_clip(16), 16)) == list(range(16))


def test_eval_midpoints():
    assert _idx(sample_frames(_clip(32), 16)) == list(range(1, 32, 2))


def test_short_clip_repeats():
    assert _idx(sample_frames(_clip(4), 16)) == [0] * 4 + [1] * 4 + [2] * 4 + [3] * 4


def test_segment_formula_matches_loop():
    for n in range(1, 40):
        for T in (1, 3, 8, 16):
            expect = [int(np.floor((i + 0.5) * n / T)) for i in range(T)]
            assert segment_indices(n, T).tolist() == expect


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.integers(1, 20), st.integers(0, 2**31))
def test_train_indices_stay_in_segment(n, T, seed):
    idx = segment_indices(n, T, train=True, rng=np.random.default_rng(seed))
    assert idx.shape == (T,)
    assert np.all(np.diff(idx) >= 0)
    assert idx.min() >= 0 and idx.max() < n
    if n >= T:
        i = np.arange(T)
        assert np.all(idx >= (i * n) // T)
        assert np.all(idx < ((i + 1) * n) // T)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 80), st.integers(1, 20))
def test_eval_deterministic_monotone(n, T):
    a, b = segment_indices(n, T), segment_indices(n, T)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) >= 0)
    assert a.max() < n


def test_train_mode_varies_with_rng():
    a = segment_indices(64, 8, True, np.random.default_rng(0))
    b = segment_indices(64, 8, True, np.random.default_rng(1))
    assert not np.array_equal(a, b)


def test_center_mode():
    assert center_indices(20, 4).tolist() == [8, 9, 10, 11]
    assert _idx(sample_frames(_clip(20), 4, mode="center")) == [8, 9, 10, 11]
    assert center_indices(2, 4).tolist() == [0, 0, 1, 1]


@pytest.mark.parametrize("T", [0, -3])
def test_bad_T(T):
    with pytest.raises(ConfigError):
        sample_frames(_clip(8), T)


def test_bad_mode_and_missing_rng():
    with pytest.raises(ConfigError, match="unknown sampling mode"):
        sample_frames(_clip(8), 4, mode="random")
    with pytest.raises(ConfigError, match="rng"):
        segment_indices(8, 4, train=True)


def test_empty_clip_rejected():
    with pytest.raises(DataError):
        VideoClip(np.zeros((0, 3, 4, 4)), 0)


# ---- augmentation


def test_no_flags_identity():
    x = np.random.default_rng(0).uniform(size=(4, 3, 8, 8))
    assert np.array_equal(augment(x, np.random.default_rng(1), ()), x)
    assert np.array_equal(augment(x, np.random.default_rng(1), ("flip", "jitter"), train=False), x)


def test_flip_is_index_reversal_and_involution():
    x = np.random.default_rng(0).uniform(size=(3, 3, 5, 7))
    p = AugmentParams(flip=True)
    y = apply_params(x, p)
    for c in range(7):
        assert np.array_equal(y[..., c], x[..., 6 - c])
    assert np.array_equal(apply_params(y, p), x)


def test_same_transform_for_every_frame():
    frame = np.random.default_rng(0).uniform(size=(3, 12, 12))
    x = np.stack([frame] * 5)
    y = augment(x, np.random.default_rng(3), ("flip", "crop", "rotate", "jitter"))
    for t in range(1, 5):
        assert np.array_equal(y[t], y[0])


def test_augment_deterministic_for_seed():
    x = np.random.default_rng(0).uniform(size=(4, 3, 10, 10))
    flags = ("flip", "crop", "rotate", "jitter")
    a = augment(x, np.random.default_rng(7), flags)
    b = augment(x, np.random.default_rng(7), flags)
    assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sets(st.sampled_from(["flip", "crop", "rotate", "jitter"])))
def test_augment_keeps_shape_and_range(seed, flags):
    x = np.random.default_rng(seed).uniform(size=(2, 3, 9, 11))
    y = augment(x, np.random.default_rng(seed + 1), tuple(sorted(flags)))
    assert y.shape == x.shape
    assert y.min() >= 0.0 and y.max() <= 1.0


def test_jitter_bounds():
    for s in range(50):
        p = draw_params(np.random.default_rng(s), ("jitter",), 8, 8)
        assert all(0.8 <= g <= 1.2 for g in p.gain)
        assert all(-0.1 <= b <= 0.1 for b in p.bias)


def test_full_crop_no_rotation_is_identity():
    x = np.random.default_rng(0).uniform(size=(2, 3, 6, 6))
    y = apply_params(x, AugmentParams(crop=(0.0, 0.0, 6.0, 6.0)))
    assert np.allclose(y, x, atol=1e-12)


def test_rotate_zero_is_identity():
    x = np.random.default_rng(0).uniform(size=(2, 3, 6, 6))
    assert np.allclose(apply_params(x, AugmentParams(angle=0.0)), x, atol=1e-12)


def test_unknown_flag():
    with pytest.raises(ValueError, match="blur"):
        draw_params(np.random.default_rng(0), ("blur",), 8, 8)


# ---- synthetic data


def test_noiseless_oracle_is_perfect():
    spec = SyntheticSpec(C=7, clips_per_class=5, noise=0.0, seed=0)
    _, clips = generate_synthetic(spec)
    assert all(template_oracle(c.frames, spec) == c.label for c in clips)


def test_heavy_noise_oracle_near_chance():
    spec = SyntheticSpec(C=7, clips_per_class=30, noise=10.0, seed=0)
    _, clips = generate_synthetic(spec)
    acc = np.mean([template_oracle(c.frames, spec) == c.label for c in clips])
    # frozen for seed 0; chance is 1/7
    assert acc == pytest.approx(45 / 210)
    assert acc < 2 / 7


def test_generation_layout():
    spec = SyntheticSpec(C=3, clips_per_class=4, raw_frames_per_clip=6, H=8, W=8, seed=1)
    manifest, clips = generate_synthetic(spec)
    assert len(clips) == 12
    assert [c.label for c in clips] == [0, 1, 2] * 4
    assert [c.fold for c in clips] == [i % 5 for i in range(12)]
    assert all(c.frames.shape == (6, 3, 8, 8) for c in clips)
    assert all(0.0 <= c.frames.min() and c.frames.max() <= 1.0 for c in clips)
    assert manifest.classes == ["neutral", "happiness", "sadness"]


def test_folds_partition():
    _, clips = generate_synthetic(SyntheticSpec(C=3, clips_per_class=7, seed=0))
    folds = [{c.source_id for c in clips if c.fold == f} for f in range(5)]
    assert sum(len(f) for f in folds) == len(clips)
    assert set().union(*folds) == {c.source_id for c in clips}


def test_same_seed_identical_files(tmp_path):
    spec = SyntheticSpec(C=2, clips_per_class=3, raw_frames_per_clip=4, H=8, W=8, seed=5)
    generate_synthetic(spec, tmp_path / "a")
    generate_synthetic(spec, tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 7
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_different_seed_differs():
    a = generate_synthetic(SyntheticSpec(C=2, clips_per_class=1, seed=0))[1][0].frames
    b = generate_synthetic(SyntheticSpec(C=2, clips_per_class=1, seed=1))[1][0].frames
    assert not np.array_equal(a, b)


def test_too_few_classes():
    with pytest.raises(ConfigError):
        SyntheticSpec(C=1)


# ---- files


def test_dataset_round_trip(tmp_path):
    spec = SyntheticSpec(C=7, clips_per_class=2, raw_frames_per_clip=4, H=8, W=8, seed=2)
    manifest, clips = generate_synthetic(spec, tmp_path)
    m2, c2 = load_dataset(tmp_path)
    assert m2 == manifest
    assert m2.classes == list(expression_classes(7))
    for a, b in zip(clips, c2):
        assert np.array_equal(a.frames, b.frames)
        assert (a.label, a.fold, a.source_id) == (b.label, b.fold, b.source_id)


def test_seven_basic_expressions(tmp_path):
    generate_synthetic(SyntheticSpec(C=7, clips_per_class=1, raw_frames_per_clip=2, H=4, W=4), tmp_path)
    m = load_manifest(tmp_path / "manifest.json")
    assert m.classes == ["neutral", "happiness", "sadness", "surprise", "fear", "disgust", "anger"]


def test_truncated_clip_file(tmp_path):
    clip = _clip(3)
    save_clip(clip, tmp_path / "c.bin")
    data = (tmp_path / "c.bin").read_bytes()
    (tmp_path / "c.bin").write_bytes(data[:-8])
    with pytest.raises(DataError, match=rf"c\.bin.*byte offset {len(data) - 8}"):
        load_clip(tmp_path / "c.bin")


def test_clip_label_out_of_range(tmp_path):
    save_clip(_clip(2, label=5), tmp_path / "c.bin")
    with pytest.raises(DataError, match="c.bin.*label 5"):
        load_clip(tmp_path / "c.bin", n_classes=3)


def test_manifest_errors(tmp_path):
    with pytest.raises(DataError, match="missing.json"):
        load_manifest(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DataError, match="bad.json"):
        load_manifest(bad)
    bad.write_text(json.dumps({"classes": ["a"], "H": 4}))
    with pytest.raises(DataError, match="bad.json.*malformed"):
        load_manifest(bad)
    bad.write_text(json.dumps({"classes": ["a", "b"], "H": 4, "W": 4, "clips": [{"path": "x", "label": 2}]}))
    with pytest.raises(DataError, match="bad.json.*label 2"):
        load_manifest(bad)


def test_missing_clip_file_named(tmp_path):
    m = DatasetManifest.from_dict({"classes": ["a", "b"], "H": 4, "W": 4, "clips": [{"path": "gone.bin", "label": 0}]},
                                  root=tmp_path)
    with pytest.raises(DataError, match="gone.bin"):
        m.load(m.clips[0])


def test_frame_size_mismatch(tmp_path):
    save_clip(_clip(2, H=4, W=4), tmp_path / "c.bin")
    m = DatasetManifest.from_dict({"classes": ["a"], "H": 8, "W": 8, "clips": [{"path": "c.bin", "label": 0}]},
                                  root=tmp_path)
    with pytest.raises(DataError, match="frame size"):
        m.load(m.clips[0])
