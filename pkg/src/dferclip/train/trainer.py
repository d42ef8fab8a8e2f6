"""SGD training with per-group learning rates and a step schedule."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from ..data import AUGMENT_FLAGS, VideoClip, augment, sample_frames
from ..errors import ConfigError, NumericError, TrainingError
from ..evalcli.metrics import MetricsReport, metrics_report
from ..model import DFERCLIP, ModelConfig, save_checkpoint
from ..numerics import backward, get_tape
from ..textpipe import PromptSpec
from .groups import ParamGroups, partition_parameters
from .schedule import lr_at_epoch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 8
    milestones: tuple[int, ...] = (30, 40)
    gamma: float = 0.1
    momentum: float = 0.0
    seeds: tuple[int, ...] = (0, 1, 2)
    lr_img: float = 1e-5
    lr_tm: float = 1e-2
    lr_ctx: float = 1e-3
    eval_each_epoch: bool = True
    sampling: str = "uniform_segment"
    augment: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "milestones", tuple(int(m) for m in self.milestones))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "augment", tuple(self.augment))
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        ms = self.milestones
        if any(b <= a for a, b in zip(ms, ms[1:])) or any(m < 0 or m >= self.epochs for m in ms):
            raise ConfigError(f"milestones {ms} must be strictly increasing and within [0, {self.epochs})")
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.momentum < 0:
            raise ConfigError(f"momentum must be >= 0, got {self.momentum}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if min(self.lr_img, self.lr_tm, self.lr_ctx) < 0:
            raise ConfigError("learning rates must be >= 0")
        bad = set(self.augment) - set(AUGMENT_FLAGS)
        if bad:
            raise ConfigError(f"unknown augmentation flags {sorted(bad)}")

    @property
    def base_lrs(self) -> dict[str, float]:
        return {"image": self.lr_img, "temporal": self.lr_tm, "context": self.lr_ctx}

    def lrs_at(self, epoch: int) -> dict[str, float]:
        return {g: lr_at_epoch(lr, epoch, self.milestones, self.gamma) for g, lr in self.base_lrs.items()}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown train config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def full_scale(cls) -> "TrainConfig":
        return cls(batch_size=48, augment=AUGMENT_FLAGS)

    @classmethod
    def toy(cls, epochs: int = 30, **overrides) -> "TrainConfig":
        """Desk-scale recipe: milestones at 60% and 80% of the run, smaller rates.

        Randomly initialised encoders give feature norms far from pretrained
        ones, and the 1/tau logit scale makes the full-size rates diverge.
        """
        ms = tuple(sorted({m for m in (int(epochs * 0.6), int(epochs * 0.8)) if 0 < m < epochs}))
        kw = {"lr_img": 1e-4, "lr_tm": 1e-4, "lr_ctx": 1e-3, "milestones": ms}
        kw.update(overrides)
        return cls(epochs=epochs, **kw)


class SGD:
    """Plain SGD with optional heavy-ball momentum, one learning rate per group."""

    def __init__(self, groups: ParamGroups, momentum: float = 0.0):
        self.groups = groups.trainable()
        self.momentum = momentum
        self._velocity: dict[int, np.ndarray] = {}

    def zero_grad(self) -> None:
        for params in self.groups.values():
            for _, p in params:
                p.grad = None

    def step(self, lrs: dict[str, float]) -> None:
        for group, params in self.groups.items():
            lr = lrs[group]
            for _, p in params:
                if p.grad is None:
                    continue
                g = p.grad
                if self.momentum:
                    v = self._velocity.get(id(p))
                    v = g.copy() if v is None else self.momentum * v + g
                    self._velocity[id(p)] = v
                    g = v
                if lr != 0.0:
                    p.data -= lr * g


@dataclass
class RunRecord:
    seed: int
    train_loss: list[float] = field(default_factory=list)
    eval_war: list[float] = field(default_factory=list)
    eval_uar: list[float] = field(default_factory=list)
    train_war: float | None = None
    train_uar: float | None = None
    final_war: float | None = None
    final_uar: float | None = None
    best_war: float | None = None
    best_epoch: int | None = None
    checkpoint: str | None = None
    best_checkpoint: str | None = None
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)

    def same_run(self, other: "RunRecord") -> bool:
        """Equality on everything except wall time."""
        a, b = self.to_dict(), other.to_dict()
        a.pop("wall_time"), b.pop("wall_time")
        return a == b

    def curve_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "loss", "war", "uar"])
        for e, loss in enumerate(self.train_loss):
            war = self.eval_war[e] if e < len(self.eval_war) else ""
            uar = self.eval_uar[e] if e < len(self.eval_uar) else ""
            w.writerow([e, repr(loss), "" if war == "" else repr(war), "" if uar == "" else repr(uar)])
        return buf.getvalue()


def make_batch(
    clips: Sequence[VideoClip],
    T: int,
    sampling: str = "uniform_segment",
    train: bool = False,
    rng: np.random.Generator | None = None,
    aug_flags: tuple[str, ...] = (),
) -> tuple[np.ndarray, np.ndarray]:
    frames = []
    for clip in clips:
        x = sample_frames(clip, T, sampling, rng, train=train)
        if train and aug_flags:
            x = augment(x, rng, aug_flags, train=True)
        frames.append(x)
    return np.stack(frames), np.array([c.label for c in clips], dtype=np.int64)


def train_step(
    model: DFERCLIP,
    clips: np.ndarray,
    labels: np.ndarray,
    optimizer: SGD,
    lrs: dict[str, float],
    batch_id: int | None = None,
) -> float:
    """Forward, cross-entropy, backward, one SGD update.  Returns the pre-update loss."""
    if len(labels) == 0:
        raise TrainingError("empty batch", batch_id)
    get_tape().reset()
    optimizer.zero_grad()
    try:
        loss = model.loss(clips, labels)
    except NumericError as exc:
        get_tape().reset()
        raise TrainingError(f"numeric failure in batch {batch_id}: {exc}", batch_id) from exc
    value = float(loss.data)
    if not np.isfinite(value):
        get_tape().reset()
        raise TrainingError(f"non-finite loss {value} in batch {batch_id}", batch_id)
    backward(loss)
    optimizer.step(lrs)
    return value


def evaluate(
    model: DFERCLIP, clips: Sequence[VideoClip], sampling: str = "uniform_segment", batch_size: int = 32
) -> MetricsReport:
    preds = []
    for i in range(0, len(clips), batch_size):
        x, _ = make_batch(clips[i:i + batch_size], model.cfg.T, sampling)
        preds.append(model.predict(x).label)
    labels = [c.label for c in clips]
    return metrics_report(np.concatenate(preds), labels, model.cfg.C)


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    shuffle_ss, sample_ss = np.random.SeedSequence([seed, 1]).spawn(2)
    return np.random.default_rng(shuffle_ss), np.random.default_rng(sample_ss)


def train_one(
    model: DFERCLIP,
    train_clips: Sequence[VideoClip],
    eval_clips: Sequence[VideoClip] | None,
    cfg: TrainConfig,
    seed: int,
    out_dir: str | Path | None = None,
) -> RunRecord:
    """Train ``model`` in place for ``cfg.epochs`` epochs."""
    start = time.perf_counter()
    groups = partition_parameters(model)
    opt = SGD(groups, cfg.momentum)
    shuffle_rng, sample_rng = _streams(seed)
    rec = RunRecord(seed=seed)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    n = len(train_clips)
    step = 0
    for epoch in range(cfg.epochs):
        lrs = cfg.lrs_at(epoch)
        order = shuffle_rng.permutation(n)
        losses = []
        for b in range(0, n, cfg.batch_size):
            batch = [train_clips[i] for i in order[b:b + cfg.batch_size]]
            x, y = make_batch(batch, model.cfg.T, cfg.sampling, True, sample_rng, cfg.augment)
            losses.append(train_step(model, x, y, opt, lrs, batch_id=step))
            step += 1
        rec.train_loss.append(float(np.mean(losses)))
        if eval_clips and (cfg.eval_each_epoch or epoch == cfg.epochs - 1):
            m = evaluate(model, eval_clips, cfg.sampling)
            rec.eval_war.append(m.war)
            rec.eval_uar.append(m.uar)
            if rec.best_war is None or m.war > rec.best_war:
                rec.best_war, rec.best_epoch = m.war, epoch
                if out is not None:
                    rec.best_checkpoint = str(out / "best.ckpt")
                    save_checkpoint(model, rec.best_checkpoint, {"epoch": epoch, "seed": seed})
        if out is not None:
            rec.checkpoint = str(out / "last.ckpt")
            save_checkpoint(model, rec.checkpoint, {"epoch": epoch, "seed": seed})
        log.info("seed %d epoch %d loss %.4f", seed, epoch, rec.train_loss[-1])
    tm = evaluate(model, train_clips, cfg.sampling)
    rec.train_war, rec.train_uar = tm.war, tm.uar
    if rec.eval_war:
        rec.final_war, rec.final_uar = rec.eval_war[-1], rec.eval_uar[-1]
    rec.wall_time = time.perf_counter() - start
    return rec


def fit(
    model_cfg: ModelConfig,
    prompt_spec: PromptSpec,
    classes: Sequence[str],
    train_clips: Sequence[VideoClip],
    eval_clips: Sequence[VideoClip] | None,
    cfg: TrainConfig,
    descriptions: dict | None = None,
    out_dir: str | Path | None = None,
) -> list[RunRecord]:
    """One freshly initialised model per seed in ``cfg.seeds``.

    A failing seed stops the sweep; records of completed seeds are kept on
    the raised error as ``error.records``.
    """
    records: list[RunRecord] = []
    for seed in cfg.seeds:
        model = DFERCLIP(model_cfg, prompt_spec, list(classes), descriptions=descriptions, seed=seed)
        run_dir = Path(out_dir) / f"seed_{seed}" if out_dir is not None else None
        try:
            records.append(train_one(model, train_clips, eval_clips, cfg, seed, run_dir))
        except TrainingError as exc:
            exc.records = records
            raise
        if run_dir is not None:
            (run_dir / "record.json").write_text(json.dumps(records[-1].to_dict(), indent=2))
            (run_dir / "curve.csv").write_text(records[-1].curve_csv())
    return records


def summarize(records: Sequence[RunRecord]) -> dict:
    """Mean final metrics over seeds, alongside the per-seed values."""
    wars = [r.final_war for r in records if r.final_war is not None]
    uars = [r.final_uar for r in records if r.final_uar is not None]
    return {
        "seeds": [r.seed for r in records],
        "war": float(np.mean(wars)) if wars else None,
        "uar": float(np.mean(uars)) if uars else None,
        "per_seed_war": wars,
        "per_seed_uar": uars,
        "train_war": float(np.mean([r.train_war for r in records])),
    }
