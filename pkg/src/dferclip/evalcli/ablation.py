"""Ablation sweeps: one fit per (row, seed), mean WAR/UAR per row."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..data import DatasetManifest, VideoClip
from ..errors import ConfigError, TrainingError
from ..model import ModelConfig
from ..textpipe import PromptSpec
from ..train import TrainConfig, fit
from .protocol import split

log = logging.getLogger(__name__)


class Axis(str, enum.Enum):
    CTX_LEN = "ctx_len"
    TM_DEPTH = "tm_depth"
    PROMPT_KIND = "prompt_kind"
    DESC_POSITION = "desc_position"
    CTX_SCOPE = "ctx_scope"
    ENSEMBLE = "ensemble"
    DESC_K = "desc_k"

    @classmethod
    def parse(cls, value: "str | Axis") -> "Axis":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("-", "_")
        for a in cls:
            if v in (a.value, a.name.lower()):
                return a
        raise ConfigError(f"unknown ablation axis {value!r}; expected one of {[a.value for a in cls]}")


def _int(v) -> int:
    try:
        return int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected an integer, got {v!r}") from None


def _choice(options):
    def conv(v):
        v = str(v).strip().lower()
        if v not in options:
            raise ConfigError(f"expected one of {options}, got {v!r}")
        return v
    return conv


# axis -> (config object, field, value parser)
_AXIS_FIELDS = {
    Axis.CTX_LEN: ("prompt", "context_len", _int),
    Axis.TM_DEPTH: ("model", "temporal_depth", _int),
    Axis.PROMPT_KIND: ("prompt", "prompt_kind", _choice(("class", "descriptor"))),
    Axis.DESC_POSITION: ("prompt", "description_position", _choice(("end", "middle"))),
    Axis.CTX_SCOPE: ("prompt", "class_specific", _choice(("class", "shared"))),
    Axis.ENSEMBLE: ("prompt", "ensemble_size", _int),
    Axis.DESC_K: ("prompt", "descriptors_k", _int),
}


def parse_value(axis: Axis, value):
    return _AXIS_FIELDS[Axis.parse(axis)][2](value)


@dataclass(frozen=True)
class AblationSpec:
    """``axes`` name the swept settings; each row gives one value per axis.

    Every axis touches exactly one configuration field.  A one-axis sweep is
    ``AblationSpec.single(axis, values)``.
    """

    axes: tuple[Axis, ...]
    rows: tuple[tuple, ...]
    model: ModelConfig = field(default_factory=ModelConfig)
    prompt: PromptSpec = field(default_factory=PromptSpec)
    train: TrainConfig = field(default_factory=TrainConfig.toy)
    name: str = "ablation"

    def __post_init__(self):
        axes = tuple(Axis.parse(a) for a in self.axes)
        if not axes:
            raise ConfigError("an ablation needs at least one axis")
        if len(set(axes)) != len(axes):
            raise ConfigError(f"repeated axis in {[a.value for a in axes]}")
        if not self.rows:
            raise ConfigError("an ablation needs at least one value")
        rows = []
        for row in self.rows:
            row = tuple(row) if isinstance(row, (tuple, list)) else (row,)
            if len(row) != len(axes):
                raise ConfigError(f"row {row} has {len(row)} values for {len(axes)} axes")
            rows.append(tuple(parse_value(a, v) for a, v in zip(axes, row)))
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "rows", tuple(rows))
        for row in self.rows:
            self.configs(row)  # validate every variant up front

    @classmethod
    def single(cls, axis, values: Sequence, **kw) -> "AblationSpec":
        return cls((Axis.parse(axis),), tuple((v,) for v in values), **kw)

    def configs(self, row: tuple) -> tuple[ModelConfig, PromptSpec]:
        model, prompt = self.model, self.prompt
        for axis, value in zip(self.axes, row):
            target, name, _ = _AXIS_FIELDS[axis]
            if axis is Axis.CTX_SCOPE:
                value = value == "class"
            if target == "model":
                model = replace(model, **{name: value})
            else:
                prompt = replace(prompt, **{name: value})
        return model, prompt


def preset(name: str, model: ModelConfig | None = None, prompt: PromptSpec | None = None,
           train: TrainConfig | None = None) -> AblationSpec:
    """Standard row layouts.

    ctx-depth: context length x temporal depth; prompt-depth: temporal depth
    x prompt kind; position-scope: description position x context scope;
    ensemble: ensemble size; desc-k: descriptor count.
    """
    layouts = {
        "ctx-depth": ((Axis.CTX_LEN, Axis.TM_DEPTH), ((4, 0), (8, 0), (16, 0), (8, 1), (8, 2), (8, 3))),
        "prompt-depth": ((Axis.TM_DEPTH, Axis.PROMPT_KIND), ((0, "class"), (0, "descriptor"), (1, "class"), (1, "descriptor"))),
        "position-scope": ((Axis.DESC_POSITION, Axis.CTX_SCOPE),
                   (("middle", "shared"), ("middle", "class"), ("end", "shared"), ("end", "class"))),
        "ensemble": ((Axis.ENSEMBLE,), ((1,), (2,))),
        "desc-k": ((Axis.DESC_K,), ((2,), (4,), (6,))),
    }
    key = {k.lower(): k for k in layouts}.get(name.lower().replace("_", "-"))
    if key is None:
        raise ConfigError(f"unknown ablation preset {name!r}; expected one of {sorted(layouts)}")
    axes, rows = layouts[key]
    model = model or ModelConfig()
    # every layout but ctx-depth fixes M=8; the single-axis ones also keep the temporal model
    base_prompt = prompt or PromptSpec(context_len=8)
    if key in ("position-scope", "ensemble", "desc-k") and model.temporal_depth == 0:
        model = model.with_(temporal_depth=1)
    return AblationSpec(axes, rows, model, base_prompt, train or TrainConfig.toy(), name=key)


PRESETS = ("ctx-depth", "prompt-depth", "position-scope", "ensemble", "desc-k")


def run_ablation(
    spec: AblationSpec,
    dataset,
    classes: Sequence[str] | None = None,
    protocol: str = "kfold",
    fold: int = 0,
    descriptions: dict | None = None,
) -> list[dict]:
    """Train every row of ``spec`` for every seed on one fixed split.

    ``dataset`` is ``(manifest, clips)`` as returned by the loaders, or a
    list of clips with ``classes`` given.  A row whose training fails keeps
    its axis values with ``war``/``uar`` set to ``None`` and the error text
    under ``status``; later rows still run.
    """
    if isinstance(dataset, tuple) and len(dataset) == 2 and isinstance(dataset[0], DatasetManifest):
        manifest, clips = dataset
        classes = classes or manifest.classes
    else:
        clips = list(dataset)
    if classes is None:
        raise ConfigError("class names are required when passing bare clips")
    clips: list[VideoClip] = list(clips)
    train_clips, test_clips = split(clips, protocol, fold, seed=spec.train.seeds[0])
    table = []
    for row in spec.rows:
        model_cfg, prompt_spec = spec.configs(row)
        model_cfg = model_cfg.with_(C=len(classes))
        out = {a.value: v for a, v in zip(spec.axes, row)}
        try:
            records = fit(model_cfg, prompt_spec, classes, train_clips, test_clips, spec.train, descriptions)
        except TrainingError as exc:
            log.warning("row %s failed: %s", row, exc)
            done = getattr(exc, "records", [])
            out.update(war=None, uar=None, status=f"failed: {exc}",
                       per_seed_war=[r.final_war for r in done], per_seed_uar=[r.final_uar for r in done])
            table.append(out)
            continue
        wars = [r.final_war for r in records]
        uars = [r.final_uar for r in records]
        out.update(
            war=float(np.mean(wars)),
            uar=float(np.mean(uars)),
            status="ok",
            seeds=list(spec.train.seeds),
            per_seed_war=wars,
            per_seed_uar=uars,
        )
        table.append(out)
    return table
