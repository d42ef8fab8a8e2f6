"""The full video/text model and its cosine-similarity prediction head."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, NumericError, ShapeError
from ..numerics import Tensor, cosine_logits, cross_entropy, no_grad, softmax
from ..textpipe import (
    PromptSpec,
    Vocabulary,
    build_prompts,
    class_descriptions,
    default_vocabulary,
    load_descriptions,
)
from .config import ModelConfig
from .encoders import ImageEncoder, PromptLearner, TemporalModel, TextEncoder
from .nn import Module, Parameter


@dataclass
class Prediction:
    logits: np.ndarray  # [..., C] cosine / tau
    probs: np.ndarray

    @property
    def label(self) -> np.ndarray:
        return self.logits.argmax(axis=-1)


def predict(fV: Tensor, fT: Tensor, tau: "float | Tensor") -> Prediction:
    """Class probabilities from cosine similarity between video and class text features."""
    single = fV.ndim == 1
    v = fV.reshape(1, -1) if single else fV
    with no_grad():
        logits = cosine_logits(v, fT, tau)
        probs = softmax(logits)
    lg, pr = logits.data, probs.data
    return Prediction(lg[0], pr[0]) if single else Prediction(lg, pr)


class DFERCLIP(Module):
    def __init__(
        self,
        cfg: ModelConfig,
        prompt_spec: PromptSpec,
        classes: list[str] | tuple[str, ...],
        descriptions: dict[str, tuple[str, ...]] | None = None,
        vocab: Vocabulary | None = None,
        seed: int = 0,
    ):
        if len(classes) != cfg.C:
            raise ConfigError(f"model has C={cfg.C} but {len(classes)} class names were given")
        table = descriptions if descriptions is not None else load_descriptions()
        vocab = vocab or default_vocabulary(table)
        if cfg.vocab_size == 0:
            cfg = cfg.with_(vocab_size=vocab.size)
        elif cfg.vocab_size != vocab.size:
            raise ConfigError(f"vocab_size {cfg.vocab_size} does not match vocabulary of {vocab.size}")
        self.cfg = cfg
        self.prompt_spec = prompt_spec
        self.classes = tuple(classes)
        self.descriptions = table
        self.vocab = vocab

        k = prompt_spec.descriptors_k if prompt_spec.prompt_kind == "descriptor" else 1
        cds = class_descriptions(self.classes, table, k)
        prompts = build_prompts(prompt_spec, cds, vocab)
        rng_img, rng_tm, rng_txt, rng_ctx = (
            np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)
        )
        self.image = ImageEncoder(cfg, rng_img)
        self.temporal = TemporalModel(cfg, rng_tm)
        self.text = TextEncoder(cfg, vocab.size, rng_txt)
        self.prompt = PromptLearner(
            cfg, prompts, prompt_spec.context_shape(cfg.C, cfg.d_text), prompt_spec.ensemble_size, rng_ctx
        )
        self.log_tau = Parameter(np.array([math.log(cfg.tau)])) if cfg.learn_tau else None

    @property
    def tau(self) -> "float | Tensor":
        return self.log_tau.exp() if self.log_tau is not None else self.cfg.tau

    def encode_video(self, clips: np.ndarray) -> Tensor:
        """``[B, T, 3, H, W]`` -> video features ``[B, L]``."""
        clips = np.asarray(clips, dtype=np.float64)
        cfg = self.cfg
        if clips.ndim != 5 or clips.shape[1:] != (cfg.T, 3, cfg.H, cfg.W):
            raise ShapeError(f"clips must be [B, {cfg.T}, 3, {cfg.H}, {cfg.W}], got {clips.shape}")
        b = clips.shape[0]
        frame_feats = self.image.encode_frames(clips.reshape(b * cfg.T, 3, cfg.H, cfg.W))
        return self.temporal(frame_feats.reshape(b, cfg.T, cfg.L))

    def text_features(self) -> Tensor:
        return self.prompt.class_features(self.text)

    def logits(self, clips: np.ndarray) -> Tensor:
        return cosine_logits(self.encode_video(clips), self.text_features(), self.tau)

    def loss(self, clips: np.ndarray, labels) -> Tensor:
        return cross_entropy(self.logits(clips), labels)

    def predict(self, clips: np.ndarray) -> Prediction:
        with no_grad():
            fV = self.encode_video(clips)
            fT = self.text_features()
            tau = float(np.exp(self.log_tau.data[0])) if self.log_tau is not None else self.cfg.tau
            pred = predict(fV, fT, tau)
        if not np.isfinite(pred.logits).all():
            raise NumericError("non-finite logits")
        return pred

    def metadata(self) -> dict:
        return {
            "model": self.cfg.to_dict(),
            "prompt": self.prompt_spec.to_dict(),
            "classes": list(self.classes),
            "descriptions": {c: list(self.descriptions[c]) for c in self.classes},
            "vocab": list(self.vocab.tokens),
        }

    @classmethod
    def from_metadata(cls, meta: dict, seed: int = 0) -> "DFERCLIP":
        return cls(
            ModelConfig.from_dict(meta["model"]),
            PromptSpec.from_dict(meta["prompt"]),
            meta["classes"],
            descriptions={c: tuple(v) for c, v in meta["descriptions"].items()},
            vocab=Vocabulary(meta["vocab"]),
            seed=seed,
        )
