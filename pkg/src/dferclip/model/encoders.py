"""Frame encoder, temporal model, frozen text encoder and the learnable prompt contexts."""

from __future__ import annotations

import numpy as np

from ..errors import AssemblyError, ShapeError
from ..numerics import Tensor, causal_mask, concat, l2_normalize
from ..textpipe import PromptSequence, embed_prompts
from .config import ModelConfig
from .nn import LayerNorm, Module, Parameter, Transformer, normal


def patchify(frames: np.ndarray, patch: int) -> np.ndarray:
    """``[N, 3, H, W]`` -> ``[N, (H/p)(W/p), 3 p p]``, patches in row-major grid order."""
    n, c, h, w = frames.shape
    gh, gw = h // patch, w // patch
    x = frames.reshape(n, c, gh, patch, gw, patch).transpose(0, 2, 4, 1, 3, 5)
    return np.ascontiguousarray(x.reshape(n, gh * gw, c * patch * patch))


class ImageEncoder(Module):
    """ViT over one frame: patch projection, class token, position embeddings, blocks, projection to L."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        # Width-scaled init (fan-in for the patch projection).  With a flat
        # 0.02 the class token swamps the patch signal and every frame maps to
        # nearly the same feature.
        d = cfg.d_img
        fan_in = 3 * cfg.patch * cfg.patch
        scale = d**-0.5
        self.cfg = cfg
        self.patch_proj = normal(rng, (fan_in, d), fan_in**-0.5)
        self.patch_bias = Parameter(np.zeros(d))
        self.class_embedding = normal(rng, (d,), scale)
        self.positional_embedding = normal(rng, (cfg.n_patches + 1, d), scale)
        self.ln_pre = LayerNorm(d, cfg.ln_eps)
        self.transformer = Transformer(d, cfg.image_depth, cfg.heads, rng, cfg.mlp_ratio, scale, cfg.ln_eps)
        self.ln_post = LayerNorm(d, cfg.ln_eps)
        self.proj = normal(rng, (d, cfg.L), scale)

    def encode_frames(self, frames: np.ndarray) -> Tensor:
        """``[N, 3, H, W]`` -> ``[N, L]``."""
        frames = np.asarray(frames, dtype=np.float64)
        cfg = self.cfg
        if frames.ndim != 4 or frames.shape[1:] != (3, cfg.H, cfg.W):
            raise ShapeError(f"frames must be [N, 3, {cfg.H}, {cfg.W}], got {frames.shape}")
        n = frames.shape[0]
        patches = Tensor(patchify(frames, cfg.patch))
        tokens = patches @ self.patch_proj + self.patch_bias
        cls = self.class_embedding.reshape(1, 1, -1).broadcast_to((n, 1, cfg.d_img))
        x = concat([cls, tokens], axis=1) + self.positional_embedding
        x = self.transformer(self.ln_pre(x))
        return self.ln_post(x[:, 0, :]) @ self.proj

    def encode_frame(self, frame: np.ndarray) -> Tensor:
        frame = np.asarray(frame, dtype=np.float64)
        if frame.shape != (3, self.cfg.H, self.cfg.W):
            raise ShapeError(f"frame must be [3, {self.cfg.H}, {self.cfg.W}], got {frame.shape}")
        return self.encode_frames(frame[None])[0]


class TemporalModel(Module):
    """Class token + T frame features, each plus a position embedding, through transformer blocks.

    With depth 0 there are no blocks and the video feature is the plain mean
    of the frame features.
    """

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        d = cfg.L
        std = cfg.std_for(d)
        self.cfg = cfg
        self.class_token = normal(rng, (d,), std)
        self.position_embeddings = normal(rng, (cfg.T + 1, d), std)
        self.transformer = Transformer(d, cfg.temporal_depth, cfg.heads, rng, cfg.mlp_ratio, std, cfg.ln_eps)
        self.ln_final = LayerNorm(d, cfg.ln_eps) if cfg.video_final_norm else None

    def __call__(self, features: Tensor) -> Tensor:
        """``[B, T, L]`` (or ``[T, L]``) -> ``[B, L]`` (or ``[L]``)."""
        single = features.ndim == 2
        if single:
            features = features.reshape(1, *features.shape)
        b, t, d = features.shape
        if t != self.cfg.T or d != self.cfg.L:
            raise ShapeError(f"expected {self.cfg.T} frame features of width {self.cfg.L}, got {features.shape}")
        if self.cfg.temporal_depth == 0:
            out = features.mean(axis=1)
        else:
            cls = self.class_token.reshape(1, 1, d).broadcast_to((b, 1, d))
            x = concat([cls, features], axis=1) + self.position_embeddings
            out = self.transformer(x)[:, 0, :]
        if self.ln_final is not None:
            out = self.ln_final(out)
        return out[0] if single else out


class TextEncoder(Module):
    """Causal transformer over prompt embeddings, read out at the EOT slot.  Never trained."""

    def __init__(self, cfg: ModelConfig, vocab_size: int, rng: np.random.Generator):
        d = cfg.d_text
        std = cfg.std_for(d)
        self.cfg = cfg
        self.token_embedding = normal(rng, (vocab_size, d), std)
        self.positional_embedding = normal(rng, (cfg.context_length, d), 0.01)
        self.transformer = Transformer(d, cfg.text_depth, cfg.heads, rng, cfg.mlp_ratio, std, cfg.ln_eps)
        self.ln_final = LayerNorm(d, cfg.ln_eps)
        self.text_projection = normal(rng, (d, cfg.L), d**-0.5)
        self._mask = causal_mask(cfg.context_length)
        self.freeze()

    def __call__(self, embeddings: Tensor, eot_indices) -> Tensor:
        """``[N, S, d_text]`` prompt embeddings -> ``[N, L]``."""
        n, s, _ = embeddings.shape
        eot = np.asarray(eot_indices, dtype=np.int64)
        if eot.shape != (n,):
            raise AssemblyError(f"need one eot index per prompt, got {eot.shape} for {n} prompts")
        if np.any((eot < 0) | (eot >= s)):
            raise AssemblyError(f"eot index outside sequence of length {s}: {eot.tolist()}")
        x = embeddings + self.positional_embedding
        x = self.transformer(x, self._mask)
        x = self.ln_final(x[np.arange(n), eot])
        return x @ self.text_projection


class PromptLearner(Module):
    """Owns the learnable context vectors and turns prompts into class text features."""

    def __init__(self, cfg: ModelConfig, prompts: list[PromptSequence], context_shape: tuple[int, ...],
                 ensemble_size: int, rng: np.random.Generator):
        self.contexts = normal(rng, context_shape, cfg.std_for(cfg.d_text))
        self.prompts = list(prompts)
        self.ensemble_size = ensemble_size
        self.n_classes = cfg.C
        if len(self.prompts) != cfg.C * ensemble_size:
            raise AssemblyError(f"expected {cfg.C * ensemble_size} prompts, got {len(self.prompts)}")
        if any(p.eot_index is None for p in self.prompts):
            raise AssemblyError("a prompt has no eot index")

    def class_features(self, text: TextEncoder) -> Tensor:
        """``[C, L]``; ensemble members are L2-normalized and averaged."""
        emb = embed_prompts(self.prompts, self.contexts, text.token_embedding)
        feats = text(emb, [p.eot_index for p in self.prompts])
        if self.ensemble_size == 1:
            return feats
        e = self.ensemble_size
        return l2_normalize(feats).reshape(self.n_classes, e, -1).mean(axis=1)
