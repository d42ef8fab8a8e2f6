from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from ..errors import ConfigError


@dataclass(frozen=True)
class ModelConfig:
    """Network dimensions.  Defaults are a desk-scale toy; see :meth:`full_scale`."""

    T: int = 8
    H: int = 16
    W: int = 16
    patch: int = 8
    d_img: int = 32
    d_text: int = 32
    L: int = 16
    image_depth: int = 1
    text_depth: int = 1
    temporal_depth: int = 1
    heads: int = 2
    C: int = 7
    tau: float = 0.01
    learn_tau: bool = False
    video_final_norm: bool = False
    mlp_ratio: int = 4
    vocab_size: int = 0  # filled in from the vocabulary when 0
    context_length: int = 77
    init_std: float | None = None  # None: width-scaled, see std_for
    ln_eps: float = 1e-5

    def __post_init__(self):
        for name in ("T", "H", "W", "patch", "d_img", "d_text", "L", "heads", "C", "mlp_ratio", "context_length"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.H % self.patch or self.W % self.patch:
            raise ConfigError(f"frame {self.H}x{self.W} is not divisible by patch {self.patch}")
        for name in ("d_img", "d_text", "L"):
            if getattr(self, name) % self.heads:
                raise ConfigError(f"{name}={getattr(self, name)} is not divisible by heads={self.heads}")
        for name in ("image_depth", "text_depth", "temporal_depth"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.init_std is not None and self.init_std <= 0:
            raise ConfigError(f"init_std must be positive, got {self.init_std}")
        if self.C < 2:
            raise ConfigError(f"need at least 2 classes, got {self.C}")

    def std_for(self, width: int) -> float:
        """Init std for embeddings and weights of a ``width``-wide module.

        A fixed ``init_std`` is used as given.  Otherwise the std is 0.02 at
        width 512 and grows as ``sqrt(512 / width)`` for narrower modules, so
        a weight matrix has the same gain on a toy model as on a full-size one.
        """
        if self.init_std is not None:
            return self.init_std
        return 0.02 * (512 / width) ** 0.5

    @property
    def n_patches(self) -> int:
        return (self.H // self.patch) * (self.W // self.patch)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown model config keys {sorted(unknown)}")
        return cls(**d)

    def with_(self, **changes) -> "ModelConfig":
        return replace(self, **changes)

    @classmethod
    def full_scale(cls, C: int = 7) -> "ModelConfig":
        """ViT-B/32-sized encoders, 16 frames at 224x224."""
        return cls(
            T=16, H=224, W=224, patch=32, d_img=768, d_text=512, L=512,
            image_depth=12, text_depth=12, temporal_depth=1, heads=8, C=C, tau=0.01, init_std=0.02,
        )

    @classmethod
    def micro(cls, C: int = 3) -> "ModelConfig":
        """Smallest configuration used by the gradient oracle."""
        return cls(T=4, H=16, W=16, patch=8, d_img=16, d_text=16, L=8, heads=2, C=C)
