"""Parameter containers and pre-norm transformer layers."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from ..numerics import Tensor, gelu, layer_norm, linear, multi_head_attention


class Parameter(Tensor):
    def __init__(self, data, requires_grad: bool = True, name: str | None = None):
        super().__init__(data, requires_grad=requires_grad, name=name)


class Module:
    """Walks attributes to find parameters, sub-modules and lists of sub-modules."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for key, value in vars(self).items():
            name = f"{prefix}{key}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(name + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{name}.{i}", item

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def state_dict(self) -> dict[str, np.ndarray]:
        return {n: p.data.copy() for n, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        extra = sorted(set(state) - set(own))
        if missing or extra:
            raise KeyError(f"state mismatch: missing {missing}, unexpected {extra}")
        for n, p in own.items():
            if state[n].shape != p.shape:
                raise ValueError(f"{n}: shape {state[n].shape} != {p.shape}")
            p.data[...] = state[n]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def freeze(self) -> None:
        for p in self.parameters():
            p.requires_grad = False

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())


def normal(rng: np.random.Generator, shape, std: float) -> Parameter:
    return Parameter(rng.normal(0.0, std, size=shape))


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, std: float = 0.02, bias: bool = True):
        self.weight = normal(rng, (d_in, d_out), std)
        self.bias = Parameter(np.zeros(d_out)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, d: int, eps: float = 1e-5):
        self.gain = Parameter(np.ones(d))
        self.bias = Parameter(np.zeros(d))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gain, self.bias, self.eps)


class MultiHeadSelfAttention(Module):
    def __init__(self, d: int, heads: int, rng: np.random.Generator, std: float = 0.02):
        self.heads = heads
        self.w_q = normal(rng, (d, d), std)
        self.w_k = normal(rng, (d, d), std)
        self.w_v = normal(rng, (d, d), std)
        self.w_o = normal(rng, (d, d), std)
        self.b_q = Parameter(np.zeros(d))
        self.b_k = Parameter(np.zeros(d))
        self.b_v = Parameter(np.zeros(d))
        self.b_o = Parameter(np.zeros(d))

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        return multi_head_attention(
            x, x, x, self.heads,
            self.w_q, self.w_k, self.w_v, self.w_o,
            self.b_q, self.b_k, self.b_v, self.b_o,
            mask=mask,
        )


class Mlp(Module):
    def __init__(self, d: int, hidden: int, rng: np.random.Generator, std: float = 0.02):
        self.fc = Linear(d, hidden, rng, std)
        self.proj = Linear(hidden, d, rng, std)

    def __call__(self, x: Tensor) -> Tensor:
        return self.proj(gelu(self.fc(x)))


class ResidualAttentionBlock(Module):
    """``x + attn(ln(x))`` then ``x + mlp(ln(x))``."""

    def __init__(self, d: int, heads: int, rng: np.random.Generator, mlp_ratio: int = 4, std: float = 0.02, eps: float = 1e-5):
        self.ln_1 = LayerNorm(d, eps)
        self.attn = MultiHeadSelfAttention(d, heads, rng, std)
        self.ln_2 = LayerNorm(d, eps)
        self.mlp = Mlp(d, d * mlp_ratio, rng, std)

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        x = x + self.attn(self.ln_1(x), mask)
        return x + self.mlp(self.ln_2(x))


class Transformer(Module):
    def __init__(self, d: int, depth: int, heads: int, rng: np.random.Generator, mlp_ratio: int = 4, std: float = 0.02, eps: float = 1e-5):
        self.blocks = [ResidualAttentionBlock(d, heads, rng, mlp_ratio, std, eps) for _ in range(depth)]

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        for block in self.blocks:
            x = block(x, mask)
        return x
