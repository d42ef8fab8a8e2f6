"""Central finite-difference oracle for taped gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ConfigError, OracleError
from .tensor import Tensor, backward, get_tape, no_grad


@dataclass
class GradCheckReport:
    errors: dict[str, float] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)
    tol: float = 1e-4

    @property
    def worst(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst < self.tol

    def worst_param(self) -> str | None:
        return max(self.errors, key=self.errors.get) if self.errors else None


def _named(params) -> list[tuple[str, Tensor]]:
    if isinstance(params, dict):
        return list(params.items())
    out = []
    for i, p in enumerate(params):
        if isinstance(p, tuple):
            out.append(p)
        else:
            out.append((p.name or f"param{i}", p))
    return out


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float) -> np.ndarray:
    """``|a - n| / max(|a|, |n|, floor)`` elementwise."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def finite_difference_check(
    f: Callable[[], Tensor],
    params: "Sequence[Tensor] | Sequence[tuple[str, Tensor]] | dict[str, Tensor]",
    h: float = 1e-5,
    tol: float = 1e-4,
    floor: float | None = None,
    max_elements: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradCheckReport:
    """Compare ``backward()`` gradients of ``f()`` with central differences.

    Parameters that do not require grad are skipped.  ``max_elements`` caps the
    number of entries probed per tensor (sampled without replacement from
    ``rng``); ``None`` probes every entry.

    ``floor`` bounds the denominator of the relative error from below so that
    entries whose gradient sits at the finite-difference noise level are not
    scored as failures.  By default it is derived from that noise level,
    ``10 * eps * max(1, |f|) / h / tol``.
    """
    if h <= 0:
        raise ConfigError(f"finite-difference step must be positive, got {h}")
    named = [(n, p) for n, p in _named(params) if p.requires_grad]
    rng = rng or np.random.default_rng(0)

    with no_grad():
        base = float(f().data)
        again = float(f().data)
    if base != again:
        raise OracleError(f"f is not deterministic: {base!r} then {again!r}")
    if floor is None:
        floor = 10.0 * np.finfo(np.float64).eps * max(1.0, abs(base)) / h / tol

    for _, p in named:
        p.zero_grad()
    get_tape().reset()
    loss = f()
    backward(loss)
    analytic = {n: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for n, p in named}

    report = GradCheckReport(tol=tol)
    with no_grad():
        for name, p in named:
            flat = p.data.reshape(-1)
            idx = np.arange(flat.size)
            if max_elements is not None and flat.size > max_elements:
                idx = np.sort(rng.choice(flat.size, size=max_elements, replace=False))
            numeric = np.empty(idx.size)
            for j, i in enumerate(idx):
                orig = flat[i]
                flat[i] = orig + h
                up = float(f().data)
                flat[i] = orig - h
                down = float(f().data)
                flat[i] = orig
                numeric[j] = (up - down) / (2.0 * h)
            a = analytic[name].reshape(-1)[idx]
            report.errors[name] = float(relative_error(a, numeric, floor).max()) if idx.size else 0.0
            report.checked[name] = int(idx.size)
    return report


def check_all(reports: Iterable[GradCheckReport]) -> bool:
    return all(r.passed for r in reports)
