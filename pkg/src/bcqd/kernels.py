"""Compactly supported kernels on [-1/2, 1/2] and the boundary mass psi_h."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erf, ndtr

from . import _core

__all__ = [
    "Bandwidth",
    "BandwidthTooSmall",
    "Kernel",
    "KernelName",
    "kernel_make",
    "kh",
    "norm_cdf",
    "psi",
]


def norm_cdf(x):
    """Standard normal CDF (Cody rational approximation via scipy)."""
    return ndtr(x)


class KernelName(str, enum.Enum):
    TruncatedNormal = "truncnormal"
    Rectangular = "rect"
    Epanechnikov = "epanechnikov"

    @property
    def code(self) -> int:
        return _CODES[self]


_CODES = {
    KernelName.TruncatedNormal: _core.TRUNCNORMAL,
    KernelName.Rectangular: _core.RECT,
    KernelName.Epanechnikov: _core.EPANECHNIKOV,
}

_ALIASES = {
    "truncnormal": KernelName.TruncatedNormal,
    "truncatednormal": KernelName.TruncatedNormal,
    "truncated_normal": KernelName.TruncatedNormal,
    "rect": KernelName.Rectangular,
    "rectangular": KernelName.Rectangular,
    "uniform": KernelName.Rectangular,
    "epanechnikov": KernelName.Epanechnikov,
    "epan": KernelName.Epanechnikov,
}


class BandwidthTooSmall(ValueError):
    """Raised when h < 2/n: the kernel window cannot resolve one spacing."""


@dataclass(frozen=True)
class Bandwidth:
    h: float
    n: int

    def __post_init__(self):
        if not (0.0 < self.h <= 1.0) or not math.isfinite(self.h):
            raise ValueError(f"bandwidth must lie in (0, 1], got {self.h!r}")
        if self.n < 2:
            raise ValueError(f"sample size must be >= 2, got {self.n}")
        if self.h < 2.0 / self.n:
            raise BandwidthTooSmall(
                f"h={self.h!r} is below 2/n={2.0 / self.n!r} for n={self.n}"
            )


def _h_value(h) -> float:
    value = h.h if isinstance(h, Bandwidth) else float(h)
    if not value > 0.0:
        raise ValueError(f"bandwidth must be positive, got {value!r}")
    return value


@dataclass(frozen=True)
class Kernel:
    """A symmetric probability density supported on [-1/2, 1/2].

    ``eval`` and ``cdf`` are vectorised closed forms; ``l2norm_sq`` is the
    integral of the squared kernel.
    """

    name: KernelName
    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    cdf: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    l2norm_sq: float

    @property
    def code(self) -> int:
        return self.name.code

    def __call__(self, z):
        return self.eval(z)


def _support(z):
    z = np.asarray(z, dtype=float)
    return z, (z >= -0.5) & (z <= 0.5)


def _truncnormal_eval(z):
    z, inside = _support(z)
    dens = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * _core.TRUNCNORMAL_MASS)
    return np.where(inside, dens, 0.0)


def _truncnormal_cdf(z):
    z = np.asarray(z, dtype=float)
    # Phi(z) - Phi(-1/2) written with erf to avoid cancellation
    val = 0.5 * (erf(z / math.sqrt(2.0)) + _core.TRUNCNORMAL_MASS) / _core.TRUNCNORMAL_MASS
    return np.where(z <= -0.5, 0.0, np.where(z >= 0.5, 1.0, np.clip(val, 0.0, 1.0)))


def _rect_eval(z):
    z, inside = _support(z)
    return np.where(inside, 1.0, 0.0)


def _rect_cdf(z):
    return np.clip(np.asarray(z, dtype=float), -0.5, 0.5) + 0.5


def _epan_eval(z):
    z, inside = _support(z)
    return np.where(inside, 1.5 * (1.0 - 4.0 * z * z), 0.0)


def _epan_cdf(z):
    z = np.clip(np.asarray(z, dtype=float), -0.5, 0.5)
    return 0.5 + 1.5 * z - 2.0 * z**3


def _truncnormal_l2norm_sq() -> float:
    # phi(z)^2 = N(0, 1/2) density / (2 sqrt(pi)); mass of N(0, 1/2) on [-1/2, 1/2] is erf(1/2)
    return math.erf(0.5) / (2.0 * math.sqrt(math.pi) * _core.TRUNCNORMAL_MASS**2)


def kernel_make(name) -> Kernel:
    """Build a kernel by enum member or name (``truncnormal``, ``rect``, ``epanechnikov``)."""
    if isinstance(name, KernelName):
        key = name
    else:
        key = _ALIASES.get(str(name).strip().lower())
        if key is None:
            raise ValueError(
                f"unsupported kernel {name!r}; choose from "
                + ", ".join(k.value for k in KernelName)
            )
    if key is KernelName.TruncatedNormal:
        return Kernel(key, _truncnormal_eval, _truncnormal_cdf, _truncnormal_l2norm_sq())
    if key is KernelName.Rectangular:
        return Kernel(key, _rect_eval, _rect_cdf, 1.0)
    return Kernel(key, _epan_eval, _epan_cdf, 6.0 / 5.0)


def kh(kernel: Kernel, h, z):
    """Rescaled kernel K_h(z) = K(z / h) / h."""
    h = _h_value(h)
    return kernel.eval(np.asarray(z, dtype=float) / h) / h


def psi(kernel: Kernel, h, u):
    """Mass of K_h(u - .) that falls inside [0, 1].

    Equals 1 for u in [h/2, 1 - h/2] and 1/2 at u in {0, 1}.
    """
    h = _h_value(h)
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0.0) | (u_arr > 1.0)) or np.any(np.isnan(u_arr)):
        raise ValueError("u must lie in [0, 1]")
    a = np.maximum(u_arr - 0.5 * h, 0.0)
    b = np.minimum(u_arr + 0.5 * h, 1.0)
    out = kernel.cdf((u_arr - a) / h) - kernel.cdf((u_arr - b) / h)
    # interior points: both arguments clip to the support ends exactly
    out = np.where((u_arr >= 0.5 * h) & (u_arr <= 1.0 - 0.5 * h), 1.0, out)
    return float(out) if out.ndim == 0 else out
