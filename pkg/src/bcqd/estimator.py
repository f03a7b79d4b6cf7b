"""Kernel quantile density (KQD) estimator and its boundary-corrected version."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _core
from .kernels import Bandwidth, BandwidthTooSmall, Kernel, KernelName, psi

__all__ = [
    "Grid",
    "QdEstimate",
    "SortedSample",
    "bc_kqd",
    "check_bandwidth",
    "default_bandwidth",
    "empirical_quantile",
    "kqd",
    "kqd_grid",
    "standard_grid",
]


@dataclass(frozen=True, eq=False)
class SortedSample:
    """Ascending, finite sample of at least two observations."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 1 or v.shape[0] < 2:
            raise ValueError("a sample needs at least 2 observations")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample contains non-finite values")
        if np.any(np.diff(v) < 0):
            raise ValueError("values are not sorted; use SortedSample.from_unsorted")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_unsorted(cls, data) -> "SortedSample":
        return cls(np.sort(np.asarray(data, dtype=float)))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing evaluation points in [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.points, dtype=float)
        if p.ndim != 1 or p.shape[0] == 0:
            raise ValueError("grid must be a non-empty 1-d array")
        if np.any(np.isnan(p)) or p[0] < 0.0 or p[-1] > 1.0:
            raise ValueError("grid points must lie in [0, 1]")
        if np.any(np.diff(p) <= 0):
            raise ValueError("grid must be strictly increasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, count: int) -> "Grid":
        """``count`` equispaced points covering [0, 1], endpoints included."""
        if count < 1:
            raise ValueError("count must be >= 1")
        if count == 1:
            return cls(np.array([0.5]))
        return cls(np.linspace(0.0, 1.0, count))

    def __len__(self):
        return int(self.points.shape[0])

    def __eq__(self, other):
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)

    __hash__ = None


def standard_grid() -> Grid:
    """0.005, 0.010, ..., 0.995 (199 points)."""
    return Grid(np.round(0.005 * np.arange(1, 200), 10))


@dataclass(frozen=True, eq=False)
class QdEstimate:
    grid: Grid
    qhat: np.ndarray
    psi: np.ndarray
    qhat_bc: np.ndarray
    h: float
    n: int
    kernel_name: KernelName


def _check_u(u: float) -> float:
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u!r}")
    return u


def _as_sample(sample) -> SortedSample:
    return sample if isinstance(sample, SortedSample) else SortedSample(sample)


def _as_grid(grid) -> Grid:
    return grid if isinstance(grid, Grid) else Grid(np.atleast_1d(grid))


def _validated_h(h, n: int) -> float:
    value = h.h if isinstance(h, Bandwidth) else float(h)
    if isinstance(h, Bandwidth) and h.n != n:
        raise ValueError(f"bandwidth was built for n={h.n}, sample has n={n}")
    if value < 2.0 / n:
        raise BandwidthTooSmall(f"h={value!r} is below 2/n={2.0 / n!r} for n={n}")
    if not 0.0 < value <= 1.0:
        raise ValueError(f"bandwidth must lie in (0, 1], got {value!r}")
    return value


def empirical_quantile(sample, u: float) -> float:
    """X_(floor(nu)+1) for u < 1 and X_(n) at u = 1."""
    sample = _as_sample(sample)
    u = _check_u(u)
    if u == 1.0:
        return float(sample.values[-1])
    return float(sample.values[math.floor(sample.n * u)])


def kqd_grid(sample, kernel: Kernel, h, grid) -> np.ndarray:
    """KQD evaluated at every grid point.

    Only the spacings within h/2 of each point are visited, so the cost per
    point is O(nh).
    """
    sample = _as_sample(sample)
    grid = _as_grid(grid)
    h = _validated_h(h, sample.n)
    return _core.kqd_grid(sample.values, grid.points, h, kernel.code)


def kqd(sample, kernel: Kernel, h, u: float) -> float:
    """sum_{i=1}^{n-1} K_h(u - i/n) (X_(i+1) - X_(i))."""
    u = _check_u(u)
    return float(kqd_grid(sample, kernel, h, np.array([u]))[0])


def bc_kqd(sample, kernel: Kernel, h, grid) -> QdEstimate:
    """Boundary-corrected KQD: the KQD divided by psi_h on each grid point."""
    sample = _as_sample(sample)
    grid = _as_grid(grid)
    h_val = _validated_h(h, sample.n)
    qhat = _core.kqd_grid(sample.values, grid.points, h_val, kernel.code)
    weights = np.asarray(psi(kernel, h_val, grid.points), dtype=float).reshape(-1)
    return QdEstimate(
        grid=grid,
        qhat=qhat,
        psi=weights,
        qhat_bc=qhat / weights,
        h=h_val,
        n=sample.n,
        kernel_name=kernel.name,
    )


def default_bandwidth(n: int, c: float = 1.0) -> Bandwidth:
    """h = c n^(-3/8), clamped to [2/n, 1]."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    h = c * n ** (-3.0 / 8.0)
    return Bandwidth(min(max(h, 2.0 / n), 1.0), n)


def check_bandwidth(h) -> list[str]:
    """Finite-sample sanity check of h against the undersmoothing window.

    Returns human-readable warnings (empty when h sits between n^(-1/2) and
    n^(-1/3)). Never raises for a valid ``Bandwidth``.
    """
    n, value = h.n, h.h
    upper = n ** (-1.0 / 3.0)
    lower = n ** (-1.0 / 2.0)
    warnings = []
    if value >= upper:
        warnings.append(
            f"oversmoothing: h={value:.6g} >= n^(-1/3)={upper:.6g}; "
            "smoothing bias may not be negligible for the bands"
        )
    if value <= lower:
        warnings.append(
            f"undersmoothing too far: h={value:.6g} <= n^(-1/2)={lower:.6g}; "
            "the quantile-process remainder may dominate"
        )
    return warnings
