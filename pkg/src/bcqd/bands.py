"""Simulated critical values and uniform confidence bands for the BC-KQD."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from ._parallel import STREAM_CRITVALS, chunk_bounds, threads, uniform_rows
from .estimator import Grid, QdEstimate
from .kernels import BandwidthTooSmall, Kernel, KernelName, kernel_make, psi

__all__ = [
    "BandSide",
    "ConfidenceBand",
    "ConfigMismatch",
    "CriticalValues",
    "Method",
    "band_taus",
    "build_band",
    "empirical_tau_quantile",
    "simulate_critvals",
    "simulate_critvals_known",
    "simulate_critvals_pseudo",
    "simulate_sup_draws",
]

MIN_SIMS = 1000


class Method(str, enum.Enum):
    KnownProcess = "KnownProcess"
    PseudoUniform = "PseudoUniform"


class BandSide(str, enum.Enum):
    LowerOneSided = "lower"
    UpperOneSided = "upper"
    TwoSided = "two-sided"


class ConfigMismatch(ValueError):
    """Estimate and critical values were computed for different settings."""


def _tau_key(tau: float) -> str:
    return repr(float(tau))


def _lookup(table: dict, tau: float) -> float:
    for key, value in table.items():
        if abs(float(key) - tau) <= 1e-12:
            return value
    raise KeyError(
        f"no critical value tabulated for tau={tau!r}; available: "
        + ", ".join(_tau_key(k) for k in sorted(table))
    )


def grid_hash(grid: Grid) -> str:
    return hashlib.sha256(np.ascontiguousarray(grid.points, dtype="<f8").tobytes()).hexdigest()


@dataclass(frozen=True, eq=False)
class CriticalValues:
    method: Method
    n: int
    h: float
    kernel_name: KernelName
    grid: Grid
    n_sims: int
    seed: int
    one_sided: dict = field(default_factory=dict)
    absolute: dict = field(default_factory=dict)

    def c(self, tau: float) -> float:
        return _lookup(self.one_sided, tau)

    def c_abs(self, tau: float) -> float:
        return _lookup(self.absolute, tau)

    @property
    def cache_key(self) -> str:
        parts = [self.kernel_name.value, str(self.n), repr(self.h), grid_hash(self.grid),
                 str(self.n_sims), str(self.seed)]
        return "|".join(parts)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "n": self.n,
            "h": self.h,
            "kernel": self.kernel_name.value,
            "grid": [float(p) for p in self.grid.points],
            "grid_sha256": grid_hash(self.grid),
            "n_sims": self.n_sims,
            "seed": self.seed,
            "one_sided": {_tau_key(t): float(v) for t, v in sorted(self.one_sided.items())},
            "absolute": {_tau_key(t): float(v) for t, v in sorted(self.absolute.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CriticalValues":
        grid = Grid(np.asarray(data["grid"], dtype=float))
        if "grid_sha256" in data and data["grid_sha256"] != grid_hash(grid):
            raise ValueError("critical value table: grid does not match its hash")
        one = {float(k): float(v) for k, v in data["one_sided"].items()}
        ab = {float(k): float(v) for k, v in data["absolute"].items()}
        if not all(math.isfinite(v) for v in [*one.values(), *ab.values()]):
            raise ValueError("critical value table contains non-finite entries")
        return cls(
            method=Method(data["method"]),
            n=int(data["n"]),
            h=float(data["h"]),
            kernel_name=kernel_make(data["kernel"]).name,
            grid=grid,
            n_sims=int(data["n_sims"]),
            seed=int(data["seed"]),
            one_sided=one,
            absolute=ab,
        )

    @classmethod
    def from_json(cls, text: str) -> "CriticalValues":
        return cls.from_dict(json.loads(text))


def empirical_tau_quantile(draws: np.ndarray, tau: float) -> float:
    """The ceil(tau * S)-th smallest of S draws (1-based)."""
    ordered = np.sort(np.asarray(draws, dtype=float))
    k = math.ceil(tau * ordered.shape[0] - 1e-9)
    return float(ordered[min(max(k, 1), ordered.shape[0]) - 1])


def _validate(n: int, h: float, n_sims: int, taus, min_sims: int) -> list[float]:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0.0 < h <= 1.0:
        raise ValueError(f"bandwidth must lie in (0, 1], got {h!r}")
    if h < 2.0 / n:
        raise BandwidthTooSmall(f"h={h!r} is below 2/n={2.0 / n!r} for n={n}")
    if n_sims < min_sims:
        raise ValueError(f"n_sims must be >= {min_sims}, got {n_sims}")
    taus = sorted({float(t) for t in taus})
    if not taus:
        raise ValueError("at least one tau is required")
    for t in taus:
        if not 0.0 < t < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {t!r}")
    return taus


def simulate_sup_draws(
    kernel: Kernel,
    n: int,
    h: float,
    grid: Grid,
    n_sims: int,
    seed: int,
    method: Method = Method.KnownProcess,
    n_threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Raw simulated (sup, sup-abs) statistics, one pair per simulation.

    Simulation s always consumes substream (seed, s), and the pseudo-uniform
    method reuses the same uniforms as the known-process method.
    """
    method = Method(method)
    h = float(h)
    psi_grid = np.asarray(psi(kernel, h, grid.points), dtype=float).reshape(-1)
    worker = _core.sup_known_process if method is Method.KnownProcess else _core.sup_pseudo_uniform
    sup = np.empty(n_sims)
    sup_abs = np.empty(n_sims)
    with threads(n_threads):
        for start, stop in chunk_bounds(n_sims, n):
            rows = uniform_rows(seed, STREAM_CRITVALS, start, stop, n)
            sup[start:stop], sup_abs[start:stop] = worker(
                rows, grid.points, h, kernel.code, psi_grid
            )
    return sup, sup_abs


def simulate_critvals(
    kernel: Kernel,
    n: int,
    h: float,
    grid: Grid,
    n_sims: int,
    taus,
    seed: int,
    method: Method = Method.KnownProcess,
    n_threads: int | None = None,
    min_sims: int = MIN_SIMS,
) -> CriticalValues:
    taus = _validate(n, float(h), n_sims, taus, min_sims)
    sup, sup_abs = simulate_sup_draws(kernel, n, h, grid, n_sims, seed, method, n_threads)
    return CriticalValues(
        method=Method(method),
        n=n,
        h=float(h),
        kernel_name=kernel.name,
        grid=grid,
        n_sims=n_sims,
        seed=seed,
        one_sided={t: empirical_tau_quantile(sup, t) for t in taus},
        absolute={t: empirical_tau_quantile(sup_abs, t) for t in taus},
    )


def simulate_critvals_known(kernel, n, h, grid, n_sims, taus, seed, n_threads=None):
    """Quantiles of the grid sup of sqrt(nh) * mean_i[K_h(U_i - u) - psi_h(u)]."""
    return simulate_critvals(kernel, n, h, grid, n_sims, taus, seed,
                             Method.KnownProcess, n_threads)


def simulate_critvals_pseudo(kernel, n, h, grid, n_sims, taus, seed, n_threads=None):
    """Quantiles of the grid sup of sqrt(nh) * (KQD - psi_h) on uniform pseudo-samples."""
    return simulate_critvals(kernel, n, h, grid, n_sims, taus, seed,
                             Method.PseudoUniform, n_threads)


def band_taus(levels, side: BandSide) -> list[float]:
    """Critical-value probabilities needed to build bands at ``levels``."""
    side = BandSide(side)
    if side is BandSide.TwoSided:
        return [1.0 - (1.0 - float(lv)) / 2.0 for lv in levels]
    return [float(lv) for lv in levels]


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    grid: Grid
    lower: np.ndarray
    upper: np.ndarray
    level: float
    side: BandSide
    estimate: QdEstimate
    critical: CriticalValues

    def contains(self, values) -> bool:
        """Simultaneous containment of ``values`` at every grid point."""
        values = np.asarray(values, dtype=float)
        return bool(np.all((self.lower <= values) & (values <= self.upper)))

    def to_dict(self) -> dict:
        def encode(arr):
            return [None if not math.isfinite(v) else float(v) for v in arr]

        return {
            "level": self.level,
            "side": self.side.value,
            "n": self.estimate.n,
            "h": self.estimate.h,
            "kernel": self.estimate.kernel_name.value,
            "u": [float(p) for p in self.grid.points],
            "qhat_bc": [float(v) for v in self.estimate.qhat_bc],
            "lower": encode(self.lower),
            "upper": encode(self.upper),
            "lower_unbounded": [bool(not math.isfinite(v)) for v in self.lower],
            "upper_unbounded": [bool(not math.isfinite(v)) for v in self.upper],
        }


def _check_compatible(estimate: QdEstimate, critical: CriticalValues):
    problems = []
    if estimate.grid != critical.grid:
        problems.append("grid")
    if estimate.n != critical.n:
        problems.append(f"n ({estimate.n} vs {critical.n})")
    if not math.isclose(estimate.h, critical.h, rel_tol=1e-12, abs_tol=0.0):
        problems.append(f"h ({estimate.h!r} vs {critical.h!r})")
    if estimate.kernel_name is not critical.kernel_name:
        problems.append(f"kernel ({estimate.kernel_name.value} vs {critical.kernel_name.value})")
    if problems:
        raise ConfigMismatch("estimate and critical values differ in " + ", ".join(problems))


def band_endpoints(qhat_bc, psi_vals, scale: float, c: float, side: BandSide):
    """Lower/upper envelopes given a critical value ``c`` and sqrt(nh) ``scale``."""
    d = c / (psi_vals * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = qhat_bc / (1.0 + d)
        upper = np.where(1.0 - d > 0.0, qhat_bc / (1.0 - d), np.inf)
    if side is BandSide.LowerOneSided:
        upper = np.full_like(qhat_bc, np.inf)
    elif side is BandSide.UpperOneSided:
        lower = np.full_like(qhat_bc, -np.inf)
    return lower, upper


def build_band(estimate: QdEstimate, critical: CriticalValues, level: float,
               side=BandSide.TwoSided) -> ConfidenceBand:
    """Uniform band at confidence ``level``.

    One-sided bands use the ``level`` quantile of the sup statistic; the
    two-sided band uses the (1 + level)/2 quantile of the sup-abs statistic.
    Where 1 - c / (psi * sqrt(nh)) <= 0 the upper endpoint is +inf.
    """
    side = BandSide(side)
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    _check_compatible(estimate, critical)
    tau = band_taus([level], side)[0]
    c = critical.c_abs(tau) if side is BandSide.TwoSided else critical.c(tau)
    lower, upper = band_endpoints(
        estimate.qhat_bc, estimate.psi, math.sqrt(estimate.n * estimate.h), c, side
    )
    return ConfidenceBand(estimate.grid, lower, upper, level, side, estimate, critical)
