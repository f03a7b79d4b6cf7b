"""Monte Carlo coverage harness for the two-sided uniform bands."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _core
from ._parallel import (
    STREAM_ENSEMBLE,
    STREAM_REPLICATIONS,
    chunk_bounds,
    threads,
    uniform_rows,
)
from .bands import (
    BandSide,
    ConfidenceBand,
    CriticalValues,
    Method,
    band_endpoints,
    band_taus,
    build_band,
    simulate_critvals,
)
from .distributions import RefDistribution, get_distribution, transform, true_qd
from .estimator import Grid, QdEstimate, default_bandwidth, standard_grid
from .kernels import KernelName, kernel_make, psi

__all__ = [
    "BandEnsemble",
    "CoverageConfig",
    "CoverageReport",
    "STANDARD_LEVELS",
    "band_ensemble",
    "bc_kqd_replications",
    "coverage_table_csv",
    "run_coverage",
    "studentized_sups",
    "sup_errors",
]

STANDARD_LEVELS = (0.8, 0.9, 0.95, 0.99)
MIN_REPS = 100


@dataclass(frozen=True)
class CoverageConfig:
    dist: RefDistribution
    n: int
    levels: tuple = STANDARD_LEVELS
    reps: int = 2000
    n_sims: int = 20000
    grid: Grid = field(default_factory=standard_grid)
    kernel_name: KernelName = KernelName.TruncatedNormal
    bandwidth_c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dist", get_distribution(self.dist))
        object.__setattr__(self, "kernel_name", kernel_make(self.kernel_name).name)
        object.__setattr__(self, "levels", tuple(sorted(float(lv) for lv in self.levels)))
        if self.reps < MIN_REPS:
            raise ValueError(f"reps must be >= {MIN_REPS}, got {self.reps}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.levels or any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ValueError(f"levels must lie in (0, 1), got {self.levels}")
        if not self.bandwidth_c > 0:
            raise ValueError("bandwidth_c must be positive")

    @property
    def h(self) -> float:
        return default_bandwidth(self.n, self.bandwidth_c).h

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dist"] = self.dist.value
        out["kernel_name"] = self.kernel_name.value
        out["levels"] = list(self.levels)
        out["grid"] = [float(p) for p in self.grid.points]
        out["h"] = self.h
        return out


@dataclass(frozen=True)
class CoverageReport:
    config: CoverageConfig
    covered: dict
    coverage: dict
    mc_stderr: dict
    critical: CriticalValues = field(compare=False, repr=False)
    elapsed: float = field(compare=False, default=0.0)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "covered": {repr(k): v for k, v in self.covered.items()},
            "coverage": {repr(k): v for k, v in self.coverage.items()},
            "mc_stderr": {repr(k): v for k, v in self.mc_stderr.items()},
            "critical_values": self.critical.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def bc_kqd_replications(dist, n: int, h: float, kernel, grid: Grid, seed: int, tag: int,
                        start: int, stop: int) -> np.ndarray:
    """BC-KQD curves for replications ``start..stop-1``, one row each."""
    rows = transform(dist, uniform_rows(seed, tag, start, stop, n))
    qhat = _core.kqd_batch(np.ascontiguousarray(rows), grid.points, h, kernel.code, False)
    return qhat / np.asarray(psi(kernel, h, grid.points)).reshape(1, -1)


def run_coverage(config: CoverageConfig, critical: CriticalValues | None = None,
                 n_threads: int | None = None) -> CoverageReport:
    """Simultaneous coverage of two-sided bands over ``config.reps`` replications.

    Critical values come from the known-process simulator and are shared by
    every replication and level; pass ``critical`` to reuse a tabulated set.
    """
    started = time.perf_counter()
    kernel = kernel_make(config.kernel_name)
    h = config.h
    grid = config.grid
    if critical is None:
        critical = simulate_critvals(
            kernel, config.n, h, grid, config.n_sims,
            band_taus(config.levels, BandSide.TwoSided), config.seed,
            Method.KnownProcess, n_threads,
        )
    psi_grid = np.asarray(psi(kernel, h, grid.points)).reshape(-1)
    truth = np.asarray(true_qd(config.dist, grid.points)).reshape(1, -1)
    scale = math.sqrt(config.n * h)
    c_values = {lv: critical.c_abs(t)
                for lv, t in zip(config.levels, band_taus(config.levels, BandSide.TwoSided))}
    covered = {lv: 0 for lv in config.levels}
    with threads(n_threads):
        for start, stop in chunk_bounds(config.reps, config.n):
            qbc = bc_kqd_replications(config.dist, config.n, h, kernel, grid, config.seed,
                                      STREAM_REPLICATIONS, start, stop)
            for lv, c in c_values.items():
                lower, upper = band_endpoints(qbc, psi_grid, scale, c, BandSide.TwoSided)
                inside = np.all((lower <= truth) & (truth <= upper), axis=1)
                covered[lv] += int(np.count_nonzero(inside))
    coverage = {lv: covered[lv] / config.reps for lv in config.levels}
    stderr = {lv: math.sqrt(p * (1.0 - p) / config.reps) for lv, p in coverage.items()}
    return CoverageReport(config, covered, coverage, stderr, critical,
                          time.perf_counter() - started)


def coverage_table_csv(reports) -> str:
    """Coverage-table CSV: one row per (distribution, n), one column per level."""
    reports = list(reports)
    levels = sorted({lv for r in reports for lv in r.config.levels})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["distribution", "n", *[repr(lv) for lv in levels]])
    order = {d: i for i, d in enumerate(RefDistribution)}
    for r in sorted(reports, key=lambda r: (order[r.config.dist], r.config.n)):
        cells = [f"{r.coverage[lv]:.3f}" if lv in r.coverage else "" for lv in levels]
        writer.writerow([r.config.dist.value, r.config.n, *cells])
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class BandEnsemble:
    grid: Grid
    truth: np.ndarray
    bands: list

    def __len__(self):
        return len(self.bands)

    def covering_fraction(self) -> float:
        return sum(b.contains(self.truth) for b in self.bands) / len(self.bands)


def band_ensemble(dist, n: int, level: float, realizations: int, seed: int,
                  kernel_name=KernelName.TruncatedNormal, grid: Grid | None = None,
                  n_sims: int = 20000, bandwidth_c: float = 1.0,
                  side=BandSide.TwoSided, n_threads: int | None = None) -> BandEnsemble:
    """Independent band realizations with the true quantile density on the grid."""
    if realizations < 1:
        raise ValueError(f"realizations must be >= 1, got {realizations}")
    dist = get_distribution(dist)
    grid = standard_grid() if grid is None else grid
    kernel = kernel_make(kernel_name)
    h = default_bandwidth(n, bandwidth_c).h
    side = BandSide(side)
    critical = simulate_critvals(kernel, n, h, grid, n_sims, band_taus([level], side), seed,
                                 Method.KnownProcess, n_threads)
    psi_grid = np.asarray(psi(kernel, h, grid.points)).reshape(-1)
    bands: list[ConfidenceBand] = []
    with threads(n_threads):
        for start, stop in chunk_bounds(realizations, n):
            qbc = bc_kqd_replications(dist, n, h, kernel, grid, seed, STREAM_ENSEMBLE,
                                      start, stop)
            for row in qbc:
                est = QdEstimate(grid, row * psi_grid, psi_grid, row, h, n, kernel.name)
                bands.append(build_band(est, critical, level, side))
    truth = np.asarray(true_qd(dist, grid.points), dtype=float).reshape(-1)
    return BandEnsemble(grid, truth, bands)


def studentized_sups(dist, n: int, reps: int, seed: int,
                     kernel_name=KernelName.TruncatedNormal, grid: Grid | None = None,
                     bandwidth_c: float = 1.0, n_threads: int | None = None) -> np.ndarray:
    """Grid sup of sqrt(nh) (qhat_bc - q) psi / q for each replication."""
    grid = standard_grid() if grid is None else grid
    kernel = kernel_make(kernel_name)
    h = default_bandwidth(n, bandwidth_c).h
    psi_grid = np.asarray(psi(kernel, h, grid.points)).reshape(1, -1)
    truth = np.asarray(true_qd(dist, grid.points)).reshape(1, -1)
    out = np.empty(reps)
    with threads(n_threads):
        for start, stop in chunk_bounds(reps, n):
            qbc = bc_kqd_replications(dist, n, h, kernel, grid, seed, STREAM_REPLICATIONS,
                                      start, stop)
            z = math.sqrt(n * h) * (qbc - truth) * psi_grid / truth
            out[start:stop] = z.max(axis=1)
    return out


def sup_errors(dist, n: int, reps: int, seed: int, grid: Grid,
               kernel_name=KernelName.TruncatedNormal, bandwidth_c: float = 1.0,
               n_threads: int | None = None) -> np.ndarray:
    """Grid sup of |qhat_bc - q| for each replication."""
    kernel = kernel_make(kernel_name)
    h = default_bandwidth(n, bandwidth_c).h
    truth = np.asarray(true_qd(dist, grid.points)).reshape(1, -1)
    out = np.empty(reps)
    with threads(n_threads):
        for start, stop in chunk_bounds(reps, n):
            qbc = bc_kqd_replications(dist, n, h, kernel, grid, seed, STREAM_REPLICATIONS,
                                      start, stop)
            out[start:stop] = np.abs(qbc - truth).max(axis=1)
    return out
