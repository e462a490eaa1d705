"""Gaussian multiplier bootstrap and the sample-splitting test.

Given one dataset, the bootstrap criterion is

    B_n(theta) = P_n(theta) + (1/n) sum_i e_i (f_theta(Z_i) - P_n(theta)),

with i.i.d. standard normal multipliers ``e_i`` and ``P_n`` the empirical
criterion. Its argmax law, conditional on the data, approximates the law of
the M-estimator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._seeding import STREAM_BOOTSTRAP, derive_seed, run_blocks, stream_rng
from .core import (
    ArgmaxDistribution,
    CriterionSpec,
    ParameterGrid,
    SampleSet,
    argmax_index,
    argmax_rows,
    oriented_table,
)
from .estimator import m_estimate

__all__ = [
    "AcceptanceRegion",
    "BootstrapRun",
    "SplitTestResult",
    "bootstrap_distribution",
    "minimum_volume_region",
    "multiplier_draw",
    "split_test",
]

REGION_TOL = 1e-12


@dataclass(frozen=True)
class BootstrapRun:
    """Oriented empirical criterion and its row-centered table for one dataset."""

    base_criterion: np.ndarray
    centered_table: np.ndarray = field(repr=False)

    @classmethod
    def from_data(cls, spec: CriterionSpec, grid: ParameterGrid, data: SampleSet) -> "BootstrapRun":
        table = oriented_table(spec, grid, data)
        base = table.mean(axis=1)
        return cls(base, table - base[:, None])

    @property
    def n(self) -> int:
        return self.centered_table.shape[1]

    def row_sums(self) -> np.ndarray:
        return self.centered_table.sum(axis=1)

    def values(self, multipliers: np.ndarray) -> np.ndarray:
        """``B_n`` for one multiplier vector (1-D) or a batch (rows)."""
        e = np.asarray(multipliers, dtype=np.float64)
        return self.base_criterion + e @ self.centered_table.T / self.n


def multiplier_draw(run: BootstrapRun, multipliers) -> int:
    """Grid index maximizing ``B_n`` for the given multipliers."""
    e = np.asarray(multipliers, dtype=np.float64)
    if e.shape != (run.n,):
        raise ValueError(f"expected {run.n} multipliers, got shape {e.shape}")
    return argmax_index(run.values(e))


def bootstrap_indices(run: BootstrapRun, replications: int, seed: int, workers: int = 1) -> np.ndarray:
    if replications < 1:
        raise ValueError("replications must be >= 1")

    def block(rng, count):
        return argmax_rows(run.values(rng.standard_normal((count, run.n))))

    return run_blocks(replications, block, seed, STREAM_BOOTSTRAP, workers)


def bootstrap_distribution(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet,
                           replications: int, seed: int, workers: int = 1) -> ArgmaxDistribution:
    """Conditional law of the bootstrap argmax given ``data``."""
    run = BootstrapRun.from_data(spec, grid, data)
    idx = bootstrap_indices(run, replications, seed, workers)
    return ArgmaxDistribution.from_indices(idx, grid, seed)


@dataclass(frozen=True)
class AcceptanceRegion:
    """Greedy minimum-volume set of grid cells with mass at least ``1 - level``.

    ``cells`` lists indices in the order they were added.
    """

    cells: tuple[int, ...]
    mass: float
    level: float

    def __contains__(self, index) -> bool:
        return int(index) in self.cells

    def sorted_cells(self) -> list[int]:
        return sorted(self.cells)


def minimum_volume_region(dist: ArgmaxDistribution, level: float) -> AcceptanceRegion:
    """Add cells by descending mass (lower index first on ties) until mass reaches ``1 - level``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    masses = np.asarray(dist.masses, dtype=np.float64)
    order = np.lexsort((np.arange(masses.size), -masses))
    target = 1.0 - level
    total = 0.0
    cells = []
    for j in order:
        cells.append(int(j))
        total += float(masses[j])
        if total >= target - REGION_TOL:
            break
    return AcceptanceRegion(tuple(cells), total, level)


@dataclass(frozen=True)
class SplitTestResult:
    """Outcome of one split-sample test of ``theta_0 = theta_star``."""

    accept: bool
    outside: bool
    theta_star: tuple[float, ...]
    theta_hat_index: int
    region: AcceptanceRegion
    shifted_points: np.ndarray = field(repr=False)
    shifted_indices: tuple[int, ...]
    seed: int

    def to_dict(self) -> dict:
        return {
            "level": self.region.level,
            "region_cells": self.region.sorted_cells(),
            "region_mass": self.region.mass,
            "theta_hat_index": self.theta_hat_index,
            "theta_star": list(self.theta_star),
            "shifted_region": self.shifted_points.tolist(),
            "shifted_indices": list(self.shifted_indices),
            "outside": self.outside,
            "decision": "accept" if self.accept else "reject",
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def split_test(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet, theta_star, level: float,
               replications: int, seed: int, shuffle_seed: int | None = None,
               workers: int = 1) -> SplitTestResult:
    """Split-sample test of ``theta_0 = theta_star`` at level ``level``.

    The first ``ceil(n/2)`` observations give the bootstrap acceptance region; the rest give
    ``theta_hat``. The shifted set ``theta_star - theta_hat + region`` is snapped to the nearest
    grid points and the hypothesis is accepted iff ``theta_star`` is one of them. Shifted points
    outside the grid box are dropped and flagged through ``outside``.
    """
    if data.n < 2:
        raise ValueError("need at least two observations to split")
    if shuffle_seed is not None:
        perm = stream_rng(shuffle_seed, STREAM_BOOTSTRAP, 0xFFFF).permutation(data.n)
        data = SampleSet(data.observations[perm])
    first, second = data.split()
    dist = bootstrap_distribution(spec, grid, first, replications, seed, workers)
    region = minimum_volume_region(dist, level)
    hat = m_estimate(spec, grid, second)
    star = np.atleast_1d(np.asarray(theta_star, dtype=np.float64))
    if star.shape != (grid.dim,):
        raise ValueError("theta_star has the wrong dimension")
    cells = np.array(region.sorted_cells())
    shifted = star[None, :] - grid.points[hat][None, :] + grid.points[cells]
    tol = 1e-9 * np.maximum(1.0, np.abs(grid.upper - grid.lower))
    inside = np.all((shifted >= grid.lower - tol) & (shifted <= grid.upper + tol), axis=1)
    snapped = tuple(sorted({grid.nearest_index(p) for p in shifted[inside]}))
    accept = grid.nearest_index(star) in snapped
    return SplitTestResult(bool(accept), bool(not inside.all()), tuple(float(v) for v in star),
                           int(hat), region, shifted, snapped, seed)


def trial_seed(master: int, trial: int) -> int:
    """Seed for trial ``trial`` of a repeated test."""
    return derive_seed(master, STREAM_BOOTSTRAP, trial)
