"""Grid M-estimators, their Monte Carlo law, profiling and sieve grids."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np
from scipy import integrate

from ._seeding import STREAM_ESTIMATOR, run_blocks
from .core import (
    CUBE_ROOT,
    LAD,
    MIN_VOLUME,
    TABULATED,
    ArgmaxDistribution,
    CriterionSpec,
    ParameterGrid,
    SampleSet,
    argmax_index,
    oriented_table,
)

__all__ = [
    "DataGenSpec",
    "m_estimate",
    "population_argmax",
    "population_criterion",
    "profile_argmax",
    "replicate_estimator",
    "replicate_indices",
    "sieve_grid",
    "sieve_lad_criterion",
    "trig_basis",
    "write_replications_csv",
]

_LAWS = ("uniform", "uniform_pair", "min_volume_pair", "table_columns")
QUAD_TOL = 1e-10


@dataclass(frozen=True)
class DataGenSpec:
    """Data-generating law plus sample size.

    Laws and their parameters:

    ``uniform``          ``lo, hi``: scalar ``Z ~ U[lo, hi]``.
    ``uniform_pair``     ``theta0, half_width, x_lo, x_hi``: ``X ~ U[x_lo, x_hi]``
                         (constant when equal) and ``Y = theta0 X + U[-half_width, half_width]``;
                         observations are ``(y, x)``.
    ``min_volume_pair``  ``x_lo, x_hi, y_lo, y_hi``: independent uniform ``(x, y)``.
    ``table_columns``    ``count``: column indices drawn uniformly.
    """

    law: str
    params: Mapping[str, Any] = field(default_factory=dict)
    n: int = 2
    description: str = ""

    def __post_init__(self):
        if self.law not in _LAWS:
            raise ValueError(f"unknown law {self.law!r}")
        p = dict(self.params)
        object.__setattr__(self, "params", p)
        if self.n < 1:
            raise ValueError("sample size must be >= 1")
        if self.law == "uniform" and not p["lo"] < p["hi"]:
            raise ValueError("uniform law needs lo < hi")
        if self.law == "uniform_pair":
            p.setdefault("x_lo", 1.0)
            p.setdefault("x_hi", 1.0)
            if p["half_width"] <= 0 or p["x_lo"] > p["x_hi"]:
                raise ValueError("uniform_pair needs half_width > 0 and x_lo <= x_hi")
        if self.law == "min_volume_pair":
            for k, v in (("x_lo", 0.0), ("x_hi", 1.0), ("y_lo", 0.0), ("y_hi", 1.0)):
                p.setdefault(k, v)
            if not (p["x_lo"] < p["x_hi"] and p["y_lo"] < p["y_hi"]):
                raise ValueError("min_volume_pair needs lo < hi on both axes")
        if self.law == "table_columns" and int(p["count"]) < 1:
            raise ValueError("table_columns needs count >= 1")

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int = 2) -> "DataGenSpec":
        return cls("uniform", {"lo": float(lo), "hi": float(hi)}, n, f"Z~U[{lo},{hi}]")

    @classmethod
    def uniform_pair(cls, theta0: float, half_width: float, n: int = 2,
                     x_lo: float = 1.0, x_hi: float = 1.0) -> "DataGenSpec":
        return cls("uniform_pair", {"theta0": float(theta0), "half_width": float(half_width),
                                    "x_lo": float(x_lo), "x_hi": float(x_hi)}, n,
                   f"Y=X*{theta0}+U[-{half_width},{half_width}]")

    @classmethod
    def min_volume_pair(cls, n: int = 2, **bounds: float) -> "DataGenSpec":
        return cls("min_volume_pair", dict(bounds), n, "(X,Y) uniform")

    @classmethod
    def table_columns(cls, count: int, n: int = 2) -> "DataGenSpec":
        return cls("table_columns", {"count": int(count)}, n, "uniform column index")

    def with_n(self, n: int) -> "DataGenSpec":
        return replace(self, n=int(n))

    @property
    def constant_x(self) -> bool:
        return self.law == "uniform_pair" and self.params["x_lo"] == self.params["x_hi"]

    def draw_array(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        n = self.n if n is None else int(n)
        p = self.params
        if self.law == "uniform":
            return rng.uniform(p["lo"], p["hi"], n)
        if self.law == "uniform_pair":
            x = rng.uniform(p["x_lo"], p["x_hi"], n) if not self.constant_x else np.full(n, p["x_lo"])
            y = p["theta0"] * x + rng.uniform(-p["half_width"], p["half_width"], n)
            return np.column_stack([y, x])
        if self.law == "min_volume_pair":
            return np.column_stack([rng.uniform(p["x_lo"], p["x_hi"], n),
                                    rng.uniform(p["y_lo"], p["y_hi"], n)])
        return rng.integers(0, int(p["count"]), n).astype(np.float64)

    def draw(self, rng: np.random.Generator, n: int | None = None) -> SampleSet:
        return SampleSet(self.draw_array(rng, n))

    def to_dict(self) -> dict:
        return {"law": self.law, **self.params, "n": self.n}


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def m_estimate(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet) -> int:
    """Grid index of the M-estimator (minimization criteria are negated first)."""
    return argmax_index(oriented_table(spec, grid, data).mean(axis=1))


def replicate_indices(spec: CriterionSpec, grid: ParameterGrid, gen: DataGenSpec,
                      replications: int, seed: int, workers: int = 1) -> np.ndarray:
    """M-estimator index for each of ``replications`` independent datasets."""
    if replications < 1:
        raise ValueError("replications must be >= 1")

    def block(rng, count):
        out = np.empty(count, dtype=np.int64)
        for r in range(count):
            out[r] = m_estimate(spec, grid, gen.draw(rng))
        return out

    return run_blocks(replications, block, seed, STREAM_ESTIMATOR, workers)


def replicate_estimator(spec: CriterionSpec, grid: ParameterGrid, gen: DataGenSpec,
                        replications: int, seed: int, workers: int = 1) -> ArgmaxDistribution:
    """Monte Carlo law of the grid M-estimator under ``gen``."""
    idx = replicate_indices(spec, grid, gen, replications, seed, workers)
    return ArgmaxDistribution.from_indices(idx, grid, seed)


def write_replications_csv(path, indices, grid: ParameterGrid) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replication", "argmax_index", *grid.labels])
        for r, j in enumerate(np.asarray(indices)):
            w.writerow([r, int(j), *(repr(float(v)) for v in grid.points[j])])


def profile_argmax(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet) -> int:
    """Index along the first axis of ``argmax_theta max_eta S_n(theta, eta)``."""
    if grid.axes is None or len(grid.axes) != 2:
        raise ValueError("profiling needs a two-axis product grid")
    values = oriented_table(spec, grid, data).mean(axis=1).reshape(grid.shape)
    return argmax_index(values.max(axis=1))


# ---------------------------------------------------------------------------
# Sieve grids
# ---------------------------------------------------------------------------

MAX_SIEVE_BASIS = 3


def trig_basis(count: int, x) -> np.ndarray:
    """First ``count`` trigonometric basis functions at ``x``: 1, sqrt2 cos, sqrt2 sin."""
    x = np.asarray(x, dtype=float)
    funcs = [np.ones_like(x), math.sqrt(2) * np.cos(2 * math.pi * x),
             math.sqrt(2) * np.sin(2 * math.pi * x)]
    return np.stack(funcs[:count])


def sieve_grid(basis_count: int, box: tuple[float, float] = (-1.0, 1.0),
               points_per_axis: int = 5) -> ParameterGrid:
    """Product grid over the coefficients of a trigonometric sieve."""
    if not 1 <= basis_count <= MAX_SIEVE_BASIS:
        raise ValueError(f"basis count must be in 1..{MAX_SIEVE_BASIS}")
    axis = np.linspace(box[0], box[1], points_per_axis)
    labels = [f"w{k + 1}" for k in range(basis_count)]
    if basis_count == 1:
        return ParameterGrid.linspace(box[0], box[1], points_per_axis, label="w1")
    return ParameterGrid.product([axis] * basis_count, labels)


def sieve_lad_criterion(grid: ParameterGrid, data: SampleSet) -> tuple[CriterionSpec, SampleSet]:
    """Tabulated ``|y - sum_k w_k phi_k(x)|`` over sieve coefficients, ready for estimation.

    Returns the criterion together with the column-index sample that selects every observation.
    """
    obs = data.observations.reshape(data.n, 2)
    y, x = obs[:, 0], obs[:, 1]
    fitted = grid.points @ trig_basis(grid.dim, x)
    table = np.abs(y[None, :] - fitted)
    return CriterionSpec.tabulated(table, sign=-1), SampleSet(np.arange(data.n, dtype=float))


# ---------------------------------------------------------------------------
# Population criterion (quadrature oracle)
# ---------------------------------------------------------------------------


def _overlap(a: float, b: float, c: float, d: float) -> float:
    return max(0.0, min(b, d) - max(a, c))


def _kernel_moment(spec: CriterionSpec, gen: DataGenSpec, power: int) -> float:
    p = gen.params
    val, _ = integrate.quad(lambda x: spec.kernel_weight(x) ** power, p["x_lo"], p["x_hi"],
                            points=[spec.params["x0"]], epsabs=1e-13, epsrel=QUAD_TOL, limit=200)
    return val / (p["x_hi"] - p["x_lo"])


def _lad_abs_moment(theta: float, gen: DataGenSpec) -> float:
    """E|Y - X theta| by quadrature."""
    p = gen.params
    w = p["half_width"]

    def inner(x):
        shift = x * (theta - p["theta0"])
        val, _ = integrate.quad(lambda u: abs(u - shift), -w, w, points=[shift] if -w < shift < w else None,
                                epsabs=1e-13, epsrel=QUAD_TOL)
        return val / (2 * w)

    if gen.constant_x:
        return inner(p["x_lo"])
    val, _ = integrate.quad(inner, p["x_lo"], p["x_hi"], epsabs=1e-13, epsrel=QUAD_TOL)
    return val / (p["x_hi"] - p["x_lo"])


def population_criterion(spec: CriterionSpec, grid: ParameterGrid, gen: DataGenSpec) -> np.ndarray:
    """``E[f_theta(Z)]`` on the grid by closed form or adaptive quadrature (natural sign)."""
    if spec.kind == TABULATED:
        if gen.law != "table_columns":
            raise ValueError("tabulated criteria pair with the table_columns law")
        return spec.table[:, : int(gen.params["count"])].mean(axis=1)
    if grid.dim != 1:
        raise ValueError("builtin criteria need a 1-D grid")
    thetas = grid.values()
    p = gen.params
    if spec.kind == CUBE_ROOT and gen.law == "uniform":
        width = p["hi"] - p["lo"]
        return np.array([_overlap(t - 1, t + 1, p["lo"], p["hi"]) / width for t in thetas])
    if spec.kind == LAD and gen.law == "uniform_pair":
        return np.array([_lad_abs_moment(t, gen) for t in thetas])
    if spec.kind == MIN_VOLUME and gen.law == "min_volume_pair":
        ck = _kernel_moment(spec, gen, 1)
        w = spec.params["width"]
        span = p["y_hi"] - p["y_lo"]
        return np.array([ck * _overlap(t - w, t + w, p["y_lo"], p["y_hi"]) / span for t in thetas])
    raise ValueError(f"no population oracle for {spec.kind} under {gen.law}")


def population_argmax(spec: CriterionSpec, grid: ParameterGrid, gen: DataGenSpec) -> int:
    """Grid index maximizing the (oriented) population criterion."""
    return argmax_index(spec.sign * population_criterion(spec, grid, gen))
