"""Gaussian counterpart of the empirical criterion on a grid.

A :class:`GaussianModel` carries the mean of the *maximized* criterion
(``sign * E f``) and the covariance of ``f``. The covariance of a single
draw is stored; :meth:`GaussianModel.scaled` divides it by ``n`` to match
the covariance of the empirical mean ``Q_n``.

Three ways to fill a model are offered: closed forms (``analytic_model``),
adaptive quadrature of the first two moments (``quadrature_model``) and
plug-in Monte Carlo moments (``mc_model``). The closed forms printed for
the LAD and min-volume examples are reproduced behind ``printed_formula``
only so they can be compared with quadrature (:func:`discrepancy_report`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from ._seeding import STREAM_GAUSSIAN, STREAM_MOMENTS, STREAM_TV_SE, run_blocks, stream_rng
from .core import (
    CUBE_ROOT,
    LAD,
    MIN_VOLUME,
    TABULATED,
    ArgmaxDistribution,
    CriterionSpec,
    ParameterGrid,
    SampleSet,
    argmax_rows,
    oriented_table,
)
from .estimator import QUAD_TOL, DataGenSpec, _kernel_moment, _overlap, population_criterion

__all__ = [
    "ANALYTIC",
    "MONTE_CARLO",
    "QUADRATURE",
    "DegenerateSamplerError",
    "FactorizationError",
    "GaussianModel",
    "NoClosedFormError",
    "analytic_model",
    "cholesky_with_jitter",
    "discrepancy_report",
    "distribution_distance",
    "interval_ks",
    "lad_printed_covariance",
    "lad_printed_covariance_decomposed",
    "lad_printed_mean",
    "mc_model",
    "quadrature_model",
    "sample_argmax_distribution",
    "total_variation",
    "tv_standard_error",
]

ANALYTIC = "analytic"
MONTE_CARLO = "monte_carlo"
QUADRATURE = "quadrature"

JITTER_START = 1e-12
JITTER_STOP = 1e-6


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky failed even with the largest jitter on the ladder."""


class NoClosedFormError(ValueError):
    """No closed-form moments are registered for this criterion."""


class DegenerateSamplerError(ValueError):
    """Every draw from the sampler was identical."""


def cholesky_with_jitter(matrix: np.ndarray, allow_zero: bool = True) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``matrix + jitter * I`` with the smallest ladder jitter that works.

    The ladder tries 0, then ``1e-12 * trace / M`` doubling up to ``1e-6 * trace / M``.
    An all-zero matrix factors to zeros when ``allow_zero`` is set.
    """
    a = np.asarray(matrix, dtype=np.float64)
    m = a.shape[0]
    scale = float(np.trace(a)) / m if m else 0.0
    if scale == 0.0 and allow_zero and not np.any(a):
        return np.zeros_like(a), 0.0
    try:
        return np.linalg.cholesky(a), 0.0
    except np.linalg.LinAlgError:
        pass
    if scale <= 0.0:
        raise FactorizationError("matrix has nonpositive trace and is not positive definite")
    jitter = JITTER_START * scale
    eye = np.eye(m)
    while jitter <= JITTER_STOP * scale * (1 + 1e-12):
        try:
            return np.linalg.cholesky(a + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise FactorizationError(f"Cholesky failed up to jitter {JITTER_STOP * scale:.3g}")


@dataclass(frozen=True)
class GaussianModel:
    """Mean/covariance of the Gaussian counterpart on ``grid``, with its factor."""

    grid: ParameterGrid = field(repr=False)
    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(repr=False)
    jitter_used: float
    source: str
    samples: int | None = None
    mean_se: np.ndarray | None = field(default=None, repr=False)
    cov_se: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_moments(cls, grid: ParameterGrid, mean, cov, source: str, samples: int | None = None,
                     mean_se=None, cov_se=None) -> "GaussianModel":
        mean = np.asarray(mean, dtype=np.float64).reshape(-1)
        cov = np.asarray(cov, dtype=np.float64)
        if cov.shape != (mean.size, mean.size) or mean.size != grid.size:
            raise ValueError("mean/covariance shapes must match the grid")
        cov = 0.5 * (cov + cov.T)
        if np.any(np.diag(cov) < 0):
            raise FactorizationError("covariance has a negative diagonal entry")
        chol, jitter = cholesky_with_jitter(cov)
        return cls(grid, mean, cov, chol, jitter, source, samples, mean_se, cov_se)

    @property
    def size(self) -> int:
        return self.mean.size

    def scaled(self, n: int) -> "GaussianModel":
        """Model for the mean of ``n`` i.i.d. draws: covariance divided by ``n``."""
        s = 1.0 / math.sqrt(n)
        return GaussianModel(self.grid, self.mean, self.cov / n, self.chol * s,
                             self.jitter_used / n, self.source, self.samples,
                             self.mean_se, None if self.cov_se is None else self.cov_se / n)

    def reconstruction_error(self) -> float:
        """Relative Frobenius error of ``chol chol^T`` against ``cov + jitter I``."""
        target = self.cov + self.jitter_used * np.eye(self.size)
        denom = max(np.linalg.norm(target), np.finfo(float).tiny)
        return float(np.linalg.norm(self.chol @ self.chol.T - target) / denom)

    def to_csv(self, directory) -> tuple[Path, Path]:
        """Write ``mean.csv`` and ``cov.csv`` into ``directory``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        mean_path, cov_path = d / "mean.csv", d / "cov.csv"
        with open(mean_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([*self.grid.labels, "mean"])
            for pt, m in zip(self.grid.points, self.mean):
                w.writerow([*(repr(float(v)) for v in pt), repr(float(m))])
        with open(cov_path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.cov:
                w.writerow([repr(float(v)) for v in row])
        return mean_path, cov_path


# ---------------------------------------------------------------------------
# Closed forms printed for the three examples
# ---------------------------------------------------------------------------


def cube_root_printed_moments(thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean 1/2 and covariance ``7/4 - |theta - theta'|`` as printed for the window criterion."""
    d = np.abs(thetas[:, None] - thetas[None, :])
    return np.full(thetas.size, 0.5), 1.75 - d


def lad_printed_mean(theta):
    """Printed first moment ``theta^2 - 3 theta + 9/2`` of ``|Y - theta|``."""
    theta = np.asarray(theta, dtype=float)
    return theta**2 - 3 * theta + 4.5


def _lad_c(theta):
    c0 = 576 / 64 - 71 * theta / 8 + 5 * theta**2 / 2 + theta**3 - theta**4
    c1 = 71 / 16 - 5 * theta / 2 - 3 * theta**2 / 2 + 2 * theta**3
    c2 = -1 / 8 + theta / 2 - theta**2 / 2
    return c0, c1, c2


def lad_printed_covariance(theta: float, theta_prime: float) -> float:
    """Printed cubic-in-distance covariance, with ``theta`` the smaller argument."""
    lo, hi = min(theta, theta_prime), max(theta, theta_prime)
    d = hi - lo
    c0, c1, c2 = _lad_c(lo)
    return c0 - c1 * d + c2 * d**2 + d**3 / 3


def lad_printed_covariance_decomposed(theta: float, theta_prime: float) -> float:
    """Printed ``I + II`` rewrite of the same covariance (C3, C4 form)."""
    t, tp = min(theta, theta_prime), max(theta, theta_prime)
    c3 = 2233 / 256 - 279 * t / 32 - 241 * t**2 / 96 - 13 * t**3 / 32 - 3 * t**4 / 2
    c4 = 19 / 4 - 5 * t / 2 - t**2 + 2 * t**3
    part_i = c3 + (5 / 48 - t / 2 + t**2) * (-tp**2 + 2 * t * tp)
    part_ii = (c4 - tp**2 / 3 + 2 * t * tp / 3) * (1 / 16 - abs(tp - t))
    return part_i + part_ii


def _pairwise(func, thetas: np.ndarray) -> np.ndarray:
    m = thetas.size
    out = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            out[i, j] = out[j, i] = func(thetas[i], thetas[j])
    return out


def _min_volume_constants(spec: CriterionSpec, law: DataGenSpec | None) -> tuple[float, float]:
    law = law or DataGenSpec.min_volume_pair()
    return _kernel_moment(spec, law, 1), _kernel_moment(spec, law, 2)


def analytic_model(spec: CriterionSpec, grid: ParameterGrid, law: DataGenSpec | None = None,
                   printed_formula: bool = False) -> GaussianModel:
    """Gaussian model from closed-form moments.

    Window criterion: without ``law`` (or with ``printed_formula``) the printed
    ``1/2`` and ``7/4 - delta|j - j'|`` are used; with a uniform ``law`` the exact
    interval-overlap moments are used. LAD and min-volume only have the
    printed formulas, so they require ``printed_formula=True``.
    """
    if grid.dim != 1 and spec.kind != TABULATED:
        raise NoClosedFormError("closed forms are 1-D")
    if spec.kind == CUBE_ROOT:
        thetas = grid.values()
        if law is None or printed_formula:
            mean, cov = cube_root_printed_moments(thetas)
        else:
            mean, cov = _cube_root_exact(thetas, law)
        return GaussianModel.from_moments(grid, mean, cov, ANALYTIC)
    if not printed_formula:
        raise NoClosedFormError(f"{spec.kind} closed form is only available with printed_formula=True")
    thetas = grid.values() if spec.kind != TABULATED else None
    if spec.kind == LAD:
        mean = -lad_printed_mean(thetas)
        cov = _pairwise(lad_printed_covariance, thetas)
        return GaussianModel.from_moments(grid, mean, cov, ANALYTIC)
    if spec.kind == MIN_VOLUME:
        ck, ck2 = _min_volume_constants(spec, law)
        w = spec.params["width"]
        mean = np.full(thetas.size, 2 * ck * w)
        cov = ck2 * np.abs(thetas[:, None] - thetas[None, :]) - 2 * ck * w**2
        return GaussianModel.from_moments(grid, mean, cov, ANALYTIC)
    raise NoClosedFormError("tabulated criteria have no closed form")


def _cube_root_exact(thetas: np.ndarray, law: DataGenSpec) -> tuple[np.ndarray, np.ndarray]:
    if law.law != "uniform":
        raise NoClosedFormError("window criterion closed form needs a uniform law")
    lo, hi = law.params["lo"], law.params["hi"]
    width = hi - lo
    mean = np.array([_overlap(t - 1, t + 1, lo, hi) for t in thetas]) / width
    m = thetas.size
    second = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            a, b = max(thetas[i], thetas[j]) - 1, min(thetas[i], thetas[j]) + 1
            second[i, j] = second[j, i] = _overlap(a, b, lo, hi) / width
    return mean, second - np.outer(mean, mean)


# ---------------------------------------------------------------------------
# Quadrature and Monte Carlo moments
# ---------------------------------------------------------------------------


def _lad_cross_moment(s1: float, s2: float, w: float) -> float:
    """E|U - s1||U - s2| for U ~ U[-w, w]."""
    pts = sorted({s for s in (s1, s2) if -w < s < w}) or None
    val, _ = integrate.quad(lambda u: abs(u - s1) * abs(u - s2), -w, w, points=pts,
                            epsabs=1e-13, epsrel=QUAD_TOL, limit=200)
    return val / (2 * w)


def quadrature_moments(spec: CriterionSpec, grid: ParameterGrid,
                       law: DataGenSpec) -> tuple[np.ndarray, np.ndarray]:
    """Raw-sign mean and covariance of ``f_theta(Z)`` by closed form or adaptive quadrature."""
    if spec.kind == TABULATED:
        cols = spec.table[:, : int(law.params["count"])]
        mean = cols.mean(axis=1)
        centered = cols - mean[:, None]
        return mean, centered @ centered.T / cols.shape[1]
    thetas = grid.values()
    mean = population_criterion(spec, grid, law)
    m = thetas.size
    second = np.empty((m, m))
    if spec.kind == CUBE_ROOT:
        return _cube_root_exact(thetas, law)
    if spec.kind == LAD:
        p = law.params
        w = p["half_width"]
        if law.constant_x:
            x = p["x_lo"]
            for i in range(m):
                for j in range(i, m):
                    second[i, j] = second[j, i] = _lad_cross_moment(
                        x * (thetas[i] - p["theta0"]), x * (thetas[j] - p["theta0"]), w)
        else:
            span = p["x_hi"] - p["x_lo"]
            for i in range(m):
                for j in range(i, m):
                    val, _ = integrate.quad(
                        lambda x: _lad_cross_moment(x * (thetas[i] - p["theta0"]),
                                                    x * (thetas[j] - p["theta0"]), w),
                        p["x_lo"], p["x_hi"], epsabs=1e-12, epsrel=1e-9)
                    second[i, j] = second[j, i] = val / span
        return mean, second - np.outer(mean, mean)
    if spec.kind == MIN_VOLUME:
        p = law.params
        ck2 = _kernel_moment(spec, law, 2)
        w = spec.params["width"]
        span = p["y_hi"] - p["y_lo"]
        for i in range(m):
            for j in range(i, m):
                a = max(thetas[i], thetas[j]) - w
                b = min(thetas[i], thetas[j]) + w
                second[i, j] = second[j, i] = ck2 * _overlap(a, b, p["y_lo"], p["y_hi"]) / span
        return mean, second - np.outer(mean, mean)
    raise NoClosedFormError(spec.kind)


def quadrature_model(spec: CriterionSpec, grid: ParameterGrid, law: DataGenSpec) -> GaussianModel:
    """Gaussian model whose moments come from :func:`quadrature_moments`."""
    mean, cov = quadrature_moments(spec, grid, law)
    return GaussianModel.from_moments(grid, spec.sign * mean, cov, QUADRATURE)


MIN_MC_SAMPLES = 1000


def mc_model(spec: CriterionSpec, grid: ParameterGrid, sampler: DataGenSpec, samples: int,
             seed: int, chunk: int = 20000) -> GaussianModel:
    """Plug-in moment estimates from ``samples`` i.i.d. draws, with standard errors.

    ``cov_se[j, k]`` is the standard error of the mean of the centered products
    ``(f_j - m_j)(f_k - m_k)``.
    """
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"mc_model needs at least {MIN_MC_SAMPLES} samples")
    rng = stream_rng(seed, STREAM_MOMENTS)
    obs = sampler.draw_array(rng, samples)
    flat = obs.reshape(samples, -1)
    if np.all(flat == flat[0]):
        raise DegenerateSamplerError("all sampler draws are identical")
    table = oriented_table(spec, grid, SampleSet(obs))
    mean = table.mean(axis=1)
    centered = table - mean[:, None]
    cov = centered @ centered.T / samples
    # second pass for the spread of the centered products
    sq = np.zeros_like(cov)
    for start in range(0, samples, chunk):
        c = centered[:, start:start + chunk]
        prod = c[:, None, :] * c[None, :, :]
        sq += np.sum((prod - cov[:, :, None]) ** 2, axis=2)
    cov_se = np.sqrt(sq / (samples - 1) / samples)
    mean_se = centered.std(axis=1, ddof=1) / math.sqrt(samples)
    return GaussianModel.from_moments(grid, mean, cov, MONTE_CARLO, samples, mean_se, cov_se)


# ---------------------------------------------------------------------------
# Sampling and distances
# ---------------------------------------------------------------------------


def sample_argmax_indices(model: GaussianModel, replications: int, seed: int,
                          workers: int = 1) -> np.ndarray:
    if replications < 1:
        raise ValueError("replications must be >= 1")

    def block(rng, count):
        xi = rng.standard_normal((count, model.size))
        return argmax_rows(model.mean[None, :] + xi @ model.chol.T)

    return run_blocks(replications, block, seed, STREAM_GAUSSIAN, workers)


def sample_argmax_distribution(model: GaussianModel, replications: int, seed: int,
                               workers: int = 1) -> ArgmaxDistribution:
    """Law of the argmax of ``mean + chol @ xi`` estimated from ``replications`` draws."""
    idx = sample_argmax_indices(model, replications, seed, workers)
    return ArgmaxDistribution.from_indices(idx, model.grid, seed)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())


def interval_ks(p, q) -> float:
    """Largest ``|p(range) - q(range)|`` over contiguous index ranges."""
    diff = np.concatenate([[0.0], np.cumsum(np.asarray(p, float) - np.asarray(q, float))])
    return float(diff.max() - diff.min())


def distribution_distance(p: ArgmaxDistribution, q: ArgmaxDistribution, metric: str = "tv") -> float:
    """Total variation (``"tv"``) or contiguous-range distance (``"interval_ks"``)."""
    if p.grid is not q.grid and not (p.grid.points.shape == q.grid.points.shape
                                     and np.array_equal(p.grid.points, q.grid.points)):
        raise ValueError("distributions live on different grids")
    metric = metric.lower()
    if metric == "tv":
        return total_variation(p.masses, q.masses)
    if metric in ("interval_ks", "intervalks"):
        return interval_ks(p.masses, q.masses)
    raise ValueError(f"unknown metric {metric!r}")


def tv_standard_error(p: ArgmaxDistribution, q: ArgmaxDistribution, seed: int,
                      draws: int = 200) -> float:
    """Parametric-bootstrap standard error of the estimated total variation.

    Both mass functions are redrawn as multinomials with their own replication
    counts and the spread of the resulting distances is reported.
    """
    rng = stream_rng(seed, STREAM_TV_SE)
    a = rng.multinomial(p.replications, p.masses, size=draws) / p.replications
    b = rng.multinomial(q.replications, q.masses, size=draws) / q.replications
    tv = 0.5 * np.abs(a - b).sum(axis=1)
    return float(tv.std(ddof=1))


# ---------------------------------------------------------------------------
# Printed-formula discrepancy report
# ---------------------------------------------------------------------------


def discrepancy_report(spec: CriterionSpec, grid: ParameterGrid, law: DataGenSpec) -> dict:
    """Compare printed closed-form moments with the quadrature oracle under ``law``.

    Never raises on disagreement; the caller decides what to do with the numbers.
    """
    thetas = grid.values()
    oracle_mean, oracle_cov = quadrature_moments(spec, grid, law)
    report: dict = {"kind": spec.kind, "law": law.to_dict(), "grid": thetas.tolist()}
    if spec.kind == CUBE_ROOT:
        printed_mean, printed_cov = cube_root_printed_moments(thetas)
        report["formula"] = "mean 1/2, cov 7/4 - |theta - theta'|"
        report["max_bernoulli_variance"] = 0.25
    elif spec.kind == LAD:
        printed_mean = lad_printed_mean(thetas)
        printed_cov = _pairwise(lad_printed_covariance, thetas)
        decomposed = _pairwise(lad_printed_covariance_decomposed, thetas)
        report["formula"] = "mean theta^2 - 3 theta + 9/2, cov C0 - C1 d + C2 d^2 + d^3/3"
        report["internal_max_abs_diff"] = float(np.max(np.abs(decomposed - printed_cov)))
    elif spec.kind == MIN_VOLUME:
        ck, ck2 = _min_volume_constants(spec, law)
        w = spec.params["width"]
        printed_mean = np.full(thetas.size, 2 * ck * w)
        printed_cov = ck2 * np.abs(thetas[:, None] - thetas[None, :]) - 2 * ck * w**2
        report["formula"] = "mean 2 C_K width, cov C~_K |theta - theta'| - 2 C_K width^2"
        report["C_K"], report["C_K_squared"] = ck, ck2
    else:
        raise NoClosedFormError("no printed formula for tabulated criteria")
    mean_diff = np.abs(printed_mean - oracle_mean)
    cov_diff = np.abs(printed_cov - oracle_cov)
    report.update({
        "max_abs_mean_diff": float(mean_diff.max()),
        "max_abs_cov_diff": float(cov_diff.max()),
        "max_rel_cov_diff": float(cov_diff.max() / max(np.abs(oracle_cov).max(), 1e-300)),
        "oracle_cov_corner": float(oracle_cov[0, -1]),
        "printed_cov_corner": float(printed_cov[0, -1]),
        "printed_cov_increases_with_distance": bool(m_increasing(printed_cov)),
        "consistent": bool(mean_diff.max() < 1e-8 and cov_diff.max() < 1e-8),
    })
    return report


def m_increasing(cov: np.ndarray) -> bool:
    """True if the first row strictly increases away from the diagonal."""
    row = cov[0]
    return bool(row.size > 1 and np.all(np.diff(row) > 0))
