"""Criterion families, parameter grids, samples and the shared argmax rule.

Every estimator in the package is an argmax over a finite grid. Criteria
that are naturally minimized (least absolute deviation) carry ``sign = -1``
so that ``sign * Q_n`` is maximized; raw evaluations keep their natural sign.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "CUBE_ROOT",
    "LAD",
    "MIN_VOLUME",
    "TABULATED",
    "KERNELS",
    "ArgmaxDistribution",
    "CriterionError",
    "CriterionSpec",
    "DomainError",
    "InvalidCriterionError",
    "ParameterGrid",
    "SampleSet",
    "argmax_index",
    "argmax_rows",
    "criterion_table",
    "empirical_criterion",
    "evaluate_criterion",
    "oriented_table",
]

CUBE_ROOT = "cube_root"
LAD = "lad"
MIN_VOLUME = "min_volume"
TABULATED = "tabulated"
_KINDS = (CUBE_ROOT, LAD, MIN_VOLUME, TABULATED)


class CriterionError(ValueError):
    """Unknown criterion kind or malformed criterion parameters."""


class DomainError(ValueError):
    """Parameter or observation outside the criterion's declared domain."""


class InvalidCriterionError(ValueError):
    """Criterion values contain NaN, so no argmax is defined."""


def _gaussian_kernel(u):
    return np.exp(-0.5 * np.square(u)) / math.sqrt(2.0 * math.pi)


def _uniform_kernel(u):
    return (np.abs(u) <= 1.0).astype(float)


def _epanechnikov_kernel(u):
    return np.clip(0.75 * (1.0 - np.square(u)), 0.0, None)


KERNELS = {
    "gaussian": _gaussian_kernel,
    "uniform": _uniform_kernel,
    "epanechnikov": _epanechnikov_kernel,
}


# ---------------------------------------------------------------------------
# Criterion definitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriterionSpec:
    """A parameter-indexed criterion family ``f_theta(z)``.

    Use the named constructors rather than building instances directly.
    ``params`` holds kind-specific scalars; ``table`` is only set for
    tabulated criteria and is indexed ``(grid point, observation)``.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise CriterionError(f"unknown criterion kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))
        if self.kind == TABULATED:
            if self.table is None:
                raise CriterionError("tabulated criterion needs a table")
            tab = np.array(self.table, dtype=np.float64)
            if tab.ndim != 2:
                raise CriterionError("tabulated criterion table must be 2-D")
            tab.setflags(write=False)
            object.__setattr__(self, "table", tab)

    # -- constructors -------------------------------------------------------

    @classmethod
    def cube_root(cls) -> "CriterionSpec":
        """Window indicator ``1{theta - 1 <= z <= theta + 1}``."""
        return cls(CUBE_ROOT)

    @classmethod
    def lad(cls, y_bound: float = 1.0, x_bound: float = 1.0,
            theta_bound: float = 1.0) -> "CriterionSpec":
        """Absolute residual ``|y - x theta|`` on ``|y| <= y_bound``, ``|x| <= x_bound``."""
        if min(y_bound, x_bound, theta_bound) <= 0:
            raise CriterionError("LAD bounds must be positive")
        return cls(LAD, {"y_bound": float(y_bound), "x_bound": float(x_bound),
                         "theta_bound": float(theta_bound)})

    @classmethod
    def min_volume(cls, width: float, bandwidth: float, x0: float = 0.5,
                   kernel: str = "gaussian") -> "CriterionSpec":
        """Kernel-weighted coverage ``K((X - x0)/h) 1{Y in [theta - width, theta + width]}``."""
        if not 0.0 < width < 1.0:
            raise CriterionError("min-volume width must lie in (0, 1)")
        if bandwidth <= 0:
            raise CriterionError("bandwidth must be positive")
        if kernel not in KERNELS:
            raise CriterionError(f"unknown kernel {kernel!r}")
        return cls(MIN_VOLUME, {"width": float(width), "bandwidth": float(bandwidth),
                                "x0": float(x0), "kernel": kernel})

    @classmethod
    def tabulated(cls, table, sign: int = 1) -> "CriterionSpec":
        if sign not in (1, -1):
            raise CriterionError("sign must be +1 or -1")
        return cls(TABULATED, {"sign": sign}, np.asarray(table, dtype=np.float64))

    # -- derived properties -------------------------------------------------

    @property
    def sign(self) -> int:
        """+1 if the criterion is maximized, -1 if it is minimized."""
        if self.kind == LAD:
            return -1
        if self.kind == TABULATED:
            return int(self.params.get("sign", 1))
        return 1

    @property
    def envelope(self) -> float:
        """Finite constant bounding ``|f_theta(z)|`` on the declared domain."""
        if self.kind == CUBE_ROOT:
            return 1.0
        if self.kind == LAD:
            p = self.params
            return p["y_bound"] + p["x_bound"] * p["theta_bound"]
        if self.kind == MIN_VOLUME:
            return float(KERNELS[self.params["kernel"]](np.array(0.0)))
        tab = self.table
        return float(np.max(np.abs(tab))) if tab.size else 0.0

    @property
    def observation_width(self) -> int:
        """Number of coordinates per observation (1 for scalars and table columns)."""
        return 2 if self.kind in (LAD, MIN_VOLUME) else 1

    def kernel_weight(self, x):
        """Clipped kernel weight ``K((x - x0)/h)`` for the min-volume criterion."""
        p = self.params
        k = KERNELS[p["kernel"]]
        k0 = float(k(np.array(0.0)))
        return np.clip(k((np.asarray(x, dtype=float) - p["x0"]) / p["bandwidth"]), 0.0, k0)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, **self.params}
        if self.table is not None:
            out["table"] = self.table.tolist()
        return out


# ---------------------------------------------------------------------------
# Grids, samples and distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterGrid:
    """Finite, lexicographically ordered discretization of the parameter space.

    ``points`` has shape ``(M, d)``. ``axes`` is set for product grids built
    with :meth:`product` and records the per-axis coordinates in order.
    """

    points: np.ndarray
    spacing: float
    lower: np.ndarray
    upper: np.ndarray
    labels: tuple[str, ...] = ("theta",)
    axes: tuple[np.ndarray, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("grid needs at least one point")
        if len(self.labels) != pts.shape[1]:
            raise ValueError("one label per grid axis is required")
        for a, b in zip(pts[:-1], pts[1:]):
            if tuple(a) >= tuple(b):
                raise ValueError("grid points must be strictly increasing in lexicographic order")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float).reshape(-1))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float).reshape(-1))

    @classmethod
    def linspace(cls, lo: float, hi: float, size: int, label: str = "theta") -> "ParameterGrid":
        """Equally spaced 1-D grid with both endpoints included."""
        if size < 1:
            raise ValueError("grid size must be >= 1")
        if size > 1 and not hi > lo:
            raise ValueError("grid needs hi > lo")
        pts = np.linspace(lo, hi, size) if size > 1 else np.array([float(lo)])
        spacing = (hi - lo) / (size - 1) if size > 1 else math.inf
        return cls(pts[:, None], spacing, [lo], [hi if size > 1 else lo], (label,), (pts,))

    @classmethod
    def product(cls, axes: Sequence[Sequence[float]],
                labels: Sequence[str] | None = None) -> "ParameterGrid":
        """Cartesian product of 1-D axes, last axis varying fastest."""
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        if labels is None:
            labels = tuple(f"axis{k}" for k in range(len(axes)))
        pts = np.array(list(itertools.product(*axes)), dtype=float)
        steps = [np.min(np.diff(a)) for a in axes if a.size > 1]
        spacing = float(min(steps)) if steps else math.inf
        lower = [a.min() for a in axes]
        upper = [a.max() for a in axes]
        return cls(pts, spacing, lower, upper, tuple(labels), axes)

    @classmethod
    def from_points(cls, points, labels: Sequence[str] | None = None) -> "ParameterGrid":
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if labels is None:
            labels = ("theta",) if pts.shape[1] == 1 else tuple(f"axis{k}" for k in range(pts.shape[1]))
        if pts.shape[0] > 1:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt(np.sum(diff**2, axis=-1))
            spacing = float(np.min(dist[np.triu_indices(pts.shape[0], 1)]))
        else:
            spacing = math.inf
        return cls(pts, spacing, pts.min(axis=0), pts.max(axis=0), tuple(labels))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def shape(self) -> tuple[int, ...]:
        if self.axes is None:
            return (self.size,)
        return tuple(a.size for a in self.axes)

    def __len__(self) -> int:
        return self.size

    def values(self) -> np.ndarray:
        """Scalar coordinates of a 1-D grid."""
        if self.dim != 1:
            raise ValueError("values() is only defined for 1-D grids")
        return self.points[:, 0]

    def nearest_index(self, point) -> int:
        """Index of the grid point closest to ``point``; ties go to the lower index."""
        p = np.asarray(point, dtype=float).reshape(-1)
        dist = np.sum((self.points - p) ** 2, axis=1)
        return int(np.argmin(dist))

    def contains(self, point, tol: float = 1e-9) -> bool:
        """True if ``point`` lies in the closed bounding box (with slack ``tol`` per unit scale)."""
        p = np.asarray(point, dtype=float).reshape(-1)
        scale = max(1.0, float(np.max(np.abs(self.upper - self.lower))))
        return bool(np.all(p >= self.lower - tol * scale) and np.all(p <= self.upper + tol * scale))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.labels)
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "ParameterGrid":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return cls.from_points([[float(v) for v in r] for r in rows[1:]], labels=rows[0])


_OBS_COLUMNS = {CUBE_ROOT: ("z",), LAD: ("y", "x"), MIN_VOLUME: ("x", "y"), TABULATED: ("column",)}


@dataclass(frozen=True)
class SampleSet:
    """``n`` observations; scalars, ``(y, x)`` pairs for LAD or ``(x, y)`` for min-volume.

    For tabulated criteria observations are integer column indices into the table.
    """

    observations: np.ndarray

    def __post_init__(self):
        obs = np.array(self.observations, dtype=np.float64)
        if obs.ndim == 0:
            obs = obs[None]
        if obs.ndim > 2 or obs.shape[0] == 0:
            raise ValueError("a sample needs at least one observation")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    def __len__(self) -> int:
        return self.n

    def split(self) -> tuple["SampleSet", "SampleSet"]:
        """First ``ceil(n/2)`` observations and the rest."""
        k = -(-self.n // 2)
        if k == self.n:
            raise ValueError("need at least two observations to split")
        return SampleSet(self.observations[:k]), SampleSet(self.observations[k:])

    def to_csv(self, path, kind: str = CUBE_ROOT) -> None:
        obs = self.observations.reshape(self.n, -1)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_OBS_COLUMNS[kind][: obs.shape[1]])
            for row in obs:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        obs = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(obs[:, 0] if obs.shape[1] == 1 else obs)


@dataclass(frozen=True)
class ArgmaxDistribution:
    """Empirical probability mass over grid cells from ``replications`` draws."""

    masses: np.ndarray
    replications: int
    seed: int | None
    grid: ParameterGrid = field(repr=False)

    def __post_init__(self):
        m = np.array(self.masses, dtype=np.float64)
        if m.shape != (self.grid.size,):
            raise ValueError("one mass per grid point is required")
        if np.any(m < 0) or abs(m.sum() - 1.0) > 1e-12:
            raise ValueError("masses must be nonnegative and sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_indices(cls, indices, grid: ParameterGrid, seed: int | None = None) -> "ArgmaxDistribution":
        idx = np.asarray(indices, dtype=np.int64)
        counts = np.bincount(idx, minlength=grid.size)
        return cls(counts / idx.size, int(idx.size), seed, grid)

    @classmethod
    def point_mass(cls, index: int, grid: ParameterGrid, replications: int = 1,
                   seed: int | None = None) -> "ArgmaxDistribution":
        m = np.zeros(grid.size)
        m[index] = 1.0
        return cls(m, replications, seed, grid)

    def mode(self) -> int:
        return argmax_index(self.masses)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([*self.grid.labels, "mass"])
            for pt, m in zip(self.grid.points, self.masses):
                w.writerow([*(repr(float(v)) for v in pt), repr(float(m))])


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _check_theta(spec: CriterionSpec, theta: np.ndarray) -> None:
    if spec.kind == LAD:
        bound = spec.params["theta_bound"]
        if np.any(np.abs(theta) > bound * (1 + 1e-12)):
            raise DomainError(f"theta outside [-{bound}, {bound}]")
    elif spec.kind == MIN_VOLUME:
        if np.any(theta < -1e-12) or np.any(theta > 1 + 1e-12):
            raise DomainError("min-volume theta must lie in [0, 1]")


def _check_observations(spec: CriterionSpec, obs: np.ndarray) -> np.ndarray:
    if spec.kind == CUBE_ROOT:
        obs = obs.reshape(-1)
        if not np.all(np.isfinite(obs)):
            raise DomainError("observations must be finite")
        return obs
    if spec.kind == TABULATED:
        obs = obs.reshape(-1)
        cols = obs.astype(np.int64)
        if np.any(cols != obs) or np.any(cols < 0) or np.any(cols >= spec.table.shape[1]):
            raise DomainError("tabulated lookup out of range")
        return cols
    obs = obs.reshape(-1, 2)
    if spec.kind == LAD:
        p = spec.params
        if np.any(np.abs(obs[:, 0]) > p["y_bound"]) or np.any(np.abs(obs[:, 1]) > p["x_bound"]):
            raise DomainError("LAD observation outside its sample box")
    elif np.any(obs < 0) or np.any(obs > 1):
        raise DomainError("min-volume observation outside [0, 1]^2")
    return obs


def _table(spec: CriterionSpec, thetas: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """Raw ``f_theta(z)`` for 1-D ``thetas`` (builtin kinds) against checked observations."""
    t = thetas[:, None]
    if spec.kind == CUBE_ROOT:
        z = obs[None, :]
        return ((t - 1.0 <= z) & (z <= t + 1.0)).astype(np.float64)
    if spec.kind == LAD:
        y, x = obs[:, 0][None, :], obs[:, 1][None, :]
        return np.abs(y - x * t)
    x, y = obs[:, 0], obs[:, 1]
    w = spec.params["width"]
    inside = (t - w <= y[None, :]) & (y[None, :] <= t + w)
    return spec.kernel_weight(x)[None, :] * inside


def evaluate_criterion(spec: CriterionSpec, theta, z) -> float:
    """``f_theta(z)`` for one parameter and one observation.

    For tabulated criteria ``theta`` is a grid index and ``z`` a column index.
    """
    if spec.kind == TABULATED:
        j = int(theta)
        col = _check_observations(spec, np.array([z], dtype=float))[0]
        if not 0 <= j < spec.table.shape[0]:
            raise DomainError("tabulated lookup out of range")
        return float(spec.table[j, col])
    th = np.asarray(theta, dtype=float).reshape(-1)
    if th.size != 1:
        raise DomainError("builtin criteria take a scalar parameter")
    _check_theta(spec, th)
    obs = _check_observations(spec, np.asarray(z, dtype=float))
    return float(_table(spec, th, obs)[0, 0])


def criterion_table(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet) -> np.ndarray:
    """Matrix of raw ``f_theta_j(Z_i)``, shape ``(grid.size, data.n)``."""
    obs = _check_observations(spec, data.observations)
    if spec.kind == TABULATED:
        if spec.table.shape[0] != grid.size:
            raise DomainError("tabulated criterion rows must match the grid size")
        return spec.table[:, obs]
    if grid.dim != 1:
        raise DomainError("builtin criteria need a 1-D grid")
    thetas = grid.values()
    _check_theta(spec, thetas)
    return _table(spec, thetas, obs)


def oriented_table(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet) -> np.ndarray:
    """``sign * f``: the table whose row means are maximized."""
    tab = criterion_table(spec, grid, data)
    return tab if spec.sign == 1 else -tab


def empirical_criterion(spec: CriterionSpec, grid: ParameterGrid, data: SampleSet) -> np.ndarray:
    """``Q_n(theta_j) = mean_i f_theta_j(Z_i)`` for every grid point (natural sign)."""
    return criterion_table(spec, grid, data).mean(axis=1)


def argmax_index(values) -> int:
    """Smallest index attaining the maximum of a finite vector."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("argmax of an empty vector")
    if np.isnan(v).any():
        raise InvalidCriterionError("criterion values contain NaN")
    return int(np.argmax(v))


def argmax_rows(values) -> np.ndarray:
    """Row-wise :func:`argmax_index` for a 2-D array."""
    v = np.asarray(values, dtype=np.float64)
    if np.isnan(v).any():
        raise InvalidCriterionError("criterion values contain NaN")
    return np.argmax(v, axis=1)
