"""Coherent positive definiteness and the linear Toeplitz covariance family.

A symmetric matrix ``S`` is coherently positive definite with floor ``s2``
when, for every proper nonempty index set ``A`` with complement ``C``, each
diagonal entry of the Schur complement ``S_AA - S_AC S_CC^{-1} S_CA`` is at
least ``s2``. Each such entry is the conditional variance of one coordinate
given the coordinates in ``C``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from ._seeding import STREAM_SUBSETS, stream_rng
from .gaussian import FactorizationError, cholesky_with_jitter

__all__ = [
    "EXHAUSTIVE_LIMIT",
    "CoherenceReport",
    "SingularSubsetError",
    "Sampled",
    "coherent_pd_check",
    "conditional_variance",
    "eigen_sufficiency",
    "linear_toeplitz",
    "toeplitz_cofactors",
    "toeplitz_conditional_variance",
    "toeplitz_conditional_variance_dense",
    "toeplitz_dense_cofactors",
]

EXHAUSTIVE_LIMIT = 18
EIGEN_TOL = 1e-10
# A Schur diagonal counts as reaching the floor if it is within this relative
# (or absolute) slack; exact equality is common, e.g. interior Toeplitz rows.
PASS_RTOL = 1e-9
PASS_ATOL = 1e-10


class SingularSubsetError(np.linalg.LinAlgError):
    """The conditioning block of some subset could not be factorized."""

    def __init__(self, subset):
        super().__init__(f"conditioning block is singular for subset A={list(subset)}")
        self.subset = tuple(subset)


@dataclass(frozen=True)
class Sampled:
    """Check ``k`` random subsets plus all singletons and singleton complements."""

    k: int
    seed: int


@dataclass(frozen=True)
class CoherenceReport:
    matrix_size: int
    subsets_checked: int
    exhaustive: bool
    min_schur_diag: float
    sigma_lower_sq: float
    passed: bool
    witness: tuple[int, ...] | None
    witness_row: int | None
    argmin_subset: tuple[int, ...]

    @property
    def pass_(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "matrix_size": self.matrix_size,
            "subsets_checked": self.subsets_checked,
            "exhaustive": self.exhaustive,
            "min_schur_diag": self.min_schur_diag,
            "sigma_lower_sq": self.sigma_lower_sq,
            "pass": self.passed,
            "witness": None if self.witness is None else list(self.witness),
            "witness_row": self.witness_row,
            "argmin_subset": list(self.argmin_subset),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _reaches(value: float, floor: float) -> bool:
    return value >= floor - max(PASS_RTOL * abs(floor), PASS_ATOL)


def _check_symmetric(sigma: np.ndarray) -> np.ndarray:
    s = np.asarray(sigma, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(np.abs(s).max(), 1.0)
    if np.max(np.abs(s - s.T)) > 1e-10 * scale:
        raise ValueError("matrix must be symmetric")
    return 0.5 * (s + s.T)


def _schur_diag_one(s: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Schur diagonal over ``A = mask`` by a jittered Cholesky solve."""
    a, c = np.flatnonzero(mask), np.flatnonzero(~mask)
    block = s[np.ix_(c, c)]
    try:
        chol, _ = cholesky_with_jitter(block, allow_zero=False)
    except FactorizationError as exc:
        raise SingularSubsetError(a) from exc
    w = np.linalg.solve(chol, s[np.ix_(c, a)])
    return np.diag(s)[a] - np.sum(w * w, axis=0)


def _schur_diag_batch(s: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Schur diagonals for a batch of masks sharing one complement size.

    Returns an array shaped like ``masks`` with ``+inf`` outside each ``A``.
    """
    m = s.shape[0]
    comp = np.array([np.flatnonzero(~mk) for mk in masks])
    blocks = s[comp[:, :, None], comp[:, None, :]]
    cross = s[comp]  # (N, k, M): rows of the complement against every column
    out = np.full(masks.shape, np.inf)
    try:
        chol = np.linalg.cholesky(blocks)
    except np.linalg.LinAlgError:
        for r, mk in enumerate(masks):
            out[r, mk] = _schur_diag_one(s, mk)
        return out
    w = np.linalg.solve(chol, cross)
    q = np.diag(s)[None, :] - np.sum(w * w, axis=1)
    out[masks] = q[masks]
    return out


def _all_masks(m: int) -> np.ndarray:
    codes = np.arange(1, 2**m - 1, dtype=np.int64)
    return ((codes[:, None] >> np.arange(m)) & 1).astype(bool)


def _sampled_masks(m: int, mode: Sampled) -> np.ndarray:
    rng = stream_rng(mode.seed, STREAM_SUBSETS)
    rows = [np.eye(m, dtype=bool), ~np.eye(m, dtype=bool)]
    if m > 1 and mode.k > 0:
        draws = rng.integers(0, 2, size=(mode.k, m)).astype(bool)
        ok = draws.any(axis=1) & ~draws.all(axis=1)
        rows.append(draws[ok])
    masks = np.unique(np.concatenate(rows), axis=0)
    return masks[masks.any(axis=1) & ~masks.all(axis=1)]


def coherent_pd_check(sigma, sigma_lower_sq: float, mode: str | Sampled = "exhaustive",
                      chunk: int = 4096) -> CoherenceReport:
    """Track the smallest Schur-complement diagonal over proper nonempty subsets.

    ``mode`` is ``"exhaustive"`` (all ``2^M - 2`` subsets, ``M <= 18``) or a :class:`Sampled`.
    """
    s = _check_symmetric(sigma)
    m = s.shape[0]
    if m < 2:
        raise ValueError("need at least two coordinates to form a proper subset")
    exhaustive = isinstance(mode, str)
    if exhaustive:
        if mode != "exhaustive":
            raise ValueError(f"unknown mode {mode!r}")
        if m > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive mode is limited to M <= {EXHAUSTIVE_LIMIT}")
        masks = _all_masks(m)
    else:
        masks = _sampled_masks(m, mode)
    best = np.inf
    best_subset: tuple[int, ...] = ()
    best_row = -1
    sizes = (~masks).sum(axis=1)
    for k in np.unique(sizes):
        group = masks[sizes == k]
        for start in range(0, group.shape[0], chunk):
            part = group[start:start + chunk]
            diag = _schur_diag_batch(s, part)
            flat = int(np.argmin(diag))
            r, col = divmod(flat, m)
            if diag[r, col] < best:
                best = float(diag[r, col])
                best_subset = tuple(int(i) for i in np.flatnonzero(part[r]))
                best_row = col
    passed = _reaches(best, sigma_lower_sq)
    return CoherenceReport(m, int(masks.shape[0]), exhaustive, best, float(sigma_lower_sq), passed,
                           None if passed else best_subset, None if passed else best_row, best_subset)


def eigen_sufficiency(sigma, sigma_lower_sq: float) -> bool:
    """True iff the smallest eigenvalue is at least ``sigma_lower_sq`` (slack 1e-10)."""
    s = _check_symmetric(sigma)
    return bool(np.linalg.eigvalsh(s)[0] >= sigma_lower_sq - EIGEN_TOL)


def conditional_variance(sigma, index: int, given) -> float:
    """Variance of coordinate ``index`` given the coordinates ``given`` (dense Schur complement)."""
    s = _check_symmetric(sigma)
    g = np.asarray(list(given), dtype=np.int64)
    if g.size == 0:
        return float(s[index, index])
    chol = np.linalg.cholesky(s[np.ix_(g, g)])
    w = np.linalg.solve(chol, s[g, index])
    return float(s[index, index] - w @ w)


# ---------------------------------------------------------------------------
# Linear Toeplitz family c - delta |i - j|
# ---------------------------------------------------------------------------


def linear_toeplitz(c: float, delta: float, size: int) -> np.ndarray:
    """Matrix with entries ``c - delta |i - j|``; requires ``c > (size - 1) delta / 2``."""
    if size < 1:
        raise ValueError("size must be >= 1")
    p = size - 1
    if delta < 0 or not c > p * delta / 2:
        raise ValueError(f"need delta >= 0 and c > p*delta/2 (c={c}, delta={delta}, p={p})")
    idx = np.arange(size)
    return c - delta * np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def _toeplitz_block(c: float, delta: float, p: int) -> np.ndarray:
    idx = np.arange(p)
    return c - delta * np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def toeplitz_cofactors(c: float, delta: float, p: int) -> tuple[np.ndarray, float]:
    """Closed-form signed cofactor matrix and determinant of the ``p x p`` block ``c - delta|i-j|``.

    The cofactor matrix is tridiagonal plus the two far corners.
    """
    if p < 3:
        raise ValueError("closed forms need p >= 3")
    a = 2.0 ** (p - 2) * c * delta ** (p - 2)
    b = 2.0 ** (p - 3) * delta ** (p - 1)
    m = np.zeros((p, p))
    interior = 2 * a - (p - 1) * 2 * b
    off = -a + (p - 1) * b
    for i in range(p):
        m[i, i] = interior
        if i + 1 < p:
            m[i, i + 1] = m[i + 1, i] = off
    m[0, 0] = m[-1, -1] = a - (p - 2) * b
    m[0, -1] = m[-1, 0] = b
    det = 2.0 ** (p - 1) * c * delta ** (p - 1) - (p - 1) * 2.0 ** (p - 2) * delta**p
    return m, det


def toeplitz_dense_cofactors(c: float, delta: float, p: int) -> tuple[np.ndarray, float]:
    """Signed minors and determinant of the same block by dense LU determinants."""
    block = _toeplitz_block(c, delta, p)
    cof = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            minor = np.delete(np.delete(block, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return cof, float(np.linalg.det(block))


def toeplitz_conditional_variance(c: float, delta: float, p: int) -> float:
    """Variance of the first of ``p + 1`` Toeplitz coordinates given the other ``p``.

    Closed form ``2 delta (2c - p delta) / (2c - (p - 1) delta)``.
    """
    denom = 2 * c - (p - 1) * delta
    if not denom > 0:
        raise ValueError("need 2c - (p - 1) delta > 0")
    return 2 * delta * (2 * c - p * delta) / denom


def toeplitz_conditional_variance_dense(c: float, delta: float, p: int) -> float:
    """Same conditional variance by a direct Schur complement."""
    return conditional_variance(linear_toeplitz(c, delta, p + 1), 0, range(1, p + 1))


def all_subsets(m: int):
    """Proper nonempty subsets of ``range(m)`` as tuples, smallest first."""
    for k in range(1, m):
        yield from itertools.combinations(range(m), k)
