"""Numerical checks of the smoothing devices, anti-concentration and rates.

* ``softmax``: ``h(x) = beta^{-1} log sum_{m in A} exp(beta x_m)``, which sits
  between ``max_A x`` and ``max_A x + beta^{-1} log |A|``.
* ``soft_step``: a smooth step with ``1{z >= 0} <= g(z) <= 1{z >= -delta}``.
  It is a linear ramp from 0 at ``-delta (1 - eta)`` to 1 at ``-delta eta``,
  averaged against a compactly supported bump of half-width ``eta delta``.
  The small ``eta`` keeps ``sup |g'| = 1 / (delta (1 - 2 eta))`` within a
  factor ``1 + 1e-3`` of ``1 / delta``.
* Anti-concentration of the gap between two Gaussian maxima.
* Entropy integrals ``J(eps)`` and the convergence-rate calculator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special, stats

from ._seeding import STREAM_THEORY, stream_rng
from .gaussian import GaussianModel

__all__ = [
    "BOOTSTRAP_FINITE",
    "BOOTSTRAP_INFINITE",
    "FINITE_DIM",
    "INFINITE_DIM",
    "EuclideanCompact",
    "PowerLaw",
    "RateSpec",
    "anti_concentration_bound",
    "anti_concentration_check",
    "approximation_delta",
    "derivative_bound_check",
    "entropy_integral",
    "independent_pair_band_probability",
    "rate_bound",
    "soft_step",
    "softmax",
    "softmax_gap_bound",
]

FINITE_DIM = "finite_dim"
INFINITE_DIM = "infinite_dim"
BOOTSTRAP_FINITE = "bootstrap_finite"
BOOTSTRAP_INFINITE = "bootstrap_infinite"
_REGIMES = (FINITE_DIM, INFINITE_DIM, BOOTSTRAP_FINITE, BOOTSTRAP_INFINITE)

SOFT_STEP_ETA = 2.5e-4
FD_STEP = 1e-5
DERIV_SLACK = 1e-3


# ---------------------------------------------------------------------------
# Softmax and soft-step
# ---------------------------------------------------------------------------


def _subset(values: np.ndarray, subset) -> np.ndarray:
    if subset is None:
        idx = np.arange(values.shape[-1])
    else:
        idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("subset must be nonempty")
    return idx


def softmax(values, beta: float, subset=None) -> float:
    """``beta^{-1} log sum_{m in subset} exp(beta x_m)`` computed with a max shift."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    x = np.asarray(values, dtype=np.float64)
    idx = _subset(x, subset)
    return float(special.logsumexp(beta * x[idx]) / beta)


def softmax_gap_bound(beta: float, size: int) -> float:
    """Upper bound ``beta^{-1} log size`` on ``softmax - max``."""
    return math.log(size) / beta


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 / (t[inside] ** 2 - 1.0))
    return out


def _bump_scalar(t: float) -> float:
    return math.exp(1.0 / (t * t - 1.0)) if abs(t) < 1 else 0.0


@lru_cache(maxsize=1)
def mollifier_constant() -> float:
    """``C`` with ``C * int_{-1}^{1} exp(1/(t^2 - 1)) dt = 1``."""
    val, _ = integrate.quad(_bump_scalar, -1, 1, epsabs=1e-14, epsrel=1e-12, limit=200)
    return 1.0 / val


def _bump_cdf(t: float) -> float:
    """Mass of the normalized bump on ``(-1, t]``."""
    if t <= -1:
        return 0.0
    if t >= 1:
        return 1.0
    if t > 0:
        return 1.0 - _bump_cdf(-t)
    val, _ = integrate.quad(_bump_scalar, -1, t, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val * mollifier_constant()


def _bump_first_moment(t: float) -> float:
    """``int_{-1}^{t} s phi(s) ds`` for the normalized bump ``phi`` (even, so symmetric in t)."""
    if t <= -1 or t >= 1:
        return 0.0
    val, _ = integrate.quad(lambda s: s * _bump_scalar(s), -1, -abs(t), epsabs=1e-15,
                            epsrel=1e-13, limit=200)
    return val * mollifier_constant()


def soft_step(z: float, delta: float, eta: float = SOFT_STEP_ETA) -> float:
    """Smooth step equal to 1 for ``z >= 0`` and 0 for ``z <= -delta``.

    ``g(z) = int ramp(z - eta delta t) phi(t) dt`` with ``ramp`` rising linearly
    from 0 at ``-delta (1 - eta)`` to 1 at ``-delta eta``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not 0 < eta < 0.25:
        raise ValueError("eta must lie in (0, 1/4)")
    z = float(z)
    if z >= 0:
        return 1.0
    if z <= -delta:
        return 0.0
    lo, hi = -delta * (1 - eta), -delta * eta
    width = eta * delta
    # ramp(z - width t) is 1 for t <= t_hi, 0 for t >= t_lo, linear in between
    t_hi = min(1.0, max(-1.0, (z - hi) / width))
    t_lo = min(1.0, max(-1.0, (z - lo) / width))
    value = _bump_cdf(t_hi)
    mass = _bump_cdf(t_lo) - value
    if mass > 0:
        moment = _bump_first_moment(t_lo) - _bump_first_moment(t_hi)
        value += ((z - lo) * mass - width * moment) / (hi - lo)
    return float(min(1.0, max(0.0, value)))


def soft_step_reference(z: float, delta: float, eta: float = SOFT_STEP_ETA) -> float:
    """Direct quadrature of ``int ramp(z - eta delta t) phi(t) dt`` (slower cross-check)."""
    lo, hi = -delta * (1 - eta), -delta * eta
    width = eta * delta

    def integrand(t):
        r = min(1.0, max(0.0, (z - width * t - lo) / (hi - lo)))
        return r * _bump_scalar(t)

    pts = [p for p in ((z - hi) / width, (z - lo) / width) if -1 < p < 1] or None
    val, _ = integrate.quad(integrand, -1, 1, points=pts, epsabs=1e-15, epsrel=1e-13, limit=400)
    return val * mollifier_constant()


# ---------------------------------------------------------------------------
# Derivative-sum bound
# ---------------------------------------------------------------------------


def smoothed_indicator(x, beta: float, delta: float, subset, shift: float) -> float:
    """``g_delta(h_A(x) - h_{A^c}(x) + shift)``."""
    x = np.asarray(x, dtype=np.float64)
    a = _subset(x, subset)
    comp = np.setdiff1d(np.arange(x.size), a)
    if comp.size == 0:
        raise ValueError("subset must leave a nonempty complement")
    return soft_step(softmax(x, beta, a) - softmax(x, beta, comp) + shift, delta)


def _richardson_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty(x.size)
    for m in range(x.size):
        e = np.zeros(x.size)
        e[m] = 1.0

        def central(step):
            return (f(x + step * e) - f(x - step * e)) / (2 * step)

        grad[m] = (4 * central(h / 2) - central(h)) / 3
    return grad


@dataclass(frozen=True)
class DerivativeReport:
    size: int
    beta: float
    delta: float
    subset: tuple[int, ...]
    trials: int
    bound: float
    max_first_order: float
    max_second_order: float
    passed: bool
    observed: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"M": self.size, "beta": self.beta, "delta": self.delta, "subset": list(self.subset),
                "trials": self.trials, "bound": self.bound,
                "max_first_order": self.max_first_order,
                "max_second_order": self.max_second_order, "pass": self.passed}


def derivative_bound_check(size: int, beta: float, delta: float, subset, trials: int, seed: int,
                           second_order: bool = False) -> DerivativeReport:
    """Finite-difference check of ``sum_m |d f / d x_m| <= 2 / delta``.

    Points ``x`` are standard normal; the shift places the soft-step argument
    uniformly in ``[-1.5 delta, 0.5 delta]`` so that both the ramp and the
    flat parts are visited. The second-order sum is reported only.
    """
    if not 2 <= size <= 12:
        raise ValueError("size must lie in 2..12")
    a = _subset(np.zeros(size), subset)
    comp = np.setdiff1d(np.arange(size), a)
    rng = stream_rng(seed, STREAM_THEORY, size)
    bound = 2.0 / delta
    observed = np.empty(trials)
    second = 0.0
    for r in range(trials):
        x = rng.standard_normal(size)
        gap = softmax(x, beta, a) - softmax(x, beta, comp)
        shift = -gap + rng.uniform(-1.5 * delta, 0.5 * delta)

        def f(v):
            return smoothed_indicator(v, beta, delta, a, shift)

        observed[r] = np.abs(_richardson_gradient(f, x, FD_STEP)).sum()
        if second_order:
            h = 1e-4
            hess = np.empty((size, size))
            for m in range(size):
                e = np.zeros(size)
                e[m] = h
                hess[m] = (_richardson_gradient(f, x + e, FD_STEP)
                           - _richardson_gradient(f, x - e, FD_STEP)) / (2 * h)
            second = max(second, float(np.abs(hess).sum()))
    max_first = float(observed.max()) if trials else 0.0
    return DerivativeReport(size, beta, delta, tuple(int(i) for i in a), trials, bound, max_first,
                            second, bool(max_first <= bound * (1 + DERIV_SLACK)), observed)


# ---------------------------------------------------------------------------
# Anti-concentration
# ---------------------------------------------------------------------------


def anti_concentration_bound(epsilon: float, sigma_lower: float, size: int) -> float:
    """``2 eps / sigma * (sqrt(2 log M) + 2)``."""
    return 2 * epsilon / sigma_lower * (math.sqrt(2 * math.log(size)) + 2)


def independent_pair_band_probability(epsilon: float, r: float = 0.0) -> float:
    """``P(|X_0 - X_1 - r| <= eps)`` for independent standard normals."""
    s = math.sqrt(2.0)
    return float(stats.norm.cdf((r + epsilon) / s) - stats.norm.cdf((r - epsilon) / s))


@dataclass(frozen=True)
class AntiConcentrationReport:
    epsilon: float
    sigma_lower: float
    size: int
    subset: tuple[int, ...]
    bound: float
    r_grid: np.ndarray = field(repr=False)
    band_prob: np.ndarray = field(repr=False)
    band_se: np.ndarray = field(repr=False)
    max_band_prob: float
    max_band_se: float
    passed: bool

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "sigma_lower": self.sigma_lower, "M": self.size,
                "subset": list(self.subset), "bound": self.bound,
                "max_band_prob": self.max_band_prob, "max_band_se": self.max_band_se,
                "pass": self.passed}


def anti_concentration_check(model: GaussianModel, subset, epsilon: float, sigma_lower: float,
                             mc_samples: int, seed: int, r_points: int = 81) -> AntiConcentrationReport:
    """Monte Carlo band probabilities of ``max_A W - max_{A^c} W`` against the bound.

    ``r`` ranges over an even grid between the 0.5% and 99.5% quantiles of the gap
    (plus 0). The check passes iff ``estimate - 3 se <= bound`` at every ``r``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    m = model.size
    a = _subset(np.zeros(m), subset)
    comp = np.setdiff1d(np.arange(m), a)
    if comp.size == 0:
        raise ValueError("subset must leave a nonempty complement")
    rng = stream_rng(seed, STREAM_THEORY, 0xA17)
    w = model.mean[None, :] + rng.standard_normal((mc_samples, m)) @ model.chol.T
    gap = w[:, a].max(axis=1) - w[:, comp].max(axis=1)
    lo, hi = np.quantile(gap, [0.005, 0.995])
    r_grid = np.unique(np.concatenate([np.linspace(lo, hi, r_points), [0.0]]))
    gap_sorted = np.sort(gap)
    upper = np.searchsorted(gap_sorted, r_grid + epsilon, side="right")
    lower = np.searchsorted(gap_sorted, r_grid - epsilon, side="left")
    prob = (upper - lower) / mc_samples
    se = np.sqrt(prob * (1 - prob) / mc_samples)
    bound = anti_concentration_bound(epsilon, sigma_lower, m)
    k = int(np.argmax(prob))
    return AntiConcentrationReport(epsilon, sigma_lower, m, tuple(int(i) for i in a), bound, r_grid,
                                   prob, se, float(prob[k]), float(se[k]),
                                   bool(np.all(prob - 3 * se <= bound)))


# ---------------------------------------------------------------------------
# Entropy integral and rates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EuclideanCompact:
    """``H(d) = dim * log(1 + diameter / d)``."""

    dim: int
    diameter: float

    def __call__(self, d: float) -> float:
        return self.dim * math.log1p(self.diameter / d)


@dataclass(frozen=True)
class PowerLaw:
    """``H(d) = C d^{-alpha}`` with ``0 <= alpha < 2``."""

    alpha: float
    constant: float = 1.0

    def __post_init__(self):
        if not 0 <= self.alpha < 2:
            raise ValueError("alpha must lie in [0, 2)")

    def __call__(self, d: float) -> float:
        return self.constant * d ** (-self.alpha)


def entropy_integral(entropy: Callable[[float], float], epsilon: float) -> float:
    """``J(eps) = int_0^eps sqrt(1 + H(d)) dd`` by adaptive quadrature."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if isinstance(entropy, PowerLaw) and entropy.alpha >= 2:
        raise ValueError("alpha must be < 2")
    # substitute d = eps * u^2 so a d^{-alpha/2} endpoint singularity becomes integrable and mild
    val, _ = integrate.quad(lambda u: 2 * epsilon * u * math.sqrt(1 + entropy(epsilon * u * u))
                            if u > 0 else 0.0, 0, 1, epsabs=1e-12, epsrel=1e-10, limit=400)
    return val


@dataclass(frozen=True)
class RateSpec:
    """Regime and exponents for the rate calculator.

    ``q`` and ``c_l`` only enter the unspecified constant and are kept for documentation.
    """

    regime: str = FINITE_DIM
    alpha: float | None = None
    kappa: float | None = None
    q: float | None = None
    c_l: float | None = None

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.infinite:
            if self.alpha is None or self.kappa is None:
                raise ValueError("infinite-dimensional regimes need alpha and kappa")
            if not 0 < self.alpha < 2 or not 0 < self.kappa < 1:
                raise ValueError("need alpha in (0, 2) and kappa in (0, 1)")
            if not self.alpha / 2 + self.kappa < 1:
                raise ValueError("need alpha/2 + kappa < 1")

    @property
    def infinite(self) -> bool:
        return self.regime in (INFINITE_DIM, BOOTSTRAP_INFINITE)


def rate_exponents(spec: RateSpec) -> tuple[float, ...]:
    if not spec.infinite:
        return (5 / 8,)
    a, k = spec.alpha, spec.kappa
    return (5 / 8, (1 - a / 2 - k) / a, (5 - 5 * k - a) / (8 - 8 * k))


def rate_bound(spec: RateSpec, n: int) -> dict:
    """Binding exponent and value of the rate (``n^{-5/8} log n`` or ``n^{-e}``)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    exps = rate_exponents(spec)
    e = min(exps)
    value = n ** (-e) * math.log(n) if not spec.infinite else n ** (-e)
    return {"regime": spec.regime, "n": n, "exponents": list(exps), "exponent": e, "value": value}


def approximation_delta(n: int, epsilon: float, entropy: Callable[[float], float]) -> float:
    """``eps + (J(eps) + eps sqrt(log 1/eps)) / sqrt(n) + (sqrt(log 1/eps) + log 1/eps) / n``."""
    log_inv = math.log(1 / epsilon)
    j = entropy_integral(entropy, epsilon)
    return epsilon + (j + epsilon * math.sqrt(log_inv)) / math.sqrt(n) + (math.sqrt(log_inv) + log_inv) / n


def sweep_rows(values: Sequence[float], observed: Sequence[float], bounds: Sequence[float]):
    """Rows ``(parameter, observed, bound)`` for a CSV sweep."""
    return [(float(v), float(o), float(b)) for v, o, b in zip(values, observed, bounds)]
