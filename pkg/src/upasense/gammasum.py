"""Single-gamma mixture expansion of a sum of independent gamma variables.

A sum of independent Gamma(K, beta_m) variables with unequal scales is an
infinite mixture of Gamma(K*M + j, beta_min) laws.  The mixture weights are
``prefactor * delta_j`` with the delta recursion below; they are nonnegative
and sum to one, so the mass not yet accumulated is an exact truncation
certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .incgamma import poisson_terms, reg_gamma_pair

__all__ = [
    "SeriesControl",
    "SeriesConvergenceError",
    "GammaMixture",
    "mosch_deltas",
    "gamma_sum_mixture",
]

_RESCALE_AT = 1e250
_LOG_RESCALE = math.log(_RESCALE_AT)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for every infinite-series evaluation."""

    tail_tol: float = 1e-10
    max_terms: int = 20000

    def __post_init__(self):
        if not 0.0 < self.tail_tol < 1.0:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


class SeriesConvergenceError(ArithmeticError):
    """Raised when the mixture mass cannot be certified within ``max_terms``."""

    def __init__(self, message: str, residual: float, terms: int):
        super().__init__(message)
        self.residual = residual
        self.terms = terms


def _check_ratios(ratios) -> np.ndarray:
    r = np.asarray(ratios, dtype=float).ravel()
    if np.any(r < 0.0) or np.any(r >= 1.0) or not np.all(np.isfinite(r)):
        raise ValueError("ratios must lie in [0, 1); the reference scale is not the minimum")
    return r


def _power_sums(r: np.ndarray, n: int) -> np.ndarray:
    """c[i] = sum_q r_q**i for i = 0..n (c[0] unused by the recursion)."""
    if r.size == 0:
        return np.zeros(n + 1)
    return np.power.outer(r, np.arange(n + 1, dtype=float)).sum(axis=0)


def mosch_deltas(shape_k: int, ratios, J: int) -> np.ndarray:
    """Coefficients delta_0..delta_J of the gamma-sum series.

    ``ratios`` holds ``1 - beta_min / beta_q`` for every component.

    >>> mosch_deltas(2, [0.0, 0.5], 2).tolist()
    [1.0, 1.0, 0.75]
    """
    if J < 0:
        raise ValueError("J must be nonnegative")
    r = _check_ratios(ratios)
    c = _power_sums(r, J + 1)
    d = np.zeros(J + 1)
    d[0] = 1.0
    for j in range(J):
        # delta_{j+1} = K/(j+1) * sum_{i=1}^{j+1} c_i delta_{j+1-i}
        d[j + 1] = shape_k / (j + 1) * np.dot(c[1 : j + 2], d[j::-1])
    return d


@dataclass
class GammaMixture:
    """Truncated mixture sum_j p_j Gamma(shape_base + j, base_scale).

    ``weights`` are the mixture probabilities ``prefactor * delta_j``.  They may
    be stored rescaled by ``exp(-log_offset)`` when the prefactor underflows.
    """

    base_scale: float
    shape_base: float
    log_prefactor: float
    weights: np.ndarray
    residual: float
    log_offset: float = 0.0
    scales: tuple = field(default=())

    @property
    def terms(self) -> int:
        return int(self.weights.size)

    @property
    def prefactor(self) -> float:
        return math.exp(self.log_prefactor)

    @property
    def deltas(self) -> np.ndarray:
        """Raw series coefficients; may overflow for very spread scales."""
        with np.errstate(over="ignore"):
            return self.weights * math.exp(self.log_offset - self.log_prefactor)

    def _probabilities(self) -> np.ndarray:
        return self.weights * math.exp(self.log_offset)

    def sf(self, x: float) -> float:
        """P(X > x), with the uncaptured mass counted as exceedance."""
        if x <= 0.0:
            return 1.0
        if self.shape_base == 0:
            return 0.0
        y = x / self.base_scale
        p = self._probabilities()
        n = p.size
        _, q0 = reg_gamma_pair(self.shape_base, y)
        # Q(a + j, y) = Q(a, y) + sum_{i<j} y^(a+i) e^-y / Gamma(a+i+1)
        if n > 1:
            t = poisson_terms(self.shape_base + np.arange(n - 1, dtype=float), y)
            q = np.empty(n)
            q[0] = q0
            q[1:] = q0 + np.cumsum(t)
        else:
            q = np.array([q0])
        np.minimum(q, 1.0, out=q)
        val = float(np.dot(p, q)) + self.residual
        return min(max(val, 0.0), 1.0)

    def cdf(self, x: float) -> float:
        return 1.0 - self.sf(x)


def gamma_sum_mixture(shape_k: int, scales, ctrl: SeriesControl | None = None) -> GammaMixture:
    """Mixture representation of sum_m Gamma(shape_k, scales[m]).

    Zero scales are dropped (those components are identically zero).  Raises
    :class:`SeriesConvergenceError` when the residual mass stays above
    ``ctrl.tail_tol`` after ``ctrl.max_terms`` terms.
    """
    ctrl = ctrl or SeriesControl()
    if shape_k < 1:
        raise ValueError("shape must be a positive integer")
    s = np.asarray(scales, dtype=float).ravel()
    if np.any(s < 0.0) or not np.all(np.isfinite(s)):
        raise ValueError("scales must be finite and nonnegative")
    s = s[s > 0.0]
    if s.size == 0:
        return GammaMixture(1.0, 0.0, 0.0, np.array([1.0]), 0.0)
    smin = float(s.min())
    ratios = np.clip(1.0 - smin / s, 0.0, None)
    log_pref = float(shape_k * np.sum(np.log(smin / s)))

    n_max = ctrl.max_terms
    p = np.zeros(n_max + 1)
    if log_pref > -600.0:
        p[0] = math.exp(log_pref)
        offset = 0.0
    else:
        p[0] = 1.0
        offset = log_pref

    c = _power_sums(ratios, min(n_max + 1, 1024))
    total = p[0]

    def residual_of(total_scaled: float, off: float) -> float:
        if total_scaled <= 0.0:
            return 1.0
        log_mass = off + math.log(total_scaled)
        return 1.0 - math.exp(min(log_mass, 0.0))

    res = residual_of(total, offset)
    j = 0
    while res > ctrl.tail_tol:
        if j + 1 > n_max:
            raise SeriesConvergenceError(
                f"gamma-sum series not certified after {n_max} terms (residual {res:.3e})",
                residual=res,
                terms=n_max + 1,
            )
        if j + 2 > c.size:
            c = _power_sums(ratios, min(2 * c.size, n_max + 1))
        p[j + 1] = shape_k / (j + 1) * np.dot(c[1 : j + 2], p[j::-1])
        total += p[j + 1]
        if p[j + 1] > _RESCALE_AT:
            p[: j + 2] /= _RESCALE_AT
            total /= _RESCALE_AT
            offset += _LOG_RESCALE
        j += 1
        res = residual_of(total, offset)

    return GammaMixture(
        base_scale=smin,
        shape_base=float(shape_k * s.size),
        log_prefactor=log_pref,
        weights=p[: j + 1].copy(),
        residual=max(res, 0.0),
        log_offset=offset,
        scales=tuple(float(v) for v in s),
    )
