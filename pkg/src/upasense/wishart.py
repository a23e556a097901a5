"""Exact CDF of the largest eigenvalue of a correlated complex Wishart matrix.

For R ~ CW_M(K, Sigma) with K >= M and distinct covariance eigenvalues
s_1 > ... > s_M,

    P(lambda_max(R) <= x) = det[s_j^(K-i+1) gamma(K-i+1, x/s_j)]
                            / (prod_{i<j} (s_i - s_j) prod_i s_i^(K-M+1) (K-i)!)

Dividing row i by (K-i)! and column j by s_j^(K-M+1) turns this into
det[s_j^(M-i) P(K-i+1, x/s_j)] / prod_{i<j} (s_i - s_j), a ratio of a
generalised Vandermonde determinant to the plain one.  The cancellation in
that ratio grows like 1/prod(gaps), so the determinant is evaluated in
multiprecision with a working precision chosen from the gap product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

__all__ = [
    "WishartSpec",
    "WishartDegeneracyError",
    "spread_scales",
    "lmax_cdf",
]

GAP_TOL = 1e-9
SPREAD_STEP = 1e-7
_GUARD_DIGITS = 30
_MAX_DPS = 4000


class WishartDegeneracyError(ArithmeticError):
    """Scale parameters cannot be separated enough for the determinant form."""


def spread_scales(scales) -> np.ndarray:
    """Sort descending and pull apart near-equal values.

    A value within a relative gap of ``GAP_TOL`` of its predecessor is moved to
    ``prev * (1 - SPREAD_STEP)``; runs of equal values therefore end up spaced
    by ``SPREAD_STEP`` times their index in the run.  The input is not mutated.
    """
    s = np.sort(np.asarray(scales, dtype=float).ravel())[::-1].copy()
    for k in range(1, s.size):
        if s[k - 1] - s[k] < GAP_TOL * s[k - 1]:
            s[k] = s[k - 1] * (1.0 - SPREAD_STEP)
    return s


@dataclass(frozen=True)
class WishartSpec:
    """Dimension, degrees of freedom and descending covariance eigenvalues."""

    M: int
    K: int
    eigs: tuple

    @classmethod
    def from_scales(cls, scales, K: int) -> "WishartSpec":
        s = np.asarray(scales, dtype=float).ravel()
        if np.any(s < 0.0) or not np.all(np.isfinite(s)):
            raise ValueError("covariance eigenvalues must be finite and nonnegative")
        s = s[s > 0.0]
        if s.size == 0:
            raise ValueError("at least one positive covariance eigenvalue is required")
        if K < s.size:
            raise ValueError(f"K={K} < M={s.size}: the full-rank Wishart law does not apply")
        return cls(M=int(s.size), K=int(K), eigs=tuple(float(v) for v in spread_scales(s)))

    def log10_gap_product(self) -> float:
        """log10 of prod_{i<j} (u_i - u_j) with u = eigs / eigs[0]."""
        u = np.asarray(self.eigs) / self.eigs[0]
        total = 0.0
        for i in range(self.M):
            for j in range(i + 1, self.M):
                gap = u[i] - u[j]
                if gap <= 0.0:
                    raise WishartDegeneracyError("covariance eigenvalues are not distinct")
                total += math.log10(gap)
        return total


def _reg_lower_column(y, K: int, M: int) -> list:
    """P(a, y) for a = K, K-1, ..., K-M+1 (integer shapes), in current mp precision."""
    if y == 0:
        return [mpmath.mpf(0)] * M
    ey = mpmath.exp(-y)
    # Poisson terms y^k e^-y / k! for k = 0..K-1; Q(a, y) = sum_{k<a} terms.
    terms = [ey]
    for k in range(1, K):
        terms.append(terms[-1] * y / k)
    out = []
    cum = mpmath.fsum(terms[: K - M + 1])
    qs = {K - M + 1: cum}
    for a in range(K - M + 2, K + 1):
        cum = cum + terms[a - 1]
        qs[a] = cum
    for a in range(K, K - M, -1):
        q = qs[a]
        if q > 0.5:
            # P small: sum the convergent upper tail of the Poisson series.
            t = terms[a - 1] * y / a
            acc = t
            k = a
            eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
            while True:
                k += 1
                t = t * y / k
                acc += t
                if t < acc * eps:
                    break
            out.append(acc)
        else:
            out.append(1 - q)
    return out


def lmax_cdf(x: float, spec: WishartSpec) -> float:
    """P(lambda_max(R) <= x) for R ~ CW_M(K, diag(spec.eigs))."""
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    M, K = spec.M, spec.K
    log10_v = spec.log10_gap_product()
    dps = _GUARD_DIGITS + int(math.ceil(max(0.0, -log10_v)))
    if dps > _MAX_DPS:
        raise WishartDegeneracyError(
            f"gap product 1e{log10_v:.0f} needs {dps} digits; scales too close together"
        )
    with mpmath.workdps(dps):
        s0 = mpmath.mpf(spec.eigs[0])
        u = [mpmath.mpf(e) / s0 for e in spec.eigs]
        xs = mpmath.mpf(x) / s0
        mat = mpmath.matrix(M, M)
        for j in range(M):
            col = _reg_lower_column(xs / u[j], K, M)
            for i in range(M):
                # row i (0-based) carries shape K - i and power u^(M-1-i)
                mat[i, j] = u[j] ** (M - 1 - i) * col[i]
        vander = mpmath.mpf(1)
        for i in range(M):
            for j in range(i + 1, M):
                vander *= u[i] - u[j]
        val = mpmath.det(mat) / vander
        out = float(val)
    if not (-1e-9 <= out <= 1.0 + 1e-9) or math.isnan(out):
        raise ArithmeticError(
            f"largest-eigenvalue CDF left [0, 1] (value {out!r}, gap product 1e{log10_v:.1f}, "
            f"dps {dps})"
        )
    return min(max(out, 0.0), 1.0)
