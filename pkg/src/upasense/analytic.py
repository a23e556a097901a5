"""Closed-form false-alarm and detection probabilities of the weighted detectors.

WED: the H0 statistic is a sum of independent Gamma(K, sigma_n2 w_m / K)
terms and is evaluated through the single-gamma mixture in
:mod:`upasense.gammasum`.  Under H1 the per-user energies are correlated; the
scales become the eigenvalues of D^(1/2) C D^(1/2) with D = diag(sigma_n2 w_m
(gamma_m + 1)) and C_ij = sqrt(rho_ij).

WEVD: the weighted Gram matrix is complex Wishart and its largest eigenvalue
has the determinant CDF of :mod:`upasense.wishart`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .detectors import DetectorKind
from .gammasum import GammaMixture, SeriesControl, gamma_sum_mixture
from .wishart import WishartSpec, lmax_cdf

__all__ = [
    "rho_matrix",
    "rho_from_snr",
    "wed_corr",
    "h1_covariance",
    "wed_h1_scales",
    "wed_h0_mixture",
    "wed_h1_mixture",
    "wed_pf",
    "wed_pd",
    "wevd_h1_scales",
    "wevd_pf",
    "wevd_pd",
    "BracketError",
    "invert_sf",
    "invert_threshold",
    "AnalyticDetector",
]

PD_MODES = ("paper", "eigen")


def _check_common(w, sigma_n2: float, K: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size < 1 or np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    if not w.sum() > 0.0:
        raise ValueError("at least one weight must be positive")
    if not sigma_n2 > 0.0:
        raise ValueError("noise power must be positive")
    if int(K) != K or K < 1:
        raise ValueError("K must be a positive integer")
    return w


def rho_matrix(alphas, sigma_s2: float, sigma_n2: float) -> np.ndarray:
    """Correlation of the per-user energies, in the signal/noise-power form."""
    p = np.abs(np.asarray(alphas)) ** 2
    pi, pj = p[:, None], p[None, :]
    num = sigma_s2**2 * pi * pj
    den = pi * pj * sigma_s2**2 + sigma_s2 * sigma_n2 * (pi + pj) + sigma_n2**2
    rho = num / den
    np.fill_diagonal(rho, 1.0)
    return rho


def rho_from_snr(gammas) -> np.ndarray:
    """gamma_i gamma_j / ((gamma_i + 1)(gamma_j + 1)), diagonal set to one."""
    g = np.asarray(gammas, dtype=float)
    f = g / (g + 1.0)
    rho = np.outer(f, f)
    np.fill_diagonal(rho, 1.0)
    return rho


def wed_corr(alphas, sigma_s2: float, sigma_n2: float) -> np.ndarray:
    """C with unit diagonal and C_ij = sqrt(rho_ij)."""
    return np.sqrt(rho_matrix(alphas, sigma_s2, sigma_n2))


def h1_covariance(w, alphas, sigma_s2: float, sigma_n2: float) -> np.ndarray:
    """sigma_s2 W^(1/2) a a^H W^(1/2) + sigma_n2 W, the covariance of W^(1/2) y."""
    sw = np.sqrt(np.asarray(w, dtype=float))
    v = sw * np.asarray(alphas, dtype=complex)
    return sigma_s2 * np.outer(v, np.conj(v)) + sigma_n2 * np.diag(np.asarray(w, dtype=float))


def _clean_eigs(ev: np.ndarray) -> np.ndarray:
    ev = np.sort(np.asarray(ev, dtype=float))[::-1]
    floor = ev[0] * ev.size * 1e-15 if ev.size else 0.0
    return np.where(ev > floor, ev, 0.0)


def wed_h1_scales(w, alphas, sigma_s2: float, sigma_n2: float) -> np.ndarray:
    """Eigenvalues of D C (via the symmetric D^(1/2) C D^(1/2)), descending."""
    w = np.asarray(w, dtype=float)
    gam = np.abs(np.asarray(alphas)) ** 2 * sigma_s2 / sigma_n2
    d = sigma_n2 * w * (gam + 1.0)
    sd = np.sqrt(d)
    c = wed_corr(alphas, sigma_s2, sigma_n2)
    a = sd[:, None] * c * sd[None, :]
    if np.any(np.linalg.eigvalsh(c) < -1e-12):
        raise ArithmeticError("energy correlation matrix is not positive semidefinite")
    return _clean_eigs(np.linalg.eigvalsh(a))


def wed_h0_mixture(w, sigma_n2: float, K: int, ctrl: SeriesControl | None = None) -> GammaMixture:
    w = _check_common(w, sigma_n2, K)
    return gamma_sum_mixture(int(K), sigma_n2 * w / K, ctrl)


def wed_h1_mixture(w, alphas, sigma_s2: float, sigma_n2: float, K: int,
                   ctrl: SeriesControl | None = None) -> GammaMixture:
    w = _check_common(w, sigma_n2, K)
    lam = wed_h1_scales(w, alphas, sigma_s2, sigma_n2)
    return gamma_sum_mixture(int(K), lam / K, ctrl)


def wed_pf(tau: float, w, sigma_n2: float, K: int, ctrl: SeriesControl | None = None) -> float:
    """P(Lambda_WED > tau | H0)."""
    if tau < 0.0:
        raise ValueError("threshold must be nonnegative")
    return wed_h0_mixture(w, sigma_n2, K, ctrl).sf(tau)


def wed_pd(tau: float, w, alphas, sigma_s2: float, sigma_n2: float, K: int,
           ctrl: SeriesControl | None = None) -> float:
    """P(Lambda_WED > tau | H1) from the correlated-gamma mixture."""
    if tau < 0.0:
        raise ValueError("threshold must be nonnegative")
    return wed_h1_mixture(w, alphas, sigma_s2, sigma_n2, K, ctrl).sf(tau)


def wevd_h1_scales(w, alphas, sigma_s2: float, sigma_n2: float, mode: str = "eigen") -> np.ndarray:
    """Scale parameters fed to the H1 determinant formula.

    ``paper``: psi_m = w_m (sigma_s2 |alpha_m|^2 + sigma_n2), the diagonal of
    the H1 covariance.  ``eigen``: the covariance eigenvalues themselves.
    """
    w = np.asarray(w, dtype=float)
    if mode == "paper":
        return np.sort(w * (sigma_s2 * np.abs(np.asarray(alphas)) ** 2 + sigma_n2))[::-1]
    if mode == "eigen":
        return _clean_eigs(np.linalg.eigvalsh(h1_covariance(w, alphas, sigma_s2, sigma_n2)))
    raise ValueError(f"mode must be one of {PD_MODES}, got {mode!r}")


def _wishart_sf(tau: float, spec: WishartSpec) -> float:
    if tau < 0.0:
        raise ValueError("threshold must be nonnegative")
    return 1.0 - lmax_cdf(spec.K * tau, spec)


def wevd_pf(tau: float, w, sigma_n2: float, K: int) -> float:
    """P(Lambda_WEVD > tau | H0)."""
    w = _check_common(w, sigma_n2, K)
    return _wishart_sf(tau, WishartSpec.from_scales(sigma_n2 * w, int(K)))


def wevd_pd(tau: float, w, alphas, sigma_s2: float, sigma_n2: float, K: int,
            mode: str = "eigen") -> float:
    """P(Lambda_WEVD > tau | H1) in ``paper`` or ``eigen`` mode."""
    _check_common(w, sigma_n2, K)
    scales = wevd_h1_scales(w, alphas, sigma_s2, sigma_n2, mode)
    return _wishart_sf(tau, WishartSpec.from_scales(scales, int(K)))


class BracketError(ArithmeticError):
    pass


PF_TOL = 1e-8
MAX_DOUBLINGS = 1024


def invert_sf(sf: Callable[[float], float], target: float, tau_hi: float = 1.0,
              tol: float = PF_TOL) -> float:
    """Smallest-residual tau with sf(tau) = target for a decreasing sf.

    The bracket [0, tau_hi] is doubled until sf(tau_hi) < target, then Brent's
    method narrows it; plain bisection finishes if Brent stops short of ``tol``.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target probability must lie in (0, 1)")
    hi = float(tau_hi)
    for _ in range(MAX_DOUBLINGS):
        if sf(hi) < target:
            break
        hi *= 2.0
    else:
        raise BracketError(f"no threshold with exceedance below {target} up to tau={hi:.3e}")
    lo = 0.0
    f = lambda t: sf(t) - target  # noqa: E731
    tau = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    err = f(tau)
    if abs(err) < tol:
        return tau
    # Brent converged in tau but not in probability; bisect on the residual.
    a, b = lo, hi
    for _ in range(400):
        tau = 0.5 * (a + b)
        err = f(tau)
        if abs(err) < tol or b - a <= 4 * np.finfo(float).eps * b:
            break
        if err > 0.0:
            a = tau
        else:
            b = tau
    return tau


def invert_threshold(target_pf: float, kind, w, sigma_n2: float, K: int,
                     ctrl: SeriesControl | None = None) -> float:
    """Threshold giving false-alarm probability ``target_pf``."""
    det = AnalyticDetector(DetectorKind(kind), np.asarray(w, dtype=float), None, 1.0, sigma_n2, K,
                           ctrl=ctrl)
    return det.tau_for_pf(target_pf)


@dataclass
class AnalyticDetector:
    """Analytic Pf/Pd for one detector at fixed weights and amplitudes.

    Mixtures and Wishart specs are built once and reused across thresholds.
    """

    kind: DetectorKind
    w: np.ndarray
    alphas: np.ndarray | None
    sigma_s2: float
    sigma_n2: float
    K: int
    mode: str = "eigen"
    ctrl: SeriesControl | None = None
    _h0: object = field(default=None, init=False, repr=False)
    _h1: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.kind = DetectorKind(self.kind)
        self.w = _check_common(self.w, self.sigma_n2, self.K)

    def _h0_model(self):
        if self._h0 is None:
            if self.kind is DetectorKind.WED:
                self._h0 = wed_h0_mixture(self.w, self.sigma_n2, self.K, self.ctrl)
            else:
                self._h0 = WishartSpec.from_scales(self.sigma_n2 * self.w, int(self.K))
        return self._h0

    def _h1_model(self):
        if self.alphas is None:
            raise ValueError("detection probability needs the SU amplitudes")
        if self._h1 is None:
            if self.kind is DetectorKind.WED:
                self._h1 = wed_h1_mixture(self.w, self.alphas, self.sigma_s2, self.sigma_n2,
                                          self.K, self.ctrl)
            else:
                scales = wevd_h1_scales(self.w, self.alphas, self.sigma_s2, self.sigma_n2,
                                        self.mode)
                self._h1 = WishartSpec.from_scales(scales, int(self.K))
        return self._h1

    def _sf(self, model, tau: float) -> float:
        if tau < 0.0:
            raise ValueError("threshold must be nonnegative")
        if isinstance(model, GammaMixture):
            return model.sf(tau)
        return _wishart_sf(tau, model)

    def pf(self, tau: float) -> float:
        return self._sf(self._h0_model(), tau)

    def pd(self, tau: float) -> float:
        return self._sf(self._h1_model(), tau)

    @property
    def residuals(self) -> tuple:
        """Certified truncation residuals of the WED mixtures built so far."""
        return tuple(m.residual for m in (self._h0, self._h1) if isinstance(m, GammaMixture))

    def tau_for_pf(self, target_pf: float) -> float:
        return invert_sf(self.pf, target_pf, tau_hi=self.sigma_n2)
