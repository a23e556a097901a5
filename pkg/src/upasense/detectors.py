"""Fusion-center sample synthesis and the weighted energy / eigenvalue statistics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DetectorKind",
    "Hypothesis",
    "SampleBlock",
    "EigenConvergenceError",
    "synth_block",
    "synth_batch",
    "wed_statistic",
    "wevd_statistic",
    "wed_batch",
    "wevd_batch",
    "jacobi_eigvalsh",
    "decide",
]

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 50


class DetectorKind(str, enum.Enum):
    WED = "wed"
    WEVD = "wevd"


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


class EigenConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SampleBlock:
    """M x K complex samples seen by the fusion center."""

    y: np.ndarray
    hypothesis: Hypothesis

    @property
    def M(self) -> int:
        return self.y.shape[0]

    @property
    def K(self) -> int:
        return self.y.shape[1]


def _cn(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    scale = math.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synth_batch(hypothesis, alphas, sigma_s2: float, sigma_n2: float, K: int,
                rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` stacked blocks of shape (n, M, K).

    ``alphas`` is (M,) or (n, M).  Under H1 every row shares one signal
    sequence s ~ CN(0, sigma_s2 I_K) per block.
    """
    hyp = Hypothesis(hypothesis)
    a = np.asarray(alphas, dtype=complex)
    M = a.shape[-1]
    if K < 1 or sigma_s2 <= 0.0 or sigma_n2 <= 0.0:
        raise ValueError("K must be >= 1 and variances positive")
    y = _cn(rng, (n, M, K), sigma_n2)
    if hyp is Hypothesis.H1:
        s = _cn(rng, (n, 1, K), sigma_s2)
        a = np.broadcast_to(a, (n, M))
        y += a[:, :, None] * s
    return y


def synth_block(hypothesis, alphas, sigma_s2: float, sigma_n2: float, K: int,
                rng: np.random.Generator) -> SampleBlock:
    y = synth_batch(hypothesis, alphas, sigma_s2, sigma_n2, K, rng, 1)[0]
    return SampleBlock(y, Hypothesis(hypothesis))


def _as_array(block) -> np.ndarray:
    return block.y if isinstance(block, SampleBlock) else np.asarray(block)


def wed_batch(y: np.ndarray, w) -> np.ndarray:
    """Weighted average energy for stacked blocks y of shape (..., M, K)."""
    K = y.shape[-1]
    energy = (y.real**2 + y.imag**2).sum(axis=-1)
    return (np.asarray(w) * energy).sum(axis=-1) / K


def wed_statistic(block, w) -> float:
    y = _as_array(block)
    if np.shape(w)[-1] != y.shape[0]:
        raise ValueError("weight vector does not match the number of SUs")
    return float(wed_batch(y, w))


def jacobi_eigvalsh(a: np.ndarray, tol: float = JACOBI_TOL) -> np.ndarray:
    """Eigenvalues of Hermitian matrices (..., n, n) by cyclic Jacobi sweeps.

    Pairs are visited in fixed row order.  A matrix stops rotating once its
    off-diagonal Frobenius norm is below ``tol`` times its full norm, so each
    result depends only on that matrix and never on what it is batched with.
    Returns eigenvalues in ascending order.
    """
    a = np.array(a, dtype=complex, copy=True)
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape(-1, n, n)
    if n == 1:
        return a[:, 0, 0].real.reshape(batch_shape + (1,)).copy()
    fro = np.sqrt((np.abs(a) ** 2).sum(axis=(1, 2)))
    thresh = tol * fro
    iu = np.triu_indices(n, 1)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * (np.abs(a[:, iu[0], iu[1]]) ** 2).sum(axis=1))
        active = off > thresh
        if not active.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                rot = active & (mag > 0.0)
                if not rot.any():
                    continue
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                safe = np.where(rot, mag, 1.0)
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ph = np.where(rot, apq / safe, 1.0)
                c = np.where(rot, c, 1.0)
                s = np.where(rot, s, 0.0)
                # U on columns (p, q): [[c, s], [-s conj(ph), c conj(ph)]]
                cp = a[:, :, p].copy()
                cq = a[:, :, q].copy()
                phc = np.conj(ph)
                a[:, :, p] = c[:, None] * cp - (s * phc)[:, None] * cq
                a[:, :, q] = s[:, None] * cp + (c * phc)[:, None] * cq
                rp = a[:, p, :].copy()
                rq = a[:, q, :].copy()
                a[:, p, :] = c[:, None] * rp - (s * ph)[:, None] * rq
                a[:, q, :] = s[:, None] * rp + (c * ph)[:, None] * rq
                a[rot, p, q] = 0.0
                a[rot, q, p] = 0.0
    else:
        off = np.sqrt(2.0 * (np.abs(a[:, iu[0], iu[1]]) ** 2).sum(axis=1))
        if np.any(off > thresh):
            worst = int(np.argmax(off / np.where(fro > 0, fro, 1.0)))
            raise EigenConvergenceError(
                f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps; "
                f"relative off-diagonal norm {off[worst] / fro[worst]:.3e} "
                f"(diagonal {np.real(np.diagonal(a[worst])).tolist()})"
            )
    ev = np.sort(np.real(np.diagonal(a, axis1=1, axis2=2)), axis=1)
    return ev.reshape(batch_shape + (n,))


def wevd_batch(y: np.ndarray, w) -> np.ndarray:
    """lambda_max(Z Z^H / K) with Z = W^(1/2) Y, for stacked blocks."""
    if y.shape[-2] == 1:
        # 1 x 1 Gram matrix: identical arithmetic to the energy statistic.
        return wed_batch(y, w)
    K = y.shape[-1]
    z = np.sqrt(np.asarray(w, dtype=float))[..., :, None] * y
    gram = z @ np.conj(np.swapaxes(z, -1, -2)) / K
    return jacobi_eigvalsh(gram)[..., -1]


def wevd_statistic(block, w) -> float:
    y = _as_array(block)
    if np.shape(w)[-1] != y.shape[0]:
        raise ValueError("weight vector does not match the number of SUs")
    return float(max(wevd_batch(y, w), 0.0))


def decide(lam: float, tau: float) -> bool:
    """True (declare H1) iff the statistic strictly exceeds the threshold."""
    return lam > tau
