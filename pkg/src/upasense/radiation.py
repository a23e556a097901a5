"""Multi-beam uniform planar array: array factor and element patterns."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "C_LIGHT",
    "ArrayGeometry",
    "BeamSet",
    "RadioParams",
    "array_factor",
    "element_factor",
    "ELEMENT_PATTERNS",
    "square_factorization",
]

C_LIGHT = 299_792_458.0


def square_factorization(L: int) -> tuple[int, int]:
    """Most-square split L = Lx * Ly with both factors even and Lx >= Ly.

    >>> square_factorization(64), square_factorization(128)
    ((8, 8), (16, 8))
    """
    if L < 4 or L % 4:
        raise ValueError(f"L={L} cannot be split into two even factors")
    best = None
    for ly in range(2, int(math.isqrt(L)) + 1, 2):
        if L % ly == 0 and (L // ly) % 2 == 0:
            best = (L // ly, ly)
    if best is None:
        raise ValueError(f"L={L} has no even x even factorization")
    return best


@dataclass(frozen=True)
class ArrayGeometry:
    """Lx x Ly planar array with quadrant-symmetric real excitations.

    ``excitation[i][j]`` weights the four elements at (+-(2i+1) dx/2, +-(2j+1) dy/2).
    """

    Lx: int
    Ly: int
    dx: float
    dy: float
    excitation: tuple
    element: str = "isotropic"

    def __post_init__(self):
        if self.Lx <= 0 or self.Ly <= 0 or self.Lx % 2 or self.Ly % 2:
            raise ValueError(f"Lx, Ly must be even and positive, got {self.Lx}x{self.Ly}")
        if not (self.dx > 0.0 and self.dy > 0.0):
            raise ValueError("element spacings must be positive")
        e = np.asarray(self.excitation, dtype=float)
        if e.shape != (self.Lx // 2, self.Ly // 2):
            raise ValueError(f"excitation must be {self.Lx // 2}x{self.Ly // 2}, got {e.shape}")
        if not np.all(np.isfinite(e)) or np.any(e < 0.0):
            raise ValueError("excitations must be finite and nonnegative")
        if self.element not in ELEMENT_PATTERNS:
            raise ValueError(f"unknown element pattern {self.element!r}")

    @classmethod
    def uniform(cls, Lx: int, Ly: int, fc: float, dx: float | None = None, dy: float | None = None,
                element: str = "isotropic") -> "ArrayGeometry":
        half_wave = C_LIGHT / fc / 2.0
        ex = tuple(tuple(1.0 for _ in range(Ly // 2)) for _ in range(Lx // 2))
        return cls(Lx, Ly, dx or half_wave, dy or half_wave, ex, element)

    @property
    def L(self) -> int:
        return self.Lx * self.Ly

    @property
    def e(self) -> np.ndarray:
        return np.asarray(self.excitation, dtype=float)


@dataclass(frozen=True)
class BeamSet:
    """Steering directions (radians, array frame) and peak amplitude ratios."""

    theta: tuple
    phi: tuple
    a: tuple

    def __post_init__(self):
        if not (len(self.theta) == len(self.phi) == len(self.a)) or len(self.a) < 1:
            raise ValueError("beam theta, phi and a must have the same length >= 1")
        if not all(math.isfinite(v) for v in (*self.theta, *self.phi, *self.a)):
            raise ValueError("beam parameters must be finite")
        if any(v <= 0.0 for v in self.a):
            raise ValueError("peak amplitude ratios must be positive")

    @property
    def Q(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class RadioParams:
    """Link-level constants in linear SI units."""

    p: float
    G: float
    fc: float
    sigma_s2: float
    sigma_n2: float
    K: int

    def __post_init__(self):
        for name in ("p", "G", "fc", "sigma_s2", "sigma_n2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K!r}")

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.fc


def array_factor(geom: ArrayGeometry, beams: BeamSet, theta, phi, fc: float):
    """Real array factor AF(theta, phi) of the multi-beam array.

    Broadcasts over ``theta`` and ``phi``; returns a float for scalar input.
    """
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    u = np.sin(th) * np.cos(ph)
    v = np.sin(th) * np.sin(ph)
    odd_x = 2.0 * np.arange(1, geom.Lx // 2 + 1) - 1.0
    odd_y = 2.0 * np.arange(1, geom.Ly // 2 + 1) - 1.0
    kx = math.pi * geom.dx * fc / C_LIGHT
    ky = math.pi * geom.dy * fc / C_LIGHT
    e = geom.e
    total = np.zeros(np.broadcast(u, v).shape)
    for t_l, p_l, a_l in zip(beams.theta, beams.phi, beams.a):
        b1 = (u - math.sin(t_l) * math.cos(p_l)) * kx
        b2 = (v - math.sin(t_l) * math.sin(p_l)) * ky
        cx = np.cos(b1[..., None] * odd_x)
        cy = np.cos(b2[..., None] * odd_y)
        total = total + a_l * 4.0 * np.einsum("...i,ij,...j->...", cx, e, cy)
    if total.ndim == 0:
        return float(total)
    return total


def _isotropic(theta, phi):
    return np.ones(np.broadcast(np.asarray(theta), np.asarray(phi)).shape)


def _cosine(theta, phi):
    th = np.asarray(theta, dtype=float)
    return np.broadcast_to(np.where(th <= math.pi / 2, np.cos(th), 0.0),
                           np.broadcast(th, np.asarray(phi)).shape).copy()


ELEMENT_PATTERNS: dict[str, Callable] = {"isotropic": _isotropic, "cosine": _cosine}


def element_factor(theta, phi, pattern: str | Callable = "isotropic"):
    """Element radiation amplitude; isotropic elements give 1 everywhere."""
    fn = ELEMENT_PATTERNS[pattern] if isinstance(pattern, str) else pattern
    out = fn(theta, phi)
    if np.ndim(out) == 0:
        return float(out)
    return out
