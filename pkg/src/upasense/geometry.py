"""World geometry: points, piecewise-linear trajectories and array-frame angles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = ["Point3", "Trajectory", "array_frame", "angles_to", "angles_grid", "position_at"]


@dataclass(frozen=True)
class Point3:
    """A point in the ground frame (meters, z up)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate in {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def of(cls, seq: Sequence[float]) -> "Point3":
        x, y, z = (float(v) for v in seq)
        return cls(x, y, z)


@dataclass(frozen=True)
class Trajectory:
    """Polyline path traversed at constant speed; a single waypoint is a static user."""

    waypoints: tuple
    speed: float = 0.0

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise ValueError("a trajectory needs at least one waypoint")
        if not self.speed >= 0.0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")

    @classmethod
    def static(cls, p: Point3) -> "Trajectory":
        return cls((p,), 0.0)

    @property
    def start(self) -> Point3:
        return self.waypoints[0]

    @property
    def is_static(self) -> bool:
        return len(self.waypoints) == 1 or self.speed == 0.0

    def length(self) -> float:
        pts = [p.as_array() for p in self.waypoints]
        return float(sum(np.linalg.norm(b - a) for a, b in zip(pts, pts[1:])))


def position_at(traj: Trajectory, t: float) -> Point3:
    """Point reached after travelling ``speed * t`` meters along the polyline."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if traj.is_static:
        return traj.start
    remaining = traj.speed * t
    pts = traj.waypoints
    for a, b in zip(pts, pts[1:]):
        va, vb = a.as_array(), b.as_array()
        seg = float(np.linalg.norm(vb - va))
        if remaining <= seg:
            if seg == 0.0:
                return a
            return Point3.of(va + (vb - va) * (remaining / seg))
        remaining -= seg
    return pts[-1]


def array_frame(boresight: Sequence[float]) -> np.ndarray:
    """Rows are the array's local x, y, z axes expressed in the ground frame.

    Local z is the boresight.  Local x is the ground x-axis projected onto the
    array plane (ground y when boresight is along ground x).
    """
    z = np.asarray(boresight, dtype=float)
    norm = np.linalg.norm(z)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("boresight must be a finite nonzero vector")
    z = z / norm
    ref = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(ref, z)) > 1.0 - 1e-12:
        ref = np.array([0.0, 1.0, 0.0])
    x = ref - np.dot(ref, z) * z
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def _wrap_phi(phi):
    # atan2 returns (-pi, pi]; the convention here is [-pi, pi).
    return np.where(phi >= math.pi, phi - 2.0 * math.pi, phi)


def angles_to(origin: Point3, boresight: Sequence[float], target: Point3) -> tuple[float, float, float]:
    """(theta, phi, r) of ``target`` seen from an array at ``origin``.

    theta is the polar angle from boresight, phi the azimuth from the local
    x-axis in [-pi, pi), r the Euclidean range.  On-axis targets get phi = 0.
    """
    d = target.as_array() - origin.as_array()
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise ValueError("target coincides with the array position")
    local = array_frame(boresight) @ d
    theta = math.acos(max(-1.0, min(1.0, local[2] / r)))
    rho = math.hypot(local[0], local[1])
    if rho <= 1e-12 * r:
        return theta, 0.0, r
    phi = float(_wrap_phi(math.atan2(local[1], local[0])))
    return theta, phi, r


def angles_grid(origin: Point3, boresight: Sequence[float], pts: np.ndarray):
    """Vectorised :func:`angles_to` over an (..., 3) array; zero range gives NaN."""
    d = np.asarray(pts, dtype=float) - origin.as_array()
    local = d @ array_frame(boresight).T
    r = np.linalg.norm(d, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_t = np.clip(local[..., 2] / r, -1.0, 1.0)
        theta = np.arccos(cos_t)
        phi = _wrap_phi(np.arctan2(local[..., 1], local[..., 0]))
    bad = r == 0.0
    theta = np.where(bad, np.nan, theta)
    phi = np.where(bad, np.nan, phi)
    return theta, phi, r
