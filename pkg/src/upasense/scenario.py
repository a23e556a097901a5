"""Scenario: the full world description, and the amplitudes it implies."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Point3, Trajectory, angles_grid, angles_to as _angles_to, position_at
from .link import FadingConfig, path_amplitude
from .radiation import ArrayGeometry, BeamSet, RadioParams, array_factor, element_factor

__all__ = [
    "Scenario",
    "angles_to",
    "su_positions",
    "amplitudes_at_points",
    "deterministic_amplitudes",
    "beams_toward",
]


@dataclass(frozen=True)
class Scenario:
    array_origin: Point3
    geometry: ArrayGeometry
    beams: BeamSet
    radio: RadioParams
    sus: tuple
    fading: FadingConfig = field(default_factory=FadingConfig)
    seed: int = 1
    boresight: tuple = (0.0, 0.0, -1.0)

    def __post_init__(self):
        if len(self.sus) < 1:
            raise ValueError("a scenario needs at least one secondary user")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def M(self) -> int:
        return len(self.sus)

    @property
    def Q(self) -> int:
        return self.beams.Q

    @property
    def is_static(self) -> bool:
        return all(t.is_static for t in self.sus)

    def with_sus(self, sus) -> "Scenario":
        return replace(self, sus=tuple(sus))

    def digest(self) -> str:
        """Short stable hash of the scenario's canonical config text."""
        from .config import emit_config

        return hashlib.sha256(emit_config(self).encode()).hexdigest()[:16]


def angles_to(scenario: Scenario, target: Point3) -> tuple[float, float, float]:
    """(theta, phi, r) of ``target`` in the scenario's array frame."""
    return _angles_to(scenario.array_origin, scenario.boresight, target)


def beams_toward(origin: Point3, boresight, targets, a=None) -> BeamSet:
    """Beam set steered at the given primary-user positions."""
    th, ph = [], []
    for p in targets:
        t, f, _ = _angles_to(origin, boresight, p)
        th.append(t)
        ph.append(f)
    a = tuple(float(v) for v in a) if a is not None else tuple(1.0 for _ in th)
    return BeamSet(tuple(th), tuple(ph), a)


def su_positions(scenario: Scenario, t: float = 0.0) -> np.ndarray:
    return np.array([position_at(tr, t).as_array() for tr in scenario.sus])


def amplitudes_at_points(scenario: Scenario, pts: np.ndarray, h=1.0) -> np.ndarray:
    """alpha for receivers at ``pts`` (shape (..., 3)); NaN where range is zero."""
    th, ph, r = angles_grid(scenario.array_origin, scenario.boresight, pts)
    af = array_factor(scenario.geometry, scenario.beams, th, ph, scenario.radio.fc)
    ef = element_factor(th, ph, scenario.geometry.element)
    bad = ~(r > 0.0)
    out = path_amplitude(scenario.radio, np.where(bad, 0.0, af), np.where(bad, 0.0, ef),
                         np.where(bad, 1.0, r), h)
    out = np.asarray(out, dtype=complex)
    out[bad] = np.nan
    return out


def deterministic_amplitudes(scenario: Scenario, t: float = 0.0) -> np.ndarray:
    """alpha_m with |h_m| = 1 for every SU at time ``t``."""
    pts = su_positions(scenario, t)
    out = amplitudes_at_points(scenario, pts)
    if np.any(np.isnan(out)):
        raise ValueError("an SU coincides with the array position")
    return out
