"""Link budget: per-user amplitude, SNR, fading draws and fusion weights."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .radiation import C_LIGHT, RadioParams

__all__ = [
    "FadingConfig",
    "LinkState",
    "DegenerateScenarioError",
    "path_amplitude",
    "draw_fading",
    "weights",
    "snr",
    "link_state",
]

FADING_MODELS = ("deterministic", "rician")
WEIGHT_SOURCES = ("realized", "deterministic")


class DegenerateScenarioError(ValueError):
    """No secondary user receives any signal."""


@dataclass(frozen=True)
class FadingConfig:
    """Quasi-static channel model; one draw per sensing window.

    ``weights_from`` selects whether fusion weights see the realized channel
    (``"realized"``) or only its deterministic part.
    """

    model: str = "rician"
    rician_k: float = 10.0
    weights_from: str = "realized"

    def __post_init__(self):
        if self.model not in FADING_MODELS:
            raise ValueError(f"fading model must be one of {FADING_MODELS}, got {self.model!r}")
        if not self.rician_k >= 0.0:
            raise ValueError(f"Rician K-factor must be >= 0, got {self.rician_k}")
        if self.weights_from not in WEIGHT_SOURCES:
            raise ValueError(f"weights_from must be one of {WEIGHT_SOURCES}")

    @property
    def random_weights(self) -> bool:
        """True when the fusion weights change from one sensing window to the next."""
        return self.model == "rician" and self.weights_from == "realized"


@dataclass(frozen=True)
class LinkState:
    alpha: np.ndarray
    gamma: np.ndarray
    weight: np.ndarray


def path_amplitude(radio: RadioParams, af, ef, r, h=1.0):
    """alpha = sqrt(p G c^2 |af ef|^2 / (4 pi fc r)^2) * h.  Broadcasts."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("range must be positive (singular range)")
    mag = np.sqrt(radio.p * radio.G) * C_LIGHT * np.abs(np.asarray(af) * np.asarray(ef)) / (
        4.0 * math.pi * radio.fc * r
    )
    out = mag * np.asarray(h, dtype=complex)
    return complex(out) if out.ndim == 0 else out


def draw_fading(cfg: FadingConfig, rng: np.random.Generator | None, size=None):
    """Channel gain h with E|h|^2 = 1; deterministic channels give exactly 1."""
    if cfg.rician_k < 0.0:
        raise ValueError("negative Rician K-factor")
    if cfg.model == "deterministic":
        return 1.0 + 0j if size is None else np.ones(size, dtype=complex)
    if math.isinf(cfg.rician_k):
        return 1.0 + 0j if size is None else np.ones(size, dtype=complex)
    k = cfg.rician_k
    g = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)
    return math.sqrt(k / (k + 1.0)) + math.sqrt(1.0 / (k + 1.0)) * g


def weights(alphas) -> np.ndarray:
    """w_m = |alpha_m|^2 / sum_i |alpha_i|^2 along the last axis."""
    p = np.abs(np.asarray(alphas)) ** 2
    tot = p.sum(axis=-1, keepdims=True)
    if np.any(tot <= 0.0):
        raise DegenerateScenarioError("all amplitudes are zero: no SU receives signal")
    return p / tot


def snr(alphas, radio: RadioParams) -> np.ndarray:
    return np.abs(np.asarray(alphas)) ** 2 * radio.sigma_s2 / radio.sigma_n2


def link_state(alphas, radio: RadioParams) -> LinkState:
    a = np.asarray(alphas, dtype=complex)
    return LinkState(alpha=a, gamma=snr(a, radio), weight=weights(a))
