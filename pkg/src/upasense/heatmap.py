"""SNR maps over horizontal ground grids and their main-lobe footprint."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .scenario import Scenario, amplitudes_at_points

__all__ = ["Heatmap", "snr_heatmap", "lobe_footprint"]


@dataclass(frozen=True)
class Heatmap:
    """``db[u, v]`` is the SNR in dB at (xs[u], ys[v], z); NaN marks the array position."""

    xs: np.ndarray
    ys: np.ndarray
    z: float
    db: np.ndarray

    @property
    def cell_area(self) -> float:
        dx = self.xs[1] - self.xs[0] if self.xs.size > 1 else 1.0
        dy = self.ys[1] - self.ys[0] if self.ys.size > 1 else 1.0
        return float(abs(dx * dy))


def snr_heatmap(scenario: Scenario, x_range, y_range, z: float, nx: int, ny: int) -> Heatmap:
    """Deterministic-channel SNR, 10 log10(|alpha|^2 sigma_s2 / sigma_n2), on an nx x ny grid."""
    if nx < 1 or ny < 1:
        raise ValueError("grid sizes must be >= 1")
    xs = np.linspace(float(x_range[0]), float(x_range[1]), nx)
    ys = np.linspace(float(y_range[0]), float(y_range[1]), ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx, gy, np.full_like(gx, float(z))], axis=-1)
    alpha = amplitudes_at_points(scenario, pts)
    r = scenario.radio
    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10.0 * np.log10(np.abs(alpha) ** 2 * r.sigma_s2 / r.sigma_n2)
    return Heatmap(xs, ys, float(z), db)


def lobe_footprint(hm: Heatmap, drop_db: float = 3.0) -> float:
    """Ground area of the connected region around the peak within ``drop_db`` of it."""
    db = np.where(np.isnan(hm.db), -np.inf, hm.db)
    peak = np.unravel_index(np.argmax(db), db.shape)
    labels, _ = ndimage.label(db >= db[peak] - drop_db)
    return float((labels == labels[peak]).sum()) * hm.cell_area
