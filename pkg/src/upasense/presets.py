"""Named experiments: each runs a family of ROCs or heatmaps and writes CSVs with sidecars."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .config import parse_config
from .gammasum import SeriesConvergenceError
from .heatmap import lobe_footprint, snr_heatmap
from .io import write_heatmap_csv, write_roc_csv
from .mc import MobilityPlan, analytic_roc, mobility_roc, roc
from .scenario import Scenario

__all__ = [
    "PRESET_NAMES",
    "BASE_OVERRIDES",
    "MU_SWEEP",
    "HEATMAP_GRID",
    "Preset",
    "preset_scenario",
    "run_preset",
    "heatmap_files",
]

PRESET_NAMES = ("static-compare", "user-count", "mobility", "aperture", "heatmap")

# Signal-power backoff puts the strongest default SU near -10 dB SNR, where ROCs
# are informative; the deterministic channel makes the analytic overlays exact.
BASE_OVERRIDES = {"radio.sigma_s2_db": -21.0, "fading.model": "deterministic"}
PRESET_OVERRIDES = {"mobility": {"fading.model": "rician"}}

MU_SWEEP = (1.0, 10.0, 30.0)
HEATMAP_GRID = {"x_range": (-400.0, 400.0), "y_range": (-400.0, 400.0), "z": 1.5, "nx": 161, "ny": 161}
DETECTORS = ("wed", "wevd")

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Preset:
    name: str
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PRESET_NAMES:
            raise ValueError(f"unknown preset {self.name!r}; choose from {', '.join(PRESET_NAMES)}")


def preset_scenario(preset: Preset, config_text: str = "", **extra) -> Scenario:
    """Base scenario of ``preset``; ``extra`` maps ``section.key`` to a value."""
    ov = dict(BASE_OVERRIDES)
    ov.update(PRESET_OVERRIDES.get(preset.name, {}))
    ov.update(preset.overrides)
    ov.update(extra)
    return parse_config(config_text, ov)


def _roc_pair(out: Path, stem: str, s: Scenario, kind: str, weighting: str, trials: int,
              workers: int, n_points: int, overlay: bool) -> list[Path]:
    mc = roc(s, kind, n_points=n_points, trials=trials, weighting=weighting, workers=workers)
    an = None
    if overlay:
        try:
            an = analytic_roc(s, kind, taus=mc.taus, weighting=weighting)
        except SeriesConvergenceError as exc:
            # Reported in the sidecar rather than replaced by a truncated curve.
            log.warning("%s: analytic overlay skipped: %s", stem, exc)
            mc.meta["analytic_overlay"] = f"unavailable ({exc})"
    files = [write_roc_csv(out / f"{stem}_mc.csv", mc)]
    if an is not None:
        an.meta["overlay_of"] = files[0].name
        files.append(write_roc_csv(out / f"{stem}_analytic.csv", an))
    return files


def heatmap_files(out: Path, s: Scenario, name: str) -> Path:
    hm = snr_heatmap(s, **HEATMAP_GRID)
    meta = {
        "kind": "snr_heatmap",
        "scenario": s.digest(),
        "L": s.geometry.L,
        "z": hm.z,
        "nx": hm.xs.size,
        "ny": hm.ys.size,
        "footprint_3db_m2": lobe_footprint(hm),
    }
    return write_heatmap_csv(out / name, hm.xs, hm.ys, hm.db, meta)


def run_preset(preset: Preset | str, out_dir, trials: int = 20000, workers: int = 1,
               n_points: int = 21, config_text: str = "") -> list[Path]:
    """Run one named experiment into ``out_dir``; returns the CSV paths written."""
    if isinstance(preset, str):
        preset = Preset(preset)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = preset_scenario(preset, config_text)
    files: list[Path] = []
    args = dict(trials=trials, workers=workers, n_points=n_points)

    if preset.name == "static-compare":
        for kind in DETECTORS:
            for weighting in ("paper", "uniform"):
                files += _roc_pair(out, f"roc_{kind}_{weighting}", base, kind, weighting,
                                   overlay=True, **args)
    elif preset.name == "user-count":
        for M in (5, 10):
            s = preset_scenario(preset, config_text, **{"sus.M": M})
            for kind in DETECTORS:
                files += _roc_pair(out, f"roc_{kind}_M{M}", s, kind, "paper", overlay=True, **args)
    elif preset.name == "mobility":
        for mu in MU_SWEEP:
            for kind in DETECTORS:
                c = mobility_roc(base, MobilityPlan(mu), kind, trials=trials, workers=workers,
                                 n_points=n_points)
                files.append(write_roc_csv(out / f"roc_{kind}_mu{mu:g}_mc.csv", c))
    elif preset.name == "aperture":
        for L in (64, 128):
            s = preset_scenario(preset, config_text, **{"array.L": L})
            for kind in DETECTORS:
                files += _roc_pair(out, f"roc_{kind}_L{L}", s, kind, "paper", overlay=True, **args)
            files.append(heatmap_files(out, s, f"heatmap_L{L}.csv"))
    else:
        files.append(heatmap_files(out, base, f"heatmap_L{base.geometry.L}.csv"))
    return files
