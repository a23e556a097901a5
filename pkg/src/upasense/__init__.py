"""Weighted cooperative spectrum sensing with a multi-beam uniform planar array.

Amplitudes come from the array factor and a Friis link budget; the weighted
energy (WED) and largest-eigenvalue (WEVD) detectors are evaluated in closed
form and by seeded Monte Carlo.
"""

from .analytic import AnalyticDetector, invert_threshold, wed_pd, wed_pf, wevd_pd, wevd_pf
from .config import ConfigError, emit_config, load_config, parse_config
from .detectors import DetectorKind, Hypothesis, SampleBlock, synth_block, wed_statistic, wevd_statistic
from .gammasum import SeriesControl, SeriesConvergenceError
from .geometry import Point3, Trajectory, position_at
from .heatmap import lobe_footprint, snr_heatmap
from .link import FadingConfig, LinkState, link_state, weights
from .mc import MobilityPlan, RocCurve, analytic_roc, estimate_rates, mobility_roc, roc
from .presets import Preset, run_preset
from .radiation import ArrayGeometry, BeamSet, RadioParams, array_factor, element_factor
from .scenario import Scenario, angles_to

__version__ = "0.1.0"

__all__ = [
    "AnalyticDetector", "invert_threshold", "wed_pd", "wed_pf", "wevd_pd", "wevd_pf",
    "ConfigError", "emit_config", "load_config", "parse_config",
    "DetectorKind", "Hypothesis", "SampleBlock", "synth_block", "wed_statistic", "wevd_statistic",
    "SeriesControl", "SeriesConvergenceError",
    "Point3", "Trajectory", "position_at",
    "lobe_footprint", "snr_heatmap",
    "FadingConfig", "LinkState", "link_state", "weights",
    "MobilityPlan", "RocCurve", "analytic_roc", "estimate_rates", "mobility_roc", "roc",
    "Preset", "run_preset",
    "ArrayGeometry", "BeamSet", "RadioParams", "array_factor", "element_factor",
    "Scenario", "angles_to",
]
