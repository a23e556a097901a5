"""Seeded Monte Carlo estimation of detection rates, ROC curves and mobility runs.

Random numbers are drawn in fixed-size chunks of trials.  Each chunk owns
independent streams derived from (seed, chunk index, purpose), so trial i sees
the same data however the chunks are spread over workers, and detectors or
weighting schemes evaluated with the same seed share their samples.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import AnalyticDetector
from .detectors import DetectorKind, synth_batch, wed_batch, wevd_batch
from .link import draw_fading, weights as fusion_weights
from .scenario import Scenario, deterministic_amplitudes

log = logging.getLogger(__name__)

__all__ = [
    "TRIAL_CHUNK",
    "RocCurve",
    "RateEstimate",
    "MobilityPlan",
    "simulate_statistics",
    "estimate_rates",
    "roc",
    "mobility_roc",
    "mobility_roc_per_instant",
    "analytic_roc",
    "pd_at_pf",
]

TRIAL_CHUNK = 1000
MIN_TRIALS = 100
Z95 = 1.959963984540054
WEIGHTINGS = ("paper", "uniform")

_TAG_FADING = 1
_TAG_STALE = 2
_TAG_H0 = 3
_TAG_H1 = 4


def _rng(seed: int, chunk: int, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(chunk), int(tag)))
    return np.random.Generator(np.random.PCG64(ss))


def ci_radius(p, n: int):
    p = np.asarray(p, dtype=float)
    return Z95 * np.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True)
class MobilityPlan:
    """Weight refresh interval ``mu``; sensing windows every ``detect_every`` over ``horizon``."""

    mu: float | None
    horizon: float = 60.0
    detect_every: float = 1.0

    def __post_init__(self):
        if self.mu is not None and not self.mu > 0.0:
            raise ValueError("mu must be positive")
        if not (self.detect_every > 0.0 and self.horizon >= self.detect_every):
            raise ValueError("need horizon >= detect_every > 0")

    def instants(self) -> np.ndarray:
        n = int(math.floor(self.horizon / self.detect_every + 1e-9))
        return np.arange(n) * self.detect_every

    def update_time(self, t: float) -> float:
        if self.mu is None:
            return t
        return math.floor(t / self.mu + 1e-9) * self.mu


@dataclass
class RateEstimate:
    taus: np.ndarray
    pf: np.ndarray
    pd: np.ndarray
    pf_ci: np.ndarray
    pd_ci: np.ndarray
    trials: int


@dataclass
class RocCurve:
    """ROC points ordered by descending threshold (so ``pf`` is nondecreasing)."""

    taus: np.ndarray
    pf: np.ndarray
    pd: np.ndarray
    pf_ci: np.ndarray
    pd_ci: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        order = np.argsort(-np.asarray(self.taus), kind="stable")
        for name in ("taus", "pf", "pd", "pf_ci", "pd_ci"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float)[order])

    def __len__(self) -> int:
        return int(self.taus.size)


@dataclass
class _Context:
    """Per-trial schedule: which instant a trial senses and which weights it uses."""

    kind: DetectorKind
    weighting: str
    alpha_now: np.ndarray     # (N, M) deterministic amplitudes at each sensing instant
    alpha_upd: np.ndarray     # (N, M) deterministic amplitudes at each instant's update time
    same_instant: np.ndarray  # (N,) update time equals sensing time
    scenario: Scenario

    @property
    def n_instants(self) -> int:
        return self.alpha_now.shape[0]


def _context(scenario: Scenario, kind, weighting: str, plan: MobilityPlan | None,
             times=None) -> _Context:
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    if times is None:
        times = np.array([0.0]) if plan is None else plan.instants()
    times = np.asarray(times, dtype=float)
    now = np.array([deterministic_amplitudes(scenario, float(t)) for t in times])
    upd_t = times if plan is None else np.array([plan.update_time(float(t)) for t in times])
    upd = np.array([deterministic_amplitudes(scenario, float(t)) for t in upd_t])
    return _Context(DetectorKind(kind), weighting, now, upd, np.isclose(upd_t, times, rtol=0, atol=1e-9),
                    scenario)


def _simulate_chunk(ctx: _Context, seed: int, chunk: int, start: int, n: int):
    sc = ctx.scenario
    radio = sc.radio
    M = sc.M
    idx = (start + np.arange(n)) % ctx.n_instants
    h = draw_fading(sc.fading, _rng(seed, chunk, _TAG_FADING), size=(n, M))
    h_stale = draw_fading(sc.fading, _rng(seed, chunk, _TAG_STALE), size=(n, M))
    alpha = ctx.alpha_now[idx] * h
    if ctx.weighting == "uniform":
        w = np.full((n, M), 1.0 / M)
    else:
        if sc.fading.weights_from == "deterministic":
            a_w = ctx.alpha_upd[idx]
        else:
            same = ctx.same_instant[idx][:, None]
            a_w = np.where(same, ctx.alpha_upd[idx] * h, ctx.alpha_upd[idx] * h_stale)
        w = fusion_weights(a_w)
    y0 = synth_batch("H0", alpha, radio.sigma_s2, radio.sigma_n2, radio.K, _rng(seed, chunk, _TAG_H0), n)
    y1 = synth_batch("H1", alpha, radio.sigma_s2, radio.sigma_n2, radio.K, _rng(seed, chunk, _TAG_H1), n)
    stat = wed_batch if ctx.kind is DetectorKind.WED else wevd_batch
    # One batched call for both hypotheses; each block's value does not depend on its neighbours.
    both = stat(np.concatenate([y0, y1]), np.concatenate([w, w]))
    return both[:n], both[n:]


def _run(ctx: _Context, trials: int, seed: int, workers: int):
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    chunks = [(c, c * TRIAL_CHUNK, min(TRIAL_CHUNK, trials - c * TRIAL_CHUNK))
              for c in range(math.ceil(trials / TRIAL_CHUNK))]

    def job(spec):
        c, start, n = spec
        return _simulate_chunk(ctx, seed, c, start, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    s0 = np.concatenate([p[0] for p in parts])
    s1 = np.concatenate([p[1] for p in parts])
    return s0, s1


def simulate_statistics(scenario: Scenario, kind, trials: int, seed: int | None = None,
                        weighting: str = "paper", plan: MobilityPlan | None = None,
                        workers: int = 1):
    """Test statistics under H0 and H1 for ``trials`` sensing windows."""
    seed = scenario.seed if seed is None else seed
    ctx = _context(scenario, kind, weighting, plan)
    return _run(ctx, trials, seed, workers)


def _rates(s0: np.ndarray, s1: np.ndarray, taus) -> RateEstimate:
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0.0):
        raise ValueError("thresholds must be nonnegative")
    n = s0.size
    # Exceedance counts for every threshold from one sorted copy of each sample.
    c0 = n - np.searchsorted(np.sort(s0), taus, side="right")
    c1 = n - np.searchsorted(np.sort(s1), taus, side="right")
    pf = c0 / n
    pd = c1 / n
    return RateEstimate(taus, pf, pd, ci_radius(pf, n), ci_radius(pd, n), n)


def estimate_rates(scenario: Scenario, kind, taus, trials: int, seed: int | None = None,
                   weighting: str = "paper", plan: MobilityPlan | None = None,
                   workers: int = 1) -> RateEstimate:
    """Empirical Pf and Pd at each threshold, all from one shared set of trials."""
    s0, s1 = simulate_statistics(scenario, kind, trials, seed, weighting, plan, workers)
    return _rates(s0, s1, taus)


def _fixed_weights(scenario: Scenario, weighting: str, ctx: _Context) -> np.ndarray | None:
    """The single weight vector every trial uses, or None if weights vary."""
    M = scenario.M
    if weighting == "uniform":
        return np.full(M, 1.0 / M)
    if scenario.fading.random_weights:
        return None
    w = fusion_weights(ctx.alpha_upd)
    if not np.all(w == w[0]):
        return None
    return w[0]


def _analytic_for(scenario: Scenario, kind, w: np.ndarray, alphas=None, mode: str = "eigen"):
    r = scenario.radio
    return AnalyticDetector(DetectorKind(kind), w, alphas, r.sigma_s2, r.sigma_n2, r.K, mode=mode)


def _target_pfs(n_points: int, lo: float = 0.01, hi: float = 0.99) -> np.ndarray:
    if n_points < 2:
        raise ValueError("an ROC needs at least two points")
    return np.linspace(lo, hi, n_points)


def _tau_grid(scenario: Scenario, kind, weighting: str, ctx: _Context, n_points: int,
              s0: np.ndarray) -> tuple[np.ndarray, str]:
    targets = _target_pfs(n_points)
    w = _fixed_weights(scenario, weighting, ctx)
    if w is not None:
        try:
            det = _analytic_for(scenario, kind, w)
            return np.array([det.tau_for_pf(float(p)) for p in targets]), "analytic"
        except (ArithmeticError, ValueError) as exc:
            log.warning("analytic threshold grid unavailable (%s); using H0 quantiles", exc)
    return np.quantile(s0, 1.0 - targets), "empirical"


def _curve(scenario, kind, weighting, plan, n_points, trials, seed, workers, extra=None,
           times=None):
    seed = scenario.seed if seed is None else seed
    ctx = _context(scenario, kind, weighting, plan, times)
    s0, s1 = _run(ctx, trials, seed, workers)
    taus, grid = _tau_grid(scenario, kind, weighting, ctx, n_points, s0)
    est = _rates(s0, s1, taus)
    meta = {
        "source": "montecarlo",
        "detector": DetectorKind(kind).value,
        "weights": weighting,
        "trials": trials,
        "seed": seed,
        "scenario": scenario.digest(),
        "tau_grid": grid,
        "M": scenario.M,
        "L": scenario.geometry.L,
    }
    meta.update(extra or {})
    return RocCurve(est.taus, est.pf, est.pd, est.pf_ci, est.pd_ci, meta)


def roc(scenario: Scenario, kind, n_points: int = 21, trials: int = 10000, seed: int | None = None,
        weighting: str = "paper", workers: int = 1) -> RocCurve:
    """Monte Carlo ROC of the SUs at their starting positions."""
    return _curve(scenario, kind, weighting, None, n_points, trials, seed, workers)


def _plan_meta(plan: MobilityPlan) -> dict:
    return {"mu": "fresh" if plan.mu is None else plan.mu, "horizon": plan.horizon,
            "detect_every": plan.detect_every}


def mobility_roc(scenario: Scenario, plan: MobilityPlan, kind, trials: int = 10000,
                 seed: int | None = None, weighting: str = "paper", n_points: int = 21,
                 workers: int = 1) -> RocCurve:
    """ROC pooled over sensing instants, with weights refreshed every ``plan.mu`` seconds.

    Trial i senses at instant i mod T, so every instant gets the same share of
    trials; thresholds are common to all instants.
    """
    extra = dict(_plan_meta(plan), averaging="pooled")
    return _curve(scenario, kind, weighting, plan, n_points, trials, seed, workers, extra)


def mobility_roc_per_instant(scenario: Scenario, plan: MobilityPlan, kind, trials: int = 10000,
                             seed: int | None = None, weighting: str = "paper",
                             n_points: int = 21, workers: int = 1) -> dict:
    """One ROC per sensing instant {t: RocCurve}; each uses ``trials`` trials and its own grid."""
    out = {}
    for t in plan.instants():
        extra = dict(_plan_meta(plan), averaging="per-instant", t=float(t))
        out[float(t)] = _curve(scenario, kind, weighting, plan, n_points, trials, seed, workers,
                               extra, times=[t])
    return out


def analytic_roc(scenario: Scenario, kind, taus=None, n_points: int = 21, weighting: str = "paper",
                 mode: str = "eigen") -> RocCurve:
    """Closed-form ROC at the deterministic-channel (|h| = 1) link state."""
    alphas = deterministic_amplitudes(scenario, 0.0)
    M = scenario.M
    w = np.full(M, 1.0 / M) if weighting == "uniform" else fusion_weights(alphas)
    det = _analytic_for(scenario, kind, w, alphas, mode)
    if taus is None:
        taus = [det.tau_for_pf(float(p)) for p in _target_pfs(n_points)]
    taus = np.asarray(taus, dtype=float)
    pf = np.array([det.pf(float(t)) for t in taus])
    pd = np.array([det.pd(float(t)) for t in taus])
    zeros = np.zeros_like(taus)
    meta = {
        "source": "analytic",
        "detector": DetectorKind(kind).value,
        "weights": weighting,
        "trials": 0,
        "seed": scenario.seed,
        "scenario": scenario.digest(),
        "channel": "deterministic",
        "pd_mode": mode if DetectorKind(kind) is DetectorKind.WEVD else "series",
        "M": M,
        "L": scenario.geometry.L,
    }
    return RocCurve(taus, pf, pd, zeros, zeros, meta)


def pd_at_pf(curve: RocCurve, target_pf: float) -> float:
    """Pd linearly interpolated at ``target_pf`` along the curve."""
    pf, pd = curve.pf, curve.pd
    if not (pf.min() <= target_pf <= pf.max()):
        raise ValueError(f"Pf={target_pf} outside the curve's range [{pf.min()}, {pf.max()}]")
    return float(np.interp(target_pf, pf, pd))
