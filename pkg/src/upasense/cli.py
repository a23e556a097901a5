"""``sense`` command line: ROC, heatmap, preset and analytic runs that write CSV files."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .io import write_heatmap_csv, write_roc_csv
from .heatmap import lobe_footprint, snr_heatmap
from .mc import MobilityPlan, analytic_roc, mobility_roc, roc
from .presets import HEATMAP_GRID, PRESET_NAMES, Preset, run_preset


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(item, 0, "override must look like section.key=value")
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            raise ConfigError(key.strip(), 0, f"override value {raw!r} is not a JSON literal") from None
    return out


def _config_text(path) -> str:
    return Path(path).read_text(encoding="utf-8") if path else ""


def _scenario(args):
    return parse_config(_config_text(args.config), _overrides(args.set))


def _tau_grid(spec: str | None):
    """None (auto, 21 points), ``pf:N`` (N equispaced target Pf) or a comma list of thresholds."""
    if spec is None:
        return None, 21
    if spec.startswith("pf:"):
        return None, int(spec[3:])
    return [float(v) for v in spec.split(",") if v.strip()], 0


def cmd_roc(args) -> list[Path]:
    s = _scenario(args)
    kw = dict(trials=args.trials, seed=args.seed, weighting=args.weights, n_points=args.points,
              workers=args.workers)
    stem = f"roc_{args.detector}_{args.weights}"
    if args.mu is not None:
        plan = MobilityPlan(args.mu, horizon=args.horizon, detect_every=args.detect_every)
        curve = mobility_roc(s, plan, args.detector, **kw)
        stem += f"_mu{args.mu:g}"
    else:
        curve = roc(s, args.detector, **kw)
    return [write_roc_csv(args.out / f"{stem}_mc.csv", curve)]


def cmd_analytic(args) -> list[Path]:
    s = _scenario(args)
    taus, n = _tau_grid(args.tau_grid)
    curve = analytic_roc(s, args.detector, taus=taus, n_points=n or 21, weighting=args.weights,
                         mode=args.mode)
    return [write_roc_csv(args.out / f"roc_{args.detector}_{args.weights}_analytic.csv", curve)]


def cmd_heatmap(args) -> list[Path]:
    s = _scenario(args)
    hm = snr_heatmap(s, args.x_range, args.y_range, args.z, args.nx, args.ny)
    meta = {"kind": "snr_heatmap", "scenario": s.digest(), "L": s.geometry.L, "z": hm.z,
            "nx": args.nx, "ny": args.ny, "footprint_3db_m2": lobe_footprint(hm)}
    return [write_heatmap_csv(args.out / f"heatmap_L{s.geometry.L}.csv", hm.xs, hm.ys, hm.db, meta)]


def cmd_preset(args) -> list[Path]:
    preset = Preset(args.name, _overrides(args.set))
    return run_preset(preset, args.out, trials=args.trials, workers=args.workers,
                      n_points=args.points, config_text=_config_text(args.config))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sense", description=__doc__)
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="out"):
        sp.add_argument("--config", type=Path, help="scenario config file (defaults if omitted)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key, e.g. radio.sigma_s2_db=-21")
        sp.add_argument("--out", type=Path, default=Path(out_default), help="output directory")

    def mc_opts(sp):
        sp.add_argument("--trials", type=int, default=20000)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--points", type=int, default=21, help="ROC points")

    r = sub.add_parser("roc", help="Monte Carlo ROC")
    common(r)
    mc_opts(r)
    r.add_argument("--detector", choices=("wed", "wevd"), default="wed")
    r.add_argument("--weights", choices=("paper", "uniform"), default="paper")
    r.add_argument("--seed", type=int, default=None, help="defaults to the config seed")
    r.add_argument("--mu", type=float, default=None, help="weight refresh interval (mobility run)")
    r.add_argument("--horizon", type=float, default=60.0)
    r.add_argument("--detect-every", type=float, default=1.0)
    r.set_defaults(func=cmd_roc)

    a = sub.add_parser("analytic", help="closed-form ROC")
    common(a)
    a.add_argument("--detector", choices=("wed", "wevd"), default="wed")
    a.add_argument("--weights", choices=("paper", "uniform"), default="paper")
    a.add_argument("--mode", choices=("eigen", "paper"), default="eigen",
                   help="H1 scale model for the eigenvalue detector")
    a.add_argument("--tau-grid", default=None,
                   help="comma-separated thresholds, or pf:N for N equispaced false-alarm targets")
    a.set_defaults(func=cmd_analytic)

    h = sub.add_parser("heatmap", help="SNR heatmap")
    common(h)
    h.add_argument("--x-range", type=float, nargs=2, default=HEATMAP_GRID["x_range"])
    h.add_argument("--y-range", type=float, nargs=2, default=HEATMAP_GRID["y_range"])
    h.add_argument("--z", type=float, default=HEATMAP_GRID["z"])
    h.add_argument("--nx", type=int, default=HEATMAP_GRID["nx"])
    h.add_argument("--ny", type=int, default=HEATMAP_GRID["ny"])
    h.set_defaults(func=cmd_heatmap)

    pr = sub.add_parser("preset", help="named experiment")
    common(pr)
    mc_opts(pr)
    pr.add_argument("--name", choices=PRESET_NAMES, required=True)
    pr.set_defaults(func=cmd_preset)
    return p


def error_line(exc: BaseException) -> str:
    fields = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        fields.update(key=exc.key, line=exc.line)
    return "error " + json.dumps(fields, sort_keys=True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        files = args.func(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(error_line(exc), file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
