"""CSV writers, key=value metadata sidecars and a schema linter for emitted files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .mc import RocCurve

__all__ = [
    "ROC_COLUMNS",
    "LintError",
    "write_roc_csv",
    "read_roc_csv",
    "write_heatmap_csv",
    "read_heatmap_csv",
    "write_sidecar",
    "read_sidecar",
    "sidecar_path",
    "lint_roc_csv",
    "lint_heatmap_csv",
    "lint_file",
]

ROC_COLUMNS = ("tau", "pf", "pf_ci", "pd", "pd_ci")


class LintError(ValueError):
    pass


def _fmt(v: float) -> str:
    # repr gives the shortest string that reads back to the same double.
    return repr(float(v))


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta")


def write_sidecar(path, meta: dict) -> Path:
    """``key=value`` lines, sorted by key, next to ``path``."""
    side = sidecar_path(path)
    with open(side, "w", encoding="utf-8", newline="\n") as fh:
        for k in sorted(meta):
            v = str(meta[k])
            if "\n" in v or "=" in str(k):
                raise ValueError(f"metadata entry {k!r} cannot be written as one key=value line")
            fh.write(f"{k}={v}\n")
    return side


def read_sidecar(path) -> dict:
    out = {}
    with open(sidecar_path(path), encoding="utf-8") as fh:
        for line in fh:
            k, _, v = line.rstrip("\n").partition("=")
            out[k] = v
    return out


def write_roc_csv(path, curve: RocCurve) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROC_COLUMNS)
        for row in zip(curve.taus, curve.pf, curve.pf_ci, curve.pd, curve.pd_ci):
            w.writerow([_fmt(v) for v in row])
    write_sidecar(path, curve.meta)
    return path


def read_roc_csv(path) -> RocCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = read_sidecar(path) if sidecar_path(path).exists() else {}
    return RocCurve(data[:, 0], data[:, 1], data[:, 3], data[:, 2], data[:, 4], meta)


def write_heatmap_csv(path, xs, ys, db, meta: dict) -> Path:
    """Header ``y\\x, x_0, x_1, ...``; then one row per y: ``y_v, db[0, v], db[1, v], ...``.

    ``db`` is indexed (x, y).  Invalid points are written as ``nan``.
    """
    path = Path(path)
    db = np.asarray(db, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y\\x"] + [_fmt(x) for x in xs])
        for v, y in enumerate(ys):
            w.writerow([_fmt(y)] + [_fmt(val) for val in db[:, v]])
    write_sidecar(path, meta)
    return path


def read_heatmap_csv(path):
    """(xs, ys, db) with db indexed (x, y)."""
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    xs = np.array([float(v) for v in rows[0][1:]])
    ys = np.array([float(r[0]) for r in rows[1:]])
    body = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return xs, ys, body.T


def _numeric_rows(path, header_check):
    text = Path(path).read_text(encoding="utf-8")
    if not text.endswith("\n"):
        raise LintError(f"{path}: last row is not newline-terminated")
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise LintError(f"{path}: empty file")
    header_check(rows[0])
    out = []
    for i, r in enumerate(rows[1:], start=2):
        try:
            out.append([float(v) for v in r])
        except ValueError:
            raise LintError(f"{path}: row {i} has a non-numeric field") from None
        if any(v != v.strip() for v in r):
            raise LintError(f"{path}: row {i} has padded fields")
    return rows[0], out


def lint_roc_csv(path) -> None:
    """Raise LintError unless ``path`` is a well-formed ROC CSV."""

    def header(h):
        if tuple(h) != ROC_COLUMNS:
            raise LintError(f"{path}: header {h} != {list(ROC_COLUMNS)}")

    _, rows = _numeric_rows(path, header)
    if len(rows) < 2:
        raise LintError(f"{path}: an ROC needs at least two points")
    a = np.array(rows)
    if a.shape[1] != len(ROC_COLUMNS) or not np.all(np.isfinite(a)):
        raise LintError(f"{path}: rows must hold {len(ROC_COLUMNS)} finite numbers")
    tau, pf, pf_ci, pd, pd_ci = a.T
    if np.any(tau < 0.0):
        raise LintError(f"{path}: negative threshold")
    for name, col in (("pf", pf), ("pd", pd)):
        if np.any(col < 0.0) or np.any(col > 1.0):
            raise LintError(f"{path}: {name} outside [0, 1]")
    for name, col in (("pf_ci", pf_ci), ("pd_ci", pd_ci)):
        if np.any(col < 0.0) or np.any(col > 1.0):
            raise LintError(f"{path}: {name} outside [0, 1]")
    if np.any(np.diff(tau) > 0.0):
        raise LintError(f"{path}: thresholds are not in descending order")
    if np.any(np.diff(pf) < 0.0):
        raise LintError(f"{path}: pf decreases along the curve")
    if not sidecar_path(path).exists():
        raise LintError(f"{path}: missing metadata sidecar")


def lint_heatmap_csv(path) -> None:
    def header(h):
        if not h or h[0] != "y\\x" or len(h) < 2:
            raise LintError(f"{path}: heatmap header must start with 'y\\x' and list x values")
        try:
            [float(v) for v in h[1:]]
        except ValueError:
            raise LintError(f"{path}: non-numeric x coordinate in header") from None

    h, rows = _numeric_rows(path, header)
    if not rows:
        raise LintError(f"{path}: no grid rows")
    for i, r in enumerate(rows, start=2):
        if len(r) != len(h):
            raise LintError(f"{path}: row {i} has {len(r)} fields, header has {len(h)}")
        if not math.isfinite(r[0]):
            raise LintError(f"{path}: row {i} has a non-finite y coordinate")
        # -inf marks an exact null of the pattern; +inf can never be right.
        if any(v == math.inf for v in r[1:]):
            raise LintError(f"{path}: row {i} has a +inf dB value")
    if not sidecar_path(path).exists():
        raise LintError(f"{path}: missing metadata sidecar")


def lint_file(path) -> None:
    """Lint any emitted CSV by sniffing its header."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if first.startswith("y\\x"):
        lint_heatmap_csv(path)
    else:
        lint_roc_csv(path)
