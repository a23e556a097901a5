"""Scenario config files: a small ``key = value`` format with ``[section]`` headers.

Values are JSON literals (numbers, strings, lists, true/false).  Keys may be
written as ``section.key`` or under a ``[section]`` header; ``#`` starts a
comment.  Example::

    seed = 7
    [radio]
    sigma_s2_db = -21
    K = 100
    [sus]
    M = 5

Power-like keys accept dB forms (``p_dbm``, ``G_db``, ``noise_dbm``,
``sigma_s2_db``); they are converted to linear SI once, here.
"""

from __future__ import annotations

import json
import math
import re

from .geometry import Point3, Trajectory
from .link import FadingConfig
from .radiation import C_LIGHT, ELEMENT_PATTERNS, ArrayGeometry, BeamSet, RadioParams, square_factorization
from .scenario import Scenario, beams_toward

__all__ = [
    "ConfigError",
    "DEFAULT_PU_POSITIONS",
    "DEFAULT_SU_ROUTES",
    "parse_config",
    "emit_config",
    "load_config",
    "default_scenario",
]

# Primary users around the array footprint (array at the origin, 60 m up).
DEFAULT_PU_POSITIONS = (
    (150.0, 40.0, 1.5),
    (-120.0, 90.0, 1.5),
    (60.0, -200.0, 1.5),
    (-250.0, -60.0, 1.5),
    (300.0, 250.0, 1.5),
)


def _default_routes():
    # Two perpendicular roads: A along y = 2000 heading +x, B along x = 2000
    # heading +y.  Users alternate A0, B0, A1, B1, ... so any prefix mixes both.
    routes = []
    for k in range(5):
        routes.append(((100.0 * k, 2000.0, 1.5), (100.0 * k + 3000.0, 2000.0, 1.5)))
        routes.append(((2000.0, -2000.0 + 100.0 * k, 1.5), (2000.0, 1000.0 + 100.0 * k, 1.5)))
    return tuple(routes)


DEFAULT_SU_ROUTES = _default_routes()
DEFAULT_SPEED = 10.0

DEFAULTS = {
    "seed": 1,
    "array.x": 0.0,
    "array.y": 0.0,
    "array.height": 60.0,
    "array.boresight": [0.0, 0.0, -1.0],
    "array.L": 64,
    "array.element": "isotropic",
    "beams.pu_positions": [list(p) for p in DEFAULT_PU_POSITIONS],
    "radio.p_dbm": 26.98,
    "radio.G_db": 5.0,
    "radio.fc": 5.2e9,
    "radio.noise_dbm": -60.0,
    "radio.sigma_s2": 1.0,
    "radio.K": 100,
    "fading.model": "rician",
    "fading.rician_k": 10.0,
    "fading.weights_from": "realized",
    "sus.waypoints": [[list(p) for p in r] for r in DEFAULT_SU_ROUTES],
    "sus.speed": DEFAULT_SPEED,
}

INT, FLOAT, STR, POINT, LIST = "int", "float", "str", "point", "list"

SCHEMA = {
    "seed": INT,
    "array.x": FLOAT,
    "array.y": FLOAT,
    "array.height": FLOAT,
    "array.boresight": POINT,
    "array.L": INT,
    "array.Lx": INT,
    "array.Ly": INT,
    "array.dx": FLOAT,
    "array.dy": FLOAT,
    "array.excitation": LIST,
    "array.element": STR,
    "beams.pu_positions": LIST,
    "beams.theta": LIST,
    "beams.phi": LIST,
    "beams.a": LIST,
    "radio.p_dbm": FLOAT,
    "radio.p_w": FLOAT,
    "radio.G_db": FLOAT,
    "radio.G": FLOAT,
    "radio.fc": FLOAT,
    "radio.noise_dbm": FLOAT,
    "radio.sigma_n2": FLOAT,
    "radio.sigma_s2": FLOAT,
    "radio.sigma_s2_db": FLOAT,
    "radio.K": INT,
    "fading.model": STR,
    "fading.rician_k": FLOAT,
    "fading.weights_from": STR,
    "sus.waypoints": LIST,
    "sus.positions": LIST,
    "sus.speed": LIST,
    "sus.M": INT,
}

# Pairs of spellings for one quantity; giving both is an error.
ALIASES = (
    ("radio.p_dbm", "radio.p_w"),
    ("radio.G_db", "radio.G"),
    ("radio.noise_dbm", "radio.sigma_n2"),
    ("radio.sigma_s2", "radio.sigma_s2_db"),
    ("array.L", "array.Lx"),
    ("array.L", "array.Ly"),
    ("beams.pu_positions", "beams.theta"),
    ("sus.waypoints", "sus.positions"),
)


class ConfigError(ValueError):
    """Bad config entry; carries the offending key and line (0 = default/override)."""

    def __init__(self, key: str, line: int, msg: str):
        self.key = key
        self.line = line
        where = f"line {line}" if line else "override or default"
        super().__init__(f"{where}: key '{key}': {msg}")


_HEADER = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_]*)\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*(.+)$")


def _strip_comment(line: str) -> str:
    # '#' inside a JSON string is kept.
    out, in_str, esc = [], False, False
    for ch in line:
        if in_str:
            out.append(ch)
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            out.append(ch)
        elif ch == "#":
            break
        else:
            out.append(ch)
    return "".join(out).strip()


def _tokenize(text: str) -> dict:
    entries: dict = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            section = m.group(1)
            continue
        m = _ENTRY.match(line)
        if not m:
            raise ConfigError(line.split("=")[0].strip() or "?", lineno, "expected 'key = value'")
        key = m.group(1) if "." in m.group(1) or not section else f"{section}.{m.group(1)}"
        if key not in SCHEMA:
            raise ConfigError(key, lineno, "unknown key")
        if key in entries:
            raise ConfigError(key, lineno, f"duplicate key (first set on line {entries[key][1]})")
        try:
            value = json.loads(m.group(2))
        except json.JSONDecodeError as exc:
            raise ConfigError(key, lineno, f"value is not a JSON literal ({exc.msg})") from None
        entries[key] = (value, lineno)
    return entries


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_type(key: str, value, line: int):
    kind = SCHEMA[key]
    if kind == INT:
        if not (isinstance(value, int) and not isinstance(value, bool)):
            raise ConfigError(key, line, f"expected an integer, got {value!r}")
        return value
    if kind == FLOAT:
        if not _is_num(value) or not math.isfinite(value):
            raise ConfigError(key, line, f"expected a finite number, got {value!r}")
        return float(value)
    if kind == STR:
        if not isinstance(value, str):
            raise ConfigError(key, line, f"expected a string, got {value!r}")
        return value
    if kind == POINT:
        if not (isinstance(value, list) and len(value) == 3 and all(_is_num(v) for v in value)):
            raise ConfigError(key, line, "expected [x, y, z]")
        return [float(v) for v in value]
    if key == "sus.speed":
        if _is_num(value):
            return float(value)
        if isinstance(value, list) and all(_is_num(v) for v in value):
            return [float(v) for v in value]
        raise ConfigError(key, line, "expected a number or a list of numbers")
    if not isinstance(value, list):
        raise ConfigError(key, line, f"expected a list, got {value!r}")
    return value


class _Entries:
    def __init__(self, given: dict):
        self.given = given

    def has(self, key: str) -> bool:
        return key in self.given

    def line(self, key: str) -> int:
        return self.given[key][1] if key in self.given else 0

    def get(self, key: str, default_key: str | None = None):
        if key in self.given:
            return self.given[key][0]
        return DEFAULTS.get(default_key or key)


def _points(key: str, value, line: int) -> list[Point3]:
    try:
        return [Point3.of(p) for p in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, line, f"expected a list of [x, y, z] points ({exc})") from None


def _guard(key: str, line: int, fn, *args):
    try:
        return fn(*args)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, line, str(exc)) from None


def _radio(e: _Entries) -> RadioParams:
    def pick(lin_key, db_key, to_lin):
        if e.has(lin_key) or DEFAULTS.get(db_key) is None:
            return e.get(lin_key), lin_key
        return to_lin(e.get(db_key)), db_key

    dbm = lambda v: 10.0 ** ((v - 30.0) / 10.0)  # noqa: E731
    db = lambda v: 10.0 ** (v / 10.0)  # noqa: E731
    vals = {
        "p": pick("radio.p_w", "radio.p_dbm", dbm),
        "G": pick("radio.G", "radio.G_db", db),
        "sigma_n2": pick("radio.sigma_n2", "radio.noise_dbm", dbm),
        "sigma_s2": (db(e.get("radio.sigma_s2_db")), "radio.sigma_s2_db") if e.has("radio.sigma_s2_db")
        else (e.get("radio.sigma_s2"), "radio.sigma_s2"),
        "fc": (e.get("radio.fc"), "radio.fc"),
    }
    for v, key in vals.values():
        if not v > 0.0:
            raise ConfigError(key, e.line(key), f"must be positive, got {v!r}")
    K = e.get("radio.K")
    if K < 1:
        raise ConfigError("radio.K", e.line("radio.K"), f"K must be >= 1, got {K}")
    return RadioParams(K=K, **{k: v for k, (v, _) in vals.items()})


def _geometry(e: _Entries, fc: float) -> ArrayGeometry:
    if e.has("array.Lx") or e.has("array.Ly"):
        if not (e.has("array.Lx") and e.has("array.Ly")):
            k = "array.Lx" if e.has("array.Lx") else "array.Ly"
            raise ConfigError(k, e.line(k), "Lx and Ly must be given together")
        Lx, Ly = e.get("array.Lx"), e.get("array.Ly")
        key = "array.Lx"
    else:
        key = "array.L"
        Lx, Ly = _guard(key, e.line(key), square_factorization, e.get("array.L"))
    half = C_LIGHT / fc / 2.0
    dx = e.get("array.dx") if e.has("array.dx") else half
    dy = e.get("array.dy") if e.has("array.dy") else half
    if e.has("array.excitation"):
        ex = e.get("array.excitation")
        key = "array.excitation"
        try:
            ex = tuple(tuple(float(v) for v in row) for row in ex)
        except (TypeError, ValueError):
            raise ConfigError(key, e.line(key), "expected a nested list of numbers") from None
    else:
        ex = tuple(tuple(1.0 for _ in range(Ly // 2)) for _ in range(Lx // 2))
    element = e.get("array.element")
    if element not in ELEMENT_PATTERNS:
        raise ConfigError("array.element", e.line("array.element"),
                          f"unknown element pattern {element!r}; choose from {sorted(ELEMENT_PATTERNS)}")
    return _guard(key, e.line(key), ArrayGeometry, Lx, Ly, dx, dy, ex, element)


def _beams(e: _Entries, origin: Point3, boresight) -> BeamSet:
    if e.has("beams.theta"):
        if not e.has("beams.phi"):
            raise ConfigError("beams.theta", e.line("beams.theta"), "beams.phi is also required")
        th, ph = e.get("beams.theta"), e.get("beams.phi")
        a = e.get("beams.a") if e.has("beams.a") else [1.0] * len(th)
        key = "beams.theta"
        try:
            return BeamSet(tuple(float(v) for v in th), tuple(float(v) for v in ph),
                           tuple(float(v) for v in a))
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, e.line(key), str(exc)) from None
    if e.has("beams.phi"):
        raise ConfigError("beams.phi", e.line("beams.phi"), "beams.theta is also required")
    key = "beams.pu_positions"
    pts = _points(key, e.get(key), e.line(key))
    if not pts:
        raise ConfigError(key, e.line(key), "need at least one primary user (Q >= 1)")
    return _guard(key, e.line(key), beams_toward, origin, boresight, pts, e.get("beams.a"))


def _sus(e: _Entries) -> tuple:
    if e.has("sus.positions"):
        key = "sus.positions"
        routes = [[p] for p in e.get(key)]
    else:
        key = "sus.waypoints"
        routes = e.get(key)
    line = e.line(key)
    trajs_pts = []
    for r in routes:
        if not isinstance(r, list) or not r:
            raise ConfigError(key, line, "each SU needs a non-empty list of [x, y, z] waypoints")
        trajs_pts.append(tuple(_points(key, r, line)))
    speed = e.get("sus.speed")
    speeds = speed if isinstance(speed, list) else [speed] * len(trajs_pts)
    if len(speeds) != len(trajs_pts):
        raise ConfigError("sus.speed", e.line("sus.speed"),
                          f"{len(speeds)} speeds for {len(trajs_pts)} SUs")
    trajs = []
    for pts, v in zip(trajs_pts, speeds):
        trajs.append(_guard("sus.speed", e.line("sus.speed"), Trajectory, pts, v))
    if e.has("sus.M"):
        M = e.get("sus.M")
        if not 1 <= M <= len(trajs):
            raise ConfigError("sus.M", e.line("sus.M"), f"M must be in [1, {len(trajs)}], got {M}")
        trajs = trajs[:M]
    if not trajs:
        raise ConfigError(key, line, "need at least one secondary user (M >= 1)")
    return tuple(trajs)


def _build(given: dict) -> Scenario:
    for a, b in ALIASES:
        if a in given and b in given:
            raise ConfigError(b, given[b][1], f"conflicts with '{a}' (line {given[a][1]})")
    checked = {k: (_check_type(k, v, ln), ln) for k, (v, ln) in given.items()}
    e = _Entries(checked)

    seed = e.get("seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", e.line("seed"), "seed must be a 64-bit unsigned integer")
    origin = Point3(e.get("array.x"), e.get("array.y"), e.get("array.height"))
    bs = e.get("array.boresight")
    if math.hypot(*bs) == 0.0:
        raise ConfigError("array.boresight", e.line("array.boresight"), "boresight must be nonzero")
    boresight = tuple(float(v) for v in bs)
    radio = _radio(e)
    geom = _geometry(e, radio.fc)
    beams = _beams(e, origin, boresight)
    fading = _guard("fading.model", e.line("fading.model"), FadingConfig, e.get("fading.model"),
                    e.get("fading.rician_k"), e.get("fading.weights_from"))
    sus = _sus(e)
    return Scenario(origin, geom, beams, radio, sus, fading, seed, boresight)


def parse_config(text: str, overrides: dict | None = None) -> Scenario:
    """Validated Scenario from config text; absent keys take the built-in defaults.

    ``overrides`` (flat ``section.key`` -> value) replace or add entries after
    the text is read; they are validated like file entries (reported as line 0).
    """
    given = _tokenize(text)
    for k, v in (overrides or {}).items():
        if k not in SCHEMA:
            raise ConfigError(k, 0, "unknown key")
        given[k] = (v, 0)
        for a, b in ALIASES:
            # An override replaces whichever spelling the file used.
            other = b if k == a else a if k == b else None
            if other is not None and other in given and given[other][1] != 0:
                del given[other]
    return _build(given)


def load_config(path, overrides: dict | None = None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


def default_scenario(**overrides) -> Scenario:
    """Default scenario; keyword overrides use ``section__key`` for ``section.key``."""
    return parse_config("", {k.replace("__", "."): v for k, v in overrides.items()})


def _dump(v) -> str:
    return json.dumps(v, allow_nan=False)


def emit_config(s: Scenario) -> str:
    """Canonical, fully explicit config text; ``parse_config`` reads it back exactly."""
    g, b, r, f = s.geometry, s.beams, s.radio, s.fading
    lines = [
        f"seed = {_dump(int(s.seed))}",
        "",
        "[array]",
        f"x = {_dump(s.array_origin.x)}",
        f"y = {_dump(s.array_origin.y)}",
        f"height = {_dump(s.array_origin.z)}",
        f"boresight = {_dump([float(v) for v in s.boresight])}",
        f"Lx = {_dump(int(g.Lx))}",
        f"Ly = {_dump(int(g.Ly))}",
        f"dx = {_dump(float(g.dx))}",
        f"dy = {_dump(float(g.dy))}",
        f"excitation = {_dump([[float(v) for v in row] for row in g.excitation])}",
        f"element = {_dump(g.element)}",
        "",
        "[beams]",
        f"theta = {_dump([float(v) for v in b.theta])}",
        f"phi = {_dump([float(v) for v in b.phi])}",
        f"a = {_dump([float(v) for v in b.a])}",
        "",
        "[radio]",
        f"p_w = {_dump(float(r.p))}",
        f"G = {_dump(float(r.G))}",
        f"fc = {_dump(float(r.fc))}",
        f"sigma_n2 = {_dump(float(r.sigma_n2))}",
        f"sigma_s2 = {_dump(float(r.sigma_s2))}",
        f"K = {_dump(int(r.K))}",
        "",
        "[fading]",
        f"model = {_dump(f.model)}",
        f"rician_k = {_dump(float(f.rician_k))}",
        f"weights_from = {_dump(f.weights_from)}",
        "",
        "[sus]",
        f"waypoints = {_dump([[[p.x, p.y, p.z] for p in t.waypoints] for t in s.sus])}",
        f"speed = {_dump([float(t.speed) for t in s.sus])}",
    ]
    return "\n".join(lines) + "\n"
