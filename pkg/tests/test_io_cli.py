import json
import math

import numpy as np
import pytest

from upasense.cli import main
from upasense.config import default_scenario
from upasense.heatmap import Heatmap, lobe_footprint, snr_heatmap
from upasense.io import (
    LintError,
    lint_file,
    lint_heatmap_csv,
    lint_roc_csv,
    read_heatmap_csv,
    read_roc_csv,
    read_sidecar,
    write_heatmap_csv,
    write_roc_csv,
    write_sidecar,
)
from upasense.mc import RocCurve
from upasense.scenario import amplitudes_at_points


def _curve():
    return RocCurve([0.5, 2.0, 1.0], [0.9, 0.1, 0.4], [0.95, 0.3, 0.6], [0.01, 0.02, 0.03],
                    [0.0, 0.01, 0.02], {"source": "test", "trials": 10})


def test_roc_round_trip(tmp_path):
    p = write_roc_csv(tmp_path / "r.csv", _curve())
    lint_roc_csv(p)
    back = read_roc_csv(p)
    np.testing.assert_array_equal(back.taus, [2.0, 1.0, 0.5])
    np.testing.assert_array_equal(back.pd, [0.3, 0.6, 0.95])
    assert back.meta == {"source": "test", "trials": "10"}
    assert p.read_text().splitlines()[0] == "tau,pf,pf_ci,pd,pd_ci"


@pytest.mark.parametrize("body,msg", [
    ("tau,pf,pd\n1,0,0\n", "header"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n", "two points"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n0.5,1.5,0,0.3,0\n", "outside"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n2,0.2,0,0.3,0\n", "descending"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.3,0,0.2,0\n0.5,0.2,0,0.3,0\n", "decreases"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n0.5,x,0,0.3,0\n", "non-numeric"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n0.5,0.2,0,0.3,0", "newline"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n0.5,nan,0,0.3,0\n", "finite"),
    ("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n-1,0.2,0,0.3,0\n", "negative"),
])
def test_roc_lint_rejects(tmp_path, body, msg):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    write_sidecar(p, {"a": 1})
    with pytest.raises(LintError, match=msg):
        lint_roc_csv(p)


def test_roc_lint_needs_sidecar(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("tau,pf,pf_ci,pd,pd_ci\n1,0.1,0,0.2,0\n0.5,0.2,0,0.3,0\n")
    with pytest.raises(LintError, match="sidecar"):
        lint_roc_csv(p)


def test_sidecar_rejects_multiline(tmp_path):
    with pytest.raises(ValueError):
        write_sidecar(tmp_path / "x.csv", {"k": "a\nb"})


def test_heatmap_round_trip_and_lint(tmp_path):
    xs, ys = np.array([0.0, 1.0, 2.0]), np.array([-1.0, 1.0])
    db = np.array([[1.0, -math.inf], [2.0, 3.0], [math.nan, 4.0]])
    p = write_heatmap_csv(tmp_path / "h.csv", xs, ys, db, {"L": 64})
    lint_heatmap_csv(p)
    lint_file(p)
    x2, y2, d2 = read_heatmap_csv(p)
    np.testing.assert_array_equal(x2, xs)
    np.testing.assert_array_equal(y2, ys)
    np.testing.assert_array_equal(d2, db)
    bad = tmp_path / "b.csv"
    bad.write_text("y\\x,0.0,1.0\n0.0,1.0,inf\n")
    write_sidecar(bad, {})
    with pytest.raises(LintError, match=r"\+inf"):
        lint_file(bad)
    bad.write_text("y\\x,0.0,1.0\n0.0,1.0\n")
    with pytest.raises(LintError, match="fields"):
        lint_heatmap_csv(bad)


def test_heatmap_peak_and_footprint():
    s = default_scenario()
    hm = snr_heatmap(s, (-400, 400), (-400, 400), 1.5, 41, 41)
    assert hm.db.shape == (41, 41)
    a = amplitudes_at_points(s, np.array([[hm.xs[7], hm.ys[30], 1.5]]))[0]
    assert hm.db[7, 30] == pytest.approx(10 * np.log10(abs(a) ** 2 * s.radio.sigma_s2 / s.radio.sigma_n2),
                                         abs=1e-12)
    assert hm.cell_area == pytest.approx(400.0)
    assert 0 < lobe_footprint(hm) <= lobe_footprint(hm, drop_db=6.0)


def test_footprint_of_synthetic_map():
    xs = ys = np.arange(5.0)
    db = np.full((5, 5), -20.0)
    db[1:3, 1:3] = [[0.0, -1.0], [-2.5, -2.9]]
    db[4, 4] = -1.0  # within 3 dB of the peak but not connected to it
    assert lobe_footprint(Heatmap(xs, ys, 0.0, db)) == 4.0


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_roc_and_analytic(tmp_path, capsys):
    code, out, _ = _run(["roc", "--out", str(tmp_path), "--trials", "500", "--points", "5",
                         "--set", "sus.M=3", "--set", "radio.K=8", "--set", "fading.model=\"deterministic\""],
                        capsys)
    assert code == 0
    f = tmp_path / "roc_wed_paper_mc.csv"
    assert out.strip() == str(f)
    lint_roc_csv(f)
    assert read_sidecar(f)["trials"] == "500"
    code, _, _ = _run(["analytic", "--out", str(tmp_path), "--detector", "wevd", "--tau-grid",
                       "1e-9,2e-9", "--set", "sus.M=3", "--set", "radio.K=8"], capsys)
    assert code == 0
    c = read_roc_csv(tmp_path / "roc_wevd_paper_analytic.csv")
    np.testing.assert_array_equal(c.taus, [2e-9, 1e-9])


def test_cli_mobility(tmp_path, capsys):
    code, out, _ = _run(["roc", "--out", str(tmp_path), "--trials", "300", "--points", "3",
                         "--mu", "10", "--horizon", "20", "--set", "sus.M=2", "--set", "radio.K=4"], capsys)
    assert code == 0
    f = tmp_path / "roc_wed_paper_mu10_mc.csv"
    lint_roc_csv(f)
    assert read_sidecar(f)["mu"] == "10.0"


def test_cli_heatmap(tmp_path, capsys):
    code, _, _ = _run(["heatmap", "--out", str(tmp_path), "--nx", "11", "--ny", "9"], capsys)
    assert code == 0
    f = tmp_path / "heatmap_L64.csv"
    lint_heatmap_csv(f)
    xs, ys, db = read_heatmap_csv(f)
    assert db.shape == (11, 9)


def test_cli_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[radio]\nK = 0\n")
    code, out, err = _run(["roc", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 1 and out == ""
    line = err.strip().splitlines()[-1]
    assert line.startswith("error ")
    payload = json.loads(line[len("error "):])
    assert payload["key"] == "radio.K" and payload["line"] == 2
    assert payload["type"] == "ConfigError"


def test_cli_bad_override(tmp_path, capsys):
    code, _, err = _run(["heatmap", "--out", str(tmp_path), "--set", "radio.K"], capsys)
    assert code == 1 and "error " in err


def test_static_compare_preset_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d, w in ((a, "1"), (b, "2")):
        code, _, _ = _run(["preset", "--name", "static-compare", "--out", str(d), "--trials", "300",
                           "--points", "3", "--workers", w, "--set", "radio.K=20"], capsys)
        assert code == 0
    files = sorted(p.name for p in a.glob("*.csv"))
    assert len(files) == 8
    for name in files:
        lint_file(a / name)
        assert (a / name).read_bytes() == (b / name).read_bytes()
