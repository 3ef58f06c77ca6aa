import csv
import textwrap

import numpy as np
import pytest

from bisoliton.bjorling import diagonal_strip
from bisoliton.cli import main
from bisoliton.io import MeshOutput, read_strip_csv, write_strip_csv
from bisoliton.surface import BCSurface


def run(tmp_path, command, config, *extra, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(config))
    out = tmp_path / "out"
    return main([command, "--config", str(path), "--out", str(out), *extra]), out


def summary(path):
    with open(path, newline="") as fh:
        return {row["metric"]: row for row in csv.DictReader(fh)}


def obj_counts(path):
    lines = path.read_text().splitlines()
    v = [ln for ln in lines if ln.startswith("v ")]
    vn = [ln for ln in lines if ln.startswith("vn ")]
    f = [ln for ln in lines if ln.startswith("f ")]
    return v, vn, f


SURFACE = """
[surface]
F = "r"
G = "s"
r = [-0.5, 0.5]
s = [-0.5, 0.5]
grid = [33, 33]
"""


def test_surface_identity(tmp_path):
    code, out = run(tmp_path, "surface", SURFACE)
    assert code == 0
    v, vn, f = obj_counts(out / "surface.obj")
    assert len(v) == 1089 and len(vn) == 1089 and len(f) == 32 * 32
    idx = np.array([[int(i) for i in ln.split()[1:]] for ln in f])
    assert idx.min() == 1 and idx.max() == 1089 and idx.shape[1] == 4
    s = summary(out / "surface_summary.csv")
    assert s["regular_vertices"]["value"] == "1089"
    assert float(s["max_abs_H"]["value"]) < 1e-4
    with open(out / "surface_report.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1089 and set(rows[0]) >= {"H", "nt1", "nt2", "nt3", "eaa_residual", "regular"}


def test_surface_non_regular_cells_are_dropped(tmp_path):
    code, out = run(tmp_path, "surface", """
        [surface]
        F = "r^2"
        G = "s"
        r = [-0.5, 0.5]
        s = [-0.5, 0.5]
        grid = [5, 5]
    """)
    assert code == 0
    v, _, f = obj_counts(out / "surface.obj")
    assert len(v) == 25 and len(f) == 8  # the row r = 0 touches 8 of the 16 cells
    assert summary(out / "surface_summary.csv")["regular_vertices"]["value"] == "20"


@pytest.fixture
def identity_strip():
    return diagonal_strip(BCSurface.from_strings("r", "s"), -0.5, 0.5)


BJORLING = """
[bjorling]
strip = "strip.csv"
grid = [9, 9]
"""


@pytest.mark.parametrize("derivatives", [False, True])
def test_bjorling_strip_file(tmp_path, identity_strip, derivatives):
    write_strip_csv(tmp_path / "strip.csv", identity_strip, derivatives=derivatives)
    code, out = run(tmp_path, "bjorling", BJORLING)
    assert code == 0
    s = summary(out / "bjorling_summary.csv")
    assert float(s["curve_residual"]["value"]) < 1e-5
    assert float(s["normal_residual"]["value"]) < 1e-5
    assert len(obj_counts(out / "bjorling.obj")[0]) == 81
    assert (out / "bjorling_fg.csv").read_text().startswith("t,r,s,Fprime,Gprime\n")


def test_strip_csv_round_trip(tmp_path, identity_strip):
    write_strip_csv(tmp_path / "s.csv", identity_strip, derivatives=True)
    back = read_strip_csv(tmp_path / "s.csv")
    assert np.array_equal(back.c, identity_strip.c) and np.array_equal(back.cdot, identity_strip.cdot)


def test_bjorling_n3_zero_row(tmp_path, identity_strip, capsys):
    identity_strip.n[50] = [1.0, 0.0, 0.0]
    write_strip_csv(tmp_path / "strip.csv", identity_strip)
    code, _ = run(tmp_path, "bjorling", BJORLING)
    assert code != 0
    err = capsys.readouterr().err
    assert "NormalThirdComponentZero" in err and "hint:" in err


def test_bjorling_perturb(tmp_path, identity_strip):
    write_strip_csv(tmp_path / "strip.csv", identity_strip)
    code, out = run(tmp_path, "bjorling", BJORLING, "--perturb", "J=1.0,1.5", "amp=0.05")
    assert code == 0
    assert (out / "bjorling_original.obj").exists() and (out / "bjorling_perturbed.obj").exists()
    s = summary(out / "bjorling_summary.csv")
    assert float(s["square_max_diff"]["value"]) < 1e-6
    assert float(s["line_max_diff"]["value"]) > 1e-3
    assert s["line_r"]["value"] == "1.25"


def test_bjorling_perturb_overlap_is_an_error(tmp_path, identity_strip, capsys):
    write_strip_csv(tmp_path / "strip.csv", identity_strip)
    code, _ = run(tmp_path, "bjorling", BJORLING, "--perturb", "J=0.2,1.0", "amp=0.05")
    assert code == 2 and "IntervalOverlapsData" in capsys.readouterr().err


def test_bjorling_closed_form_and_generated_sources(tmp_path):
    code, out = run(tmp_path, "bjorling", """
        [bjorling.exprs]
        var = "t"
        c = ["t - t^3/3", "0", "t^2"]
        n = ["-2*t/(1 + t^2)", "0", "(1 - t^2)/(1 + t^2)"]
        interval = [-0.5, 0.5]
    """)
    assert code == 0
    code, out = run(tmp_path, "bjorling", """
        [bjorling]
        extension = "taper"
        taper_width = 0.2
        [bjorling.generate]
        F = "tanh(r)"
        G = "sinh(s)"
        interval = [-0.5, 0.5]
        [bjorling.perturb]
        J = [1.0, 1.5]
        amplitude = 0.05
    """)
    assert code == 0
    assert "line_max_diff" in summary(out / "bjorling_summary.csv")


TMS = """
[bjorling_tms]
c = ["t", "0", "0"]
n = ["0", "1", "0"]
interval = [-1, 1]
t = [-1, 1]
s = [-1, 1]
grid = [5, 5]
"""


def test_bjorling_tms_plane(tmp_path):
    code, out = run(tmp_path, "bjorling-tms", TMS)
    assert code == 0
    s = summary(out / "tms_summary.csv")
    assert s["branch"]["value"] == "spacelike"
    assert float(s["curve_residual"]["value"]) < 1e-10
    v, _, f = obj_counts(out / "tms.obj")
    xyz = np.array([[float(c) for c in ln.split()[1:]] for ln in v])
    g = np.linspace(-1, 1, 5)
    T, S = np.meshgrid(g, g, indexing="ij")
    assert np.allclose(xyz, np.stack([S, 0 * S, T], axis=-1).reshape(-1, 3), atol=1e-10)
    with open(out / "tms_jacobian.csv", newline="") as fh:
        jac = {row["field"]: row["value"] for row in csv.DictReader(fh)}
    assert jac["criterion_i"] == "0" and jac["criterion_ii"] == "0" and jac["certified"] == "0"
    assert jac["summary"] == "not certified as graph over the (X2, X3)-plane"


def test_bjorling_tms_timelike_and_bridge(tmp_path):
    code, out = run(tmp_path, "bjorling-tms", """
        [bjorling_tms]
        c = ["cos(t)", "sin(t)", "2*t"]
        n = ["cos(t)", "sin(t)", "0"]
        interval = [-1, 1]
        t = [-0.5, 0.5]
        s = [-0.5, 0.5]
        grid = [5, 5]
        bridge_output = true
        [bjorling_tms.gale_nikaido]
        components = [0, 1]
        density = 8
    """)
    assert code == 0
    assert summary(out / "tms_summary.csv")["branch"]["value"] == "timelike"
    v, _, _ = obj_counts(out / "tms.obj")
    first = [float(c) for c in v[0].split()[1:]]
    # bridged to B3: (x, y, z) of L3 becomes (y, z, x); the corner t = s = -0.5 has L3 x > 0
    assert first[2] > 0


def test_bjorling_tms_mixed_causal(tmp_path, capsys):
    code, _ = run(tmp_path, "bjorling-tms", TMS.replace('"0"]\nn', '"t^2"]\nn'))
    assert code == 2 and "MixedCausalCharacter" in capsys.readouterr().err


VERIFY = """
[verify]
F = "{F}"
G = "{G}"
r = [-0.9, 0.9]
s = [-0.9, 0.9]
grid = [9, 9]
random_points = 8
{extra}
"""


@pytest.mark.parametrize("F, G", [("r", "s"), ("sin(r)", "s+s^3/3")])
def test_verify_passes(tmp_path, F, G):
    code, out = run(tmp_path, "verify", VERIFY.format(F=F, G=G, extra=""))
    assert code == 0
    with open(out / "verify_report.csv", newline="") as fh:
        rows = {row["invariant"]: row for row in csv.DictReader(fh)}
    assert rows["mean_curvature"]["pass"] == "1" and int(rows["mean_curvature"]["checked"]) > 50


def test_verify_bi_pde_option(tmp_path):
    cfg = VERIFY.format(F="r", G="s", extra="bi_pde = true").replace("0.9", "0.4")
    code, out = run(tmp_path, "verify", cfg)
    assert code == 0
    assert "bi_pde_residual" in (out / "verify_report.csv").read_text()


def test_verify_corrupted_normal_fails(tmp_path):
    code, out = run(tmp_path, "verify", VERIFY.format(F="r", G="s", extra="corrupt_normal = true"))
    assert code == 1
    with open(out / "verify_report.csv", newline="") as fh:
        rows = {row["invariant"]: row for row in csv.DictReader(fh)}
    assert rows["normal_orthogonal"]["pass"] == "0"


def test_verify_seed(tmp_path):
    cfg = VERIFY.format(F="tanh(r)", G="sinh(s)", extra="")
    _, out = run(tmp_path, "verify", cfg, "--seed", "1")
    a = (out / "verify_report.csv").read_bytes()
    _, out = run(tmp_path, "verify", cfg, "--seed", "1")
    assert (out / "verify_report.csv").read_bytes() == a
    _, out = run(tmp_path, "verify", cfg, "--seed", "2")
    assert (out / "verify_report.csv").read_bytes() != a


@pytest.mark.parametrize("config, field, line", [
    ("[surface]\nF = \"r\"\nG = \"s\"\nr = [0.5, -0.5]\ns = [0, 1]\n", "surface.r", 4),
    ("[surface]\nF = \"r +\"\nG = \"s\"\nr = [0, 1]\ns = [0, 1]\n", "surface.F", 2),
    ("[surface]\nF = \"r\"\nG = 3\nr = [0, 1]\ns = [0, 1]\n", "surface.G", 3),
    ("[surface]\nF = \"r\"\nG = \"s\"\nr = [0, 1]\ns = [0, 1]\ngrid = [1, 4]\n", "surface.grid", 6),
    ("[surface]\nF = \"r\"\nG = \"s\"\nr = [0, 1]\ns = [0, 1]\nh = -1\n", "surface.h", 6),
])
def test_config_field_diagnostics(tmp_path, capsys, config, field, line):
    code, _ = run(tmp_path, "surface", config)
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("ConfigError") and f"line {line}" in err and repr(field) in err


def test_config_syntax_and_missing(tmp_path, capsys):
    code, _ = run(tmp_path, "surface", "[surface]\nF = \"r\"\nG = \n")
    err = capsys.readouterr().err
    assert code == 2 and "ConfigError" in err and "line 3" in err
    code, _ = run(tmp_path, "verify", SURFACE)
    assert code == 2 and "[verify]" in capsys.readouterr().err
    code, _ = run(tmp_path, "surface", "[surface]\nF = \"r\"\n")
    assert code == 2 and "'surface.G'" in capsys.readouterr().err
    code, _ = run(tmp_path, "bjorling", "[bjorling]\nstrip = \"missing.csv\"\n")
    assert code == 2 and "missing.csv" in capsys.readouterr().err


def test_perturb_only_for_bjorling(tmp_path, capsys):
    code, _ = run(tmp_path, "surface", SURFACE, "--perturb", "J=1,2")
    assert code == 2 and "--perturb" in capsys.readouterr().err


def test_mesh_output_validation():
    with pytest.raises(ValueError):
        MeshOutput(np.zeros((2, 3)), [(0, 1, 2, 3)], np.zeros((2, 3)), np.ones(2, bool))
    with pytest.raises(ValueError):
        MeshOutput(np.zeros((2, 3)), [], np.zeros((3, 3)), np.ones(2, bool))
