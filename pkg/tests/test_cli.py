import numpy as np
import pytest

from blockred.cli import main
from blockred.data import data_path
from blockred.sysdoc import load_system
from blockred.sysrep import StateSpace

SIMPLE_SS = """\
type: state_space
name: two modes
n: 2
m: 1
p: 1

matrix A 2 2
-1 0
0 -2

matrix B 2 1
1
1

matrix C 1 2
1 1
"""

FIRST_ORDER = """\
type: state_space
n: 1
m: 1
p: 1

matrix A 1 1
-1

matrix B 1 1
1

matrix C 1 1
1
"""

OSCILLATOR = """\
type: state_space
n: 2
m: 1
p: 1

matrix A 2 2
0 1
-1 0

matrix B 2 1
0
1

matrix C 1 2
1 0
"""

MINIMAL_MFD = """\
type: right_mfd
m: 2
p: 2
r: 1

matrix D0 2 2
1 0
0 1

matrix D1 2 2
1 0
0 2

matrix N0 2 2
1 0
0 1
"""

UNSTABLE_SS = SIMPLE_SS.replace("-1 0\n0 -2", "1 0\n0 -2")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def fixture_path(fixed=True):
    name = "power_network_8_fixed.sys" if fixed else "power_network_8.sys"
    return str(data_path(name))


def test_validate_success(tmp_path, capsys):
    path = write(tmp_path, "simple.sys", SIMPLE_SS)
    assert main(["validate", path]) == 0
    out = capsys.readouterr().out
    assert "type: state_space" in out
    assert "name: two modes" in out
    assert "n=2 m=1 p=1, stable" in out
    assert "poles:" in out
    assert "-1" in out and "-2" in out


def test_validate_parse_error_exit_1(tmp_path, capsys):
    path = write(tmp_path, "broken.sys", "type: state_space\nwhat is this\n")
    assert main(["validate", path]) == 1
    err = capsys.readouterr().err
    assert "error:" in err
    assert "line 2" in err


def test_validate_missing_file_exit_1(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.sys")]) == 1


def test_validate_invariant_exit_2(tmp_path, capsys):
    bad = SIMPLE_SS.replace("matrix B 2 1\n1\n1", "matrix B 1 1\n1")
    path = write(tmp_path, "bad.sys", bad)
    assert main(["validate", path]) == 2
    assert "error:" in capsys.readouterr().err


def test_analyze_sections(tmp_path, capsys):
    path = write(tmp_path, "simple.sys", SIMPLE_SS)
    assert main(["analyze", path]) == 0
    out = capsys.readouterr().out
    assert "solvents:" in out
    assert "block Vandermonde condition:" in out
    assert "hankel singular values:" in out
    assert "h2 norm:" in out
    assert "dominant poles:" in out
    assert "dominance" in out


def test_analyze_degrades_on_unstable(tmp_path, capsys):
    path = write(tmp_path, "unstable.sys", UNSTABLE_SS)
    assert main(["analyze", path]) == 0
    out = capsys.readouterr().out
    assert "n=2 m=1 p=1, unstable" in out
    assert "unavailable:" in out  # gramian-based sections cannot run
    assert "dominant poles:" in out


def test_reduce_fixture_writes_document_and_report(tmp_path, capsys):
    out_path = str(tmp_path / "reduced.sys")
    assert main(["reduce", fixture_path(), "--out", out_path]) == 0
    stdout = capsys.readouterr().out
    assert "order 8 -> 6" in stdout
    assert "1 eliminated" in stdout
    red = load_system(out_path)
    assert isinstance(red, StateSpace)
    assert red.n == 6
    report = open(out_path + ".report").read()
    assert "method: dominant" in report
    assert "original_order: 8" in report
    assert "reduced_order: 6" in report
    assert "no dominant pole" in report
    assert "iterations: 2" in report


def test_reduce_threshold_zero_echoes_input(tmp_path, capsys):
    out_path = str(tmp_path / "same.sys")
    code = main([
        "reduce", fixture_path(), "--out", out_path, "--threshold", "0",
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "order 8 -> 8" in stdout
    assert "0 eliminated" in stdout
    red = load_system(out_path)
    orig = load_system(fixture_path())
    assert red.n == 8
    np.testing.assert_allclose(red.A, orig.A)
    np.testing.assert_allclose(red.C, orig.C)


def test_reduce_latent_method_runs(tmp_path, capsys):
    out_path = str(tmp_path / "latent.sys")
    code = main([
        "reduce", fixture_path(), "--method", "latent", "--out", out_path,
    ])
    assert code == 0
    report = open(out_path + ".report").read()
    assert "method: latent" in report


def test_reduce_already_minimal_exit_3(tmp_path, capsys):
    path = write(tmp_path, "minimal.sys", MINIMAL_MFD)
    out_path = str(tmp_path / "out.sys")
    code = main(["reduce", path, "--method", "latent", "--out", out_path])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_reduce_unstable_exit_4(tmp_path, capsys):
    path = write(tmp_path, "unstable.sys", UNSTABLE_SS)
    out_path = str(tmp_path / "out.sys")
    assert main(["reduce", path, "--out", out_path]) == 4


def test_reduce_output_is_deterministic(tmp_path, capsys):
    a = str(tmp_path / "a.sys")
    b = str(tmp_path / "b.sys")
    assert main(["reduce", fixture_path(), "--out", a]) == 0
    assert main(["reduce", fixture_path(), "--out", b]) == 0
    capsys.readouterr()
    assert open(a, "rb").read() == open(b, "rb").read()
    assert open(a + ".report", "rb").read() == open(b + ".report", "rb").read()


def test_bode_single_system_csv(tmp_path, capsys):
    path = write(tmp_path, "first.sys", FIRST_ORDER)
    code = main([
        "bode", path, "--wmin", "1", "--wmax", "1", "--points", "1",
    ])
    assert code == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "omega_rad_s,mag_db_11,phase_deg_11"
    cells = lines[1].split(",")
    assert float(cells[0]) == pytest.approx(1.0)
    assert float(cells[1]) == pytest.approx(-3.0102999566398, abs=1e-9)
    assert float(cells[2]) == pytest.approx(-45.0, abs=1e-9)


def test_bode_writes_file(tmp_path, capsys):
    path = write(tmp_path, "first.sys", FIRST_ORDER)
    out_path = str(tmp_path / "resp.csv")
    code = main([
        "bode", path, "--wmin", "0.1", "--wmax", "10", "--points", "5",
        "--out", out_path,
    ])
    assert code == 0
    text = open(out_path).read()
    assert text.startswith("omega_rad_s,")
    assert len(text.strip().splitlines()) == 6


def test_bode_pole_probe_leaves_empty_row(tmp_path, capsys):
    path = write(tmp_path, "osc.sys", OSCILLATOR)
    code = main([
        "bode", path, "--wmin", "1", "--wmax", "1", "--points", "1",
    ])
    assert code == 0
    captured = capsys.readouterr()
    assert "warning:" in captured.err
    assert "probe at a pole" in captured.err
    row = captured.out.strip().splitlines()[1]
    assert row.split(",")[1] == ""  # magnitude cell left empty


def test_bode_two_systems_summary(tmp_path, capsys):
    out_path = str(tmp_path / "red.sys")
    assert main(["reduce", fixture_path(), "--out", out_path]) == 0
    capsys.readouterr()
    code = main([
        "bode", fixture_path(), out_path,
        "--wmin", "0.01", "--wmax", "100", "--points", "30",
    ])
    assert code == 0
    captured = capsys.readouterr()
    assert "max |delta mag|" in captured.err
    header = captured.out.splitlines()[0]
    assert "mag_db_11_1" in header
    assert "mag_db_11_2" in header
    assert "phase_deg_22_2" in header


def test_bode_shape_mismatch_exit_2(tmp_path, capsys):
    a = write(tmp_path, "a.sys", FIRST_ORDER)
    wide = SIMPLE_SS.replace("m: 1", "m: 2").replace(
        "matrix B 2 1\n1\n1", "matrix B 2 2\n1 0\n1 1"
    )
    b = write(tmp_path, "wide.sys", wide)
    assert main(["bode", a, b]) == 2


def test_bode_bad_grid_exit_2(tmp_path, capsys):
    path = write(tmp_path, "first.sys", FIRST_ORDER)
    assert main(["bode", path, "--wmin", "10", "--wmax", "1"]) == 2
