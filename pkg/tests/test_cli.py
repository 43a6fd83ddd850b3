import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import tomli

from dptlab.cli import emit_csv, main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out), "--no-timestamp"])
    return code, out


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_steady_is_eta_independent(tmp_path):
    code0, out0 = run(tmp_path, "steady", "--preset", "laser-fig1", name="eta0")
    code1, out1 = run(tmp_path, "steady", "--preset", "laser-fig1", "--eta", "0.2", name="eta1")
    assert code0 == code1 == 0
    s0 = json.loads((out0 / "summary.json").read_text())
    s1 = json.loads((out1 / "summary.json").read_text())
    assert set(s0) >= {"model", "params", "cutoff", "convergence_table", "observables",
                       "gaps_by_sector", "wall_time_s"}
    n0, n1 = s0["observables"]["n_rescaled"], s1["observables"]["n_rescaled"]
    assert abs(n0 - n1) < 1e-10 * n0
    for k in ("1", "2"):
        shift = s1["gaps_by_sector"][k] - s0["gaps_by_sector"][k]
        assert shift == pytest.approx(0.2 * int(k) ** 2 / 8, abs=1e-10)
    assert read_csv(out0 / "steady.csv")[0] == ["n", "population"]


def test_outputs_are_deterministic_and_config_roundtrips(tmp_path):
    _, first = run(tmp_path, "spectrum", "--preset", "kerr-fig2", "--param", "G=3", "--n", "3",
                   "--cutoff", "14", name="a")
    _, second = run(tmp_path, "spectrum", "--preset", "kerr-fig2", "--param", "G=3", "--n", "3",
                    "--cutoff", "14", name="b")
    assert (first / "spectrum.csv").read_bytes() == (second / "spectrum.csv").read_bytes()
    echo = tomli.loads((first / "config.toml").read_text())
    assert echo["model"]["G"] == 3.0 and echo["numerics"]["cutoff"] == 14
    code = main(["--config", str(first / "config.toml"), "--out", str(tmp_path / "c")])
    assert code == 0
    rows_a = read_csv(first / "spectrum.csv")
    rows_c = [r for r in read_csv(tmp_path / "c" / "spectrum.csv") if not r[0].startswith("#")]
    assert rows_a == rows_c


def test_spectrum_rows_sorted_by_sector_then_rate(tmp_path):
    _, out = run(tmp_path, "spectrum", "--preset", "laser-fig1", "--cutoff", "40", "--kmax", "2")
    rows = read_csv(out / "spectrum.csv")
    assert rows[0] == ["sector", "index", "re_lambda", "im_lambda"]
    data = [(int(r[0]), abs(float(r[2]))) for r in rows[1:]]
    assert data == sorted(data)
    assert {k for k, _ in data} == {0, 1, 2}


def test_timestamp_line_is_optional(tmp_path):
    out = tmp_path / "ts"
    assert main(["steady", "--preset", "laser-fig1", "--cutoff", "30", "--out", str(out)]) == 0
    first = (out / "steady.csv").read_text().splitlines()[0]
    assert first.startswith("# generated")


def test_sweep_csv_schema_and_order(tmp_path):
    cfg = write(tmp_path, """
preset = "laser-fig1"
[sweep]
grid = [0.75, 1.0, 1.25]
N = [1, 2]
removal = [0.0, 0.2]
""")
    code, out = run(tmp_path, "sweep", "--config", cfg, "--workers", "3")
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert rows[0] == ["param", "N", "eta_or_zeta", "n_photon_rescaled", "gap_k0", "gap_k1"]
    body = [[float(x) for x in r] for r in rows[1:]]
    assert len(body) == 12
    assert [r[:3] for r in body[:4]] == [[0.75, 1, 0], [1.0, 1, 0], [1.25, 1, 0], [0.75, 1, 0.2]]
    for plain, deph in zip(body[:3], body[3:6]):
        assert plain[3] == pytest.approx(deph[3], rel=1e-10)
        assert deph[5] - plain[5] == pytest.approx(0.025, abs=1e-10)
    # 17 significant digits survive a round trip
    assert all(len(r[3].replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 17 for r in rows[1:])


def test_evolve_task(tmp_path):
    cfg = write(tmp_path, """
preset = "laser-fig1"
[model]
N = 2.0
[numerics]
t_final = 2.0
n_records = 5
""")
    code, out = run(tmp_path, "evolve", "--config", cfg)
    assert code == 0
    rows = read_csv(out / "evolve.csv")
    assert rows[0][:4] == ["t", "n", "re_a", "im_a"]
    assert len(rows) == 6
    summary = json.loads((out / "summary.json").read_text())
    assert summary["observables"]["max_trace_error"] < 1e-8


def test_wigner_snapshots(tmp_path):
    cfg = write(tmp_path, """
preset = "kerr-fig2"
[model]
G = 3.0
[numerics]
cutoff = 16
initial = "vacuum"
[wigner]
re = [-2.0, 2.0, 9]
im = [-2.0, 2.0, 5]
times = [0.0, 1.0]
""")
    code, out = run(tmp_path, "wigner", "--config", cfg)
    assert code == 0
    rows = read_csv(out / "wigner_t0.csv")
    assert rows[0] == ["re_alpha", "im_alpha", "w"]
    assert len(rows) == 1 + 45
    # row-major: real part varies fastest
    assert [float(r[0]) for r in rows[1:10]] == list(np.linspace(-2, 2, 9))
    centre = [float(r[2]) for r in rows[1:] if float(r[0]) == 0 and float(r[1]) == 0][0]
    assert centre == pytest.approx(2 / np.pi, abs=1e-10)
    assert (out / "wigner_t1.csv").exists()


def test_sectors_check_reports(tmp_path):
    code, out = run(tmp_path, "sectors-check", "--preset", "kerr-fig2", "--cutoff", "12", name="k")
    assert code == 0
    report = (out / "report.txt").read_text()
    assert "PASS" in report and "shift=-0.4" in report
    cfg = write(tmp_path, 'preset = "kerr-fig2"\n[check]\noperator = "a"\n')
    code, out = run(tmp_path, "sectors-check", "--config", cfg, "--cutoff", "12", name="neg")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["observables"]["removal_passed"] is False
    code, out = run(tmp_path, "sectors-check", "--preset", "laser-fig1", "--cutoff", "30", name="l")
    shifts = json.loads((out / "summary.json").read_text())["observables"]["sector_shifts"]
    assert shifts["U1:2"] == pytest.approx(-0.1) and shifts["U1:0"] == 0


@pytest.mark.parametrize("args,text", [
    (["steady"], None),
    (["bogus", "--preset", "laser-fig1"], None),
    (["steady", "--preset", "laser-fig1", "--param", "Q=1"], None),
    (["steady", "--preset", "laser-fig1", "--zeta", "0.2"], None),
    (["steady", "--preset", "laser-fig1", "--cutoff", "many"], None),
    (["sweep"], '[model]\nkind = "laser"\nA = 1.0\n'),
    (["steady"], "[model\nkind = 1"),
    (["steady"], '[model]\nkind = "laser"\nA = -1.0\n'),
    (["steady"], '[model]\nkind = "laser"\nA = 1.0\n[numerics]\nfoo = 1\n'),
])
def test_config_errors_exit_2(tmp_path, capsys, args, text):
    argv = list(args)
    if text is not None:
        argv += ["--config", write(tmp_path, text)]
    assert main(argv + ["--out", str(tmp_path / "o")]) == 2
    assert "error" in capsys.readouterr().err


def test_toml_error_has_line_diagnostics(tmp_path, capsys):
    main(["steady", "--config", write(tmp_path, 'task = "steady"\n[model\n'), "--out", str(tmp_path / "o")])
    assert "line 2" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    cfg = write(tmp_path, """
preset = "laser-fig1"
[numerics]
cutoff = 12
t_final = 5.0
initial = "vacuum"
""")
    assert main(["evolve", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "CutoffTooSmallError" in capsys.readouterr().err


def test_io_failure_exits_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["steady", "--preset", "laser-fig1", "--cutoff", "20", "--out", str(blocker / "sub")]) == 4


def test_emit_csv_formatting(tmp_path):
    path = emit_csv(tmp_path / "x.csv", ["a", "b"], [(0.1, 1), (1 / 3, 2)])
    lines = path.read_bytes().split(b"\r\n")
    assert lines[1] == b"0.10000000000000001,1"
    assert float(lines[2].split(b",")[0]) == 1 / 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dptlab", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sectors-check" in proc.stdout
