import csv
import io
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.special import k0

from boundary_ising import cli, specfun
from boundary_ising.verify import run_suite


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, np.array([[float(v) for v in r] for r in reader])


def test_profile_lambda_zero(capsys):
    code, out, _ = run(["profile", "--lambda", "0", "--t-min", "0.01", "--t-max", "10",
                        "--points", "100"], capsys)
    header, data = rows(out)
    assert code == 0 and header == ["t", "u", "sigma_ratio", "sigma_abs"]
    assert data.shape == (100, 4)
    assert np.max(np.abs(data[:, 1] - 1)) < 1e-9
    assert data[0, 0] == 0.01 and data[-1, 0] == 10.0


def test_profile_interior_maximum(capsys):
    code, out, _ = run(["profile", "--lambda", "5", "--points", "200"], capsys)
    _, data = rows(out)
    i = int(np.argmax(data[:, 2]))
    assert code == 0 and 0 < i < len(data) - 1


def test_profile_metastable(capsys):
    code, out, _ = run(["profile", "--lambda", "0.5", "--branch", "metastable", "--points", "20"],
                       capsys)
    _, data = rows(out)
    assert code == 0 and abs(data[-1, 2] + 1) < 1e-3


def test_profile_highT_linear_grid(capsys):
    code, out, _ = run(["profile", "--branch", "highT", "--grid", "linear", "--t-min", "0.5",
                        "--t-max", "10", "--points", "5"], capsys)
    _, data = rows(out)
    assert code == 0
    assert np.allclose(data[:, 0], np.linspace(0.5, 10, 5), rtol=1e-14)
    assert np.all(np.diff(data[:, 2]) < 0)


def test_number_format(capsys):
    _, out, _ = run(["profile", "--lambda", "1", "--points", "3"], capsys)
    line = out.splitlines()[1]
    for field in line.split(","):
        mantissa = field.split("e")[0].lstrip("-")
        assert len(mantissa.replace(".", "")) == 15


def test_mass_flag(capsys):
    _, base, _ = run(["profile", "--lambda", "1", "--points", "4"], capsys)
    _, out, _ = run(["profile", "--lambda", "1", "--points", "4", "--mass", "2"], capsys)
    h0, d0 = rows(base)
    h1, d1 = rows(out)
    assert h1 == h0 + ["y"]
    assert np.array_equal(d1[:, :3], d0[:, :3])
    assert np.allclose(d1[:, 3], d0[:, 2] * specfun.sigma0(2.0), rtol=1e-14)
    assert np.allclose(d1[:, 4], d0[:, 0] / 4.0, rtol=1e-14)


def test_byte_identical_files(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["profile", "--lambda", "2", "--points", "50", "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b"\r" not in paths[0].read_bytes()
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "profile" and "duration_seconds" in manifest
    assert manifest["config"]["r_max"] == 14.0


def test_json_output(capsys):
    code, out, _ = run(["profile", "--lambda", "1", "--points", "5", "--format", "json"], capsys)
    body = json.loads(out)
    assert code == 0 and body["columns"] == ["t", "u", "sigma_ratio", "sigma_abs"]
    assert len(body["rows"]) == 5 and "duration_seconds" not in body["manifest"]
    assert all(math.isfinite(v) for r in body["rows"] for v in r)


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "solver.cfg"
    cfg.write_text("# solver settings\nr_max = 12\nt0 = 10\n")
    code, out, _ = run(["profile", "--lambda", "1", "--points", "3", "--config", str(cfg),
                        "--format", "json"], capsys)
    man = json.loads(out)["manifest"]
    assert code == 0 and man["config"]["r_max"] == 12.0 and man["t0"] == 10.0
    code, out, _ = run(["profile", "--lambda", "1", "--points", "3", "--config", str(cfg),
                        "--r-max", "13", "--format", "json"], capsys)
    man = json.loads(out)["manifest"]
    assert man["config"]["r_max"] == 13.0 and man["t0"] == 10.0


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(["phi", "--config", str(cfg)], capsys)[0] == 2


@pytest.mark.parametrize("argv", [
    ["profile", "--lambda", "-1"],
    ["profile", "--lambda", "1", "--t-min", "2", "--t-max", "1"],
    ["profile", "--lambda", "1", "--points", "1"],
    ["profile", "--lambda", "1", "--t-max", "30"],
    ["profile", "--lambda", "2", "--branch", "metastable"],
    ["profile"],
    ["profile", "--lambda", "1", "--r-max", "5"],
    ["ff", "--t", "1", "--kmax", "7"],
    ["ff", "--t", "-1"],
    ["phi", "--r", "50"],
])
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["profile", "--grid", "cubic"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_solver_failure_exit_1(monkeypatch, capsys):
    from boundary_ising.errors import SolverError

    def broken(*a, **k):
        raise SolverError("step size underflow", 0.5)

    monkeypatch.setattr(cli, "solve_phi", broken)
    code, _, err = run(["phi"], capsys)
    assert code == 1 and "0.5" in err


def test_phi_at_r_max(capsys):
    code, out, _ = run(["phi", "--r", "14"], capsys)
    header, data = rows(out)
    assert code == 0 and header == ["r", "phi", "dphi"]
    assert f"{data[0, 1]:.11e}" == f"{2 / math.pi * k0(14.0):.11e}"


def test_phi_full_table(capsys):
    _, out, _ = run(["phi"], capsys)
    _, data = rows(out)
    assert data.shape[1] == 3 and np.all(np.diff(data[:, 0]) > 0)
    assert np.all(data[:, 1] > 0) and np.all(data[:, 2] < 0)


def _ff(out):
    return {k: float(v) for k, v in csv.reader(io.StringIO(out)) if k != "quantity"}


def test_ff_hierarchy(capsys):
    code, out, _ = run(["ff", "--t", "2", "--lambda", "1", "--kmax", "3"], capsys)
    vals = _ff(out)
    assert code == 0 and vals["warning"] == 0
    assert abs(vals["f3"]) < abs(vals["f2"]) < abs(vals["f1"])
    assert vals["f1"] < 0 and vals["trunc_bound"] > 0


def test_ff_warning(capsys):
    code, out, err = run(["ff", "--t", "0.3", "--lambda", "1"], capsys)
    assert code == 0 and _ff(out)["warning"] == 1 and "warning" in err


def test_ff_json(capsys):
    _, out, _ = run(["ff", "--t", "1.5", "--lambda", "0.5", "--kmax", "2", "--format", "json"],
                    capsys)
    body = json.loads(out)
    assert set(body) >= {"f1", "f2", "value", "trunc_bound", "warning", "manifest"}


def test_verify_quick_runtime_and_output(capsys):
    start = time.perf_counter()
    code, out, _ = run(["verify", "--quick"], capsys)
    assert time.perf_counter() - start < 10
    assert code in (0, 1)
    assert out.startswith("PASS  [0] sigma0 constant")
    assert "[5]" not in out and "[8]" not in out


def test_verify_exit_code_follows_results(capsys):
    code, out, _ = run(["verify", "--quick"], capsys)
    assert code == (0 if "FAIL" not in out else 1)


def test_tampered_glaisher_fails(monkeypatch):
    monkeypatch.setattr(specfun, "GLAISHER", specfun.GLAISHER + 1e-3)
    checks = {c.key: c for c in run_suite(quick=True)}
    assert not checks["0"].passed
    code = cli.main(["verify", "--quick", "-o", "/dev/null"])
    assert code == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "boundary_ising.cli", "ff", "--t", "2"],
                         capture_output=True, text=True, check=True).stdout
    assert out.startswith("quantity,value\n")
