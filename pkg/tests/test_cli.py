import io
import json
import subprocess
import sys

import pytest

from substep.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_tableau_example():
    code, out, err = call("tableau", "--scheme", "3", "--rho-inf", "0.0")
    assert code == 0 and err == ""
    assert "# gamma1=0.87173304301692245" in out
    assert rows(out)[0].startswith("i,gamma,alpha_0")
    assert len(rows(out)) == 5


def test_scheme_seven_is_a_domain_error():
    code, out, err = call("tableau", "--scheme", "7", "--rho-inf", "0.5")
    assert code == 1
    assert "s <= 6" in err
    assert err.count("\n") == 1 and err.startswith("error: ")


def test_missing_rho_inf():
    code, _, err = call("tableau", "--scheme", "4")
    assert code == 1 and "rho" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["tableau", "--scheme", "3", "--rho-inf", "0", "--bogus"],
        ["tableau", "--schem", "3", "--rho-inf", "0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 1
    assert err.startswith("error: usage:")


def test_spectral_csv():
    code, out, _ = call("spectral", "--scheme", "4", "--rho-inf", "0.5", "--points", "5", "--log")
    assert code == 0
    body = rows(out)
    assert body[0] == "Omega,A1,A2,rho,amplitude_decay_pct,period_error"
    assert len(body) == 6
    assert all(len(r.split(",")) == 6 for r in body[1:])


def test_spectral_bad_grid():
    code, _, _ = call("spectral", "--scheme", "4", "--rho-inf", "0.5", "--omega-min", "2", "--omega-max", "1")
    assert code == 1


def test_stability_reports_stable():
    code, out, _ = call("stability", "--scheme", "5", "--rho-inf", "0.0", "--points", "50")
    assert code == 0
    assert rows(out)[1].startswith("true,")


def test_converge_slopes():
    code, out, _ = call("converge", "--model", "sdof48", "--scheme", "3", "--rho-inf", "0",
                        "--dts", "0.1,0.05,0.025,0.0125")
    assert code == 0
    orders = dict(line[2:].split("=") for line in out.splitlines() if line.startswith("# order_"))
    for q in "UVA":
        assert abs(float(orders[f"order_{q}"]) - 3) <= 0.25
    assert rows(out)[0] == "dt,error_U,error_V,error_A"


def test_simulate_builtin(tmp_path):
    target = tmp_path / "traj.csv"
    code, out, _ = call("simulate", "--model", "pendulum", "--scheme", "3", "--rho-inf", "1",
                        "--dt", "0.1", "--t-end", "0.5", "--out", str(target))
    assert code == 0 and out == ""
    body = rows(target.read_text())
    assert body[0] == "t,U_0,V_0,A_0"
    assert len(body) == 7


def test_simulate_model_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({
        "M": [[1, 0], [0, 2]], "C": [[0.1, 0], [0, 0.1]], "K": [[4, -1], [-1, 2]],
        "load": {"kind": "sin", "amplitude": [1, 0], "frequency": 2.0},
        "U0": [0.1, 0], "V0": [0, 0],
    }))
    code, out, err = call("simulate", "--model", str(path), "--scheme", "4", "--rho-inf", "0.5",
                          "--dt", "0.05", "--t-end", "1")
    assert code == 0, err
    body = rows(out)
    assert body[0] == "t,U_0,U_1,V_0,V_1,A_0,A_1"
    assert len(body) == 22


def test_model_file_with_singular_mass(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"M": [[0.0]], "K": [[1.0]], "U0": [1.0]}))
    code, _, err = call("simulate", "--model", str(path), "--scheme", "3", "--rho-inf", "0.5",
                        "--dt", "0.1", "--t-end", "1")
    assert code == 2
    assert "NumericalError" in err


@pytest.mark.parametrize("payload", [{"M": [[1.0]]}, {"M": [[1.0]], "K": [[1.0]], "mass": 1},
                                     {"M": [[1.0]], "K": [[1.0]], "load": {"kind": "step"}}])
def test_model_file_validation(tmp_path, payload):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(payload))
    code, _, _ = call("simulate", "--model", str(path), "--scheme", "3", "--rho-inf", "0.5",
                      "--dt", "0.1", "--t-end", "1")
    assert code == 1


def test_unknown_model():
    code, _, err = call("simulate", "--model", "nope", "--scheme", "3", "--rho-inf", "0.5",
                        "--dt", "0.1", "--t-end", "1")
    assert code == 1 and "sdof48" in err


def test_output_is_deterministic():
    argv = ["spectral", "--scheme", "6", "--rho-inf", "0.3", "--points", "7"]
    assert call(*argv)[1] == call(*argv)[1]


def test_verify_subset():
    code, out, _ = call("verify", "--criteria", "1,2")
    assert code == 0
    assert [line.split()[0] for line in rows(out)] == ["[PASS]", "[PASS]"]


def test_verify_unknown_criterion():
    code, _, _ = call("verify", "--criteria", "11")
    assert code == 1


def test_help_lists_every_flag():
    proc = subprocess.run([sys.executable, "-m", "substep", "simulate", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for flag in ("--model", "--scheme", "--rho-inf", "--dt", "--t-end", "--stride", "--out"):
        assert flag in proc.stdout


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "substep", "tableau", "--scheme", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "# gamma1=1" in proc.stdout
