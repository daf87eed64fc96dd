import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from usc_sec import cli

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden"
NET = DATA / "netlists"

GOLDEN_RUNS = {
    "spectrum_g0.1.csv": ["spectrum", "--g", "0.1", "--points", "11"],
    "lossrates_g0.1.csv": ["lossrates", "--g", "0.1", "--points", "11"],
    "lossrates_g0.01.csv": ["lossrates", "--g", "0.01", "--points", "11"],
    "lossrates_general_g0.1.csv": ["lossrates", "--g", "0.1", "--points", "11",
                                   "--flavor", "general"],
    "lossrates_standard_gsweep.csv": ["lossrates", "--gmin", "0", "--gmax", "0.3", "--wz",
                                      "0.9", "--points", "7", "--flavor", "standard"],
    "inout_g0.1.csv": ["inout", "--g", "0.1", "--omin", "0.85", "--omax", "1.15",
                       "--npts", "31"],
    "spectrum_netlist_a.csv": ["spectrum", "--netlist",
                               str(NET / "valid" / "lc_circuit_a.net"), "--points", "5"],
}


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_outputs(name, capsys):
    code, out, _ = run(GOLDEN_RUNS[name], capsys)
    assert code == 0
    assert out == (GOLDEN / name).read_text()


def test_golden_rates_agree_with_frozen_oracle():
    _, data = table((GOLDEN / "lossrates_g0.1.csv").read_text())
    row = data[data[:, 0] == 1.0][0]
    assert np.allclose(row[1:5], [0.45024814048949, 0.54975185951050,
                                  0.30201072757020, 0.81958927242980], rtol=1e-10)


def test_uncoupled_spectrum_is_straight_lines(capsys):
    code, out, _ = run(["spectrum", "--g", "0", "--wmin", "0.5", "--wmax", "0.9",
                        "--points", "5"], capsys)
    assert code == 0
    _, d = table(out)
    assert np.allclose(d[:, 1], d[:, 0]) and np.allclose(d[:, 2], 1.0)


def test_circuits_share_spectrum(capsys):
    _, out, _ = run(["spectrum", "--g", "0.2", "--points", "21"], capsys)
    cols, d = table(out)
    assert cols[1:3] == ["omega_L^A[omega_x]", "omega_U^A[omega_x]"]
    assert np.array_equal(d[:, 1:3], d[:, 3:5])


def test_g_sweep_column(capsys):
    _, out, _ = run(["spectrum", "--gmin", "0", "--gmax", "0.5", "--points", "6"], capsys)
    cols, d = table(out)
    assert cols[0] == "g"
    assert np.allclose(d[:, 0], np.linspace(0, 0.5, 6))


def test_thread_count_does_not_change_output(capsys, monkeypatch):
    argv = ["lossrates", "--g", "0.1", "--points", "33"]
    monkeypatch.setenv("USC_THREADS", "1")
    _, one, _ = run(argv, capsys)
    monkeypatch.setenv("USC_THREADS", "4")
    _, four, _ = run(argv, capsys)
    assert one == four


def test_json_format(capsys):
    _, out, _ = run(["lossrates", "--g", "0.1", "--points", "3", "--format", "json"], capsys)
    doc = json.loads(out)
    assert set(doc) == {"meta", "columns", "rows"}
    assert doc["meta"]["command"] == "lossrates" and doc["meta"]["flavor"] == "straightforward"
    assert len(doc["rows"]) == 3 and all(len(r) == len(doc["columns"]) for r in doc["rows"])


def test_out_file(tmp_path, capsys):
    target = tmp_path / "s.csv"
    code, out, _ = run(["spectrum", "--points", "3", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("omega_z[omega_x],")


def test_master_ground_state_is_stationary(capsys):
    code, out, _ = run(["master", "--g", "0.1", "--dims", "12", "--levels", "6",
                        "--initial", "ground", "--t-final", "200", "--samples", "4"], capsys)
    assert code == 0
    cols, d = table(out)
    assert cols[:3] == ["t[1/omega_x]", "p0", "p1"]
    assert np.allclose(d[:, 1], 1.0, atol=1e-12)


def test_master_excited_state_decays(capsys):
    code, out, _ = run(["master", "--g", "0.1", "--kappa0", "0.01", "--dims", "12",
                        "--levels", "6", "--initial", "eigen:1", "--samples", "10"], capsys)
    assert code == 0
    _, d = table(out)
    # default run time 10/kappa0, kappa_L about 0.45 kappa0
    assert d[-1, 1] > 0.98 and d[0, 2] == 1.0


def test_master_thermal_reduced_temperature(capsys):
    code, out, _ = run(["master", "--g", "0.1", "--dims", "10", "--levels", "6",
                        "--initial", "thermal", "--temp-reduced", "0.3", "--t-final", "100",
                        "--samples", "2"], capsys)
    assert code == 0
    _, d = table(out)
    # a Gibbs state of the eigenbasis is stationary only approximately (rates differ),
    # but populations must stay normalized
    assert np.allclose(d[:, 1:7].sum(axis=1), 1.0, atol=1e-10)


def test_master_kelvin_with_netlist(capsys):
    code, _, _ = run(["master", "--netlist", str(NET / "valid" / "lc_circuit_b.net"),
                      "--dims", "10", "--levels", "4", "--temp", "0.02", "--t-final", "10",
                      "--samples", "2"], capsys)
    assert code == 0


def test_inout_dips(capsys):
    _, out, _ = run(["inout", "--g", "0.1", "--npts", "4001"], capsys)
    _, d = table(out)
    assert np.allclose(np.hypot(d[:, 1], d[:, 2]), 1.0, atol=1e-11)
    # two transitions inside the window: phase runs from about -4pi up to about 0
    assert d[0, 3] < -4 * np.pi + 0.1 and d[-1, 3] > -0.1


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["spectrum", "--points", "1"],
    ["spectrum", "--wmin", "1.5", "--wmax", "0.5"],
    ["spectrum", "--gmin", "0.1"],
    ["lossrates", "--flavor", "quantum"],
    ["master", "--temp", "0.02"],
    ["master", "--temp", "0.02", "--temp-reduced", "0.1"],
    ["master", "--initial", "eigen:99", "--dims", "6", "--levels", "4"],
    ["master", "--initial", "coherent", "--dims", "6", "--levels", "4"],
    ["inout", "--omin", "2", "--omax", "1"],
    ["spectrum", "--netlist", "/nonexistent/file.net"],
    ["spectrum", "--netlist", str(NET / "valid" / "lc_no_qubit.net")],
])
def test_usage_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == cli.EXIT_USAGE
    assert out == "" and err


def test_netlist_diagnostics_exit_code(capsys):
    path = NET / "invalid" / "negative_value.net"
    code, out, err = run(["spectrum", "--netlist", str(path)], capsys)
    assert code == cli.EXIT_PARSE
    assert f"{path}:line 5: error" in err


def test_numeric_failure_exit_code(capsys):
    # dt far above the stability gate
    code, _, err = run(["master", "--g", "0.1", "--kappa0", "0.01", "--dims", "6",
                        "--levels", "4", "--dt", "50", "--t-final", "100"], capsys)
    assert code in (cli.EXIT_USAGE, cli.EXIT_NUMERIC)
    assert err


def test_module_entry_point_is_byte_deterministic():
    argv = [sys.executable, "-m", "usc_sec.cli", "lossrates", "--g", "0.1", "--points", "5"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"omega_z[omega_x],")
