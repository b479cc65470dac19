import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from wiretap import __version__
from wiretap.bounds import binary_entropy
from wiretap.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_curve_csv(capsys):
    code, out, err = run(capsys, "curve", "--p-r", "0.03", "--p-a", "0.35", "--n-max", "1000", "--n-steps", "5")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "ell_simple", "ell_smoothed", "ell_aep", "ell_capacity"]
    assert len(rows) == 6
    for row in rows[1:]:
        assert all(float(v) <= float(row[4]) + 1e-9 for v in row[1:4])
    manifest = json.loads(err)
    assert manifest["subcommand"] == "curve" and manifest["version"] == __version__


def test_curve_capacity_only(capsys):
    code, out, _ = run(capsys, "curve", "--p-r", "0.03", "--p-a", "0.35", "--bounds", "capacity", "--n-max", "100", "--n-steps", "3")
    assert code == EXIT_OK
    for line in out.splitlines()[1:]:
        n, s, sm, aep, cap = line.split(",")
        assert (s, sm, aep) == ("", "", "")
        assert float(cap) == pytest.approx(int(n) * (binary_entropy(0.35) - binary_entropy(0.03)), rel=1e-5)


def test_curve_adversary_better(capsys, tmp_path):
    out_file = tmp_path / "curve.csv"
    code, _, err = run(capsys, "curve", "--p-r", "0.35", "--p-a", "0.03", "--n-max", "1000", "--n-steps", "4", "--out", str(out_file))
    assert code == EXIT_OK and "warning" in err
    rows = list(csv.reader(out_file.open()))[1:]
    assert all(float(v) == 0.0 for row in rows for v in row[1:])
    manifest = json.loads(Path(f"{out_file}.manifest.json").read_text())
    assert manifest["flags_raised"]


@pytest.mark.parametrize("argv", [
    ["curve", "--p-r", "1.5", "--p-a", "0.35"],
    ["curve", "--p-r", "0.03", "--p-a", "0.35", "--bounds", "magic"],
    ["bound", "--kind", "wiretap2", "--ell", "1"],
    ["bound", "--kind", "bsc-smoothed", "--ell", "1", "--k", "5", "--n", "20", "--p-a", "0.35"],
    ["simulate", "--config", "/nonexistent.json"],
    ["simulate", "--config", str(CONFIGS / "noiseless.json"), "--trials", "0"],
])
def test_usage_errors(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects some flags itself
        code = exc.code
    assert code == EXIT_USAGE


def test_bound_wiretap2(capsys):
    code, out, _ = run(capsys, "bound", "--kind", "wiretap2", "--ell", "1", "--q", "2", "--k", "4")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["bound"]["epsilon_sec_rm"] == pytest.approx(0.353553, abs=1e-6)
    assert doc["bound"]["source"] == "wiretap2"
    assert doc["manifest"]["flags"]["kind"] == "wiretap2"


def test_bound_bsc_smoothed_auto_delta(capsys):
    code, out, _ = run(capsys, "bound", "--kind", "bsc-smoothed", "--ell", "100", "--k", "9000", "--n", "10000", "--p-a", "0.35", "--auto-delta")
    assert code == EXIT_OK
    params = json.loads(out)["bound"]["params"]
    assert 0 < params["delta"] < 0.35


def test_bound_aep_with_channel_file(capsys, tmp_path):
    chan = tmp_path / "bsc.json"
    chan.write_text(json.dumps({"inputs": 2, "outputs": 2, "rows": [[0.65, 0.35], [0.35, 0.65]]}))
    code, out, _ = run(capsys, "bound", "--kind", "aep", "--ell", "10", "--k", "800", "--n", "1000", "--channel", str(chan))
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["bound"]["params"]["entropy"] == pytest.approx(binary_entropy(0.35))
    assert str(chan) in doc["manifest"]["inputs"]


def test_simulate_noiseless(capsys):
    code, out, _ = run(capsys, "simulate", "--config", str(CONFIGS / "noiseless.json"), "--trials", "500", "--exact")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["correctness"]["rm_message_error"] == 0.0
    assert doc["secrecy"]["epsilon_sec_rm"] == pytest.approx(0.0, abs=1e-12)


def test_simulate_wiretap2_demo(capsys):
    code, out, _ = run(capsys, "simulate", "--config", str(CONFIGS / "wiretap2_demo.json"), "--trials", "200", "--exact")
    assert code == EXIT_OK
    assert json.loads(out)["secrecy"]["epsilon_sec_rm"] <= 0.353554


def test_simulate_is_reproducible(capsys, tmp_path):
    outs = []
    target = tmp_path / "run.json"
    for _ in range(2):
        assert main(["simulate", "--config", str(CONFIGS / "hamming_bsc.json"), "--trials", "3000", "--seed", "11", "--out", str(target)]) == EXIT_OK
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    capsys.readouterr()


def test_verify_small(capsys, tmp_path):
    report = tmp_path / "verify.json"
    code, out, _ = run(capsys, "verify", "--json", str(report))
    assert code == EXIT_OK
    assert out.count("PASS") == len(json.loads(report.read_text())["suites"])


def test_verify_catches_mutated_inverter(capsys):
    code, out, err = run(capsys, "verify", "--mutate-inverter")
    assert code == EXIT_FAIL
    assert "FAIL" in out and "counterexample in inverter" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wiretap", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
