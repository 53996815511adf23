import json
import subprocess
import sys

import pytest

from pentaweights.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def checks(report):
    return {c["name"]: c for c in report["checks"]}


def test_verify_33_one(capsys):
    code, report = run(capsys, "verify-33-one")
    assert code == 0
    assert report["schema"] == 1 and report["status"] == "pass"
    assert "closed_form" in checks(report)


def test_canonical(capsys):
    code, report = run(capsys, "one-boson-canonical")
    assert code == 0
    assert checks(report)["edge_table"]["status"] == "pass"


@pytest.mark.parametrize("command", ["one-boson-identities", "one-boson-gauge", "two-boson-cocycle",
                                     "two-boson-delta", "two-boson-gauge", "verify-33-two"])
def test_small_runs_pass(capsys, command):
    code, report = run(capsys, command, "--trials", "2", "--seed", "7")
    assert code == 0, report
    assert all(c["status"] != "fail" for c in report["checks"])


def test_unit_chain_minor(capsys, tmp_path):
    path = tmp_path / "nu.json"
    nu = {f"{i}{j}": 1 for i in range(1, 6) for j in range(i + 1, 6)}
    path.write_text(json.dumps({"nu": nu}))
    code, report = run(capsys, "two-boson-delta", "--input", str(path))
    assert code == 0
    assert report["data"]["minor"] == "32"


def test_failure_carries_witness(capsys, tmp_path):
    path = tmp_path / "nu.json"
    nu = {f"{i}{j}": 1 for i in range(1, 6) for j in range(i + 1, 6)}
    nu["24"] = -1
    path.write_text(json.dumps({"nu": nu}))
    code, report = run(capsys, "two-boson-delta", "--input", str(path))
    assert code == 1
    failed = [c for c in report["checks"] if c["status"] == "fail"]
    assert failed and failed[0]["witness"]["input"]["24"] == "-1"


def test_finite_field(capsys):
    code, report = run(capsys, "oracle-finite-field", "--p", "5", "--char-index", "2")
    assert code == 0
    assert report["data"]["p"] == 5


def test_characteristic_two_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["oracle-finite-field", "--p", "2"])
    assert exc.value.code == 2


def test_unreadable_input(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["verify-33-two", "--input", str(bad)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_reports_are_reproducible(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        assert main(["one-boson-gauge", "--trials", "5", "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pentaweights", "one-boson-canonical"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
