import json
import shutil
import subprocess

import pytest

from crspectra.cli import main
from crspectra.spectrum import SpectrumTable


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_standard_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--group", "C:1", "--max-degree", "2")
    assert code == 0
    S = SpectrumTable.loads(out)
    assert [(e.eigenvalue, e.multiplicity) for e in S.entries] == [(0, 6), (2, 2), (4, 6)]


def test_degree_zero_window(capsys):
    code, out, _ = run(capsys, "spectrum", "--group", "C:1", "--max-degree", "0")
    assert code == 0
    assert json.loads(out)["entries"] == [{"eigenvalue": "0", "multiplicity": 1, "sources": [{"p": 0, "q": 0}]}]


def test_rossi_spectrum_csv_and_table(capsys):
    code, out, _ = run(capsys, "spectrum", "--structure", "rossi", "--group", "C:2", "--t", "1/2", "--max-degree", "8", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "eigenvalue,lo,hi,multiplicity,sources"
    code, out, _ = run(capsys, "spectrum", "--structure", "rossi", "--group", "C:2", "--t", "1/2", "--max-degree", "4", "--format", "table")
    assert code == 0 and "multiplicity" in out.splitlines()[0]


def test_output_file_round_trip(capsys, tmp_path):
    path = tmp_path / "s.json"
    assert main(["spectrum", "--group", "Dic:2", "--max-degree", "600", "--max-eigenvalue", "1200", "-o", str(path)]) == 0
    code, out, _ = run(capsys, "hear", "--input", str(path), "--format", "json")
    assert code == 0
    assert json.loads(out)["final_order"] == 8


def test_hear_group_window(capsys):
    code, out, _ = run(capsys, "hear", "--group", "C:7", "--window", "500", "--format", "table")
    assert code == 0
    assert "order 7" in out and "parity odd" in out


def test_hear_unstable_exit(capsys):
    code, _, err = run(capsys, "hear", "--group", "2I", "--window", "25")
    assert code == 4
    assert "not stabilized" in err


def test_hear_needs_one_source(capsys):
    assert run(capsys, "hear")[0] == 2


def test_verify_subset_and_list(capsys):
    code, out, _ = run(capsys, "verify", "--list")
    assert code == 0 and "paper-formula-discrepancies" in out
    code, out, _ = run(capsys, "verify", "--only", "eigenrelation,printed-formulas", "--only", "even-constant", "--format", "table")
    assert code == 0
    assert sum(line.startswith("[PASS]") for line in out.splitlines()) == 3


def test_verify_discrepancy_report(capsys):
    code, out, _ = run(capsys, "verify", "--only", "paper-formula-discrepancies", "--format", "json")
    assert code == 0
    text = "\n".join(json.loads(out)[0]["details"])
    assert "d=3, k=5: direct count 2" in text


def test_verify_unknown_property(capsys):
    assert run(capsys, "verify", "--only", "nope")[0] == 2


def test_dims(capsys):
    code, out, _ = run(capsys, "dims", "--group", "Dic:3", "--max-degree", "12")
    assert code == 0
    assert json.loads(out)["dims"] == [1, 0, 0, 0, 1, 0, 1, 0, 2, 0, 1, 0, 3]


def test_embeddable_with_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"group": "C:3", "t": "1/2", "max_degree": 41, "windows": "11,21,41"}))
    code, out, _ = run(capsys, "embeddable", "--config", str(cfg), "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "non-embeddable" and rep["minima_decreasing"]
    # explicit flags override the config
    code, out, _ = run(capsys, "embeddable", "--config", str(cfg), "--group", "C:2", "--max-degree", "20", "--windows", "20")
    assert json.loads(out)["verdict"] == "embeddable"


def test_gershgorin(capsys):
    code, out, _ = run(capsys, "gershgorin", "--degree", "4", "--t", "1/2", "--bound", "3", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [(r["lo"], r["hi"], r["lo_ge_bound"]) for r in rows] == [(4.0, 10.0, True), (2.5, 8.5, False)]
    assert run(capsys, "gershgorin", "--degree", "5", "--t", "1/2")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--group", "C:0", "--max-degree", "3"],
        ["spectrum", "--group", "C:2", "--max-degree", "3", "--t", "1/2"],
        ["spectrum", "--structure", "rossi", "--group", "C:2", "--max-degree", "3"],
        ["spectrum", "--structure", "rossi", "--group", "C:2", "--max-degree", "3", "--t", "3/5,4/5"],
        ["spectrum", "--group", "C:2", "--max-degree", "-1"],
        ["embeddable", "--group", "C:2", "--t", "1/2", "--max-degree", "4", "--windows", "a,b"],
        ["nonsense"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_input_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"structure": "standard"}')
    assert run(capsys, "hear", "--input", str(bad))[0] == 2


@pytest.mark.skipif(shutil.which("crspectra") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["crspectra", "dims", "--group", "C:2", "--max-degree", "4", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["k,dim", "0,1", "1,0", "2,3", "3,0", "4,5"]


def test_dims_printed_formula_column(capsys):
    code, out, _ = run(capsys, "dims", "--group", "C:3", "--max-degree", "11", "--paper-formula")
    assert code == 0
    obj = json.loads(out)
    assert obj["dims"][5] == 2 and obj["printed_formula"][5] == 1
    assert 5 in obj["mismatches"]
    code, out, _ = run(capsys, "dims", "--group", "C:6", "--max-degree", "40", "--paper-formula")
    assert json.loads(out)["mismatches"] == []
    assert run(capsys, "dims", "--group", "Dic:2", "--max-degree", "4", "--paper-formula")[0] == 2


def test_parallel_output_is_byte_identical(capsys):
    argv = ["spectrum", "--structure", "rossi", "--group", "C:3", "--t", "1/2,0", "--max-degree", "15"]
    _, serial, _ = run(capsys, *argv, "--jobs", "1")
    _, parallel, _ = run(capsys, *argv, "--jobs", "2")
    assert serial == parallel
