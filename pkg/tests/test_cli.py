import csv
import io
import json
import pathlib
import shutil
import subprocess
import sys

import pytest

from cp3 import __version__
from cp3.cli import EXIT_COMPUTATION, EXIT_CONFIG, EXIT_OK, main

CONFIGS = pathlib.Path(__file__).parent.parent / "configs"
ATOMS = {"A": {"k_res": 1.3}, "B": {"k_res": 0.9}, "C": {"k_res": 1.0, "excited": True}}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run_main(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_potential_345(capsys):
    code, out, _ = run_main(capsys, "potential", "--config", str(CONFIGS / "triangle_345.json"))
    assert code == EXIT_OK
    data = json.loads(out)
    assert {"resonant", "nonresonant", "total", "err_estimate"} <= set(data["result"])
    assert data["result"]["sides"] == pytest.approx({"a": 3.0, "b": 4.0, "c": 5.0})
    assert data["provenance"]["version"] == __version__
    assert data["result"]["total"] == data["result"]["resonant"] + data["result"]["nonresonant"]


def test_scan_rows_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = str(CONFIGS / "equilateral_scan.json")
    assert main(["scan", "--config", cfg, "--out", str(out1)]) == EXIT_OK
    assert main(["scan", "--config", cfg, "--out", str(out2), "--threads", "2"]) == EXIT_OK
    text = out1.read_text()
    assert text == out2.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    json.loads(lines[0][2:])
    rows = list(csv.reader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    assert rows[0] == ["d", "resonant", "nonresonant", "total", "err_estimate"]
    ds = [float(r[0]) for r in rows[1:]]
    assert len(ds) == 64 and ds == sorted(ds)


def test_scan_failed_rows_reported(tmp_path, capsys):
    sweep = {"family": "line", "A": [0, 0, 0], "B": [2, 0, 0], "C_from": [1, -1, 0], "C_to": [1, 1, 0], "steps": 3}
    code, out, _ = run_main(capsys, "scan", "--config", write(tmp_path, {"atoms": ATOMS, "geometry": {"sweep": sweep}}))
    assert code == EXIT_OK
    assert "# row 1: CollinearAtoms" in out
    data_rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert data_rows[1].endswith("nan,nan,nan,nan")
    assert "nan" not in data_rows[0] and "nan" not in data_rows[2]


def test_scan_json_format(tmp_path, capsys):
    sweep = {"family": "equilateral", "d_min": 1, "d_max": 2, "steps": 3}
    doc = {"atoms": ATOMS, "geometry": {"sweep": sweep}, "output": {"format": "json"}}
    code, out, _ = run_main(capsys, "scan", "--config", write(tmp_path, doc))
    assert code == EXIT_OK
    assert [r["index"] for r in json.loads(out)["rows"]] == [0, 1, 2]


def test_correlate(capsys):
    code, out, _ = run_main(capsys, "correlate", "--config", str(CONFIGS / "correlate.json"))
    assert code == EXIT_OK
    row = json.loads(out)["correlations"][0]
    assert len(row["total"]) == 3 and all(len(r) == 3 for r in row["total"])
    assert row["err_estimate"] >= 0


def test_tol_override_echoed(capsys):
    code, out, _ = run_main(capsys, "potential", "--config", str(CONFIGS / "triangle_345.json"), "--tol", "1e-6")
    assert code == EXIT_OK
    assert json.loads(out)["provenance"]["config"]["quadrature"]["rel_tol"] == 1e-6


def test_config_errors_exit_2(tmp_path, capsys):
    atoms = {"A": {"k_res": 1.3}, "B": {"k_res": 0.9}, "C": {"k_res": 1.0}}
    code, _, err = run_main(capsys, "potential", "--config", write(tmp_path, {"atoms": atoms}))
    assert code == EXIT_CONFIG and "exactly one atom" in err
    assert run_main(capsys, "potential", "--config", str(tmp_path / "missing.json"))[0] == EXIT_CONFIG
    assert run_main(capsys, "potential")[0] == EXIT_CONFIG
    assert run_main(capsys, "scan", "--config", str(CONFIGS / "triangle_345.json"))[0] == EXIT_CONFIG
    assert run_main(capsys, "potential", "--config", str(CONFIGS / "triangle_345.json"), "--tol", "-1")[0] == EXIT_CONFIG


def test_collinear_exit_1(tmp_path, capsys):
    doc = {"atoms": ATOMS, "geometry": {"positions": {"A": [0, 0, 0], "B": [1, 0, 0], "C": [3, 0, 0]}}}
    code, out, err = run_main(capsys, "potential", "--config", write(tmp_path, doc))
    assert code == EXIT_COMPUTATION
    assert out == "" and "CollinearAtoms" in err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "pot.json"
    code, out, _ = run_main(capsys, "potential", "--config", str(CONFIGS / "triangle_345.json"), "--out", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())["method"] == "closed"


@pytest.mark.skipif(shutil.which("cp3") is None, reason="console script not installed")
def test_console_script_version():
    res = subprocess.run(["cp3", "--version"], capture_output=True, text=True, check=True)
    assert res.stdout.strip() == f"cp3 {__version__}"


def test_module_invocation(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "cp3.cli", "potential", "--config", str(CONFIGS / "triangle_345.json")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert "nonresonant" in res.stdout
