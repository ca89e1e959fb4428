import csv
import json

import pytest

from ulam.cli import main


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else None


def test_build_counterexample(tmp_path):
    code, text = run(tmp_path, "build", "--map", "counterexample", "--cells", "12")
    assert code == 0
    data = json.loads(text)
    assert data["rows"][0] == [[7, 1.0]]
    assert data["config"]["map"] == "counterexample"


def test_build_triplets(tmp_path):
    code, text = run(tmp_path, "build", "--map", "doubling", "--cells", "4",
                     "--format", "triplets")
    assert code == 0 and text.splitlines()[0] == "1 1 0.5"


def test_build_then_stationary(tmp_path):
    m = tmp_path / "m.json"
    assert main(["build", "--map", "doubling", "--cells", "16", "--out", str(m)]) == 0
    code, text = run(tmp_path, "stationary", "--in", str(m))
    data = json.loads(text)
    assert code == 0
    assert data["pi"] == pytest.approx([1 / 16] * 16, abs=1e-12)
    assert data["unique"] and data["n_delta"] == 4


def test_pipeline(tmp_path):
    code, text = run(tmp_path, "pipeline", "--map", "mp", "--alpha", "0.5", "--cells", "4096",
                     "--z", "0.1")
    data = json.loads(text)
    assert code == 0
    assert data["record"]["n_cells"] == 4096 and data["record"]["unique"]
    assert data["config"]["alpha"] == 0.5


def test_check_monotone(tmp_path):
    code, text = run(tmp_path, "check-monotone", "--map", "mp", "--alpha", "1.5",
                     "--trials", "100", "--seed", "1")
    summary = json.loads(text.splitlines()[-1])
    assert code == 0 and summary["passed"] == 100


def test_sweep(tmp_path):
    code, text = run(tmp_path, "sweep", "--alpha", "0.5", "--cells", "64,128", "--z", "0.1")
    lines = text.splitlines()
    assert code == 0 and lines[0].startswith("# ")
    rows = list(csv.DictReader(lines[1:]))
    assert [r["n_cells"] for r in rows] == ["64", "128"]


def test_counterexample(tmp_path):
    code, text = run(tmp_path, "counterexample", "--cells", "12,60,120,240",
                     "--window", "0.0417")
    assert code == 0 and len(text.splitlines()) == 6
    assert run(tmp_path, "counterexample", "--cells", "13")[0] == 1


def test_verify_family(tmp_path):
    code, text = run(tmp_path, "verify-family", "--map", "mp", "--alpha", "0.5")
    assert code == 0 and json.loads(text)["passed"]
    code, text = run(tmp_path, "verify-family", "--map", "counterexample")
    assert code == 2 and not json.loads(text)["passed"]


def test_map_file(tmp_path):
    desc = tmp_path / "map.json"
    desc.write_text(json.dumps([{"domain": [0, 0.5], "kind": "affine", "coefficients": [0, 2]},
                                {"domain": [0.5, 1], "kind": "affine",
                                 "coefficients": [-1, 2]}]))
    code, text = run(tmp_path, "build", "--map", "file", "--map-file", str(desc),
                     "--cells", "4")
    assert code == 0 and json.loads(text)["rows"][0] == [[1, 0.5], [2, 0.5]]


def test_usage_errors(tmp_path):
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    assert main(["build", "--map", "mp", "--cells", "8"]) == 1  # no alpha
    assert main(["build", "--map", "file", "--cells", "8"]) == 1
    assert main(["stationary", "--in", str(tmp_path / "missing.json")]) == 1
    assert main(["build", "--map", "doubling", "--cells", "0"]) == 1


def test_deterministic_output(tmp_path):
    path = tmp_path / "m.json"
    outputs = []
    for _ in range(2):
        main(["build", "--map", "mp", "--alpha", "0.5", "--cells", "256", "--partition",
              "quasi", "--K", "2", "--seed", "5", "--out", str(path)])
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
