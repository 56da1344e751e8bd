import csv
import json

import pytest

from netfhn.cli import main

PATH_GRAPH = {"graph": {"n_vertices": 3, "edges": [[1, 2], [2, 3]]}, "mesh": {"points_per_edge": 8}}


@pytest.fixture
def write_config(tmp_path):
    def _write(obj, name="cfg.json"):
        f = tmp_path / name
        f.write_text(json.dumps(obj))
        return str(f)
    return _write


def test_simulate_without_noise_gives_zero_states(tmp_path, write_config):
    cfg = write_config({**PATH_GRAPH, "noise": {"bands": [{"rate": 0.0, "marks": {"type": "gaussian", "std": 1}}]}})
    assert main(["simulate", "--config", cfg, "--seed", "1", "--out", str(tmp_path / "out")]) == 0
    with open(tmp_path / "out" / "trajectory.csv") as fh:
        fh.readline()
        rows = list(csv.DictReader(fh))
    assert rows and all(float(r["value"]) == 0.0 for r in rows)
    assert (tmp_path / "out" / "jumps.ndjson").read_text() == ""
    manifest = json.loads((tmp_path / "out" / "run.json").read_text())
    assert manifest["schema_version"] == 1 and manifest["seed"] == 1


def test_simulate_is_byte_deterministic(tmp_path, write_config):
    cfg = write_config({**PATH_GRAPH, "initial": {"constant": 0.3}})
    for name in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--seed", "42", "--out", str(tmp_path / name)]) == 0
    for f in ("trajectory.csv", "jumps.ndjson", "run.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert main(["simulate", "--config", cfg, "--seed", "43", "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "jumps.ndjson").read_bytes() != (tmp_path / "a" / "jumps.ndjson").read_bytes()


def test_spectrum_kernel_without_leak(tmp_path, write_config):
    cfg = write_config({**PATH_GRAPH, "vertices": [{"b": 0}] * 3, "require_invertible": False})
    out = tmp_path / "spec.csv"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["index"] == "1"
    assert abs(float(rows[0]["lambda"])) <= 1e-10
    assert len(rows) == 2 * 7 + 3


def test_config_error_exit_code(tmp_path, write_config, capsys):
    cfg = write_config({**PATH_GRAPH, "edges": [{"a": 1.2}, {}]})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "threshold" in capsys.readouterr().err
    assert main(["spectrum", "--config", str(tmp_path / "missing.json"), "--out", "x.csv"]) == 2


def test_runtime_error_exit_code(tmp_path, write_config, monkeypatch):
    import netfhn.cli

    def boom(*_):
        raise FloatingPointError("synthetic failure")
    monkeypatch.setattr(netfhn.cli, "simulate", boom)
    cfg = write_config(PATH_GRAPH)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_verify_writes_reports(tmp_path, write_config):
    cfg = write_config({**PATH_GRAPH, "horizon": 0.5,
                        "verify": {"pairs": 5, "convergence_paths": 1}})
    code = main(["verify", "--config", cfg, "--seed", "0", "--paths", "200", "--out", str(tmp_path / "r")])
    report = json.loads((tmp_path / "r" / "report.json").read_text())
    assert report["schema_version"] == 1
    assert [c["name"] for c in report["checks"]] == ["dissipativity", "isometry", "contraction",
                                                     "sup_moment", "convergence"]
    assert code == (0 if report["passed"] else 1)
    assert len((tmp_path / "r" / "report.txt").read_text().splitlines()) == 5


def test_verify_failure_exit_code(tmp_path, write_config, monkeypatch):
    import netfhn.cli
    from netfhn.verification import CheckReport

    monkeypatch.setattr(netfhn.cli, "run_all", lambda *a, **k: [CheckReport("synthetic", False)])
    assert main(["verify", "--config", write_config(PATH_GRAPH)]) == 1


def test_verify_section_validated(write_config):
    cfg = write_config({**PATH_GRAPH, "verify": {"dt_list": [1e-3, 2e-3]}})
    assert main(["verify", "--config", cfg]) == 2
