import csv
import json
from pathlib import Path

import numpy as np
import pytest

from interlab.cli import main, parse_extras, split_run_args
from interlab.errors import ScenarioError
from interlab.events import example1_model
from interlab.experiment import example1, example2, example3
from interlab.report import emit_report, report_dict
from interlab.scenarios import BUILTINS, Result, ScenarioSpec, builtin_spec, coerce_params, list_scenarios, run_scenario, thread_count
from interlab.serialize import encode_matrix, encode_triple

CATALOG = [
    "double-slit",
    "multi-slit",
    "example1",
    "example2",
    "example2-electron",
    "example3",
    "thm1-complete",
    "thm2-case1",
    "thm2-case2",
    "appendix5",
    "event-example1",
    "sorkin-null",
    "helstrom-suite",
]


def read_dir(path: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def write_spec(tmp_path, data, name="spec.json") -> str:
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_catalog_contents_and_order(capsys):
    assert [name for name, _, _ in list_scenarios()] == CATALOG
    assert list_scenarios() == list_scenarios()
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines] == CATALOG


@pytest.mark.parametrize("name", CATALOG)
def test_every_builtin_exits_zero(name, tmp_path, capsys):
    assert main(["run", "--builtin", name, "--out", str(tmp_path), "--quiet"]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert list(report) == ["name", "kind", "seed", "parameters", "summary", "checks", "tables"]
    assert report["kind"] == BUILTINS[name].kind
    assert all(c["passed"] for c in report["checks"])


def test_example2_report(tmp_path):
    assert main(["run", "--builtin", "example2", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "table.csv").read_text().splitlines()
    assert lines == [
        "a,P(0|a),P(1|a)",
        "00,1.000000000000,0.000000000000",
        "01,0.000000000000,1.000000000000",
        "10,0.000000000000,1.000000000000",
        "11,1.000000000000,0.000000000000",
    ]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["summary"]["I_2"] == 0.5


def test_example3_complete_writes_half_delta(tmp_path):
    assert main(["run", "--builtin", "example3", "--n", "2", "--complete", "--out", str(tmp_path), "--quiet"]) == 0
    rows = list(csv.reader((tmp_path / "mediators.csv").open()))
    assert rows[0] == ["a", "branch", "P(00|a)", "P(01|a)", "P(10|a)", "P(11|a)"]
    assert {r[1] for r in rows[1:]} == {"all", "{0,2}|{1,3}", "{0,3}|{1,2}"}
    for row in rows[1:]:
        a, _, *probs = row
        parity = sum(map(int, a)) % 2
        want = [0.5 if (b.bit_count() % 2) == parity else 0.0 for b in range(4)]
        assert [float(p) for p in probs] == want
    assert main(["verify", str(tmp_path / "artifact.json")]) == 0


def test_sorkin_null_seed7(tmp_path):
    assert main(["run", "--builtin", "sorkin-null", "--n", "1", "--m", "3", "--samples", "200", "--seed", "7", "--out", str(tmp_path), "--quiet"]) == 0
    summary = json.loads((tmp_path / "report.json").read_text())["summary"]
    assert summary["max_abs_I_3"] <= 1e-9
    assert summary["max_abs_slit_I_3"] <= 1e-9


def test_same_seed_gives_identical_bytes(tmp_path):
    for k in (1, 2):
        assert main(["run", "--builtin", "thm1-complete", "--samples", "4", "--seed", "11", "--out", str(tmp_path / str(k)), "--quiet"]) == 0
    assert read_dir(tmp_path / "1") == read_dir(tmp_path / "2")


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    for k in ("1", "4"):
        monkeypatch.setenv("INTERLAB_THREADS", k)
        assert main(["run", "--builtin", "sorkin-null", "--samples", "30", "--seed", "3", "--out", str(tmp_path / k), "--quiet"]) == 0
    assert read_dir(tmp_path / "1") == read_dir(tmp_path / "4")


def test_seed_changes_samples(tmp_path):
    for s in ("1", "2"):
        assert main(["run", "--builtin", "helstrom-suite", "--samples", "3", "--povms", "5", "--seed", s, "--out", str(tmp_path / s), "--quiet"]) == 0
    assert read_dir(tmp_path / "1") != read_dir(tmp_path / "2")


def test_thread_env_validation(monkeypatch):
    monkeypatch.delenv("INTERLAB_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("INTERLAB_THREADS", "3")
    assert thread_count() == 3
    for bad in ("zero", "0", "-2"):
        monkeypatch.setenv("INTERLAB_THREADS", bad)
        with pytest.raises(ScenarioError):
            thread_count()
    assert main(["run", "--builtin", "example1", "--out", "/tmp/interlab-never"]) == 2


def test_empty_result_is_valid_json(tmp_path):
    spec = ScenarioSpec("empty", "semi_general", {})
    paths = emit_report(spec, Result(), tmp_path)
    data = json.loads(paths[0].read_text())
    assert data["tables"] == [] and data["checks"] == []
    assert [p.name for p in paths] == ["report.json"]


def test_report_rounding():
    res = Result()
    res.summary["x"] = -1e-15
    res.summary["y"] = 1 / 3
    d = report_dict(ScenarioSpec("r", "semi_general", {}), res)
    assert d["summary"] == {"x": 0.0, "y": 0.333333333333}
    assert str(d["summary"]["x"]) == "0.0"


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--builtin", "nope"],
        ["run", "--builtin", "example3", "--zz", "1"],
        ["run", "--builtin", "example3", "--n", "two"],
        ["run", "--builtin", "appendix5", "--p11", "0.3", "--p12", "0.3"],
        ["run"],
        ["frobnicate"],
        ["verify", "/nonexistent/artifact.json"],
    ],
)
def test_bad_input_exits_two(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_unwritable_output_exits_two():
    assert main(["run", "--builtin", "example1", "--out", "/proc/interlab-out"]) == 2


def test_bad_spec_files_exit_two(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    assert main(["run", str(bad_json)]) == 2
    assert main(["run", write_spec(tmp_path, {"kind": "wormhole"})]) == 2
    assert main(["run", write_spec(tmp_path, {"kind": "slit", "builtin": "example2"})]) == 2
    assert main(["run", write_spec(tmp_path, {"kind": "slit", "colour": 1})]) == 2
    assert main(["run", write_spec(tmp_path, {"kind": "slit", "seed": -1})]) == 2
    assert main(["run", write_spec(tmp_path, {"kind": "semi_general", "parameters": {}})]) == 2


def test_spec_validation():
    with pytest.raises(ScenarioError):
        ScenarioSpec("x", "wormhole", {})
    with pytest.raises(ScenarioError):
        ScenarioSpec("x", "slit", {}, seed=2**64)
    with pytest.raises(ScenarioError):
        ScenarioSpec("x", "slit", {}, formats=("xml",))
    with pytest.raises(ScenarioError):
        coerce_params(BUILTINS["multi-slit"], {"m": [3]})
    assert coerce_params(BUILTINS["sorkin-null"], {"d-max": 2})["d_max"] == 2
    assert builtin_spec("example3", {"n": 3}).parameters == {"n": 3}


def test_argument_splitting():
    known, extras = split_run_args(["--builtin", "example3", "--n", "2", "--complete", "--seed=4", "--quiet"])
    assert known == ["--builtin", "example3", "--seed=4", "--quiet"]
    assert extras == ["--n", "2", "--complete"]
    assert parse_extras(extras) == {"n": 2, "complete": True}
    assert parse_extras(["--name=abc", "--x", "[1, 2]"]) == {"name": "abc", "x": [1, 2]}


def test_inline_semi_general(tmp_path):
    spec = {"name": "ex1", "kind": "semi_general", "parameters": {"triple": encode_triple(example1()), "expect_maximal": True}}
    assert main(["run", write_spec(tmp_path, spec), "--out", str(tmp_path / "a"), "--quiet"]) == 0
    # a non-maximal table declared maximal fails its check with a residual table
    dim = len(spec["parameters"]["triple"]["povm"][0])
    spec["parameters"]["triple"]["povm"] = [encode_matrix(np.eye(dim) / 2)] * 2
    assert main(["run", write_spec(tmp_path, spec), "--out", str(tmp_path / "b")]) == 1


def test_inline_completion_and_verify(tmp_path, capsys):
    spec = {"kind": "completion", "seed": 5, "parameters": {"triple": encode_triple(example3(2))}, "output": {"dir": str(tmp_path)}}
    assert main(["run", write_spec(tmp_path, spec, "s.json"), "--quiet"]) == 0
    assert main(["verify", str(tmp_path / "artifact.json")]) == 0
    out = capsys.readouterr().out
    assert "chain" in out and "FAIL" not in out


def test_verify_bare_triple_fails(tmp_path, capsys):
    path = write_spec(tmp_path, encode_triple(example2()), "t.json")
    assert main(["verify", path]) == 1
    assert "mediators_present" in capsys.readouterr().out


def test_verify_tampered_artifact_fails(tmp_path):
    assert main(["run", "--builtin", "example3", "--complete", "--out", str(tmp_path), "--quiet"]) == 0
    art = json.loads((tmp_path / "artifact.json").read_text())
    u = np.asarray(art["branches"][0]["unitaries"][0], dtype=float)
    art["branches"][0]["unitaries"][0] = u[::-1].tolist()
    bad = write_spec(tmp_path, art, "bad.json")
    assert main(["verify", bad]) == 1


def test_inline_slit(tmp_path):
    f = np.fft.fft(np.eye(3), norm="ortho")
    spec = {
        "kind": "slit",
        "parameters": {"input_state": encode_matrix(np.ones(3) / np.sqrt(3)), "propagation": encode_matrix(f), "screen_positions": [0, 1, 2]},
    }
    assert main(["run", write_spec(tmp_path, spec), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert any(c["name"] == "higher_order_null" for c in report["checks"])


def test_inline_event_model(tmp_path):
    spec = {"kind": "event_model", "parameters": {"model": example1_model().to_dict(), "X": ["x1", "x2"], "y": "y"}}
    assert main(["run", write_spec(tmp_path, spec), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["summary"]["I_2"] == 0.5
    assert report["summary"]["closed"] is True


def test_inline_fock_and_property_suite(tmp_path):
    assert main(["run", write_spec(tmp_path, {"kind": "fock", "parameters": {"process": "photon"}}), "--out", str(tmp_path / "f"), "--quiet"]) == 0
    assert main(["run", write_spec(tmp_path, {"kind": "property_suite"}), "--out", str(tmp_path / "p")]) == 2


def test_file_spec_with_builtin_and_overrides(tmp_path):
    spec = {"kind": "property_suite", "builtin": "sorkin-null", "seed": 9, "parameters": {"samples": 5}}
    path = write_spec(tmp_path, spec)
    assert main(["run", path, "--d_max", "2", "--out", str(tmp_path / "o"), "--format", "json", "--quiet"]) == 0
    assert [p.name for p in (tmp_path / "o").iterdir()] == ["report.json"]
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["seed"] == 9
    assert report["parameters"]["samples"] == 5 and report["parameters"]["d_max"] == 2


def test_run_scenario_api():
    res = run_scenario(builtin_spec("double-slit", {}))
    assert res.passed
    res = run_scenario(builtin_spec("example2-electron", {"process": "electron"}))
    assert res.passed
