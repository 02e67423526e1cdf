import json

import numpy as np
import pytest

from qpool.cli import main
from qpool.serialize import (
    density_to_dict,
    scenario_to_dict,
    write_json,
)
from qpool.scenario import random_choi_scenario
from qpool.states import DensityOperator


@pytest.fixture
def density_files(tmp_path):
    paths = {}
    mats = {
        "alpha": np.diag([0.5, 0.25, 0.25, 0.0]),
        "beta": np.diag([0.25, 0.25, 0.25, 0.25]),
        "rho": np.diag([0.25, 0.25, 0.25, 0.25]),
    }
    for name, m in mats.items():
        p = tmp_path / f"{name}.json"
        write_json(p, density_to_dict(DensityOperator(m)))
        paths[name] = str(p)
    return paths


@pytest.mark.parametrize(
    "name", ["example224", "ghz", "classical-redundant", "classical-independent"]
)
def test_demos_pass(name, capsys):
    assert main(["demo", name]) == 0
    out = capsys.readouterr().out
    assert "verdict: PASS" in out


def test_demo_writes_report(tmp_path, capsys):
    out_path = tmp_path / "demo.json"
    assert main(["demo", "example224", "--out", str(out_path)]) == 0
    doc = json.loads(out_path.read_text())
    assert doc["report_kind"] == "demo"
    assert doc["passed"] is True
    assert doc["metrics"]["max_distance"] < 1e-9
    assert doc["scenario_report"]["report_kind"] == "scenario"


def test_demo_unknown_name():
    assert main(["demo", "nope"]) == 1


def test_no_subcommand_is_usage_error():
    assert main([]) == 1


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 1


def test_run_scenario_file(tmp_path, capsys):
    sc_path = tmp_path / "sc.json"
    write_json(sc_path, scenario_to_dict(random_choi_scenario(2, 2, 2, 2, seed=4)))
    rep_path = tmp_path / "rep.json"
    assert main(["run", str(sc_path), "--out", str(rep_path)]) == 0
    out = capsys.readouterr().out
    assert "max distance" in out
    doc = json.loads(rep_path.read_text())
    assert doc["report_kind"] == "scenario"
    assert doc["max_distance"] < 1e-8


def test_run_echoes_tol(tmp_path):
    sc_path = tmp_path / "sc.json"
    write_json(sc_path, scenario_to_dict(random_choi_scenario(2, 2, 2, 2, seed=4)))
    rep_path = tmp_path / "rep.json"
    assert main(["run", str(sc_path), "--tol", "1e-6", "--out", str(rep_path)]) == 0
    assert json.loads(rep_path.read_text())["tol"] == 1e-6


def test_run_serialized_demo_matches_demo_report(tmp_path):
    from qpool.measure import plus_minus_povm
    from qpool.scenario import Scenario
    from qpool.states import state_224

    demo_out = tmp_path / "demo.json"
    assert main(["demo", "example224", "--out", str(demo_out)]) == 0
    pm = plus_minus_povm()
    sc = Scenario(state_224(), (pm, pm), "all", "example224", None, "i")
    sc_path = tmp_path / "sc.json"
    write_json(sc_path, scenario_to_dict(sc))
    run_out = tmp_path / "run.json"
    assert main(["run", str(sc_path), "--out", str(run_out)]) == 0
    demo_doc = json.loads(demo_out.read_text())["scenario_report"]
    run_doc = json.loads(run_out.read_text())
    demo_doc.pop("wall_time_s")
    run_doc.pop("wall_time_s")
    assert demo_doc == run_doc


def test_run_missing_file(capsys):
    assert main(["run", "/no/such/file.json"]) == 2
    assert "qpool" in capsys.readouterr().err


def test_run_bad_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{broken")
    assert main(["run", str(p)]) == 2


def test_run_invalid_document(tmp_path):
    p = tmp_path / "doc.json"
    write_json(p, {"format_version": 1, "state": {"kind": "mystery"}, "povms": []})
    assert main(["run", str(p)]) == 2


def test_verify_class_i(tmp_path, capsys):
    rep = tmp_path / "sweep.json"
    code = main(
        ["verify", "--class", "i", "--trials", "5", "--seed", "1", "--out", str(rep)]
    )
    assert code == 0
    assert "predicate: PASS" in capsys.readouterr().out
    doc = json.loads(rep.read_text())
    assert doc["report_kind"] == "sweep"
    assert doc["passed"] is True
    assert doc["config"]["seed"] == 1
    assert len(doc["trials"]) == 5


def test_verify_class_none(capsys):
    assert main(["verify", "--class", "none", "--trials", "5", "--seed", "2"]) == 0
    assert "pooling failure" in capsys.readouterr().out


def test_verify_usage_errors(capsys):
    assert main(["verify", "--class", "i", "--trials", "0"]) == 1
    assert main(["verify", "--class", "iv", "--trials", "5"]) == 1
    assert main(["verify", "--class", "i", "--trials", "5", "--dims", "2"]) == 1
    assert main(["verify", "--class", "i", "--trials", "5", "--dims", "a,b"]) == 1
    assert main(["verify", "--class", "none", "--trials", "5", "--dims", "2,2"]) == 1
    assert main(["verify", "--class", "i", "--trials", "5", "--jobs", "0"]) == 1
    assert main(["verify", "--trials", "5"]) == 1  # --class is required


def test_verify_seed_from_env(tmp_path, monkeypatch):
    rep = tmp_path / "r.json"
    monkeypatch.setenv("QPOOL_SEED", "31")
    assert main(["verify", "--class", "i", "--trials", "2", "--out", str(rep)]) == 0
    assert json.loads(rep.read_text())["config"]["seed"] == 31
    # explicit --seed beats the environment
    assert main(["verify", "--class", "i", "--trials", "2", "--seed", "9",
                 "--out", str(rep)]) == 0
    assert json.loads(rep.read_text())["config"]["seed"] == 9


def test_verify_bad_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("QPOOL_SEED", "twelve")
    assert main(["verify", "--class", "i", "--trials", "2"]) == 1
    assert "QPOOL_SEED" in capsys.readouterr().err


def test_verify_deterministic_reports(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path, jobs in ((a, "1"), (b, "4")):
        assert main(
            ["verify", "--class", "i", "--trials", "6", "--seed", "5",
             "--jobs", jobs, "--out", str(path)]
        ) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    for d in (da, db):
        d.pop("wall_time_s")
        d["config"].pop("jobs")
    assert da == db


def test_pool_command(density_files, tmp_path, capsys):
    rep = tmp_path / "pool.json"
    code = main(
        ["pool", "--alpha", density_files["alpha"], "--beta", density_files["beta"],
         "--rho", density_files["rho"], "--out", str(rep)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "pooled state" in out
    doc = json.loads(rep.read_text())
    assert doc["report_kind"] == "pool"
    assert doc["hermitian"] is True
    # diagonal inputs pool entrywise: alpha * beta / rho, renormalized
    got = np.array(doc["pooled"])[:, :, 0]
    expect = np.diag([0.5, 0.25, 0.25, 0.0])
    np.testing.assert_allclose(got, expect, atol=1e-12)


def test_pool_more_posteriors(density_files, capsys):
    code = main(
        ["pool", "--alpha", density_files["alpha"], "--beta", density_files["beta"],
         "--rho", density_files["rho"], "--more", density_files["beta"]]
    )
    assert code == 0


def test_pool_three_way_matches_scenario_harness(tmp_path):
    from qpool.scenario import random_choi_scenario_n, run_scenario
    from qpool.states import shared_state

    sc = random_choi_scenario_n((2, 2, 2), (2, 2, 2), seed=19)
    report = run_scenario(sc)
    rec = report.records[0]
    paths = {}
    for name, op in (
        ("a", rec.posteriors[0]),
        ("b", rec.posteriors[1]),
        ("c", rec.posteriors[2]),
        ("rho", shared_state(sc.state)),
    ):
        p = tmp_path / f"{name}.json"
        write_json(p, density_to_dict(op))
        paths[name] = str(p)
    out = tmp_path / "pool.json"
    assert main(
        ["pool", "--alpha", paths["a"], "--beta", paths["b"], "--rho", paths["rho"],
         "--more", paths["c"], "--out", str(out)]
    ) == 0
    doc = json.loads(out.read_text())
    got = np.array(doc["pooled"])
    got = got[:, :, 0] + 1j * got[:, :, 1]
    np.testing.assert_allclose(got, rec.pooled.matrix, atol=1e-12)


def test_pool_support_violation_is_input_error(tmp_path, density_files, capsys):
    bad = tmp_path / "bad_rho.json"
    write_json(bad, density_to_dict(DensityOperator(np.diag([0.0, 0.0, 0.0, 1.0]))))
    code = main(
        ["pool", "--alpha", density_files["alpha"], "--beta", density_files["beta"],
         "--rho", str(bad)]
    )
    assert code == 2
    assert "support" in capsys.readouterr().err


def test_pool_empty_chain_is_numeric_error(tmp_path, capsys):
    files = {}
    for name, diag in (
        ("a", [1.0, 0.0]), ("b", [0.0, 1.0]), ("r", [0.5, 0.5])
    ):
        p = tmp_path / f"{name}.json"
        write_json(p, density_to_dict(DensityOperator(np.diag(diag))))
        files[name] = str(p)
    code = main(
        ["pool", "--alpha", files["a"], "--beta", files["b"], "--rho", files["r"]]
    )
    assert code == 3
    assert "numeric failure" in capsys.readouterr().err


def test_pool_non_density_file_is_input_error(tmp_path, density_files):
    nd = tmp_path / "nd.json"
    write_json(nd, {"format_version": 1, "matrix": [[[1.0, 0.0]]]})
    ok = main(
        ["pool", "--alpha", str(nd), "--beta", density_files["beta"],
         "--rho", density_files["rho"]]
    )
    assert ok == 2  # dimension mismatch against the 4-dim prior
