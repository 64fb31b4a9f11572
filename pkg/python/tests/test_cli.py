"""End to end runs of the gen, plan and batch commands."""

import json

import pytest

from middle_mile.cli import EXIT_ERROR, EXIT_OK, EXIT_UNREACHABLE, main
from middle_mile.scenario import load_scenario, save_scenario

from conftest import make_scenario


@pytest.fixture(autouse=True)
def single_worker(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("MMP_THREADS", "1")
    monkeypatch.setenv("MMP_LOG_LEVEL", "WARNING")
    monkeypatch.setenv("MMP_LOG_FILE", "")


def test_gen_then_plan(tmp_path):
    scenario_path = tmp_path / "scenario.json"
    assert main(["gen", "--n-aps", "10", "--area-km", "10", "--seed", "42", "--out", str(scenario_path)]) == EXIT_OK
    scenario = load_scenario(scenario_path.read_bytes())
    assert scenario.n_aps == 10 and scenario.seed == 42

    assert main(["plan", "--scenario", str(scenario_path), "--topology", "mh4"]) == EXIT_OK
    report = json.loads((tmp_path / "scenario.mh4.report.json").read_text())
    assert report["topology"] == "mh4"
    assert report["edge_count"] == 10
    assert report["is_tree"] is True


def test_gen_is_reproducible(tmp_path):
    args = ["gen", "--n-aps", "5", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a.json")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b.json")]) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_gen_rejects_zero_aps(tmp_path):
    assert main(["gen", "--n-aps", "0", "--seed", "1", "--out", str(tmp_path / "s.json")]) == EXIT_ERROR
    assert not (tmp_path / "s.json").exists()


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as excinfo:
        main(["plan", "--topology", "mesh", "--scenario", "x.json"])
    assert excinfo.value.code == EXIT_ERROR
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == EXIT_ERROR


def test_plan_pmp_single_ap(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_bytes(save_scenario(make_scenario([(5.0, 5.0), (5.0, 6.0)], [10.0])))
    out = tmp_path / "report.json"
    assert main(["plan", "--scenario", str(path), "--topology", "pmp", "--out", str(out)]) == EXIT_OK

    report = json.loads(out.read_text())
    assert report["feasible"] is True
    assert report["served_mbps"] == 10.0
    assert report["served_per_ap_mbps"] == {"1": 10.0}
    assert len(report["edges"]) == 1
    edge = report["edges"][0]
    assert (edge["src"], edge["dst"], edge["rb_count"]) == (0, 1, 13)
    assert "feasible" in capsys.readouterr().out


def test_plan_malformed_scenario(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["plan", "--scenario", str(path), "--topology", "pmp"]) == EXIT_ERROR
    assert main(["plan", "--scenario", str(tmp_path / "missing.json"), "--topology", "pmp"]) == EXIT_ERROR


def test_plan_lp_infeasible_is_a_result(tmp_path):
    path = tmp_path / "heavy.json"
    path.write_bytes(save_scenario(make_scenario([(0.0, 0.0), (0.0, 1.0)], [100.0])))
    assert main(["plan", "--scenario", str(path), "--topology", "lp", "--dump-lp"]) == EXIT_OK
    report = json.loads((tmp_path / "heavy.lp.report.json").read_text())
    assert report["feasible"] is False
    assert report["reason"] == "lp-infeasible"
    assert report["alpha"] is None


def test_plan_lp_partial_service_dumps_scaled_utility(tmp_path, capsys):
    path = tmp_path / "heavy.json"
    path.write_bytes(save_scenario(make_scenario([(0.0, 0.0), (0.0, 1.0)], [100.0])))
    config = tmp_path / "partial.json"
    config.write_text(json.dumps({"experiment": {"lp_partial_service": True}}))

    args = ["plan", "--scenario", str(path), "--topology", "lp", "--config", str(config), "--dump-lp"]
    assert main(args) == EXIT_OK
    report = json.loads((tmp_path / "heavy.lp.report.json").read_text())
    assert report["feasible"] is False
    assert report["excluded"] is False
    assert report["utility"][0][1] == pytest.approx(report["alpha"] * 100.0 / 79.2)
    assert report["edges"][0]["beta"] == report["utility"][0][1]
    assert "link utility" in capsys.readouterr().out


def test_plan_lp_reports_utility(tmp_path, capsys):
    path = tmp_path / "chain.json"
    path.write_bytes(save_scenario(make_scenario([(0.0, 0.0), (0.0, 1.0), (0.0, 2.0)], [2.0, 4.0])))
    assert main(["plan", "--scenario", str(path), "--topology", "lp", "--dump-lp"]) == EXIT_OK
    report = json.loads((tmp_path / "chain.lp.report.json").read_text())
    assert report["feasible"] is True
    assert len(report["utility"]) == 3
    assert all("beta" in edge for edge in report["edges"])
    printed = capsys.readouterr().out
    assert "flow_1" in printed
    assert "link utility" in printed


def test_plan_unreachable_exit_code(tmp_path):
    path = tmp_path / "crowd.json"
    assert main(["gen", "--n-aps", "17", "--seed", "3", "--out", str(path)]) == EXIT_OK
    assert main(["plan", "--scenario", str(path), "--topology", "mh2"]) == EXIT_UNREACHABLE
    report = json.loads((tmp_path / "crowd.mh2.report.json").read_text())
    assert report["reason"] == "unreachable"
    assert report["edges"] == []


def _batch_config(tmp_path, **experiment):
    settings = {"n_aps_list": [2, 3], "n_scenarios": 3, "topologies": ["pmp", "mh4", "lp"], "master_seed": 5}
    settings.update(experiment)
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"experiment": settings}))
    return path


def _outputs(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


def test_batch_writes_csvs(tmp_path):
    config = _batch_config(tmp_path)
    assert main(["batch", "--config", str(config), "--out", str(tmp_path / "first")]) == EXIT_OK
    first = _outputs(tmp_path / "first")
    assert {"results.csv", "summary.csv"} <= set(first)
    assert all(name.startswith("cdf_") for name in set(first) - {"results.csv", "summary.csv"})

    rows = first["results.csv"].decode().strip().split("\n")
    assert len(rows) == 1 + 6 * 3
    summary = first["summary.csv"].decode().strip().split("\n")
    assert len(summary) == 1 + 2 * 3

    assert main(["batch", "--config", str(config), "--out", str(tmp_path / "second")]) == EXIT_OK
    assert _outputs(tmp_path / "second") == first


def test_batch_identical_across_worker_counts(tmp_path, monkeypatch):
    config = _batch_config(tmp_path, topologies=["pmp", "mh2"])
    assert main(["batch", "--config", str(config), "--out", str(tmp_path / "serial")]) == EXIT_OK
    monkeypatch.setenv("MMP_THREADS", "2")
    assert main(["batch", "--config", str(config), "--out", str(tmp_path / "parallel")]) == EXIT_OK
    assert _outputs(tmp_path / "serial") == _outputs(tmp_path / "parallel")


def test_batch_topology_flag_limits_rows(tmp_path):
    config = _batch_config(tmp_path)
    out = tmp_path / "lp_only"
    assert main(["batch", "--config", str(config), "--topology", "lp", "--out", str(out)]) == EXIT_OK
    rows = (out / "results.csv").read_text().strip().split("\n")[1:]
    assert rows and all(row.split(",")[5] == "lp" for row in rows)
    assert not (out / "cdf_pmp.csv").exists()


def test_batch_bad_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"experiment": {"n_scenarios": 0}}))
    assert main(["batch", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_ERROR
    assert not (tmp_path / "out").exists()
    assert main(["batch", "--config", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_bad_thread_setting(monkeypatch, tmp_path):
    monkeypatch.setenv("MMP_THREADS", "zero")
    assert main(["gen", "--n-aps", "2", "--seed", "1", "--out", str(tmp_path / "s.json")]) == EXIT_ERROR
