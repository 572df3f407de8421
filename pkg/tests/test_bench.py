import json
import subprocess
import sys

import numpy as np
import pytest

from cdqaoa import bench
from cdqaoa.cli import main
from cdqaoa.portfolio import (cost_of_bitstring, load_instance, random_instance, save_instance,
                              to_ising)

SMALL = {"n": 4, "budget": 2, "count": 2, "methods": ["xy", "penalty"], "depths": [1, 2],
         "cvar_alphas": [0.5], "restarts": 1, "max_evals": 12}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSweepSpec:
    def test_defaults_are_benchmark_scale(self):
        s = bench.SweepSpec()
        assert (s.count, s.n, s.budget, s.risk_aversion, s.base_seed) == (10, 12, 4, 0.5, 100)
        assert s.depths == [1, 2, 3] and s.cvar_alphas == [0.1, 0.25, 1.0]
        assert s.topologies == ["ring"]

    @pytest.mark.parametrize("data", [
        {"methods": []}, {"depths": []}, {"methods": ["qaoa"]}, {"depths": [0]},
        {"cvar_alphas": [1.5]}, {"topologies": ["star"]}, {"count": 0}, {"colour": 1},
    ])
    def test_rejects(self, data):
        with pytest.raises(bench.ConfigError):
            bench.SweepSpec.from_mapping(data)

    def test_key_value_config(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text('n = 6\nbudget = 3\nmethods = ["xy"]\ncvar_alphas = [0.25]\n')
        spec = bench.SweepSpec.from_mapping(bench.load_config(path))
        assert (spec.n, spec.budget, spec.methods, spec.cvar_alphas) == (6, 3, ["xy"], [0.25])

    def test_garbage_config(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("{not json = [")
        with pytest.raises(bench.ConfigError):
            bench.load_config(path)


class TestRunKeys:
    def test_row_arithmetic(self):
        spec = bench.SweepSpec(methods=["xy", "xy_cd"], cvar_alphas=[0.25])
        keys = bench.run_keys(spec, [f"inst_{k}" for k in range(10)])
        assert len(keys) == 60

    def test_topology_axis_only_for_xy(self):
        spec = bench.SweepSpec(depths=[1], cvar_alphas=[1.0], topologies=["ring", "chain"])
        keys = bench.run_keys(spec, ["a"])
        assert sorted((k.method, k.topology) for k in keys) == sorted([
            ("xy", "ring"), ("xy", "chain"), ("xy_cd", "ring"), ("xy_cd", "chain"),
            ("grover", ""), ("penalty", "")])

    def test_seeds_distinct_and_stable(self):
        spec = bench.SweepSpec()
        keys = bench.run_keys(spec, ["inst_100", "inst_101"])
        seeds = [k.seed(100) for k in keys]
        assert len(set(seeds)) == len(seeds)
        assert seeds == [k.seed(100) for k in bench.run_keys(spec, ["inst_100", "inst_101"])]
        assert keys[0].seed(101) != seeds[0]


class TestGenerate:
    def test_files_and_determinism(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"count": 10})
        code, out, _ = run_cli(capsys, "generate", "--config", cfg, "--out", tmp_path / "a")
        assert code == 0
        files = sorted((tmp_path / "a").glob("*.json"))
        assert [f.name for f in files] == [f"inst_{s}.json" for s in range(100, 110)]
        assert len(out.splitlines()) == 10
        run_cli(capsys, "generate", "--config", cfg, "--out", tmp_path / "b")
        for f in files:
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_scale_and_psd(self, tmp_path, capsys):
        run_cli(capsys, "generate", "--count", 3, "--seed", 7, "--out", tmp_path)
        for f in sorted(tmp_path.glob("*.json")):
            inst = load_instance(f)
            assert (inst.n_assets, inst.budget) == (12, 4)
            assert np.linalg.eigvalsh(inst.sigma).min() >= -1e-12
        assert (tmp_path / "inst_7.json").exists()

    def test_unwritable(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, err = run_cli(capsys, "generate", "--count", 1, "--out", blocker / "sub")
        assert code != 0
        assert json.loads(err)["error"] == "io"


class TestOracle:
    def test_report(self, tmp_path, capsys):
        path = tmp_path / "i.json"
        inst = random_instance(100)
        save_instance(inst, path)
        code, out, _ = run_cli(capsys, "oracle", path)
        assert code == 0
        rep = json.loads(out)
        assert rep["n_scanned"] == 495
        assert rep["e_min"] == pytest.approx(cost_of_bitstring(to_ising(inst), rep["argmin"]))
        assert rep["e_max"] == pytest.approx(cost_of_bitstring(to_ising(inst), rep["argmax"]))
        assert rep["argmin"].count("1") == 4
        assert rep["penalty_separates"] and rep["penalty_gap"] > 0
        assert not rep["degenerate"]

    def test_null_instance(self):
        inst = random_instance(1, 4, 2)
        null = type(inst)(np.zeros(4), np.zeros((4, 4)), 0.5, 2)
        rep = bench.cmd_oracle(null)
        assert rep["e_min"] == rep["e_max"] == 0.0
        assert rep["degenerate"]

    def test_many_to_file(self, tmp_path, capsys):
        paths = []
        for s in (1, 2):
            paths.append(tmp_path / f"{s}.json")
            save_instance(random_instance(s, 5, 2), paths[-1])
        code, _, _ = run_cli(capsys, "oracle", *paths, "--out", tmp_path / "o.json")
        assert code == 0
        assert len(json.loads((tmp_path / "o.json").read_text())) == 2

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "oracle", tmp_path / "nope.json")
        assert code != 0
        assert json.loads(err)["command"] == "oracle"

    def test_malformed_instance(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"mu": [1, 2]}')
        code, _, err = run_cli(capsys, "oracle", path)
        assert code == 1
        assert json.loads(err)["error"] == "invalid_input"


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    results, summary = bench.cmd_sweep(bench.SweepSpec.from_mapping(SMALL), out)
    return results, summary


class TestSweep:
    def test_rows(self, small_sweep):
        rows = bench.read_csv(small_sweep[0])
        assert len(rows) == 2 * 2 * 2
        assert list(rows[0]) == list(bench.RESULT_COLUMNS)
        assert [r["instance_id"] for r in rows[:4]] == ["inst_100"] * 4
        for r in rows:
            assert not r["error"]
            assert 0.0 <= float(r["p_gs"]) <= 1.0
            assert 0.0 <= float(r["feasible_mass"]) <= 1.0
            assert 0.0 <= float(r["r"]) <= 1.0 or r["r_unclamped"] == "1"
            assert int(r["evals_used"]) <= 13
        assert {r["topology"] for r in rows if r["method"] == "penalty"} == {""}
        assert {r["topology"] for r in rows if r["method"] == "xy"} == {"ring"}

    def test_xy_rows_feasible(self, small_sweep):
        for r in bench.read_csv(small_sweep[0]):
            if r["method"] == "xy":
                assert float(r["feasible_mass"]) == pytest.approx(1.0, abs=1e-10)

    def test_summary(self, small_sweep):
        rows = bench.read_csv(small_sweep[0])
        summary = bench.read_csv(small_sweep[1], bench.SUMMARY_COLUMNS)
        assert len(summary) == 4
        cell = next(s for s in summary if s["method"] == "xy" and s["p"] == "2")
        rs = [float(r["r"]) for r in rows if r["method"] == "xy" and r["p"] == "2"]
        assert float(cell["mean_r"]) == pytest.approx(np.mean(rs))
        assert float(cell["std_r"]) == pytest.approx(np.std(rs, ddof=1))
        assert cell["n_runs"] == "2" and cell["n_errors"] == "0"

    def test_rerun_identical(self, small_sweep, tmp_path):
        results, _ = bench.cmd_sweep(bench.SweepSpec.from_mapping(SMALL), tmp_path)
        assert bench.result_digest(results) == bench.result_digest(small_sweep[0])

    def test_workers_do_not_change_results(self, small_sweep, tmp_path):
        results, _ = bench.cmd_sweep(bench.SweepSpec.from_mapping(SMALL), tmp_path, jobs=2)
        assert bench.result_digest(results) == bench.result_digest(small_sweep[0])

    def test_failed_run_becomes_row(self, monkeypatch):
        real = bench.run

        def flaky(cfg, inst, *a, **kw):
            if cfg.method == "xy" and inst.seed == 5:
                raise RuntimeError("boom")
            return real(cfg, inst, *a, **kw)

        monkeypatch.setattr(bench, "run", flaky)
        spec = bench.SweepSpec.from_mapping({**SMALL, "depths": [1]})
        rows = bench.sweep(spec, instances=[random_instance(5, 4, 2), random_instance(6, 4, 2)])
        assert len(rows) == 4
        errs = [r for r in rows if r["error"]]
        assert [(r["instance_id"], r["method"]) for r in errs] == [("inst_5", "xy")]
        assert errs[0]["error"] == "RuntimeError: boom" and errs[0]["r"] == ""
        assert bench.summarize(rows)[0]["n_errors"] == 1

    def test_instance_files(self, tmp_path, capsys):
        for s in (5, 6):
            save_instance(random_instance(s, 4, 2), tmp_path / f"{s}.json")
        cfg = write_config(tmp_path, {**SMALL, "methods": ["grover"], "depths": [1]})
        code, out, _ = run_cli(capsys, "sweep", "--config", cfg, "--out", tmp_path / "o",
                               tmp_path / "5.json", tmp_path / "6.json")
        assert code == 0
        rows = bench.read_csv(tmp_path / "o" / "results.csv")
        assert [r["instance_id"] for r in rows] == ["inst_5", "inst_6"]
        assert json.loads((tmp_path / "o" / "spec.json").read_text())["methods"] == ["grover"]

    def test_seed_flag_changes_instances(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**SMALL, "methods": ["xy"], "depths": [1], "count": 1})
        run_cli(capsys, "sweep", "--config", cfg, "--seed", 42, "--out", tmp_path / "o")
        rows = bench.read_csv(tmp_path / "o" / "results.csv")
        assert rows[0]["instance_id"] == "inst_42"


class TestReport:
    def test_series(self, small_sweep, tmp_path, capsys):
        code, out, _ = run_cli(capsys, "report", small_sweep[0], "--out", tmp_path)
        assert code == 0
        names = {p.split("/")[-1] for p in out.split()}
        assert names == {"ratio_series.csv", "gatecost_series.csv", "report.txt", "ratio_alpha_0.5.csv"}
        cost_rows = bench.read_csv(tmp_path / "gatecost_series.csv", bench.COST_COLUMNS)
        assert [(r["method"], r["p"]) for r in cost_rows] == [("xy", "1"), ("xy", "2"),
                                                         ("penalty", "1"), ("penalty", "2")]
        xy = [int(r["cnot_count"]) for r in cost_rows if r["method"] == "xy"]
        assert xy[1] == 2 * xy[0]
        ratio_rows = bench.read_csv(tmp_path / "ratio_alpha_0.5.csv", bench.RATIO_COLUMNS)
        assert len(ratio_rows) == 4
        assert "Gate cost vs depth" in (tmp_path / "report.txt").read_text()

    def test_one_file_per_alpha(self, tmp_path):
        base = {"instance_id": "i", "method": "xy", "topology": "ring", "p": "1", "seed": "0",
                "r": "0.5", "p_gs": "0.1", "feasible_mass": "1.0", "best_cvar": "0",
                "cnot_count": "1", "two_qubit_count": "1", "depth_model": "1", "evals_used": "1",
                "wall_ms": "1", "r_unclamped": "0", "error": ""}
        rows = [{**base, "cvar_alpha": a} for a in ("0.1", "0.25", "1.0")]
        bench.write_csv(rows, bench.RESULT_COLUMNS, tmp_path / "r.csv")
        written = bench.cmd_report(tmp_path / "r.csv", tmp_path / "o")
        assert sorted(p.name for p in written if p.name.startswith("ratio_alpha")) == [
            "ratio_alpha_0.1.csv", "ratio_alpha_0.25.csv", "ratio_alpha_1.0.csv"]

    def test_empty_input_gives_headers(self, tmp_path):
        bench.write_csv([], bench.RESULT_COLUMNS, tmp_path / "r.csv")
        bench.cmd_report(tmp_path / "r.csv", tmp_path / "o")
        assert (tmp_path / "o" / "ratio_series.csv").read_text().strip() == ",".join(bench.RATIO_COLUMNS)
        assert (tmp_path / "o" / "gatecost_series.csv").read_text().strip() == ",".join(bench.COST_COLUMNS)

    def test_malformed_csv(self, tmp_path, capsys):
        (tmp_path / "r.csv").write_text("a,b\n1,2\n")
        code, _, err = run_cli(capsys, "report", tmp_path / "r.csv", "--out", tmp_path / "o")
        assert code == 1
        assert "missing columns" in json.loads(err)["message"]

    def test_blank_csv(self, tmp_path):
        (tmp_path / "r.csv").write_text("")
        with pytest.raises(bench.ConfigError):
            bench.cmd_report(tmp_path / "r.csv", tmp_path / "o")


class TestCli:
    def test_usage_error_is_json(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 2
        assert json.loads(err)["error"] == "usage"

    def test_bad_flag_value(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--jobs", "many")
        assert code == 2
        assert json.loads(err)["command"] is None

    def test_invalid_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"methods": ["qaoa"]})
        code, _, err = run_cli(capsys, "sweep", "--config", cfg, "--out", tmp_path)
        assert code == 1
        payload = json.loads(err)
        assert payload == {"error": "invalid_input", "message": payload["message"], "command": "sweep"}

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "cdqaoa", "generate", "--count", "1",
                               "--out", str(tmp_path)], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.strip().endswith("inst_100.json")
        proc = subprocess.run([sys.executable, "-m", "cdqaoa"], capture_output=True, text=True)
        assert proc.returncode == 2
        assert json.loads(proc.stderr)["error"] == "usage"
