import json

import numpy as np
import pytest

from grouplingam import cli
from grouplingam.discover import estimate_separate
from grouplingam.model import (
    CausalOrdering,
    ConnectionMatrix,
    GroupDataset,
    MultiGroupData,
    find_causal_ordering,
    is_consistent_with_ordering,
)


def write_chain_csvs(tmp_path, count=2, n=300, seed=0):
    """CSV groups of a two-variable chain x1 -> x2 with group-specific slopes."""
    rng = np.random.default_rng(seed)
    paths = []
    for g in range(count):
        slope = rng.uniform(0.8, 1.5) * rng.choice([-1, 1])
        e = rng.uniform(-1, 1, (2, n))
        data = np.vstack([e[0], slope * e[0] + e[1]])
        path = tmp_path / f"group{g}.csv"
        cli.write_csv_dataset(path, ["x1", "x2"], data)
        paths.append(str(path))
    return paths


class TestSerialization:
    def test_float_roundtrip(self):
        values = [0.1, 1 / 3, 1e-17, -2.5e300]
        text = cli.to_json(values)
        assert json.loads(text) == values

    def test_nan_serializes_as_null(self):
        assert cli.to_json(float("nan")) == "null"

    def test_nested_structures(self):
        obj = {"a": [1, True, None, "x\"y"], "b": {}}
        assert json.loads(cli.to_json(obj)) == obj

    def test_csv_roundtrip(self, tmp_path):
        data = np.random.default_rng(0).standard_normal((3, 5))
        path = tmp_path / "d.csv"
        cli.write_csv_dataset(path, ["a", "b", "c"], data)
        headers, back = cli.read_csv_dataset(path)
        assert headers == ["a", "b", "c"]
        np.testing.assert_array_equal(back, data)

    def test_read_rejects_ragged_and_nonnumeric(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n3\n")
        with pytest.raises(Exception, match="line 3"):
            cli.read_csv_dataset(path)
        path.write_text("a,b\n1,x\n2,3\n")
        with pytest.raises(Exception, match="line 2"):
            cli.read_csv_dataset(path)


class TestEstimateCommand:
    def test_chain_orders_exogenous_first(self, tmp_path):
        inputs = write_chain_csvs(tmp_path)
        out = tmp_path / "result.json"
        code = cli.main(["estimate", "--inputs", *inputs, "--out", str(out)])
        assert code == cli.EXIT_OK
        report = json.loads(out.read_text())
        assert report["ordering"][0] == "x1"
        assert report["variables"] == ["x1", "x2"]
        assert len(report["b_matrices"]) == 2

    def test_single_input_matches_separate_estimation(self, tmp_path):
        (path,) = write_chain_csvs(tmp_path, count=1, seed=3)
        out = tmp_path / "result.json"
        assert cli.main(["estimate", "--inputs", path, "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        headers, data = cli.read_csv_dataset(path)
        separate = estimate_separate(
            MultiGroupData((GroupDataset(data),))
        )[0]
        expected = [headers[i] for i in separate.ordering.order]
        assert report["ordering"] == expected

    def test_partial_q(self, tmp_path):
        rng = np.random.default_rng(4)
        e = rng.uniform(-1, 1, (4, 200))
        x = np.empty((4, 200))
        x[0] = e[0]
        for i in range(1, 4):
            x[i] = 0.9 * x[i - 1] + e[i]
        path = tmp_path / "g.csv"
        cli.write_csv_dataset(path, [f"x{i}" for i in range(4)], x)
        out = tmp_path / "result.json"
        code = cli.main(["estimate", "--inputs", str(path), "--q", "2",
                         "--out", str(out)])
        assert code == cli.EXIT_OK
        report = json.loads(out.read_text())
        assert len(report["ordering"]) == 2

    def test_mismatched_headers_fail(self, tmp_path):
        a, b = write_chain_csvs(tmp_path)
        (tmp_path / "other.csv").write_text("y1,y2\n1,2\n3,4\n")
        code = cli.main(["estimate", "--inputs", a, str(tmp_path / "other.csv"),
                         "--out", str(tmp_path / "r.json")])
        assert code == cli.EXIT_ERROR

    def test_missing_file_fails(self, tmp_path):
        code = cli.main(["estimate", "--inputs", str(tmp_path / "nope.csv"),
                         "--out", str(tmp_path / "r.json")])
        assert code == cli.EXIT_ERROR

    def test_early_stop_exit_code(self, tmp_path):
        path = tmp_path / "const.csv"
        path.write_text("a,b\n" + "\n".join("1.0,%f" % v for v in range(5)) + "\n")
        code = cli.main(["estimate", "--inputs", str(path),
                         "--out", str(tmp_path / "r.json")])
        assert code == cli.EXIT_PARTIAL


class TestSimulateCommand:
    def test_writes_groups_and_truth(self, tmp_path):
        out_dir = tmp_path / "sim"
        code = cli.main([
            "simulate", "--p", "10", "--c", "10",
            "--n", "50,50,50,50,50,100,100,100,100,100",
            "--seed", "5", "--out-dir", str(out_dir),
        ])
        assert code == cli.EXIT_OK
        csvs = sorted(out_dir.glob("group*.csv"))
        assert len(csvs) == 10
        for i, path in enumerate(csvs):
            rows = path.read_text().strip().splitlines()
            assert len(rows) - 1 == (50 if i < 5 else 100)
        truth = json.loads((out_dir / "ground_truth.json").read_text())
        assert truth["schema_version"] == 1
        assert len(truth["ordering"]) == 10

    def test_truth_validates_model_invariants(self, tmp_path):
        out_dir = tmp_path / "sim"
        cli.main(["simulate", "--p", "5", "--c", "2", "--n", "20,20",
                  "--seed", "6", "--out-dir", str(out_dir)])
        truth = json.loads((out_dir / "ground_truth.json").read_text())
        names = truth["variables"]
        order = CausalOrdering(
            tuple(names.index(v) for v in truth["ordering"]), len(names)
        )
        for group in truth["b_matrices"]:
            b = np.zeros((5, 5))
            for entry in group["entries"]:
                b[names.index(entry["effect"]), names.index(entry["cause"])] = (
                    entry["value"]
                )
            cm = ConnectionMatrix(b)
            find_causal_ordering(cm)  # acyclic
            assert is_consistent_with_ordering(cm, order)

    def test_deterministic_bytes(self, tmp_path):
        args = ["simulate", "--p", "4", "--c", "2", "--n", "15,15", "--seed", "7"]
        dirs = []
        for run in ("a", "b"):
            out_dir = tmp_path / run
            assert cli.main(args + ["--out-dir", str(out_dir)]) == 0
            dirs.append(out_dir)
        for path_a in sorted(dirs[0].iterdir()):
            path_b = dirs[1] / path_a.name
            assert path_a.read_bytes() == path_b.read_bytes()


class TestBenchCommand:
    BASE = ["bench", "--p", "4", "--c", "2", "--n", "30,40", "--trials", "2",
            "--seed", "9"]

    def test_single_trial_counts_datasets(self, tmp_path):
        out = tmp_path / "report.json"
        code = cli.main(["bench", "--p", "3", "--c", "2", "--n", "25,25",
                         "--trials", "1", "--seed", "8", "--out", str(out)])
        assert code == cli.EXIT_OK
        report = json.loads(out.read_text())
        assert report["n_trials"] == 1
        assert report["n_datasets"] == 2
        for method in ("joint", "separate", "naive"):
            assert method in report["success_pct"]

    def test_plot_data_csv(self, tmp_path):
        out = tmp_path / "report.json"
        plot = tmp_path / "plot.csv"
        code = cli.main(self.BASE + ["--out", str(out), "--plot-data", str(plot)])
        assert code == cli.EXIT_OK
        lines = plot.read_text().strip().splitlines()
        assert lines[0] == "method,metric,value"
        assert len(lines) == 1 + 3 * 2

    def test_preset_with_overrides(self, tmp_path):
        out = tmp_path / "report.json"
        code = cli.main(["bench", "--preset", "exp1", "--p", "4", "--c", "2",
                         "--n", "20,20", "--q", "2", "--trials", "1",
                         "--seed", "10", "--out", str(out)])
        assert code == cli.EXIT_OK
        report = json.loads(out.read_text())
        assert report["config"]["q"] == 2

    def test_custom_preset_requires_dimensions(self, tmp_path):
        code = cli.main(["bench", "--trials", "1", "--seed", "1",
                         "--out", str(tmp_path / "r.json")])
        assert code == cli.EXIT_ERROR

    def test_deterministic_across_runs_and_workers(self, tmp_path, monkeypatch):
        payloads = []
        for run, workers in (("a", "1"), ("b", "1"), ("c", "2")):
            out = tmp_path / f"report_{run}.json"
            monkeypatch.setenv("GROUPLINGAM_WORKERS", workers)
            assert cli.main(self.BASE + ["--out", str(out)]) == cli.EXIT_OK
            payloads.append(out.read_bytes())
        assert payloads[0] == payloads[1] == payloads[2]

    def test_exact_success_mode(self, tmp_path):
        out = tmp_path / "report.json"
        code = cli.main(self.BASE + ["--success-mode", "exact", "--out", str(out)])
        assert code == cli.EXIT_OK


class TestParserPlumbing:
    def test_weights_parsing_errors(self):
        groups = MultiGroupData(
            (GroupDataset(np.random.default_rng(0).standard_normal((2, 10))),)
        )
        with pytest.raises(Exception, match="weights"):
            cli._parse_weights("1.0,2.0", groups)

    def test_presets_match_documented_regimes(self):
        assert cli.PRESETS["exp1"]["n"] == (50,) * 5 + (100,) * 5
        assert cli.PRESETS["exp2"] == dict(p=40, c=10, n=(10,) * 5 + (20,) * 5, q=5)
