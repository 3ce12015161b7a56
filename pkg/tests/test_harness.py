import csv
import json

import numpy as np
import pytest

from melfs.cli import main
from melfs.dataset import Dataset, save_csv
from melfs.harness import (
    ExperimentSpec,
    UsageError,
    emit_convergence_csv,
    parse_spec,
    run_experiment,
)
from melfs.mel import MelConfig, run_mel


@pytest.fixture
def data_csv(tmp_path):
    r = np.random.default_rng(0)
    y = np.arange(30) % 2
    X = r.normal(size=(30, 12))
    X[:, 2] += 2 * y
    p = tmp_path / "toy.csv"
    save_csv(Dataset(X, y, label_names=("a", "b")), p)
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


class TestParseSpec:
    def test_basic(self):
        spec = parse_spec(["--dataset", "colon.csv", "--algo", "mel", "--repeats", "10", "--seed", "42"], env={})
        assert spec.datasets[0].name == "colon.csv"
        assert spec.algorithms == ["mel"]
        assert spec.repeats == 10 and spec.config.seed == 42
        assert spec.config.np == 20 and spec.config.iterations == 100 and spec.config.pso.theta == 0.6
        assert spec.config.k_nn == 3 and spec.config.cv_folds == 5

    def test_alpha_beta_sum(self):
        with pytest.raises(UsageError, match="alpha \\+ beta must equal 1"):
            parse_spec(["--dataset", "x.csv", "--alpha", "0.8", "--beta", "0.1"], env={})

    def test_cli_overrides_file(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("iters: 50\nnp: 10\ndataset: [a.csv]\n")
        spec = parse_spec(["--config", str(cfg), "--iters", "100"], env={})
        assert spec.config.iterations == 100
        assert spec.config.np == 10
        assert [p.name for p in spec.datasets] == ["a.csv"]

    def test_json_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dataset": "a.csv", "label-col": "first", "scale": True}))
        spec = parse_spec(["--config", str(cfg)], env={})
        assert spec.label_column == "first" and spec.scale

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("dataset: a.csv\nbogus: 1\n")
        with pytest.raises(UsageError, match="bogus"):
            parse_spec(["--config", str(cfg)], env={})

    def test_missing_dataset(self):
        with pytest.raises(UsageError, match="dataset"):
            parse_spec(["--algo", "mel"], env={})

    def test_malformed_number(self):
        with pytest.raises(UsageError):
            parse_spec(["--dataset", "a.csv", "--iters", "ten"], env={})

    def test_malformed_number_in_file(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("dataset: a.csv\ntheta: high\n")
        with pytest.raises(UsageError, match="theta"):
            parse_spec(["--config", str(cfg)], env={})

    def test_threads_env(self):
        assert parse_spec(["--dataset", "a.csv"], env={"MELFS_THREADS": "4"}).threads == 4
        with pytest.raises(UsageError):
            parse_spec(["--dataset", "a.csv"], env={"MELFS_THREADS": "many"})


class TestConvergenceCsv:
    def test_rows_and_bytes(self, tmp_path, data_csv):
        from melfs.dataset import load_csv

        rep = run_mel(load_csv(data_csv), MelConfig(np=4, iterations=7))
        a = emit_convergence_csv(rep, tmp_path / "a.csv")
        b = emit_convergence_csv(rep, tmp_path / "b.csv")
        assert a.read_bytes() == b.read_bytes()
        rows = read_rows(a)
        assert [int(r["iteration"]) for r in rows] == list(range(8))
        fits = [float(r["best_fitness"]) for r in rows]
        assert all(y <= x for x, y in zip(fits, fits[1:]))
        assert float(rows[-1]["best_fitness"]) == rep.best_fitness

    def test_hundred_iterations(self, tmp_path, data_csv):
        from melfs.dataset import load_csv

        rep = run_mel(load_csv(data_csv), MelConfig(np=2, iterations=100))
        assert len(read_rows(emit_convergence_csv(rep, tmp_path / "c.csv"))) == 101

    def test_unwritable(self, tmp_path, data_csv):
        from melfs.dataset import load_csv

        rep = run_mel(load_csv(data_csv), MelConfig(np=2, iterations=1))
        with pytest.raises(OSError):
            emit_convergence_csv(rep, tmp_path / "missing" / "dir" / "c.csv")


def spec_for(path, out, repeats=2, algos=("mel", "pso")):
    return ExperimentSpec([path], list(algos), MelConfig(np=4, iterations=5, seed=3, repeats=repeats), out)


class TestRunExperiment:
    def test_single_repeat_zero_std(self, tmp_path, data_csv):
        rows = run_experiment(spec_for(data_csv, tmp_path / "o", repeats=1))
        assert all(r.std_accuracy == 0 and r.std_subset_size == 0 and r.std_wall_time == 0 for r in rows)

    def test_artifacts_and_aggregation(self, tmp_path, data_csv):
        out = tmp_path / "o"
        rows = run_experiment(spec_for(data_csv, out, repeats=3))
        assert (out / "summary.csv").read_text().startswith("# std columns are population")
        summary = read_rows(out / "summary.csv")
        assert [(r["algorithm"], r["seeds"]) for r in summary] == [("mel", "3 4 5"), ("pso", "3 4 5")]
        for row in summary:
            finals = [read_rows(out / f"toy__{row['algorithm']}__seed{s}.csv")[-1] for s in (3, 4, 5)]
            acc = sum(float(f["best_accuracy"]) for f in finals) / 3
            size = sum(int(f["subset_size"]) for f in finals) / 3
            assert float(row["mean_accuracy"]) == pytest.approx(acc, rel=1e-15)
            assert float(row["mean_subset_size"]) == pytest.approx(size, rel=1e-15)
        runs = read_rows(out / "runs.csv")
        assert len(runs) == 6 and all(int(r["evaluations"]) == 4 * 6 for r in runs)
        assert len(read_rows(out / "timing.csv")) == 2
        assert all(r.ok for r in rows)

    def test_byte_identical_reruns(self, tmp_path, data_csv):
        run_experiment(spec_for(data_csv, tmp_path / "a"))
        run_experiment(spec_for(data_csv, tmp_path / "b"))
        for name in ["summary.csv", "runs.csv", "toy__mel__seed4.csv", "toy__pso__seed3.csv"]:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_failed_cell_does_not_stop_others(self, tmp_path, data_csv):
        spec = ExperimentSpec([tmp_path / "nope.csv", data_csv], ["mel"],
                              MelConfig(np=2, iterations=2, repeats=1), tmp_path / "o")
        rows = run_experiment(spec)
        assert [r.ok for r in rows] == [False, True]
        summary = read_rows(tmp_path / "o" / "summary.csv")
        assert summary[0]["status"] == "failed" and summary[1]["status"] == "ok"

    def test_run_failure_recorded(self, tmp_path):
        # 3 samples cannot be split into 5 folds
        p = tmp_path / "small.csv"
        p.write_text("1,a\n2,b\n3,a\n")
        rows = run_experiment(ExperimentSpec([p], ["pso"], MelConfig(np=2, iterations=1, repeats=1), tmp_path / "o"))
        assert not rows[0].ok and "exceeds the number of samples" in rows[0].error

    def test_weight_trace_file(self, tmp_path, data_csv):
        spec = spec_for(data_csv, tmp_path / "o", repeats=1, algos=("mel",))
        spec.weight_trace = 3
        run_experiment(spec)
        rows = read_rows(tmp_path / "o" / "toy__mel__seed3__weights.csv")
        assert len(rows) == 6 * 3


class TestCli:
    def test_success(self, tmp_path, data_csv, capsys):
        code = main(["--dataset", str(data_csv), "--algo", "mel", "--repeats", "1", "--iters", "2",
                     "--np", "4", "--out", str(tmp_path / "o")])
        assert code == 0
        assert "mel" in capsys.readouterr().out
        assert (tmp_path / "o" / "summary.csv").exists()

    def test_usage_error(self, capsys):
        assert main(["--dataset", "x.csv", "--alpha", "0.8", "--beta", "0.1"]) == 2
        assert "alpha + beta must equal 1" in capsys.readouterr().err

    def test_unknown_flag(self):
        assert main(["--dataset", "x.csv", "--frobnicate"]) == 2

    def test_run_failure_exit_code(self, tmp_path):
        assert main(["--dataset", str(tmp_path / "missing.csv"), "--repeats", "1",
                     "--out", str(tmp_path / "o")]) == 1
