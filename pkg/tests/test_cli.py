"""
End to end tests of the crm command line.
"""

import contextlib
import csv
import io
import json
import os
import tempfile
import unittest

import numpy as np

from crm.cli import main
from crm.commands.grid import emit_distribution_grid
from crm.commands.weights import emit_weight_trace
from crm.core.io import read_sequence, write_json
from crm.modules.estimator import SampleSequence, estimate_p
from crm.modules.kernels import KernelSpec, make_weight_scheme
from crm.modules.processes import HiddenMarkovSpec, random_chain, simulate, stationary_distribution

SMALL_COMPARE = [
    "compare",
    "--chain-seeds", "1,2,3",
    "--n-train", "300",
    "--history-lengths", "1,2",
    "--bandwidths", "0.1,0.5",
    "--resolution", "64",
]


def read_rows(path):
    with open(path, newline="") as stream:
        return list(csv.DictReader(stream))


class CLITestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def run_cli(self, *argv):
        """Run main, returning (exit code, captured stdout)."""
        out = io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
            code = main(list(argv))
        return code, out.getvalue()


class TestCompare(CLITestCase):
    def test_deterministic_across_workers(self):
        first, second = self.path("one.csv"), self.path("three.csv")
        self.assertEqual(self.run_cli(*SMALL_COMPARE, "--workers", "1", "--out", first)[0], 0)
        self.assertEqual(self.run_cli(*SMALL_COMPARE, "--workers", "3", "--out", second)[0], 0)
        with open(first, "rb") as a, open(second, "rb") as b:
            self.assertEqual(a.read(), b.read())

        rows = read_rows(first)
        self.assertEqual(len(rows), 3 * 2 * 2 * 3)
        keys = [(int(r["seed"]), int(r["d"]), float(r["bandwidth"]), r["learner"]) for r in rows]
        self.assertEqual(keys, sorted(keys))
        for row in rows:
            if row["error"]:
                self.assertEqual(row["conditional_risk"], "")
                continue
            self.assertTrue(0.0 <= float(row["conditional_risk"]) <= 1.0)
            self.assertEqual(row["wall_time_ms"], "")
        # a window of one sample cannot fit an affine predictor
        window_rows = [r for r in rows if r["learner"] == "sliding-window" and r["d"] == "1"]
        self.assertTrue(all(r["error"].startswith("validation_error") for r in window_rows))

    def test_sidecar(self):
        out = self.path("run.csv")
        self.run_cli(*SMALL_COMPARE, "--learners", "ecrm,erm", "--seed", "4", "--out", out)
        with open(self.path("run.json")) as stream:
            sidecar = json.load(stream)
        self.assertEqual(sidecar["rows"], 3 * 2 * 2 * 2)
        self.assertEqual(sidecar["config"]["master_seed"], 4)
        self.assertIn("run_timestamp", sidecar)
        self.assertIn("d=1", sidecar["summary"])

    def test_learner_filter(self):
        out = self.path("erm.csv")
        self.run_cli(*SMALL_COMPARE, "--learners", "erm", "--out", out)
        rows = read_rows(out)
        self.assertEqual(len(rows), 3 * 2 * 2)
        self.assertEqual({r["learner"] for r in rows}, {"erm"})
        # ERM does not depend on (d, b): one risk per chain
        for seed in ("1", "2", "3"):
            risks = {r["conditional_risk"] for r in rows if r["seed"] == seed}
            self.assertEqual(len(risks), 1)

    def test_single_regime_process(self):
        spec = HiddenMarkovSpec(
            transition=[[1.0]],
            label_directions=[[1.0, 0.0]],
            label_offsets=[-5.0],
            emission_box=[[0.0, 10.0], [0.0, 10.0]],
            initial_distribution=[1.0],
        )
        write_json(self.path("spec.json"), spec.to_dict())
        out = self.path("single.csv")
        code, _ = self.run_cli(
            "compare",
            "--process-spec", self.path("spec.json"),
            "--chain-seeds", "1,2",
            "--n-train", "1000",
            "--history-lengths", "1",
            "--bandwidths", "0.2",
            "--learners", "ecrm,erm",
            "--resolution", "128",
            "--out", out,
        )
        self.assertEqual(code, 0)
        rows = read_rows(out)
        self.assertEqual(len(rows), 4)
        for row in rows:
            self.assertEqual(row["error"], "")
            self.assertLess(float(row["conditional_risk"]), 0.05)

    def test_config_file_with_override(self):
        config = {"chain_seeds": [5], "n_train": 200, "history_lengths": [1], "bandwidths": [0.3],
                  "learners": ["erm"], "resolution": 32}
        write_json(self.path("cfg.json"), config)
        out = self.path("cfg.csv")
        code, _ = self.run_cli(
            "compare", "--config", self.path("cfg.json"), "--bandwidths", "0.3,0.6", "--out", out
        )
        self.assertEqual(code, 0)
        self.assertEqual(len(read_rows(out)), 2)

    def test_unknown_config_key(self):
        write_json(self.path("cfg.json"), {"chains": [1]})
        code, stdout = self.run_cli("compare", "--config", self.path("cfg.json"))
        self.assertEqual(code, 2)
        self.assertEqual(json.loads(stdout)["error_type"], "config_error")


class TestExitCodes(CLITestCase):
    def test_missing_params(self):
        code, stdout = self.run_cli("bounds")
        self.assertEqual(code, 2)
        self.assertEqual(json.loads(stdout)["status"], "error")

    def test_vacuous_bound(self):
        params = dict(t=0.01, N=1000, k=1, d=1, b=0.2, K1=1, K2=1, L=1, gamma=1, D0=1, D2=1, L_H=1)
        write_json(self.path("params.json"), params)
        code, stdout = self.run_cli("bounds", "--params", self.path("params.json"))
        self.assertEqual(code, 3)
        envelope = json.loads(stdout)
        self.assertEqual(envelope["error_type"], "vacuous_regime")
        self.assertAlmostEqual(envelope["details"]["margin"], -0.03, delta=1e-12)

    def test_bound_table(self):
        params = dict(t=0.6, N=1000, k=1, d=1, b=0.1, K1=1, K2=1, L=1, gamma=1, D0=1, D2=1, L_H=1)
        write_json(self.path("params.json"), params)
        out = self.path("bound.csv")
        self.assertEqual(self.run_cli("bounds", "--params", self.path("params.json"), "--out", out)[0], 0)
        row = read_rows(out)[0]
        self.assertAlmostEqual(float(row["t1"]), 0.59 / 6, delta=1e-12)

    def test_scaling_grid(self):
        params = dict(t=0.5, N=10000, k=1, d=1, b=0.1, K1=1, K2=1, L=1, gamma=1, D0=1, D2=1, L_H=1,
                      beta={"kind": "exponential"}, covering={"kind": "constant"})
        write_json(self.path("params.json"), params)
        out = self.path("scaling.csv")
        code, _ = self.run_cli(
            "bounds", "--params", self.path("params.json"), "--scaling-grid", "2,1e4,1e8", "--out", out
        )
        self.assertEqual(code, 0)
        rows = read_rows(out)
        self.assertEqual([r["N"] for r in rows], ["2", "10000", "100000000"])
        self.assertIn("too short", rows[0]["error"])
        self.assertEqual(rows[2]["error"], "")

    def test_unknown_option_in_config(self):
        write_json(self.path("cfg.json"), {"nonsense": 1})
        code, _ = self.run_cli("train", "--config", self.path("cfg.json"))
        self.assertEqual(code, 2)

    def test_missing_data(self):
        self.assertEqual(self.run_cli("train")[0], 2)

    def test_argparse_rejects_bad_choice(self):
        with self.assertRaises(SystemExit) as ctx:
            self.run_cli("train", "--learner", "boosting")
        self.assertEqual(ctx.exception.code, 2)


class TestPipeline(CLITestCase):
    def setUp(self):
        super().setUp()
        self.seq_path = self.path("seq.txt")
        code, _ = self.run_cli(
            "simulate", "--chain-seed", "2", "--N", "200", "--seed", "1",
            "--out", self.seq_path, "--spec-out", self.path("spec.json"),
        )
        self.assertEqual(code, 0)

    def test_simulate_writes_sequence(self):
        seq = read_sequence(self.seq_path)
        self.assertEqual((seq.N, seq.k), (200, 3))
        self.assertTrue(os.path.exists(self.path("spec.json")))

    def test_config_defaults_for_train(self):
        write_json(self.path("cfg.json"), {"learner": "erm"})
        code, stdout = self.run_cli(
            "train", "--data", self.seq_path, "--config", self.path("cfg.json"),
            "--out", self.path("h.json"),
        )
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout)["data"]["learner"], "erm")

    def test_train_then_evaluate(self):
        h_path = self.path("h.json")
        code, _ = self.run_cli(
            "train", "--data", self.seq_path, "--d", "2", "--kernel", "sqexp",
            "--bandwidth", "0.5", "--out", h_path,
        )
        self.assertEqual(code, 0)
        code, stdout = self.run_cli(
            "evaluate", "--process-spec", self.path("spec.json"), "--data", self.seq_path,
            "--hypothesis", h_path, "--d", "2", "--kernel", "sqexp", "--bandwidth", "0.5",
            "--resolution", "64",
        )
        self.assertEqual(code, 0)
        data = json.loads(stdout)["data"]
        self.assertAlmostEqual(sum(data["posterior"]), 1.0, places=12)
        self.assertLessEqual(data["bayes_risk"], data["conditional_risk"] + 1e-12)
        self.assertTrue(0.0 <= data["estimated_conditional_risk"] <= 1.0)

    def test_weights(self):
        out = self.path("weights.csv")
        code, _ = self.run_cli(
            "weights", "--data", self.seq_path, "--d", "2", "--kernel", "sqexp",
            "--bandwidth", "0.5", "--out", out,
        )
        self.assertEqual(code, 0)
        rows = read_rows(out)
        self.assertEqual(len(rows), 198)
        self.assertEqual(list(rows[0]), ["index", "x1", "x2", "y", "weight"])
        seq = read_sequence(self.seq_path)
        scheme = make_weight_scheme("sqexp", 6, 0.5)
        total = sum(float(r["weight"]) for r in rows)
        expected = 198 * 0.5**2 * estimate_p(seq, 2, scheme, seq.history(2))
        self.assertAlmostEqual(total, expected, delta=1e-10)

    def test_grid(self):
        out = self.path("grid.csv")
        code, _ = self.run_cli(
            "grid", "--process-spec", self.path("spec.json"), "--data", self.seq_path,
            "--d", "4", "--resolution", "10", "--out", out,
        )
        self.assertEqual(code, 0)
        values = np.array([float(r["expected_label"]) for r in read_rows(out)])
        self.assertEqual(values.size, 100)
        self.assertTrue(np.all(np.abs(values) <= 1.0 + 1e-12))

    def test_verify_kernel(self):
        code, stdout = self.run_cli("verify-kernel", "--dim", "1", "--resolution", "2048")
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(stdout)["data"]["passed"])


class TestTraces(CLITestCase):
    def test_weight_trace_matches_brute_force(self):
        seq = simulate(random_chain(6), 50, seed=6)
        kernel = KernelSpec(dim=6, bandwidth_b=0.4)
        out = self.path("trace.csv")
        weights = emit_weight_trace(seq, 2, kernel, out)
        target = seq.points[-2:].reshape(-1)
        expected = []
        for i in range(2, 50):
            u = (target - seq.points[i - 2 : i].reshape(-1)) / 0.4
            expected.append((2 * np.pi) ** -3 * np.exp(-0.5 * u @ u))
        np.testing.assert_allclose(weights.raw_weights, expected, rtol=1e-12)

        rows = read_rows(out)
        self.assertEqual([int(r["index"]) for r in rows], list(range(3, 51)))
        self.assertEqual([int(r["y"]) for r in rows], seq.labels[2:].tolist())
        np.testing.assert_allclose([float(r["weight"]) for r in rows], expected, rtol=1e-12)

    def test_constant_sequence_has_equal_weights(self):
        seq = SampleSequence(np.tile([0.3, 0.6, 1.0], (20, 1)))
        weights = emit_weight_trace(seq, 3, KernelSpec(dim=9, bandwidth_b=0.2), self.path("c.csv"))
        self.assertEqual(len(set(weights.raw_weights.tolist())), 1)

    def test_stationary_grid(self):
        spec = random_chain(4)
        values = emit_distribution_grid(spec, None, 1, 12, self.path("g.csv"), mode="stationary")
        self.assertEqual(values.shape, (12, 12))
        axis = (np.arange(12) + 0.5) / 12
        cells = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
        expected = spec.state_labels(cells) @ stationary_distribution(spec)
        np.testing.assert_allclose(values.reshape(-1), expected, atol=1e-12)
        rows = read_rows(self.path("g.csv"))
        self.assertAlmostEqual(float(rows[0]["x1"]), 10 * axis[0], delta=1e-12)


if __name__ == "__main__":
    unittest.main()
