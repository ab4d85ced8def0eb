# SPDX-License-Identifier: Apache-2.0
"""Command-line smoke tests: exit codes, golden reward fixtures and reruns."""

import json
import math
import pathlib
import subprocess
import sys
import tempfile
import unittest

BINARY = pathlib.Path(sys.argv.pop(1))
FIXTURES = pathlib.Path(sys.argv.pop(1))
CONFIG = FIXTURES / "cli_small.json"


def run(*args):
    return subprocess.run([str(BINARY), *map(str, args)], capture_output=True, text=True)


def read_jsonl(path):
    return [json.loads(line) for line in pathlib.Path(path).read_text().splitlines() if line.strip()]


class ExitCodes(unittest.TestCase):
    def test_no_subcommand_is_usage_error(self):
        self.assertEqual(run().returncode, 2)

    def test_unknown_subcommand_is_usage_error(self):
        self.assertEqual(run("frobnicate", "--out", "x").returncode, 2)

    def test_missing_required_option(self):
        self.assertEqual(run("bench", "--config", CONFIG).returncode, 2)

    def test_help_succeeds(self):
        proc = run("score", "--help")
        self.assertEqual(proc.returncode, 0)
        self.assertIn("--samples", proc.stdout)

    def test_invalid_config_names_the_field(self):
        with tempfile.TemporaryDirectory() as tmp:
            bad = pathlib.Path(tmp) / "bad.json"
            bad.write_text('{"mutation": {"sigma": -1}}')
            proc = run("synth", "--config", bad, "--out", pathlib.Path(tmp) / "o")
            self.assertEqual(proc.returncode, 2)
            err = json.loads(proc.stderr.strip().splitlines()[-1])
            self.assertEqual(err["field"], "mutation.sigma")

    def test_unknown_key_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            bad = pathlib.Path(tmp) / "bad.json"
            bad.write_text('{"retrieval": {"top_k": 3}}')
            proc = run("synth", "--config", bad, "--out", pathlib.Path(tmp) / "o")
            self.assertEqual(proc.returncode, 2)
            self.assertIn("retrieval.top_k", proc.stderr)

    def test_runtime_failure_exit_code(self):
        with tempfile.TemporaryDirectory() as tmp:
            samples = pathlib.Path(tmp) / "s.jsonl"
            samples.write_text('{"id": "x", "output": "<result>a</result>", "ground_truth": "not_a_label"}\n')
            proc = run("score", "--labels", FIXTURES / "labels.json", "--samples", samples, "--out", tmp)
            self.assertEqual(proc.returncode, 1)
            self.assertEqual(json.loads(proc.stderr.strip().splitlines()[-1])["error"], "runtime")


class Golden(unittest.TestCase):
    def test_score_matches_golden_rewards(self):
        with tempfile.TemporaryDirectory() as tmp:
            proc = run("score", "--labels", FIXTURES / "labels.json", "--samples",
                       FIXTURES / "score_samples.jsonl", "--out", tmp)
            self.assertEqual(proc.returncode, 0, proc.stderr)
            got = read_jsonl(pathlib.Path(tmp) / "rewards.jsonl")
            want = read_jsonl(FIXTURES / "score_golden.jsonl")
            self.assertEqual([g["id"] for g in got], [w["id"] for w in want])
            for g, w in zip(got, want):
                for key in ("answer_reward", "format_reward", "total_reward"):
                    self.assertTrue(math.isclose(g[key], w[key], abs_tol=1e-9), (g["id"], key, g[key], w[key]))

    def test_filter_matches_golden_selection(self):
        with tempfile.TemporaryDirectory() as tmp:
            proc = run("filter", "--labels", FIXTURES / "labels.json", "--rollouts",
                       FIXTURES / "filter_rollouts.jsonl", "--out", tmp)
            self.assertEqual(proc.returncode, 0, proc.stderr)
            want = json.loads((FIXTURES / "filter_golden.json").read_text())
            scores = {r["id"]: r["s_avg"] for r in read_jsonl(pathlib.Path(tmp) / "scores.jsonl")}
            for key, value in want["s_avg"].items():
                self.assertAlmostEqual(scores[key], value)
            kept = [r["id"] for r in read_jsonl(pathlib.Path(tmp) / "kept.jsonl")]
            self.assertEqual(kept, want["kept"])


class Pipeline(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = pathlib.Path(cls.tmp.name)
        proc = run("synth", "--config", CONFIG, "--out", cls.root / "syn")
        assert proc.returncode == 0, proc.stderr

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_synth_writes_manifest_images_and_echo(self):
        syn = self.root / "syn"
        manifest = read_jsonl(syn / "dataset" / "manifest.jsonl")
        self.assertEqual(len(manifest), 40)
        self.assertEqual(len(list((syn / "dataset" / "images").glob("*.png"))), 40)
        echo = json.loads((syn / "config.effective.json").read_text())
        self.assertEqual(echo["retrieval"]["k"], 4)
        self.assertEqual(echo["coa"]["max_turns"], 8)
        self.assertEqual(len(read_jsonl(syn / "orders.jsonl")), 40)

    def test_synth_rerun_is_byte_identical(self):
        other = self.root / "syn2"
        self.assertEqual(run("synth", "--config", CONFIG, "--out", other, "--workers", 1).returncode, 0)
        for rel in ("orders.jsonl", "dataset/manifest.jsonl", "network.json", "dataset/images/s000007.png"):
            self.assertEqual((self.root / "syn" / rel).read_bytes(), (other / rel).read_bytes(), rel)

    def test_calibrate_retrieve_adjudicate(self):
        syn = self.root / "syn"
        orders = (syn / "orders.jsonl").read_text().splitlines(keepends=True)
        history, queries = self.root / "history.jsonl", self.root / "queries.jsonl"
        history.write_text("".join(orders[:30]))
        queries.write_text("".join(orders[30:]))

        cal = self.root / "cal"
        proc = run("calibrate", "--config", CONFIG, "--orders", history, "--rules", syn / "rules.json", "--out", cal)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        self.assertEqual(json.loads((cal / "ensemble.json").read_text())["format"], "disputekit-ensemble")

        ret = self.root / "ret"
        proc = run("retrieve", "--config", CONFIG, "--orders", queries, "--history", history, "--k", 3, "--out", ret)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        rows = read_jsonl(ret / "neighbors.jsonl")
        self.assertEqual(len(rows), 10)
        self.assertTrue(all(len(r["neighbors"]) == 3 for r in rows))

        adj = self.root / "adj"
        proc = run("adjudicate", "--config", CONFIG, "--orders", queries, "--store", ret / "store.jsonl",
                   "--ensemble", cal / "ensemble.json", "--rules", syn / "rules.json", "--out", adj)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        summary = json.loads((adj / "summary.json").read_text())
        self.assertEqual(summary["failures"], 0)
        self.assertEqual(summary["metrics"]["accuracy"], 1.0)

    def test_adjudicate_requires_precedents(self):
        proc = run("adjudicate", "--config", CONFIG, "--orders", self.root / "syn" / "orders.jsonl",
                   "--out", self.root / "x")
        self.assertEqual(proc.returncode, 2)

    def test_bench_reports_are_byte_identical(self):
        a, b = self.root / "bench_a", self.root / "bench_b"
        self.assertEqual(run("bench", "--config", CONFIG, "--out", a).returncode, 0)
        self.assertEqual(run("bench", "--config", CONFIG, "--out", b, "--workers", 1).returncode, 0)
        self.assertEqual((a / "report.json").read_bytes(), (b / "report.json").read_bytes())
        report = json.loads((a / "report.json").read_text())
        self.assertEqual(report["schema_version"], 1)
        self.assertEqual(list(report["variants"]), ["binary_reward", "full", "no_refinement"])
        self.assertEqual(report["variants"]["full"]["metrics"]["accuracy"], 1.0)


if __name__ == "__main__":
    unittest.main(verbosity=2)
