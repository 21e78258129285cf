#!/usr/bin/env python3

""" Tests for the compcell command """

import contextlib
import io
import json
import os
import tempfile
import unittest

import pandas as pd

import compcell.cli as cli
from compcell.model import read_scenario, write_scenario

from .helpers import data_file, make_scenario


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def _path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def _run(self, *argv):
        """ Run the command, returning (exit code, stdout, stderr) """
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = cli.main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def _read(self, name):
        with open(self._path(name), "r") as infile:
            return infile.read()

    def _generate(self, name, *extra):
        code, _, _ = self._run(
            "generate",
            "--clusters",
            "1",
            "--bs-per-cluster",
            "2",
            "--ues-per-cluster",
            "3",
            "-o",
            self._path(name),
            *extra
        )
        self.assertEqual(code, cli.EXIT_OK)
        return self._path(name)

    def test_generate(self):
        path = self._generate("a.json", "--seed", "5")
        scenario = read_scenario(path)
        self.assertEqual((scenario.n_bs, scenario.n_ues), (2, 3))
        self.assertEqual(json.loads(self._read("a.json"))["carrier_ghz"], 2.0)

        self._generate("b.json", "--seed", "5")
        self.assertEqual(self._read("a.json"), self._read("b.json"))

    def test_usage_errors(self):
        self.assertEqual(self._run("generate")[0], cli.EXIT_USAGE)
        self.assertEqual(self._run("frobnicate")[0], cli.EXIT_USAGE)
        self.assertEqual(self._run("--version")[0], cli.EXIT_OK)
        code, _, err = self._run("solve", self._path("missing.json"))
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertIn("error", err)

    def test_solve(self):
        path = self._generate("s.json")
        code, out, _ = self._run("solve", path, "--assoc", "full")
        self.assertEqual(code, cli.EXIT_OK)
        doc = json.loads(out)
        self.assertEqual(doc["association"], [[1, 1, 1], [1, 1, 1]])
        self.assertGreater(doc["solution"]["objective"], 0.0)
        self.assertEqual(len(doc["solution"]["binding"]), 3)

    def test_solve_unserved(self):
        path = self._generate("s.json")
        assoc = self._path("assoc.json")
        with open(assoc, "w") as outfile:
            json.dump(dict(kappa=[[1, 1, 0], [0, 0, 0]]), outfile)
        code, _, err = self._run("solve", path, "--assoc", assoc)
        self.assertEqual(code, cli.EXIT_INFEASIBLE)
        self.assertIn("coupling", err)
        self.assertIn("resources must carry the scaled demand", err)

    def test_no_convergence(self):
        path = self._generate("s.json")
        code, _, _ = self._run("solve", path, "--max-iterations", "1")
        self.assertEqual(code, cli.EXIT_NO_CONVERGENCE)

    def test_zero_demand(self):
        path = self._path("zero.json")
        write_scenario(make_scenario([[1.0]], [1], [1], demands=[0.0]), path)
        code, _, err = self._run("solve", path)
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertIn("zero demand", err)

    def test_select(self):
        path = self._generate("s.json", "--seed", "3")
        code, _, _ = self._run(
            "select",
            path,
            "-o",
            self._path("out.json"),
            "--trace",
            self._path("t.jsonl"),
        )
        self.assertEqual(code, cli.EXIT_OK)
        doc = json.loads(self._read("out.json"))
        lines = self._read("t.jsonl").splitlines()
        self.assertEqual(len(lines), 6)
        self.assertEqual(doc["filters"], 6)
        self.assertEqual(json.loads(lines[0])["ue"], 0)
        self.assertGreaterEqual(
            doc["after"]["objective"], doc["before"]["objective"] - 1e-9
        )

    def test_select_from_handover(self):
        path = self._generate("s.json", "--seed", "3")
        code, out, _ = self._run("select", path, "--start", "handover")
        self.assertEqual(code, cli.EXIT_OK)
        doc = json.loads(out)
        self.assertEqual([sum(c) for c in zip(*doc["initial_association"])], [1, 1, 1])
        self.assertGreaterEqual(
            doc["after"]["objective"], doc["before"]["objective"] - 1e-9
        )

    def test_reduce_and_solve(self):
        path = self._path("red.json")
        code, out, _ = self._run("reduce", data_file("example.cnf"), "-o", path)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("8 BSs, 5 UEs", out)

        code, out, _ = self._run("solve", path, "--assoc", "assignment:000")
        self.assertEqual(code, cli.EXIT_OK)
        satisfied = json.loads(out)["solution"]["objective"]
        self.assertAlmostEqual(satisfied, 5.0, places=6)

        code, out, _ = self._run("solve", path, "--assoc", "assignment:001")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertLess(json.loads(out)["solution"]["objective"], satisfied)

        self.assertEqual(
            self._run("solve", path, "--assoc", "assignment:0x1")[0], cli.EXIT_USAGE
        )

    def test_assignment_needs_reduction(self):
        path = self._generate("s.json")
        code, _, _ = self._run("solve", path, "--assoc", "assignment:01")
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_certify(self):
        code, out, _ = self._run("certify", data_file("unsat.cnf"))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(out.strip(), "UNSAT infeasible")

        path = self._path("cert.json")
        code, out, _ = self._run("certify", data_file("sat.cnf"), "-o", path)
        self.assertEqual(out.strip(), "SAT feasible")
        self.assertTrue(json.loads(self._read("cert.json"))["feasible"])

    def test_invalid_formula(self):
        path = self._path("bad.cnf")
        with open(path, "w") as outfile:
            outfile.write("p cnf 3 1\n1 2 0\n")
        self.assertEqual(self._run("certify", path)[0], cli.EXIT_USAGE)

    def test_certify_too_large(self):
        # six unused variables push the enumeration past its limit
        path = self._path("wide.cnf")
        signs = [(a, b, c) for a in (1, -1) for b in (1, -1) for c in (1, -1)]
        with open(path, "w") as outfile:
            outfile.write("p cnf 9 8\n")
            for a, b, c in signs:
                outfile.write("{} {} {} 0\n".format(a, 2 * b, 3 * c))
        code, _, err = self._run("certify", path)
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertIn("exceeds limit 1048576", err)

    def test_sweep(self):
        argv = [
            "sweep",
            "--axis",
            "bs",
            "--values",
            "1,2",
            "--reps",
            "2",
            "--clusters",
            "1",
            "--ues",
            "3",
        ]
        code, _, _ = self._run(
            *argv, "-o", self._path("a.csv"), "--summary", self._path("sum.csv")
        )
        self.assertEqual(code, cli.EXIT_OK)
        table = pd.read_csv(self._path("a.csv"))
        self.assertEqual(list(table.columns), cli.ROW_COLUMNS)
        self.assertEqual(table["value"].tolist(), [1, 1, 2, 2])
        self.assertEqual(table["rep"].tolist(), [0, 1, 0, 1])
        self.assertEqual(table["seed"].tolist(), [0, 1, 0, 1])
        # one BS per cluster leaves nothing to select
        self.assertEqual(table["improvement_pct"].tolist()[:2], [0.0, 0.0])
        self.assertTrue((table["improvement_pct"] >= -1e-6).all())

        summary = pd.read_csv(self._path("sum.csv"))
        self.assertEqual(list(summary.columns), cli.SUMMARY_COLUMNS)
        self.assertEqual(summary["reps"].tolist(), [2, 2])

        self._run(*argv, "-o", self._path("b.csv"))
        self.assertEqual(self._read("a.csv"), self._read("b.csv"))

        code, _, _ = self._run(
            *argv, "--baseline", "strongest", "-o", self._path("c.csv")
        )
        self.assertEqual(code, cli.EXIT_OK)
        strongest = pd.read_csv(self._path("c.csv"))
        self.assertTrue(
            (table["sum_eta_noncomp"] >= strongest["sum_eta_noncomp"] - 1e-9).all()
        )

    def test_sweep_bad_values(self):
        code, _, _ = self._run(
            "sweep", "--axis", "ues", "--values", "a,b", "-o", self._path("x.csv")
        )
        self.assertEqual(code, cli.EXIT_USAGE)


@unittest.skipUnless(os.environ.get("COMPCELL_SLOW"), "set COMPCELL_SLOW to run")
class TestFullSweep(unittest.TestCase):
    def setUp(self):
        pass

    def tearDown(self):
        pass

    def test_comp_gain_over_bs_density(self):
        base = dict(n_clusters=3, ues_per_cluster=20, max_load=1.0)
        table = cli.sweep_table("bs", [2, 4, 6, 8], 30, 0, base, workers=4)
        self.assertEqual(len(table), 120)
        self.assertTrue((table["improvement_pct"] >= -1e-6).all())
        summary = cli.sweep_summary(table)
        self.assertTrue(
            (summary["rate_comp_bps_mean"] >= summary["rate_noncomp_bps_mean"]).all()
        )
        self.assertTrue((summary["improvement_pct_mean"] > 0.0).all())
        mean = float(table["improvement_pct"].mean())
        self.assertGreater(mean, 2.0)
        self.assertLess(mean, 30.0)

    def test_comp_gain_grows_with_max_load(self):
        base = dict(n_clusters=3, bs_per_cluster=4, ues_per_cluster=20)
        table = cli.sweep_table("max_load", [0.6, 0.8, 1.0], 30, 0, base, workers=4)
        means = cli.sweep_summary(table)["improvement_pct_mean"].tolist()
        self.assertEqual(len(means), 3)
        self.assertTrue(all(a <= b for a, b in zip(means, means[1:])), means)


if __name__ == "__main__":
    unittest.main()
