#!/usr/bin/env python3

""" Tests for the brute-force checks and the 3-CNF certificates """

import unittest

import numpy as np

import compcell.oracle as co
from compcell.allocation import solve_optimal
from compcell.dimacs import read_dimacs
from compcell.errors import TooLarge
from compcell.model import Association
from compcell.scenario import (
    CnfFormula,
    assignment_to_association,
    build_sat_instance,
    random_formula,
)
from compcell.selection import default_initial_association, run_algorithm1

from .helpers import data_file, make_scenario, random_scenario


def _permuted(scenario, order):
    """ Same network with the UEs listed in another order """
    gains = np.array([[g.coeff[0] for g in bs.gains] for bs in scenario.base_stations])
    return make_scenario(
        gains[:, order],
        scenario.bs_clusters.tolist(),
        scenario.ue_clusters[order].tolist(),
        powers=scenario.powers,
        fronthaul=scenario.fronthaul,
        demands=scenario.demands[order],
        noise=scenario.noise_power,
        max_load=scenario.max_load,
    )


class TestFeasibility(unittest.TestCase):
    def setUp(self):
        self.formula = CnfFormula(3, ((1, 2, 3),))
        self.scenario, self.meta = build_sat_instance(self.formula)

    def tearDown(self):
        pass

    def test_satisfying_assignment(self):
        assoc = assignment_to_association(self.meta, (True, False, False))
        verdict = co.feasibility_check(self.scenario, assoc)
        self.assertTrue(verdict)
        self.assertEqual(str(verdict), "feasible")
        self.assertLessEqual(verdict.alpha.max(), 1.0 + 1e-9)

    def test_unserved(self):
        verdict = co.feasibility_check(self.scenario, Association.empty(self.scenario))
        self.assertFalse(verdict)
        self.assertEqual((verdict.constraint, verdict.index), ("coupling", 0))

    def test_joint_transmission_overloads_root(self):
        kappa = assignment_to_association(self.meta, (True, True, True)).kappa.copy()
        kappa[self.meta.literal_bs[1], 1] = True
        verdict = co.feasibility_check(self.scenario, Association(kappa))
        self.assertEqual(
            (verdict.constraint, verdict.index), ("load", self.meta.root_bs)
        )

    def test_falsified_clause_overloads_clause_bs(self):
        assoc = assignment_to_association(self.meta, (False, False, False))
        verdict = co.feasibility_check(self.scenario, assoc)
        self.assertEqual(
            (verdict.constraint, verdict.index), ("load", self.meta.clause_bss[0])
        )
        self.assertEqual(str(verdict), "violated(load at 7)")

    def test_fronthaul(self):
        scenario = make_scenario([[1.0]], [1], [1], demands=[2.0], fronthaul=[0.4])
        assoc = Association.full(scenario)
        verdict = co.feasibility_check(scenario, assoc, eta=0.25)
        self.assertEqual((verdict.constraint, verdict.index), ("fronthaul", 0))
        self.assertTrue(co.feasibility_check(scenario, assoc, eta=0.2))

    def test_lower_demand_stays_feasible(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            scenario = random_scenario(rng, 3, 3)
            assoc = default_initial_association(scenario)
            eta = float(rng.uniform(0.1, 2.0))
            if co.feasibility_check(scenario, assoc, eta):
                self.assertTrue(co.feasibility_check(scenario, assoc, 0.5 * eta))


class TestEnumeration(unittest.TestCase):
    def setUp(self):
        pass

    def tearDown(self):
        pass

    def test_counts(self):
        one = make_scenario([[1.0], [1.0]], [1, 1], [1])
        self.assertEqual(len(list(co.enumerate_associations(one))), 3)
        self.assertEqual(co.enumeration_size(one), 3)

        two = make_scenario(np.ones((2, 2)), [1, 1], [1, 1])
        associations = list(co.enumerate_associations(two))
        self.assertEqual(len(associations), 9)
        self.assertEqual(len(set(associations)), 9)

        mixed = make_scenario(np.ones((3, 2)), [1, 1, 2], [1, 2])
        self.assertEqual(co.enumeration_size(mixed), 3)
        self.assertEqual(len(list(co.enumerate_associations(mixed))), 3)

    def test_order(self):
        one = make_scenario([[1.0], [1.0]], [1, 1], [1])
        lists = [a.to_list() for a in co.enumerate_associations(one)]
        self.assertEqual(lists, [[[1], [0]], [[0], [1]], [[1], [1]]])

    def test_too_large(self):
        scenario = make_scenario(np.ones((5, 5)), [1] * 5, [1] * 5)
        with self.assertRaises(TooLarge):
            next(co.enumerate_associations(scenario))

    def test_single_choice_optimum(self):
        scenario = make_scenario([[1.0, 0.3], [0.3, 1.0]], [1, 2], [1, 2])
        assoc, solution = co.global_optimum(scenario)
        self.assertEqual(assoc, Association.full(scenario))
        self.assertAlmostEqual(
            solution.objective, solve_optimal(scenario, assoc).objective
        )

    def test_selection_between_baseline_and_optimum(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            scenario = random_scenario(
                rng, int(rng.integers(2, 4)), int(rng.integers(2, 4))
            )
            start = default_initial_association(scenario)
            baseline = solve_optimal(scenario, start).objective
            _, selected = run_algorithm1(scenario, start)
            _, best = co.global_optimum(scenario)
            self.assertGreaterEqual(selected.objective, baseline - 1e-9)
            self.assertLessEqual(selected.objective, best.objective + 1e-9)

    def test_optimum_ignores_ue_order(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            scenario = random_scenario(rng, 2, 3)
            order = rng.permutation(3)
            _, best = co.global_optimum(scenario)
            _, permuted = co.global_optimum(_permuted(scenario, order))
            self.assertAlmostEqual(best.objective, permuted.objective, places=7)


class TestCrossCheck(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(13)

    def tearDown(self):
        pass

    def test_isolated(self):
        scenario = make_scenario([[1.0, 0.0], [0.0, 2.0]], [1, 2], [1, 2])
        gap = co.allocation_cross_check(scenario, Association.full(scenario))
        self.assertLess(gap, 1e-6)

    def test_coupled_pair(self):
        scenario = make_scenario([[1.0, 0.8], [0.6, 1.0]], [1, 2], [1, 2])
        gap = co.allocation_cross_check(scenario, Association.full(scenario))
        self.assertLess(gap, 1e-4)

    def test_fronthaul_limited(self):
        scenario = make_scenario(
            [[1.0, 0.0], [0.0, 1.0]], [1, 2], [1, 2], fronthaul=[0.3, 0.5]
        )
        gap = co.allocation_cross_check(scenario, Association.full(scenario))
        self.assertLess(gap, 1e-6)

    def test_random(self):
        for _ in range(50):
            scenario = random_scenario(
                self.rng, int(self.rng.integers(1, 4)), int(self.rng.integers(1, 4))
            )
            assoc = default_initial_association(scenario)
            self.assertLess(co.allocation_cross_check(scenario, assoc), 1e-4)

    def test_size_guard(self):
        scenario = make_scenario(np.ones((1, 4)), [1], [1] * 4)
        with self.assertRaises(TooLarge):
            co.allocation_cross_check(scenario, Association.full(scenario))


class TestCertificate(unittest.TestCase):
    def setUp(self):
        pass

    def tearDown(self):
        pass

    def test_example(self):
        cert = co.certify_formula(read_dimacs(data_file("example.cnf")))
        self.assertEqual(cert.verdict(), "SAT feasible")
        self.assertTrue(cert.consistent)
        self.assertEqual(cert.assignment, (False, False, False))

    def test_unsat(self):
        cert = co.certify_formula(read_dimacs(data_file("unsat.cnf")))
        self.assertEqual(cert.verdict(), "UNSAT infeasible")
        self.assertIsNone(cert.association)
        self.assertEqual(cert.to_dict()["assignment"], None)

    def test_sat(self):
        formula = read_dimacs(data_file("sat.cnf"))
        cert = co.certify_formula(formula)
        self.assertEqual(cert.verdict(), "SAT feasible")
        self.assertTrue(formula.evaluate(cert.assignment))
        scenario, _ = build_sat_instance(formula)
        self.assertTrue(co.feasibility_check(scenario, cert.association))

    def test_random_formulas(self):
        for seed in range(20):
            n_vars = 3 + seed % 2
            formula = random_formula(n_vars, 1 + seed % 5, seed)
            cert = co.certify_formula(formula)
            self.assertTrue(cert.consistent, "seed {}: {}".format(seed, cert.verdict()))

    def test_negligible_gain(self):
        # leakage this small stays within the load slack
        cert = co.certify_formula(CnfFormula(3, ((1, 2, 3),)), negligible_gain=1e-6)
        self.assertEqual(cert.verdict(), "SAT feasible")

    def test_truth_table(self):
        unsat = read_dimacs(data_file("unsat.cnf"))
        self.assertIsNone(co.truth_table_satisfiable(unsat))
        self.assertEqual(co.truth_table_satisfiable(CnfFormula(0, ())), ())


if __name__ == "__main__":
    unittest.main()
