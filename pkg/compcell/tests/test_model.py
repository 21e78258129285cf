#!/usr/bin/env python3

""" Tests for the network model and the scenario document """

import io
import json
import os
import tempfile
import unittest

import numpy as np

import compcell.model as cm
from compcell.errors import ClusterViolation, ScenarioError
from compcell.scenario import CnfFormula, build_sat_instance

from .helpers import make_scenario


class TestModel(unittest.TestCase):
    def setUp(self):
        self.scenario = make_scenario(
            [[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]],
            bs_clusters=[1, 1, 2],
            ue_clusters=[1, 1, 2],
            demands=[1.0, 2.0, 3.0],
        )

    def tearDown(self):
        pass

    def test_valid(self):
        self.assertEqual(cm.validate(self.scenario), [])
        self.assertTrue(cm.is_valid(self.scenario))
        self.assertEqual(self.scenario.demands.tolist(), [1.0, 2.0, 3.0])
        self.assertEqual(self.scenario.bs_clusters.tolist(), [1, 1, 2])

    def test_unknown_cluster(self):
        bs = self.scenario.base_stations[0]
        broken = cm.NetworkScenario(
            clusters=(1, 2),
            base_stations=(cm.BaseStation(7, bs.position, 1.0, 1.0, bs.gains),)
            + self.scenario.base_stations[1:],
            users=self.scenario.users,
            noise_power=1.0,
            rus_per_bs=1,
            ru_bandwidth_hz=1.0,
            max_load=1.0,
            period_seconds=1.0,
        )
        codes = [v.code for v in cm.validate(broken)]
        self.assertEqual(codes, ["unknown-cluster"])
        self.assertEqual(cm.validate(broken)[0].index, 0)

    def test_bad_parameters(self):
        scenario = make_scenario(
            [[1.0]], [1], [1], noise=0.0, max_load=1.5, demands=[0.0]
        )
        codes = {v.code for v in cm.validate(scenario)}
        self.assertEqual(codes, {"bad-noise", "bad-max-load", "zero-demand"})

    def test_gain_count(self):
        bs = cm.BaseStation(1, (0.0, 0.0), 1.0, 1.0, (cm.EffectiveGain.scalar(1.0),))
        scenario = cm.NetworkScenario(
            (1,), (bs,), self.scenario.users[:2], 1.0, 1, 1.0, 1.0, 1.0
        )
        self.assertEqual([v.code for v in cm.validate(scenario)], ["gain-count"])

    def test_trace_coverage(self):
        user = cm.User(1, (0.0, 0.0), cm.TrafficTrace((0.5, 0.25), (2.0, 4.0)))
        bs = cm.BaseStation(1, (0.0, 0.0), 1.0, 1.0, (cm.EffectiveGain.scalar(1.0),))
        scenario = cm.NetworkScenario((1,), (bs,), (user,), 1.0, 1, 1.0, 1.0, 1.0)
        self.assertEqual([v.code for v in cm.validate(scenario)], ["trace-coverage"])
        self.assertEqual(user.demand_volume, 2.0)

    def test_traffic_trace(self):
        trace = cm.TrafficTrace((0.25, 0.75), (4.0, 0.0))
        self.assertEqual(trace.volume, 1.0)
        self.assertTrue(trace.covers(1.0))
        self.assertEqual(trace.rate_at(0.1), 4.0)
        self.assertEqual(trace.rate_at(0.5), 0.0)
        self.assertEqual(cm.TrafficTrace.constant(3.0, 2.0).rates, (1.5,))

    def test_arrays_are_read_only(self):
        with self.assertRaises(ValueError):
            self.scenario.powers[0] = 5.0
        self.assertEqual(self.scenario.gain_tensor.shape, (3, 3, 1))
        self.assertEqual(self.scenario.received_power[0, 1], 0.25)

    def test_candidates(self):
        self.assertEqual(cm.candidate_set(self.scenario, 0), (0, 1))
        self.assertEqual(cm.candidate_set(self.scenario, 2), (2,))

    def test_serving_set(self):
        kappa = np.zeros((5, 2), bool)
        assoc = cm.Association(kappa)
        self.assertEqual(cm.serving_set(assoc, 0), frozenset())

        kappa[3, 0] = True
        kappa[[1, 3], 1] = True
        assoc = cm.Association(kappa)
        self.assertEqual(cm.serving_set(assoc, 0), frozenset({3}))
        self.assertEqual(cm.serving_set(assoc, 1), frozenset({1, 3}))
        for bs in range(5):
            for ue in range(2):
                self.assertEqual(
                    ue in cm.served_users(assoc, bs), bs in cm.serving_set(assoc, ue)
                )

    def test_reduction_root_serving_set(self):
        scenario, meta = build_sat_instance(CnfFormula(3, ((1, 2, -3),)))
        assoc = cm.Association.full(scenario)
        self.assertEqual(cm.serving_set(assoc, meta.root_ue), frozenset({meta.root_bs}))

    def test_association_from_matrix(self):
        assoc = cm.Association.from_matrix(
            self.scenario, [[1, 0, 0], [1, 1, 0], [0, 0, 1]]
        )
        self.assertEqual(assoc.to_list(), [[1, 0, 0], [1, 1, 0], [0, 0, 1]])
        self.assertEqual(assoc, cm.Association(assoc.kappa.copy()))

        with self.assertRaises(ClusterViolation) as ctx:
            cm.Association.from_matrix(self.scenario, [[1, 0, 1], [0, 1, 0], [0, 0, 1]])
        self.assertEqual((ctx.exception.bs, ctx.exception.ue), (0, 2))

        with self.assertRaises(ValueError):
            cm.Association.from_matrix(self.scenario, [[1, 0], [0, 1]])
        with self.assertRaises(ValueError):
            cm.Association([[2, 0], [0, 1]])

    def test_allocation(self):
        self.assertEqual(len(cm.Allocation([0.1, 0.2])), 2)
        with self.assertRaises(ValueError):
            cm.Allocation([0.1, -0.2])
        with self.assertRaises(ValueError):
            cm.Allocation([float("nan")])

    def test_json_float(self):
        self.assertIsNone(cm.json_float(float("inf")))
        self.assertEqual(cm.json_float(2.5), 2.5)


class TestScenarioDocument(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.scenario = make_scenario(
            [[1.0, 0.5j], [0.25, 1.0]], [1, 1], [1, 1], powers=[0.2, 0.4]
        )

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_write_and_read(self):
        path = os.path.join(self.tmpdir.name, "scenario.json")
        cm.write_scenario(self.scenario, path, extra=dict(carrier_ghz=2.0))
        with open(path, "r") as infile:
            text = infile.read()
        self.assertTrue(text.endswith("}\n"))
        self.assertEqual(json.loads(text)["bs"][0]["gains"][1], [0.0, 0.5])

        back = cm.read_scenario(path)
        self.assertEqual(cm.scenario_to_dict(back), cm.scenario_to_dict(self.scenario))
        self.assertEqual(cm.read_scenario(io.StringIO(text)).n_ues, 2)
        self.assertEqual(cm.read_scenario(text.encode("utf-8")).n_bs, 2)

    def test_traffic_trace_document(self):
        doc = cm.scenario_to_dict(self.scenario)
        doc["ues"][0].pop("demand_bits")
        doc["ues"][0]["traffic"] = dict(durations=[0.5, 0.5], rates=[1.0, 3.0])
        scenario = cm.read_scenario(doc)
        self.assertEqual(scenario.demands.tolist(), [2.0, 1.0])
        written = cm.scenario_to_dict(scenario)["ues"][0]
        self.assertEqual(written["traffic"], doc["ues"][0]["traffic"])

    def test_omitted_gains(self):
        doc = cm.scenario_to_dict(self.scenario)
        doc["bs"][0]["pos"] = [0.0, 0.0]
        doc["ues"][0]["pos"] = [100.0, 0.0]
        doc["ues"][1]["pos"] = [0.0, 5.0]
        del doc["bs"][0]["gains"]
        scenario = cm.read_scenario(doc)
        gains = scenario.base_stations[0].gains
        # 103.93 dB at 100 m and 2 GHz; the 10 m floor applies at 5 m
        self.assertAlmostEqual(
            -20.0 * np.log10(gains[0].magnitude), 96.1 + 26.0 * np.log10(2.0), places=9
        )
        self.assertAlmostEqual(
            -20.0 * np.log10(gains[1].magnitude),
            36.7 + 22.7 + 26.0 * np.log10(2.0),
            places=9,
        )

    def test_unknown_keys_ignored(self):
        doc = cm.scenario_to_dict(self.scenario)
        doc["comment"] = "ignored"
        self.assertEqual(cm.read_scenario(doc).n_bs, 2)

    def test_malformed(self):
        doc = cm.scenario_to_dict(self.scenario)
        del doc["noise_w"]
        with self.assertRaises(ScenarioError):
            cm.read_scenario(doc)
        with self.assertRaises(ScenarioError):
            cm.read_scenario("{not json")
        doc = cm.scenario_to_dict(self.scenario)
        doc["bs"][0]["pos"] = [1.0]
        with self.assertRaises(ScenarioError):
            cm.read_scenario(doc)


if __name__ == "__main__":
    unittest.main()
