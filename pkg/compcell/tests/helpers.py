#!/usr/bin/env python3

""" Small scenarios shared by the tests """

import os

import numpy as np

from ..model import BaseStation, EffectiveGain, NetworkScenario, TrafficTrace, User

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_file(name):
    return os.path.join(DATA_DIR, name)


def make_scenario(
    gains,
    bs_clusters,
    ue_clusters,
    powers=None,
    fronthaul=None,
    demands=None,
    noise=1.0,
    rus=1,
    bandwidth=1.0,
    max_load=1.0,
    period=1.0,
):
    """
    Scenario from a (BS, UE) matrix of scalar gain coefficients

    Powers and demands default to one, fronthaul to a capacity that never
    binds.

    """
    gains = np.asarray(gains, dtype=complex).reshape(len(bs_clusters), len(ue_clusters))
    m, q = gains.shape
    powers = np.ones(m) if powers is None else np.asarray(powers, dtype=float)
    fronthaul = np.full(m, 1e12) if fronthaul is None else np.asarray(fronthaul, float)
    demands = np.ones(q) if demands is None else np.asarray(demands, dtype=float)
    users = tuple(
        User(int(c), (float(j), 1.0), TrafficTrace.constant(float(v), period))
        for j, (c, v) in enumerate(zip(ue_clusters, demands))
    )
    base_stations = tuple(
        BaseStation(
            cluster=int(bs_clusters[i]),
            position=(float(i), 0.0),
            power_per_ru=float(powers[i]),
            fronthaul_capacity=float(fronthaul[i]),
            gains=tuple(EffectiveGain.scalar(g) for g in gains[i]),
        )
        for i in range(m)
    )
    return NetworkScenario(
        clusters=tuple(sorted(set(bs_clusters) | set(ue_clusters))),
        base_stations=base_stations,
        users=users,
        noise_power=noise,
        rus_per_bs=rus,
        ru_bandwidth_hz=bandwidth,
        max_load=max_load,
        period_seconds=period,
    )


def random_scenario(rng, n_bs, n_ues, n_clusters=1, fronthaul=None, max_load=1.0):
    """
    Random scenario with strong in-cluster gains and weaker cross-cluster gains

    Every cluster gets at least one BS and one UE when the counts allow it.

    """
    bs_clusters = [1 + (i % n_clusters) for i in range(n_bs)]
    ue_clusters = [1 + (j % n_clusters) for j in range(n_ues)]
    same = np.equal.outer(bs_clusters, ue_clusters)
    gains = np.where(
        same,
        rng.uniform(0.3, 2.0, (n_bs, n_ues)),
        rng.uniform(0.0, 0.5, (n_bs, n_ues)),
    )
    return make_scenario(
        gains,
        bs_clusters,
        ue_clusters,
        powers=rng.uniform(0.5, 2.0, n_bs),
        fronthaul=fronthaul,
        demands=rng.uniform(0.5, 2.0, n_ues),
        max_load=max_load,
    )
