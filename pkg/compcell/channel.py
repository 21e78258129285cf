#!/usr/bin/env python3

"""
SINR, Rate and Load Computation

Interference toward a UE is weighted by the load of each interfering BS, the
probability that the BS transmits on any given RU. Jointly transmitting BSs add
their weighted coefficients coherently.

Example::

    import compcell.channel as cc
    import compcell.model as cm

    scenario = cm.read_scenario("scenario.json")
    assoc = cm.Association.full(scenario)
    alloc = cm.Allocation([0.1] * scenario.n_ues)

    print(cc.loads(assoc, alloc))
    print(cc.rate_vector(scenario, assoc, alloc))
    print(cc.jain_fairness([1.0, 2.0, 3.0]))

"""

import typing

import numpy as np

from .errors import AllZero, ClusterViolation, EmptyServingSet
from .model import Allocation, Association, NetworkScenario, as_alpha

#: Per-BS fraction of occupied RUs, ``loads[i] = sum of alpha over UEs of BS i``.
LoadVector = np.ndarray


def loads(
    assoc: Association, alloc: typing.Union[Allocation, np.ndarray]
) -> LoadVector:
    """
    Load of every BS

    Parameters
    ----------
    assoc : Association
        The BS-UE association.
    alloc : Allocation or array-like
        Per-UE resource fractions.

    Returns
    -------
    numpy.ndarray
        One entry per BS; zero for idle BSs.

    """
    alpha = as_alpha(alloc)
    assert alpha.shape == (assoc.n_ues,), "Allocation has {} entries for {} UEs".format(
        alpha.shape, assoc.n_ues
    )
    return assoc.kappa.astype(float) @ alpha


class LinkModel:
    """
    Signal and interference terms of a fixed association

    The coherent signal power of each UE and the matrix of interference powers
    do not depend on the allocation, so they are computed once and reused by
    the fixed-point solvers.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association

    Raises
    ------
    ClusterViolation
        If a BS serves a UE of another cluster.

    """

    def __init__(self, scenario: NetworkScenario, assoc: Association):
        assert assoc.kappa.shape == (
            scenario.n_bs,
            scenario.n_ues,
        ), "Association shape {} does not match scenario".format(assoc.kappa.shape)
        crossing = np.argwhere(assoc.kappa & ~scenario.candidates)
        if len(crossing):
            raise ClusterViolation(int(crossing[0][0]), int(crossing[0][1]))
        self.scenario = scenario
        self.assoc = assoc
        kappa = assoc.kappa
        combined = np.einsum("ij,ijd->jd", kappa.astype(float), scenario.weighted_gains)
        #: Coherent received signal power per UE.
        self.signal = (np.abs(combined) ** 2).sum(axis=-1)
        #: Interference power per (UE, BS) at full load; zero for serving BSs.
        self.interference = np.where(kappa, 0.0, scenario.received_power).T
        self.served = kappa.any(axis=0)
        self.capacity_scale = scenario.rus_per_bs * scenario.ru_bandwidth_hz

    def loads(self, alpha: np.ndarray) -> LoadVector:
        return self.assoc.kappa.astype(float) @ alpha

    def sinr(self, load: LoadVector) -> np.ndarray:
        """ SINR of every UE under the given BS loads """
        return self.signal / (self.interference @ load + self.scenario.noise_power)

    def rates(self, load: LoadVector) -> np.ndarray:
        """ Achievable rate of every UE in bits per second """
        return self.capacity_scale * np.log2(1.0 + self.sinr(load))

    def rates_for(self, alpha: np.ndarray) -> np.ndarray:
        return self.rates(self.loads(alpha))


def sinr_vector(scenario: NetworkScenario, assoc: Association, load) -> np.ndarray:
    """
    SINR of every UE

    UEs without a serving BS get a SINR of zero.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    load : array-like
        Per-BS loads, used as the activity probability of interferers.

    Returns
    -------
    numpy.ndarray

    """
    load = np.asarray(load, dtype=float)
    assert load.shape == (scenario.n_bs,), "Expected {} loads, got {}".format(
        scenario.n_bs, load.shape
    )
    return LinkModel(scenario, assoc).sinr(load)


def sinr(scenario: NetworkScenario, assoc: Association, load, ue: int) -> float:
    """
    SINR of one UE

    Raises
    ------
    EmptyServingSet
        If no BS serves the UE.

    """
    if not assoc.kappa[:, ue].any():
        raise EmptyServingSet(ue)
    return float(sinr_vector(scenario, assoc, load)[ue])


def rate_vector(
    scenario: NetworkScenario,
    assoc: Association,
    alloc: typing.Union[Allocation, np.ndarray],
) -> np.ndarray:
    """
    Achievable rate of every UE in bits per second

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    alloc : Allocation or array-like
        Per-UE resource fractions; they set the loads seen by the UEs.

    Returns
    -------
    numpy.ndarray
        ``M * B * log2(1 + SINR)`` per UE; zero for unserved UEs.

    """
    return LinkModel(scenario, assoc).rates_for(as_alpha(alloc))


def rate(
    scenario: NetworkScenario,
    assoc: Association,
    alloc: typing.Union[Allocation, np.ndarray],
    ue: int,
) -> float:
    """ Achievable rate of one UE; raises EmptyServingSet if it is unserved """
    if not assoc.kappa[:, ue].any():
        raise EmptyServingSet(ue)
    return float(rate_vector(scenario, assoc, alloc)[ue])


def jain_fairness(eta) -> float:
    """
    Jain's fairness index

    Parameters
    ----------
    eta : array-like
        Nonnegative values.

    Returns
    -------
    float
        ``sum(eta)**2 / (len(eta) * sum(eta**2))``, between ``1/len(eta)`` and 1.

    Raises
    ------
    AllZero
        If every value is zero.

    """
    eta = np.asarray(eta, dtype=float).reshape(-1)
    squares = float(np.sum(eta ** 2))
    if not squares > 0:
        raise AllZero("fairness index of an all-zero vector")
    return float(np.sum(eta)) ** 2 / (len(eta) * squares)
