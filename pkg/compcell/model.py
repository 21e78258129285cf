#!/usr/bin/env python3

"""
Network Scenario Types

This module holds the static description of a fronthaul-constrained C-RAN
(clusters, base stations, users, effective gains and traffic), the BS-UE
association matrix, per-UE resource allocations and the QoS summary of a
solved allocation. It also reads and writes the scenario JSON document.

Example::

    import compcell.model as cm

    scenario = cm.read_scenario("scenario.json")

    problems = cm.validate(scenario)
    print([str(x) for x in problems])

    assoc = cm.Association.full(scenario)
    print(cm.serving_set(assoc, 0))
    print(cm.served_users(assoc, 0))

"""

import functools
import json
import math
import numbers
import os
import re
import typing
import urllib.request
from dataclasses import dataclass

import numpy as np

from .errors import ClusterViolation, ScenarioError

#: Relative slack when checking that a traffic trace covers the period.
TRACE_COVERAGE_RTOL = 1e-9


@dataclass(frozen=True)
class EffectiveGain:
    """ Composed channel-precoder coefficient of one BS-UE pair """

    coeff: typing.Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeff", tuple(complex(x) for x in self.coeff))

    @classmethod
    def scalar(cls, value: complex) -> "EffectiveGain":
        """ Construct a one-dimensional gain """
        return cls((complex(value),))

    @property
    def dimension(self) -> int:
        return len(self.coeff)

    @property
    def magnitude(self) -> float:
        """ Euclidean norm of the coefficient vector (the "gain value") """
        return math.sqrt(sum(abs(x) ** 2 for x in self.coeff))

    def is_finite(self) -> bool:
        return all(math.isfinite(x.real) and math.isfinite(x.imag) for x in self.coeff)


@dataclass(frozen=True)
class TrafficTrace:
    """
    Piecewise-constant traffic density of one UE over the period

    Parameters
    ----------
    durations : tuple of float
        Length of each segment in seconds.
    rates : tuple of float
        Traffic density of each segment in bits per second.

    """

    durations: typing.Tuple[float, ...]
    rates: typing.Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "durations", tuple(float(x) for x in self.durations))
        object.__setattr__(self, "rates", tuple(float(x) for x in self.rates))
        assert len(self.durations) == len(
            self.rates
        ), "Trace has {} durations but {} rates.".format(
            len(self.durations), len(self.rates)
        )

    @classmethod
    def constant(cls, volume: float, period: float) -> "TrafficTrace":
        """ Single segment delivering `volume` bits over `period` seconds """
        return cls((period,), (volume / period,))

    @property
    def volume(self) -> float:
        """ Total bits requested over the trace """
        return math.fsum(d * r for d, r in zip(self.durations, self.rates))

    @property
    def span(self) -> float:
        return math.fsum(self.durations)

    def covers(self, period: float) -> bool:
        """ Does the trace span exactly `period` seconds? """
        return abs(self.span - period) <= TRACE_COVERAGE_RTOL * max(period, 1.0)

    def rate_at(self, tau: float) -> float:
        """ Traffic density at time offset `tau` from the start of the period """
        start = 0.0
        for duration, rate in zip(self.durations, self.rates):
            if tau < start + duration:
                return rate
            start += duration
        return self.rates[-1] if self.rates else 0.0


@dataclass(frozen=True)
class BaseStation:
    """ A BS/RRH with its fronthaul link and gains toward every UE """

    cluster: int
    position: typing.Tuple[float, float]
    power_per_ru: float
    fronthaul_capacity: float
    gains: typing.Tuple[EffectiveGain, ...]


@dataclass(frozen=True)
class User:
    """ A UE and its traffic over the period """

    cluster: int
    position: typing.Tuple[float, float]
    traffic_density: TrafficTrace

    @property
    def demand_volume(self) -> float:
        return self.traffic_density.volume


@dataclass(frozen=True)
class NetworkScenario:
    """
    Static problem instance

    Parameters
    ----------
    clusters : tuple of int
        Cluster ids.
    base_stations : tuple of BaseStation
        All BSs (m entries).
    users : tuple of User
        All UEs (q entries).
    noise_power : float
        Noise power per RU band in watts.
    rus_per_bs : int
        Number M of resource units per BS.
    ru_bandwidth_hz : float
        Bandwidth B of one RU.
    max_load : float
        Maximum fraction of occupied RUs per BS.
    period_seconds : float
        Length of the allocation period.

    """

    clusters: typing.Tuple[int, ...]
    base_stations: typing.Tuple[BaseStation, ...]
    users: typing.Tuple[User, ...]
    noise_power: float
    rus_per_bs: int
    ru_bandwidth_hz: float
    max_load: float
    period_seconds: float

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "base_stations", tuple(self.base_stations))
        object.__setattr__(self, "users", tuple(self.users))

    @property
    def n_bs(self) -> int:
        return len(self.base_stations)

    @property
    def n_ues(self) -> int:
        return len(self.users)

    @functools.cached_property
    def powers(self) -> np.ndarray:
        return _frozen(np.array([x.power_per_ru for x in self.base_stations], float))

    @functools.cached_property
    def fronthaul(self) -> np.ndarray:
        return _frozen(
            np.array([x.fronthaul_capacity for x in self.base_stations], float)
        )

    @functools.cached_property
    def bs_clusters(self) -> np.ndarray:
        return _frozen(np.array([x.cluster for x in self.base_stations], int))

    @functools.cached_property
    def ue_clusters(self) -> np.ndarray:
        return _frozen(np.array([x.cluster for x in self.users], int))

    @functools.cached_property
    def demands(self) -> np.ndarray:
        """ Demand volume V_j of every UE in bits """
        return _frozen(np.array([x.demand_volume for x in self.users], float))

    @functools.cached_property
    def gain_dimension(self) -> int:
        dims = [g.dimension for bs in self.base_stations for g in bs.gains]
        return max(dims, default=1)

    @functools.cached_property
    def gain_tensor(self) -> np.ndarray:
        """ Complex coefficients, shape (m, q, d), zero-padded to the largest d """
        out = np.zeros((self.n_bs, self.n_ues, self.gain_dimension), complex)
        for i, bs in enumerate(self.base_stations):
            for j, gain in enumerate(bs.gains[: self.n_ues]):
                out[i, j, : gain.dimension] = gain.coeff
        return _frozen(out)

    @functools.cached_property
    def weighted_gains(self) -> np.ndarray:
        """ sqrt(p_i) times the coefficients, shape (m, q, d) """
        return _frozen(np.sqrt(self.powers)[:, None, None] * self.gain_tensor)

    @functools.cached_property
    def received_power(self) -> np.ndarray:
        """ p_i times the squared gain magnitude, shape (m, q) """
        return _frozen((np.abs(self.weighted_gains) ** 2).sum(axis=-1))

    @functools.cached_property
    def candidates(self) -> np.ndarray:
        """ Boolean (m, q) mask of BS-UE pairs sharing a cluster """
        return _frozen(self.bs_clusters[:, None] == self.ue_clusters[None, :])


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Violation:
    """ One invariant violation found by `validate` """

    code: str
    message: str
    index: typing.Optional[int] = None

    def __str__(self):
        return "{}: {}".format(self.code, self.message)


def validate(scenario: NetworkScenario) -> typing.List[Violation]:
    """
    Check every invariant of a scenario

    Parameters
    ----------
    scenario : NetworkScenario
        The scenario to check.

    Returns
    -------
    list of Violation
        Empty if the scenario is valid.

    """
    out = []
    known = set(scenario.clusters)
    if len(known) != len(scenario.clusters):
        out.append(Violation("duplicate-cluster", "cluster ids must be unique"))
    if not scenario.noise_power > 0:
        out.append(Violation("bad-noise", "noise power must be positive"))
    if not 0 < scenario.max_load <= 1:
        out.append(Violation("bad-max-load", "max load must be in (0, 1]"))
    if int(scenario.rus_per_bs) != scenario.rus_per_bs or scenario.rus_per_bs < 1:
        out.append(Violation("bad-rus", "RUs per BS must be an integer >= 1"))
    if not scenario.ru_bandwidth_hz > 0:
        out.append(Violation("bad-bandwidth", "RU bandwidth must be positive"))
    if not scenario.period_seconds > 0:
        out.append(Violation("bad-period", "period must be positive"))

    for i, bs in enumerate(scenario.base_stations):
        if bs.cluster not in known:
            out.append(
                Violation(
                    "unknown-cluster",
                    "BS {} is in unknown cluster {}".format(i, bs.cluster),
                    i,
                )
            )
        if not bs.power_per_ru > 0:
            out.append(Violation("bad-power", "BS {} power must be > 0".format(i), i))
        if not bs.fronthaul_capacity > 0:
            out.append(
                Violation("bad-fronthaul", "BS {} fronthaul must be > 0".format(i), i)
            )
        if len(bs.gains) != scenario.n_ues:
            out.append(
                Violation(
                    "gain-count",
                    "BS {} has {} gains for {} UEs".format(
                        i, len(bs.gains), scenario.n_ues
                    ),
                    i,
                )
            )
        if any(g.dimension not in (1, 2) for g in bs.gains):
            out.append(
                Violation(
                    "gain-dimension", "BS {} gain dimension not 1 or 2".format(i), i
                )
            )
        if not all(g.is_finite() for g in bs.gains):
            out.append(
                Violation("gain-not-finite", "BS {} has non-finite gains".format(i), i)
            )

    for j, ue in enumerate(scenario.users):
        if ue.cluster not in known:
            out.append(
                Violation(
                    "unknown-cluster",
                    "UE {} is in unknown cluster {}".format(j, ue.cluster),
                    j,
                )
            )
        trace = ue.traffic_density
        if any(r < 0 for r in trace.rates) or any(d <= 0 for d in trace.durations):
            out.append(
                Violation("negative-traffic", "UE {} has negative traffic".format(j), j)
            )
        if not trace.covers(scenario.period_seconds):
            out.append(
                Violation(
                    "trace-coverage",
                    "UE {} trace spans {} s, period is {} s".format(
                        j, trace.span, scenario.period_seconds
                    ),
                    j,
                )
            )
        if not ue.demand_volume > 0:
            out.append(Violation("zero-demand", "UE {} has no demand".format(j), j))

    return out


def is_valid(scenario: NetworkScenario) -> bool:
    """ Does the scenario satisfy every invariant? """
    return not validate(scenario)


@dataclass(frozen=True, eq=False)
class Association:
    """
    Binary BS x UE association matrix

    The bare constructor knows nothing of clusters and only checks that the
    matrix is binary. Use `Association.from_matrix` to build one for a
    scenario; it rejects associations that cross clusters, and so do the
    SINR, rate and allocation routines.

    """

    kappa: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.kappa)
        if arr.ndim != 2:
            raise ValueError("Association matrix must be two-dimensional.")
        if arr.dtype != bool:
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError("Association matrix must be binary.")
        arr = np.array(arr, dtype=bool)
        object.__setattr__(self, "kappa", _frozen(arr))

    @classmethod
    def from_matrix(cls, scenario: NetworkScenario, kappa) -> "Association":
        """
        Build an association for `scenario`

        Raises
        ------
        ValueError
            If the shape does not match the scenario.
        ClusterViolation
            If a BS would serve a UE of another cluster.

        """
        out = cls(kappa)
        if out.kappa.shape != (scenario.n_bs, scenario.n_ues):
            raise ValueError(
                "Association shape {} does not match scenario ({}, {}).".format(
                    out.kappa.shape, scenario.n_bs, scenario.n_ues
                )
            )
        bad = np.argwhere(out.kappa & ~scenario.candidates)
        if len(bad):
            raise ClusterViolation(int(bad[0][0]), int(bad[0][1]))
        return out

    @classmethod
    def empty(cls, scenario: NetworkScenario) -> "Association":
        return cls(np.zeros((scenario.n_bs, scenario.n_ues), bool))

    @classmethod
    def full(cls, scenario: NetworkScenario) -> "Association":
        """ Every BS serves every UE of its own cluster """
        return cls(scenario.candidates.copy())

    @property
    def n_bs(self) -> int:
        return self.kappa.shape[0]

    @property
    def n_ues(self) -> int:
        return self.kappa.shape[1]

    def to_list(self) -> typing.List[typing.List[int]]:
        return self.kappa.astype(int).tolist()

    def __eq__(self, other):
        if not isinstance(other, Association):
            return NotImplemented
        return np.array_equal(self.kappa, other.kappa)

    def __hash__(self):
        return hash((self.kappa.shape, self.kappa.tobytes()))

    def __repr__(self):
        return "Association({})".format(self.to_list())


def serving_set(assoc: Association, ue: int) -> typing.FrozenSet[int]:
    """
    BSs serving a UE

    Parameters
    ----------
    assoc : Association
    ue : int
        UE index.

    Returns
    -------
    frozenset of int

    Raises
    ------
    IndexError
        If `ue` is out of range.

    """
    if not 0 <= ue < assoc.n_ues:
        raise IndexError("UE index {} out of range".format(ue))
    return frozenset(int(x) for x in np.flatnonzero(assoc.kappa[:, ue]))


def served_users(assoc: Association, bs: int) -> typing.FrozenSet[int]:
    """
    UEs served by a BS

    Parameters
    ----------
    assoc : Association
    bs : int
        BS index.

    Returns
    -------
    frozenset of int

    Raises
    ------
    IndexError
        If `bs` is out of range.

    """
    if not 0 <= bs < assoc.n_bs:
        raise IndexError("BS index {} out of range".format(bs))
    return frozenset(int(x) for x in np.flatnonzero(assoc.kappa[bs, :]))


def candidate_set(scenario: NetworkScenario, ue: int) -> typing.Tuple[int, ...]:
    """ BSs in the cluster of a UE, in ascending index order """
    if not 0 <= ue < scenario.n_ues:
        raise IndexError("UE index {} out of range".format(ue))
    return tuple(int(x) for x in np.flatnonzero(scenario.candidates[:, ue]))


@dataclass(frozen=True, eq=False)
class Allocation:
    """ Nonnegative per-UE fractions of RUs """

    alpha: np.ndarray

    def __post_init__(self):
        arr = np.array(self.alpha, dtype=float).reshape(-1)
        if not np.isfinite(arr).all():
            raise ValueError("Allocation must be finite.")
        if (arr < 0).any():
            raise ValueError("Allocation must be nonnegative.")
        object.__setattr__(self, "alpha", _frozen(arr))

    def __len__(self):
        return len(self.alpha)

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return np.array_equal(self.alpha, other.alpha)

    def __hash__(self):
        return hash(self.alpha.tobytes())

    def __repr__(self):
        return "Allocation({})".format(self.alpha.tolist())


def as_alpha(alloc) -> np.ndarray:
    """ Return the allocation vector of an Allocation or array-like """
    if isinstance(alloc, Allocation):
        return alloc.alpha
    return np.asarray(alloc, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class QosResult:
    """
    QoS scaling achieved by an allocation and its diagnostics

    Parameters
    ----------
    eta : numpy.ndarray
        Per-UE QoS scaling.
    lam : float
        Common QoS level of the load-limited allocation.
    nu : float
        Common QoS level allowed by the fronthaul (inf if unconstrained).
    loads : numpy.ndarray
        Per-BS load of the allocation.
    fronthaul_usage : numpy.ndarray
        Per-BS fronthaul volume over the period in bits.

    """

    eta: np.ndarray
    lam: float
    nu: float
    loads: np.ndarray
    fronthaul_usage: np.ndarray

    @property
    def objective(self) -> float:
        """ Sum of the QoS scalings """
        return float(np.sum(self.eta))

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return dict(
            eta=[float(x) for x in self.eta],
            lam=float(self.lam),
            nu=json_float(self.nu),
            loads=[float(x) for x in self.loads],
            fronthaul_usage=[float(x) for x in self.fronthaul_usage],
        )


def json_float(value: float) -> typing.Optional[float]:
    """ JSON has no infinity; infinite values are written as null """
    return float(value) if math.isfinite(value) else None


#
# Scenario JSON document
#


def scenario_to_dict(scenario: NetworkScenario) -> typing.Dict[str, typing.Any]:
    """ Convert a scenario to the JSON document structure """
    bss = []
    for bs in scenario.base_stations:
        bss.append(
            dict(
                cluster=bs.cluster,
                pos=[float(bs.position[0]), float(bs.position[1])],
                power_per_ru_w=float(bs.power_per_ru),
                fronthaul_bits=float(bs.fronthaul_capacity),
                gains=[_gain_to_json(g) for g in bs.gains],
            )
        )
    ues = []
    for ue in scenario.users:
        pos = [float(ue.position[0]), float(ue.position[1])]
        item = dict(cluster=ue.cluster, pos=pos)
        trace = ue.traffic_density
        if len(trace.durations) == 1:
            item["demand_bits"] = trace.volume
        else:
            item["traffic"] = dict(
                durations=list(trace.durations), rates=list(trace.rates)
            )
        ues.append(item)
    return dict(
        clusters=list(scenario.clusters),
        bs=bss,
        ues=ues,
        noise_w=float(scenario.noise_power),
        M=int(scenario.rus_per_bs),
        B_hz=float(scenario.ru_bandwidth_hz),
        max_load=float(scenario.max_load),
        period_s=float(scenario.period_seconds),
    )


def scenario_from_dict(doc: typing.Mapping[str, typing.Any]) -> NetworkScenario:
    """
    Build a scenario from the JSON document structure

    BSs without a `gains` entry get distance-based gains (no shadowing) at
    the document's `carrier_ghz` (default 2 GHz).

    Raises
    ------
    ScenarioError
        If required keys are missing or have the wrong type.

    """
    try:
        period = float(doc["period_s"])
        users = []
        for item in doc["ues"]:
            if "traffic" in item:
                trace = TrafficTrace(
                    tuple(item["traffic"]["durations"]), tuple(item["traffic"]["rates"])
                )
            else:
                trace = TrafficTrace.constant(float(item["demand_bits"]), period)
            users.append(User(int(item["cluster"]), _position(item["pos"]), trace))

        base_stations = []
        for item in doc["bs"]:
            position = _position(item["pos"])
            if "gains" in item and item["gains"] is not None:
                gains = tuple(_gain_from_json(g) for g in item["gains"])
            else:
                from .scenario import distance_gains

                gains = distance_gains(
                    position,
                    [u.position for u in users],
                    float(doc.get("carrier_ghz", 2.0)),
                )
            base_stations.append(
                BaseStation(
                    cluster=int(item["cluster"]),
                    position=position,
                    power_per_ru=float(item["power_per_ru_w"]),
                    fronthaul_capacity=float(item["fronthaul_bits"]),
                    gains=gains,
                )
            )

        return NetworkScenario(
            clusters=tuple(int(x) for x in doc["clusters"]),
            base_stations=tuple(base_stations),
            users=tuple(users),
            noise_power=float(doc["noise_w"]),
            rus_per_bs=int(doc["M"]),
            ru_bandwidth_hz=float(doc["B_hz"]),
            max_load=float(doc["max_load"]),
            period_seconds=period,
        )
    except KeyError as exc:
        raise ScenarioError("scenario document is missing key {}".format(exc))
    except (TypeError, ValueError, AssertionError) as exc:
        raise ScenarioError("scenario document is malformed: {}".format(exc))


def _position(value) -> typing.Tuple[float, float]:
    x, y = value
    return (float(x), float(y))


def _gain_to_json(gain: EffectiveGain):
    pairs = [[float(x.real), float(x.imag)] for x in gain.coeff]
    return pairs[0] if gain.dimension == 1 else pairs


def _gain_from_json(value) -> EffectiveGain:
    if len(value) == 2 and all(isinstance(x, numbers.Real) for x in value):
        return EffectiveGain.scalar(complex(value[0], value[1]))
    return EffectiveGain(tuple(complex(re_, im) for re_, im in value))


def read_document(source) -> typing.Dict[str, typing.Any]:
    """
    Read a JSON document from various possibilities

    Parameters
    ----------
    source : dict or str or bytes or file-like
        A parsed document, JSON text, a file path, a URL or an open file.

    Returns
    -------
    dict

    """
    if isinstance(source, dict):
        return source
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if hasattr(source, "read"):
        source = source.read()
        if isinstance(source, bytes):
            source = source.decode("utf-8")
    elif isinstance(source, os.PathLike):
        with open(source, "r") as infile:
            source = infile.read()
    elif re.match(r"^\s*(https?|ftp)://", source):
        with urllib.request.urlopen(source.strip()) as inurl:
            source = inurl.read().decode("utf-8")
    elif os.path.isfile(source):
        with open(source, "r") as infile:
            source = infile.read()
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ScenarioError("invalid JSON document: {}".format(exc))


def read_scenario(source) -> NetworkScenario:
    """
    Read a scenario JSON document

    Parameters
    ----------
    source : dict or str or file-like
        See `read_document`.

    Returns
    -------
    NetworkScenario

    """
    return scenario_from_dict(read_document(source))


def dump_document(doc: typing.Mapping[str, typing.Any]) -> str:
    """ Serialize a document deterministically """
    return json.dumps(doc, indent=2) + "\n"


def write_scenario(
    scenario: NetworkScenario,
    path: str,
    extra: typing.Optional[typing.Mapping[str, typing.Any]] = None,
):
    """
    Write a scenario JSON document

    Parameters
    ----------
    scenario : NetworkScenario
        The scenario to write.
    path : str
        Output file name.
    extra : dict, optional
        Additional top-level keys (ignored when the document is read back).

    """
    doc = scenario_to_dict(scenario)
    if extra:
        doc.update(extra)
    with open(path, "w") as outfile:
        outfile.write(dump_document(doc))
