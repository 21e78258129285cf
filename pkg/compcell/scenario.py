#!/usr/bin/env python3

"""
Scenario Generation

Random hexagonal C-RAN deployments and the network scenario that encodes a
3-CNF formula, where a feasible association exists exactly when the formula is
satisfiable.

Example::

    import compcell.scenario as cs

    scenario = cs.generate(cs.GeneratorConfig(n_clusters=3, rng_seed=7))
    print(scenario.n_bs, scenario.n_ues)

    formula = cs.CnfFormula(3, [(1, 2, -3)])
    scenario, meta = cs.build_sat_instance(formula)
    assoc = cs.assignment_to_association(meta, [True, False, True])
    print(cs.association_to_assignment(meta, assoc))

"""

import logging
import math
import typing
from dataclasses import dataclass

import numpy as np

from .errors import InvalidFormula
from .model import (
    Association,
    BaseStation,
    EffectiveGain,
    NetworkScenario,
    TrafficTrace,
    User,
)

logger = logging.getLogger(__name__)

#: Axial steps between neighboring hexagons, in ring-walk order.
HEX_DIRECTIONS = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Parameters of a random hexagonal deployment

    Each cluster covers a hexagon; the first BS of a cluster sits at its
    center, the other BSs and all UEs are uniform inside it. Gains follow a
    log-distance micro-cell path loss ``slope * log10(d) + intercept +
    freq_slope * log10(f_GHz)`` plus log-normal shadowing.

    """

    n_clusters: int = 3
    cluster_radius_m: float = 500.0
    bs_per_cluster: int = 4
    ues_per_cluster: int = 20
    carrier_ghz: float = 2.0
    ru_bandwidth_hz: float = 180e3
    rus_per_bs: int = 100
    noise_dbm_per_hz: float = -174.0
    tx_power_mw_per_ru: float = 200.0
    fronthaul_gbps: float = 2.5
    shadowing_sigma_db: float = 3.0
    max_load: float = 1.0
    demand_bits: float = 1e6
    period_s: float = 1.0
    rng_seed: int = 0
    pl_slope_db: float = 36.7
    pl_intercept_db: float = 22.7
    pl_freq_slope_db: float = 26.0
    min_distance_m: float = 10.0

    def __post_init__(self):
        for name in ("n_clusters", "bs_per_cluster", "rus_per_bs"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError("{} must be an integer >= 1".format(name))
        ues = self.ues_per_cluster
        if int(ues) != ues or ues < 0:
            raise ValueError("ues_per_cluster must be an integer >= 0")
        for name in (
            "cluster_radius_m",
            "carrier_ghz",
            "ru_bandwidth_hz",
            "tx_power_mw_per_ru",
            "fronthaul_gbps",
            "demand_bits",
            "period_s",
            "min_distance_m",
        ):
            if not getattr(self, name) > 0:
                raise ValueError("{} must be positive".format(name))
        if not self.shadowing_sigma_db >= 0:
            raise ValueError("shadowing_sigma_db must be nonnegative")
        if not 0 < self.max_load <= 1:
            raise ValueError("max_load must be in (0, 1]")
        if int(self.rng_seed) != self.rng_seed:
            raise ValueError("rng_seed must be an integer")

    @property
    def noise_w(self) -> float:
        """ Noise power over one RU band in watts """
        dbm = self.noise_dbm_per_hz + 10.0 * math.log10(self.ru_bandwidth_hz)
        return 10.0 ** (dbm / 10.0) / 1000.0


def hexagon_centers(n: int, radius: float) -> np.ndarray:
    """
    Centers of `n` adjacent hexagons, spiraling out from the origin

    Parameters
    ----------
    n : int
        Number of hexagons.
    radius : float
        Circumradius of each (pointy-top) hexagon.

    Returns
    -------
    numpy.ndarray
        Shape ``(n, 2)``.

    """
    axial = [(0, 0)]
    ring = 1
    while len(axial) < n:
        q, r = -ring, ring
        for dq, dr in HEX_DIRECTIONS:
            for _ in range(ring):
                axial.append((q, r))
                q, r = q + dq, r + dr
        ring += 1
    axial = np.array(axial[:n], dtype=float).reshape(-1, 2)
    x = radius * math.sqrt(3.0) * (axial[:, 0] + axial[:, 1] / 2.0)
    y = radius * 1.5 * axial[:, 1]
    return np.stack([x, y], axis=1)


def in_hexagon(points: np.ndarray, radius: float) -> np.ndarray:
    """ Mask of points inside the origin-centered pointy-top hexagon """
    ax = np.abs(points[:, 0])
    ay = np.abs(points[:, 1])
    return (ax <= math.sqrt(3.0) * radius / 2.0) & (ay <= radius - ax / math.sqrt(3.0))


def sample_in_hexagon(
    rng: np.random.Generator, center, radius: float, size: int
) -> np.ndarray:
    """ Uniform points in a hexagon by rejection from its bounding box """
    half_width = math.sqrt(3.0) * radius / 2.0
    out = np.zeros((0, 2))
    while len(out) < size:
        batch = rng.uniform((-half_width, -radius), (half_width, radius), (2 * size, 2))
        out = np.concatenate([out, batch[in_hexagon(batch, radius)]])
    return out[:size] + np.asarray(center, dtype=float)


def path_loss_db(
    distance_m, carrier_ghz: float, cfg: typing.Optional[GeneratorConfig] = None
):
    """
    Path loss in dB

    Parameters
    ----------
    distance_m : float or array-like
        BS-UE distance; floored at ``cfg.min_distance_m``.
    carrier_ghz : float
        Carrier frequency.
    cfg : GeneratorConfig, optional
        Source of the model constants.

    Returns
    -------
    float or numpy.ndarray

    """
    cfg = cfg or GeneratorConfig()
    d = np.maximum(np.asarray(distance_m, dtype=float), cfg.min_distance_m)
    out = (
        cfg.pl_slope_db * np.log10(d)
        + cfg.pl_intercept_db
        + cfg.pl_freq_slope_db * math.log10(carrier_ghz)
    )
    return float(out) if out.ndim == 0 else out


def distance_gains(
    bs_position, ue_positions, carrier_ghz: float = 2.0
) -> typing.Tuple[EffectiveGain, ...]:
    """ Shadowing-free scalar gains from one BS toward every UE """
    if not len(ue_positions):
        return ()
    delta = np.asarray(ue_positions, dtype=float) - np.asarray(bs_position, dtype=float)
    loss = path_loss_db(np.hypot(delta[:, 0], delta[:, 1]), carrier_ghz)
    return tuple(EffectiveGain.scalar(x) for x in 10.0 ** (-np.atleast_1d(loss) / 20.0))


def generate(cfg: typing.Optional[GeneratorConfig] = None) -> NetworkScenario:
    """
    Generate a random hexagonal deployment

    Parameters
    ----------
    cfg : GeneratorConfig, optional

    Returns
    -------
    NetworkScenario
        A pure function of `cfg`; equal configurations give equal scenarios.

    """
    cfg = cfg or GeneratorConfig()
    rng = np.random.default_rng(cfg.rng_seed)
    centers = hexagon_centers(cfg.n_clusters, cfg.cluster_radius_m)

    bs_pos, bs_cluster, ue_pos, ue_cluster = [], [], [], []
    for index, center in enumerate(centers):
        cluster = index + 1
        extra = sample_in_hexagon(
            rng, center, cfg.cluster_radius_m, cfg.bs_per_cluster - 1
        )
        bs_pos.extend([center] + list(extra))
        bs_cluster.extend([cluster] * cfg.bs_per_cluster)
        ue_pos.extend(
            sample_in_hexagon(rng, center, cfg.cluster_radius_m, cfg.ues_per_cluster)
        )
        ue_cluster.extend([cluster] * cfg.ues_per_cluster)

    bs_pos = np.array(bs_pos, dtype=float).reshape(-1, 2)
    ue_pos = np.array(ue_pos, dtype=float).reshape(-1, 2)
    delta = bs_pos[:, None, :] - ue_pos[None, :, :]
    loss = path_loss_db(np.hypot(delta[..., 0], delta[..., 1]), cfg.carrier_ghz, cfg)
    shadow = rng.normal(0.0, cfg.shadowing_sigma_db, size=loss.shape)
    magnitude = 10.0 ** (-(loss + shadow) / 20.0)

    trace = TrafficTrace.constant(cfg.demand_bits, cfg.period_s)
    users = tuple(
        User(int(c), (float(p[0]), float(p[1])), trace)
        for c, p in zip(ue_cluster, ue_pos)
    )
    base_stations = tuple(
        BaseStation(
            cluster=int(c),
            position=(float(p[0]), float(p[1])),
            power_per_ru=cfg.tx_power_mw_per_ru / 1000.0,
            fronthaul_capacity=cfg.fronthaul_gbps * 1e9 * cfg.period_s,
            gains=tuple(EffectiveGain.scalar(float(g)) for g in magnitude[i]),
        )
        for i, (c, p) in enumerate(zip(bs_cluster, bs_pos))
    )
    logger.debug(
        "generated %d BSs and %d UEs in %d clusters (seed %d)",
        len(base_stations),
        len(users),
        cfg.n_clusters,
        cfg.rng_seed,
    )
    return NetworkScenario(
        clusters=tuple(range(1, cfg.n_clusters + 1)),
        base_stations=base_stations,
        users=users,
        noise_power=cfg.noise_w,
        rus_per_bs=cfg.rus_per_bs,
        ru_bandwidth_hz=cfg.ru_bandwidth_hz,
        max_load=cfg.max_load,
        period_seconds=cfg.period_s,
    )


#
# 3-CNF formulas and their network encoding
#


@dataclass(frozen=True)
class CnfFormula:
    """
    A 3-CNF formula

    Parameters
    ----------
    n_vars : int
        Number of Boolean variables, numbered from 1.
    clauses : sequence of (int, int, int)
        Literals ``+k`` / ``-k`` for variable ``k`` and its negation.

    """

    n_vars: int
    clauses: typing.Tuple[typing.Tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "clauses", tuple(tuple(int(x) for x in c) for c in self.clauses)
        )
        if int(self.n_vars) != self.n_vars or self.n_vars < 0:
            raise InvalidFormula("number of variables must be a nonnegative integer")
        for index, clause in enumerate(self.clauses):
            if len(clause) != 3 or len(set(clause)) != 3:
                raise InvalidFormula(
                    "clause {} must have exactly three distinct literals: {}".format(
                        index + 1, clause
                    )
                )
            for literal in clause:
                if literal == 0 or abs(literal) > self.n_vars:
                    raise InvalidFormula(
                        "clause {} has literal {} outside 1..{}".format(
                            index + 1, literal, self.n_vars
                        )
                    )

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def evaluate(self, assignment: typing.Sequence[bool]) -> bool:
        """ Does `assignment` (one bool per variable) satisfy every clause? """
        assert len(assignment) == self.n_vars, "Expected {} values, got {}".format(
            self.n_vars, len(assignment)
        )
        return all(
            any(bool(assignment[abs(x) - 1]) == (x > 0) for x in clause)
            for clause in self.clauses
        )


def random_formula(n_vars: int, n_clauses: int, seed: int) -> CnfFormula:
    """ Random 3-CNF formula with three distinct variables per clause """
    if n_clauses and n_vars < 3:
        raise InvalidFormula("clauses need at least three variables")
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(n_clauses):
        variables = rng.choice(n_vars, size=3, replace=False) + 1
        signs = np.where(rng.integers(0, 2, size=3) == 1, 1, -1)
        clauses.append(tuple(int(v * s) for v, s in zip(variables, signs)))
    return CnfFormula(n_vars, tuple(clauses))


@dataclass(frozen=True)
class ReductionMeta:
    """
    Where each part of a formula lives in its network encoding

    UE ``root_ue`` is served by BS ``root_bs`` only. Variable ``k`` has UE
    ``variable_ues[k - 1]`` whose candidates are the BSs of literals ``+k`` and
    ``-k`` in `literal_bs`; serving it from the ``-k`` BS means the variable is
    true. Clause ``c`` has UE ``clause_ues[c]`` served by ``clause_bss[c]``,
    and interfered by the BSs of its literals.

    """

    formula: CnfFormula
    root_ue: int
    root_bs: int
    variable_ues: typing.Tuple[int, ...]
    clause_ues: typing.Tuple[int, ...]
    clause_bss: typing.Tuple[int, ...]
    literal_bs: typing.Dict[int, int]

    @property
    def n_bs(self) -> int:
        return 2 * self.formula.n_vars + 1 + self.formula.n_clauses

    @property
    def n_ues(self) -> int:
        return 1 + self.formula.n_vars + self.formula.n_clauses

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return dict(
            n_vars=self.formula.n_vars,
            clauses=[list(x) for x in self.formula.clauses],
            root_ue=self.root_ue,
            root_bs=self.root_bs,
            variable_ues=list(self.variable_ues),
            clause_ues=list(self.clause_ues),
            clause_bss=list(self.clause_bss),
            literal_bs={str(k): v for k, v in sorted(self.literal_bs.items())},
        )

    @classmethod
    def from_dict(cls, doc: typing.Mapping[str, typing.Any]) -> "ReductionMeta":
        return cls(
            formula=CnfFormula(int(doc["n_vars"]), tuple(map(tuple, doc["clauses"]))),
            root_ue=int(doc["root_ue"]),
            root_bs=int(doc["root_bs"]),
            variable_ues=tuple(int(x) for x in doc["variable_ues"]),
            clause_ues=tuple(int(x) for x in doc["clause_ues"]),
            clause_bss=tuple(int(x) for x in doc["clause_bss"]),
            literal_bs={int(k): int(v) for k, v in doc["literal_bs"].items()},
        )


#: Received power of a clause UE from its own BS; with unit noise and unit
#: interference per active literal BS it tolerates two active literals.
CLAUSE_GAIN_POWER = 3.0


def build_sat_instance(
    formula: CnfFormula, negligible_gain: float = 0.0
) -> typing.Tuple[NetworkScenario, ReductionMeta]:
    """
    Network scenario encoding a 3-CNF formula

    UE and BS layout for ``N`` variables and ``K`` clauses:

    * UE 0 is served by the root BS, whose power is ``N + 1``; every literal
      BS interferes it with unit gain, so it tolerates exactly one active
      literal BS per variable.
    * UE ``k`` (1..N) chooses between the BSs of ``+k`` and ``-k``, whose
      coefficients toward it are orthogonal unit vectors.
    * UE ``N + c`` (clause ``c``) is served by its own BS with received power
      3 and sees unit interference from each of its literal BSs; it overloads
      when all three are active.

    Literal BSs are indexed ``2(k-1)`` for ``+k`` and ``2(k-1)+1`` for ``-k``,
    followed by the root BS and the clause BSs. Every UE demands one unit
    with ``M = B = 1`` and a one-second period; fronthaul is ten times the
    total demand.

    Parameters
    ----------
    formula : CnfFormula
    negligible_gain : float, optional
        Coefficient used for all other BS-UE pairs.

    Returns
    -------
    (NetworkScenario, ReductionMeta)

    """
    if not isinstance(formula, CnfFormula):
        raise InvalidFormula("expected a CnfFormula, got {}".format(type(formula)))
    n, k = formula.n_vars, formula.n_clauses
    n_bs, n_ues = 2 * n + 1 + k, 1 + n + k
    root_bs = 2 * n
    literal_bs = {}
    for var in range(1, n + 1):
        literal_bs[var] = 2 * (var - 1)
        literal_bs[-var] = 2 * (var - 1) + 1
    clause_bss = tuple(root_bs + 1 + c for c in range(k))
    variable_ues = tuple(range(1, n + 1))
    clause_ues = tuple(range(n + 1, n + 1 + k))

    coeff = np.zeros((n_bs, n_ues, 2), complex)
    coeff[..., 0] = negligible_gain
    bs_cluster = np.zeros(n_bs, int)
    ue_cluster = np.zeros(n_ues, int)

    bs_cluster[root_bs] = ue_cluster[0] = 1
    coeff[root_bs, 0] = (1.0, 0.0)
    for var, ue in zip(range(1, n + 1), variable_ues):
        pos, neg = literal_bs[var], literal_bs[-var]
        bs_cluster[pos] = bs_cluster[neg] = ue_cluster[ue] = 1 + var
        coeff[pos, ue] = (1.0, 0.0)
        coeff[neg, ue] = (0.0, 1.0)
        coeff[pos, 0] = coeff[neg, 0] = (1.0, 0.0)
    for c, (clause, ue, bs) in enumerate(zip(formula.clauses, clause_ues, clause_bss)):
        bs_cluster[bs] = ue_cluster[ue] = 2 + n + c
        coeff[bs, ue] = (math.sqrt(CLAUSE_GAIN_POWER), 0.0)
        for literal in clause:
            coeff[literal_bs[literal], ue] = (1.0, 0.0)

    powers = np.ones(n_bs)
    powers[root_bs] = n + 1
    demand = 1.0
    trace = TrafficTrace.constant(demand, 1.0)
    users = tuple(
        User(int(ue_cluster[j]), (float(j), 1.0), trace) for j in range(n_ues)
    )
    base_stations = tuple(
        BaseStation(
            cluster=int(bs_cluster[i]),
            position=(float(i), 0.0),
            power_per_ru=float(powers[i]),
            fronthaul_capacity=10.0 * demand * n_ues,
            gains=tuple(EffectiveGain(tuple(coeff[i, j])) for j in range(n_ues)),
        )
        for i in range(n_bs)
    )
    scenario = NetworkScenario(
        clusters=tuple(range(1, 2 + n + k)),
        base_stations=base_stations,
        users=users,
        noise_power=1.0,
        rus_per_bs=1,
        ru_bandwidth_hz=1.0,
        max_load=1.0,
        period_seconds=1.0,
    )
    meta = ReductionMeta(
        formula=formula,
        root_ue=0,
        root_bs=root_bs,
        variable_ues=variable_ues,
        clause_ues=clause_ues,
        clause_bss=clause_bss,
        literal_bs=literal_bs,
    )
    return scenario, meta


def assignment_to_association(
    meta: ReductionMeta, assignment: typing.Sequence[bool]
) -> Association:
    """
    Association of a truth assignment

    Variable UE ``k`` is served by the ``-k`` BS when ``k`` is true and by the
    ``+k`` BS otherwise; root and clause UEs by their own BSs.

    """
    n = meta.formula.n_vars
    if len(assignment) != n:
        raise ValueError("Expected {} values, got {}".format(n, len(assignment)))
    kappa = np.zeros((meta.n_bs, meta.n_ues), bool)
    kappa[meta.root_bs, meta.root_ue] = True
    for ue, bs in zip(meta.clause_ues, meta.clause_bss):
        kappa[bs, ue] = True
    for var, (ue, value) in enumerate(zip(meta.variable_ues, assignment), start=1):
        kappa[meta.literal_bs[-var if value else var], ue] = True
    return Association(kappa)


def association_to_assignment(
    meta: ReductionMeta, assoc: Association
) -> typing.Tuple[bool, ...]:
    """
    Truth assignment of an association

    Raises
    ------
    ValueError
        If a variable UE is served by both or neither of its literal BSs.

    """
    out = []
    for var, ue in enumerate(meta.variable_ues, start=1):
        pos = bool(assoc.kappa[meta.literal_bs[var], ue])
        neg = bool(assoc.kappa[meta.literal_bs[-var], ue])
        if pos == neg:
            raise ValueError(
                "variable {} is served by {} literal BSs".format(
                    var, "both" if pos else "neither of its"
                )
            )
        out.append(neg)
    return tuple(out)
