#!/usr/bin/env python3

"""
Brute-Force Verification

Exhaustive checks for small instances: feasibility of an association at a
fixed QoS level, enumeration of every cluster-respecting association, the
global optimum over them, a one-dimensional search for the best common QoS
level, and the satisfiability/feasibility pair of the 3-CNF encoding.

Example::

    import compcell.dimacs as cd
    import compcell.oracle as co

    formula = cd.parse_dimacs("p cnf 3 1\n1 2 -3 0\n")
    cert = co.certify_formula(formula)

    print(cert.satisfiable, cert.feasible)

"""

import itertools
import logging
import math
import typing
from dataclasses import dataclass

import numpy as np

from .allocation import (
    AllocationSolution,
    FixedPointConfig,
    fronthaul_nu,
    solve_optimal,
)
from .channel import LinkModel, rate_vector
from .errors import CompCellError, Infeasible, TooLarge
from .model import Association, NetworkScenario, candidate_set
from .scenario import CnfFormula, assignment_to_association, build_sat_instance

logger = logging.getLogger(__name__)

#: Largest total number of (UE, candidate BS) pairs `enumerate_associations`
#: accepts, i.e. at most 2**20 candidate associations.
ENUMERATION_LIMIT_BITS = 20


@dataclass(frozen=True)
class FeasibilityConfig:
    """
    Settings of the fixed-QoS feasibility check

    Parameters
    ----------
    tolerance : float, optional
        Relative sup-norm change that ends the iteration.
    max_iterations : int, optional
        Iteration budget.
    load_slack : float, optional
        Relative slack on the load and fronthaul limits.

    """

    tolerance: float = 1e-12
    max_iterations: int = 100000
    load_slack: float = 1e-9

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be an integer >= 1")
        if not self.load_slack >= 0:
            raise ValueError("load_slack must be nonnegative")


@dataclass(frozen=True, eq=False)
class Feasibility:
    """ Verdict of `feasibility_check`; truthy when feasible """

    feasible: bool
    constraint: typing.Optional[str] = None
    index: typing.Optional[int] = None
    alpha: typing.Optional[np.ndarray] = None

    def __bool__(self):
        return self.feasible

    def __str__(self):
        if self.feasible:
            return "feasible"
        return "violated({}{})".format(
            self.constraint, "" if self.index is None else " at {}".format(self.index)
        )


def feasibility_check(
    scenario: NetworkScenario,
    assoc: Association,
    eta: float = 1.0,
    cfg: typing.Optional[FeasibilityConfig] = None,
) -> Feasibility:
    """
    Can every UE be served at QoS scaling `eta`?

    Iterates ``alpha <- eta * V / (C(alpha) * period)`` from zero. The
    iterates only grow, so the association is infeasible as soon as one BS
    load passes the maximum load.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    eta : float, optional
        Common QoS scaling to test.
    cfg : FeasibilityConfig, optional

    Returns
    -------
    Feasibility
        Violated constraints are "coupling" (index: UE), "load" or
        "fronthaul" (index: BS), or "no-convergence".

    """
    cfg = cfg or FeasibilityConfig()
    for ue in range(scenario.n_ues):
        if not assoc.kappa[:, ue].any():
            return Feasibility(False, "coupling", ue)

    needed = eta * scenario.demands / scenario.period_seconds
    limit = scenario.max_load * (1.0 + cfg.load_slack)
    link = LinkModel(scenario, assoc)
    alpha = np.zeros(scenario.n_ues)
    for _ in range(cfg.max_iterations):
        rates = link.rates_for(alpha)
        for ue in np.flatnonzero(~(rates > 0) & (needed > 0)):
            return Feasibility(False, "coupling", int(ue))
        new = np.divide(needed, rates, out=np.zeros_like(needed), where=needed > 0)
        load = link.loads(new)
        if load.size and load.max() > limit:
            return Feasibility(False, "load", int(np.argmax(load)), new)
        change = float(np.max(np.abs(new - alpha), initial=0.0))
        scale = float(np.max(np.abs(new), initial=0.0))
        alpha = new
        if change <= cfg.tolerance * scale:
            break
    else:
        return Feasibility(False, "no-convergence", None, alpha)

    usage = assoc.kappa.astype(float) @ (eta * scenario.demands)
    over = usage > scenario.fronthaul * (1.0 + cfg.load_slack)
    if over.any():
        excess = np.where(over, usage / scenario.fronthaul, -np.inf)
        return Feasibility(False, "fronthaul", int(np.argmax(excess)), alpha)
    return Feasibility(True, alpha=alpha)


def _serving_options(candidates: typing.Sequence[int]):
    """ Nonempty subsets by size, then lexicographically """
    for size in range(1, len(candidates) + 1):
        yield from itertools.combinations(candidates, size)


def enumeration_size(scenario: NetworkScenario) -> int:
    """ Number of associations with nonempty, cluster-respecting serving sets """
    return math.prod(
        2 ** len(candidate_set(scenario, ue)) - 1 for ue in range(scenario.n_ues)
    )


def enumerate_associations(scenario: NetworkScenario) -> typing.Iterator[Association]:
    """
    Every association that serves each UE from a nonempty subset of its cluster

    Raises
    ------
    TooLarge
        If the UEs have more than 20 candidate BSs in total.

    """
    options = [candidate_set(scenario, ue) for ue in range(scenario.n_ues)]
    bits = sum(len(x) for x in options)
    if bits > ENUMERATION_LIMIT_BITS:
        raise TooLarge(2.0 ** bits, 2.0 ** ENUMERATION_LIMIT_BITS)
    for choice in itertools.product(*[list(_serving_options(x)) for x in options]):
        kappa = np.zeros((scenario.n_bs, scenario.n_ues), bool)
        for ue, serving in enumerate(choice):
            kappa[list(serving), ue] = True
        yield Association(kappa)


def global_optimum(
    scenario: NetworkScenario, cfg: typing.Optional[FixedPointConfig] = None
) -> typing.Tuple[Association, AllocationSolution]:
    """
    Association with the largest total QoS scaling

    Associations whose allocation cannot be solved are skipped; the first
    association in enumeration order wins ties.

    Raises
    ------
    TooLarge
        From `enumerate_associations`.
    Infeasible
        If no association can be solved.

    """
    best = None
    for assoc in enumerate_associations(scenario):
        try:
            solution = solve_optimal(scenario, assoc, cfg)
        except CompCellError as exc:
            logger.debug("skipping association: %s", exc)
            continue
        if best is None or solution.objective > best[1].objective:
            best = (assoc, solution)
    if best is None:
        raise Infeasible("coupling", detail="no solvable association")
    return best


def allocation_cross_check(
    scenario: NetworkScenario,
    assoc: Association,
    grid_points: int = 200,
    cfg: typing.Optional[FixedPointConfig] = None,
    feasibility: typing.Optional[FeasibilityConfig] = None,
    max_ues: int = 3,
) -> float:
    """
    Compare the optimal allocation with a direct search over common QoS levels

    The largest feasible common QoS level is bracketed on a grid between zero
    and an upper bound (the fronthaul level, and the level reachable without
    interference at full load) and refined by bisection.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    grid_points : int, optional
    cfg : FixedPointConfig, optional
        Settings of the solver under test.
    feasibility : FeasibilityConfig, optional
    max_ues : int, optional
        Size guard.

    Returns
    -------
    float
        Largest relative gap between the solver's per-UE scaling and the
        searched level.

    Raises
    ------
    TooLarge
        If the scenario has more than `max_ues` UEs.

    """
    if scenario.n_ues > max_ues:
        raise TooLarge(scenario.n_ues, max_ues)
    if scenario.n_ues == 0:
        return 0.0
    solution = solve_optimal(scenario, assoc, cfg)

    quiet = rate_vector(scenario, assoc, np.zeros(scenario.n_ues))
    upper = min(
        fronthaul_nu(scenario, assoc),
        float(
            np.min(
                scenario.max_load * quiet * scenario.period_seconds / scenario.demands
            )
        ),
    )

    def feasible(level):
        return bool(feasibility_check(scenario, assoc, level, feasibility))

    lo, hi = 0.0, upper
    for level in np.linspace(0.0, upper, grid_points + 1)[1:]:
        if feasible(level):
            lo = float(level)
        else:
            hi = float(level)
            break
    while hi - lo > 1e-12 * max(upper, 1e-300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if feasible(mid):
            lo = mid
        else:
            hi = mid

    eta = solution.eta_star.eta
    gap = float(np.max(np.abs(eta - lo))) / max(lo, 1e-300)
    logger.debug("cross-check: solver %s, search %.12g, gap %.3e", eta, lo, gap)
    return gap


def truth_table_satisfiable(
    formula: CnfFormula,
) -> typing.Optional[typing.Tuple[bool, ...]]:
    """
    First satisfying assignment in truth-table order, or None

    Raises
    ------
    TooLarge
        If the formula has more than 20 variables.

    """
    if formula.n_vars > ENUMERATION_LIMIT_BITS:
        raise TooLarge(2.0 ** formula.n_vars, 2.0 ** ENUMERATION_LIMIT_BITS)
    for assignment in itertools.product((False, True), repeat=formula.n_vars):
        if formula.evaluate(assignment):
            return assignment
    return None


@dataclass(frozen=True, eq=False)
class Certificate:
    """ Satisfiability of a formula next to feasibility of its encoding """

    satisfiable: bool
    feasible: bool
    assignment: typing.Optional[typing.Tuple[bool, ...]] = None
    association: typing.Optional[Association] = None

    @property
    def consistent(self) -> bool:
        return self.satisfiable == self.feasible

    def verdict(self) -> str:
        return "{} {}".format(
            "SAT" if self.satisfiable else "UNSAT",
            "feasible" if self.feasible else "infeasible",
        )

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return dict(
            satisfiable=self.satisfiable,
            feasible=self.feasible,
            assignment=None if self.assignment is None else list(self.assignment),
            association=None
            if self.association is None
            else self.association.to_list(),
        )


def certify_formula(
    formula: CnfFormula,
    negligible_gain: float = 0.0,
    cfg: typing.Optional[FeasibilityConfig] = None,
) -> Certificate:
    """
    Decide a formula by truth table and its encoding by enumeration

    Parameters
    ----------
    formula : CnfFormula
    negligible_gain : float, optional
        Passed to `build_sat_instance`.
    cfg : FeasibilityConfig, optional

    Returns
    -------
    Certificate
        With the first satisfying assignment and the first feasible
        association as witnesses.

    """
    assignment = truth_table_satisfiable(formula)
    scenario, meta = build_sat_instance(formula, negligible_gain)

    witness = None
    if assignment is not None:
        # The association of a satisfying assignment is checked first.
        candidate = assignment_to_association(meta, assignment)
        if feasibility_check(scenario, candidate, 1.0, cfg):
            witness = candidate
    if witness is None:
        for assoc in enumerate_associations(scenario):
            if feasibility_check(scenario, assoc, 1.0, cfg):
                witness = assoc
                break

    cert = Certificate(assignment is not None, witness is not None, assignment, witness)
    logger.info(
        "formula with %d variables and %d clauses: %s",
        formula.n_vars,
        formula.n_clauses,
        cert.verdict(),
    )
    return cert
