#!/usr/bin/env python3

"""
CoMP-Cell Selection

A filter tries to add one BS to the serving set of one UE and keeps the
extension only when it does not lower the total QoS scaling. The selection
algorithm applies the filter to every (UE, candidate BS) pair of the network in
turn, starting from a single-BS association.
The non-CoMP reference is a single-BS association improved by handovers, each
UE moved to another BS of its cluster when that raises the total QoS scaling.

Example::

    import compcell.model as cm
    import compcell.selection as sel

    scenario = cm.read_scenario("scenario.json")
    start = sel.default_initial_association(scenario)

    assoc, solution = sel.run_algorithm1(scenario, start)

    print(assoc.to_list())
    print(solution.objective)

"""

import logging
import typing
from dataclasses import dataclass, field, replace

import numpy as np

from .allocation import (
    AllocationSolution,
    DemandMap,
    FixedPointConfig,
    solve_optimal,
)
from .errors import ClusterViolation, CompCellError, EmptyServingSet, Infeasible
from .model import Association, NetworkScenario, candidate_set, serving_set

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionConfig:
    """
    Options of the filter and the selection algorithm

    Parameters
    ----------
    fixed_point : FixedPointConfig, optional
        Solver settings for every allocation solve.
    tie_tolerance : float, optional
        Relative slack on the load comparison of the filter.
    resolve_each : bool, optional
        Re-solve the allocation after every accepted extension; otherwise
        every filter compares against the allocation of the initial association.
    certify : bool, optional
        Solve the extended association and accept it only if its total QoS
        scaling is not lower than before.

    """

    fixed_point: FixedPointConfig = field(default_factory=FixedPointConfig)
    tie_tolerance: float = 1e-12
    resolve_each: bool = True
    certify: bool = True

    def __post_init__(self):
        if not self.tie_tolerance >= 0:
            raise ValueError("tie_tolerance must be nonnegative")


@dataclass(frozen=True, eq=False)
class FilterDecision:
    """
    Outcome of one filter evaluation

    `lhs_load` is the load of the added BS when the UEs need what the one-step
    updated allocation asks for; `rhs_load` is its load under the current
    allocation with the extended association. `mu` is the ratio of the
    updated to the current resources of the UE and is informational.

    """

    ue: int
    bs: int
    accepted: bool
    kappa_out: Association
    lhs_load: float
    rhs_load: float
    mu: float
    condition_met: bool
    eta_before: float
    eta_after: float
    solution: typing.Optional[AllocationSolution] = None

    def trace_record(self) -> typing.Dict[str, typing.Any]:
        """ Object written as one line of the decision trace """
        return dict(
            ue=self.ue,
            bs=self.bs,
            lhs=float(self.lhs_load),
            rhs=float(self.rhs_load),
            mu=float(self.mu),
            condition=bool(self.condition_met),
            accepted=bool(self.accepted),
            eta_before=float(self.eta_before),
            eta_after=float(self.eta_after),
        )


def extend(
    scenario: NetworkScenario,
    assoc: Association,
    ue: int,
    bs_set: typing.Iterable[int],
) -> Association:
    """
    Add BSs to the serving set of a UE

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    ue : int
        UE index.
    bs_set : iterable of int
        BSs to add; BSs already serving are ignored.

    Returns
    -------
    Association
        Equal to `assoc` outside column `ue`.

    Raises
    ------
    ClusterViolation
        If a BS is outside the cluster of the UE.

    """
    bs_set = sorted(set(int(x) for x in bs_set))
    allowed = set(candidate_set(scenario, ue))
    for bs in bs_set:
        if bs not in allowed:
            raise ClusterViolation(bs, ue)
    if all(assoc.kappa[bs, ue] for bs in bs_set):
        return assoc
    kappa = assoc.kappa.copy()
    kappa[bs_set, ue] = True
    return Association(kappa)


def cell_filter(
    scenario: NetworkScenario,
    assoc: Association,
    ue: int,
    bs: int,
    cfg: typing.Optional[SelectionConfig] = None,
    solution: typing.Optional[AllocationSolution] = None,
) -> FilterDecision:
    """
    Try to add BS `bs` to the serving set of UE `ue`

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
        Current association; every UE must be served.
    ue : int
    bs : int
        A BS in the cluster of `ue`.
    cfg : SelectionConfig, optional
    solution : AllocationSolution, optional
        Optimal allocation used for the load comparison; solved from `assoc`
        when omitted.

    Returns
    -------
    FilterDecision
        `kappa_out` is either `assoc` or the extended association.

    """
    cfg = cfg or SelectionConfig()
    if solution is None:
        solution = solve_optimal(scenario, assoc, cfg.fixed_point)
    alpha = solution.alpha_star.alpha
    eta = solution.eta_star.eta
    before = solution.objective

    extended = extend(scenario, assoc, ue, [bs])
    if extended is assoc:
        # The allocation is a fixed point of its own demand map.
        load = float(np.sum(alpha[assoc.kappa[bs]]))
        logger.debug("filter (UE %d, BS %d): already serving", ue, bs)
        return FilterDecision(
            ue, bs, True, assoc, load, load, 1.0, True, before, before, solution
        )

    demand = DemandMap(scenario, extended)
    updated = demand(alpha, eta)
    served = extended.kappa[bs]
    lhs = float(np.sum(updated[served]))
    rhs = float(np.sum(alpha[served]))
    mu = float(updated[ue] / alpha[ue]) if alpha[ue] > 0 else float("nan")
    condition = lhs <= rhs + cfg.tie_tolerance * max(1.0, rhs)

    accepted = condition
    new_solution = None
    after = before
    if condition:
        if cfg.certify:
            try:
                new_solution = solve_optimal(scenario, extended, cfg.fixed_point)
            except CompCellError as exc:
                logger.debug(
                    "filter (UE %d, BS %d): extension unsolvable: %s", ue, bs, exc
                )
                accepted = False
            else:
                accepted = new_solution.objective >= before
        else:
            new_solution = solve_optimal(scenario, extended, cfg.fixed_point)
        if accepted:
            after = new_solution.objective

    logger.debug(
        "filter (UE %d, BS %d): lhs %.6g rhs %.6g mu %.6g condition %s accepted %s",
        ue,
        bs,
        lhs,
        rhs,
        mu,
        condition,
        accepted,
    )
    if accepted:
        return FilterDecision(
            ue, bs, True, extended, lhs, rhs, mu, condition, before, after, new_solution
        )
    return FilterDecision(
        ue, bs, False, assoc, lhs, rhs, mu, condition, before, before, solution
    )


def default_initial_association(scenario: NetworkScenario) -> Association:
    """
    Serve every UE from its strongest BS

    The strength of a BS toward a UE is its coefficient norm times the square
    root of its power; ties go to the lowest BS index.

    Raises
    ------
    Infeasible
        If the cluster of a UE has no BS.

    """
    strength = np.sqrt(scenario.received_power)
    masked = np.where(scenario.candidates, strength, -np.inf)
    kappa = np.zeros((scenario.n_bs, scenario.n_ues), bool)
    for ue in range(scenario.n_ues):
        if not scenario.candidates[:, ue].any():
            raise Infeasible("coupling", ue=ue, detail="cluster has no BS")
        kappa[int(np.argmax(masked[:, ue])), ue] = True
    return Association(kappa)


def best_single_association(
    scenario: NetworkScenario,
    start: typing.Optional[Association] = None,
    cfg: typing.Optional[FixedPointConfig] = None,
    max_passes: int = 1,
    min_gain: float = 1e-9,
) -> typing.Tuple[Association, AllocationSolution]:
    """
    Non-CoMP cell selection by single-BS handovers

    Every UE, in ascending order, is handed over to each other BS of its
    cluster in ascending order; a handover is kept when it raises the total
    QoS scaling by more than `min_gain` relative. Every UE keeps exactly one
    serving BS, so the result is the single-cell counterpart of
    `run_algorithm1`.

    Parameters
    ----------
    scenario : NetworkScenario
    start : Association, optional
        Single-BS association to start from; `default_initial_association`
        when omitted.
    cfg : FixedPointConfig, optional
    max_passes : int, optional
        Passes over all UEs; stops early after a pass without handovers.
    min_gain : float, optional

    Returns
    -------
    (Association, AllocationSolution)

    Raises
    ------
    ValueError
        If `start` does not serve every UE from exactly one BS.

    """
    cfg = cfg or FixedPointConfig()
    assoc = start if start is not None else default_initial_association(scenario)
    if scenario.n_ues and not np.all(assoc.kappa.sum(axis=0) == 1):
        raise ValueError("handover needs exactly one serving BS per UE")

    current = solve_optimal(scenario, assoc, cfg)
    initial = current.objective
    moves = 0
    for _ in range(max_passes):
        moved = False
        for ue in range(scenario.n_ues):
            serving = int(np.flatnonzero(assoc.kappa[:, ue])[0])
            for bs in candidate_set(scenario, ue):
                if bs == serving:
                    continue
                kappa = assoc.kappa.copy()
                kappa[serving, ue] = False
                kappa[bs, ue] = True
                trial = Association(kappa)
                warm = replace(
                    cfg, initial_alpha=tuple(float(x) for x in current.alpha_star.alpha)
                )
                try:
                    solution = solve_optimal(scenario, trial, warm)
                except CompCellError as exc:
                    logger.debug("handover (UE %d, BS %d) unsolvable: %s", ue, bs, exc)
                    continue
                if solution.objective > current.objective * (1.0 + min_gain):
                    assoc, current, serving = trial, solution, bs
                    moves += 1
                    moved = True
        if not moved:
            break

    logger.info(
        "handover done: %d moves, objective %.6g -> %.6g",
        moves,
        initial,
        current.objective,
    )
    return assoc, current


def run_algorithm1(
    scenario: NetworkScenario,
    kappa_init: Association,
    cfg: typing.Optional[SelectionConfig] = None,
    callback: typing.Optional[typing.Callable[[FilterDecision], None]] = None,
) -> typing.Tuple[Association, AllocationSolution]:
    """
    Greedy CoMP-cell selection followed by the optimal allocation

    Applies `cell_filter` to every UE in ascending order and, for each UE,
    to every BS of its cluster in ascending order. The total QoS scaling of
    the result is never lower than that of `kappa_init`.

    Parameters
    ----------
    scenario : NetworkScenario
    kappa_init : Association
        Starting association serving every UE.
    cfg : SelectionConfig, optional
    callback : callable, optional
        Called with every FilterDecision.

    Returns
    -------
    (Association, AllocationSolution)

    Raises
    ------
    Infeasible
        If `kappa_init` leaves a UE unserved.

    """
    cfg = cfg or SelectionConfig()
    for ue in range(scenario.n_ues):
        if not serving_set(kappa_init, ue):
            raise EmptyServingSet(ue)

    assoc = kappa_init
    initial = solve_optimal(scenario, assoc, cfg.fixed_point)
    current = initial
    logger.info("selection start: objective %.6g", initial.objective)

    accepted = 0
    for ue in range(scenario.n_ues):
        for bs in candidate_set(scenario, ue):
            reference = current if cfg.resolve_each else initial
            decision = cell_filter(scenario, assoc, ue, bs, cfg, solution=reference)
            if decision.accepted and decision.kappa_out is not assoc:
                accepted += 1
                assoc = decision.kappa_out
                current = decision.solution
            if callback is not None:
                callback(decision)

    logger.info(
        "selection done: %d extensions accepted, objective %.6g -> %.6g",
        accepted,
        initial.objective,
        current.objective,
    )
    return assoc, current
