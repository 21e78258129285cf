#!/usr/bin/env python3

"""
Optimal Resource Allocation

Two fixed-point solvers compute the per-UE resource fractions of an
association. The load solver finds the allocation that fills the busiest BS up
to the maximum load; the fronthaul solver finds the allocation that serves the
common QoS level allowed by the fronthaul links. The optimal allocation is the
elementwise minimum of the two and gives every UE the same QoS scaling.

Example::

    import compcell.allocation as ca
    import compcell.model as cm

    scenario = cm.read_scenario("scenario.json")
    assoc = cm.Association.full(scenario)

    solution = ca.solve_optimal(scenario, assoc)

    print(solution.objective)
    print(solution.eta_star.lam, solution.eta_star.nu)
    print([x.value for x in solution.binding])

"""

import enum
import logging
import math
import typing
from dataclasses import dataclass

import numpy as np

from .channel import LinkModel
from .errors import (
    Diverged,
    EmptyServingSet,
    Infeasible,
    NoConvergence,
    ZeroDemand,
)
from .model import (
    Allocation,
    Association,
    NetworkScenario,
    QosResult,
    as_alpha,
    json_float,
)

logger = logging.getLogger(__name__)

#: Guard against division by zero in the relative residual.
RESIDUAL_FLOOR = 1e-300


@dataclass(frozen=True)
class FixedPointConfig:
    """
    Stopping rule of the fixed-point iterations

    Parameters
    ----------
    tolerance : float, optional
        Relative sup-norm change between iterates that counts as converged.
    max_iterations : int, optional
        Iteration budget; NoConvergence is raised when it runs out.
    initial_alpha : float or sequence of float, optional
        Strictly positive starting point, one value for all UEs or one per UE.
    divergence_factor : float, optional
        The fronthaul iteration is declared diverged once a BS load exceeds
        this factor times ``max(max_load, 1)``.

    """

    tolerance: float = 1e-10
    max_iterations: int = 10000
    initial_alpha: typing.Union[float, typing.Tuple[float, ...]] = 1e-3
    divergence_factor: float = 10.0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be an integer >= 1")
        if not np.all(np.asarray(self.initial_alpha, dtype=float) > 0):
            raise ValueError("initial_alpha must be strictly positive")
        if not self.divergence_factor > 1:
            raise ValueError("divergence_factor must be greater than 1")
        if not isinstance(self.initial_alpha, (int, float)):
            object.__setattr__(
                self, "initial_alpha", tuple(float(x) for x in self.initial_alpha)
            )

    def start(self, n_ues: int) -> np.ndarray:
        """ Starting allocation for `n_ues` UEs """
        if isinstance(self.initial_alpha, (int, float)):
            return np.full(n_ues, float(self.initial_alpha))
        out = np.array(self.initial_alpha, dtype=float)
        assert out.shape == (n_ues,), "initial_alpha has {} entries for {} UEs".format(
            len(out), n_ues
        )
        return out


class Binding(enum.Enum):
    """ Which limit determines the allocation of a UE """

    LOAD = "load-limited"
    FRONTHAUL = "fronthaul-limited"


@dataclass(frozen=True)
class SolveReport:
    """ Convergence statistics of a solve """

    solver: str
    iterations: int
    residual: float
    converged: bool
    diverged: bool = False
    branch: typing.Optional[Binding] = None

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return dict(
            solver=self.solver,
            iterations=int(self.iterations),
            residual=json_float(self.residual),
            converged=bool(self.converged),
            diverged=bool(self.diverged),
            branch=self.branch.value if self.branch is not None else None,
        )


@dataclass(frozen=True, eq=False)
class AllocationSolution:
    """
    Optimal allocation of an association

    Parameters
    ----------
    alpha_star : Allocation
        Elementwise minimum of `alpha_load` and `alpha_fh`.
    alpha_load : Allocation
        Fixed point of the load-normalized iteration.
    alpha_fh : Allocation or None
        Fixed point of the fronthaul iteration; None stands for an unbounded
        allocation (the iteration diverged while the load limit binds).
    eta_star : QosResult
        QoS scaling and diagnostics at `alpha_star`.
    binding : tuple of Binding
        Per-UE binding limit.
    report : SolveReport
        Combined convergence statistics.
    served_rate_bps : float
        Served traffic ``sum(eta * V) / period``.

    """

    alpha_star: Allocation
    alpha_load: Allocation
    alpha_fh: typing.Optional[Allocation]
    eta_star: QosResult
    binding: typing.Tuple[Binding, ...]
    report: SolveReport
    served_rate_bps: float = 0.0
    load_report: typing.Optional[SolveReport] = None
    fronthaul_report: typing.Optional[SolveReport] = None

    @property
    def objective(self) -> float:
        """ Sum of the per-UE QoS scalings """
        return self.eta_star.objective

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        """ Structure written to the results JSON document """
        return dict(
            objective=self.objective,
            served_rate_bps=float(self.served_rate_bps),
            alpha_star=[float(x) for x in self.alpha_star.alpha],
            alpha_load=[float(x) for x in self.alpha_load.alpha],
            alpha_fh=None
            if self.alpha_fh is None
            else [float(x) for x in self.alpha_fh.alpha],
            binding=[x.value for x in self.binding],
            qos=self.eta_star.to_dict(),
            report=self.report.to_dict(),
            load_report=None
            if self.load_report is None
            else self.load_report.to_dict(),
            fronthaul_report=None
            if self.fronthaul_report is None
            else self.fronthaul_report.to_dict(),
        )


class DemandMap:
    """
    The map from an allocation to the resources each UE needs

    For QoS scaling `eta` the UE needs ``eta * V / (C(alpha) * period)`` of the
    RUs of its serving BSs, where the rate ``C`` depends on `alpha` through the
    interference it causes.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association

    """

    def __init__(self, scenario: NetworkScenario, assoc: Association):
        self.scenario = scenario
        self.assoc = assoc
        self.link = LinkModel(scenario, assoc)
        self.demands = scenario.demands
        self.period = scenario.period_seconds

    def check_coupling(self):
        """
        Raise if some UE can never reach a positive rate

        Raises
        ------
        EmptyServingSet
            If a UE has no serving BS.
        Infeasible
            If the serving BSs of a UE have zero combined gain.

        """
        for ue in np.flatnonzero(~self.link.served):
            raise EmptyServingSet(int(ue))
        for ue in np.flatnonzero(~(self.link.signal > 0)):
            raise Infeasible("coupling", ue=int(ue), detail="zero signal power")

    def loads(self, alpha: np.ndarray) -> np.ndarray:
        return self.link.loads(alpha)

    def __call__(self, alpha: np.ndarray, eta) -> np.ndarray:
        rates = self.link.rates_for(alpha)
        return np.asarray(eta, dtype=float) * self.demands / (rates * self.period)


def _kappa_norm(kappa: np.ndarray, alpha: np.ndarray) -> float:
    if not kappa.size:
        return 0.0
    return float(np.max(kappa.astype(float) @ alpha))


def demand_map_T(
    scenario: NetworkScenario,
    assoc: Association,
    alloc: typing.Union[Allocation, np.ndarray],
    eta_j: float,
    ue: int,
) -> float:
    """
    Resources UE `ue` needs to serve `eta_j` of its demand

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    alloc : Allocation or array-like
        Allocation setting the interference.
    eta_j : float
        QoS scaling of the UE.
    ue : int
        UE index.

    Returns
    -------
    float

    Raises
    ------
    EmptyServingSet
        If the UE has no serving BS.

    """
    if not assoc.kappa[:, ue].any():
        raise EmptyServingSet(ue)
    if eta_j == 0:
        return 0.0
    return float(DemandMap(scenario, assoc)(as_alpha(alloc), eta_j)[ue])


def demand_map_H(
    scenario: NetworkScenario,
    assoc: Association,
    alloc: typing.Union[Allocation, np.ndarray],
    eta,
) -> Allocation:
    """
    Resources every UE needs, stacked

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    alloc : Allocation or array-like
    eta : float or array-like
        Common or per-UE QoS scaling.

    Returns
    -------
    Allocation

    """
    for ue in range(assoc.n_ues):
        if not assoc.kappa[:, ue].any():
            raise EmptyServingSet(ue)
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (assoc.n_ues,))
    out = DemandMap(scenario, assoc)(as_alpha(alloc), eta)
    return Allocation(np.where(eta == 0, 0.0, out))


def kappa_norm(
    assoc: Association, alloc: typing.Union[Allocation, np.ndarray]
) -> float:
    """ Largest BS load of an allocation (zero without BSs) """
    return _kappa_norm(assoc.kappa, as_alpha(alloc))


def fronthaul_nu(scenario: NetworkScenario, assoc: Association) -> float:
    """
    Common QoS level allowed by the fronthaul links

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association

    Returns
    -------
    float
        ``min(c_i / D_i)`` over BSs whose served demand ``D_i`` is positive;
        ``inf`` when no BS carries demand.

    """
    served = assoc.kappa.astype(float) @ scenario.demands
    busy = served > 0
    if not busy.any():
        return math.inf
    return float(np.min(scenario.fronthaul[busy] / served[busy]))


def _residual(new: np.ndarray, old: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(old), initial=0.0)), RESIDUAL_FLOOR)
    return float(np.max(np.abs(new - old), initial=0.0)) / scale


def solve_alpha_load(
    scenario: NetworkScenario,
    assoc: Association,
    cfg: typing.Optional[FixedPointConfig] = None,
) -> typing.Tuple[Allocation, SolveReport]:
    """
    Allocation that fills the busiest BS up to the maximum load

    Iterates ``alpha <- max_load * H(alpha, 1) / ||H(alpha, 1)||`` where the
    norm is the largest BS load, normalizing at every step.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    cfg : FixedPointConfig, optional

    Returns
    -------
    (Allocation, SolveReport)

    Raises
    ------
    EmptyServingSet
        If a UE has no serving BS.
    ZeroDemand
        If a UE has zero demand volume.
    NoConvergence
        If the iteration budget runs out.

    """
    cfg = cfg or FixedPointConfig()
    q = scenario.n_ues
    if q == 0:
        return Allocation(np.zeros(0)), SolveReport("load", 0, 0.0, True)

    demand = DemandMap(scenario, assoc)
    demand.check_coupling()
    for ue in np.flatnonzero(~(scenario.demands > 0)):
        raise ZeroDemand(int(ue))

    alpha = cfg.start(q)
    residual = math.inf
    for iteration in range(1, cfg.max_iterations + 1):
        needed = demand(alpha, 1.0)
        new = scenario.max_load * needed / _kappa_norm(assoc.kappa, needed)
        residual = _residual(new, alpha)
        alpha = new
        if residual < cfg.tolerance:
            logger.debug(
                "load iteration converged after %d iterations (residual %.3e)",
                iteration,
                residual,
            )
            return Allocation(alpha), SolveReport("load", iteration, residual, True)

    raise NoConvergence(residual, cfg.max_iterations, solver="load")


def solve_alpha_fronthaul(
    scenario: NetworkScenario,
    assoc: Association,
    cfg: typing.Optional[FixedPointConfig] = None,
) -> typing.Tuple[Allocation, SolveReport]:
    """
    Allocation that serves the fronthaul-limited QoS level

    Iterates ``alpha <- H(alpha, nu)`` with `nu` from `fronthaul_nu`.

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    cfg : FixedPointConfig, optional

    Returns
    -------
    (Allocation, SolveReport)

    Raises
    ------
    EmptyServingSet
        If a UE has no serving BS.
    Diverged
        If a BS load leaves the divergence guard; no finite fixed point exists
        within it.
    NoConvergence
        If the iteration budget runs out.

    """
    cfg = cfg or FixedPointConfig()
    q = scenario.n_ues
    if q == 0:
        return Allocation(np.zeros(0)), SolveReport("fronthaul", 0, 0.0, True)

    demand = DemandMap(scenario, assoc)
    demand.check_coupling()
    nu = fronthaul_nu(scenario, assoc)
    if math.isinf(nu):
        nu = 0.0
    guard = cfg.divergence_factor * max(scenario.max_load, 1.0)

    alpha = cfg.start(q)
    residual = math.inf
    for iteration in range(1, cfg.max_iterations + 1):
        new = demand(alpha, nu)
        peak = _kappa_norm(assoc.kappa, new)
        if not peak <= guard:
            logger.debug(
                "fronthaul iteration diverged after %d iterations (load %.3e)",
                iteration,
                peak,
            )
            raise Diverged(peak, iteration)
        residual = _residual(new, alpha)
        alpha = new
        if residual < cfg.tolerance:
            logger.debug(
                "fronthaul iteration converged after %d iterations (residual %.3e)",
                iteration,
                residual,
            )
            report = SolveReport("fronthaul", iteration, residual, True)
            return Allocation(alpha), report

    raise NoConvergence(residual, cfg.max_iterations, solver="fronthaul")


def empty_solution(scenario: NetworkScenario) -> AllocationSolution:
    """ Solution of a scenario without UEs """
    empty = Allocation(np.zeros(0))
    qos = QosResult(
        eta=np.zeros(0),
        lam=0.0,
        nu=math.inf,
        loads=np.zeros(scenario.n_bs),
        fronthaul_usage=np.zeros(scenario.n_bs),
    )
    report = SolveReport("optimal", 0, 0.0, True, branch=Binding.LOAD)
    return AllocationSolution(empty, empty, empty, qos, (), report, 0.0, report, report)


def solve_optimal(
    scenario: NetworkScenario,
    assoc: Association,
    cfg: typing.Optional[FixedPointConfig] = None,
) -> AllocationSolution:
    """
    Optimal allocation and QoS scaling of an association

    Parameters
    ----------
    scenario : NetworkScenario
    assoc : Association
    cfg : FixedPointConfig, optional

    Returns
    -------
    AllocationSolution

    Raises
    ------
    Infeasible
        If a UE has no serving BS or zero signal power.
    ZeroDemand
        If a UE has zero demand volume.
    NoConvergence
        If the load iteration does not converge, or the fronthaul iteration
        does not converge while the fronthaul limit binds.

    """
    cfg = cfg or FixedPointConfig()
    if scenario.n_ues == 0:
        return empty_solution(scenario)

    demand = DemandMap(scenario, assoc)
    alpha_load, load_report = solve_alpha_load(scenario, assoc, cfg)

    rates = demand.link.rates_for(alpha_load.alpha)
    lam = float(np.min(alpha_load.alpha * rates * demand.period / scenario.demands))
    nu = fronthaul_nu(scenario, assoc)

    try:
        alpha_fh, fh_report = solve_alpha_fronthaul(scenario, assoc, cfg)
    except (Diverged, NoConvergence) as exc:
        if not nu > lam:
            raise
        if isinstance(exc, Diverged):
            logger.debug("fronthaul branch dropped, load limit binds: %s", exc)
        else:
            logger.warning("fronthaul branch dropped, load limit binds: %s", exc)
        alpha_fh = None
        fh_report = SolveReport(
            "fronthaul",
            exc.iterations,
            getattr(exc, "residual", math.inf),
            False,
            diverged=isinstance(exc, Diverged),
        )

    if alpha_fh is None:
        alpha = alpha_load.alpha
        binding = (Binding.LOAD,) * scenario.n_ues
    else:
        alpha = np.minimum(alpha_load.alpha, alpha_fh.alpha)
        binding = tuple(
            Binding.FRONTHAUL if f < a else Binding.LOAD
            for f, a in zip(alpha_fh.alpha, alpha_load.alpha)
        )

    needed = demand(alpha, 1.0)
    eta = np.minimum(alpha / needed, nu)
    loads = demand.loads(alpha)
    usage = assoc.kappa.astype(float) @ (eta * scenario.demands)
    qos = QosResult(eta=eta, lam=lam, nu=nu, loads=loads, fronthaul_usage=usage)

    report = SolveReport(
        "optimal",
        load_report.iterations + fh_report.iterations,
        max(load_report.residual, fh_report.residual if fh_report.converged else 0.0),
        True,
        diverged=fh_report.diverged,
        branch=Binding.FRONTHAUL if nu < lam else Binding.LOAD,
    )
    served = float(np.sum(eta * scenario.demands)) / scenario.period_seconds
    logger.debug(
        "optimal allocation: objective %.6g, lambda %.6g, nu %.6g",
        float(np.sum(eta)),
        lam,
        nu,
    )
    return AllocationSolution(
        alpha_star=Allocation(alpha),
        alpha_load=alpha_load,
        alpha_fh=alpha_fh,
        eta_star=qos,
        binding=binding,
        report=report,
        served_rate_bps=served,
        load_report=load_report,
        fronthaul_report=fh_report,
    )
