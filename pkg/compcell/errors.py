#!/usr/bin/env python3

""" Exceptions raised by the compcell package """

import typing


class CompCellError(Exception):
    """ Base class for all compcell errors """


class ScenarioError(CompCellError, ValueError):
    """
    A scenario document is malformed or describes an invalid network

    Parameters
    ----------
    message : str
        Summary of the problem.
    violations : list of Violation, optional
        Individual invariant violations found by `model.validate`.

    """

    def __init__(self, message: str, violations: typing.Sequence = ()):
        self.violations = list(violations)
        if self.violations:
            message = "{}: {}".format(
                message, "; ".join(str(x) for x in self.violations)
            )
        super().__init__(message)


class ClusterViolation(CompCellError, ValueError):
    """ A BS was associated with a UE of another cluster """

    def __init__(self, bs: int, ue: int):
        self.bs = bs
        self.ue = ue
        super().__init__("BS {} and UE {} are not in the same cluster".format(bs, ue))


#: Plain-words statement of each constraint, used in messages.
CONSTRAINT_TEXT = {
    "coupling": "resources must carry the scaled demand",
    "load": "BS load within the maximum resource limit",
    "fronthaul": "served traffic within the fronthaul capacity",
}


class Infeasible(CompCellError):
    """
    No allocation satisfies the constraints of the problem

    Parameters
    ----------
    constraint : str
        Identifier of the violated constraint: "coupling", "load" or "fronthaul".
    ue : int, optional
        UE index involved, if any.
    bs : int, optional
        BS index involved, if any.
    detail : str, optional
        Additional free-form text.

    """

    def __init__(
        self,
        constraint: str,
        ue: typing.Optional[int] = None,
        bs: typing.Optional[int] = None,
        detail: str = "",
    ):
        self.constraint = constraint
        self.ue = ue
        self.bs = bs
        where = []
        if ue is not None:
            where.append("UE {}".format(ue))
        if bs is not None:
            where.append("BS {}".format(bs))
        message = "{} constraint".format(constraint)
        if constraint in CONSTRAINT_TEXT:
            message += " ({})".format(CONSTRAINT_TEXT[constraint])
        message += " violated"
        if where:
            message += " at {}".format(", ".join(where))
        if detail:
            message += ": {}".format(detail)
        super().__init__(message)


class EmptyServingSet(Infeasible):
    """ A UE has no serving BS, so its achievable rate is zero """

    def __init__(self, ue: int):
        super().__init__("coupling", ue=ue, detail="empty serving set")


class ZeroDemand(CompCellError, ValueError):
    """ A UE has zero demand volume, which the load solver cannot normalize """

    def __init__(self, ue: int):
        self.ue = ue
        super().__init__("UE {} has zero demand volume".format(ue))


class NoConvergence(CompCellError):
    """ A fixed-point iteration exhausted its iteration budget """

    def __init__(self, residual: float, iterations: int, solver: str = ""):
        self.residual = residual
        self.iterations = iterations
        self.solver = solver
        super().__init__(
            "{}fixed point not reached after {} iterations (residual {:.3e})".format(
                solver and solver + " " or "", iterations, residual
            )
        )


class Diverged(CompCellError):
    """ The fronthaul fixed-point iteration left the load guard """

    def __init__(self, load: float, iterations: int):
        self.load = load
        self.iterations = iterations
        super().__init__(
            "iteration diverged: load {:.3e} after {} iterations".format(
                load, iterations
            )
        )


class AllZero(CompCellError, ValueError):
    """ Jain's index is undefined for the zero vector """


class TooLarge(CompCellError):
    """ An enumeration would exceed its size guard """

    def __init__(self, size: float, limit: float):
        self.size = size
        self.limit = limit
        super().__init__(
            "enumeration of {:.0f} candidates exceeds limit {:.0f}".format(size, limit)
        )


class InvalidFormula(CompCellError, ValueError):
    """ A CNF formula or DIMACS document is malformed """
