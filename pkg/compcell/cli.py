#!/usr/bin/env python3

"""
Command-Line Interface

Usage::

    compcell generate --clusters 3 --bs-per-cluster 4 --ues-per-cluster 20 \\
        --seed 7 --output scenario.json
    compcell solve scenario.json --assoc best-single --output results.json
    compcell select scenario.json --trace decisions.jsonl --output results.json
    compcell sweep --axis bs --values 2,4,6,8 --ues 20 --reps 30 --seed 1 \\
        --output rows.csv --summary summary.csv
    compcell reduce formula.cnf --output reduction.json
    compcell certify formula.cnf

Exit codes: 0 success, 2 usage or input error, 3 infeasible, 4 no convergence.

"""

import argparse
import concurrent.futures
import json
import logging
import sys
import typing

import numpy as np
import pandas as pd

from . import __version__
from .allocation import FixedPointConfig, solve_optimal
from .dimacs import read_dimacs
from .errors import (
    ClusterViolation,
    Diverged,
    Infeasible,
    InvalidFormula,
    NoConvergence,
    ScenarioError,
    TooLarge,
    ZeroDemand,
)
from .model import (
    Association,
    NetworkScenario,
    dump_document,
    read_document,
    scenario_from_dict,
    validate,
    write_scenario,
)
from .oracle import FeasibilityConfig, certify_formula
from .scenario import (
    GeneratorConfig,
    ReductionMeta,
    assignment_to_association,
    build_sat_instance,
    generate,
)
from .selection import (
    SelectionConfig,
    best_single_association,
    default_initial_association,
    run_algorithm1,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NO_CONVERGENCE = 4

ROW_COLUMNS = [
    "axis",
    "value",
    "rep",
    "seed",
    "sum_eta_comp",
    "sum_eta_noncomp",
    "improvement_pct",
    "mean_load",
    "mean_fronthaul_util",
]

SUMMARY_COLUMNS = [
    "axis",
    "value",
    "reps",
    "rate_comp_bps_mean",
    "rate_comp_bps_stderr",
    "rate_noncomp_bps_mean",
    "rate_noncomp_bps_stderr",
    "improvement_pct_mean",
    "improvement_pct_stderr",
]

#: Non-CoMP baselines: the strongest BS of every UE, or that association
#: improved by single-BS handovers.
BASELINES = ("handover", "strongest")

#: Sweep axis name -> (GeneratorConfig field, value type)
SWEEP_AXES = {
    "ues": ("ues_per_cluster", int),
    "bs": ("bs_per_cluster", int),
    "max_load": ("max_load", float),
}


def _write_text(text: str, path: typing.Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as outfile:
            outfile.write(text)


def _checked(scenario: NetworkScenario) -> NetworkScenario:
    """ Raise the error matching the first class of invariant violations """
    problems = validate(scenario)
    if not problems:
        return scenario
    if all(x.code == "zero-demand" for x in problems):
        raise ZeroDemand(problems[0].index)
    raise ScenarioError("invalid scenario", problems)


def _fixed_point(args) -> FixedPointConfig:
    return FixedPointConfig(
        tolerance=args.tolerance, max_iterations=args.max_iterations
    )


def _association(
    source: str, scenario: NetworkScenario, doc: typing.Mapping[str, typing.Any]
) -> Association:
    """ Association named by a `--assoc` value """
    if source == "best-single":
        return default_initial_association(scenario)
    if source == "full":
        return Association.full(scenario)
    if source.startswith("assignment:"):
        if "reduction" not in doc:
            raise ScenarioError("assignment associations need a reduction scenario")
        bits = source.split(":", 1)[1]
        if not bits or set(bits) - {"0", "1"}:
            raise ScenarioError(
                "assignment must be a string of 0 and 1: {}".format(bits)
            )
        meta = ReductionMeta.from_dict(doc["reduction"])
        return assignment_to_association(meta, [x == "1" for x in bits])
    kappa = read_document(source)
    if "kappa" not in kappa:
        raise ScenarioError("association document has no 'kappa' key")
    return Association.from_matrix(scenario, kappa["kappa"])


def cmd_generate(args) -> int:
    """ Write a random hexagonal deployment """
    cfg = GeneratorConfig(
        n_clusters=args.clusters,
        cluster_radius_m=args.radius,
        bs_per_cluster=args.bs_per_cluster,
        ues_per_cluster=args.ues_per_cluster,
        carrier_ghz=args.carrier_ghz,
        fronthaul_gbps=args.fronthaul_gbps,
        shadowing_sigma_db=args.shadowing_db,
        max_load=args.max_load,
        demand_bits=args.demand_bits,
        rng_seed=args.seed,
    )
    scenario = generate(cfg)
    write_scenario(scenario, args.output, dict(carrier_ghz=cfg.carrier_ghz))
    print(
        "{}: {} clusters, {} BSs, {} UEs".format(
            args.output, len(scenario.clusters), scenario.n_bs, scenario.n_ues
        )
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    """ Optimal allocation of one association """
    doc = read_document(args.scenario)
    scenario = _checked(scenario_from_dict(doc))
    assoc = _association(args.assoc, scenario, doc)
    solution = solve_optimal(scenario, assoc, _fixed_point(args))
    out = dict(association=assoc.to_list(), solution=solution.to_dict())
    _write_text(dump_document(out), args.output)
    return EXIT_OK


def cmd_select(args) -> int:
    """ Greedy CoMP-cell selection from a single-BS association """
    scenario = _checked(scenario_from_dict(read_document(args.scenario)))
    cfg = SelectionConfig(
        fixed_point=_fixed_point(args),
        resolve_each=not args.no_resolve,
        certify=not args.no_certify,
    )
    start = default_initial_association(scenario)
    if args.start == "handover":
        start, before = best_single_association(scenario, start, cfg.fixed_point)
    else:
        before = solve_optimal(scenario, start, cfg.fixed_point)

    records = []

    def on_decision(decision):
        records.append(json.dumps(decision.trace_record()))
        if args.verbose:
            print(records[-1])

    assoc, solution = run_algorithm1(scenario, start, cfg, callback=on_decision)
    if args.trace:
        _write_text("".join(x + "\n" for x in records), args.trace)

    out = dict(
        before=dict(objective=before.objective, served_rate_bps=before.served_rate_bps),
        after=dict(
            objective=solution.objective, served_rate_bps=solution.served_rate_bps
        ),
        filters=len(records),
        extensions=int(assoc.kappa.sum() - start.kappa.sum()),
        initial_association=start.to_list(),
        association=assoc.to_list(),
        solution=solution.to_dict(),
    )
    if args.output or not args.verbose:
        _write_text(dump_document(out), args.output)
    return EXIT_OK


def run_replication(
    axis: str,
    value,
    rep: int,
    seed: int,
    base: typing.Mapping[str, typing.Any],
    baseline: str = "handover",
) -> typing.Dict[str, typing.Any]:
    """
    One sweep replication: non-CoMP baseline and greedy selection

    Parameters
    ----------
    axis : str
        Sweep axis, a key of SWEEP_AXES.
    value : int or float
        Axis value of this replication.
    rep : int
        Replication number.
    seed : int
        Generator seed.
    base : dict
        GeneratorConfig fields shared by all replications.
    baseline : str, optional
        Non-CoMP association, one of BASELINES; the selection starts from it.

    Returns
    -------
    dict
        One row of the sweep table.

    """
    name, kind = SWEEP_AXES[axis]
    fields = dict(base)
    fields[name] = kind(value)
    fields["rng_seed"] = seed
    scenario = generate(GeneratorConfig(**fields))

    start = default_initial_association(scenario)
    if baseline == "handover":
        start, noncomp = best_single_association(scenario, start)
    else:
        noncomp = solve_optimal(scenario, start)
    _, comp = run_algorithm1(scenario, start)

    qos = comp.eta_star
    return dict(
        axis=axis,
        value=kind(value),
        rep=rep,
        seed=seed,
        sum_eta_comp=comp.objective,
        sum_eta_noncomp=noncomp.objective,
        improvement_pct=100.0
        * (comp.objective - noncomp.objective)
        / noncomp.objective,
        mean_load=float(np.mean(qos.loads)) if len(qos.loads) else 0.0,
        mean_fronthaul_util=float(np.mean(qos.fronthaul_usage / scenario.fronthaul))
        if scenario.n_bs
        else 0.0,
        rate_comp_bps=comp.served_rate_bps,
        rate_noncomp_bps=noncomp.served_rate_bps,
    )


def _parse_values(axis: str, text: str) -> typing.List[typing.Any]:
    kind = SWEEP_AXES[axis][1]
    try:
        return [kind(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "invalid {} values for axis {}: {}".format(kind.__name__, axis, text)
        )


def sweep_table(
    axis: str,
    values: typing.Sequence[typing.Any],
    reps: int,
    seed: int,
    base: typing.Mapping[str, typing.Any],
    workers: int = 1,
    baseline: str = "handover",
) -> pd.DataFrame:
    """
    Run every (value, replication) pair of a sweep

    Replication ``r`` uses seed ``seed + r`` for every axis value. Rows are
    ordered by (value, rep) whatever the completion order.

    """
    tasks = [
        (axis, v, r, seed + r, dict(base), baseline)
        for v in values
        for r in range(reps)
    ]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_replication, *zip(*tasks)))
    else:
        rows = []
        for task in tasks:
            rows.append(run_replication(*task))
            logger.info("sweep %s=%s rep %d done", axis, task[1], task[2])
    columns = ROW_COLUMNS + ["rate_comp_bps", "rate_noncomp_bps"]
    table = pd.DataFrame(rows, columns=columns)
    return table.sort_values(["value", "rep"], kind="mergesort").reset_index(drop=True)


def sweep_summary(table: pd.DataFrame) -> pd.DataFrame:
    """ Mean and standard error of the rates and improvement per axis value """
    grouped = table.groupby("value", sort=True)
    out = pd.DataFrame(
        {
            "axis": grouped["axis"].first(),
            "reps": grouped["rep"].count(),
            "rate_comp_bps_mean": grouped["rate_comp_bps"].mean(),
            "rate_comp_bps_stderr": grouped["rate_comp_bps"].sem(),
            "rate_noncomp_bps_mean": grouped["rate_noncomp_bps"].mean(),
            "rate_noncomp_bps_stderr": grouped["rate_noncomp_bps"].sem(),
            "improvement_pct_mean": grouped["improvement_pct"].mean(),
            "improvement_pct_stderr": grouped["improvement_pct"].sem(),
        }
    ).reset_index()
    return out[SUMMARY_COLUMNS]


def cmd_sweep(args) -> int:
    """ Monte Carlo sweep of CoMP against the single-BS baseline """
    values = _parse_values(args.axis, args.values)
    if not values:
        raise ScenarioError("no sweep values given")
    base = dict(
        n_clusters=args.clusters,
        bs_per_cluster=args.bs,
        ues_per_cluster=args.ues,
        max_load=args.max_load,
    )
    table = sweep_table(
        args.axis, values, args.reps, args.seed, base, args.workers, args.baseline
    )
    table[ROW_COLUMNS].to_csv(args.output, index=False)
    if args.summary:
        sweep_summary(table).to_csv(args.summary, index=False)
    logger.info("sweep wrote %d rows to %s", len(table), args.output)
    return EXIT_OK


def cmd_reduce(args) -> int:
    """ Network encoding of a DIMACS formula """
    formula = read_dimacs(args.cnf)
    scenario, meta = build_sat_instance(formula, args.negligible_gain)
    write_scenario(scenario, args.output, dict(reduction=meta.to_dict()))
    print(
        "{}: {} variables, {} clauses -> {} BSs, {} UEs".format(
            args.output,
            formula.n_vars,
            formula.n_clauses,
            scenario.n_bs,
            scenario.n_ues,
        )
    )
    return EXIT_OK


def cmd_certify(args) -> int:
    """ Satisfiability and encoding feasibility of a DIMACS formula """
    formula = read_dimacs(args.cnf)
    cert = certify_formula(formula, args.negligible_gain, FeasibilityConfig())
    print(cert.verdict())
    if args.output:
        _write_text(dump_document(cert.to_dict()), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """ Construct the argument parser of the `compcell` command """
    parser = argparse.ArgumentParser(
        prog="compcell",
        description="CoMP-cell selection and resource allocation for C-RAN.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="diagnostics written to stderr",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    defaults = GeneratorConfig()
    sub = commands.add_parser("generate", help="random hexagonal deployment")
    sub.add_argument("--clusters", type=int, default=defaults.n_clusters)
    sub.add_argument("--bs-per-cluster", type=int, default=defaults.bs_per_cluster)
    sub.add_argument("--ues-per-cluster", type=int, default=defaults.ues_per_cluster)
    sub.add_argument("--radius", type=float, default=defaults.cluster_radius_m)
    sub.add_argument("--carrier-ghz", type=float, default=defaults.carrier_ghz)
    sub.add_argument("--fronthaul-gbps", type=float, default=defaults.fronthaul_gbps)
    sub.add_argument("--shadowing-db", type=float, default=defaults.shadowing_sigma_db)
    sub.add_argument("--max-load", type=float, default=defaults.max_load)
    sub.add_argument("--demand-bits", type=float, default=defaults.demand_bits)
    sub.add_argument("--seed", type=int, default=defaults.rng_seed)
    sub.add_argument("-o", "--output", required=True)
    sub.set_defaults(func=cmd_generate)

    def solver_flags(sub):
        fixed = FixedPointConfig()
        sub.add_argument("--tolerance", type=float, default=fixed.tolerance)
        sub.add_argument("--max-iterations", type=int, default=fixed.max_iterations)

    sub = commands.add_parser("solve", help="optimal allocation of an association")
    sub.add_argument("scenario")
    sub.add_argument(
        "--assoc",
        default="best-single",
        help="best-single, full, assignment:<bits> or an association JSON file",
    )
    sub.add_argument("-o", "--output")
    solver_flags(sub)
    sub.set_defaults(func=cmd_solve)

    sub = commands.add_parser("select", help="greedy CoMP-cell selection")
    sub.add_argument("scenario")
    sub.add_argument("-o", "--output")
    sub.add_argument("--trace", help="write filter decisions as JSON lines")
    sub.add_argument("--verbose", action="store_true", help="echo decisions")
    sub.add_argument("--no-resolve", action="store_true")
    sub.add_argument("--no-certify", action="store_true")
    sub.add_argument(
        "--start",
        choices=BASELINES,
        default="strongest",
        help="single-BS association the selection starts from",
    )
    solver_flags(sub)
    sub.set_defaults(func=cmd_select)

    sub = commands.add_parser("sweep", help="CoMP against single-BS baseline")
    sub.add_argument("--axis", choices=sorted(SWEEP_AXES), required=True)
    sub.add_argument("--values", required=True, help="comma-separated axis values")
    sub.add_argument("--reps", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--clusters", type=int, default=defaults.n_clusters)
    sub.add_argument("--ues", type=int, default=defaults.ues_per_cluster)
    sub.add_argument("--bs", type=int, default=defaults.bs_per_cluster)
    sub.add_argument("--max-load", type=float, default=defaults.max_load)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--baseline", choices=BASELINES, default="handover")
    sub.add_argument("-o", "--output", required=True)
    sub.add_argument("--summary")
    sub.set_defaults(func=cmd_sweep)

    for name, func, text in (
        ("reduce", cmd_reduce, "network encoding of a DIMACS formula"),
        ("certify", cmd_certify, "satisfiability against encoding feasibility"),
    ):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("cnf")
        sub.add_argument("-o", "--output", required=name == "reduce")
        sub.add_argument("--negligible-gain", type=float, default=0.0)
        sub.set_defaults(func=func)

    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """
    Entry point of the `compcell` command

    Parameters
    ----------
    argv : list of str, optional
        Arguments without the program name; defaults to ``sys.argv[1:]``.

    Returns
    -------
    int
        Process exit code.

    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.func(args)
    except Infeasible as exc:
        print("infeasible: {} ({})".format(exc.constraint, exc), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NoConvergence, Diverged) as exc:
        print("no convergence: {}".format(exc), file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except TooLarge as exc:
        print("error: instance too large: {}".format(exc), file=sys.stderr)
        return EXIT_USAGE
    except (
        ScenarioError,
        InvalidFormula,
        ZeroDemand,
        ClusterViolation,
        argparse.ArgumentTypeError,
        OSError,
        ValueError,
    ) as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
