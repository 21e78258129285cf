#!/usr/bin/env python3

"""
DIMACS CNF Parsing Utilities

This module reads and writes 3-CNF formulas in the DIMACS CNF format used by
SAT solvers and benchmark collections such as SATLIB.

Example::

    import compcell.dimacs as cd

    formula = cd.parse_dimacs("p cnf 3 1\n1 2 -3 0\n")

    print(formula.n_vars, formula.n_clauses)
    print(formula.clauses)
    print(cd.format_dimacs(formula))

"""

import collections
import os
import re
import typing
import urllib.request
from dataclasses import dataclass

from parsimonious import Grammar, NodeVisitor
from parsimonious.exceptions import ParseError, VisitationError

from .errors import InvalidFormula
from .scenario import CnfFormula


def _flatten(nested):
    """ Flatten nested lists """
    for item in nested:
        if isinstance(item, collections.abc.Iterable) and not isinstance(
            item, (str, bytes)
        ):
            yield from _flatten(item)
        else:
            yield item


GRAMMAR = Grammar(
    r"""
    document = ws (comment / problem / trailer / clause)*
    ws = ~"\s*"
    hs = ~"[ \t]+"
    sep = ~"\s+"
    comment = ~"c[^\n]*" ws
    count = ~"[0-9]+"
    problem = "p" hs "cnf" hs count hs count ws
    literal = ~"-?[1-9][0-9]*"
    clause = (literal sep)* "0" ws
    trailer = "%" ws ("0" ws)?
"""
)


@dataclass
class _Header:
    """ Temporary structure for the problem line """

    n_vars: int
    n_clauses: int


@dataclass
class _Clause:
    """ Temporary structure for parsing clauses """

    literals: typing.Tuple[int, ...]


class DIMACSVisitor(NodeVisitor):
    """ Class to traverse a DIMACS parse tree """

    unwrapped_exceptions = (InvalidFormula,)

    def __init__(self):
        self.header = None
        self.clauses = []
        super(NodeVisitor, self).__init__()

    def visit_count(self, node, visited_children):
        return int(node.text)

    def visit_literal(self, node, visited_children):
        return int(node.text)

    def visit_problem(self, node, visited_children):
        if self.header is not None:
            raise InvalidFormula("duplicate problem line")
        n_vars, n_clauses = list(_flatten(visited_children))
        self.header = _Header(n_vars, n_clauses)
        return self.header

    def visit_clause(self, node, visited_children):
        if self.header is None:
            raise InvalidFormula("clause before the problem line")
        clause = _Clause(tuple(_flatten(visited_children)))
        self.clauses.append(clause)
        return clause

    def generic_visit(self, node, visited_children):
        return [x for x in visited_children]


def _read_text(source) -> str:
    """ Read content from various possibilities """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if hasattr(source, "read"):
        source = source.read()
        if isinstance(source, bytes):
            source = source.decode("utf-8")
    elif isinstance(source, os.PathLike):
        with open(source, "r") as infile:
            source = infile.read()
    elif re.match(r"^(https?|ftp):", source):
        with urllib.request.urlopen(source) as inurl:
            source = inurl.read().decode("utf-8")
    elif "\n" not in source and os.path.isfile(source):
        with open(source, "r") as infile:
            source = infile.read()
    return source


def parse_dimacs(source) -> CnfFormula:
    """
    Parse DIMACS CNF content

    Parameters
    ----------
    source : str or bytes or file-like or path or URL
        DIMACS content to parse.

    Returns
    -------
    CnfFormula

    Raises
    ------
    InvalidFormula
        On syntax errors, a missing or inconsistent problem line, literals
        outside the declared variables, or clauses without exactly three
        distinct literals.

    """
    text = _read_text(source)

    visitor = DIMACSVisitor()
    try:
        visitor.visit(GRAMMAR.parse(text))
    except ParseError as exc:
        raise InvalidFormula("DIMACS syntax error: {}".format(exc))
    except VisitationError as exc:
        raise InvalidFormula(str(exc))

    if visitor.header is None:
        raise InvalidFormula("missing problem line")
    if len(visitor.clauses) != visitor.header.n_clauses:
        raise InvalidFormula(
            "problem line declares {} clauses, found {}".format(
                visitor.header.n_clauses, len(visitor.clauses)
            )
        )
    return CnfFormula(visitor.header.n_vars, tuple(x.literals for x in visitor.clauses))


def format_dimacs(formula: CnfFormula, comment: typing.Optional[str] = None) -> str:
    """
    Render a formula as DIMACS CNF

    Parameters
    ----------
    formula : CnfFormula
    comment : str, optional
        Text written as leading comment lines.

    Returns
    -------
    str

    """
    lines = []
    if comment:
        lines.extend("c {}".format(x).rstrip() for x in comment.splitlines())
    lines.append("p cnf {} {}".format(formula.n_vars, formula.n_clauses))
    lines.extend(" ".join(str(x) for x in clause) + " 0" for clause in formula.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path: str) -> CnfFormula:
    """ Read a DIMACS CNF file """
    with open(path, "r") as infile:
        return parse_dimacs(infile)


def write_dimacs(formula: CnfFormula, path: str, comment: typing.Optional[str] = None):
    """ Write a DIMACS CNF file """
    with open(path, "w") as outfile:
        outfile.write(format_dimacs(formula, comment))
