#!/usr/bin/env python3

"""
The CompCell package selects CoMP (coordinated multi-point) serving sets and
allocates OFDMA resources in fronthaul-constrained C-RAN clusters. It includes
the fixed-point allocation solvers, the greedy cell-selection algorithm, random
scenario generators, the 3-CNF encoding of the association problem and
brute-force checks for small instances.

"""

__version__ = "0.1.0"

from .allocation import solve_optimal
from .dimacs import parse_dimacs
from .model import Association, NetworkScenario, read_scenario, write_scenario
from .scenario import GeneratorConfig, build_sat_instance, generate
from .selection import default_initial_association, run_algorithm1
