"""Exact solver for the type-1 U-shaped assembly line balancing problem."""

from .bounds import BoundValue, lb1, lb2, lb3, lb123
from .colgen import CgResult, ColumnPool, cg_lower_bound
from .heuristic import DEFAULT_GRID, HeuristicParams, Solution, enumerate_loads, mhhu
from .instance import (
    BACKWARD, FORWARD, Instance, InstanceError, Load, Station, backward_available, forward_available,
    load_file, parse_alb, parse_in2, verify_solution,
)
from .kernels import BACKEND
from .knapsack import PricingResult, solve_pricing
from .master import LpError, LpSolution, MasterProblem, add_column, solve_rlpm
from .search import Memory, Node, SolveReport, branch, oracle_solve, solve

__all__ = [
    "BACKEND", "BACKWARD", "BoundValue", "CgResult", "ColumnPool", "DEFAULT_GRID", "FORWARD",
    "HeuristicParams", "Instance", "InstanceError", "Load", "LpError", "LpSolution", "MasterProblem",
    "Memory", "Node", "PricingResult", "Solution", "SolveReport", "Station", "add_column",
    "backward_available", "branch", "cg_lower_bound", "enumerate_loads", "forward_available", "lb1",
    "lb2", "lb3", "lb123", "load_file", "mhhu", "oracle_solve", "parse_alb", "parse_in2", "solve",
    "solve_pricing", "solve_rlpm", "verify_solution",
]

__version__ = "0.1.0"
