"""Cutting-plane solver for mixed-binary linear programs.

Combines a penalty-based difference-of-convex local search with two
families of DC cuts and lift-and-project cuts inside one cutting-plane
loop, plus brute-force oracles for desk-scale verification.
"""

from dccut.instance import MblpInstance, Point, PolyState, parse_instance, serialize_instance
from dccut.simplex import LinearProgram, LpOutcome, solve_lp
from dccut.dca import DcaResult, dca_solve
from dccut.cutgen import Cut
from dccut.solver import SolverConfig, SolveReport, dccut_solve

__all__ = [
    "MblpInstance",
    "Point",
    "PolyState",
    "parse_instance",
    "serialize_instance",
    "LinearProgram",
    "LpOutcome",
    "solve_lp",
    "DcaResult",
    "dca_solve",
    "Cut",
    "SolverConfig",
    "SolveReport",
    "dccut_solve",
]

__version__ = "0.1.0"
