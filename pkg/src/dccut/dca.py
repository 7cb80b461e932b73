"""Penalized difference-of-convex local search.

The mixed-binary program is relaxed to

    min  f(u) + t * p(x)   over the polytope,
    p(x) = sum_i min(x_i, 1 - x_i),

which for large enough t shares its global minimizers with the original
problem.  Each iteration linearizes the concave part at the current
point and lets the simplex engine minimize the resulting linear model,
so every iterate after the first is a vertex.  The iteration count is
finite because the objective is polyhedral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dccut.instance import MblpInstance, Point, PolyState, evaluate_f, is_in_K, is_in_S
from dccut.simplex import LinearProgram, LpOutcome, solve_lp

TIE_TOL = 1e-9
DEFAULT_EPS1 = 1e-6
DEFAULT_EPS2 = 1e-3
DEFAULT_MAX_ITER = 1000
_MONOTONE_SLACK = 1e-9


class DcaError(Exception):
    pass


class DcaInfeasibleError(DcaError):
    """The working polytope is empty; surfaced from the LP solve."""


class DcaIterationLimitError(DcaError):
    def __init__(self, max_iter: int):
        super().__init__(f"no convergence within {max_iter} iterations")
        self.max_iter = max_iter


@dataclass(frozen=True)
class DcaResult:
    point: Point
    value: float                 # penalized objective at the critical point
    plain_value: float           # f only
    iterations: int
    certified_local_min: bool
    feasible: bool               # mixed-binary feasible w.r.t. the state it ran on
    tau_trace: tuple = ()        # penalized objective per iterate, u0 first
    point_trace: tuple = ()      # iterates, u0 first; all later ones are vertices


def penalty_p(u: Point) -> float:
    """sum_i min(x_i, 1-x_i): nonnegative on the box, zero iff x binary."""
    return float(np.minimum(u.x, 1.0 - u.x).sum())


def penalized_objective(inst: MblpInstance, t: float, u: Point) -> float:
    return evaluate_f(inst, u) + t * penalty_p(u)


def subgradient_h(
    inst: MblpInstance,
    t: float,
    u: Point,
    tie_rule: str = "deterministic",
    rng: np.random.Generator | None = None,
    tie_tol: float = TIE_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Subgradient (v, w) of the concave part at u.

    v = -c + t*z with z_i = sign(x_i - 1/2); at a tie, +1 under the
    deterministic rule or a seeded draw from [-1, 1]; w = -d always.
    """
    z = np.where(u.x > 0.5, 1.0, -1.0)
    ties = np.abs(u.x - 0.5) <= tie_tol
    if ties.any():
        if tie_rule == "deterministic":
            z[ties] = 1.0
        elif tie_rule == "seeded-random":
            if rng is None:
                raise ValueError("seeded-random tie rule needs an rng")
            z[ties] = rng.uniform(-1.0, 1.0, size=int(ties.sum()))
        else:
            raise ValueError(f"unknown tie rule {tie_rule!r}")
    return -inst.c + t * z, -inst.d.copy()


def lp_over_state(state: PolyState, objective: np.ndarray) -> LinearProgram:
    """min objective'u over the cut-reduced polytope (box kept as bounds)."""
    G, h = state.row_system()
    return LinearProgram(
        objective=objective,
        rows=G,
        rhs=h,
        lower=state.base.box_lower(),
        upper=state.base.box_upper(),
    )


def _solve_linearized(state: PolyState, v: np.ndarray, w: np.ndarray) -> LpOutcome:
    out = solve_lp(lp_over_state(state, -np.concatenate([v, w])))
    if out.status == "infeasible":
        raise DcaInfeasibleError("working polytope is empty")
    if out.status != "optimal":
        raise DcaError(f"linearized subproblem came back {out.status}")
    return out


def dca_solve(
    state: PolyState,
    t: float,
    u0: Point,
    eps1: float = DEFAULT_EPS1,
    eps2: float = DEFAULT_EPS2,
    max_iter: int = DEFAULT_MAX_ITER,
    tie_rule: str = "deterministic",
    rng: np.random.Generator | None = None,
    penalty_only: bool = False,
) -> DcaResult:
    """Run the linearize-and-minimize loop from u0 to a critical point.

    Stops when the relative objective change drops below eps1 or the
    relative step below eps2.  penalty_only=True solves the pure
    penalty-minimization variant (f dropped from the objective).
    """
    inst = state.base
    if penalty_only:
        tau = lambda u: t * penalty_p(u)  # noqa: E731
    else:
        tau = lambda u: penalized_objective(inst, t, u)  # noqa: E731

    u = u0
    tau_prev = tau(u)
    trace = [tau_prev]
    # descent and the stopping rule only make sense between iterates in
    # the polytope; a start outside it (random restarts) first hops in
    in_polytope = is_in_K(state, u, tol=1e-7)
    for k in range(1, max_iter + 1):
        v, w = subgradient_h(inst, t, u, tie_rule=tie_rule, rng=rng)
        if penalty_only:
            v = v + inst.c
            w = w + inst.d
        out = _solve_linearized(state, v, w)
        u_next = Point.from_vector(out.solution, inst.n)
        tau_next = tau(u_next)
        if in_polytope and tau_next > tau_prev + _MONOTONE_SLACK * (1.0 + abs(tau_prev)):
            raise DcaError(
                f"objective increased from {tau_prev} to {tau_next} at iteration {k}"
            )
        trace.append(tau_next)
        dtau = abs(tau_next - tau_prev) / (abs(tau_next) + 1.0)
        dx = float(np.linalg.norm(u_next.as_vector() - u.as_vector())) / (
            float(np.linalg.norm(u_next.as_vector())) + 1.0
        )
        stop_allowed = in_polytope
        u, tau_prev = u_next, tau_next
        in_polytope = True
        if stop_allowed and (dtau <= eps1 or dx <= eps2):
            return DcaResult(
                point=u,
                value=penalized_objective(inst, t, u),
                plain_value=evaluate_f(inst, u),
                iterations=k,
                certified_local_min=bool(np.abs(u.x - 0.5).min(initial=1.0) > TIE_TOL),
                feasible=is_in_S(state, u),
                tau_trace=tuple(trace),
            )
    raise DcaIterationLimitError(max_iter)


def certify_local_min(result: DcaResult, tie_tol: float = TIE_TOL) -> bool:
    """Every x*_i off the breakpoint 1/2 certifies a local minimizer."""
    return bool(np.abs(result.point.x - 0.5).min(initial=1.0) > tie_tol)
