"""Cut construction: the two DC cut families and lift-and-project cuts.

DC cuts come from the affine majorant of the binary penalty anchored at
a critical point u*:

    l(u) = sum_{j: x*_j <= 1/2} x_j + sum_{j: x*_j > 1/2} (1 - x_j),

which touches the penalty at u* and dominates it on the box.  At a
mixed-binary feasible u* the local cut l(u) >= 1 removes u* but no
strictly better feasible point; at an infeasible vertex that is a
certified local minimizer with fractional penalty, the global cut
l(u) >= ceil(l(u*)) is valid for every feasible point.  When neither
applies, a lift-and-project cut from the disjunction x_j = 0 or 1 over
the current polytope separates the point instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dccut.instance import Point, PolyState
from dccut.simplex import LinearProgram, solve_lp

VIOLATION_TOL = 1e-6
MIN_FRACTIONALITY = 1e-3
INT_TOL = 1e-6
TIE_TOL = 1e-9
SCALE_TOL = 1e-9


class CutGenerationError(Exception):
    """The cut LP failed structurally; never a silent pass."""


@dataclass(frozen=True)
class Cut:
    """One valid inequality coeffs'u >= rhs over the (x, y) space."""

    coeffs: np.ndarray
    rhs: float
    kind: str                 # dc1 | dc2 | lap
    source: Point
    iteration: int = 0
    sense: str = ">="

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "rhs", float(self.rhs))

    def value_at(self, u: Point) -> float:
        return float(self.coeffs @ u.as_vector())

    def violation(self, u: Point) -> float:
        """How far u sits on the cut-off side (positive = separated)."""
        return self.rhs - self.value_at(u)


def index_sets(u: Point) -> tuple[tuple, tuple]:
    """Split {0..n-1} into J0 = {j : x_j <= 1/2} and its complement."""
    j0 = tuple(int(j) for j in np.nonzero(u.x <= 0.5)[0])
    j1 = tuple(int(j) for j in np.nonzero(u.x > 0.5)[0])
    return j0, j1


def affine_l(u_star: Point) -> tuple[np.ndarray, float]:
    """Penalty majorant anchored at u_star as (coeffs, constant).

    l(u) = coeffs'u + constant with coeffs in {-1, +1} on x, 0 on y,
    and constant = |J1|.  l(u_star) equals the penalty at u_star and
    l >= penalty >= 0 over the box.
    """
    j0, j1 = index_sets(u_star)
    coeffs = np.zeros(u_star.dim)
    coeffs[list(j0)] = 1.0
    coeffs[list(j1)] = -1.0
    return coeffs, float(len(j1))


def dc_cut_type1(u_star: Point, iteration: int = 0, int_tol: float = INT_TOL) -> Cut:
    """Local cut l(u) >= 1 at a mixed-binary feasible critical point.

    Removes u_star (where l vanishes) while keeping every feasible point
    with a strictly better objective.
    """
    if float(np.abs(u_star.x - np.round(u_star.x)).max(initial=0.0)) > int_tol:
        raise ValueError("type-I cut needs a mixed-binary feasible point")
    coeffs, const = affine_l(u_star)
    return Cut(coeffs=coeffs, rhs=1.0 - const, kind="dc1", source=u_star, iteration=iteration)


def dc_cut_type2(
    u_star: Point,
    tie_tol: float = TIE_TOL,
    int_tol: float = INT_TOL,
    iteration: int = 0,
) -> Cut | None:
    """Global cut l(u) >= ceil(l(u_star)) at an infeasible local minimizer.

    Only constructible when the penalty at u_star is fractional and no
    entry of x_star sits on the breakpoint 1/2 (so local minimality is
    certified); returns None otherwise.
    """
    if float(np.abs(u_star.x - 0.5).min(initial=1.0)) <= tie_tol:
        return None
    coeffs, const = affine_l(u_star)
    l_val = float(coeffs @ u_star.as_vector()) + const
    if abs(l_val - round(l_val)) <= int_tol:
        return None
    return Cut(
        coeffs=coeffs,
        rhs=float(math.ceil(l_val)) - const,
        kind="dc2",
        source=u_star,
        iteration=iteration,
    )


def select_fractional_indices(u_star: Point, nlap: int) -> list[int]:
    """Indices worth a lift-and-project cut, deepest first.

    Keeps entries with fractionality min(x, 1-x) >= 0.001, orders them
    by closeness to 1/2 (ties by index), and truncates to nlap.
    """
    if nlap < 1:
        return []
    frac = np.minimum(u_star.x, 1.0 - u_star.x)
    eligible = np.nonzero(frac >= MIN_FRACTIONALITY)[0]
    ranked = sorted(eligible, key=lambda j: (abs(u_star.x[j] - 0.5), j))
    return [int(j) for j in ranked[:nlap]]


def lap_cut(
    state: PolyState,
    u_star: Point,
    j: int,
    violation_tol: float = VIOLATION_TOL,
) -> Cut | None:
    """Lift-and-project cut separating u_star via the disjunction on x_j.

    Solves the cut-generation LP over the current polytope (box bounds
    and accumulated cuts materialized as rows) with the multiplier-sum
    normalization; returns None when the best violation is below
    violation_tol, and raises CutGenerationError on a structural
    failure of the LP.
    """
    frac = min(u_star.x[j], 1.0 - u_star.x[j])
    if frac < MIN_FRACTIONALITY:
        raise ValueError(f"index {j} is not fractional enough (frac={frac:g})")

    G, h = state.full_row_system()
    dim = state.base.dim
    r = G.shape[0]
    # rows in ">=" orientation: Dbar u >= fbar
    Dbar = -G
    fbar = -h
    u_vec = u_star.as_vector()
    beta_bound = float(max(1.0, np.abs(fbar).max())) + 1.0

    # variables: mu0 (r), lam0, mu1 (r), lam1, beta
    n_var = 2 * r + 3
    i_lam0, i_lam1, i_beta = r, 2 * r + 1, 2 * r + 2

    eq_rows = np.zeros((dim, n_var))
    eq_rows[:, :r] = Dbar.T
    eq_rows[j, i_lam0] = -1.0
    eq_rows[:, r + 1: 2 * r + 1] = -Dbar.T
    eq_rows[j, i_lam1] = -1.0

    beta0 = np.zeros(n_var)
    beta0[:r] = -fbar
    beta0[i_beta] = 1.0
    beta1 = np.zeros(n_var)
    beta1[r + 1: 2 * r + 1] = -fbar
    beta1[i_lam1] = -1.0
    beta1[i_beta] = 1.0

    norm_row = np.zeros(n_var)
    norm_row[: i_beta] = 1.0

    rows = np.vstack([eq_rows, beta0[None, :], beta1[None, :], norm_row[None, :]])
    rhs = np.concatenate([np.zeros(dim), [0.0, 0.0, 1.0]])
    equality = np.array([True] * dim + [False, False, True])

    objective = np.zeros(n_var)
    objective[:r] = Dbar @ u_vec
    objective[i_lam0] = -u_vec[j]
    objective[i_beta] = -1.0

    lower = np.zeros(n_var)
    lower[i_beta] = -beta_bound
    upper = np.full(n_var, np.inf)
    upper[i_beta] = beta_bound

    out = solve_lp(LinearProgram(objective, rows, rhs, lower, upper, equality))
    if out.status != "optimal":
        raise CutGenerationError(f"cut LP came back {out.status} for index {j}")

    mu0 = out.solution[:r]
    lam0 = out.solution[i_lam0]
    alpha = Dbar.T @ mu0
    alpha[j] -= lam0
    beta = float(out.solution[i_beta])
    if beta - float(alpha @ u_vec) <= violation_tol:
        return None
    scale = float(np.abs(alpha).max())
    if scale > 1e-12:
        alpha = alpha / scale
        beta = beta / scale
    return Cut(coeffs=alpha, rhs=beta, kind="lap", source=u_star, iteration=state.iteration)


def pool_dedupe(cuts: list[Cut], scale_tol: float = SCALE_TOL) -> list[Cut]:
    """Collapse cuts equal up to positive scaling, keeping the tightest.

    Survivors stay in first-appearance order; within a duplicate group
    the dominant (largest normalized) right-hand side wins.
    """
    kept: list[Cut] = []
    keys: list[tuple[np.ndarray, float]] = []
    for cut in cuts:
        scale = float(np.abs(cut.coeffs).max())
        if scale <= scale_tol:
            key_c, key_r = cut.coeffs, cut.rhs
        else:
            key_c, key_r = cut.coeffs / scale, cut.rhs / scale
        for i, (kc, kr) in enumerate(keys):
            if kc.shape == key_c.shape and float(np.abs(kc - key_c).max()) <= scale_tol:
                if key_r > kr + scale_tol:
                    kept[i] = cut
                    keys[i] = (key_c, key_r)
                break
        else:
            kept.append(cut)
            keys.append((key_c, key_r))
    return kept
