"""Brute-force oracles: vertex enumeration, exhaustive solving, penalty
thresholds, and cut audits.

Everything here is deliberately independent of the solver hot path it
checks: vertex enumeration runs exact Fraction arithmetic over the
instance data, and the continuous subproblems of the exhaustive sweeps
go to scipy's LP solver, never to the in-house simplex.  Used by tests
and the acceptance suite only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from dccut.cutgen import Cut
from dccut.instance import MblpInstance, Point, PolyState

SIZE_GUARD = 16
BRUTE_GUARD = 24
_SUBSET_CAP = 2_000_000
_CHUNK = 1 << 16
_HALF = Fraction(1, 2)


class OracleGuardError(ValueError):
    """Problem too large for an exhaustive sweep."""


@dataclass(frozen=True)
class VertexSet:
    """All vertices of a polytope, with exact rational coordinates."""

    vertices: tuple
    exact: tuple  # tuple of tuples of Fraction, parallel to vertices
    descriptor: str = ""

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class T0Result:
    """Exact-penalty threshold and the intermediates it is built from."""

    t0: Fraction | float
    alpha0: Fraction | float          # relaxation optimum over the polytope
    min_feasible: float               # best mixed-binary objective value
    min_positive_penalty: Fraction | float | None  # None when every vertex is binary


@dataclass(frozen=True)
class T1Result:
    """Cut-validity threshold M/sigma and its intermediates."""

    t1: Fraction | float
    big_m: Fraction | float | None
    sigma: Fraction | float | None
    defined: bool


@dataclass(frozen=True)
class CutAudit:
    valid: bool
    counterexample: Point | None = None


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan over Fractions; None when the system is singular."""
    d = len(rhs)
    M = [rows[i][:] + [rhs[i]] for i in range(d)]
    for col in range(d):
        piv = next((r for r in range(col, d) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(d):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[r][d] for r in range(d)]


def enumerate_vertices(state: PolyState, size_guard: int = SIZE_GUARD) -> VertexSet:
    """All basic feasible points of the (cut-reduced) polytope.

    Checks every choice of dim active rows among constraint rows and box
    bounds, solving each candidate system exactly.  Exponential; guarded
    by size_guard on the dimension and a cap on the subset count.
    """
    dim = state.base.dim
    if dim > size_guard:
        raise OracleGuardError(f"dimension {dim} exceeds size guard {size_guard}")
    G, h = state.full_row_system()
    n_rows = G.shape[0]
    n_subsets = math.comb(n_rows, dim)
    if n_subsets > _SUBSET_CAP:
        raise OracleGuardError(f"{n_subsets} candidate bases exceed the enumeration cap")

    Gf = [[Fraction(v) for v in row] for row in G]
    hf = [Fraction(v) for v in h]

    found: dict[tuple, tuple] = {}
    for subset in itertools.combinations(range(n_rows), dim):
        sol = _solve_exact([Gf[i] for i in subset], [hf[i] for i in subset])
        if sol is None:
            continue
        key = tuple(sol)
        if key in found:
            continue
        if all(sum(Gf[i][j] * sol[j] for j in range(dim)) <= hf[i] for i in range(n_rows)):
            found[key] = key
    exact = sorted(found)
    n = state.base.n
    points = tuple(Point(np.array([float(v) for v in vx[:n]]),
                         np.array([float(v) for v in vx[n:]])) for vx in exact)
    return VertexSet(points, tuple(exact), descriptor=f"{state.base.name}@k{state.iteration}")


def _binary_chunks(n: int):
    total = 1 << n
    shifts = np.arange(n)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(float)


def _y_subproblem(inst: MblpInstance, x: np.ndarray, obj: np.ndarray,
                  extra_rows: np.ndarray | None = None,
                  extra_rhs: np.ndarray | None = None):
    """min obj'y over {y in [0, ybar] : By <= b - Ax (+ extra rows)} via scipy."""
    resid = inst.b - inst.A @ x
    B = inst.B
    if extra_rows is not None:
        B = np.vstack([B, extra_rows])
        resid = np.concatenate([resid, extra_rhs])
    res = linprog(obj, A_ub=B, b_ub=resid, bounds=list(zip(np.zeros(inst.q), inst.ybar)),
                  method="highs")
    if res.status == 2:
        return None
    if not res.success:
        raise RuntimeError(f"oracle LP failed with status {res.status}: {res.message}")
    return res


def brute_force_solve(inst: MblpInstance) -> tuple[str, float | None, Point | None]:
    """Global optimum by sweeping all 2^n binary assignments.

    For q > 0 each assignment gets its continuous LP solved by scipy.
    Returns (status, value, point) with status optimal or infeasible.
    """
    if inst.n > BRUTE_GUARD:
        raise OracleGuardError(f"n={inst.n} exceeds brute-force guard {BRUTE_GUARD}")
    feas_tol = 1e-9

    if inst.q == 0:
        best_val, best_x = None, None
        for X in _binary_chunks(inst.n):
            ok = np.all(X @ inst.A.T <= inst.b + feas_tol, axis=1)
            if not ok.any():
                continue
            vals = X[ok] @ inst.c
            i = int(np.argmin(vals))
            if best_val is None or vals[i] < best_val:
                best_val = float(vals[i])
                best_x = X[ok][i].copy()
        if best_val is None:
            return "infeasible", None, None
        return "optimal", best_val, Point(best_x, np.zeros(0))

    # rows with no continuous part filter x cheaply before any LP runs
    pure = np.all(inst.B == 0.0, axis=1)
    best_val, best_pt = None, None
    for X in _binary_chunks(inst.n):
        if pure.any():
            ok = np.all(X @ inst.A[pure].T <= inst.b[pure] + feas_tol, axis=1)
            X = X[ok]
        for x in X:
            res = _y_subproblem(inst, x, inst.d)
            if res is None:
                continue
            val = float(inst.c @ x) + float(res.fun)
            if best_val is None or val < best_val - 0.0:
                best_val = val
                best_pt = Point(x.copy(), np.asarray(res.x))
    if best_val is None:
        return "infeasible", None, None
    return "optimal", best_val, best_pt


def _penalty(x: tuple) -> Fraction:
    return sum((v if v <= _HALF else 1 - v) for v in x)


def _affine_gauge(w_x: tuple, u_x: tuple) -> Fraction:
    """Value at u of the penalty majorant anchored at w (exact)."""
    total = Fraction(0)
    for wj, uj in zip(w_x, u_x):
        total += uj if wj <= _HALF else 1 - uj
    return total


def compute_t0(inst: MblpInstance, vertices: VertexSet) -> T0Result:
    """Penalty weight above which the penalized relaxation is exact.

    (min_S f - alpha0) / min{p > 0 over vertices}; zero when every
    vertex is already binary (the 1/inf = 0 convention).
    """
    status, min_s, _ = brute_force_solve(inst)
    if status != "optimal":
        raise ValueError("instance is infeasible; threshold undefined")
    cost = [Fraction(float(v)) for v in inst.cost_vector()]
    fvals = [sum(ci * ui for ci, ui in zip(cost, vx)) for vx in vertices.exact]
    alpha0 = min(fvals)
    n = inst.n
    pvals = [_penalty(vx[:n]) for vx in vertices.exact]
    positive = [p for p in pvals if p > 0]
    if not positive:
        return T0Result(Fraction(0), alpha0, min_s, None)
    m_min = min(positive)
    t0 = (Fraction(min_s) - alpha0) / m_min
    return T0Result(t0, alpha0, min_s, m_min)


def compute_t1(inst: MblpInstance, vertices: VertexSet) -> T1Result:
    """Penalty weight above which local minimizers admit global cuts.

    M = max_V f - min_{V\\S} f; sigma scans, for each non-binary vertex
    w, the vertices where the majorant anchored at w drops below its
    value at w.  Degenerate cases come back flagged with t1 = 0.
    """
    n = inst.n
    cost = [Fraction(float(v)) for v in inst.cost_vector()]
    fvals = [sum(ci * ui for ci, ui in zip(cost, vx)) for vx in vertices.exact]
    infeasible = [i for i, vx in enumerate(vertices.exact)
                  if any(v != 0 and v != 1 for v in vx[:n])]
    if not infeasible:
        return T1Result(Fraction(0), None, None, False)
    big_m = max(fvals) - min(fvals[i] for i in infeasible)
    sigma = None
    for i in infeasible:
        w_x = vertices.exact[i][:n]
        lww = _affine_gauge(w_x, w_x)
        for vx in vertices.exact:
            drop = lww - _affine_gauge(w_x, vx[:n])
            if drop > 0 and (sigma is None or drop < sigma):
                sigma = drop
    if sigma is None:
        return T1Result(Fraction(0), big_m, None, False)
    return T1Result(big_m / sigma, big_m, sigma, True)


def audit_cut(inst: MblpInstance, cut: Cut, mode: str = "global",
              value: float | None = None, tol: float = 1e-7) -> CutAudit:
    """Exhaustively check a cut against the mixed-binary feasible set.

    global mode: every feasible point must satisfy coeffs'u >= rhs.
    better-than mode: only feasible points with objective < value.
    Returns the first counterexample found, if any.
    """
    if inst.n > BRUTE_GUARD:
        raise OracleGuardError(f"n={inst.n} exceeds brute-force guard {BRUTE_GUARD}")
    if mode not in ("global", "better-than"):
        raise ValueError(f"unknown audit mode {mode!r}")
    if mode == "better-than" and value is None:
        raise ValueError("better-than mode needs a reference value")
    feas_tol = 1e-9
    cut_x, cut_y = cut.coeffs[: inst.n], cut.coeffs[inst.n:]

    for X in _binary_chunks(inst.n):
        if inst.q == 0:
            ok = np.all(X @ inst.A.T <= inst.b + feas_tol, axis=1)
            X = X[ok]
            if mode == "better-than":
                X = X[X @ inst.c < value - feas_tol]
            if X.shape[0] == 0:
                continue
            lhs = X @ cut_x
            bad = lhs < cut.rhs - tol
            if bad.any():
                i = int(np.argmax(bad))
                return CutAudit(False, Point(X[i].copy(), np.zeros(0)))
        else:
            pure = np.all(inst.B == 0.0, axis=1)
            if pure.any():
                ok = np.all(X @ inst.A[pure].T <= inst.b[pure] + feas_tol, axis=1)
                X = X[ok]
            for x in X:
                extra_rows = extra_rhs = None
                if mode == "better-than":
                    # restrict to d'y < value - c'x (closed with a small margin)
                    extra_rows = inst.d.reshape(1, -1)
                    extra_rhs = np.array([value - float(inst.c @ x) - feas_tol])
                res = _y_subproblem(inst, x, cut_y, extra_rows, extra_rhs)
                if res is None:
                    continue
                if float(cut_x @ x) + float(res.fun) < cut.rhs - tol:
                    return CutAudit(False, Point(x.copy(), np.asarray(res.x)))
    return CutAudit(True, None)
