"""Bounded-variable two-phase primal simplex.

Every LP in this package goes through solve_lp so that optimal solutions
are always vertices (basic feasible solutions) of the feasible
polyhedron; the cut theory depends on that.  Dense kernel with an
explicitly maintained basis inverse, refactorized every 100 pivots.
Dantzig pricing by default, switching to Bland's rule after a run of
degenerate pivots to guarantee anti-cycling.  Deterministic: identical
input gives identical pivots, basis, and solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
DEGEN_TOL = 1e-9
STALL_LIMIT = 50
REFACTOR_EVERY = 100
PHASE1_TOL = 1e-8


class SimplexError(Exception):
    pass


class IterationLimitError(SimplexError):
    """Pivot budget exhausted before optimality; never reported as optimal."""

    def __init__(self, pivots: int):
        self.pivots = pivots
        super().__init__(f"simplex exceeded {pivots} pivots")


@dataclass(frozen=True)
class LinearProgram:
    """min objective'u  s.t.  rows u (<=|=) rhs,  lower <= u <= upper.

    `equality` marks rows that hold with equality; `upper` entries may be
    +inf, `lower` must be finite everywhere.
    """

    objective: np.ndarray
    rows: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    equality: np.ndarray = field(default=None)

    def __post_init__(self):
        obj = np.asarray(self.objective, dtype=float)
        n = obj.shape[0]
        rows = np.asarray(self.rows, dtype=float).reshape(-1, n)
        rhs = np.asarray(self.rhs, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        eq = self.equality
        eq = np.zeros(rows.shape[0], dtype=bool) if eq is None else np.asarray(eq, dtype=bool)
        if rhs.shape[0] != rows.shape[0] or eq.shape[0] != rows.shape[0]:
            raise ValueError("row count mismatch between rows, rhs, equality")
        if lower.shape[0] != n or upper.shape[0] != n:
            raise ValueError("bound length mismatch")
        if not np.all(np.isfinite(lower)):
            raise ValueError("every variable needs a finite lower bound")
        if np.any(upper < lower - 1e-12):
            raise ValueError("upper bound below lower bound")
        for name, val in (("objective", obj), ("rows", rows), ("rhs", rhs),
                          ("lower", lower), ("upper", upper), ("equality", eq)):
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class LpOutcome:
    status: str  # optimal | infeasible | unbounded
    solution: np.ndarray | None
    value: float | None
    basis: tuple


# nonbasic status codes
_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


class _Tableau:
    """Working state for one solve: columns = structural + slack (+ artificial)."""

    def __init__(self, lp: LinearProgram):
        n, m = lp.n_vars, lp.n_rows
        self.m = m
        self.n_struct = n
        slack_upper = np.where(lp.equality, 0.0, np.inf)
        self.M = np.hstack([lp.rows, np.eye(m)]) if m else lp.rows.reshape(0, n)
        self.h = lp.rhs.copy()
        self.lo = np.concatenate([lp.lower, np.zeros(m)])
        self.hi = np.concatenate([lp.upper, slack_upper])
        self.cost = np.concatenate([lp.objective, np.zeros(m)])
        self.status = np.full(n + m, _AT_LOWER, dtype=np.int8)
        self.xval = self.lo.copy()
        self.basis: list[int] = []
        self.Binv = np.zeros((m, m))
        self.pivots = 0
        self.stall = 0
        self.bland = False

    @property
    def n_cols(self) -> int:
        return self.M.shape[1]

    def add_artificials(self) -> np.ndarray:
        """Start basis: slack where the slack-only start is feasible,
        artificial column otherwise.  Returns phase-1 cost vector."""
        n, m = self.n_struct, self.m
        resid = self.h - self.M[:, :n] @ self.xval[:n]
        art_cols = []
        basis = []
        for i in range(m):
            slack = n + i
            if resid[i] >= -FEAS_TOL and resid[i] <= self.hi[slack] + FEAS_TOL:
                basis.append(slack)
            else:
                col = np.zeros(m)
                col[i] = 1.0 if resid[i] > 0 else -1.0
                art_cols.append(col)
                basis.append(self.n_cols + len(art_cols) - 1)
        if art_cols:
            self.M = np.hstack([self.M, np.array(art_cols).T])
            k = len(art_cols)
            self.lo = np.concatenate([self.lo, np.zeros(k)])
            self.hi = np.concatenate([self.hi, np.full(k, np.inf)])
            self.cost = np.concatenate([self.cost, np.zeros(k)])
            self.status = np.concatenate([self.status, np.full(k, _AT_LOWER, dtype=np.int8)])
            self.xval = np.concatenate([self.xval, np.zeros(k)])
        self.basis = basis
        self.status[basis] = _BASIC
        phase1 = np.zeros(self.n_cols)
        phase1[self.n_struct + m:] = 1.0
        return phase1

    def refactorize(self):
        if self.m == 0:
            self.Binv = np.zeros((0, 0))
            return
        B = self.M[:, self.basis]
        try:
            self.Binv = np.linalg.solve(B, np.eye(self.m))
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis during refactorization") from exc

    def recompute_basics(self):
        if self.m == 0:
            return
        nb_val = np.where(self.status == _BASIC, 0.0, self.xval)
        self.xval[self.basis] = self.Binv @ (self.h - self.M @ nb_val)

    def iterate(self, cost: np.ndarray, max_pivots: int) -> str:
        """Run simplex pivots under `cost` until optimal/unbounded."""
        while True:
            self.recompute_basics()
            if self.m:
                y = self.Binv.T @ cost[self.basis]
                red = cost - self.M.T @ y
            else:
                red = cost.copy()
            movable = self.hi > self.lo + 1e-15
            cand_low = (self.status == _AT_LOWER) & movable & (red < -OPT_TOL)
            cand_up = (self.status == _AT_UPPER) & movable & (red > OPT_TOL)
            cand = np.nonzero(cand_low | cand_up)[0]
            if cand.size == 0:
                return "optimal"
            if self.bland:
                j = int(cand[0])
            else:
                scores = np.abs(red[cand])
                j = int(cand[np.argmax(scores)])  # argmax takes first max: lowest index tie-break
            direction = 1.0 if self.status[j] == _AT_LOWER else -1.0
            d = self.Binv @ self.M[:, j] if self.m else np.zeros(0)

            theta_bound = self.hi[j] - self.lo[j]
            best_theta = theta_bound
            leave_pos = -1
            leave_to = _AT_LOWER
            for pos in range(self.m):
                k = self.basis[pos]
                delta = direction * d[pos]
                if delta > DEGEN_TOL:
                    theta = max(self.xval[k] - self.lo[k], 0.0) / delta
                    to = _AT_LOWER
                elif delta < -DEGEN_TOL:
                    if not np.isfinite(self.hi[k]):
                        continue
                    theta = max(self.hi[k] - self.xval[k], 0.0) / (-delta)
                    to = _AT_UPPER
                else:
                    continue
                better = theta < best_theta - DEGEN_TOL
                if leave_pos >= 0 and abs(theta - best_theta) <= DEGEN_TOL:
                    # tie among basic blockers: largest pivot for stability,
                    # smallest variable index under Bland's rule
                    if self.bland:
                        better = k < self.basis[leave_pos]
                    else:
                        better = abs(delta) > abs(direction * d[leave_pos])
                if better:
                    best_theta = theta
                    leave_pos = pos
                    leave_to = to

            if not np.isfinite(best_theta):
                return "unbounded"

            if best_theta <= DEGEN_TOL:
                self.stall += 1
                if self.stall > STALL_LIMIT:
                    self.bland = True
            else:
                self.stall = 0
                self.bland = False

            if leave_pos < 0:
                # bound flip, no basis change
                self.status[j] = _AT_UPPER if self.status[j] == _AT_LOWER else _AT_LOWER
                self.xval[j] = self.hi[j] if self.status[j] == _AT_UPPER else self.lo[j]
            else:
                k = self.basis[leave_pos]
                self.xval[j] = self.xval[j] + direction * best_theta
                self.xval[k] = self.lo[k] if leave_to == _AT_LOWER else self.hi[k]
                self.status[k] = leave_to
                self.status[j] = _BASIC
                self.basis[leave_pos] = j
                self.pivots += 1
                if self.pivots % REFACTOR_EVERY == 0:
                    self.refactorize()
                else:
                    self._eta_update(leave_pos, d)
            if self.pivots > max_pivots:
                raise IterationLimitError(self.pivots)

    def _eta_update(self, pos: int, d: np.ndarray):
        piv = d[pos]
        if abs(piv) < 1e-12:
            self.refactorize()
            return
        row = self.Binv[pos, :] / piv
        self.Binv -= np.outer(d, row)
        self.Binv[pos, :] = row


def solve_lp(lp: LinearProgram, max_pivots: int = 50_000) -> LpOutcome:
    """Solve to a vertex optimum, or classify infeasible/unbounded.

    Raises IterationLimitError when the pivot budget runs out.
    """
    tab = _Tableau(lp)
    phase1_cost = tab.add_artificials()
    tab.refactorize()

    n_art = tab.n_cols - tab.n_struct - tab.m
    if n_art:
        status = tab.iterate(phase1_cost, max_pivots)
        if status == "unbounded":  # cannot happen: phase-1 cost bounded below by 0
            raise SimplexError("phase 1 reported unbounded")
        tab.recompute_basics()
        art_slice = slice(tab.n_struct + tab.m, tab.n_cols)
        if float(tab.xval[art_slice].sum()) > PHASE1_TOL:
            return LpOutcome("infeasible", None, None, tuple(tab.basis))
        # freeze artificials at zero for phase 2
        tab.hi[art_slice] = 0.0
        tab.xval[art_slice] = np.maximum(tab.xval[art_slice], 0.0)

    status = tab.iterate(tab.cost, max_pivots)
    if status == "unbounded":
        return LpOutcome("unbounded", None, None, tuple(tab.basis))
    tab.recompute_basics()
    sol = tab.xval[: tab.n_struct].copy()
    np.clip(sol, lp.lower, np.where(np.isfinite(lp.upper), lp.upper, np.inf), out=sol)
    value = float(lp.objective @ sol)
    return LpOutcome("optimal", sol, value, tuple(tab.basis))
