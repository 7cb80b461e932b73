"""Cutting-plane orchestration: serial loop, multi-cut variant, and the
parallel worker contract.

Per round: solve the LP relaxation of the current polytope for the lower
bound; if its vertex is mixed-binary feasible we are done, otherwise run
the penalized local search from it, harvest DC cuts (local at feasible
points, global at certified infeasible minimizers) and lift-and-project
cuts, shrink the polytope, repeat.  The `lapcut` algorithm disables the
local search entirely and cuts only at the relaxation vertex;
`dccut-v1` adds lift-and-project cuts at the local-search point even
when a global DC cut is available.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from dccut import cutgen, dca
from dccut.cutgen import Cut, pool_dedupe
from dccut.instance import MblpInstance, Point, PolyState, evaluate_f, is_in_S
from dccut.simplex import LinearProgram, solve_lp

log = logging.getLogger(__name__)

ALGOS = ("lapcut", "dccut", "dccut-v1")


@dataclass(frozen=True)
class SolverConfig:
    algo: str = "dccut"
    t: float = 500.0
    eps: float = 0.01
    nlap: int = 1
    workers: int = 1
    time_limit: float | None = None
    seed: int = 0
    fbest: float | None = None
    max_iterations: int | None = None
    dca_eps1: float = dca.DEFAULT_EPS1
    dca_eps2: float = dca.DEFAULT_EPS2
    dca_max_iter: int = dca.DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {ALGOS}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.nlap < 0:
            raise ValueError("nlap must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class TraceRow:
    k: int
    lb: float
    ub: float
    cuts_added: int


@dataclass(frozen=True)
class SolveReport:
    status: str  # optimal | eps-optimal | infeasible | limit-reached
    ub: float
    lb: float
    u_opt: Point | None
    gap: float
    clgap: float | None
    iterations: int
    cut_dc1: int
    cut_dc2: int
    cut_lap: int
    wall_time: float
    trace: tuple = field(default_factory=tuple)
    cuts: tuple = field(default_factory=tuple)


def compute_gap(ub: float, lb: float) -> float:
    """(ub-lb)/(max(|ub|,|lb|)+1); +inf while either bound is missing."""
    if math.isinf(ub) or math.isinf(lb):
        return math.inf
    return (ub - lb) / (max(abs(ub), abs(lb)) + 1.0)


def compute_clgap(lb: float, f0: float, fbest: float) -> float | None:
    """Share of the root gap closed: (lb-f0)/(fbest-f0); None when
    fbest coincides with the root bound (undefined)."""
    if fbest == f0:
        return None
    if math.isinf(lb):
        return 0.0
    return (lb - f0) / (fbest - f0)


def _lap_cuts_at(state: PolyState, point: Point, nlap: int) -> list[Cut]:
    cuts = []
    for j in cutgen.select_fractional_indices(point, nlap):
        cut = cutgen.lap_cut(state, point, j)
        if cut is not None:
            cuts.append(cut)
    return cuts


def _cuts_for_dca_point(state: PolyState, cfg: SolverConfig, res: dca.DcaResult) -> list[Cut]:
    """Cut recipe at one local-search output, per the algorithm variant."""
    if res.feasible:
        return [cutgen.dc_cut_type1(res.point, iteration=state.iteration)]
    dc2 = cutgen.dc_cut_type2(res.point, iteration=state.iteration)
    if cfg.algo == "dccut-v1":
        cuts = _lap_cuts_at(state, res.point, cfg.nlap)
        if dc2 is not None:
            cuts.append(dc2)
        return cuts
    if dc2 is not None:
        return [dc2]
    return _lap_cuts_at(state, res.point, cfg.nlap)


def _serial_iteration(
    state: PolyState, cfg: SolverConfig, u0: Point
) -> tuple[list[Cut], list[tuple[float, Point]]]:
    pool = _lap_cuts_at(state, u0, cfg.nlap)
    ub_candidates: list[tuple[float, Point]] = []
    if cfg.algo != "lapcut":
        res = dca.dca_solve(
            state, cfg.t, u0,
            eps1=cfg.dca_eps1, eps2=cfg.dca_eps2, max_iter=cfg.dca_max_iter,
        )
        if res.feasible:
            ub_candidates.append((res.plain_value, res.point))
        pool.extend(_cuts_for_dca_point(state, cfg, res))
    return pool, ub_candidates


def _random_start(inst: MblpInstance, rng: np.random.Generator) -> Point:
    x = rng.uniform(0.0, 1.0, size=inst.n)
    y = rng.uniform(0.0, 1.0, size=inst.q) * inst.ybar if inst.q else np.zeros(0)
    return Point(x, y)


def parallel_iteration(
    state: PolyState,
    cfg: SolverConfig,
    u0: Point,
    incumbent: float = math.inf,
) -> tuple[list[Cut], list[tuple[float, Point]]]:
    """One cutting round fanned out over cfg.workers threads.

    Worker 1 searches from the relaxation vertex, the rest from seeded
    random points in the box; lift-and-project tasks are distributed
    one per (source point, index).  Merge order is fixed by (worker,
    task) so the result is deterministic for a given seed; a failed
    worker only drops its own contribution.
    """
    if cfg.workers < 2:
        raise ValueError("parallel iteration needs at least two workers")
    inst = state.base
    k = state.iteration

    def dca_task(worker: int):
        if worker == 0:
            start = u0
        else:
            rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, k, worker)))
            start = _random_start(inst, rng)
        return dca.dca_solve(
            state, cfg.t, start,
            eps1=cfg.dca_eps1, eps2=cfg.dca_eps2, max_iter=cfg.dca_max_iter,
        )

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool_exec:
        results: list[dca.DcaResult | None] = []
        if cfg.algo != "lapcut":
            for worker, fut in enumerate(
                [pool_exec.submit(dca_task, w) for w in range(cfg.workers)]
            ):
                try:
                    results.append(fut.result())
                except Exception:
                    log.warning("worker %d local search failed; dropped", worker, exc_info=True)
                    results.append(None)

        # assemble lift-and-project tasks: relaxation vertex first, then
        # each worker's point per the variant's recipe
        lap_sources: list[Point] = [u0]
        entries: list[tuple[list[Cut], int | None]] = []  # per result, worker order
        ub_candidates: list[tuple[float, Point]] = []
        for res in results:
            if res is None:
                continue
            if res.feasible:
                ub_candidates.append((res.plain_value, res.point))
                entries.append(([cutgen.dc_cut_type1(res.point, iteration=k)], None))
                continue
            dc2 = cutgen.dc_cut_type2(res.point, iteration=k)
            if cfg.algo == "dccut-v1":
                lap_sources.append(res.point)
                entries.append(([dc2] if dc2 is not None else [], len(lap_sources) - 1))
            elif dc2 is not None:
                entries.append(([dc2], None))
            else:
                lap_sources.append(res.point)
                entries.append(([], len(lap_sources) - 1))

        lap_tasks = [
            (si, src, j)
            for si, src in enumerate(lap_sources)
            for j in cutgen.select_fractional_indices(src, cfg.nlap)
        ]

        def lap_task(task):
            _, src, j = task
            return cutgen.lap_cut(state, src, j)

        lap_results: list[Cut | None] = []
        for task, fut in zip(lap_tasks, [pool_exec.submit(lap_task, tk) for tk in lap_tasks]):
            try:
                lap_results.append(fut.result())
            except Exception:
                log.warning("cut task for index %d failed; dropped", task[2], exc_info=True)
                lap_results.append(None)

    lap_by_source: dict[int, list[Cut]] = {}
    for (si, _, _), cut in zip(lap_tasks, lap_results):
        if cut is not None:
            lap_by_source.setdefault(si, []).append(cut)

    merged: list[Cut] = list(lap_by_source.get(0, []))
    for cuts, si in entries:
        merged.extend(cuts)
        if si is not None:
            merged.extend(lap_by_source.get(si, []))
    ub_candidates.sort(key=lambda vc: vc[0])
    return merged, ub_candidates


def _assert_dc_cuts_unique(cuts: tuple, tol: float = 1e-9):
    dc = [c for c in cuts if c.kind in ("dc1", "dc2")]
    for i in range(len(dc)):
        for j in range(i + 1, len(dc)):
            same = (
                abs(dc[i].rhs - dc[j].rhs) <= tol
                and float(np.abs(dc[i].coeffs - dc[j].coeffs).max()) <= tol
            )
            if same:
                raise AssertionError("redundant DC cut entered the pool")


def dccut_solve(inst: MblpInstance, cfg: SolverConfig | None = None) -> SolveReport:
    """Run the cutting-plane loop to (eps-)optimality.

    Returns status `optimal` when a relaxation vertex is feasible or the
    polytope empties with an incumbent in hand, `eps-optimal` when the
    bound gap dips below cfg.eps, `infeasible` when the root relaxation
    (or the whole sweep) proves there is no feasible point, and
    `limit-reached` on the time or iteration budget.
    """
    cfg = cfg or SolverConfig()
    t_start = time.perf_counter()
    state = PolyState(inst)
    ub, lb = math.inf, -math.inf
    u_opt: Point | None = None
    f0: float | None = None
    trace: list[TraceRow] = []
    status: str | None = None

    def out_of_budget() -> str | None:
        if cfg.time_limit is not None and time.perf_counter() - t_start >= cfg.time_limit:
            return "limit-reached"
        if cfg.max_iterations is not None and state.iteration >= cfg.max_iterations:
            return "limit-reached"
        return None

    while (math.inf if math.isinf(ub) or math.isinf(lb) else ub - lb) >= cfg.eps:
        status = out_of_budget()
        if status:
            break
        k = state.iteration
        out = solve_lp(dca.lp_over_state(state, inst.cost_vector()))
        if out.status == "infeasible":
            if k == 0 or u_opt is None:
                status = "infeasible"
            else:
                status = "optimal"  # polytope emptied, incumbent is exact
            break
        if out.status != "optimal":
            raise RuntimeError(f"relaxation came back {out.status} at iteration {k}")
        u0 = Point.from_vector(out.solution, inst.n)
        f_u0 = evaluate_f(inst, u0)
        if f0 is None:
            f0 = f_u0
        if f_u0 > lb:
            lb = f_u0

        if is_in_S(state, u0):
            if f_u0 < ub:
                ub, u_opt = f_u0, u0
            trace.append(TraceRow(k, lb, ub, 0))
            status = "optimal"
            break

        if cfg.workers == 1:
            pool, ub_candidates = _serial_iteration(state, cfg, u0)
        else:
            pool, ub_candidates = parallel_iteration(state, cfg, u0, incumbent=ub)
        for val, pt in ub_candidates:
            if val < ub:
                ub, u_opt = val, pt

        pool = pool_dedupe(pool)
        pool = [c for c in pool if not _duplicates_existing(c, state.cuts)]
        if not pool:
            # separation stalled (typically a vertex with fractionality
            # below the lift-and-project floor): try its rounding as an
            # incumbent before giving up
            cand = _rounded_incumbent(inst, u0)
            if cand is not None and cand[0] < ub:
                ub, u_opt = cand
            trace.append(TraceRow(k, lb, ub, 0))
            if ub - lb < cfg.eps:
                status = "eps-optimal"
            else:
                log.warning("no separating cut found at iteration %d; stopping", k)
                status = "limit-reached"
            break
        trace.append(TraceRow(k, lb, ub, len(pool)))
        state = state.with_cuts(pool)
        _assert_dc_cuts_unique(state.cuts)
    else:
        status = "eps-optimal"

    if u_opt is not None and not is_in_S(PolyState(inst), u_opt):
        raise RuntimeError("incumbent failed re-validation against the original instance")

    clgap = None
    if cfg.fbest is not None and f0 is not None:
        clgap = compute_clgap(lb, f0, cfg.fbest)
    kinds = [c.kind for c in state.cuts]
    return SolveReport(
        status=status,
        ub=ub,
        lb=lb,
        u_opt=u_opt,
        gap=compute_gap(ub, lb),
        clgap=clgap,
        iterations=len(trace),
        cut_dc1=kinds.count("dc1"),
        cut_dc2=kinds.count("dc2"),
        cut_lap=kinds.count("lap"),
        wall_time=time.perf_counter() - t_start,
        trace=tuple(trace),
        cuts=state.cuts,
    )


def _rounded_incumbent(inst: MblpInstance, u0: Point) -> tuple[float, Point] | None:
    """Round the x-part of u0 to binary and complete it feasibly against
    the original instance; None when the rounding is infeasible."""
    x = np.round(u0.x)
    if inst.q == 0:
        pt = Point(x, u0.y)
    else:
        out = solve_lp(
            LinearProgram(
                objective=inst.d,
                rows=inst.B,
                rhs=inst.b - inst.A @ x,
                lower=np.zeros(inst.q),
                upper=inst.ybar,
            )
        )
        if out.status != "optimal":
            return None
        pt = Point(x, out.solution)
    if not is_in_S(PolyState(inst), pt):
        return None
    return evaluate_f(inst, pt), pt


def _duplicates_existing(cut: Cut, existing: tuple, tol: float = 1e-9) -> bool:
    """Drop a new cut only when an existing one matches it exactly and is
    at least as tight (append-only pools cannot replace in place)."""
    for old in existing:
        if (
            old.coeffs.shape == cut.coeffs.shape
            and float(np.abs(old.coeffs - cut.coeffs).max()) <= tol
            and old.rhs >= cut.rhs - tol
        ):
            return True
    return False
