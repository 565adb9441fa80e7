"""Best-first branch and bound over the simplex relaxation."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .lp import LinearProgram, solve_lp

INT_TOL = 1e-6
PRUNE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BnbResult:
    status: str  # "optimal" | "infeasible"
    objective: float
    x: np.ndarray | None
    nodes: int
    pivots: int
    wall_time: float


def _branch_variable(x: np.ndarray, integer: list[int]) -> int | None:
    """Most fractional integer variable; lowest index wins ties."""
    best, best_dist = None, INT_TOL
    for j in integer:
        frac = x[j] - math.floor(x[j])
        dist = min(frac, 1.0 - frac)
        if dist > best_dist:
            best, best_dist = j, dist
    return best


def branch_and_bound(lp: LinearProgram, max_nodes: int | None = None,
                     pricing: str = "dantzig") -> BnbResult:
    start = time.perf_counter()
    integer = sorted(lp.integer)
    relaxed = lp.relaxed()

    incumbent: np.ndarray | None = None
    best = math.inf
    nodes = pivots = 0
    seq = 0
    # (parent bound, insertion order, lower, upper)
    queue: list[tuple[float, int, np.ndarray, np.ndarray]] = [(-math.inf, seq, lp.lower, lp.upper)]

    while queue:
        bound, _, lower, upper = heapq.heappop(queue)
        if bound >= best - PRUNE_TOL:
            continue
        if max_nodes is not None and nodes >= max_nodes:
            raise RuntimeError(f"branch and bound exceeded {max_nodes} nodes")
        res = solve_lp(relaxed.with_bounds(lower, upper), pricing=pricing)
        nodes += 1
        pivots += res.pivots
        if res.status != "optimal" or res.objective >= best - PRUNE_TOL:
            continue
        j = _branch_variable(res.x, integer)
        if j is None:
            x = res.x.copy()
            x[integer] = np.round(x[integer])
            value = math.fsum((lp.c * x).tolist())
            if value < best - PRUNE_TOL and lp.violation(x) <= 1e-6:
                best, incumbent = value, x
            continue
        down_upper = upper.copy()
        down_upper[j] = math.floor(res.x[j])
        up_lower = lower.copy()
        up_lower[j] = math.ceil(res.x[j])
        for lo, up in ((lower, down_upper), (up_lower, upper)):
            seq += 1
            heapq.heappush(queue, (res.objective, seq, lo, up))

    wall = time.perf_counter() - start
    if incumbent is None:
        return BnbResult("infeasible", math.nan, None, nodes, pivots, wall)
    return BnbResult("optimal", best, incumbent, nodes, pivots, wall)
