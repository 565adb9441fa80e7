"""Linear programs in row form and a two-phase revised primal simplex.

The solver keeps a sparse LU of the basis plus eta updates, prices
with the most negative reduced cost, and falls back to Bland's smallest-index
rule once a run of degenerate pivots suggests stalling. Bland's rule also
breaks ties in the ratio test, so the method cannot cycle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

LE, EQ, GE = "<=", "=", ">="

OPT_TOL = 1e-9
FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_STREAK = 1000
REFACTOR_EVERY = 64


class UnboundedError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """minimize c @ x  s.t.  A x (senses) rhs,  lower <= x <= upper."""

    c: np.ndarray
    A: sparse.csr_matrix
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integer: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        n = len(self.c)
        if self.A.shape != (len(self.senses), n) or len(self.rhs) != len(self.senses):
            raise ValueError("constraint dimensions do not match")
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bound vectors must match the variable count")
        if any(s not in (LE, EQ, GE) for s in self.senses):
            raise ValueError(f"unknown comparator in {set(self.senses)}")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.rhs))
                and np.all(np.isfinite(self.A.data))):
            raise ValueError("objective, coefficients and right-hand sides must be finite")
        if not np.all(np.isfinite(self.lower)):
            raise ValueError("lower bounds must be finite")
        if any(not 0 <= j < n for j in self.integer):
            raise ValueError("integer index out of range")

    @classmethod
    def build(
        cls,
        c: Sequence[float],
        rows: Iterable[tuple[Mapping[int, float], str, float]],
        lower: Sequence[float] | None = None,
        upper: Sequence[float] | None = None,
        integer: Iterable[int] = (),
    ) -> LinearProgram:
        n = len(c)
        data, ri, ci, senses, rhs = [], [], [], [], []
        for r, (coeffs, sense, b) in enumerate(rows):
            for j, v in coeffs.items():
                if v != 0:
                    data.append(float(v))
                    ri.append(r)
                    ci.append(j)
            senses.append(sense)
            rhs.append(float(b))
        A = sparse.csr_matrix((data, (ri, ci)), shape=(len(senses), n))
        lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
        up = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
        return cls(np.asarray(c, dtype=float), A, tuple(senses), np.asarray(rhs, dtype=float),
                   lo, up, frozenset(int(j) for j in integer))

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def with_bounds(self, lower: np.ndarray, upper: np.ndarray) -> LinearProgram:
        return replace(self, lower=lower, upper=upper)

    def relaxed(self) -> LinearProgram:
        return replace(self, integer=frozenset())

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of ``x``."""
        ax = self.A @ x
        worst = 0.0
        for v, s, b in zip(ax, self.senses, self.rhs):
            if s == LE:
                worst = max(worst, v - b)
            elif s == GE:
                worst = max(worst, b - v)
            else:
                worst = max(worst, abs(v - b))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        return worst


@dataclass(frozen=True, eq=False)
class LPResult:
    status: str  # "optimal" | "infeasible"
    objective: float
    x: np.ndarray | None
    pivots: int


class _Tableau:
    """Equality-form LP  min c@x, A x = b, x >= 0  with b >= 0.

    The basis inverse is a sparse LU of the last refactored basis followed by
    a product of eta matrices, one per pivot since then.
    """

    def __init__(self, A: sparse.csc_matrix, b: np.ndarray, basis: list[int], n_struct: int):
        self.A = A
        self.At = A.T.tocsr()
        self.b = b
        self.basis = basis
        self.n_struct = n_struct  # columns >= this index are artificial
        self.rows = len(b)
        self.pivots = 0
        self.refactor()

    def column(self, j: int) -> np.ndarray:
        col = np.zeros(self.rows)
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return col

    def refactor(self) -> None:
        self.etas: list[tuple[int, np.ndarray, np.ndarray, float]] = []
        if self.rows == 0:
            self.lu = None
            self.xb = np.zeros(0)
            return
        B = self.A[:, self.basis].tocsc()
        self.lu = splu(B, permc_spec="COLAMD")
        self.xb = self.ftran(self.b)
        self.xb[np.abs(self.xb) < 1e-12] = 0.0

    def ftran(self, a: np.ndarray) -> np.ndarray:
        """B^-1 a"""
        if self.rows == 0:
            return np.zeros(0)
        z = self.lu.solve(a)
        for r, idx, vals, piv in self.etas:
            zr = z[r] / piv
            if zr != 0.0:
                z[idx] -= vals * zr
            z[r] = zr
        return z

    def btran(self, w: np.ndarray) -> np.ndarray:
        """w^T B^-1"""
        if self.rows == 0:
            return np.zeros(0)
        w = w.astype(float, copy=True)
        for r, idx, vals, piv in reversed(self.etas):
            w[r] = (w[r] - w[idx] @ vals) / piv
        return self.lu.solve(w, trans="T")

    def pivot(self, r: int, q: int, col: np.ndarray) -> None:
        step = self.xb[r] / col[r]
        self.xb -= step * col
        self.xb[r] = step
        self.xb[np.abs(self.xb) < 1e-12] = 0.0
        idx = np.flatnonzero(col)
        idx = idx[idx != r]
        self.etas.append((r, idx, col[idx], col[r]))
        self.basis[r] = q
        self.pivots += 1
        if len(self.etas) >= REFACTOR_EVERY:
            self.refactor()

    def run(self, cost: np.ndarray, enterable: np.ndarray, max_pivots: int,
            pin_artificials: bool = False, bland: bool = False,
            tiebreak: np.ndarray | None = None) -> None:
        """Primal simplex from the current (feasible) basis until optimal.

        ``tiebreak`` orders columns with equal reduced cost (phase 1 uses the
        true costs, which gives a cheap starting assignment).
        """
        streak = 0
        in_basis = np.zeros(len(cost), dtype=bool)
        while True:
            in_basis[:] = False
            in_basis[self.basis] = True
            duals = self.btran(cost[self.basis])
            reduced = cost - self.At @ duals
            candidates = enterable & ~in_basis & (reduced < -OPT_TOL)
            if not candidates.any():
                return
            idx = np.flatnonzero(candidates)
            if bland or streak >= DEGENERATE_STREAK:
                q = int(idx[0])
            else:
                rc = reduced[idx]
                if tiebreak is not None:
                    idx = idx[rc <= rc.min() + OPT_TOL]
                    q = int(idx[np.argmin(tiebreak[idx])])
                else:
                    q = int(idx[np.argmin(rc)])
            col = self.ftran(self.column(q))
            r = self._ratio_test(col, self.xb, pin_artificials)
            if r is None:
                raise UnboundedError("LP is unbounded")
            step = self.xb[r] / col[r]
            streak = streak + 1 if step <= FEAS_TOL else 0
            self.pivot(r, q, col)
            if self.pivots > max_pivots:
                raise RuntimeError(f"simplex exceeded {max_pivots} pivots")

    def _ratio_test(self, col: np.ndarray, xb: np.ndarray, pin_artificials: bool) -> int | None:
        basis = np.asarray(self.basis)
        # phase 2: a zero-valued artificial left in the basis must leave before it could move
        art = (basis >= self.n_struct) & (np.abs(col) > PIVOT_TOL)
        if pin_artificials and art.any():
            rows = np.flatnonzero(art)
            return int(rows[np.argmin(basis[rows])])
        pos = np.flatnonzero(col > PIVOT_TOL)
        if len(pos) == 0:
            return None
        ratios = np.maximum(xb[pos], 0.0) / col[pos]
        best = ratios.min()
        tied = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        return int(tied[np.argmin(basis[tied])])


def solve_lp(lp: LinearProgram, max_pivots: int | None = None, pricing: str = "dantzig") -> LPResult:
    """Solve the continuous relaxation of ``lp``.

    ``pricing="bland"`` uses the smallest-index rule for every pivot instead of
    only after a degenerate stall; slower, same optimum.
    """
    if pricing not in ("dantzig", "bland"):
        raise ValueError(f"unknown pricing rule {pricing!r}")
    bland = pricing == "bland"
    n = lp.n_vars
    lower, upper = lp.lower, lp.upper
    if np.any(lower > upper + FEAS_TOL):
        return LPResult("infeasible", math.nan, None, 0)

    # shift x = lower + s, s >= 0
    A = lp.A.tocsr()
    rhs = lp.rhs - A @ lower
    senses = list(lp.senses)
    bounded = np.flatnonzero(np.isfinite(upper))
    if len(bounded):
        extra = sparse.csr_matrix((np.ones(len(bounded)), (np.arange(len(bounded)), bounded)),
                                  shape=(len(bounded), n))
        A = sparse.vstack([A, extra], format="csr")
        rhs = np.concatenate([rhs, upper[bounded] - lower[bounded]])
        senses += [LE] * len(bounded)
    rows = len(senses)

    sign = np.where(rhs < 0, -1.0, 1.0)
    rhs = rhs * sign
    A = sparse.diags(sign) @ A if rows else A
    flipped = [s if g > 0 else {LE: GE, GE: LE, EQ: EQ}[s] for s, g in zip(senses, sign)]

    slack_rows = [r for r, s in enumerate(flipped) if s != EQ]
    slack_sign = [1.0 if flipped[r] == LE else -1.0 for r in slack_rows]
    S = sparse.csr_matrix((slack_sign, (slack_rows, range(len(slack_rows)))),
                          shape=(rows, len(slack_rows)))
    n_struct = n + len(slack_rows)
    basis = [-1] * rows
    for k, r in enumerate(slack_rows):
        if slack_sign[k] > 0:
            basis[r] = n + k
    art_rows = [r for r in range(rows) if basis[r] < 0]
    R = sparse.csr_matrix((np.ones(len(art_rows)), (art_rows, range(len(art_rows)))),
                          shape=(rows, len(art_rows)))
    for k, r in enumerate(art_rows):
        basis[r] = n_struct + k
    full = sparse.hstack([A, S, R], format="csc")
    total = full.shape[1]
    limit = max_pivots if max_pivots is not None else 50 * (rows + total) + 1000

    tab = _Tableau(full, rhs, basis, n_struct)
    if art_rows:
        phase1 = np.zeros(total)
        phase1[n_struct:] = 1.0
        struct_only = np.zeros(total, dtype=bool)
        struct_only[:n_struct] = True
        true_cost = np.zeros(total)
        true_cost[:n] = lp.c
        tab.run(phase1, struct_only, limit, bland=bland, tiebreak=true_cost)
        infeas = sum(tab.xb[r] for r in range(rows) if tab.basis[r] >= n_struct)
        if infeas > FEAS_TOL * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return LPResult("infeasible", math.nan, None, tab.pivots)
        _expel_artificials(tab)

    cost = np.zeros(total)
    cost[:n] = lp.c
    enterable = np.zeros(total, dtype=bool)
    enterable[:n_struct] = True
    tab.run(cost, enterable, limit, pin_artificials=True, bland=bland)

    tab.refactor()
    s = np.zeros(total)
    s[tab.basis] = np.maximum(tab.xb, 0.0)
    x = lower + s[:n]
    return LPResult("optimal", math.fsum((lp.c * x).tolist()), x, tab.pivots)


def _expel_artificials(tab: _Tableau) -> None:
    """Pivot zero-valued artificials out of the basis where any real column allows it."""
    for r in range(tab.rows):
        if tab.basis[r] < tab.n_struct:
            continue
        unit = np.zeros(tab.rows)
        unit[r] = 1.0
        row = tab.At[: tab.n_struct] @ tab.btran(unit)
        in_basis = set(tab.basis)
        for j in np.flatnonzero(np.abs(row) > PIVOT_TOL):
            if j not in in_basis:
                tab.pivot(r, int(j), tab.ftran(tab.column(int(j))))
                break
