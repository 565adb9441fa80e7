import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgesched.bnb import branch_and_bound
from edgesched.instances import t3
from edgesched.lp import GE, LE, LinearProgram, solve_lp
from edgesched.milp import build_model
from edgesched.partition import classify


def test_integral_root_takes_one_node():
    lp = LinearProgram.build([1.0, 2.0], [({0: 1, 1: 1}, GE, 3)], integer=[0, 1])
    res = branch_and_bound(lp)
    assert res.nodes == 1
    assert res.objective == pytest.approx(solve_lp(lp.relaxed()).objective)


def test_t3_at_root():
    inst = t3()
    res = branch_and_bound(build_model(inst, classify(inst)).lp)
    assert res.objective == pytest.approx(68.0, abs=1e-9)
    assert res.nodes == 1


def test_fractional_knapsack_needs_branching():
    # max 5a + 4b  s.t.  6a + 4b <= 9, a, b in {0, 1, 2}
    lp = LinearProgram.build([-5.0, -4.0], [({0: 6, 1: 4}, LE, 9)], upper=[2, 2], integer=[0, 1])
    res = branch_and_bound(lp)
    # root relaxation is b=2, a=1/6
    assert res.objective == pytest.approx(-8.0)
    assert res.nodes > 1
    np.testing.assert_array_equal(res.x, [0.0, 2.0])


def test_integer_infeasible():
    # 2x = 1 has no integer solution
    lp = LinearProgram.build([0.0], [({0: 2}, GE, 1), ({0: 2}, LE, 1)], upper=[5], integer=[0])
    res = branch_and_bound(lp)
    assert res.status == "infeasible"


def test_node_budget():
    lp = LinearProgram.build([-5.0, -4.0], [({0: 6, 1: 4}, LE, 9)], upper=[2, 2], integer=[0, 1])
    with pytest.raises(RuntimeError, match="nodes"):
        branch_and_bound(lp, max_nodes=1)


@given(st.integers(0, 10**6))
def test_matches_enumeration_of_small_boxes(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    A = rng.integers(-3, 5, (m, n)).astype(float)
    b = rng.integers(0, 12, m).astype(float)
    c = rng.integers(-5, 6, n).astype(float)
    ub = rng.integers(0, 4, n)
    lp = LinearProgram.build(c, [({j: A[i, j] for j in range(n)}, LE, b[i]) for i in range(m)],
                             upper=ub, integer=range(n))
    best = None
    for x in itertools.product(*(range(u + 1) for u in ub)):
        x = np.array(x, dtype=float)
        if np.all(A @ x <= b + 1e-9):
            val = float(c @ x)
            best = val if best is None else min(best, val)
    res = branch_and_bound(lp)
    if best is None:
        assert res.status == "infeasible"
    else:
        assert res.objective == pytest.approx(best, abs=1e-9)
