import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgesched.ingest import GridSpec, ingest
from edgesched.instances import line_topology, random_instance, t3, zero_load
from edgesched.lp import EQ, LE
from edgesched.milp import build_model, solve
from edgesched.model import (
    InvalidInstanceError,
    Link,
    NetworkTopology,
    Regime,
    ResourceProfile,
    ScenarioInstance,
    evaluate_objective,
)
from edgesched.oracle import enumerate_optimum
from edgesched.partition import classify


def test_t3_model_shape():
    inst = t3()
    model = build_model(inst, classify(inst))
    lp = model.lp
    assert len(model.routes) == 3 and model.offload == (1,)
    assert lp.n_vars == 4
    assert list(lp.senses) == [EQ, EQ, EQ, LE, EQ]
    assert list(lp.rhs) == [4, 2, 4, 7, 3]
    assert lp.A[3, 3] == -1.0  # inflow cap row sees -zeta
    assert model.constant == pytest.approx(1.2)
    assert lp.integer == frozenset(range(4))


def test_sksw_toy_has_no_offload_column():
    inst = ScenarioInstance(line_topology([1.0]), ResourceProfile(10, 5, 0.3, 0.0, 10.0),
                            [2, 2], [0.0, 0.0], [1, 1])
    d = classify(inst)
    assert d.regime is Regime.SKSW
    model = build_model(inst, d)
    assert model.lp.n_vars == 4 and model.offload == ()


def test_descriptor_mismatch_is_rejected():
    with pytest.raises(ValueError):
        build_model(t3(), classify(t3(K=40, W=3)))
    with pytest.raises(ValueError, match="regime"):
        build_model(t3(K=20), classify(t3()))


def test_grid_scenario_ikiw_dimensions(city_orders):
    inst, _ = ingest(city_orders, GridSpec(), 40, ResourceProfile(1, 1, 0.3, 0.1, 0.0), seed=0)
    top = int(inst.theta.max())
    # one AP over the communication budget and servers too small for the load
    inst = inst.with_profile(W=top - 1, K=max(10, int(0.3 * inst.theta.sum() / 40)))
    d = classify(inst)
    assert d.regime is Regime.IKIW
    model = build_model(inst, d)
    assert len(model.routes) == 120 * 40
    assert len(model.offload) == 40
    assert model.lp.n_vars == 120 * 40 + 40


def test_solve_zero_load():
    rep = solve(zero_load(3))
    assert rep.objective == 0.0 and rep.regime is Regime.SKSW


def test_solve_t3():
    rep = solve(t3())
    assert rep.regime is Regime.IKSW
    assert rep.objective == pytest.approx(69.2, abs=1e-9)
    assert rep.cloud_offload == 3
    assert rep.nodes == 1
    assert rep.iterations == rep.nodes


def test_solve_rejects_invalid_instance():
    inst = ScenarioInstance(line_topology([1.0]), ResourceProfile(10, 10, 0.3, 0.5, 1.0),
                            [8, 0], [0.0, 0.0], [1, 0])
    with pytest.raises(InvalidInstanceError) as err:
        solve(inst)
    assert err.value.violations


def test_offloaded_requests_pay_route_and_cloud():
    # all demand sits at AP 1, the only server is at AP 2; cap 1, so 2 go to the cloud
    inst = ScenarioInstance(line_topology([2.0]), ResourceProfile(2, 5, 0.5, 0.0, 7.0),
                            [3, 0], [0.0, 0.0], [0, 1])
    rep = solve(inst)
    assert rep.objective == pytest.approx(3 * 2.0 + 2 * 7.0)


def _case(seed, n_range=(2, 7), m_max=3):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(*n_range))
    return random_instance(rng, n, int(rng.integers(1, min(m_max, n) + 1)), max_public_demand=12)


@given(st.integers(0, 10**6))
def test_matches_enumeration(seed):
    inst = _case(seed)
    assert solve(inst).objective == pytest.approx(enumerate_optimum(inst)[0], abs=1e-9)


@given(st.integers(0, 10**6), st.sampled_from([0.5, 2.0, 3.7]))
def test_delay_scaling(seed, c):
    inst = _case(seed)
    topo = inst.topology
    scaled_topo = NetworkTopology.from_links(topo.aps, [Link(l.a, l.b, c * l.length) for l in topo.links])
    scaled = ScenarioInstance(scaled_topo, inst.profile.replace(lam=c * inst.profile.lam),
                              inst.theta, c * inst.pi, inst.placement)
    base, big = solve(inst), solve(scaled)
    assert big.objective == pytest.approx(c * base.objective, rel=1e-9, abs=1e-9)
    # the original routing stays optimal after scaling (argmin up to ties)
    assert evaluate_objective(scaled, base.solution) == pytest.approx(big.objective, rel=1e-9, abs=1e-9)


@given(st.integers(0, 10**6))
def test_k_monotone_small(seed):
    inst = _case(seed)
    K0 = inst.profile.K
    values = [enumerate_optimum(inst.with_profile(K=K0 + dk))[0] for dk in (0, 1, 3, 7)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_solve_is_deterministic():
    inst = _case(11, n_range=(10, 16), m_max=5)
    a, b = solve(inst), solve(inst)
    assert a.objective == b.objective
    assert np.array_equal(a.solution.y, b.solution.y)
    assert (a.nodes, a.pivots, a.regime) == (b.nodes, b.pivots, b.regime)


def test_bland_pricing_reaches_same_optimum():
    inst = _case(5, n_range=(8, 12), m_max=4)
    assert solve(inst, pricing="bland").objective == pytest.approx(solve(inst).objective, abs=1e-9)
