import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgesched.instances import line_topology, random_instance, t3, zero_load
from edgesched.milp import solve
from edgesched.model import (
    AccessPoint,
    InvalidSolutionError,
    Link,
    NetworkTopology,
    ResourceProfile,
    ScenarioFormatError,
    ScenarioInstance,
    ScheduleSolution,
    TopologyError,
    check_solution,
    dumps_scenario,
    evaluate_objective,
    ifloor,
    private_service_rate,
    scenario_from_dict,
    scenario_to_dict,
    shortest_path_delays,
    validate_instance,
)

from conftest import floyd_warshall


def topo(n, links):
    return NetworkTopology.from_links([AccessPoint(i + 1, 0.0, 0.0) for i in range(n)],
                                      [Link(a, b, d) for a, b, d in links])


def t3_solution(inst):
    y = np.zeros((3, 3), dtype=int)
    y[:, 1] = [4, 2, 4]
    return ScheduleSolution(y, np.array([0, 3, 0]), np.array([4, 4, 4]), np.zeros(3, int), math.nan)


# --- validate_instance ----------------------------------------------------

def test_single_empty_ap_is_valid():
    inst = ScenarioInstance(topo(1, []), ResourceProfile(10, 5, 0.3, 0.1, 1.0), [0], [0.0], [1])
    assert validate_instance(inst, m=1) == []


def test_placement_sum_must_match_declared_m():
    inst = ScenarioInstance(topo(2, [(1, 2, 1.0)]), ResourceProfile(10, 5, 0.3, 0.1, 1.0),
                            [1, 1], [0.0, 0.0], [1, 0])
    problems = validate_instance(inst, m=2)
    assert len(problems) == 1
    assert "placement sum" in problems[0]


def test_private_capacity_violation_names_the_server():
    # floor(0.5*8) = 4 > floor(0.3*10) = 3
    inst = ScenarioInstance(line_topology([1.0]), ResourceProfile(10, 10, 0.3, 0.5, 1.0),
                            [8, 0], [0.0, 0.0], [1, 0])
    problems = validate_instance(inst)
    assert len(problems) == 1
    assert problems[0].startswith("AP 1:")


def test_no_server_with_load_is_flagged():
    inst = ScenarioInstance(line_topology([1.0]), ResourceProfile(10, 10, 0.3, 0.1, 1.0),
                            [1, 0], [0.0, 0.0], [0, 0])
    assert any("no hybrid edge server" in p for p in validate_instance(inst))


def test_tampered_delay_matrix_is_caught():
    good = t3()
    bad_delays = np.array(good.delays)
    bad_delays[0, 2] = bad_delays[2, 0] = 5.0
    topo_bad = NetworkTopology(good.topology.aps, good.topology.links, bad_delays)
    inst = ScenarioInstance(topo_bad, good.profile, good.theta, good.pi, good.placement)
    assert any("shortest path" in p for p in validate_instance(inst))


# --- shortest paths -------------------------------------------------------

def test_single_edge_delay():
    assert topo(2, [(1, 2, 5.0)]).delay_matrix[0, 1] == 5.0


def test_line_delay_sums():
    assert line_topology([1.0, 1.0]).delay_matrix[0, 2] == 2.0


def test_two_hops_beat_long_edge():
    d = topo(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 3.0)]).delay_matrix
    assert d[0, 2] == 2.0


def test_zero_length_link_keeps_connectivity():
    d = topo(3, [(1, 2, 0.0), (2, 3, 2.0)]).delay_matrix
    assert d[0, 1] == 0.0 and d[0, 2] == 2.0


def test_disconnected_topology_names_a_pair():
    with pytest.raises(TopologyError, match="AP 1 cannot reach AP 3"):
        topo(3, [(1, 2, 1.0)])


@given(st.integers(0, 10**6), st.integers(2, 9))
def test_delays_match_floyd_warshall_and_triangle_inequality(seed, n):
    from edgesched.instances import random_topology

    t = random_topology(np.random.default_rng(seed), n)
    d = shortest_path_delays(t)
    np.testing.assert_allclose(d, floyd_warshall(n, t.links), atol=1e-12)
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    for i, j, k in itertools.product(range(n), repeat=3):
        assert d[i, k] <= d[i, j] + d[j, k] + 1e-12


# --- objective ------------------------------------------------------------

def test_zero_load_objective():
    inst = zero_load(3)
    sol = ScheduleSolution(np.zeros((3, 3), int), np.zeros(3, int), np.zeros(3, int),
                           np.zeros(3, int), math.nan)
    assert evaluate_objective(inst, sol) == 0.0


def test_t3_objective_by_hand():
    inst = t3()
    assert evaluate_objective(inst, t3_solution(inst)) == pytest.approx(20 * 3 + 0.1 * 12 + 8, abs=1e-12)


def test_default_profile_matches_parameter_table():
    from edgesched.instances import DEFAULT_ALPHA, DEFAULT_BETA

    assert (DEFAULT_ALPHA, DEFAULT_BETA) == (0.3, 0.1)


def test_structural_violation_is_named():
    inst = t3()
    sol = t3_solution(inst)
    bad = ScheduleSolution(sol.y, np.array([0, 2, 0]), sol.chi, sol.blocked, math.nan)
    with pytest.raises(InvalidSolutionError, match="zeta"):
        evaluate_objective(inst, bad)
    y = np.array(sol.y)
    y[0, 0] = 1
    y[0, 1] = 3
    assert any("hosts no server" in p for p in check_solution(inst, ScheduleSolution(
        y, sol.zeta, sol.chi, sol.blocked, math.nan)))


def _random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    inst = random_instance(rng, n, int(rng.integers(1, min(3, n) + 1)))
    return inst, solve(inst).solution


@given(st.integers(0, 10**6))
def test_objective_is_pure(seed):
    inst, sol = _random_case(seed)
    first = evaluate_objective(inst, sol)
    assert evaluate_objective(inst, sol) == first
    assert first == sol.objective


@given(st.integers(0, 10**6), st.floats(0.0, 50.0))
def test_lambda_shift_adds_delta_times_offload(seed, delta):
    inst, sol = _random_case(seed)
    shifted = inst.with_profile(lam=inst.profile.lam + delta)
    gap = evaluate_objective(shifted, sol) - evaluate_objective(inst, sol)
    assert gap == pytest.approx(delta * sol.cloud_offload, rel=1e-12, abs=1e-9)


@given(st.integers(0, 10**6))
def test_accepted_solutions_conserve_flow(seed):
    inst, sol = _random_case(seed)
    assert check_solution(inst, sol) == []
    chi, theta, beta = sol.chi, inst.theta, inst.profile.beta
    # a server AP whose private share overshoots W contributes nothing, not a negative amount
    want = sum(max(0, ifloor(chi[i] - beta * theta[i])) if inst.placement[i] else int(chi[i])
               for i in range(inst.n))
    assert int(sol.y.sum()) == want


# --- service rates --------------------------------------------------------

def test_private_rate_full_and_partial():
    inst = t3()
    assert private_service_rate(inst) == 1.0
    # floor(0.5*4)=2 wanted, floor(0.1*10)=1 available
    assert private_service_rate(inst.with_profile(alpha=0.1)) == 0.5


# --- scenario files -------------------------------------------------------

def test_scenario_round_trip_is_byte_stable():
    inst = t3()
    text = dumps_scenario(inst)
    again = scenario_from_dict(json.loads(text))
    assert dumps_scenario(again) == text
    np.testing.assert_array_equal(again.delays, inst.delays)


def test_scenario_rejects_unknown_and_missing_keys():
    doc = scenario_to_dict(t3())
    with pytest.raises(ScenarioFormatError, match="unknown keys"):
        scenario_from_dict({**doc, "extra": 1})
    del doc["pi"]
    with pytest.raises(ScenarioFormatError, match="missing keys"):
        scenario_from_dict(doc)


def test_instance_arrays_are_read_only():
    inst = t3()
    with pytest.raises(ValueError):
        inst.theta[0] = 99
