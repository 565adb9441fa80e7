import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgesched.instances import canonical, line_topology, random_instance, t3, zero_load
from edgesched.model import Regime, ResourceProfile, ScenarioInstance
from edgesched.partition import AdmissionError, admit, admitted_split, classify, compute_pu

from conftest import regime_truth


def one_ap(theta, W, beta=0.0, K=100):
    return ScenarioInstance(line_topology([]), ResourceProfile(K, W, 0.5, beta, 1.0),
                            [theta], [0.0], [0])


def test_admit_under_capacity():
    chi, blocked = admit(one_ap(4, 5))
    assert (chi[0], blocked[0]) == (4, 0)


def test_admit_caps_at_w():
    chi, blocked = admit(one_ap(9, 5))
    assert (chi[0], blocked[0]) == (5, 4)


def test_private_requests_are_admitted_first():
    inst = one_ap(9, 5, beta=0.5)
    chi, blocked = admit(inst)
    private, public = admitted_split(inst, chi)
    assert (private[0], public[0], blocked[0]) == (4, 1, 4)


def test_private_demand_above_w_is_refused():
    with pytest.raises(AdmissionError, match="private demand exceeds communication capacity"):
        admit(one_ap(20, 5, beta=0.5))


def test_pu_examples():
    z = zero_load(4)
    assert compute_pu(z, admit(z)[0]) == 0
    inst = t3()
    assert compute_pu(inst, admit(inst)[0]) == 4 + 2 + 4


def test_classify_examples():
    assert classify(zero_load(1)).regime is Regime.SKSW
    d = classify(t3())
    assert d.regime is Regime.IKSW
    assert (d.pu, d.total_public_capacity, d.required_offload) == (10, 7, 3)
    assert classify(t3(K=40, W=3)).regime is Regime.SKIW


@pytest.mark.parametrize("regime", list(Regime))
def test_canonical_instances(regime):
    assert classify(canonical(regime)).regime is regime


def test_descriptor_serializes():
    doc = classify(t3()).to_dict()
    assert doc["regime"] == "IKSW"
    assert doc["public_demand"] == [4, 2, 4]


@given(st.integers(0, 10**6))
def test_classify_total_and_exclusive(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    inst = random_instance(rng, n, int(rng.integers(1, n + 1)), theta_max=12)
    truth = regime_truth(inst)
    assert sum(truth.values()) == 1
    assert truth[classify(inst).regime]


@given(st.integers(0, 10**6))
def test_ik_regimes_need_offload(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 6, 2, theta_max=10, K_range=(1, 8))
    d = classify(inst)
    if d.regime in (Regime.IKSW, Regime.IKIW):
        assert d.required_offload == d.pu - d.total_public_capacity > 0
    else:
        assert d.required_offload == 0


@given(st.integers(0, 10**6))
def test_pu_is_relabeling_equivariant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    inst = random_instance(rng, n, int(rng.integers(1, n + 1)), theta_max=10)
    perm = rng.permutation(n)
    shuffled = ScenarioInstance(inst.topology, inst.profile, inst.theta[perm], inst.pi[perm],
                                inst.placement[perm])
    assert compute_pu(shuffled, admit(shuffled)[0]) == compute_pu(inst, admit(inst)[0])
    chi, blocked = admit(shuffled)
    ref_chi, ref_blocked = admit(inst)
    np.testing.assert_array_equal(chi, ref_chi[perm])
    np.testing.assert_array_equal(blocked, ref_blocked[perm])
