"""Hand-built reference scenarios and seeded random scenario generators."""
from __future__ import annotations

import math

import numpy as np

from .model import (
    AccessPoint,
    Link,
    NetworkTopology,
    Regime,
    ResourceProfile,
    ScenarioInstance,
    ifloor,
    validate_instance,
)
from .partition import AdmissionError, classify, compute_pu, admit

# defaults from the evaluation's parameter table
DEFAULT_ALPHA = 0.3
DEFAULT_BETA = 0.1


def line_topology(lengths: list[float]) -> NetworkTopology:
    n = len(lengths) + 1
    aps = [AccessPoint(i + 1, float(i), 0.0) for i in range(n)]
    links = [Link(i + 1, i + 2, float(d)) for i, d in enumerate(lengths)]
    return NetworkTopology.from_links(aps, links)


def t3(K: float = 10, W: float = 5) -> ScenarioInstance:
    """Three APs on a unit-length line, one server in the middle.

    With the defaults: public demand [4, 2, 4] against a public capacity of 7,
    so 3 requests go to the cloud and the optimum is 20*3 + 0.1*12 + 8 = 69.2.
    """
    profile = ResourceProfile(K=K, W=W, alpha=0.3, beta=0.5, lam=20.0)
    return ScenarioInstance(line_topology([1.0, 1.0]), profile,
                            theta=[4, 4, 4], pi=[0.1, 0.1, 0.1], placement=[0, 1, 0])


def canonical(regime: Regime) -> ScenarioInstance:
    """One small hand-checked scenario per regime, all variations of ``t3``."""
    return {
        Regime.SKSW: lambda: t3(K=20),  # public cap 14 >= pu 10
        Regime.IKSW: lambda: t3(),  # pu 10 > 7
        Regime.SKIW: lambda: t3(K=40, W=3),  # chi 3 each, pu 7 <= 28
        Regime.IKIW: lambda: t3(K=8, W=3),  # pu 7 > floor(0.7*8) = 5
    }[regime]()


def zero_load(n: int = 1) -> ScenarioInstance:
    topo = line_topology([1.0] * (n - 1))
    placement = [1] + [0] * (n - 1)
    return ScenarioInstance(topo, ResourceProfile(10, 5, DEFAULT_ALPHA, DEFAULT_BETA, 1.0),
                            [0] * n, [0.0] * n, placement)


def random_topology(rng: np.random.Generator, n: int, extra_links: float = 0.3,
                    length_range: tuple[float, float] = (0.1, 2.0)) -> NetworkTopology:
    """Random spanning tree plus a fraction of extra links.

    Lengths are rounded to three decimals so delays stay on a coarse grid; the
    flow oracle's integer cost scaling is then exact.
    """
    aps = [AccessPoint(i + 1, float(rng.uniform(0, 10)), float(rng.uniform(0, 10)))
           for i in range(n)]
    lo, hi = length_range
    pairs = []
    order = rng.permutation(n)
    for k in range(1, n):
        parent = order[int(rng.integers(0, k))]
        pairs.append((int(order[k]), int(parent)))
    n_extra = int(round(extra_links * n))
    for _ in range(n_extra):
        a, b = rng.choice(n, size=2, replace=False)
        pairs.append((int(a), int(b)))
    links = [Link(a + 1, b + 1, round(float(rng.uniform(lo, hi)), 3)) for a, b in pairs]
    return NetworkTopology.from_links(aps, links)


def random_instance(
    rng: np.random.Generator,
    n: int,
    m: int,
    theta_max: int = 5,
    K_range: tuple[int, int] | None = None,
    W_range: tuple[int, int] | None = None,
    alpha: float | None = None,
    beta: float | None = None,
    lam_factor: tuple[float, float] = (1.0, 10.0),
    max_public_demand: int | None = None,
    regime: Regime | None = None,
    max_tries: int = 2000,
) -> ScenarioInstance:
    """Draw a valid instance, rejecting until every requested property holds.

    The cloud delay is at least the largest AP-to-AP delay, the same regime the
    evaluation uses (ten times the maximum), so filling a server is never
    worse than sending one of its requests to the cloud.

    Ranges left as None are chosen to make the requested regime likely, so
    rejection stays cheap even for large ``n``.
    """
    if K_range is None or W_range is None:
        auto_K, auto_W = _regime_ranges(regime, n, m, theta_max)
        K_range = K_range or auto_K
        W_range = W_range or auto_W
    for _ in range(max_tries):
        topo = random_topology(rng, n)
        xi_max = float(topo.delay_matrix.max()) if n > 1 else 0.0
        lam = round(xi_max * float(rng.uniform(*lam_factor)), 3)
        lam = max(lam, xi_max)
        a = float(rng.choice([0.1, 0.2, 0.3, 0.5, 0.7])) if alpha is None else alpha
        b = float(rng.choice([0.0, 0.1, 0.2, 0.5])) if beta is None else beta
        profile = ResourceProfile(
            K=int(rng.integers(K_range[0], K_range[1] + 1)),
            W=int(rng.integers(W_range[0], W_range[1] + 1)),
            alpha=a, beta=b, lam=lam,
        )
        theta = rng.integers(0, theta_max + 1, size=n)
        pi = np.round(rng.uniform(0, 1, size=n), 3)
        placement = np.zeros(n, dtype=int)
        placement[rng.choice(n, size=m, replace=False)] = 1
        inst = ScenarioInstance(topo, profile, theta, pi, placement)
        if validate_instance(inst):
            continue
        try:
            desc = classify(inst)
        except AdmissionError:
            continue
        if regime is not None and desc.regime is not regime:
            continue
        if max_public_demand is not None and desc.pu > max_public_demand:
            continue
        return inst
    raise RuntimeError(f"no instance satisfying the constraints after {max_tries} draws")


def _regime_ranges(regime: Regime | None, n: int, m: int,
                   theta_max: int) -> tuple[tuple[int, int], tuple[int, int]]:
    if regime is None:
        return (1, 20), (1, 8)
    # K at which an average draw just fits, assuming alpha around 0.3
    fit = max(2, math.ceil(n * theta_max / 2 / m / 0.7))
    K = (fit, 3 * fit) if regime in (Regime.SKSW, Regime.SKIW) else (1, fit)
    W = (theta_max, theta_max + 3) if regime in (Regime.SKSW, Regime.IKSW) else (1, max(1, theta_max - 1))
    return K, W


def capacity_bounds(instance: ScenarioInstance, K_limit: int = 10**7) -> dict[str, int | None]:
    """Integer K thresholds for the given alpha/beta/W.

    ``K_valid_min``: smallest K whose private partition holds every server's
    private demand. ``K_sufficient``: smallest K at which no cloud offload is
    needed (SK regimes from there on).
    """
    p = instance.profile
    need = int(instance.private_demand()[instance.servers].max(initial=0))
    chi, _ = admit(instance)
    pu = compute_pu(instance, chi)

    def first(pred) -> int | None:
        lo, hi = 1, K_limit
        if not pred(hi):
            return None
        while lo < hi:
            mid = (lo + hi) // 2
            if pred(mid):
                hi = mid
            else:
                lo = mid + 1
        return lo

    valid = first(lambda K: ifloor(p.alpha * K) >= need)
    sufficient = first(lambda K: instance.m * ifloor((1 - p.alpha) * K) >= pu)
    return {"K_valid_min": valid, "K_sufficient": sufficient, "pu": pu}
