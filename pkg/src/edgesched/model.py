"""Domain types for hybrid edge request scheduling, plus the delay objective.

Everything here is immutable once built. Arrays handed out by the types are
marked read-only so instances can be shared freely between threads/processes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

# floors of products like 0.1 * 30 must not land one below the intended integer
FLOOR_EPS = 1e-9
OBJECTIVE_TOL = 1e-9


def ifloor(value: float) -> int:
    return int(math.floor(value + FLOOR_EPS))


def _frozen(arr: Any, dtype: Any) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


class TopologyError(ValueError):
    pass


class InvalidInstanceError(ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid instance: " + "; ".join(self.violations))


class InvalidSolutionError(ValueError):
    pass


class ScenarioFormatError(ValueError):
    pass


class Regime(str, Enum):
    SKSW = "SKSW"
    IKSW = "IKSW"
    SKIW = "SKIW"
    IKIW = "IKIW"


@dataclass(frozen=True)
class AccessPoint:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    length: float


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    aps: tuple[AccessPoint, ...]
    links: tuple[Link, ...]
    delay_matrix: np.ndarray

    @classmethod
    def from_links(cls, aps: Iterable[AccessPoint], links: Iterable[Link]) -> NetworkTopology:
        aps = tuple(aps)
        links = tuple(links)
        ids = [ap.id for ap in aps]
        if ids != list(range(1, len(aps) + 1)):
            raise TopologyError(f"AP ids must be 1..{len(aps)} in order, got {ids[:10]}")
        for link in links:
            for end in (link.a, link.b):
                if not 1 <= end <= len(aps):
                    raise TopologyError(f"link ({link.a}, {link.b}) references unknown AP {end}")
            if not (link.length >= 0 and math.isfinite(link.length)):
                raise TopologyError(f"link ({link.a}, {link.b}) has invalid length {link.length}")
        delays = _all_pairs(len(aps), links)
        return cls(aps, links, _frozen(delays, float))

    @property
    def n(self) -> int:
        return len(self.aps)


def _all_pairs(n: int, links: Sequence[Link]) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0))
    # parallel links: keep the shortest one
    best: dict[tuple[int, int], float] = {}
    for link in links:
        if link.a == link.b:
            continue
        key = (min(link.a, link.b) - 1, max(link.a, link.b) - 1)
        best[key] = min(best.get(key, math.inf), float(link.length))
    rows = [k[0] for k in best]
    cols = [k[1] for k in best]
    # csgraph treats explicit zeros as missing edges; a tiny stand-in keeps
    # connectivity and is rounded back out below
    vals = [v if v > 0 else 1e-300 for v in best.values()]
    graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=False)
    if n_comp > 1:
        other = int(np.flatnonzero(labels != labels[0])[0])
        raise TopologyError(f"topology is disconnected: AP 1 cannot reach AP {other + 1}")
    dist = shortest_path(graph, method="D", directed=False)
    dist[dist < 1e-200] = 0.0
    np.fill_diagonal(dist, 0.0)
    return np.minimum(dist, dist.T)


def shortest_path_delays(topology: NetworkTopology) -> np.ndarray:
    """All-pairs minimum path delay over the topology's links."""
    return _all_pairs(topology.n, topology.links)


@dataclass(frozen=True)
class ResourceProfile:
    K: float
    W: float
    alpha: float
    beta: float
    lam: float

    def __post_init__(self) -> None:
        if not self.K > 0 or not self.W > 0:
            raise ValueError(f"capacities must be positive (K={self.K}, W={self.W})")
        if not 0 <= self.alpha <= 1 or not 0 <= self.beta <= 1:
            raise ValueError(f"alpha/beta must lie in [0, 1] (alpha={self.alpha}, beta={self.beta})")
        if not self.lam >= 0:
            raise ValueError(f"cloud delay must be nonnegative, got {self.lam}")

    @property
    def private_capacity(self) -> int:
        return ifloor(self.alpha * self.K)

    @property
    def public_capacity(self) -> int:
        return ifloor((1 - self.alpha) * self.K)

    @property
    def comm_capacity(self) -> int:
        return ifloor(self.W)

    def replace(self, **changes: float) -> ResourceProfile:
        fields = {"K": self.K, "W": self.W, "alpha": self.alpha, "beta": self.beta, "lam": self.lam}
        fields.update(changes)
        return ResourceProfile(**fields)


@dataclass(frozen=True, eq=False)
class ScenarioInstance:
    topology: NetworkTopology
    profile: ResourceProfile
    theta: np.ndarray
    pi: np.ndarray
    placement: np.ndarray

    def __post_init__(self) -> None:
        n = self.topology.n
        object.__setattr__(self, "theta", _frozen(self.theta, np.int64))
        object.__setattr__(self, "pi", _frozen(self.pi, float))
        object.__setattr__(self, "placement", _frozen(self.placement, np.int64))
        for name in ("theta", "pi", "placement"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have length {n}")

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def m(self) -> int:
        return int(self.placement.sum())

    @property
    def servers(self) -> np.ndarray:
        """0-based AP indices hosting a hybrid edge server, ascending."""
        return np.flatnonzero(self.placement == 1)

    @property
    def delays(self) -> np.ndarray:
        return self.topology.delay_matrix

    def private_demand(self) -> np.ndarray:
        """floor(beta * theta_i) for every AP."""
        return np.array([ifloor(self.profile.beta * t) for t in self.theta], dtype=np.int64)

    def with_profile(self, **changes: float) -> ScenarioInstance:
        return ScenarioInstance(self.topology, self.profile.replace(**changes),
                                self.theta, self.pi, self.placement)


@dataclass(frozen=True, eq=False)
class ScheduleSolution:
    y: np.ndarray  # (n, n) requests routed from AP i to the server at AP j
    zeta: np.ndarray  # (n,) cloud redirections, nonzero only at server APs
    chi: np.ndarray
    blocked: np.ndarray
    objective: float

    @property
    def cloud_offload(self) -> int:
        return int(self.zeta.sum())


@dataclass(frozen=True, eq=False)
class SolveReport:
    regime: Regime
    solution: ScheduleSolution
    nodes: int
    pivots: int
    wall_time: float
    private_service_rate: float
    public_service_rate: float
    cloud_offload: int
    blocked: int
    pu: int = 0
    total_public_capacity: int = 0

    @property
    def objective(self) -> float:
        return self.solution.objective

    @property
    def iterations(self) -> int:
        return self.nodes


def validate_instance(instance: ScenarioInstance, m: int | None = None) -> list[str]:
    """Collect every violated instance invariant; an empty list means valid.

    ``m`` is the declared server count. When omitted the placement sum is
    taken as the declaration, so only the per-AP checks can fail.
    """
    out: list[str] = []
    topo = instance.topology
    n = topo.n
    prof = instance.profile

    ids = [ap.id for ap in topo.aps]
    if ids != list(range(1, n + 1)):
        out.append(f"AP ids are not 1..{n} in order")
    xi = np.asarray(topo.delay_matrix)
    if xi.shape != (n, n):
        out.append(f"delay matrix has shape {xi.shape}, expected {(n, n)}")
    else:
        if not np.allclose(xi, xi.T, rtol=0, atol=1e-9):
            out.append("delay matrix is not symmetric")
        if np.any(np.diag(xi) != 0):
            out.append("delay matrix has a nonzero diagonal")
        try:
            ref = shortest_path_delays(topo)
        except TopologyError as exc:
            out.append(str(exc))
        else:
            bad = np.argwhere(np.abs(ref - xi) > 1e-9)
            if len(bad):
                i, j = bad[0]
                out.append(f"delay[{i + 1}][{j + 1}]={xi[i, j]} differs from shortest path {ref[i, j]}")

    if np.any(instance.theta < 0):
        i = int(np.flatnonzero(instance.theta < 0)[0])
        out.append(f"AP {i + 1}: negative request count {instance.theta[i]}")
    if np.any(instance.pi < 0) or not np.all(np.isfinite(instance.pi)):
        i = int(np.flatnonzero(~(instance.pi >= 0))[0])
        out.append(f"AP {i + 1}: invalid local delay {instance.pi[i]}")
    if not np.all(np.isin(instance.placement, (0, 1))):
        i = int(np.flatnonzero(~np.isin(instance.placement, (0, 1)))[0])
        out.append(f"AP {i + 1}: placement flag {instance.placement[i]} is not 0/1")

    declared = instance.m if m is None else m
    if instance.m != declared:
        out.append(f"placement sum {instance.m} != m={declared}")
    if instance.m == 0 and instance.theta.sum() > 0:
        out.append("no hybrid edge server placed but requests are present")

    cap = prof.private_capacity
    for i in instance.servers:
        need = ifloor(prof.beta * instance.theta[i])
        if need > cap:
            out.append(f"AP {i + 1}: private demand floor(beta*theta)={need} exceeds "
                       f"private capacity floor(alpha*K)={cap}")
    return out


def check_solution(instance: ScenarioInstance, solution: ScheduleSolution) -> list[str]:
    """Structural checks of a schedule against the instance. Returns violations."""
    n = instance.n
    out: list[str] = []
    y, zeta = np.asarray(solution.y), np.asarray(solution.zeta)
    if y.shape != (n, n) or zeta.shape != (n,):
        return [f"shape mismatch: y{y.shape}, zeta{zeta.shape} for n={n}"]
    if np.any(y < 0) or np.any(zeta < 0):
        out.append("negative routing or offload entry")
    if np.any(y != np.round(y)) or np.any(zeta != np.round(zeta)):
        out.append("non-integral routing or offload entry")
    no_server = instance.placement == 0
    if np.any(y[:, no_server] > 0):
        j = int(np.flatnonzero(no_server & (y.sum(axis=0) > 0))[0])
        out.append(f"requests routed to AP {j + 1} which hosts no server")

    theta = instance.theta
    W = instance.profile.comm_capacity
    chi = np.minimum(theta, W)
    if not np.array_equal(solution.chi, chi):
        out.append("chi differs from min(theta, W)")
    if not np.array_equal(solution.blocked, theta - chi):
        out.append("blocked differs from theta - chi")

    beta = instance.profile.beta
    for i in range(n):
        if instance.placement[i] == 1:
            want = max(0, ifloor(chi[i] - beta * theta[i]))
        else:
            want = int(chi[i])
        got = y[i].sum()
        if got != want:
            out.append(f"AP {i + 1}: dispatches {got} requests, expected {want}")

    cap = instance.profile.public_capacity
    inflow = y.sum(axis=0)
    expect = np.where(instance.placement == 1, np.maximum(0, inflow - cap), 0)
    if not np.array_equal(zeta, expect):
        j = int(np.flatnonzero(zeta != expect)[0])
        out.append(f"AP {j + 1}: zeta={zeta[j]} but max(0, inflow - cap)={expect[j]}")
    return out


def evaluate_objective(instance: ScenarioInstance, solution: ScheduleSolution) -> float:
    """Total delay: cloud redirection + local access + inter-AP routing."""
    problems = check_solution(instance, solution)
    if problems:
        raise InvalidSolutionError("; ".join(problems))
    lam = instance.profile.lam
    y = np.asarray(solution.y, dtype=float)
    terms = [lam * float(z) for z in solution.zeta]
    terms += [float(p) * float(c) for p, c in zip(instance.pi, solution.chi)]
    mask = y > 0
    terms += list((instance.delays[mask] * y[mask]).tolist())
    return math.fsum(terms)


def private_service_rate(instance: ScenarioInstance) -> float:
    """Share of private requests at server APs that fit the private partition.

    Private requests at APs without a server travel with the public flow and
    are counted on the public side. Defined for instances that fail the
    private-capacity check too, which is what makes it useful in sweeps.
    """
    servers = instance.servers
    demand = instance.private_demand()[servers]
    chi = np.minimum(instance.theta[servers], instance.profile.comm_capacity)
    total = int(demand.sum())
    if total == 0:
        return 1.0
    served = np.minimum(np.minimum(demand, instance.profile.private_capacity), chi)
    return float(served.sum()) / total


def service_rates(instance: ScenarioInstance, solution: ScheduleSolution) -> tuple[float, float]:
    """(private, public) fraction of requests processed on edge servers in the window."""
    private_total = int(instance.private_demand()[instance.servers].sum())
    public_total = int(instance.theta.sum()) - private_total
    edge_public = int(solution.y.sum()) - solution.cloud_offload
    public = 1.0 if public_total == 0 else edge_public / public_total
    return private_service_rate(instance), public


# --- scenario files --------------------------------------------------------

_TOP_KEYS = {"aps", "links", "profile", "theta", "pi", "placement"}
_PROFILE_KEYS = {"K", "W", "alpha", "beta", "lambda"}


def _exact_keys(obj: Any, keys: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    extra = set(obj) - keys
    missing = keys - set(obj)
    if extra:
        raise ScenarioFormatError(f"{where}: unknown keys {sorted(extra)}")
    if missing:
        raise ScenarioFormatError(f"{where}: missing keys {sorted(missing)}")


def scenario_from_dict(doc: dict) -> ScenarioInstance:
    _exact_keys(doc, _TOP_KEYS, "scenario")
    try:
        aps = []
        for k, rec in enumerate(doc["aps"]):
            _exact_keys(rec, {"id", "x", "y"}, f"aps[{k}]")
            aps.append(AccessPoint(int(rec["id"]), float(rec["x"]), float(rec["y"])))
        links = []
        for k, rec in enumerate(doc["links"]):
            _exact_keys(rec, {"a", "b", "length"}, f"links[{k}]")
            links.append(Link(int(rec["a"]), int(rec["b"]), float(rec["length"])))
        prof = doc["profile"]
        _exact_keys(prof, _PROFILE_KEYS, "profile")
        profile = ResourceProfile(float(prof["K"]), float(prof["W"]), float(prof["alpha"]),
                                  float(prof["beta"]), float(prof["lambda"]))
    except (TypeError, KeyError) as exc:
        raise ScenarioFormatError(f"malformed scenario: {exc}") from exc
    topology = NetworkTopology.from_links(aps, links)
    theta = doc["theta"]
    if any(int(t) != t for t in theta):
        raise ScenarioFormatError("theta entries must be integers")
    return ScenarioInstance(topology, profile, [int(t) for t in theta],
                            [float(p) for p in doc["pi"]], [int(x) for x in doc["placement"]])


def scenario_to_dict(instance: ScenarioInstance) -> dict:
    p = instance.profile
    return {
        "aps": [{"id": ap.id, "x": ap.x, "y": ap.y} for ap in instance.topology.aps],
        "links": [{"a": l.a, "b": l.b, "length": l.length} for l in instance.topology.links],
        "profile": {"K": float(p.K), "W": float(p.W), "alpha": float(p.alpha),
                    "beta": float(p.beta), "lambda": float(p.lam)},
        "theta": [int(t) for t in instance.theta],
        "pi": [float(v) for v in instance.pi],
        "placement": [int(x) for x in instance.placement],
    }


def dumps_scenario(instance: ScenarioInstance) -> str:
    return json.dumps(scenario_to_dict(instance), indent=1) + "\n"


def load_scenario(path: str | Path) -> ScenarioInstance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def save_scenario(instance: ScenarioInstance, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(instance))
