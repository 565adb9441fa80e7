"""Reference optima computed without the LP machinery.

``enumerate_optimum`` tries every split of every AP's public demand over the
server columns, charging cloud overflow as max(0, inflow - capacity).
``mincost_flow_optimum`` solves the same routing as a min-cost flow with
successive shortest paths. Both recompute admission on their own rather than
reusing the partition module, so they check it as well.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .model import Regime, ScenarioInstance, ScheduleSolution, evaluate_objective, ifloor
from .partition import RegimeDescriptor

MAX_ENUM_DEMAND = 12
MAX_ENUM_SERVERS = 3
COST_SCALE = 10**6


class OracleSizeError(ValueError):
    pass


class FlowInfeasibleError(RuntimeError):
    pass


def _admission(instance: ScenarioInstance) -> tuple[np.ndarray, np.ndarray]:
    """(chi, public demand) recomputed from the instance alone."""
    p = instance.profile
    W = ifloor(p.W)
    chi = np.array([min(int(t), W) for t in instance.theta], dtype=np.int64)
    demand = np.array([
        max(0, ifloor(c - p.beta * t)) if x == 1 else c
        for c, t, x in zip(chi, instance.theta, instance.placement)
    ], dtype=np.int64)
    return chi, demand


def _splits(total: int, parts: int) -> np.ndarray:
    """All ways to write ``total`` as an ordered sum of ``parts`` nonnegative ints."""
    if parts == 0:
        return np.zeros((1 if total == 0 else 0, 0), dtype=np.int64)
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, row = -1, []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 2 - prev)
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(-1, parts)


def enumerate_optimum(instance: ScenarioInstance) -> tuple[float, np.ndarray]:
    """Exact optimum and one optimal routing matrix, by exhaustive search."""
    servers = [int(s) for s in np.flatnonzero(instance.placement == 1)]
    chi, demand = _admission(instance)
    if demand.sum() > MAX_ENUM_DEMAND or len(servers) > MAX_ENUM_SERVERS:
        raise OracleSizeError(f"enumeration limited to public demand <= {MAX_ENUM_DEMAND} and "
                              f"<= {MAX_ENUM_SERVERS} servers (got {demand.sum()}, {len(servers)})")
    n, m = instance.n, len(servers)
    xi = instance.topology.delay_matrix
    cap = ifloor((1 - instance.profile.alpha) * instance.profile.K)
    lam = instance.profile.lam

    # cartesian product of per-AP splits, built up one AP at a time
    choice = np.zeros((1, 0), dtype=np.int64)
    inflow = np.zeros((1, m), dtype=np.int64)
    route_cost = np.zeros(1)
    per_ap = []
    for i in range(n):
        opts = _splits(int(demand[i]), m)
        per_ap.append(opts)
        if len(opts) == 0:
            raise OracleSizeError(f"AP {i + 1} has demand but there is no server")
        k = len(opts)
        cost_i = opts @ xi[i, servers] if m else np.zeros(k)
        choice = np.hstack([np.repeat(choice, k, axis=0),
                            np.tile(np.arange(k), len(choice))[:, None]])
        inflow = np.repeat(inflow, k, axis=0) + np.tile(opts, (len(inflow), 1))
        route_cost = np.repeat(route_cost, k) + np.tile(cost_i, len(route_cost))
    total = route_cost + lam * np.maximum(inflow - cap, 0).sum(axis=1)

    best_val, best_y = math.inf, None
    # re-score near-ties exactly so vectorised rounding cannot pick the wrong one
    for idx in np.flatnonzero(total <= total.min() + 1e-6):
        y = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            y[i, servers] = per_ap[i][choice[idx, i]]
        inflow_j = y.sum(axis=0)
        zeta = np.where(instance.placement == 1, np.maximum(0, inflow_j - cap), 0)
        sol = ScheduleSolution(y, zeta, chi, instance.theta - chi, math.nan)
        val = evaluate_objective(instance, sol)
        if val < best_val:
            best_val, best_y = val, y
    return best_val, best_y


@dataclass
class Arc:
    head: int
    cap: int
    cost: int
    real_cost: float
    rev: int  # index of the paired arc in adjacency[head]
    flow: int = 0


@dataclass
class FlowNetwork:
    """Source -> APs -> servers -> (sink | cloud -> sink)."""

    n_nodes: int
    source: int
    sink: int
    adjacency: list[list[Arc]] = field(default_factory=list)
    exact: bool = True  # every cost scaled to an integer without rounding

    def __post_init__(self) -> None:
        if not self.adjacency:
            self.adjacency = [[] for _ in range(self.n_nodes)]

    def add_arc(self, tail: int, head: int, cap: int, cost: float) -> None:
        if cap < 0 or not math.isfinite(cost):
            raise ValueError(f"bad arc {tail}->{head}: cap={cap}, cost={cost}")
        scaled = cost * COST_SCALE
        icost = int(round(scaled))
        if abs(scaled - icost) > 1e-3:
            self.exact = False
        fwd = Arc(head, cap, icost, cost, len(self.adjacency[head]))
        bwd = Arc(tail, 0, -icost, -cost, len(self.adjacency[tail]))
        self.adjacency[tail].append(fwd)
        self.adjacency[head].append(bwd)

    def supply(self) -> int:
        return sum(a.cap for a in self.adjacency[self.source])


def build_flow_network(instance: ScenarioInstance, descriptor: RegimeDescriptor) -> FlowNetwork:
    servers = [int(s) for s in np.flatnonzero(instance.placement == 1)]
    _, demand = _admission(instance)
    if not np.array_equal(demand, descriptor.public_demand):
        raise ValueError("descriptor public demand does not match the instance")
    n, m = instance.n, len(servers)
    cap = ifloor((1 - instance.profile.alpha) * instance.profile.K)
    big = int(demand.sum())
    source, cloud, sink = 0, n + m + 1, n + m + 2
    net = FlowNetwork(n + m + 3, source, sink)
    xi = instance.topology.delay_matrix
    cloud_open = descriptor.regime in (Regime.IKSW, Regime.IKIW)
    for i in range(n):
        net.add_arc(source, 1 + i, int(demand[i]), 0.0)
        for k, s in enumerate(servers):
            net.add_arc(1 + i, 1 + n + k, big, float(xi[i, s]))
    for k in range(m):
        net.add_arc(1 + n + k, sink, cap, 0.0)
        net.add_arc(1 + n + k, cloud, big if cloud_open else 0, instance.profile.lam)
    net.add_arc(cloud, sink, big, 0.0)
    return net


def successive_shortest_paths(net: FlowNetwork) -> tuple[int, list[int]]:
    """Push the full supply at minimum cost. Returns (flow sent, potentials)."""
    N = net.n_nodes
    potential = [0] * N  # all costs start nonnegative
    target = net.supply()
    sent = 0
    INF = math.inf
    while sent < target:
        dist = [INF] * N
        prev: list[tuple[int, int] | None] = [None] * N
        dist[net.source] = 0
        heap = [(0, net.source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for idx, arc in enumerate(net.adjacency[u]):
                if arc.cap - arc.flow <= 0:
                    continue
                nd = d + arc.cost + potential[u] - potential[arc.head]
                if nd < dist[arc.head]:
                    dist[arc.head] = nd
                    prev[arc.head] = (u, idx)
                    heapq.heappush(heap, (nd, arc.head))
        if dist[net.sink] == INF:
            break
        # capping at dist[sink] keeps reduced costs nonnegative for unreached nodes too
        for v in range(N):
            potential[v] += min(dist[v], dist[net.sink])
        push, v = target - sent, net.sink
        while v != net.source:
            u, idx = prev[v]
            arc = net.adjacency[u][idx]
            push = min(push, arc.cap - arc.flow)
            v = u
        v = net.sink
        while v != net.source:
            u, idx = prev[v]
            arc = net.adjacency[u][idx]
            arc.flow += push
            net.adjacency[arc.head][arc.rev].flow -= push
            v = u
        sent += push
    return sent, potential


def check_reduced_costs(net: FlowNetwork, potential: list[int]) -> None:
    """Optimality certificate: no residual arc may have negative reduced cost."""
    for u, arcs in enumerate(net.adjacency):
        for arc in arcs:
            if arc.cap - arc.flow > 0:
                rc = arc.cost + potential[u] - potential[arc.head]
                if rc < 0:
                    raise AssertionError(f"negative reduced cost {rc} on residual arc {u}->{arc.head}")


def mincost_flow_optimum(instance: ScenarioInstance, descriptor: RegimeDescriptor) -> float:
    net = build_flow_network(instance, descriptor)
    sent, potential = successive_shortest_paths(net)
    need = net.supply()
    if sent < need:
        raise FlowInfeasibleError(f"only {sent} of {need} public requests can be routed "
                                  f"(deficit {need - sent})")
    check_reduced_costs(net, potential)
    terms = [arc.real_cost * arc.flow for arcs in net.adjacency for arc in arcs if arc.flow > 0]
    chi, _ = _admission(instance)
    terms += [float(p) * float(c) for p, c in zip(instance.pi, chi)]
    return math.fsum(terms)
