"""Per-regime integer programs and the end-to-end scheduling solve.

Floors are resolved up front by the partition step, so every model here is
linear in the routing counts y[i, s] and the per-server cloud overflow.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bnb import BnbResult, branch_and_bound
from .lp import EQ, LE, LinearProgram
from .model import (
    InvalidInstanceError,
    Regime,
    ScenarioInstance,
    ScheduleSolution,
    SolveReport,
    evaluate_objective,
    service_rates,
    validate_instance,
)
from .partition import RegimeDescriptor, admit, classify

CLOUD_REGIMES = (Regime.IKSW, Regime.IKIW)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SchedulingModel:
    lp: LinearProgram
    routes: tuple[tuple[int, int], ...]  # (source AP, server AP) per routing variable
    offload: tuple[int, ...]  # server AP per overflow variable, after the routes
    constant: float  # sum(pi * chi), kept out of the LP objective
    regime: Regime


def build_model(instance: ScenarioInstance, descriptor: RegimeDescriptor) -> SchedulingModel:
    chi, _ = admit(instance)
    if len(descriptor.chi) != instance.n or not np.array_equal(descriptor.chi, chi):
        raise ValueError("descriptor does not belong to this instance (chi differs)")
    if classify(instance).regime is not descriptor.regime:
        raise ValueError(f"descriptor regime {descriptor.regime.value} does not match the instance")

    servers = [int(s) for s in instance.servers]
    xi = instance.delays
    routes = tuple((i, s) for i in range(instance.n) for s in servers)
    cloud = descriptor.regime in CLOUD_REGIMES
    offload = tuple(servers) if cloud else ()
    n_y = len(routes)
    c = [float(xi[i, s]) for i, s in routes] + [instance.profile.lam] * len(offload)

    rows = []
    m = len(servers)
    for i in range(instance.n):
        cols = {i * m + k: 1.0 for k in range(m)}
        rows.append((cols, EQ, int(descriptor.public_demand[i])))
    cap = instance.profile.public_capacity
    for k, s in enumerate(servers):
        cols = {i * m + k: 1.0 for i in range(instance.n)}
        if cloud:
            cols[n_y + k] = -1.0
        rows.append((cols, LE, cap))
    if cloud:
        rows.append(({n_y + k: 1.0 for k in range(m)}, EQ, descriptor.required_offload))

    lp = LinearProgram.build(c, rows, integer=range(len(c)))
    constant = math.fsum(float(p) * float(x) for p, x in zip(instance.pi, descriptor.chi))
    return SchedulingModel(lp, routes, offload, constant, descriptor.regime)


def assemble(instance: ScenarioInstance, model: SchedulingModel, x: np.ndarray,
             chi: np.ndarray, blocked: np.ndarray) -> ScheduleSolution:
    n = instance.n
    y = np.zeros((n, n), dtype=np.int64)
    values = np.rint(x[: len(model.routes)]).astype(np.int64)
    for (i, s), v in zip(model.routes, values):
        y[i, s] = v
    inflow = y.sum(axis=0)
    zeta = np.where(instance.placement == 1,
                    np.maximum(0, inflow - instance.profile.public_capacity), 0)
    draft = ScheduleSolution(y, zeta, np.asarray(chi), np.asarray(blocked), math.nan)
    return ScheduleSolution(y, zeta, draft.chi, draft.blocked, evaluate_objective(instance, draft))


def solve(instance: ScenarioInstance, pricing: str = "dantzig") -> SolveReport:
    start = time.perf_counter()
    problems = validate_instance(instance)
    if problems:
        raise InvalidInstanceError(problems)
    descriptor = classify(instance)
    model = build_model(instance, descriptor)
    result: BnbResult = branch_and_bound(model.lp, pricing=pricing)
    if result.status != "optimal":
        raise SolverError(f"{descriptor.regime.value} model reported {result.status}")
    solution = assemble(instance, model, result.x, descriptor.chi, descriptor.blocked)
    solver_total = result.objective + model.constant
    if not math.isclose(solver_total, solution.objective, rel_tol=1e-12, abs_tol=1e-9):
        raise SolverError(f"solver objective {solver_total!r} disagrees with "
                          f"evaluated objective {solution.objective!r}")
    private_rate, public_rate = service_rates(instance, solution)
    wall = time.perf_counter() - start
    return SolveReport(
        regime=descriptor.regime,
        solution=solution,
        nodes=result.nodes,
        pivots=result.pivots,
        wall_time=wall,
        private_service_rate=private_rate,
        public_service_rate=public_rate,
        cloud_offload=solution.cloud_offload,
        blocked=int(solution.blocked.sum()),
        pu=descriptor.pu,
        total_public_capacity=descriptor.total_public_capacity,
    )
