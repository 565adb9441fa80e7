"""Parameter sweeps over grid size, server capacity K, and private ratio alpha."""
from __future__ import annotations

import csv
import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .ingest import STANDARD_GRIDS, GridSpec, OrderRecord, default_capacity, ingest, read_orders
from .instances import capacity_bounds
from .milp import solve
from .model import ResourceProfile, ScenarioInstance, load_scenario, private_service_rate, validate_instance
from .partition import AdmissionError

log = logging.getLogger(__name__)

AXES = ("grid_size", "K", "alpha")

COLUMNS = [
    "axis", "value", "reps", "status", "regime", "n_aps", "n_servers", "K", "alpha",
    "mean_wall_time", "mean_nodes", "mean_pivots", "mean_objective",
    "private_service_rate", "public_service_rate", "cloud_offload", "blocked",
    "private_capacity", "public_capacity_per_server", "private_violations",
    "K_valid_min", "K_sufficient",
]
RUN_COLUMNS = ["axis", "value", "rep", "seed", "status", "regime", "wall_time", "nodes",
               "pivots", "objective", "private_service_rate", "public_service_rate",
               "cloud_offload", "blocked"]


@dataclass(frozen=True)
class IngestParams:
    orders: tuple[str, ...]
    rows: int = 12
    cols: int = 10
    servers: int = 40
    alpha: float = 0.3
    beta: float = 0.1
    K: float | None = None  # None: total requests / servers
    W: float | None = None  # None: largest per-AP request count
    lat: tuple[float, float] = (GridSpec.lat_min, GridSpec.lat_max)
    lon: tuple[float, float] = (GridSpec.lon_min, GridSpec.lon_max)
    days: int | None = None

    def grid(self) -> GridSpec:
        return GridSpec(self.lat[0], self.lat[1], self.lon[0], self.lon[1], self.rows, self.cols)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[Any, ...]
    out: str
    reps: int = 5
    scenario: str | None = None
    ingest: IngestParams | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one axis value")
        if self.reps < 1:
            raise ValueError("repetitions must be >= 1")
        if (self.scenario is None) == (self.ingest is None):
            raise ValueError("give exactly one of a base scenario or ingest parameters")
        if self.axis == "grid_size" and self.ingest is None:
            raise ValueError("a grid-size sweep re-ingests orders; ingest parameters are required")


def parse_grid(text: str) -> tuple[int, int]:
    for sep in ("x", "*", "X", ","):
        if sep in text:
            r, c = text.split(sep)
            return int(r), int(c)
    raise ValueError(f"grid size must look like 12x10, got {text!r}")


def build_instance(params: IngestParams, records: Sequence[OrderRecord], seed: int) -> ScenarioInstance:
    spec = params.grid()
    # K and W are placeholders until the request counts are known
    profile = ResourceProfile(1, 1, params.alpha, params.beta, 0.0)
    inst, _ = ingest(records, spec, params.servers, profile, seed, params.days)
    K = params.K if params.K is not None else default_capacity(inst.theta, params.servers)
    W = params.W if params.W is not None else max(1, int(inst.theta.max()))
    return inst.with_profile(K=K, W=W)


def _run_one(task: tuple) -> dict:
    axis, value, rep, seed, instance = task
    row: dict[str, Any] = {"axis": axis, "value": value, "rep": rep, "seed": seed}
    problems = validate_instance(instance)
    if problems:
        row.update(status="invalid", private_service_rate=private_service_rate(instance),
                   violations=len(problems))
        return row
    try:
        rep_ = solve(instance)
    except AdmissionError as exc:
        row.update(status="invalid", private_service_rate=private_service_rate(instance),
                   violations=1, error=str(exc))
        return row
    row.update(status="ok", regime=rep_.regime.value, wall_time=rep_.wall_time, nodes=rep_.nodes,
               pivots=rep_.pivots, objective=rep_.objective,
               private_service_rate=rep_.private_service_rate,
               public_service_rate=rep_.public_service_rate,
               cloud_offload=rep_.cloud_offload, blocked=rep_.blocked)
    return row


def _point_instance(spec: SweepSpec, base: ScenarioInstance | None,
                    records: Sequence[OrderRecord], value: Any, seed: int) -> ScenarioInstance:
    if spec.axis == "grid_size":
        r, c = parse_grid(str(value))
        params = spec.ingest
        m = STANDARD_GRIDS.get((r, c), params.servers)
        return build_instance(replace(params, rows=r, cols=c, servers=m), records, seed)
    inst = base if base is not None else build_instance(spec.ingest, records, seed)
    if spec.axis == "K":
        return inst.with_profile(K=float(value))
    return inst.with_profile(alpha=float(value))


def _aggregate(spec: SweepSpec, value: Any, runs: list[dict], inst: ScenarioInstance) -> dict:
    p = inst.profile
    servers = inst.servers
    need = inst.private_demand()[servers]
    row: dict[str, Any] = {
        "axis": spec.axis, "value": value, "reps": len(runs),
        "n_aps": inst.n, "n_servers": inst.m, "K": p.K, "alpha": p.alpha,
        "private_capacity": p.private_capacity,
        "public_capacity_per_server": p.public_capacity,
        "private_violations": int((need > p.private_capacity).sum()),
    }
    try:
        bounds = capacity_bounds(inst)
        row["K_valid_min"], row["K_sufficient"] = bounds["K_valid_min"], bounds["K_sufficient"]
    except AdmissionError:
        row["K_valid_min"] = row["K_sufficient"] = ""
    row["private_service_rate"] = statistics.fmean(r["private_service_rate"] for r in runs)
    ok = [r for r in runs if r["status"] == "ok"]
    if len(ok) < len(runs):
        row["status"] = "invalid" if not ok else "partial"
    else:
        row["status"] = "ok"
    if ok:
        regimes = sorted({r["regime"] for r in ok})
        row["regime"] = "|".join(regimes)
        for key, col in (("wall_time", "mean_wall_time"), ("nodes", "mean_nodes"),
                         ("pivots", "mean_pivots"), ("objective", "mean_objective"),
                         ("public_service_rate", "public_service_rate"),
                         ("cloud_offload", "cloud_offload"), ("blocked", "blocked")):
            row[col] = statistics.fmean(r[key] for r in ok)
    return row


def plateau_start(values: Sequence[Any], rates: Sequence[float], tol: float = 1e-12) -> Any:
    """First axis value from which the rate column no longer changes."""
    if not rates:
        return None
    k = len(rates) - 1
    while k > 0 and abs(rates[k - 1] - rates[-1]) <= tol:
        k -= 1
    return values[k]


def run_sweep(spec: SweepSpec) -> list[dict]:
    records: list[OrderRecord] = []
    base = None
    if spec.ingest is not None:
        records, _ = read_orders(spec.ingest.orders)
    if spec.scenario is not None:
        base = load_scenario(spec.scenario)

    tasks, point_inst = [], {}
    for value in spec.values:
        for rep in range(spec.reps):
            seed = spec.seed + rep
            inst = _point_instance(spec, base, records, value, seed)
            point_inst.setdefault(value, inst)
            tasks.append((spec.axis, value, rep, seed, inst))

    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(t) for t in tasks]

    rows = []
    for value in spec.values:
        mine = [r for r in runs if r["value"] == value]
        rows.append(_aggregate(spec, value, mine, point_inst[value]))
        log.info("%s=%s: %s", spec.axis, value, rows[-1].get("regime", rows[-1]["status"]))

    out = Path(spec.out)
    _write_table(out, COLUMNS, rows)
    _write_table(out.with_suffix(".runs.csv"), RUN_COLUMNS, runs)
    summary: dict[str, Any] = {"tool": "edgesched", "version": __version__, "axis": spec.axis,
                               "values": list(spec.values), "reps": spec.reps, "seed": spec.seed,
                               "source": spec.scenario or list(spec.ingest.orders)}
    if spec.axis == "alpha":
        solved = [r for r in rows if r["status"] == "ok"]
        summary["public_rate_plateau_from"] = plateau_start(
            [r["value"] for r in solved], [r["public_service_rate"] for r in solved])
        offload = [r["value"] for r in solved if r["cloud_offload"] > 0]
        summary["first_alpha_with_offload"] = offload[0] if offload else None
        valid = [r["value"] for r in rows if r["private_violations"] == 0]
        summary["first_alpha_private_feasible"] = valid[0] if valid else None
    if spec.axis == "K":
        summary["K_valid_min"] = rows[0]["K_valid_min"]
        summary["K_sufficient"] = rows[0]["K_sufficient"]
    out.with_suffix(".summary.json").write_text(json.dumps(summary, indent=1, default=str) + "\n")
    return rows


def _write_table(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", restval="")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def read_table(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
