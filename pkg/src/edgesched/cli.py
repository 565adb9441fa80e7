"""Command-line entry point: ``edgesched <subcommand> ...``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ingest import STANDARD_GRIDS, GridSpec, ingest, read_orders
from .instances import random_instance
from .milp import solve
from .model import (
    InvalidInstanceError,
    Regime,
    ResourceProfile,
    ScenarioFormatError,
    SolveReport,
    TopologyError,
    load_scenario,
    save_scenario,
    validate_instance,
)
from .oracle import enumerate_optimum, mincost_flow_optimum
from .partition import AdmissionError, classify
from .sweep import IngestParams, SweepSpec, default_capacity, parse_grid, run_sweep

log = logging.getLogger("edgesched")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def report_dict(report: SolveReport, instance, digest: str, seed: int | None) -> dict:
    sol = report.solution
    ids = [ap.id for ap in instance.topology.aps]
    inflow = sol.y.sum(axis=0)
    routing = []
    for i in range(instance.n):
        routes = [{"server": ids[j], "count": int(sol.y[i, j])} for j in np.flatnonzero(sol.y[i])]
        routing.append({"ap": ids[i], "theta": int(instance.theta[i]), "chi": int(sol.chi[i]),
                        "blocked": int(sol.blocked[i]), "routes": routes})
    servers = [{"ap": ids[j], "inflow": int(inflow[j]), "cloud": int(sol.zeta[j])}
               for j in instance.servers]
    return {
        "tool": "edgesched",
        "version": __version__,
        "input_sha256": digest,
        "seed": seed,
        "regime": report.regime.value,
        "objective": report.objective,
        "branch_nodes": report.nodes,
        "lp_pivots": report.pivots,
        "wall_time_s": report.wall_time,
        "private_service_rate": report.private_service_rate,
        "public_service_rate": report.public_service_rate,
        "cloud_offload": report.cloud_offload,
        "blocked": report.blocked,
        "pu": report.pu,
        "total_public_capacity": report.total_public_capacity,
        "servers": servers,
        "routing": routing,
    }


def _load(path: str):
    try:
        return load_scenario(path)
    except (OSError, ScenarioFormatError, TopologyError, ValueError) as exc:
        print(f"error: cannot load scenario {path}: {exc}", file=sys.stderr)
        return None


def cmd_validate(args: argparse.Namespace) -> int:
    inst = _load(args.scenario)
    if inst is None:
        return EXIT_INVALID
    problems = validate_instance(inst, args.servers)
    for p in problems:
        print(p)
    if not problems:
        print("valid")
    return EXIT_INVALID if problems else EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    inst = _load(args.scenario)
    if inst is None:
        return EXIT_INVALID
    problems = validate_instance(inst)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        return EXIT_INVALID
    try:
        desc = classify(inst)
    except AdmissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(desc.regime.value)
    print(json.dumps(desc.to_dict()))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load(args.scenario)
    if inst is None:
        return EXIT_INVALID
    try:
        report = solve(inst)
    except InvalidInstanceError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    except AdmissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    doc = report_dict(report, inst, file_digest(args.scenario), args.seed)
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"{report.regime.value} objective={report.objective:.9g} nodes={report.nodes} "
          f"time={report.wall_time:.3f}s", file=sys.stderr)
    return EXIT_OK


def _profile_args(args: argparse.Namespace) -> ResourceProfile:
    # K, W get filled in once request counts are known
    return ResourceProfile(1, 1, args.alpha, args.beta, 0.0)


def cmd_ingest(args: argparse.Namespace) -> int:
    records, bad = read_orders(args.orders)
    rows, cols = args.grid
    spec = GridSpec(args.lat[0], args.lat[1], args.lon[0], args.lon[1], rows, cols)
    m = args.servers if args.servers is not None else STANDARD_GRIDS.get((rows, cols))
    if m is None:
        print("error: --servers is required for non-standard grid sizes", file=sys.stderr)
        return EXIT_FAIL
    inst, grid = ingest(records, spec, m, _profile_args(args), args.seed, args.days)
    K = args.K if args.K is not None else default_capacity(inst.theta, m)
    W = args.W if args.W is not None else max(1, int(inst.theta.max()))
    inst = inst.with_profile(K=K, W=W)
    save_scenario(inst, args.out)
    print(f"{grid.in_bounds} orders in {spec.n_cells} cells ({grid.dropped} out of bounds, "
          f"{bad} malformed, {grid.days} days); K={K} W={W} lambda={inst.profile.lam:.6g}",
          file=sys.stderr)
    problems = validate_instance(inst)
    for p in problems:
        print(f"warning: {p}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    values = args.values
    if args.axis == "grid_size":
        values = values or [f"{r}x{c}" for r, c in STANDARD_GRIDS]
        values = [f"{r}x{c}" for r, c in map(parse_grid, values)]
    elif not values:
        print("error: --values is required for this axis", file=sys.stderr)
        return EXIT_FAIL
    else:
        values = [float(v) for v in values]
    params = None
    if args.orders:
        rows, cols = args.grid
        m = args.servers if args.servers is not None else STANDARD_GRIDS.get((rows, cols), 40)
        params = IngestParams(tuple(args.orders), rows, cols, m,
                              args.alpha, args.beta, args.K, args.W,
                              tuple(args.lat), tuple(args.lon), args.days)
    try:
        spec = SweepSpec(args.axis, tuple(values), args.out, args.reps, args.scenario, params,
                         args.seed, args.workers)
        rows = run_sweep(spec)
    except (ValueError, RuntimeError) as exc:
        print(f"error: sweep failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    """Random cross-check of the solver against both reference optima."""
    rng = np.random.default_rng(args.seed)
    regimes = list(Regime)
    failures = 0
    for k in range(args.reps):
        small = k % 2 == 0
        if small:
            n = int(rng.integers(2, 7))
            m = int(rng.integers(1, min(3, n) + 1))
            inst = random_instance(rng, n, m, max_public_demand=12, regime=regimes[k % 4])
        else:
            n = int(rng.integers(6, 31))
            m = int(rng.integers(1, min(8, n) + 1))
            inst = random_instance(rng, n, m, theta_max=10, regime=regimes[k % 4])
        rep = solve(inst)
        flow = mincost_flow_optimum(inst, classify(inst))
        checks = [("flow", flow)]
        if small:
            checks.append(("enum", enumerate_optimum(inst)[0]))
        for name, value in checks:
            if abs(value - rep.objective) > 1e-9:
                failures += 1
                print(f"case {k} ({rep.regime.value}, n={n}, m={m}): solver {rep.objective!r} "
                      f"!= {name} {value!r}")
    print(f"{args.reps} cases, {failures} mismatches")
    return EXIT_OK if failures == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgesched", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def ingest_flags(p: argparse.ArgumentParser, orders_required: bool) -> None:
        p.add_argument("--orders", nargs="+", required=orders_required,
                       help="order logs: order_id,timestamp,latitude,longitude")
        p.add_argument("--grid", nargs=2, type=int, metavar=("R", "C"), default=[12, 10])
        p.add_argument("--servers", type=int, help="number of hybrid edge servers m")
        p.add_argument("--alpha", type=float, default=0.3)
        p.add_argument("--beta", type=float, default=0.1)
        p.add_argument("--K", type=float, help="default: total requests / servers")
        p.add_argument("--W", type=float, help="default: largest per-AP request count")
        p.add_argument("--lat", nargs=2, type=float, default=[GridSpec.lat_min, GridSpec.lat_max])
        p.add_argument("--lon", nargs=2, type=float, default=[GridSpec.lon_min, GridSpec.lon_max])
        p.add_argument("--days", type=int, help="sampled days (default: distinct order dates)")

    p = sub.add_parser("ingest", help="build a scenario file from order logs")
    ingest_flags(p, True)
    p.add_argument("--seed", type=int, default=0, help="link-jitter seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--servers", type=int, help="declared m to check the placement against")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="print the resource regime and its descriptor")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("solve", help="solve a scenario and write a JSON report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, help="recorded in the report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a grid_size / K / alpha sweep")
    p.add_argument("--axis", choices=("grid_size", "K", "alpha"), required=True)
    p.add_argument("--values", nargs="+")
    p.add_argument("--scenario", help="base scenario (K and alpha sweeps)")
    ingest_flags(p, False)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle-check", help="cross-check the solver on random instances")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
