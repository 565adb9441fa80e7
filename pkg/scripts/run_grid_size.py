"""Solve time and node count across the five grid sizes (12x10 up to 60x50).

The two largest grids take minutes each with the in-house simplex; use
--sizes to run a subset.
"""
import argparse
import sys
from pathlib import Path

from edgesched.cli import main as cli
from edgesched.ingest import STANDARD_GRIDS

from _common import ensure_orders


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--orders", default="data/orders.csv")
    p.add_argument("--sizes", nargs="+", default=[f"{r}x{c}" for r, c in STANDARD_GRIDS])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results/grid_size.csv")
    args = p.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    return cli(["-v", "sweep", "--axis", "grid_size", "--values", *args.sizes,
                "--orders", ensure_orders(args.orders), "--reps", str(args.reps),
                "--workers", str(args.workers), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
