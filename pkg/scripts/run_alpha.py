"""Private/public service rate against the private ratio alpha (K fixed)."""
import argparse
import json
import sys
from pathlib import Path

from edgesched.cli import main as cli

from _common import ensure_orders


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--orders", default="data/orders.csv")
    p.add_argument("--K", type=float, help="fixed capacity (default: total requests / servers)")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", default="results/alpha.csv")
    args = p.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    values = [f"{a / 10:.1f}" for a in range(11)]
    extra = ["--K", str(args.K)] if args.K is not None else []
    code = cli(["-v", "sweep", "--axis", "alpha", "--values", *values, *extra,
                "--orders", ensure_orders(args.orders), "--reps", str(args.reps), "--out", args.out])
    if code == 0:
        summary = json.loads(Path(args.out).with_suffix(".summary.json").read_text())
        print("first alpha meeting private demand:", summary["first_alpha_private_feasible"])
        print("public rate constant from alpha:", summary["public_rate_plateau_from"])
    return code


if __name__ == "__main__":
    sys.exit(main())
