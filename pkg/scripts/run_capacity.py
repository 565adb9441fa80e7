"""Effect of server capacity K on the 12x10 scenario."""
import argparse
import sys
from pathlib import Path

from edgesched.cli import main as cli

from _common import ensure_orders


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--orders", default="data/orders.csv")
    p.add_argument("--values", nargs="+", default=["10", "15", "20", "25", "30", "40", "60", "80"])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", default="results/capacity.csv")
    args = p.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    return cli(["-v", "sweep", "--axis", "K", "--values", *args.values,
                "--orders", ensure_orders(args.orders), "--reps", str(args.reps), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
