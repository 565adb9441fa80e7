"""Write a synthetic city order log in the ingest format.

Stands in for the ride-hailing order data, which is not redistributable.
"""
import argparse
from pathlib import Path

from edgesched.ingest import GridSpec, synthetic_orders, write_orders


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--orders", type=int, default=130_000, help="number of records")
    p.add_argument("--days", type=int, default=66, help="sampled days")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="data/orders.csv")
    args = p.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_orders(synthetic_orders(args.orders, args.seed, GridSpec(), days=args.days), args.out)
    print(f"wrote {args.orders} orders to {args.out}")


if __name__ == "__main__":
    main()
