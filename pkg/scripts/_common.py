from pathlib import Path

from edgesched.ingest import GridSpec, synthetic_orders, write_orders


def ensure_orders(path: str, seed: int = 7) -> str:
    """Reuse an order log, generating the synthetic one on first use."""
    if not Path(path).exists():
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        write_orders(synthetic_orders(130_000, seed, GridSpec()), path)
    return path
