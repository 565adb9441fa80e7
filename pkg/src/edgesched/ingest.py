"""Turn geo-tagged order logs into scheduling scenarios.

The area is cut into a rows x cols lattice (rows along latitude), one AP per
cell centre, servers in the busiest cells, links between 4-neighbour cells
with jittered lengths. Distances are plain Euclidean in degree space.
"""
from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import AccessPoint, Link, NetworkTopology, ResourceProfile, ScenarioInstance

log = logging.getLogger(__name__)

# evaluation map bounds (degrees)
DEFAULT_LAT = (30.57, 30.78)
DEFAULT_LON = (103.96, 104.17)
JITTER = (0.8, 1.2)
CLOUD_FACTOR = 10.0
# evaluation ladder: grid size -> number of hybrid edge servers
STANDARD_GRIDS = {(12, 10): 40, (24, 20): 60, (36, 30): 80, (48, 40): 100, (60, 50): 120}


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class OrderRecord:
    latitude: float
    longitude: float
    timestamp: float | None = None


@dataclass(frozen=True)
class GridSpec:
    lat_min: float = DEFAULT_LAT[0]
    lat_max: float = DEFAULT_LAT[1]
    lon_min: float = DEFAULT_LON[0]
    lon_max: float = DEFAULT_LON[1]
    rows: int = 12
    cols: int = 10

    def __post_init__(self) -> None:
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError("grid ranges must be non-empty")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid needs at least one row and one column")

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    @property
    def cell_height(self) -> float:
        return (self.lat_max - self.lat_min) / self.rows

    @property
    def cell_width(self) -> float:
        return (self.lon_max - self.lon_min) / self.cols

    def centers(self) -> np.ndarray:
        """(n_cells, 2) array of (lat, lon) cell centres, row-major."""
        r, c = np.divmod(np.arange(self.n_cells), self.cols)
        lat = self.lat_min + (r + 0.5) * self.cell_height
        lon = self.lon_min + (c + 0.5) * self.cell_width
        return np.column_stack([lat, lon])


@dataclass(frozen=True, eq=False)
class GridCounts:
    spec: GridSpec
    counts: np.ndarray  # orders per cell, row-major
    mean_distance: np.ndarray  # mean order-to-centre distance per cell (0 if empty)
    in_bounds: int
    dropped: int
    days: int


def read_orders(paths: Iterable[str | Path]) -> tuple[list[OrderRecord], int]:
    """Parse ``order_id,timestamp,latitude,longitude`` lines.

    A header line is optional. Returns the records and the number of
    malformed lines skipped.
    """
    records: list[OrderRecord] = []
    bad = 0
    for path in paths:
        with open(path, newline="") as fh:
            for k, row in enumerate(csv.reader(fh)):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    if len(row) != 4:
                        raise ValueError(row)
                    ts = float(row[1]) if row[1].strip() else None
                    records.append(OrderRecord(float(row[2]), float(row[3]), ts))
                except ValueError:
                    if k == 0:
                        continue  # header
                    bad += 1
    if bad:
        log.warning("skipped %d malformed order lines", bad)
    return records, bad


def write_orders(records: Sequence[OrderRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["order_id", "timestamp", "latitude", "longitude"])
        for k, r in enumerate(records):
            ts = "" if r.timestamp is None else f"{r.timestamp:.0f}"
            w.writerow([f"o{k}", ts, f"{r.latitude:.6f}", f"{r.longitude:.6f}"])


def _cell_index(values: np.ndarray, lo: float, hi: float, bins: int) -> np.ndarray:
    idx = np.floor((values - lo) / (hi - lo) * bins).astype(np.int64)
    return np.minimum(idx, bins - 1)  # upper boundary belongs to the last cell


def count_days(records: Sequence[OrderRecord]) -> int:
    days = {dt.datetime.fromtimestamp(r.timestamp, dt.timezone.utc).date()
            for r in records if r.timestamp is not None}
    return max(1, len(days))


def gridify(records: Sequence[OrderRecord], spec: GridSpec, days: int | None = None) -> GridCounts:
    lat = np.array([r.latitude for r in records], dtype=float)
    lon = np.array([r.longitude for r in records], dtype=float)
    inside = ((lat >= spec.lat_min) & (lat <= spec.lat_max)
              & (lon >= spec.lon_min) & (lon <= spec.lon_max))
    dropped = int((~inside).sum())
    if dropped:
        log.warning("dropped %d orders outside the bounding box", dropped)
    if not inside.any():
        raise IngestError("no orders inside the bounding box")
    kept = [r for r, ok in zip(records, inside) if ok]
    lat, lon = lat[inside], lon[inside]
    row = _cell_index(lat, spec.lat_min, spec.lat_max, spec.rows)
    col = _cell_index(lon, spec.lon_min, spec.lon_max, spec.cols)
    cell = row * spec.cols + col
    centers = spec.centers()
    dist = np.hypot(lat - centers[cell, 0], lon - centers[cell, 1])
    counts = np.bincount(cell, minlength=spec.n_cells)
    sums = np.bincount(cell, weights=dist, minlength=spec.n_cells)
    mean = np.divide(sums, counts, out=np.zeros(spec.n_cells), where=counts > 0)
    return GridCounts(spec, counts, mean, int(inside.sum()), dropped,
                      count_days(kept) if days is None else days)


def place_servers(counts: Sequence[int], m: int) -> np.ndarray:
    """Flags for the ``m`` busiest cells; earlier cells win ties."""
    counts = np.asarray(counts)
    if m > len(counts):
        raise IngestError(f"cannot place {m} servers on {len(counts)} cells")
    order = np.lexsort((np.arange(len(counts)), -counts))
    flags = np.zeros(len(counts), dtype=np.int64)
    flags[order[:m]] = 1
    return flags


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5).astype(np.int64)


def grid_links(spec: GridSpec) -> list[tuple[int, int]]:
    """4-neighbour cell pairs (0-based, row-major), right neighbour before down."""
    pairs = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            k = r * spec.cols + c
            if c + 1 < spec.cols:
                pairs.append((k, k + 1))
            if r + 1 < spec.rows:
                pairs.append((k, k + spec.cols))
    return pairs


def derive_instance(grid: GridCounts, placement: Sequence[int], profile: ResourceProfile,
                    seed: int) -> ScenarioInstance:
    """Build the scenario; ``profile.lam`` is replaced by the derived cloud delay."""
    spec = grid.spec
    placement = np.asarray(placement, dtype=np.int64)
    if placement.shape != (spec.n_cells,):
        raise IngestError(f"placement has {placement.size} flags for {spec.n_cells} cells")
    centers = spec.centers()
    aps = [AccessPoint(k + 1, float(lon), float(lat))
           for k, (lat, lon) in enumerate(centers)]
    rng = np.random.default_rng(seed)
    links = []
    for a, b in grid_links(spec):
        base = float(np.hypot(*(centers[a] - centers[b])))
        links.append(Link(a + 1, b + 1, base * float(rng.uniform(*JITTER))))
    topology = NetworkTopology.from_links(aps, links)
    lam = CLOUD_FACTOR * float(topology.delay_matrix.max())
    theta = _round_half_up(grid.counts / grid.days)
    return ScenarioInstance(topology, profile.replace(lam=lam), theta, grid.mean_distance, placement)


def default_capacity(theta: np.ndarray, m: int) -> int:
    """K sized from total requests over the server count."""
    return max(1, math.ceil(int(np.sum(theta)) / max(m, 1)))


def synthetic_orders(n_orders: int, seed: int, spec: GridSpec | None = None,
                     days: int = 66, outside_fraction: float = 0.01) -> list[OrderRecord]:
    """Stand-in for a city order log: a dense centre plus a few hot spots.

    Timestamps fall on ``days`` sampled days, five days apart from 2017-07-01.
    A small fraction lands outside the box so the drop path gets exercised.
    """
    spec = spec or GridSpec()
    rng = np.random.default_rng(seed)
    lat_mid = (spec.lat_min + spec.lat_max) / 2
    lon_mid = (spec.lon_min + spec.lon_max) / 2
    h = spec.lat_max - spec.lat_min
    w = spec.lon_max - spec.lon_min
    hubs = np.array([[lat_mid, lon_mid, 0.12],
                     [lat_mid + 0.25 * h, lon_mid - 0.2 * w, 0.06],
                     [lat_mid - 0.3 * h, lon_mid + 0.25 * w, 0.07],
                     [lat_mid + 0.1 * h, lon_mid + 0.3 * w, 0.05]])
    weights = np.array([0.55, 0.15, 0.15, 0.15])
    pick = rng.choice(len(hubs), size=n_orders, p=weights)
    lat = rng.normal(hubs[pick, 0], hubs[pick, 2] * h)
    lon = rng.normal(hubs[pick, 1], hubs[pick, 2] * w * 1.3)
    n_out = int(outside_fraction * n_orders)
    in_box = ((lat >= spec.lat_min) & (lat <= spec.lat_max)
              & (lon >= spec.lon_min) & (lon <= spec.lon_max))
    # keep the out-of-box share at the requested level
    out_idx = np.flatnonzero(~in_box)
    if len(out_idx) > n_out:
        fix = out_idx[n_out:]
        lat[fix] = rng.uniform(spec.lat_min, spec.lat_max, len(fix))
        lon[fix] = rng.uniform(spec.lon_min, spec.lon_max, len(fix))
    start = dt.datetime(2017, 7, 1, tzinfo=dt.timezone.utc).timestamp()
    day = rng.integers(0, days, size=n_orders)
    ts = start + day * 5 * 86400 + rng.uniform(0, 86400, size=n_orders)
    return [OrderRecord(float(a), float(b), float(t)) for a, b, t in zip(lat, lon, ts)]


def ingest(records: Sequence[OrderRecord], spec: GridSpec, m: int, profile: ResourceProfile,
           seed: int, days: int | None = None) -> tuple[ScenarioInstance, GridCounts]:
    grid = gridify(records, spec, days)
    placement = place_servers(grid.counts, m)
    return derive_instance(grid, placement, profile, seed), grid
