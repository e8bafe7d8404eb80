"""Seeded generator of synthetic spatial-temporal movement networks.

Nodes are placed uniformly in a bounding box; movements are drawn year
by year from a single explicit PRNG stream: each movement either reuses
an existing directed link or draws a fresh one with a hub-biased source
and a distance-decayed destination. The generator emits the same
delimited format the ingestion layer reads, plus a ground-truth sidecar
with the generating parameters and exact count structure, so pipeline
tests can check ingestion and splitting against known numbers.
"""

import csv
import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError
from .geo import pair_distances
from .graphs import MovementRecord

log = logging.getLogger(__name__)

DEFAULT_SPECIES = ("rainbow trout", "atlantic salmon", "common carp",
                   "brown trout", "arctic char")


@dataclass(frozen=True)
class SynthConfig:
    """Shape parameters for one synthetic network.

    ``movements_per_year`` is either one integer applied to every year
    or a per-year sequence. ``decay_rate`` (per km) controls how
    strongly destination choice prefers nearby nodes (0 = distance
    independent); ``hub_bias`` controls how strongly source choice
    prefers nodes that already have outgoing links; and
    ``repeat_edge_prob`` is the chance a movement reuses an existing
    link instead of drawing a fresh one.
    """
    seed: int
    n_nodes: int
    years: tuple
    bbox: tuple  # (lat_min, lat_max, lon_min, lon_max)
    movements_per_year: object
    decay_rate: float = 0.02
    hub_bias: float = 1.0
    repeat_edge_prob: float = 0.5
    species: tuple = DEFAULT_SPECIES

    def __post_init__(self):
        lo, hi = self.years
        if lo > hi:
            raise ConfigError(f"year interval [{lo}, {hi}] is reversed")
        lat_min, lat_max, lon_min, lon_max = self.bbox
        if not (-90.0 <= lat_min < lat_max <= 90.0
                and -180.0 <= lon_min < lon_max <= 180.0):
            raise ConfigError(f"bounding box {self.bbox} is degenerate or "
                              "out of range")
        counts = self.yearly_counts()
        if any(c < 0 for c in counts):
            raise ConfigError("movements_per_year must be non-negative")
        if sum(counts) > 0 and self.n_nodes < 2:
            raise ConfigError(
                "generating movements requires at least 2 nodes "
                f"(got {self.n_nodes})")
        if self.n_nodes < 1:
            raise ConfigError("n_nodes must be >= 1")
        if not 0.0 <= self.repeat_edge_prob <= 1.0:
            raise ConfigError("repeat_edge_prob must be in [0, 1]")
        if self.decay_rate < 0 or self.hub_bias < 0:
            raise ConfigError("decay_rate and hub_bias must be >= 0")
        if not self.species:
            raise ConfigError("species list must be non-empty")

    def yearly_counts(self):
        """Movement count per year, expanded to one entry per year."""
        n_years = self.years[1] - self.years[0] + 1
        if isinstance(self.movements_per_year, int):
            return [self.movements_per_year] * n_years
        counts = [int(c) for c in self.movements_per_year]
        if len(counts) != n_years:
            raise ConfigError(
                f"movements_per_year lists {len(counts)} years, the "
                f"interval {self.years} spans {n_years}")
        return counts


class _DestinationSampler:
    """Distance-decayed destination choice with per-source caching.

    For source u the (unnormalized) choice weight of node v != u is
    exp(-decay_rate * d(u, v)). Cumulative-sum rows are built on first
    use per source; the node set is immutable so they never go stale.
    """

    def __init__(self, lat, lon, decay_rate):
        self._lat = lat
        self._lon = lon
        self._decay = decay_rate
        self._n = len(lat)
        self._cum = {}

    def _cumulative(self, u):
        cum = self._cum.get(u)
        if cum is None:
            dst = np.arange(self._n, dtype=np.int64)
            src = np.full(self._n, u, dtype=np.int64)
            dist = pair_distances(self._lat, self._lon, src, dst)
            weights = np.exp(-self._decay * dist)
            weights[u] = 0.0
            cum = np.cumsum(weights)
            self._cum[u] = cum
        return cum

    def draw(self, u, rng):
        cum = self._cumulative(u)
        pick = rng.random() * cum[-1]
        return int(np.searchsorted(cum, pick, side="right"))


def generate(cfg):
    """Generate movement records and their ground-truth summary.

    Returns (records, truth) where truth is a JSON-ready dictionary
    holding the config, totals, per-year counts, and (when the year
    span allows) the canonical chronological split: last year = test,
    second-to-last = val, everything earlier = train.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_nodes
    lat_min, lat_max, lon_min, lon_max = cfg.bbox
    lat = rng.uniform(lat_min, lat_max, n)
    lon = rng.uniform(lon_min, lon_max, n)
    width = max(4, len(str(n - 1)))
    ids = [f"farm-{i:0{width}d}" for i in range(n)]
    species = [cfg.species[int(rng.integers(len(cfg.species)))]
               for _ in range(n)]

    sampler = _DestinationSampler(lat, lon, cfg.decay_rate)
    out_degree = np.zeros(n, dtype=np.float64)
    links = []
    link_set = set()
    records = []
    year_counts = {}
    years = range(cfg.years[0], cfg.years[1] + 1)
    for year, count in zip(years, cfg.yearly_counts()):
        for _ in range(count):
            if links and rng.random() < cfg.repeat_edge_prob:
                u, v = links[int(rng.integers(len(links)))]
            else:
                source_w = 1.0 + cfg.hub_bias * out_degree
                cum = np.cumsum(source_w)
                u = int(np.searchsorted(cum, rng.random() * cum[-1],
                                        side="right"))
                v = sampler.draw(u, rng)
                if (u, v) not in link_set:
                    link_set.add((u, v))
                    links.append((u, v))
                    out_degree[u] += 1.0
            records.append(MovementRecord(
                source_id=ids[u], dest_id=ids[v], year=year,
                source_lat=float(lat[u]), source_lon=float(lon[u]),
                dest_lat=float(lat[v]), dest_lon=float(lon[v]),
                species=species[u]))
        year_counts[year] = count
    truth = _truth_summary(cfg, records, year_counts)
    log.info("generated %d movements over %d nodes (%d distinct links)",
             len(records), n, len(link_set))
    return records, truth


def _edge_stats(records):
    """Distinct-edge and incident-node counts for a record subset."""
    triples = {(r.source_id, r.dest_id, r.year) for r in records}
    nodes = {r.source_id for r in records} | {r.dest_id for r in records}
    links = {(r.source_id, r.dest_id) for r in records}
    return {"movements": len(records), "edges": len(triples),
            "links": len(links), "nodes": len(nodes)}


def _truth_summary(cfg, records, year_counts):
    truth = {
        "config": asdict(cfg),
        "totals": _edge_stats(records),
        "per_year_movements": {str(y): c for y, c in year_counts.items()},
    }
    first, last = cfg.years
    if last - first >= 2:
        splits = {
            "train": (first, last - 2),
            "val": (last - 1, last - 1),
            "test": (last, last),
        }
        truth["canonical_split"] = {
            name: dict(_edge_stats([r for r in records
                                    if lo <= r.year <= hi]),
                       years=[lo, hi])
            for name, (lo, hi) in splits.items()
        }
    return truth


def write_movements(records, dest):
    """Write records in the delimited format the ingestion layer reads.

    Coordinates carry 6 decimal places (about 0.1 m), so output is
    byte-stable across reruns of the same config.
    """

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source_id", "dest_id", "year", "source_lat",
                         "source_lon", "dest_lat", "dest_lon", "species"])
        for r in records:
            writer.writerow([
                r.source_id, r.dest_id, r.year,
                f"{r.source_lat:.6f}", f"{r.source_lon:.6f}",
                f"{r.dest_lat:.6f}", f"{r.dest_lon:.6f}",
                r.species or ""])

    if hasattr(dest, "write"):
        _write(dest)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            _write(fh)
    return dest


def write_truth(truth, dest):
    """Write the ground-truth sidecar as deterministic JSON."""
    payload = json.dumps(truth, indent=2, sort_keys=True)
    if hasattr(dest, "write"):
        dest.write(payload + "\n")
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload + "\n")
    return dest
