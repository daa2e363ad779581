"""Benchmark protocol and trip-data ingestion.

Each algorithm produces placements (R independent runs for the randomized
ones, one for the deterministic solvers) and every placement is scored on M
demand realizations. By default all algorithms and runs share the same M
realizations, so differences between rows are not blurred by demand noise.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .algorithms import rp_place, rrp_place, tree_dp_solve, uckm_solve, vrrp_place
from .core.bundle import InstanceBundle
from .core.metric import DemandDistribution, Placement, make_distribution
from .errors import EmptyFile, InvariantViolation, KMismatch, ParseError, UnknownZone
from .evaluation.montecarlo import Z95, sample_counts
from .matching.distances import matching_value

RANDOMIZED = ("rp", "vrrp", "rrp")
DETERMINISTIC = ("uckm", "tree-dp", "fixed")
ALGORITHMS = RANDOMIZED + DETERMINISTIC
RECORD_COLUMNS = ("algo", "run", "realization", "total_cost", "per_rider_eta")


@dataclass(frozen=True)
class BenchRow:
    algo: str
    runs: int
    demand_sets: int
    k: int
    mean_eta: float
    ci95: float
    ci_basis: str
    min_eta: float
    wall_time_s: float | None
    realization_digest: str
    run_means: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "runs": self.runs,
            "demand_sets": self.demand_sets,
            "k": self.k,
            "mean_per_rider_eta": self.mean_eta,
            "ci95_halfwidth": self.ci95,
            "ci_basis": self.ci_basis,
            "min_per_rider_eta": self.min_eta,
            "wall_time_s": self.wall_time_s,
            "realization_digest": self.realization_digest,
            "run_means": list(self.run_means),
        }


@dataclass
class BenchReport:
    rows: list[BenchRow]
    records: list[tuple[str, int, int, float, float]]
    seed: int
    shared_realizations: bool
    realization_digest: str | None
    extras: dict = field(default_factory=dict)

    def row(self, algo: str) -> BenchRow:
        for r in self.rows:
            if r.algo == algo:
                return r
        raise KeyError(algo)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "shared_realizations": self.shared_realizations,
            "realization_digest": self.realization_digest,
            "rows": [r.to_dict() for r in self.rows],
            "placements": self.extras.get("placements", {}),
            "records": [dict(zip(RECORD_COLUMNS, rec)) for rec in self.records],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RECORD_COLUMNS)
            for algo, run, j, total, eta in self.records:
                w.writerow([algo, run, j, repr(total), repr(eta)])


def _mean_ci(values) -> tuple[float, float]:
    values = [float(v) for v in values]
    m = len(values)
    mean = math.fsum(values) / m
    if m < 2:
        return mean, 0.0
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (m - 1))
    return mean, Z95 * sd / math.sqrt(m)


def _realizations(bundle, seed, m, key):
    """The first ``m`` realizations of stream ``key`` and the sha256 of their counts."""
    cdf = rng.cumulative(bundle.probs)
    h = hashlib.sha256()
    xs = []
    for j in range(m):
        x = sample_counts(cdf, bundle.k, rng.stream(seed, *key, j))
        xs.append(x)
        h.update(np.ascontiguousarray(x, dtype="<i8").tobytes())
    return xs, h.hexdigest()


def _place(bundle: InstanceBundle, algo: str, seed: int, opts: dict) -> Placement:
    if algo == "rp":
        return rp_place(bundle.demand, bundle.k, seed)
    if algo == "vrrp":
        return vrrp_place(bundle.demand, bundle.k, seed)
    if algo == "rrp":
        return rrp_place(bundle, seed)
    if algo == "uckm":
        return uckm_solve(
            bundle.metric,
            bundle.demand,
            bundle.k,
            opts.get("gap", 0.0),
            opts.get("time_limit"),
            opts.get("method", "highs"),
        ).placement
    if algo == "tree-dp":
        if bundle.tree is None:
            raise InvariantViolation("tree-dp needs a bundle with a tree")
        return tree_dp_solve(bundle.tree, bundle.k)[0]
    if algo == "fixed":
        s = opts.get("fixed")
        if s is None:
            raise InvariantViolation("algorithm 'fixed' needs a placement")
        if s.k != bundle.k or s.n != bundle.n:
            raise KMismatch(f"fixed placement has {s.k} units over {s.n} points; instance has k={bundle.k}, n={bundle.n}")
        return s
    raise InvariantViolation(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGORITHMS)}")


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_bench(
    bundle: InstanceBundle,
    algos,
    runs: int = 20,
    demand_sets: int = 100,
    seed: int = 0,
    threads: int = 1,
    independent_demand: bool = False,
    timing: bool = True,
    **opts,
) -> BenchReport:
    """Score each algorithm's placements on M demand realizations.

    Randomized algorithms are run ``runs`` times with per-run seeds derived
    from ``seed``; their CI is taken across the run means. Deterministic
    algorithms run once and report a CI across realizations instead.
    """
    if runs < 1 or demand_sets < 1:
        raise InvariantViolation("runs and demand_sets must be at least 1")
    algos = list(dict.fromkeys(algos))
    for a in algos:
        if a not in ALGORITHMS:
            raise InvariantViolation(f"unknown algorithm {a!r}; expected one of {', '.join(ALGORITHMS)}")
    k = bundle.k
    dist = bundle.dist
    shared = None
    shared_digest = None
    if not independent_demand:
        shared, shared_digest = _realizations(bundle, seed, demand_sets, (rng.REALIZATION,))

    rows, records, placements = [], [], {}
    for algo in algos:
        start = time.perf_counter()
        n_runs = runs if algo in RANDOMIZED else 1
        run_ids = list(range(n_runs))
        tag = rng.ALGO_TAGS[algo]
        chosen = _map(lambda r: _place(bundle, algo, rng.derive_seed(seed, rng.PLACEMENT_RUN, tag, r), opts), run_ids, threads)
        digest = hashlib.sha256()
        run_means = []
        run_costs = []
        for r, s in zip(run_ids, chosen):
            if shared is None:
                xs, d = _realizations(bundle, seed, demand_sets, (rng.INDEPENDENT_REALIZATION, tag, r))
                digest.update(d.encode())
            else:
                xs = shared
            u = s.as_array()
            costs = _map(lambda x: matching_value(dist, u, x), xs, threads)
            run_costs.append(costs)
            run_means.append(math.fsum(costs) / (len(costs) * k))
            for j, c in enumerate(costs):
                records.append((algo, r, j, float(c), float(c) / k))
        placements[algo] = [list(s.counts) for s in chosen]
        if n_runs > 1:
            mean, ci = _mean_ci(run_means)
            basis = "runs"
        else:
            mean, ci = _mean_ci([c / k for c in run_costs[0]])
            basis = "realizations"
        rows.append(
            BenchRow(
                algo,
                n_runs,
                demand_sets,
                k,
                mean,
                ci,
                basis,
                min(run_means),
                time.perf_counter() - start if timing else None,
                shared_digest if shared is not None else digest.hexdigest(),
                tuple(run_means),
            )
        )
    return BenchReport(rows, records, int(seed), not independent_demand, shared_digest, {"placements": placements})


def ingest_trips(path, zone_count: int, column: str = "PULocationID", zone_map: dict | None = None) -> tuple[DemandDistribution, int]:
    """Empirical pickup distribution from a headered trip CSV.

    Zone ids are taken from ``column``. Without ``zone_map`` they must be
    integers in [0, zone_count); with it, raw ids are looked up as strings
    and mapped to dense indices. Returns the distribution and the trip count.
    """
    counts = np.zeros(int(zone_count), dtype=np.int64)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile(f"{path} is empty")
        if column not in reader.fieldnames:
            raise ParseError(f"column {column!r} not found in header", 1)
        for rec in reader:
            raw = (rec.get(column) or "").strip()
            line = reader.line_num
            if zone_map is not None:
                if raw not in zone_map:
                    raise UnknownZone(raw, line)
                z = int(zone_map[raw])
            else:
                try:
                    z = int(raw)
                except ValueError:
                    raise UnknownZone(raw, line) from None
            if not 0 <= z < zone_count:
                raise UnknownZone(raw, line)
            counts[z] += 1
    total = int(counts.sum())
    if total == 0:
        raise EmptyFile(f"{path} contains no trips")
    return make_distribution(counts / total), total


def load_zone_map(path) -> dict:
    """A JSON object mapping raw zone ids to dense indices."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("zone map must be a JSON object")
    return {str(key): int(v) for key, v in doc.items()}
