"""Command-line interface.

Results go to stdout (or ``--out``) as JSON. Domain errors exit with status 1
and a JSON error object on stderr; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench, instances
from .algorithms import rp_place, rrp_place, transport_for, tree_dp_solve, uckm_solve, vrrp_place
from .core.bundle import InstanceBundle, load_bundle, read_matrix_csv
from .core.metric import Placement, validate_metric
from .errors import InvalidMetric, ParseError, RobotaxiError
from .evaluation import exact_cost_enumeration, mc_cost, tree_exact_cost

log = logging.getLogger("robotaxi")


def _dump(doc, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _bundle(args) -> InstanceBundle:
    b = load_bundle(args.bundle)
    return b.with_k(args.k) if args.k is not None else b


def _placement(args, bundle: InstanceBundle) -> Placement:
    if args.counts is not None:
        try:
            counts = [int(x) for x in args.counts.split(",")]
        except ValueError:
            raise ParseError("--counts must be comma-separated integers") from None
        return Placement(tuple(counts))
    doc = json.loads(Path(args.placement).read_text())
    if isinstance(doc, dict) and "counts" in doc:
        return Placement(tuple(doc["counts"]))
    if isinstance(doc, dict) and "points" in doc:
        return Placement.from_points(doc["points"], bundle.n)
    raise ParseError("placement file needs a 'counts' or 'points' field")


def cmd_validate(args) -> dict:
    path = Path(args.path)
    if path.suffix.lower() == ".csv":
        space = validate_metric(read_matrix_csv(path))
        return {"status": "valid metric", "n": space.n}
    b = load_bundle(path)
    return {"status": "valid metric", "n": b.n, "k": b.k, "tree": b.tree is not None}


def cmd_gen(args) -> dict:
    if args.kind == "star":
        b = instances.gen_star(args.n, args.k or 1)
    elif args.kind == "coverage":
        if args.cover is not None:
            cov = instances.load_coverage(args.cover)
        else:
            cov = instances.gen_full_cover_system(args.N, args.l, args.epsilon, args.decoys, args.seed)
        if args.cover_out is not None:
            Path(args.cover_out).write_text(json.dumps(cov.to_dict()) + "\n")
        b = instances.gen_coverage_reduction(cov)
        ref = instances.full_cover_bounds(cov.l, cov.epsilon)
        log.info("reference costs: %s", json.dumps(ref, sort_keys=True))
    elif args.kind == "euclidean":
        b = instances.random_euclidean_bundle(args.n, args.k or 1, args.seed, args.concentration)
    else:
        b = instances.random_tree_bundle(args.n, args.k or 1, args.seed, args.concentration)
    return b.to_dict()


def cmd_place(args) -> dict:
    b = _bundle(args)
    out = {"algo": args.algo, "k": b.k, "seed": args.seed}
    if args.algo == "rp":
        s = rp_place(b.demand, b.k, args.seed)
    elif args.algo == "vrrp":
        s = vrrp_place(b.demand, b.k, args.seed)
    elif args.algo == "rrp":
        allowable = None
        if args.allowable is not None:
            allowable = [int(x) for x in args.allowable.split(",") if x.strip()]
        s = rrp_place(b, args.seed, allowable)
    elif args.algo == "tree-dp":
        if b.tree is None:
            raise ParseError("tree-dp needs a bundle with a 'tree' field")
        s, cost, _ = tree_dp_solve(b.tree, b.k)
        out["cost"] = cost
        out["per_rider_cost"] = cost / b.k
    else:
        sol = uckm_solve(b.metric, b.demand, b.k, args.gap, args.time_limit_s, args.method)
        s = sol.placement
        out.update(sol.to_dict())
    out["counts"] = list(s.counts)
    if args.dump_plan is not None:
        plan = transport_for(b.metric, b.demand, s.as_array())
        Path(args.dump_plan).write_text(json.dumps(plan.to_dict()) + "\n")
    return out


def cmd_evaluate(args) -> dict:
    b = _bundle(args)
    s = _placement(args, b)
    out = {"counts": list(s.counts), "k": b.k}
    if args.mc is not None:
        est = mc_cost(b, s, args.mc, args.seed, args.threads)
        out.update(est.to_dict())
        out["method"] = "mc"
    else:
        if args.tree_exact:
            if b.tree is None:
                raise ParseError("--tree-exact needs a bundle with a 'tree' field")
            value = tree_exact_cost(b.tree, s, b.k)
            out["method"] = "tree-exact"
        else:
            value = exact_cost_enumeration(b, s)
            out["method"] = "exact"
        out["mean"] = value
        out["per_rider_mean"] = value / b.k
    return out


def cmd_bench(args) -> dict:
    b = _bundle(args)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    opts = {"gap": args.gap, "time_limit": args.time_limit_s, "method": args.method}
    if args.fixed is not None:
        opts["fixed"] = _placement(argparse.Namespace(counts=None, placement=args.fixed), b)
    report = bench.run_bench(
        b,
        algos,
        runs=args.runs,
        demand_sets=args.demand_sets,
        seed=args.seed,
        threads=args.threads,
        independent_demand=args.independent_demand,
        timing=not args.no_timing,
        **opts,
    )
    if args.csv is not None:
        report.write_csv(args.csv)
    return report.to_dict()


def cmd_ingest(args) -> dict:
    zone_map = bench.load_zone_map(args.zone_map) if args.zone_map else None
    demand, trips = bench.ingest_trips(args.trips, args.zones, args.column, zone_map)
    return {"n": demand.n, "trips": trips, "probs": demand.probs.tolist()}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    common.add_argument("--k", type=int, default=None, help="fleet size; overrides the bundle's k")
    common.add_argument("--out", default=None, help="write the JSON result here instead of stdout")
    common.add_argument("--csv", default=None, help="write per-realization records here (bench)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on this")
    common.add_argument("--quiet", action="store_true", help="suppress solver log lines")

    p = argparse.ArgumentParser(prog="robotaxi", description="Robotaxi placement toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check a bundle or a CSV distance matrix")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen", parents=[common], help="generate an instance bundle")
    g.add_argument("kind", choices=["star", "coverage", "euclidean", "tree"])
    g.add_argument("--n", type=int, default=10, help="point count (star, euclidean, tree)")
    g.add_argument("--N", type=int, default=4, help="universe size (coverage)")
    g.add_argument("--l", type=int, default=2, help="cover budget, also k (coverage)")
    g.add_argument("--epsilon", type=float, default=instances.DEFAULT_EPSILON, help="gadget gap (coverage)")
    g.add_argument("--decoys", type=int, default=0, help="extra random sets (coverage)")
    g.add_argument("--cover", default=None, help="coverage instance JSON to reduce instead of a full cover")
    g.add_argument("--cover-out", default=None, help="also write the coverage instance JSON here")
    g.add_argument("--concentration", type=float, default=1.0, help="Dirichlet concentration (euclidean, tree)")
    g.set_defaults(func=cmd_gen)

    pl = sub.add_parser("place", parents=[common], help="compute a placement")
    pl.add_argument("algo", choices=["rp", "vrrp", "rrp", "tree-dp", "uckm"])
    pl.add_argument("bundle")
    pl.add_argument("--allowable", default=None, help="comma-separated allowable point ids (rrp)")
    pl.add_argument("--gap", type=float, default=0.0, help="relative optimality gap (uckm)")
    pl.add_argument("--time-limit-s", type=float, default=None, help="solver time limit in seconds (uckm)")
    pl.add_argument("--method", choices=["highs", "bnb"], default="highs", help="uckm backend")
    pl.add_argument("--dump-plan", default=None, help="write the transport plan to the demand as JSON")
    pl.set_defaults(func=cmd_place)

    ev = sub.add_parser("evaluate", parents=[common], help="expected cost of a placement")
    ev.add_argument("bundle")
    src = ev.add_mutually_exclusive_group(required=True)
    src.add_argument("--placement", help="JSON file with 'counts' or 'points'")
    src.add_argument("--counts", help="comma-separated counts")
    mode = ev.add_mutually_exclusive_group(required=True)
    mode.add_argument("--mc", type=int, metavar="N", help="Monte Carlo with N samples")
    mode.add_argument("--exact", action="store_true", help="enumerate every demand realization")
    mode.add_argument("--tree-exact", action="store_true", help="closed form on a tree bundle")
    ev.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", parents=[common], help="run the benchmark protocol")
    b.add_argument("bundle")
    b.add_argument("--algos", default="rp,vrrp,uckm", help="comma-separated algorithms")
    b.add_argument("--runs", type=int, default=20, help="runs per randomized algorithm (R)")
    b.add_argument("--demand-sets", type=int, default=100, help="demand realizations per run (M)")
    b.add_argument("--independent-demand", action="store_true", help="fresh realizations for every run")
    b.add_argument("--fixed", default=None, help="placement JSON scored as algorithm 'fixed'")
    b.add_argument("--gap", type=float, default=0.0)
    b.add_argument("--time-limit-s", type=float, default=None)
    b.add_argument("--method", choices=["highs", "bnb"], default="highs")
    b.add_argument("--no-timing", action="store_true", help="omit wall times so output is byte-reproducible")
    b.set_defaults(func=cmd_bench)

    ing = sub.add_parser("ingest", parents=[common], help="demand distribution from a trip CSV")
    ing.add_argument("trips")
    ing.add_argument("--zones", type=int, required=True, help="number of zones n")
    ing.add_argument("--column", default="PULocationID")
    ing.add_argument("--zone-map", default=None, help="JSON object mapping raw zone ids to 0..n-1")
    ing.set_defaults(func=cmd_ingest)
    return p


def _error_doc(exc: Exception) -> dict:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError) and exc.line is not None:
        doc["line"] = exc.line
    if isinstance(exc, InvalidMetric):
        doc["violations"] = [
            {"kind": v.kind, "indices": list(v.indices), "slack": v.slack} for v in exc.violations
        ]
    return doc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    log.propagate = False
    try:
        doc = args.func(args)
    except (RobotaxiError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps(_error_doc(exc)) + "\n")
        return 1
    finally:
        log.removeHandler(handler)
    _dump(doc, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
