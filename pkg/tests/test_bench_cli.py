import csv
import json
import math

import numpy as np
import pytest

from robotaxi import cli
from robotaxi.algorithms import tree_dp_solve
from robotaxi.bench import ingest_trips, run_bench
from robotaxi.core import InstanceBundle, Placement, load_bundle, save_bundle
from robotaxi.errors import EmptyFile, UnknownZone
from robotaxi.instances import gen_star, random_euclidean_bundle


def write_trips(path, zones, column="PULocationID"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trip_id", column])
        for i, z in enumerate(zones):
            w.writerow([i, z])
    return path


def test_ingest_counts(tmp_path):
    d, trips = ingest_trips(write_trips(tmp_path / "t.csv", [0, 0, 1, 2]), 3)
    np.testing.assert_allclose(d.probs, [0.5, 0.25, 0.25])
    assert trips == 4
    d, _ = ingest_trips(write_trips(tmp_path / "t.csv", [1, 1, 1]), 3)
    np.testing.assert_array_equal(d.probs, [0, 1, 0])


def test_ingest_errors(tmp_path):
    with pytest.raises(UnknownZone) as exc:
        ingest_trips(write_trips(tmp_path / "t.csv", [0, 3, 1]), 3)
    assert exc.value.line == 3
    with pytest.raises(EmptyFile):
        ingest_trips(write_trips(tmp_path / "e.csv", []), 3)
    (tmp_path / "blank.csv").write_text("")
    with pytest.raises(EmptyFile):
        ingest_trips(tmp_path / "blank.csv", 3)


def test_ingest_zone_map(tmp_path):
    path = write_trips(tmp_path / "t.csv", [132, 132, 7], column="zone")
    d, _ = ingest_trips(path, 2, column="zone", zone_map={"7": 0, "132": 1})
    np.testing.assert_allclose(d.probs, [1 / 3, 2 / 3])
    with pytest.raises(UnknownZone):
        ingest_trips(path, 2, column="zone", zone_map={"7": 0})


def test_bench_fixed_star_center():
    b = gen_star(10, 4)
    center = Placement((4,) + (0,) * 9)
    rep = run_bench(b, ["fixed"], runs=5, demand_sets=30, seed=1, fixed=center)
    row = rep.row("fixed")
    assert row.mean_eta == 1.0 and row.ci95 == 0 and row.runs == 1


def test_bench_vrrp_integral_is_deterministic():
    b = InstanceBundle.from_arrays(np.ones((4, 4)) - np.eye(4), [0.25] * 4, 8)
    rep = run_bench(b, ["rp", "vrrp"], runs=6, demand_sets=20, seed=2)
    assert rep.row("vrrp").ci95 == 0
    assert rep.row("rp").ci95 > 0


def test_bench_rows_recompute_from_records():
    b = random_euclidean_bundle(8, 6, seed=3, concentration=0.5)
    rep = run_bench(b, ["rp", "vrrp", "uckm"], runs=4, demand_sets=15, seed=4)
    for row in rep.rows:
        recs = [r for r in rep.records if r[0] == row.algo]
        assert len(recs) == row.runs * row.demand_sets
        assert all(r[4] == pytest.approx(r[3] / b.k, rel=1e-15) for r in recs)
        means = [
            math.fsum(r[4] for r in recs if r[1] == run) / row.demand_sets for run in range(row.runs)
        ]
        assert row.min_eta == pytest.approx(min(means), rel=1e-9)
        if row.ci_basis == "runs":
            m = np.mean(means)
            assert row.mean_eta == pytest.approx(m, rel=1e-9)
            assert row.ci95 == pytest.approx(1.96 * np.std(means, ddof=1) / math.sqrt(row.runs), rel=1e-9)
        else:
            etas = [r[4] for r in recs]
            assert row.mean_eta == pytest.approx(np.mean(etas), rel=1e-9)
            assert row.ci95 == pytest.approx(1.96 * np.std(etas, ddof=1) / math.sqrt(len(etas)), rel=1e-9)


def test_bench_common_random_numbers():
    b = random_euclidean_bundle(6, 4, seed=5)
    shared = run_bench(b, ["rp", "vrrp"], runs=2, demand_sets=10, seed=6)
    assert len({r.realization_digest for r in shared.rows}) == 1
    assert shared.realization_digest == shared.rows[0].realization_digest
    indep = run_bench(b, ["rp", "vrrp"], runs=2, demand_sets=10, seed=6, independent_demand=True)
    assert len({r.realization_digest for r in indep.rows}) == 2
    assert indep.realization_digest is None


def test_bench_thread_count_does_not_change_results():
    b = random_euclidean_bundle(10, 7, seed=8, concentration=0.4)
    a = run_bench(b, ["rp", "vrrp", "rrp"], runs=3, demand_sets=12, seed=9, timing=False)
    c = run_bench(b, ["rp", "vrrp", "rrp"], runs=3, demand_sets=12, seed=9, timing=False, threads=4)
    assert json.dumps(a.to_dict()) == json.dumps(c.to_dict())


# CLI ------------------------------------------------------------------------

def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_cli_validate_gadget(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert run(["gen", "coverage", "--N", "4", "--l", "2", "--out", str(out)], capsys)[0] == 0
    code, text, _ = run(["validate", str(out)], capsys)
    assert code == 0 and json.loads(text)["status"] == "valid metric"


def test_cli_validate_reports_violations(tmp_path, capsys):
    (tmp_path / "m.csv").write_text("0,1,1\n1,0,3\n1,3,0\n")
    code, _, err = run(["validate", str(tmp_path / "m.csv")], capsys)
    assert code == 1
    doc = json.loads(err.strip().splitlines()[-1])
    assert doc["error"] == "InvalidMetric"
    assert doc["violations"][0]["indices"] == [1, 0, 2]


def test_cli_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["place", "nope", "x.json"])
    assert exc.value.code == 2


def test_cli_place_tree_dp_passes_through(tmp_path, capsys):
    path = tmp_path / "t.json"
    assert run(["gen", "tree", "--n", "7", "--k", "3", "--seed", "4", "--out", str(path)], capsys)[0] == 0
    code, text, _ = run(["place", "tree-dp", str(path)], capsys)
    doc = json.loads(text)
    b = load_bundle(path)
    s, cost, _ = tree_dp_solve(b.tree, 3)
    assert code == 0 and doc["cost"] == cost and doc["counts"] == list(s.counts)


def test_cli_place_uckm_with_plan(tmp_path, capsys):
    path = tmp_path / "e.json"
    run(["gen", "euclidean", "--n", "6", "--k", "4", "--out", str(path)], capsys)
    plan = tmp_path / "plan.json"
    code, text, err = run(["place", "uckm", str(path), "--dump-plan", str(plan)], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["status"] == "Optimal" and sum(doc["counts"]) == 4
    assert json.loads(plan.read_text())["total_cost"] == pytest.approx(doc["objective"])
    assert "incumbent=" in err


def test_cli_evaluate_exact_vs_mc(tmp_path, capsys):
    path = tmp_path / "e.json"
    run(["gen", "euclidean", "--n", "5", "--k", "3", "--seed", "2", "--out", str(path)], capsys)
    exact = json.loads(run(["evaluate", str(path), "--counts", "1,0,2,0,0", "--exact"], capsys)[1])
    mc = json.loads(run(["evaluate", str(path), "--counts", "1,0,2,0,0", "--mc", "3000"], capsys)[1])
    assert abs(exact["mean"] - mc["mean"]) <= 4 * mc["stderr"]
    assert exact["per_rider_mean"] == pytest.approx(exact["mean"] / 3)


def test_cli_evaluate_k_mismatch_is_domain_error(tmp_path, capsys):
    path = tmp_path / "e.json"
    run(["gen", "euclidean", "--n", "3", "--k", "2", "--out", str(path)], capsys)
    code, _, err = run(["evaluate", str(path), "--counts", "1,1,1", "--mc", "10"], capsys)
    assert code == 1 and json.loads(err)["error"] == "KMismatch"


def test_cli_bench_writes_csv(tmp_path, capsys):
    path = tmp_path / "s.json"
    save_bundle(gen_star(6, 2), path)
    (tmp_path / "c.json").write_text(json.dumps({"counts": [2, 0, 0, 0, 0, 0]}))
    out_csv = tmp_path / "r.csv"
    code, text, _ = run(
        ["bench", str(path), "--algos", "rp,fixed", "--fixed", str(tmp_path / "c.json"), "--runs", "3",
         "--demand-sets", "5", "--csv", str(out_csv), "--no-timing"],
        capsys,
    )
    assert code == 0
    rows = list(csv.DictReader(open(out_csv)))
    assert list(rows[0]) == ["algo", "run", "realization", "total_cost", "per_rider_eta"]
    assert len(rows) == 3 * 5 + 5
    doc = json.loads(text)
    fixed = next(r for r in doc["rows"] if r["algo"] == "fixed")
    assert fixed["mean_per_rider_eta"] == 1.0 and fixed["wall_time_s"] is None


def test_cli_ingest(tmp_path, capsys):
    path = write_trips(tmp_path / "t.csv", [0, 0, 1, 2])
    code, text, _ = run(["ingest", str(path), "--zones", "3"], capsys)
    assert code == 0 and json.loads(text)["probs"] == [0.5, 0.25, 0.25]
    code, _, err = run(["ingest", str(path), "--zones", "2"], capsys)
    assert code == 1 and json.loads(err)["error"] == "UnknownZone" and json.loads(err)["line"] == 5
