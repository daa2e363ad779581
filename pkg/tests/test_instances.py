import json
import math
import warnings

import numpy as np
import pytest

from robotaxi.core import Placement, validate_metric
from robotaxi.errors import BadDimensions, InvariantViolation, NotDivisible, OutOfRange
from robotaxi.evaluation import all_placements, exact_cost_enumeration, mc_cost, tree_exact_cost
from robotaxi.instances import (
    CoverageInstance,
    gen_coverage_reduction,
    gen_full_cover_system,
    gen_random_distribution,
    gen_random_euclidean,
    gen_random_tree,
    gen_star,
    load_coverage,
    star_support_bound,
)


def test_star_small_example():
    b = gen_star(3, 1)
    np.testing.assert_array_equal(b.dist, [[0, 1, 1], [1, 0, 2], [1, 2, 0]])
    np.testing.assert_array_equal(b.probs, [0, 0.5, 0.5])
    assert b.tree is not None


def test_star_rejects_tiny_n():
    with pytest.raises(BadDimensions):
        gen_star(2, 1)


@pytest.mark.parametrize("n,k", [(5, 1), (6, 2), (8, 3), (12, 2)])
def test_star_center_exact_cost_is_k_and_support_placements_respect_bound(n, k):
    b = gen_star(n, k)
    center = Placement((k,) + (0,) * (n - 1))
    assert exact_cost_enumeration(b, center) == pytest.approx(k)
    assert tree_exact_cost(b.tree, center, k) == pytest.approx(k)
    bound = star_support_bound(n, k)
    for s in all_placements(n - 1, k):
        cost = exact_cost_enumeration(b, Placement((0,) + s.counts))
        assert cost >= bound - 1e-12


def test_coverage_distance_table():
    with pytest.warns(UserWarning):
        cov = CoverageInstance(4, 2, ((0, 1), (2, 3)), 0.05)
    b = gen_coverage_reduction(cov)
    assert b.n == 6 and b.k == 2
    e0, s0, s1 = 0, 4, 5
    assert b.dist[e0, s0] == 1
    assert b.dist[e0, s1] == pytest.approx(1.95)
    assert b.dist[0, 1] == 2
    assert b.dist[s0, s1] == 1
    np.testing.assert_array_equal(b.probs, [0.25] * 4 + [0, 0])


def test_coverage_categories_on_random_system():
    cov = gen_full_cover_system(12, 3, 0.06, decoys=4, seed=3)
    b = gen_coverage_reduction(cov)
    N = cov.N
    for i in range(b.n):
        for j in range(b.n):
            if i == j:
                expect = 0.0
            elif i < N and j < N:
                expect = 2.0
            elif i >= N and j >= N:
                expect = 1.0
            else:
                e, s = (i, j - N) if i < N else (j, i - N)
                expect = 1.0 if e in cov.sets[s] else 2.0 - cov.epsilon
            assert b.dist[i, j] == expect


def test_optimal_reduction_placements_use_only_set_points():
    cov = gen_full_cover_system(4, 2, 0.05)
    b = gen_coverage_reduction(cov)
    costs = {s: exact_cost_enumeration(b, s) for s in all_placements(b.n, b.k)}
    best = min(costs.values())
    optimal = [s for s, c in costs.items() if c <= best + 1e-12]
    assert optimal and all(sum(s.counts[: cov.N]) == 0 for s in optimal)
    # moving a unit off an element point to some set point always helps
    for s, c in costs.items():
        for e in range(cov.N):
            if s.counts[e]:
                moved = []
                for t in range(cov.N, b.n):
                    counts = list(s.counts)
                    counts[e] -= 1
                    counts[t] += 1
                    moved.append(costs[Placement(tuple(counts))])
                assert min(moved) < c


def test_full_cover_system():
    cov = gen_full_cover_system(4, 2)
    assert cov.sets == ((0, 1), (2, 3))
    assert cov.epsilon == 1.0  # raised to 2l/N
    with pytest.raises(NotDivisible):
        gen_full_cover_system(5, 2)
    assert gen_full_cover_system(100, 2, 0.05).epsilon == 0.05
    decoy = gen_full_cover_system(10, 2, decoys=3, seed=1)
    assert len(decoy.sets) == 5 and all(len(s) == 5 for s in decoy.sets)


def test_full_cover_placement_meets_upper_bounds():
    cov = gen_full_cover_system(12, 3)
    b = gen_coverage_reduction(cov)
    s = Placement((0,) * 12 + (1, 1, 1))
    est = mc_cost(b, s, 4000, seed=2)
    assert est.mean <= 3 * (1 + (1 - 1 / 3) ** 3) + 3 * est.std_error
    assert est.mean <= 3 * (1 + 1 / math.e) + 3 * est.std_error


def test_coverage_instance_validation(tmp_path):
    with pytest.raises(NotDivisible):
        CoverageInstance(5, 2, ((0, 1),), 0.5)
    with pytest.raises(InvariantViolation):
        CoverageInstance(4, 2, ((0, 1, 2),), 0.5)
    with pytest.raises(OutOfRange):
        CoverageInstance(4, 2, ((0, 7),), 0.5)
    with pytest.raises(OutOfRange):
        CoverageInstance(4, 2, ((0, 1),), 1.5)
    with pytest.warns(UserWarning):
        CoverageInstance(4, 2, ((0, 1),), 0.05)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cov = CoverageInstance(100, 2, (tuple(range(50)),), 0.05)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cov.to_dict()))
    assert load_coverage(p) == cov


def test_random_euclidean_is_valid():
    for seed in range(100):
        validate_metric(gen_random_euclidean(int(3 + seed % 20), seed).dist)


def test_random_tree_invariants():
    for seed in range(100):
        t = gen_random_tree(int(2 + seed % 15), seed)
        assert all((t.left[u] < 0) == (t.right[u] < 0) for u in range(t.n_nodes))
        assert t.subtree_mass[t.root] == pytest.approx(1.0, abs=1e-9)
        assert np.all(t.edge_cost >= 0)
        real = t.edge_cost[: t.n_original][t.parent[: t.n_original] >= 0]
        assert np.all((real > 0) & (real <= 1))


def test_distribution_concentration_flattens():
    n = 20
    dev = [
        np.mean([np.abs(gen_random_distribution(n, s, c).probs - 1 / n).max() for s in range(30)])
        for c in (0.5, 5.0, 500.0)
    ]
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] < 0.01
