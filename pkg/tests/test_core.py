import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robotaxi.core import (
    InstanceBundle,
    Placement,
    binarize_tree,
    load_bundle,
    make_distribution,
    save_bundle,
    subtree_masses,
    validate_metric,
)
from robotaxi.errors import (
    CyclicInput,
    DimensionMismatch,
    DisconnectedInput,
    InvalidMetric,
    InvariantViolation,
    NegativeEdgeCost,
    NonSquare,
    ParseError,
)
from robotaxi.instances import full_cover_bounds, gen_coverage_reduction, gen_full_cover_system

from .helpers import random_metric


def kinds(exc):
    return [v.kind for v in exc.value.violations]


def test_two_point_metric_is_valid():
    assert validate_metric([[0, 1], [1, 0]]).n == 2


def test_triangle_violation_reports_triple_and_slack():
    with pytest.raises(InvalidMetric) as exc:
        validate_metric([[0, 1, 1], [1, 0, 3], [1, 3, 0]])
    (v,) = exc.value.violations
    assert v.kind == "TriangleViolation"
    assert v.indices == (1, 0, 2)
    assert v.slack == pytest.approx(1.0)


def test_every_axiom_violation_is_listed():
    with pytest.raises(InvalidMetric) as exc:
        validate_metric([[0, -1, 2], [1, 1, 2], [2, 2, 0]])
    found = kinds(exc)
    assert "NegativeEntry" in found
    assert "NonzeroDiagonal" in found
    assert "AsymmetricPair" in found


@pytest.mark.parametrize("bad", [[[0, 1, 2], [1, 0, 2]], [0, 1], [[]]])
def test_non_square_rejected(bad):
    with pytest.raises(NonSquare):
        validate_metric(bad)


def test_non_finite_rejected():
    with pytest.raises(InvalidMetric) as exc:
        validate_metric([[0, np.inf], [np.inf, 0]])
    assert set(kinds(exc)) == {"NonFinite"}


def test_triangle_tolerance_is_relative_to_max_entry():
    d = np.array([[0, 1, 1], [1, 0, 2 + 1e-10], [1, 2 + 1e-10, 0]])
    validate_metric(d)
    d[1, 2] = d[2, 1] = 2 + 1e-6
    with pytest.raises(InvalidMetric):
        validate_metric(d)


@pytest.mark.parametrize("eps", [1e-6, 0.05, 0.06, 0.5, 1.0])
def test_coverage_gadget_is_a_metric(eps):
    cov = gen_full_cover_system(6, 3, eps, decoys=3, seed=1)
    bundle = gen_coverage_reduction(cov)
    validate_metric(bundle.dist)


def test_binarize_identity_on_binary_tree():
    t = binarize_tree([-1, 0, 0], [0, 1, 2], [0, 0.5, 0.5])
    assert t.n_nodes == 3
    assert sorted([t.left[0], t.right[0]]) == [1, 2]
    np.testing.assert_array_equal(t.metric().dist, [[0, 1, 2], [1, 0, 3], [2, 3, 0]])


def tree_distances(parent, cost):
    """All-pairs distances of a general rooted tree by walking to the root."""
    n = len(parent)
    depth = [0.0] * n
    anc = []
    for u in range(n):
        path = [u]
        while parent[path[-1]] >= 0:
            path.append(parent[path[-1]])
        anc.append(path)
        depth[u] = math.fsum(cost[v] for v in path[:-1])
    d = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            common = next(a for a in anc[u] if a in anc[v])
            d[u, v] = depth[u] + depth[v] - 2 * depth[common]
    return d


def test_binarize_star_preserves_distances():
    parent = [-1, 0, 0, 0, 0]
    cost = [0, 1, 2, 3, 4]
    t = binarize_tree(parent, cost, [0, 0.25, 0.25, 0.25, 0.25])
    assert all((t.left[u] < 0) == (t.right[u] < 0) for u in range(t.n_nodes))
    np.testing.assert_array_equal(t.metric().dist, tree_distances(parent, cost))
    assert np.all(t.probs[5:] == 0)


def test_binarize_single_edge_adds_zero_sibling():
    t = binarize_tree([-1, 0], [0, 2.5], [0.3, 0.7])
    assert t.n_nodes == 3
    extra = 2
    assert t.parent[extra] == 0 and t.edge_cost[extra] == 0 and t.probs[extra] == 0
    assert t.is_leaf(extra)
    np.testing.assert_array_equal(t.metric().dist, [[0, 2.5], [2.5, 0]])


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10_000))
def test_binarize_preserves_distances_random(n, seed):
    g = np.random.default_rng(seed)
    parent = [-1] + [int(g.integers(0, i)) for i in range(1, n)]
    cost = [0.0] + g.integers(0, 4, size=n - 1).astype(float).tolist()
    t = binarize_tree(parent, cost, g.dirichlet(np.ones(n)))
    np.testing.assert_allclose(t.metric().dist, tree_distances(parent, cost), rtol=1e-12, atol=0)
    assert subtree_masses(t)[t.root] == pytest.approx(1.0, abs=1e-9)


def test_binarize_errors():
    with pytest.raises(CyclicInput):
        binarize_tree([1, 2, 0], [0, 1, 1], [0.2, 0.3, 0.5])
    with pytest.raises(DisconnectedInput):
        binarize_tree([-1, -1], [0, 0], [0.5, 0.5])
    with pytest.raises(NegativeEdgeCost):
        binarize_tree([-1, 0], [0, -1], [0.5, 0.5])
    with pytest.raises(CyclicInput):
        binarize_tree([-1, 2, 1], [0, 1, 1], [0.2, 0.3, 0.5])


def test_subtree_masses_examples():
    t = binarize_tree([-1, 0, 0], [0, 1, 1], [0, 0.5, 0.5])
    np.testing.assert_allclose(subtree_masses(t), [1.0, 0.5, 0.5])
    t = binarize_tree([-1, 0, 0], [0, 1, 1], [1.0, 0.0, 0.0])
    assert subtree_masses(t)[1] == 0
    t = binarize_tree([-1, 0, 1], [0, 1, 1], [0.2, 0.3, 0.5])
    np.testing.assert_allclose(subtree_masses(t)[:3], [1.0, 0.8, 0.5])


def test_subtree_masses_match_dfs_enumeration(gen):
    for _ in range(30):
        n = int(gen.integers(2, 15))
        parent = [-1] + [int(gen.integers(0, i)) for i in range(1, n)]
        t = binarize_tree(parent, np.ones(n), gen.dirichlet(np.ones(n)))
        for u in range(t.n_nodes):
            stack, total = [u], []
            while stack:
                v = stack.pop()
                total.append(t.probs[v])
                if not t.is_leaf(v):
                    stack += [t.left[v], t.right[v]]
            assert t.subtree_mass[u] == pytest.approx(math.fsum(total), abs=1e-12)


def test_bundle_round_trip_is_bit_identical(tmp_path, gen):
    d = random_metric(gen, 7, "euclid")
    b = InstanceBundle.from_arrays(d, gen.dirichlet(np.ones(7)), 3, allowable=[1, 4], labels=list("abcdefg"))
    path = tmp_path / "b.json"
    save_bundle(b, path)
    back = load_bundle(path)
    assert back.dist.tobytes() == b.dist.tobytes()
    assert back.probs.tobytes() == b.probs.tobytes()
    assert (back.k, back.allowable, back.metric.labels) == (3, (1, 4), tuple("abcdefg"))


def test_tree_bundle_round_trip(tmp_path):
    b = InstanceBundle.from_tree([-1, 0, 0, 1], [0, 1, 2, 3], [0.1, 0.2, 0.3, 0.4], 2)
    save_bundle(b, tmp_path / "t.json")
    back = load_bundle(tmp_path / "t.json")
    assert back.tree is not None
    assert back.dist.tobytes() == b.dist.tobytes()


def write(tmp_path, doc):
    p = tmp_path / "x.json"
    p.write_text(json.dumps(doc))
    return p


def test_load_rejects_bad_probability_sum(tmp_path):
    with pytest.raises(InvariantViolation):
        load_bundle(write(tmp_path, {"n": 2, "k": 1, "dist": [[0, 1], [1, 0]], "probs": [0.5, 0.4]}))


def test_load_rejects_zero_k(tmp_path):
    with pytest.raises(InvariantViolation):
        load_bundle(write(tmp_path, {"n": 2, "k": 0, "dist": [[0, 1], [1, 0]], "probs": [0.5, 0.5]}))


def test_load_dimension_mismatch(tmp_path):
    with pytest.raises(DimensionMismatch):
        load_bundle(write(tmp_path, {"n": 3, "k": 1, "dist": [[0, 1], [1, 0]], "probs": [0.5, 0.5]}))


def test_load_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "k": 1,\n "probs": [0.5, 0.5\n}')
    with pytest.raises(ParseError) as exc:
        load_bundle(p)
    assert exc.value.line is not None


def test_dist_file_is_resolved_relative_to_bundle(tmp_path):
    (tmp_path / "m.csv").write_text("0,2\n2,0\n")
    b = load_bundle(write(tmp_path, {"k": 1, "dist_file": "m.csv", "probs": [0.25, 0.75]}))
    assert b.dist[0, 1] == 2


def test_probabilities_normalized_within_tolerance():
    p = make_distribution([0.5, 0.5 + 5e-7])
    assert abs(p.probs.sum() - 1) < 1e-12
    with pytest.raises(InvariantViolation):
        make_distribution([0.5, 0.5 + 1e-5])


def test_placement_helpers():
    s = Placement.from_points([2, 0, 2], 4)
    assert s.counts == (1, 0, 2, 0) and s.k == 3
    np.testing.assert_array_equal(s.points(), [0, 2, 2])
    with pytest.raises(InvariantViolation):
        Placement((1, -1))


def test_reference_bounds():
    ref = full_cover_bounds(5, 0.05)
    assert ref["full_cover_upper"] == pytest.approx(5 * (1 + 0.8**5))
    assert ref["full_cover_upper_limit"] == pytest.approx(5 * (1 + 1 / math.e))
