"""Instance bundles and their JSON file format.

A bundle file is one JSON object::

    {"n": 3, "k": 2,
     "dist": [[0, 1, 1], [1, 0, 2], [1, 2, 0]],
     "probs": [0, 0.5, 0.5],
     "labels": ["C", "a", "b"],                      # optional
     "allowable": [0, 2],                            # optional
     "tree": {"parent": [-1, 0, 0],                  # optional
              "edge_cost": [0, 1, 1],
              "probs": [0, 0.5, 0.5]}}

``dist`` may be replaced by ``"dist_file": "matrix.csv"`` (headerless CSV,
resolved relative to the bundle file), or omitted when a tree is given.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch, InvariantViolation, OutOfRange, ParseError
from .metric import DemandDistribution, MetricSpace, make_distribution, validate_metric
from .tree import TreeMetric, binarize_tree


@dataclass(frozen=True, eq=False)
class InstanceBundle:
    metric: MetricSpace
    demand: DemandDistribution
    k: int
    allowable: tuple[int, ...] | None = None
    tree_parent: tuple[int, ...] | None = None
    tree_edge_cost: tuple[float, ...] | None = None

    def __post_init__(self):
        n = self.metric.n
        if self.demand.n != n:
            raise DimensionMismatch(f"demand has {self.demand.n} entries, metric has {n} points")
        if int(self.k) != self.k or self.k < 1:
            raise InvariantViolation(f"fleet size k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if self.allowable is not None:
            a = tuple(sorted({int(x) for x in self.allowable}))
            if any(not 0 <= x < n for x in a):
                raise OutOfRange("allowable point id outside [0, n)")
            object.__setattr__(self, "allowable", a)
        if (self.tree_parent is None) != (self.tree_edge_cost is None):
            raise InvariantViolation("tree needs both parent and edge_cost")
        if self.tree_parent is not None:
            if len(self.tree_parent) != n or len(self.tree_edge_cost) != n:
                raise DimensionMismatch("tree arrays must have one entry per point")
            object.__setattr__(self, "tree_parent", tuple(int(x) for x in self.tree_parent))
            object.__setattr__(self, "tree_edge_cost", tuple(float(x) for x in self.tree_edge_cost))

    @property
    def n(self) -> int:
        return self.metric.n

    @property
    def dist(self) -> np.ndarray:
        return self.metric.dist

    @property
    def probs(self) -> np.ndarray:
        return self.demand.probs

    @cached_property
    def tree(self) -> TreeMetric | None:
        if self.tree_parent is None:
            return None
        return binarize_tree(self.tree_parent, self.tree_edge_cost, self.demand.probs)

    def with_k(self, k: int) -> "InstanceBundle":
        return InstanceBundle(self.metric, self.demand, k, self.allowable, self.tree_parent, self.tree_edge_cost)

    @classmethod
    def from_arrays(cls, dist, probs, k: int, **kw) -> "InstanceBundle":
        """Validate raw arrays into a bundle."""
        return cls(validate_metric(dist, kw.pop("labels", None)), make_distribution(probs), k, **kw)

    @classmethod
    def from_tree(cls, parent, edge_cost, probs, k: int, **kw) -> "InstanceBundle":
        tree = binarize_tree(parent, edge_cost, probs)
        return cls(
            validate_metric(tree.metric().dist, kw.pop("labels", None)),
            make_distribution(probs),
            k,
            tree_parent=tuple(parent),
            tree_edge_cost=tuple(edge_cost),
            **kw,
        )

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "dist": self.metric.dist.tolist(),
            "probs": self.demand.probs.tolist(),
        }
        if self.metric.labels is not None:
            out["labels"] = list(self.metric.labels)
        if self.allowable is not None:
            out["allowable"] = list(self.allowable)
        if self.tree_parent is not None:
            out["tree"] = {
                "parent": list(self.tree_parent),
                "edge_cost": list(self.tree_edge_cost),
                "probs": self.demand.probs.tolist(),
            }
        return out


def bundle_from_dict(doc: dict, base_dir: Path | None = None) -> InstanceBundle:
    if not isinstance(doc, dict):
        raise ParseError("bundle must be a JSON object")
    try:
        k = doc["k"]
        probs = doc["probs"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(k, int) or isinstance(k, bool):
        raise InvariantViolation(f"k must be an integer, got {k!r}")
    tree = doc.get("tree")
    if "dist" in doc:
        dist = np.asarray(doc["dist"], dtype=float)
    elif "dist_file" in doc:
        path = Path(doc["dist_file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        dist = read_matrix_csv(path)
    elif tree is not None:
        dist = None
    else:
        raise ParseError("bundle needs one of 'dist', 'dist_file' or 'tree'")

    demand = make_distribution(probs)
    n = doc.get("n", demand.n)
    if n != demand.n:
        raise DimensionMismatch(f"n = {n} but probs has {demand.n} entries")
    parent = edge_cost = None
    if tree is not None:
        try:
            parent, edge_cost = tree["parent"], tree["edge_cost"]
        except (KeyError, TypeError):
            raise ParseError("tree needs 'parent' and 'edge_cost'") from None
        if "probs" in tree:
            tp = np.asarray(tree["probs"], dtype=float)
            if tp.shape != demand.probs.shape or np.max(np.abs(tp - demand.probs)) > 1e-9:
                raise InvariantViolation("tree probs disagree with bundle probs")
        tm = binarize_tree(parent, edge_cost, demand.probs)
        td = tm.metric().dist
        if dist is None:
            dist = td
        elif dist.shape != td.shape or not np.allclose(dist, td, rtol=1e-9, atol=0.0):
            raise InvariantViolation("dist disagrees with the tree's path lengths")
    if dist.ndim != 2 or dist.shape != (n, n):
        raise DimensionMismatch(f"dist has shape {dist.shape}, expected ({n}, {n})")
    metric = validate_metric(dist, doc.get("labels"))
    return InstanceBundle(metric, demand, k, doc.get("allowable"), parent, edge_cost)


def read_matrix_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise ParseError(f"non-numeric entry in {path}", lineno) from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DimensionMismatch(f"{path} is not an n x n matrix")
    return np.asarray(rows)


def load_bundle(path) -> InstanceBundle:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    return bundle_from_dict(doc, path.parent)


def save_bundle(bundle: InstanceBundle, path) -> None:
    Path(path).write_text(json.dumps(bundle.to_dict()) + "\n")
