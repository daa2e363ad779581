import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from robotaxi.core import InstanceBundle, Placement, make_distribution, validate_metric


def random_metric(gen: np.random.Generator, n: int, kind: str | None = None) -> np.ndarray:
    """Euclidean points, or shortest paths over random integer weights (many ties)."""
    kind = kind or ("euclid" if gen.random() < 0.5 else "graph")
    if kind == "euclid":
        x = gen.random((n, 2))
        return cdist(x, x)
    w = gen.integers(1, 6, size=(n, n)).astype(float)
    w = np.triu(w, 1)
    w = w + w.T
    return shortest_path(w, directed=False)


def random_probs(gen: np.random.Generator, n: int, zeros: bool = True) -> np.ndarray:
    p = gen.dirichlet(np.ones(n))
    if zeros and n > 1 and gen.random() < 0.3:
        p[gen.integers(n)] = 0.0
        p /= p.sum()
    return p


def random_placement(gen: np.random.Generator, n: int, k: int) -> Placement:
    return Placement.from_points(gen.integers(0, n, size=k), n)


def random_bundle(gen: np.random.Generator, n: int, k: int, **kw) -> InstanceBundle:
    return InstanceBundle(validate_metric(random_metric(gen, n)), make_distribution(random_probs(gen, n)), k, **kw)


def line_space(points=(0, 1, 3)):
    x = np.asarray(points, dtype=float)
    return validate_metric(np.abs(x[:, None] - x[None, :]))
