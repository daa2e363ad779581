"""Min-cost transportation by successive shortest augmenting paths.

The network is bipartite: sources ``x`` with fixed supply, sinks ``y`` with
demand, and uncapacitated arcs ``x -> y`` of non-negative cost. Optionally a
flexible source ``F`` holds extra supply that it may route to any ``x`` up to a
per-source capacity; this is the shape of the capacitated k-median relaxation,
where each location's supply lies in an interval.

Shortest paths use Dijkstra on reduced costs ``c(u, v) + h(u) - h(v)`` with
node potentials ``h``; the graph is dense and small, so each Dijkstra scan is
a vectorized pass over one side of the bipartition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, Infeasible, InvariantViolation


@dataclass(frozen=True, eq=False)
class TransportResult:
    flow: np.ndarray  # (m, n) mass moved x -> y
    flex_flow: np.ndarray  # (m,) mass routed F -> x
    cost: float
    augmentations: int


def min_cost_transport(supply, demand, cost, flex_supply: float = 0.0, flex_cap=None, tol: float | None = None) -> TransportResult:
    """Solve ``min sum f[x, y] * cost[x, y]`` subject to supplies and demands.

    Source ``x`` ships exactly ``supply[x] + flex_flow[x]`` where
    ``0 <= flex_flow[x] <= flex_cap[x]`` and ``sum(flex_flow) == flex_supply``.
    Every sink receives exactly ``demand[y]``.
    """
    a = np.asarray(supply, dtype=float).ravel()
    b = np.asarray(demand, dtype=float).ravel()
    C = np.asarray(cost, dtype=float)
    m, n = a.size, b.size
    if C.shape != (m, n):
        raise DimensionMismatch(f"cost has shape {C.shape}, expected ({m}, {n})")
    if np.any(a < 0) or np.any(b < 0) or np.any(C < 0) or flex_supply < 0:
        raise InvariantViolation("supplies, demands and costs must be non-negative")
    cap = np.zeros(m) if flex_cap is None else np.asarray(flex_cap, dtype=float).ravel()
    total = float(b.sum())
    if tol is None:
        tol = 1e-12 * max(total, 1.0)
    if abs(a.sum() + flex_supply - total) > 1e-9 * max(total, 1.0):
        raise Infeasible(f"supply {a.sum() + flex_supply:.12g} differs from demand {total:.12g}")
    if flex_supply > cap.sum() + tol:
        raise Infeasible("flexible supply exceeds the total flex capacity")

    f = np.zeros((m, n))
    g = np.zeros(m)
    excess = a.copy()
    excess_f = float(flex_supply)
    deficit = b.copy()
    V = m + n + 1
    F = m + n
    h = np.zeros(V)
    X = slice(0, m)
    Y = slice(m, m + n)
    augmentations = 0

    while True:
        if not np.any(deficit > tol):
            break
        starts = np.flatnonzero(excess > tol)
        if starts.size == 0 and excess_f <= tol:
            break
        dist = np.full(V, np.inf)
        pred = np.full(V, -1, dtype=np.int64)
        dist[starts] = np.maximum(-h[starts], 0.0)
        if excess_f > tol:
            dist[F] = max(-h[F], 0.0)
        done = np.zeros(V, dtype=bool)
        target = -1
        while True:
            cand = np.where(done, np.inf, dist)
            v = int(np.argmin(cand))
            dv = cand[v]
            if not np.isfinite(dv):
                break
            done[v] = True
            if m <= v < m + n:
                y = v - m
                if deficit[y] > tol:
                    target = v
                    break
                xs = np.flatnonzero((f[:, y] > tol) & ~done[X])
                if xs.size:
                    nd = dv + np.maximum(h[v] - h[xs] - C[xs, y], 0.0)
                    better = nd < dist[xs]
                    dist[xs[better]] = nd[better]
                    pred[xs[better]] = v
            elif v < m:
                open_y = ~done[Y]
                nd = dv + np.maximum(C[v, :] + h[v] - h[Y], 0.0)
                better = open_y & (nd < dist[Y])
                idx = np.flatnonzero(better) + m
                dist[idx] = nd[better]
                pred[idx] = v
                if g[v] > tol and not done[F]:
                    ndf = dv + max(h[v] - h[F], 0.0)
                    if ndf < dist[F]:
                        dist[F] = ndf
                        pred[F] = v
            else:
                xs = np.flatnonzero((cap - g > tol) & ~done[X])
                if xs.size:
                    nd = dv + np.maximum(h[F] - h[xs], 0.0)
                    better = nd < dist[xs]
                    dist[xs[better]] = nd[better]
                    pred[xs[better]] = F
        if target < 0:
            raise Infeasible("no augmenting path to an unmet demand")

        D = dist[target]
        h += np.minimum(dist, D)

        path = [target]
        while pred[path[-1]] >= 0:
            path.append(int(pred[path[-1]]))
        path.reverse()
        start = path[0]
        delta = deficit[target - m]
        delta = min(delta, excess_f if start == F else excess[start])
        for u, w in zip(path, path[1:]):
            if u < m and m <= w < m + n:
                continue  # forward arc, uncapacitated
            if m <= u < m + n:
                delta = min(delta, f[w, u - m])
            elif u == F:
                delta = min(delta, cap[w] - g[w])
            else:  # x -> F cancels flex flow
                delta = min(delta, g[u])
        for u, w in zip(path, path[1:]):
            if u < m and m <= w < m + n:
                f[u, w - m] += delta
            elif m <= u < m + n:
                f[w, u - m] -= delta
                if f[w, u - m] <= tol:
                    f[w, u - m] = 0.0
            elif u == F:
                g[w] += delta
            else:
                g[u] -= delta
                if g[u] <= tol:
                    g[u] = 0.0
        if start == F:
            excess_f -= delta
        else:
            excess[start] -= delta
        deficit[target - m] -= delta
        augmentations += 1

    return TransportResult(f, g, float(np.sum(f * C)), augmentations)
