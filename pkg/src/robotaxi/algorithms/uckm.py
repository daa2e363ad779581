"""Exact uniform capacitated k-median.

Choose integer multiplicities Q(x) with sum k so that shipping mass Q(x)/k
from each x to the demand P costs as little as possible. Two backends:

``highs``
    The mixed-integer program solved by HiGHS through :func:`scipy.optimize.milp`,
    written in the fraction z(x, y) of y's demand served from x. It adds the
    valid cut ``z(x, y) <= Q(x)``, which cuts off the fractional optimum
    Q = kP and makes the LP bound useful.
``bnb``
    Best-bound branch and bound whose relaxation is the plain transport
    problem with Q(x) confined to [lb, ub], solved by the min-cost-flow
    engine. The relaxation bound is weak, so this is practical only for
    small instances.

Either way the returned objective is recomputed by solving the transport
problem for the final integer Q with the min-cost-flow engine.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix, eye, hstack, kron, vstack

from ..core.metric import DemandDistribution, MetricSpace, Placement
from ..errors import Infeasible, InvariantViolation, TimeLimitExceeded
from ..matching.distances import TransportPlan
from ..matching.flow import min_cost_transport

log = logging.getLogger(__name__)

OPTIMAL = "Optimal"
GAP_LIMIT = "GapLimit"
TIME_LIMIT = "TimeLimit"

INTEGRAL_TOL = 1e-9
OBJECTIVE_SCALE = 1e6
# Proven relative gaps below this are solver round-off and count as optimal.
SOLVER_GAP_TOL = 1e-9
# Relative slack when comparing a node bound with the incumbent.
PRUNE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class UckmSolution:
    placement: Placement
    transport: TransportPlan
    objective: float
    optimality_gap: float
    status: str
    lower_bound: float
    nodes: int
    method: str

    def to_dict(self) -> dict:
        return {
            "counts": list(self.placement.counts),
            "objective": self.objective,
            "lower_bound": self.lower_bound,
            "optimality_gap": self.optimality_gap,
            "status": self.status,
            "nodes": self.nodes,
            "method": self.method,
        }


def transport_for(space: MetricSpace, demand: DemandDistribution, q) -> TransportPlan:
    """Optimal plan shipping ``q / k`` to the demand."""
    q = np.asarray(q, dtype=np.int64)
    k = int(q.sum())
    src = np.flatnonzero(q > 0)
    dst = demand.support
    res = min_cost_transport(q[src] / k, demand.probs[dst], space.dist[np.ix_(src, dst)])
    entries = []
    for i, j in zip(*np.nonzero(res.flow)):
        x, y = int(src[i]), int(dst[j])
        entries.append((x, y, float(res.flow[i, j]), float(space.dist[x, y])))
    return TransportPlan(tuple(entries), res.cost)


def _gap(objective: float, bound: float) -> float:
    if objective <= 0:
        return 0.0
    return max(0.0, (objective - bound) / objective)


def _log_incumbent(iteration: int, bound: float, objective: float) -> None:
    log.info("iter=%d lower_bound=%.12g incumbent=%.12g gap=%.3e", iteration, bound, objective, _gap(objective, bound))


def _finish(space, demand, q, bound, status, nodes, method) -> UckmSolution:
    plan = transport_for(space, demand, q)
    bound = min(bound, plan.total_cost)
    return UckmSolution(
        Placement.from_array(q), plan, plan.total_cost, _gap(plan.total_cost, bound), status, bound, nodes, method
    )


def uckm_solve(
    space: MetricSpace,
    demand: DemandDistribution,
    k: int,
    gap_tol: float = 0.0,
    time_limit: float | None = None,
    method: str = "highs",
) -> UckmSolution:
    """Best integer placement of k units of mass 1/k against the demand.

    With ``gap_tol = 0`` and no time limit the result is optimal. If the time
    limit stops the search the incumbent is returned with status
    ``TimeLimit`` and its proven gap; :class:`TimeLimitExceeded` is raised
    only when no incumbent exists yet.
    """
    if int(k) != k or k < 1:
        raise InvariantViolation(f"fleet size k must be a positive integer, got {k}")
    if gap_tol < 0:
        raise InvariantViolation("gap_tol must be non-negative")
    if demand.n != space.n:
        raise InvariantViolation(f"demand over {demand.n} points, metric has {space.n}")
    if method == "highs":
        return _solve_highs(space, demand, int(k), gap_tol, time_limit)
    if method == "bnb":
        return _solve_bnb(space, demand, int(k), gap_tol, time_limit)
    raise InvariantViolation(f"unknown method {method!r}; expected 'highs' or 'bnb'")


def _solve_highs(space, demand, k, gap_tol, time_limit) -> UckmSolution:
    n = space.n
    ys = demand.support
    m = ys.size
    p = demand.probs[ys]
    d = space.dist[:, ys]
    # variables: z(x, y), the fraction of y's demand served from x, row-major
    # over (n, m), then Q(x). Writing the cut as z <= Q keeps every
    # coefficient away from the solver's feasibility tolerance even when
    # some P(y) are tiny.
    rows = kron(eye(n), csr_matrix(p.reshape(1, m)))
    cols = kron(np.ones((1, n)), eye(m))
    a_eq = vstack(
        [
            hstack([rows, -eye(n) / k]),
            hstack([cols, csr_matrix((m, n))]),
            hstack([csr_matrix((1, n * m)), np.ones((1, n))]),
        ]
    ).tocsr()
    b_eq = np.concatenate([np.zeros(n), np.ones(m), [k]])
    a_cut = hstack([eye(n * m), kron(eye(n), csr_matrix(-np.ones((m, 1))))]).tocsr()
    w = (d * p).ravel()
    # HiGHS stops at an absolute gap of 1e-6 that scipy does not expose;
    # scaling the costs up makes that stopping rule negligible.
    scale = OBJECTIVE_SCALE / max(float(w.max()), 1e-300)
    c = np.concatenate([w * scale, np.zeros(n)])
    integrality = np.concatenate([np.zeros(n * m), np.ones(n)])
    options = {"mip_rel_gap": float(gap_tol)}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = milp(
        c,
        constraints=[LinearConstraint(a_eq, b_eq, b_eq), LinearConstraint(a_cut, -np.inf, 0.0)],
        integrality=integrality,
        bounds=Bounds(np.zeros(n * m + n), np.concatenate([np.ones(n * m), np.full(n, float(k))])),
        options=options,
    )
    if res.x is None:
        if res.status == 1:
            raise TimeLimitExceeded("time limit reached before any integer solution was found")
        raise Infeasible(f"MILP solver failed: {res.message}")
    q = np.rint(res.x[n * m :]).astype(np.int64)
    if q.sum() != k:
        raise Infeasible("MILP solution does not place exactly k units")
    bound = getattr(res, "mip_dual_bound", None)
    bound = float(res.fun) if bound is None or not math.isfinite(bound) else float(bound)
    bound /= scale
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    sol = _finish(space, demand, q, bound, TIME_LIMIT if res.status != 0 else OPTIMAL, nodes, "highs")
    _log_incumbent(nodes, sol.lower_bound, sol.objective)
    if sol.status == OPTIMAL and sol.optimality_gap > SOLVER_GAP_TOL:
        sol = UckmSolution(sol.placement, sol.transport, sol.objective, sol.optimality_gap, GAP_LIMIT, sol.lower_bound, nodes, "highs")
    return sol


def _relax(space_d, p, k, lb, ub):
    """Transport relaxation with Q(x) in [lb, ub]; returns (cost, fractional Q) or None if infeasible."""
    base = lb / k
    flex = 1.0 - base.sum()
    if flex < -1e-12 or (ub.sum() < k):
        return None
    res = min_cost_transport(base, p, space_d, flex_supply=max(flex, 0.0), flex_cap=(ub - lb) / k)
    return res.cost, (base + res.flex_flow) * k


def _round(q, lb, ub, k):
    """Largest-remainder rounding of a fractional Q within its bounds."""
    f = np.clip(np.floor(q + INTEGRAL_TOL), lb, ub).astype(np.int64)
    rem = k - int(f.sum())
    if rem < 0:
        return None
    for x in np.argsort(-(q - f), kind="stable"):
        if rem == 0:
            break
        if f[x] < ub[x]:
            f[x] += 1
            rem -= 1
    return f if rem == 0 else None


def _solve_bnb(space, demand, k, gap_tol, time_limit) -> UckmSolution:
    n = space.n
    ys = demand.support
    p = demand.probs[ys]
    d = space.dist[:, ys]
    start = time.monotonic()

    def plan_cost(q):
        src = np.flatnonzero(q > 0)
        return min_cost_transport(q[src] / k, p, d[src]).cost

    best_q = None
    best = math.inf
    seen: set[bytes] = set()
    counter = 0
    heap = [(0.0, counter, np.zeros(n), np.full(n, float(k)))]
    nodes = 0
    status = OPTIMAL
    bound = 0.0

    def offer(q, iteration, lower):
        nonlocal best, best_q
        key = q.tobytes()
        if key in seen:
            return
        seen.add(key)
        cost = plan_cost(q)
        if cost < best:
            best, best_q = cost, q
            _log_incumbent(iteration, lower, best)

    while heap:
        bound = heap[0][0]
        if best_q is not None and bound >= best * (1 - PRUNE_RTOL):
            bound = best
            break
        if best_q is not None and _gap(best, bound) <= gap_tol and gap_tol > 0:
            status = GAP_LIMIT
            break
        if time_limit is not None and time.monotonic() - start > time_limit:
            status = TIME_LIMIT
            break
        parent_bound, _, lb, ub = heapq.heappop(heap)
        nodes += 1
        relaxed = _relax(d, p, k, lb, ub)
        if relaxed is None:
            continue
        val, q = relaxed
        val = max(val, parent_bound)
        if best_q is not None and val >= best * (1 - PRUNE_RTOL):
            continue
        frac = np.abs(q - np.rint(q))
        if frac.max() <= INTEGRAL_TOL:
            offer(np.rint(q).astype(np.int64), nodes, heap[0][0] if heap else val)
            continue
        rounded = _round(q, lb, ub, k)
        if rounded is not None:
            offer(rounded, nodes, min(val, heap[0][0]) if heap else val)
        x = int(np.argmax(np.minimum(q - np.floor(q), np.ceil(q) - q)))
        f = math.floor(q[x])
        down, up = ub.copy(), lb.copy()
        down[x] = f
        up[x] = f + 1
        for lo, hi in ((lb, down), (up, ub)):
            counter += 1
            heapq.heappush(heap, (val, counter, lo, hi))
    else:
        bound = best

    if best_q is None:
        if status == TIME_LIMIT:
            raise TimeLimitExceeded("time limit reached before any integer solution was found")
        raise Infeasible("no integer placement found")
    sol = _finish(space, demand, best_q, bound, status, nodes, "bnb")
    if status == GAP_LIMIT and sol.optimality_gap == 0:
        status = OPTIMAL
    return UckmSolution(sol.placement, sol.transport, sol.objective, sol.optimality_gap, status, sol.lower_bound, nodes, "bnb")
