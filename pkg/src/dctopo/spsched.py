"""Optimal shortest-path schedules from the per-(node, step) linear program.

For a node ``u`` and step ``t`` let ``x = D + 1 - t``. Every destination
``v`` at distance ``x`` from ``u`` splits its shard over the out-arcs
``(u, w)`` that start a shortest path to ``v``; the LP minimises the
largest total fraction ``U`` put on one arc. Destinations that may use
exactly the same set of arcs are interchangeable, so the program is solved
over those classes and the class totals are shared evenly among members.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .chunks import ChunkSet
from .graph import Digraph, NotStronglyConnected, diameter, neighborhood_sizes, regular_degree
from .schedule import RS, CostVector, Schedule, ScheduleError, Transfer, arc_loads
from .simplex import SolverError, linprog, snap


@dataclass(frozen=True)
class SpLpInstance:
    """LP for node ``u`` at step ``t``; ``destinations`` lists (v, usable arc ids)."""

    u: int
    t: int
    distance: int
    destinations: tuple[tuple[int, tuple[int, ...]], ...]


@dataclass
class SpLpSolution:
    assignment: dict          # (v, arc_id) -> Fraction
    objective: Fraction


def _arc_classes(destinations) -> tuple[tuple[int, ...], list[tuple[tuple[int, ...], list[int]]]]:
    arcs = sorted({e for _, es in destinations for e in es})
    groups: dict[tuple[int, ...], list[int]] = {}
    for v, es in destinations:
        if not es:
            raise ScheduleError(f"destination {v} has no usable arc")
        groups.setdefault(tuple(sorted(es)), []).append(v)
    return tuple(arcs), sorted(groups.items())


@lru_cache(maxsize=65536)
def _solve_classes(n_arcs: int, classes: tuple[tuple[tuple[int, ...], int], ...]) -> tuple:
    """Solve the class LP. ``classes`` holds (arc positions, member count).

    Returns per-class tuples of Fraction totals aligned with the arc
    positions, and the objective.
    """
    var_index = []
    for ci, (pos, _) in enumerate(classes):
        for p in pos:
            var_index.append((ci, p))
    nv = len(var_index) + 1          # last variable is U
    c = [0] * (nv - 1) + [1]
    A_eq, b_eq = [], []
    for ci, (pos, count) in enumerate(classes):
        row = [0] * nv
        for k, (cj, _) in enumerate(var_index):
            if cj == ci:
                row[k] = 1
        A_eq.append(row)
        b_eq.append(count)
    A_ub, b_ub = [], []
    for p in range(n_arcs):
        row = [0] * nv
        for k, (_, pj) in enumerate(var_index):
            if pj == p:
                row[k] = 1
        row[-1] = -1
        A_ub.append(row)
        b_ub.append(0)

    def extract(values) -> tuple | None:
        totals = []
        k = 0
        for pos, count in classes:
            vals = tuple(values[k + i] for i in range(len(pos)))
            if any(v < 0 for v in vals) or sum(vals) != count:
                return None
            totals.append(vals)
            k += len(pos)
        loads = [Fraction(0)] * n_arcs
        for (pos, _), vals in zip(classes, totals):
            for p, v in zip(pos, vals):
                loads[p] += v
        return tuple(totals), max(loads)

    res = linprog(c, A_ub, b_ub, A_eq, b_eq)
    snapped = extract([snap(v) for v in res.x])
    if snapped is not None and abs(float(snapped[1]) - res.fun) <= 1e-7:
        return snapped
    exact = linprog(c, A_ub, b_ub, A_eq, b_eq, exact=True)
    out = extract(exact.x)
    if out is None:
        raise SolverError("exact re-solve produced an inconsistent solution")
    return out


def solve_lp(instance: SpLpInstance) -> SpLpSolution:
    """Optimal arc fractions for one (u, t) program."""
    arcs, groups = _arc_classes(instance.destinations)
    pos = {e: i for i, e in enumerate(arcs)}
    classes = tuple((tuple(pos[e] for e in es), len(vs)) for es, vs in groups)
    totals, objective = _solve_classes(len(arcs), classes)
    assignment = {}
    for (es, vs), vals in zip(groups, totals):
        for v in vs:
            for e, val in zip(es, vals):
                if val:
                    assignment[(v, e)] = val / len(vs)
    return SpLpSolution(assignment, objective)


def _require(g: Digraph) -> tuple[int, int]:
    d = regular_degree(g)
    if d is None:
        raise ScheduleError(f"{g!r} is not regular")
    try:
        D = diameter(g)
    except NotStronglyConnected:
        raise
    return d, D


def lp_instances(g: Digraph) -> Iterator[SpLpInstance]:
    """All (u, t) programs of a graph, in (u, t) order."""
    _, D = _require(g)
    dist = g.distance_matrix()
    for u in range(g.n):
        out = g.out_arcs(u)
        heads = np.array([g.arcs[e][1] for e in out], dtype=np.int64)
        for t in range(1, D + 1):
            x = D + 1 - t
            dests = np.nonzero(dist[u] == x)[0]
            usable = dist[np.ix_(heads, dests)] == x - 1
            items = []
            for j, v in enumerate(dests):
                items.append((int(v), tuple(int(out[i]) for i in np.nonzero(usable[:, j])[0])))
            yield SpLpInstance(u, t, x, tuple(items))


def _class_signature(g: Digraph, u: int, x: int, dist: np.ndarray):
    """Group destinations at distance ``x`` by the bitmask of usable out-arcs."""
    out = g.out_arcs(u)
    heads = np.array([g.arcs[e][1] for e in out], dtype=np.int64)
    dests = np.nonzero(dist[u] == x)[0]
    usable = dist[np.ix_(heads, dests)] == x - 1
    weights = (1 << np.arange(len(out), dtype=np.int64))
    masks = weights @ usable.astype(np.int64)
    uniq, counts = np.unique(masks, return_counts=True)
    classes = []
    for mask, cnt in zip(uniq.tolist(), counts.tolist()):
        if mask == 0:
            raise ScheduleError("destination without a shortest-path arc")
        classes.append((tuple(i for i in range(len(out)) if mask >> i & 1), cnt))
    return tuple(classes)


def lp_cost(g: Digraph) -> CostVector:
    """(x, y) of the optimal shortest-path schedule without building it."""
    d, D = _require(g)
    dist = g.distance_matrix()
    total = Fraction(0)
    for t in range(1, D + 1):
        x = D + 1 - t
        worst = Fraction(0)
        for u in range(g.n):
            classes = _class_signature(g, u, x, dist)
            _, obj = _solve_classes(d, classes)
            if obj > worst:
                worst = obj
        total += worst
    return CostVector(D, Fraction(d, g.n) * total)


def _assemble(g: Digraph, fractions_for) -> Schedule:
    """Lay chunks out with running offsets, arcs in ascending id order."""
    transfers = []
    for inst in lp_instances(g):
        for v, arcs in inst.destinations:
            parts = fractions_for(inst, v, arcs)
            lo = Fraction(0)
            for e in sorted(arcs):
                amount = parts.get(e, 0)
                if amount:
                    transfers.append(Transfer(v, ChunkSet([(lo, lo + amount)]), e, inst.t))
                    lo += amount
            if lo != 1:
                raise ScheduleError(f"fractions for destination {v} sum to {lo}")
    return Schedule(RS, transfers)


def lp_schedule(g: Digraph) -> tuple[Schedule, CostVector]:
    """Optimal shortest-path reduce-scatter schedule and its cost."""
    d, D = _require(g)
    worst: dict[int, Fraction] = {}
    cache: dict[tuple[int, int], SpLpSolution] = {}

    def parts(inst: SpLpInstance, v: int, arcs):
        key = (inst.u, inst.t)
        if key not in cache:
            cache.clear()
            sol = solve_lp(inst)
            cache[key] = sol
            worst[inst.t] = max(worst.get(inst.t, Fraction(0)), sol.objective)
        sol = cache[key]
        return {e: sol.assignment.get((v, e), 0) for e in arcs}

    s = _assemble(g, parts)
    y = Fraction(d, g.n) * sum(worst.values(), Fraction(0))
    return s, CostVector(D, y)


def round_largest_remainder(values: dict, P: int) -> dict:
    """Integers summing to P, close to ``P * values``; ties go to the lower key."""
    scaled = {k: Fraction(v) * P for k, v in values.items()}
    base = {k: int(v) for k, v in scaled.items()}          # floor, values are >= 0
    rest = P - sum(base.values())
    order = sorted(scaled, key=lambda k: (-(scaled[k] - base[k]), k))
    for k in order[:rest]:
        base[k] += 1
    return base


def integer_schedule(g: Digraph, P: int) -> tuple[Schedule, CostVector]:
    """Shortest-path schedule whose chunks are multiples of 1/P."""
    if P < 1:
        raise ValueError("granularity P must be at least 1")
    _require(g)
    cache: dict[tuple[int, int], SpLpSolution] = {}

    def parts(inst: SpLpInstance, v: int, arcs):
        key = (inst.u, inst.t)
        if key not in cache:
            cache.clear()
            cache[key] = solve_lp(inst)
        sol = cache[key]
        counts = round_largest_remainder({e: sol.assignment.get((v, e), 0) for e in arcs}, P)
        return {e: Fraction(k, P) for e, k in counts.items()}

    s = _assemble(g, parts)
    from .schedule import cost_vector
    return s, cost_vector(s, g)


def integer_gap_bound(g: Digraph, P: int) -> Fraction:
    """Bound on y(integer) - y(LP): d(d^D - 1) / ((d - 1) P N)."""
    d, D = _require(g)
    if d == 1:
        return Fraction(D, P * g.n)
    return Fraction(d * (d**D - 1), (d - 1) * P * g.n)


def check_sp_bandwidth_optimal(g: Digraph, s: Schedule) -> bool:
    """Vertex-independent distance profile and per-arc load N_x/d at every step."""
    d, D = _require(g)
    profile = neighborhood_sizes(g, 0)
    if any(neighborhood_sizes(g, u) != profile for u in range(1, g.n)):
        return False
    loads = arc_loads(s)
    m = len(g.arcs)
    for t in range(1, D + 1):
        want = Fraction(profile[D - t], d)
        row = loads.get(t, {})
        if len(row) != m or any(v != want for v in row.values()):
            return False
    return s.t_max == D
