"""Build the graph and a reduce-scatter schedule for a topology expression."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .bases import build_base
from .expansions import (
    cartesian_power,
    cartesian_product,
    degree_expand,
    degree_expand_schedule,
    line_expand_schedule,
    line_graph,
    power_schedule,
    to_undirected,
)
from .expr import Base, Deg, Expr, Line, Pow, Prod, Undir, to_text
from .graph import Digraph, SearchBudgetExceeded, find_skew_symmetry, inverse_map, transpose
from .schedule import (
    CostVector,
    Schedule,
    ScheduleError,
    cost_vector,
    dualize,
    map_schedule,
    remap_arcs,
    reverse_schedule,
)
from .spsched import lp_schedule


@dataclass(frozen=True)
class Materialized:
    graph: Digraph
    schedule: Schedule        # reduce-scatter
    cost: CostVector          # measured from the schedule


def _power(g: Digraph, rs: Schedule, n: int) -> tuple[Digraph, Schedule]:
    # Reversing a reduce-scatter on g gives an allgather on its transpose, so
    # the power schedule runs there and the result is reversed back. No
    # skew-symmetry witness is needed.
    gt = transpose(g)
    ag_t = reverse_schedule(rs)
    big_t = cartesian_power(gt, n)
    rs_back = reverse_schedule(power_schedule(gt, ag_t, n))
    big = cartesian_power(g, n)
    return big, remap_arcs(rs_back, transpose(big_t), big)


@lru_cache(maxsize=128)
def materialize(e: Expr) -> Materialized:
    if isinstance(e, Base):
        g, s, cost = build_base(e.family, e.params)
        return Materialized(g, s, cost)
    if isinstance(e, Line):
        m = materialize(e.inner)
        g = line_graph(m.graph)
        s = line_expand_schedule(m.graph, m.schedule)
    elif isinstance(e, Deg):
        m = materialize(e.inner)
        g = degree_expand(m.graph, e.n)
        s = degree_expand_schedule(m.graph, m.schedule, e.n)
    elif isinstance(e, Pow):
        m = materialize(e.inner)
        g, s = _power(m.graph, m.schedule, e.n)
    elif isinstance(e, Prod):
        a, b = materialize(e.left), materialize(e.right)
        g = cartesian_product(a.graph, b.graph)
        s, _ = lp_schedule(g)
    elif isinstance(e, Undir):
        m = materialize(e.inner)
        f = find_skew_symmetry(m.graph)
        if f is None:
            raise ScheduleError(f"{to_text(e.inner)} is not skew-symmetric")
        g, s = to_undirected(m.graph, m.schedule, f)
    else:
        raise TypeError(f"not an expression: {e!r}")
    g = Digraph(g.n, g.arcs, to_text(e), g.skew_witness)
    return Materialized(g, s, cost_vector(s, g))


_WITNESS_BUDGET = 10**5


def _witness(g: Digraph) -> tuple[int, ...] | None:
    try:
        return find_skew_symmetry(g, _WITNESS_BUDGET)
    except SearchBudgetExceeded:
        return None


def _transposed_rs(e: Expr) -> Schedule:
    """A reduce-scatter on ``transpose(materialize(e).graph)``, built by the same rules."""
    m = materialize(e)
    target = transpose(m.graph)
    if isinstance(e, Base):
        f = _witness(m.graph)
        if f is not None:
            return map_schedule(m.schedule, inverse_map(f), target, m.graph)
        return lp_schedule(target)[0]
    if isinstance(e, Prod):
        return lp_schedule(target)[0]
    inner = materialize(e.inner).graph
    ht = transpose(inner)
    st = _transposed_rs(e.inner)
    if isinstance(e, Line):
        g, s = line_graph(ht), line_expand_schedule(ht, st)
    elif isinstance(e, Deg):
        g, s = degree_expand(ht, e.n), degree_expand_schedule(ht, st, e.n)
    elif isinstance(e, Pow):
        g, s = _power(ht, st, e.n)
    elif isinstance(e, Undir):
        f = find_skew_symmetry(inner)
        g, s = to_undirected(ht, st, inverse_map(f))
    else:
        raise TypeError(f"not an expression: {e!r}")
    return remap_arcs(s, g, target)


def allgather_schedule(e: Expr) -> Schedule:
    """Allgather on the same graph as ``materialize(e)``.

    Skew-symmetric graphs dualise their reduce-scatter through the witness.
    Otherwise the reduce-scatter is rebuilt on the transpose and reversed.
    """
    m = materialize(e)
    f = _witness(m.graph)
    if f is not None:
        return dualize(m.schedule, m.graph, f)
    return reverse_schedule(_transposed_rs(e))
