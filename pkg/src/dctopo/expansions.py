"""Graph expansions and the matching schedule transforms.

Each transform takes a topology with a valid schedule and returns a larger
topology with a valid schedule whose cost follows a closed-form rule:

* line graph ``L(G)``: N -> dN, x -> x + 1, y -> y + 1/N (at most)
* degree expansion ``G*n``: N -> nN, d -> nd, x -> x + 1, y -> y + (n-1)/(nN)
* Cartesian power ``G^n``: N -> N^n, d -> nd, x -> nx,
  y -> y * N/(N-1) * (N^n - 1)/N^n
* undirected conversion ``G + G^T``: d -> 2d, costs unchanged
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .chunks import FULL, ChunkSet, split_equal
from .graph import Digraph, arc_mapping, inverse_map, transpose, verify_isomorphism
from .schedule import AG, RS, CostVector, Schedule, ScheduleError, Transfer


def _need_kind(s: Schedule, kind) -> None:
    if s.kind is not kind:
        raise ScheduleError(f"expected a {kind.value} schedule, got {s.kind.value}")


# -- line graph ---------------------------------------------------------------

def _line_offsets(g: Digraph) -> list[int]:
    offsets = []
    total = 0
    for a in range(len(g.arcs)):
        offsets.append(total)
        total += len(g.out_arcs(g.arcs[a][1]))
    return offsets


def line_graph(g: Digraph) -> Digraph:
    """Nodes are the arcs of ``g``; arc a -> b whenever a ends where b starts."""
    arcs = []
    for a, (_, head) in enumerate(g.arcs):
        for b in g.out_arcs(head):
            arcs.append((a, b))
    witness = None
    if g.skew_witness is not None:
        witness = arc_mapping(transpose(g), g, g.skew_witness)
    return Digraph(len(g.arcs), arcs, f"L({g.label})" if g.label else "", witness)


def line_expand_schedule(g: Digraph, s: Schedule) -> Schedule:
    """Reduce-scatter on ``line_graph(g)`` from a reduce-scatter on ``g``.

    Every transfer of ``s`` over arc (u, u') is replayed on each line arc
    (w, u) -> (u, u') for every root line node leaving the original root,
    then one extra step delivers the full shard over every line arc.
    """
    _need_kind(s, RS)
    offsets = _line_offsets(g)
    position = {}
    for u in range(g.n):
        for idx, e in enumerate(g.out_arcs(u)):
            position[e] = idx
    transfers = []
    for tr in s.transfers:
        u = g.arcs[tr.arc][0]
        for a in g.in_arcs(u):
            line_arc = offsets[a] + position[tr.arc]
            for b in g.out_arcs(tr.root):
                if a != b:
                    transfers.append(Transfer(b, tr.chunk, line_arc, tr.step))
    final = s.t_max + 1
    for a in range(len(g.arcs)):
        for idx, b in enumerate(g.out_arcs(g.arcs[a][1])):
            if a != b:
                transfers.append(Transfer(b, FULL, offsets[a] + idx, final))
    return Schedule(RS, transfers, final)


# -- degree expansion ---------------------------------------------------------

def degree_expand(g: Digraph, n: int) -> Digraph:
    """``n`` copies ``v_0..v_{n-1}`` of every node (index ``v*n + i``), arcs between all copies."""
    if n < 1:
        raise ValueError("degree expansion factor must be >= 1")
    if g.has_self_loops():
        raise ScheduleError("degree expansion needs a graph without self-loops")
    arcs = [(u * n + i, v * n + j) for (u, v) in g.arcs for i in range(n) for j in range(n)]
    witness = None
    if g.skew_witness is not None:
        witness = [g.skew_witness[v] * n + i for v in range(g.n) for i in range(n)]
    return Digraph(g.n * n, arcs, f"Deg({g.label},{n})" if g.label else "", witness)


def degree_expand_schedule(g: Digraph, s: Schedule, n: int) -> Schedule:
    _need_kind(s, RS)
    big = degree_expand(g, n)
    transfers = []
    for u in range(g.n):
        for i in range(n):
            node = u * n + i
            out = sorted(big.out_arcs(node), key=lambda e: (big.arcs[e][1], e))
            pieces = split_equal(len(out))
            for j in range(n):
                if j == i:
                    continue
                for e, chunk in zip(out, pieces):
                    transfers.append(Transfer(u * n + j, chunk, e, 1))
    nn = n * n
    for tr in s.transfers:
        for i in range(n):
            for j in range(n):
                transfers.append(Transfer(tr.root * n + j, tr.chunk, tr.arc * nn + i * n + j, tr.step + 1))
    return Schedule(RS, transfers, s.t_max + 1)


# -- Cartesian products -------------------------------------------------------

class _Product:
    """Mixed-radix indexing for a product of factor graphs (first factor most significant)."""

    def __init__(self, factors: Sequence[Digraph]):
        self.factors = list(factors)
        self.sizes = [f.n for f in factors]
        self.weights = []
        w = 1
        for size in reversed(self.sizes):
            self.weights.append(w)
            w *= size
        self.weights.reverse()
        self.n = w
        arcs = []
        self.arc_id: dict[tuple[int, int, int], int] = {}
        for node in range(self.n):
            coords = self.coords(node)
            for k, f in enumerate(self.factors):
                for e in f.out_arcs(coords[k]):
                    head = f.arcs[e][1]
                    self.arc_id[(node, k, e)] = len(arcs)
                    arcs.append((node, node + (head - coords[k]) * self.weights[k]))
        self.arcs = arcs

    def coords(self, node: int) -> tuple[int, ...]:
        out = []
        for size in reversed(self.sizes):
            node, r = divmod(node, size)
            out.append(r)
        return tuple(reversed(out))

    def index(self, coords: Sequence[int]) -> int:
        return sum(c * w for c, w in zip(coords, self.weights))


def _product_graph(factors: Sequence[Digraph], label: str) -> Digraph:
    prod = _Product(factors)
    witness = None
    if all(f.skew_witness is not None for f in factors):
        witness = [prod.index([f.skew_witness[c] for f, c in zip(factors, prod.coords(v))])
                   for v in range(prod.n)]
    return Digraph(prod.n, prod.arcs, label, witness)


def cartesian_product(g1: Digraph, g2: Digraph) -> Digraph:
    """Row-major product: node (a, b) has index ``a * |V2| + b``."""
    label = f"Prod({g1.label},{g2.label})" if g1.label and g2.label else ""
    return _product_graph([g1, g2], label)


def cartesian_power(g: Digraph, n: int) -> Digraph:
    if n < 1:
        raise ValueError("power exponent must be >= 1")
    return _product_graph([g] * n, f"Pow({g.label},{n})" if g.label else "")


def power_schedule(g: Digraph, s: Schedule, n: int) -> Schedule:
    """Allgather on ``g``'s n-th Cartesian power from an allgather on ``g``.

    The shard is cut into n subshards. Subshard r runs the base schedule
    along axes r, r+1, ... (cyclically), one axis per phase; in phase j a
    node forwards the pieces of every root it gathered in earlier phases.
    """
    _need_kind(s, AG)
    if n < 1:
        raise ValueError("power exponent must be >= 1")
    prod = _Product([g] * n)
    N = g.n
    T = s.t_max
    subshards = [Fraction(r, n) for r in range(n)]
    width = Fraction(1, n)
    transfers = []
    for r in range(n):
        for j in range(n):
            axis = (r + j) % n
            done = [(r + q) % n for q in range(j)]
            free = [k for k in range(n) if k != axis]
            for tr in s.transfers:
                u, v = g.arcs[tr.arc]
                chunk = tr.chunk.scaled(subshards[r], width)
                step = tr.step + j * T
                for rest in itertools.product(range(N), repeat=n - 1):
                    coords = list(rest[:axis]) + [u] + list(rest[axis:])
                    node = prod.index(coords)
                    arc = prod.arc_id[(node, axis, tr.arc)]
                    root = list(coords)
                    root[axis] = tr.root
                    for gathered in itertools.product(range(N), repeat=len(done)):
                        for k, val in zip(done, gathered):
                            root[k] = val
                        transfers.append(Transfer(prod.index(root), chunk, arc, step))
    return Schedule(AG, transfers, n * T)


# -- undirected conversion ----------------------------------------------------

def to_undirected(g: Digraph, s: Schedule, f: Sequence[int]) -> tuple[Digraph, Schedule]:
    """Both orientations of every arc; half the shard follows ``s``, half its mirror image.

    ``f`` maps ``transpose(g)`` onto ``g``. Arcs ``0..m-1`` are those of
    ``g`` and arc ``m + e`` is arc ``e`` reversed.
    """
    gt = transpose(g)
    if not verify_isomorphism(gt, g, f):
        raise ScheduleError("witness is not an isomorphism from the transpose")
    m = len(g.arcs)
    both = Digraph(g.n, list(g.arcs) + list(gt.arcs),
                   f"Undir({g.label})" if g.label else "", tuple(range(g.n)))
    to_t = inverse_map(f)                       # isomorphism g -> transpose(g)
    amap = arc_mapping(g, gt, to_t)
    low, high = Fraction(0), Fraction(1, 2)
    transfers = []
    for tr in s.transfers:
        transfers.append(Transfer(tr.root, tr.chunk.scaled(low, high), tr.arc, tr.step))
        transfers.append(Transfer(to_t[tr.root], tr.chunk.scaled(high, high), m + amap[tr.arc], tr.step))
    return both, Schedule(s.kind, transfers, s.t_max)


# -- analytic cost rules ------------------------------------------------------

def line_cost(cost: CostVector, n: int) -> CostVector:
    return CostVector(cost.x + 1, cost.y + Fraction(1, n))


def degree_cost(cost: CostVector, n_nodes: int, factor: int) -> CostVector:
    return CostVector(cost.x + 1, cost.y + Fraction(factor - 1, factor * n_nodes))


def power_cost(cost: CostVector, n_nodes: int, exponent: int) -> CostVector:
    big = n_nodes**exponent
    return CostVector(cost.x * exponent, cost.y * Fraction(n_nodes, n_nodes - 1) * Fraction(big - 1, big))


def product_cost(c1: CostVector, c2: CostVector, n1: int, n2: int) -> CostVector:
    """Cost when both operands carry bandwidth-optimal shortest-path schedules."""
    big = n1 * n2
    return CostVector(c1.x + c2.x, Fraction(big - 1, big))


def iterated_line_bound(y: Fraction, n_nodes: int, d: int, times: int) -> Fraction:
    """y + (d/(d-1)) (1/N - 1/(d^n N)) for ``times`` line expansions (d >= 2)."""
    return y + Fraction(d, d - 1) * (Fraction(1, n_nodes) - Fraction(1, d**times * n_nodes))
