"""Base topologies, their canonical schedules and cost annotations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

from .chunks import FULL, ChunkSet, split_equal
from .graph import Digraph, GraphError, SearchBudgetExceeded, diameter, moore_bound
from .schedule import AG, RS, CostVector, Schedule, Transfer, dualize


class Family(str, Enum):
    COMPLETE = "Complete"
    COMPLETE_BIPARTITE = "CompleteBipartite"
    CIRCULANT = "Circulant"
    UNI_RING = "UniRing"
    BI_RING = "BiRing"
    TORUS = "Torus"
    HYPERCUBE = "Hypercube"
    HAMMING = "Hamming"
    DE_BRUIJN = "DeBruijn"
    DBJ_MOD = "DBJMod"
    GEN_KAUTZ = "GenKautz"
    DIAMOND = "Diamond"
    CYCLE_MESH = "CycleMesh"


ARITY = {
    Family.COMPLETE: 1, Family.COMPLETE_BIPARTITE: 1, Family.CIRCULANT: 2,
    Family.UNI_RING: 2, Family.BI_RING: 2, Family.TORUS: 2, Family.HYPERCUBE: 1,
    Family.HAMMING: 2, Family.DE_BRUIJN: 2, Family.DBJ_MOD: 2, Family.GEN_KAUTZ: 2,
    Family.DIAMOND: 0, Family.CYCLE_MESH: 2,
}

# Latency of the tabulated de Bruijn modifications, keyed by (d, n).
DBJMOD_LATENCY = {(2, 3): 4, (2, 4): 5, (3, 2): 3, (4, 2): 3}
DBJMOD_SKEW = {(2, 3)}

DIAMOND_ARCS = (
    (0, 3), (0, 4), (1, 2), (1, 7), (2, 3), (2, 4), (3, 6), (3, 7),
    (4, 1), (4, 5), (5, 0), (5, 1), (6, 2), (6, 5), (7, 0), (7, 6),
)


class BaseParamError(ValueError):
    pass


@dataclass(frozen=True)
class BaseSpec:
    """A base topology with its summary annotations.

    ``x`` is None when latency comes from BFS and ``y`` is None when the
    bandwidth coefficient comes from the LP scheduler.
    """

    family: Family
    params: tuple[int, ...]
    n_nodes: int
    degree: int
    x: int | None
    y: Fraction | None
    bandwidth_optimal: bool
    skew_symmetric: bool
    schedule_source: str          # "canonical" | "lp" | "import-only"
    shortest_path: bool           # an optimal schedule of shortest-path form attains (x, y)
    self_loops: bool
    multi_edge: bool

    @property
    def name(self) -> str:
        if not self.params:
            return self.family.value
        return f"{self.family.value}({','.join(map(str, self.params))})"


def _bw(n: int) -> Fraction:
    return Fraction(n - 1, n)


def base_spec(family: Family | str, params=()) -> BaseSpec:
    """Annotations for a base, after checking the parameters."""
    fam = Family(family)
    p = tuple(int(v) for v in params)
    if len(p) != ARITY[fam]:
        raise BaseParamError(f"{fam.value} takes {ARITY[fam]} parameter(s), got {len(p)}")

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise BaseParamError(f"{fam.value}{p}: {msg}")

    if fam is Family.COMPLETE:
        (m,) = p
        need(m >= 2, "needs m >= 2")
        return BaseSpec(fam, p, m, m - 1, 1, _bw(m), True, True, "canonical", True, False, False)
    if fam is Family.COMPLETE_BIPARTITE:
        (d,) = p
        need(d >= 1, "needs d >= 1")
        return BaseSpec(fam, p, 2 * d, d, 2 if d > 1 else 1, _bw(2 * d), True, True, "canonical", True,
                        False, False)
    if fam is Family.CIRCULANT:
        n, d = p
        need(n > d >= 1, "needs n > d >= 1")
        if n == d + 2:
            return BaseSpec(fam, p, n, d, 2, _bw(n), True, True, "lp", True, False, False)
        return BaseSpec(fam, p, n, d, None, None, False, True, "lp", True, False, False)
    if fam is Family.UNI_RING:
        d, m = p
        need(m >= 2 and d >= 1, "needs m >= 2, d >= 1")
        return BaseSpec(fam, p, m, d, m - 1, _bw(m), True, True, "canonical", True, False, d > 1)
    if fam is Family.BI_RING:
        d, m = p
        need(d >= 2 and d % 2 == 0, "needs even d >= 2")
        need(m >= 3, "needs m >= 3")
        return BaseSpec(fam, p, m, d, m // 2, _bw(m), True, True, "lp", True, False, d > 2)
    if fam is Family.TORUS:
        l, n = p
        need(l >= 2 and n >= 1, "needs l >= 2, n >= 1")
        N = l**n
        return BaseSpec(fam, p, N, n, n * (l - 1), _bw(N), True, True, "canonical", True, False, False)
    if fam is Family.HYPERCUBE:
        (n,) = p
        need(n >= 1, "needs n >= 1")
        N = 2**n
        return BaseSpec(fam, p, N, n, n, _bw(N), True, True, "canonical", True, False, False)
    if fam is Family.HAMMING:
        n, q = p
        need(n >= 1 and q >= 2, "needs n >= 1, q >= 2")
        N = q**n
        return BaseSpec(fam, p, N, n * (q - 1), n, _bw(N), True, True, "canonical", True, False, False)
    if fam is Family.DE_BRUIJN:
        d, n = p
        need(d >= 2 and n >= 1, "needs d >= 2, n >= 1")
        return BaseSpec(fam, p, d**n, d, None, None, n <= 1, True, "lp", True, True, False)
    if fam is Family.DBJ_MOD:
        d, n = p
        need(d >= 2 and n >= 2, "needs d >= 2, n >= 2")
        N = d**n
        if p in DBJMOD_LATENCY:
            return BaseSpec(fam, p, N, d, DBJMOD_LATENCY[p], _bw(N), True, p in DBJMOD_SKEW,
                            "import-only", False, False, False)
        return BaseSpec(fam, p, N, d, None, None, False, False, "lp", False, False, False)
    if fam is Family.GEN_KAUTZ:
        d, m = p
        need(d >= 1 and m > d, "needs m > d >= 1")
        return BaseSpec(fam, p, m, d, None, None, m == d + 1, True, "lp", True, m % (d + 1) != 0, False)
    if fam is Family.DIAMOND:
        return BaseSpec(fam, p, 8, 2, 3, Fraction(7, 8), True, False, "import-only", False, False, False)
    if fam is Family.CYCLE_MESH:
        r, c = p
        need(r >= 2 and c >= 2, "needs r, c >= 2")
        N = r * c
        x = 2 * (max(r, c) - 1)
        if r == c:
            return BaseSpec(fam, p, N, 2, x, _bw(N), True, True, "canonical", True, False, False)
        return BaseSpec(fam, p, N, 2, x, None, False, True, "canonical", False, False, False)
    raise BaseParamError(f"unknown family {family}")


# -- constructors -------------------------------------------------------------

def complete(m: int) -> tuple[Digraph, Schedule]:
    base_spec(Family.COMPLETE, (m,))
    arcs = [(i, j) for i in range(m) for j in range(m) if j != i]
    g = Digraph(m, arcs, f"Complete({m})", tuple(range(m)))
    s = Schedule(RS, (Transfer(j, FULL, e, 1) for e, (i, j) in enumerate(arcs)))
    return g, s


def complete_bipartite(d: int) -> tuple[Digraph, Schedule]:
    """K_{d,d}: nodes 0..d-1 on one side, d..2d-1 on the other."""
    base_spec(Family.COMPLETE_BIPARTITE, (d,))
    n = 2 * d
    side = lambda v: v // d
    arcs = [(u, v) for u in range(n) for v in range(n) if side(v) != side(u)]
    g = Digraph(n, arcs, f"CompleteBipartite({d})", tuple(range(n)))
    pieces = split_equal(d)
    transfers = []
    for u in range(n):
        out = g.out_arcs(u)
        for w in range(n):
            if w != u and side(w) == side(u):
                # same-side shard reaches w through every opposite node
                transfers.extend(Transfer(w, c, e, 1) for e, c in zip(out, pieces))
        for e in out:
            # with d = 1 there is nothing to relay, so the direct hop is the only step
            transfers.append(Transfer(g.arcs[e][1], FULL, e, 2 if d > 1 else 1))
    return g, Schedule(RS, transfers)


def circulant(n: int, d: int) -> Digraph:
    base_spec(Family.CIRCULANT, (n, d))
    arcs = [(i, (i + j) % n) for i in range(n) for j in range(1, d + 1)]
    return Digraph(n, arcs, f"Circulant({n},{d})", tuple((-i) % n for i in range(n)))


def uni_ring(d: int, m: int) -> tuple[Digraph, Schedule]:
    """``d`` parallel rings; arc ``i*d + r`` is ring ``r``'s arc out of node ``i``."""
    base_spec(Family.UNI_RING, (d, m))
    arcs = [(i, (i + 1) % m) for i in range(m) for _ in range(d)]
    g = Digraph(m, arcs, f"UniRing({d},{m})", tuple((-i) % m for i in range(m)))
    pieces = split_equal(d)
    transfers = []
    for t in range(1, m):
        for i in range(m):
            root = (i - t) % m
            for r in range(d):
                transfers.append(Transfer(root, pieces[r], i * d + r, t))
    return g, Schedule(RS, transfers)


def bi_ring(d: int, m: int) -> Digraph:
    base_spec(Family.BI_RING, (d, m))
    half = d // 2
    arcs = []
    for i in range(m):
        arcs += [(i, (i + 1) % m)] * half
        arcs += [(i, (i - 1) % m)] * half
    return Digraph(m, arcs, f"BiRing({d},{m})", tuple(range(m)))


def _power_base(g: Digraph, s: Schedule, n: int, label: str) -> tuple[Digraph, Schedule]:
    from .expansions import cartesian_power, power_schedule

    ag = dualize(s, g, g.skew_witness)
    big = cartesian_power(g, n)
    big_ag = power_schedule(g, ag, n)
    rs = dualize(big_ag, big, big.skew_witness)
    return Digraph(big.n, big.arcs, label, big.skew_witness), rs


def torus(l: int, n: int) -> tuple[Digraph, Schedule]:
    base_spec(Family.TORUS, (l, n))
    g, s = uni_ring(1, l)
    return _power_base(g, s, n, f"Torus({l},{n})")


def hypercube(n: int) -> tuple[Digraph, Schedule]:
    base_spec(Family.HYPERCUBE, (n,))
    g, s = complete(2)
    return _power_base(g, s, n, f"Hypercube({n})")


def hamming(n: int, q: int) -> tuple[Digraph, Schedule]:
    base_spec(Family.HAMMING, (n, q))
    g, s = complete(q)
    return _power_base(g, s, n, f"Hamming({n},{q})")


def _digits(v: int, d: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        v, r = divmod(v, d)
        out.append(r)
    return out[::-1]


def _undigits(ds, d: int) -> int:
    v = 0
    for x in ds:
        v = v * d + x
    return v


def de_bruijn(d: int, n: int) -> Digraph:
    """Node ``s`` is a d-ary string read most significant digit first; s -> s*d + b."""
    base_spec(Family.DE_BRUIJN, (d, n))
    N = d**n
    arcs = [(s, (s * d + b) % N) for s in range(N) for b in range(d)]
    reverse = tuple(_undigits(_digits(s, d, n)[::-1], d) for s in range(N))
    return Digraph(N, arcs, f"DeBruijn({d},{n})", reverse)


def _hamiltonian_cycles(nodes: list[int], adj: dict[int, list[int]], budget: int):
    """Directed Hamiltonian cycles from the lowest node, in DFS order."""
    start = nodes[0]
    path = [start]
    used = {start}
    steps = 0

    def extend():
        nonlocal steps
        steps += 1
        if steps > budget:
            raise SearchBudgetExceeded("Hamiltonian cycle search budget exhausted")
        if len(path) == len(nodes):
            if start in adj[path[-1]]:
                yield list(path)
            return
        for v in adj[path[-1]]:
            if v not in used:
                path.append(v)
                used.add(v)
                yield from extend()
                path.pop()
                used.discard(v)

    return extend()


def _hamiltonian_rotation(nodes: list[int], adj: dict[int, list[int]], budget: int) -> list[int] | None:
    """Rotation-extension search; reliable on dense graphs (Ore's condition)."""
    sets = {v: set(adj[v]) for v in nodes}
    path = [nodes[0]]
    on_path = {nodes[0]}
    for _ in range(budget):
        end = path[-1]
        fresh = [v for v in adj[end] if v not in on_path]
        if fresh:
            path.append(fresh[0])
            on_path.add(fresh[0])
            continue
        if len(path) == len(nodes) and path[0] in sets[end]:
            return path
        if len(path) == len(nodes):
            # close by rotation: find i with path[i] ~ end and path[i+1] ~ path[0]
            for i in range(len(path) - 1):
                if path[i] in sets[end] and path[i + 1] in sets[path[0]]:
                    return path[: i + 1] + path[i + 1:][::-1]
        # rotate at the first usable pivot that makes progress possible
        rotated = False
        for i in range(len(path) - 2):
            if path[i] in sets[end]:
                candidate = path[: i + 1] + path[i + 1:][::-1]
                if any(v not in on_path for v in adj[candidate[-1]]) or len(path) == len(nodes):
                    path = candidate
                    rotated = True
                    break
        if not rotated:
            for i in range(len(path) - 2):
                if path[i] in sets[end]:
                    path = path[: i + 1] + path[i + 1:][::-1]
                    rotated = True
                    break
        if not rotated:
            return None
    raise SearchBudgetExceeded("rotation search budget exhausted")


def dbj_mod(d: int, n: int, budget: int = 10**6) -> Digraph:
    """De Bruijn graph with its self-loops and 2-cycles replaced by one long cycle.

    The d^2 affected nodes are joined by a Hamiltonian cycle of the
    admissibility graph: a pair may be linked when the de Bruijn graph has
    no arc between them, or when they formed a removed 2-cycle.
    """
    base_spec(Family.DBJ_MOD, (d, n))
    g = de_bruijn(d, n)
    arcs = list(g.arcs)
    present = set(arcs)
    removed = set()
    affected = set()
    for u, v in arcs:
        if u == v or (v, u) in present:
            removed.add((u, v))
            affected.update((u, v))
    kept = [a for a in arcs if a not in removed]
    nodes = sorted(affected)
    adj: dict[int, list[int]] = {}
    for u in nodes:
        adj[u] = [v for v in nodes if v != u and (
            ((u, v) not in present and (v, u) not in present) or (u, v) in removed)]
    target = DBJMOD_LATENCY.get((d, n))

    def build(cycle):
        ring = [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        return Digraph(g.n, kept + ring, f"DBJMod({d},{n})")

    if d >= 4:
        cycle = _hamiltonian_rotation(nodes, adj, budget)
        if cycle is not None:
            h = build(cycle)
            if target is None or diameter(h) == target:
                return h
    # Exhaustive order; tabulated sizes take the first cycle meeting their latency.
    first = None
    for cycle in _hamiltonian_cycles(nodes, adj, budget):
        h = build(cycle)
        if target is None or diameter(h) == target:
            return h
        first = first or h
    if first is None:
        raise GraphError(f"no Hamiltonian cycle among affected nodes of DeBruijn({d},{n})")
    return first


def gen_kautz(d: int, m: int) -> Digraph:
    """Arcs x -> (-d*x - a) mod m for a = 1..d."""
    base_spec(Family.GEN_KAUTZ, (d, m))
    arcs = [(x, (-d * x - a) % m) for x in range(m) for a in range(1, d + 1)]
    return Digraph(m, arcs, f"GenKautz({d},{m})")


def diamond() -> Digraph:
    return Digraph(8, DIAMOND_ARCS, "Diamond")


def _ring_sweep(rings, labels, holdings, subshard: ChunkSet, arc_of, start: int) -> list[Transfer]:
    """Pipelined dissemination along rings.

    ``rings`` lists node sequences; ``labels[v]`` names the data block
    ``holdings[label]`` (a list of roots) that ``v`` already holds for this
    subshard. Each holder streams its block to the positions up to the next
    holder of the same label, cut into as many pieces as the phase allows.
    """
    lo, hi = subshard.intervals[0]
    transfers = []
    for ring in rings:
        b = len(ring)
        for h, v in enumerate(ring):
            lab = labels[v]
            span = 0
            while span < b - 1 and labels[ring[(h + span + 1) % b]] != lab:
                span += 1
            if span == 0:
                continue
            k = b - span
            for q in range(k):
                piece = ChunkSet([(lo + (hi - lo) * Fraction(q, k), lo + (hi - lo) * Fraction(q + 1, k))])
                for j in range(span):
                    sender = ring[(h + j) % b]
                    receiver = ring[(h + j + 1) % b]
                    arc = arc_of[(sender, receiver)]
                    for root in holdings[lab]:
                        transfers.append(Transfer(root, piece, arc, start + q + j))
    return transfers


def cycle_mesh(r: int, c: int) -> tuple[Digraph, Schedule]:
    """Two ring covers of r*c nodes: contiguous blocks and stride rings.

    With a = min(r, c) and b = max(r, c), node p has one arc to the next
    node of its block of length b and one arc to p + a. Half of each shard
    is gathered along blocks then stride rings, the other half the other
    way round, so latency is 2(b - 1).
    """
    base_spec(Family.CYCLE_MESH, (r, c))
    a, b = min(r, c), max(r, c)
    N = a * b
    arcs = []
    arc_of = {}
    for p in range(N):
        k, s = divmod(p, b)
        nxt = k * b + (s + 1) % b
        arc_of[(p, nxt)] = len(arcs)
        arcs.append((p, nxt))
        arc_of[(p, (p + a) % N)] = len(arcs)
        arcs.append((p, (p + a) % N))
    g = Digraph(N, arcs, f"CycleMesh({r},{c})", tuple(N - 1 - p for p in range(N)))
    blocks = [[k * b + s for s in range(b)] for k in range(a)]
    strides = [[(i + a * j) % N for j in range(b)] for i in range(a)]
    first = ChunkSet([(0, Fraction(1, 2))])
    second = ChunkSet([(Fraction(1, 2), 1)])
    own = {p: p for p in range(N)}
    own_hold = {p: [p] for p in range(N)}
    block_of = {p: p // b for p in range(N)}
    stride_of = {p: p % a for p in range(N)}
    by_block = {k: blocks[k] for k in range(a)}
    by_stride = {i: sorted(strides[i]) for i in range(a)}
    transfers = []
    transfers += _ring_sweep(blocks, own, own_hold, first, arc_of, 1)
    transfers += _ring_sweep(strides, own, own_hold, second, arc_of, 1)
    transfers += _ring_sweep(strides, block_of, by_block, first, arc_of, b)
    transfers += _ring_sweep(blocks, stride_of, by_stride, second, arc_of, b)
    ag = Schedule(AG, transfers)
    return g, dualize(ag, g, g.skew_witness)


# -- dispatch -----------------------------------------------------------------

def build_graph(family: Family | str, params=()) -> Digraph:
    spec = base_spec(family, params)
    fam, p = spec.family, spec.params
    if fam is Family.CIRCULANT:
        return circulant(*p)
    if fam is Family.BI_RING:
        return bi_ring(*p)
    if fam is Family.DE_BRUIJN:
        return de_bruijn(*p)
    if fam is Family.DBJ_MOD:
        return dbj_mod(*p)
    if fam is Family.GEN_KAUTZ:
        return gen_kautz(*p)
    if fam is Family.DIAMOND:
        return diamond()
    return _CANONICAL[fam](*p)[0]


_CANONICAL = {
    Family.COMPLETE: complete,
    Family.COMPLETE_BIPARTITE: complete_bipartite,
    Family.UNI_RING: uni_ring,
    Family.TORUS: torus,
    Family.HYPERCUBE: hypercube,
    Family.HAMMING: hamming,
    Family.CYCLE_MESH: cycle_mesh,
}


@lru_cache(maxsize=256)
def build_base(family: Family | str, params=()) -> tuple[Digraph, Schedule, CostVector]:
    """Graph, reduce-scatter schedule and measured cost for a base.

    Canonical schedules are used where they exist; otherwise the optimal
    shortest-path schedule from the LP stands in (also for import-only
    bases, whose tabulated schedules came from an external solver).
    """
    from .schedule import cost_vector
    from .spsched import lp_schedule

    spec = base_spec(family, params)
    if spec.family in _CANONICAL:
        g, s = _CANONICAL[spec.family](*spec.params)
        return g, s, cost_vector(s, g)
    g = build_graph(spec.family, spec.params)
    s, cost = lp_schedule(g)
    return g, s, cost


def moore_latency(n: int, d: int) -> int:
    """Smallest k with n <= M_{d,k}."""
    k = 0
    while moore_bound(d, k) < n:
        k += 1
    return k
