"""Directed multigraphs with stable arc ids, distances and isomorphism witnesses."""

from __future__ import annotations

import math
from collections import Counter, deque
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

#: Distance to a node that cannot be reached.
INF = math.inf

DEFAULT_SEARCH_BUDGET = 10**7


class GraphError(ValueError):
    pass


class NotStronglyConnected(GraphError):
    pass


class SearchBudgetExceeded(RuntimeError):
    """The isomorphism search gave up before deciding."""


class Digraph:
    """Directed multigraph on nodes ``0..n-1``.

    Arc ``i`` is ``arcs[i] == (src, dst)``. Parallel arcs and self-loops are
    allowed. Instances are treated as immutable; derived data is cached.
    ``skew_witness`` optionally records a known isomorphism from the
    transpose onto this graph.
    """

    __slots__ = ("n", "arcs", "label", "skew_witness", "_out", "_in", "_dist", "_mult")

    def __init__(self, n: int, arcs: Sequence[tuple[int, int]], label: str = "",
                 skew_witness: Sequence[int] | None = None):
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        arcs = tuple((int(a), int(b)) for a, b in arcs)
        for i, (a, b) in enumerate(arcs):
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"arc {i} endpoint out of range: ({a}, {b}) with n={n}")
        self.n = n
        self.arcs = arcs
        self.label = label
        self.skew_witness = tuple(skew_witness) if skew_witness is not None else None
        out: list[list[int]] = [[] for _ in range(n)]
        inc: list[list[int]] = [[] for _ in range(n)]
        for i, (a, b) in enumerate(arcs):
            out[a].append(i)
            inc[b].append(i)
        self._out = tuple(tuple(x) for x in out)
        self._in = tuple(tuple(x) for x in inc)
        self._dist = None
        self._mult = None

    def __repr__(self) -> str:
        name = self.label or "Digraph"
        return f"<{name}: n={self.n}, arcs={len(self.arcs)}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, Digraph) and self.n == other.n and self.arcs == other.arcs

    def __hash__(self) -> int:
        return hash((self.n, self.arcs))

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def src(self, arc_id: int) -> int:
        return self.arcs[arc_id][0]

    def dst(self, arc_id: int) -> int:
        return self.arcs[arc_id][1]

    def out_arcs(self, u: int) -> tuple[int, ...]:
        return self._out[u]

    def in_arcs(self, u: int) -> tuple[int, ...]:
        return self._in[u]

    def successors(self, u: int) -> list[int]:
        return [self.arcs[e][1] for e in self._out[u]]

    def predecessors(self, u: int) -> list[int]:
        return [self.arcs[e][0] for e in self._in[u]]

    def multiplicity(self) -> Counter:
        """Counter of (src, dst) pairs."""
        if self._mult is None:
            self._mult = Counter(self.arcs)
        return self._mult

    def has_self_loops(self) -> bool:
        return any(a == b for a, b in self.arcs)

    def has_parallel_arcs(self) -> bool:
        return any(c > 1 for c in self.multiplicity().values())

    def is_simple(self) -> bool:
        return not self.has_self_loops() and not self.has_parallel_arcs()

    def two_cycles(self) -> list[tuple[int, int]]:
        """Unordered node pairs {u, v}, u < v, joined in both directions."""
        m = self.multiplicity()
        return sorted({(a, b) for (a, b) in m if a < b and (b, a) in m})

    def distance_matrix(self) -> np.ndarray:
        """All-pairs hop distances as a float array; ``inf`` when unreachable."""
        if self._dist is None:
            rows = [a for a, _ in self.arcs]
            cols = [b for _, b in self.arcs]
            adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
            d = shortest_path(adj, method="D", directed=True, unweighted=True)
            d.setflags(write=False)
            self._dist = d
        return self._dist


def build_digraph(node_count: int, arc_pairs: Iterable[tuple[int, int]], label: str = "") -> Digraph:
    return Digraph(node_count, list(arc_pairs), label)


def regular_degree(g: Digraph) -> int | None:
    """Common in/out degree, or None if the graph is irregular."""
    d = len(g.out_arcs(0))
    for u in range(g.n):
        if len(g.out_arcs(u)) != d or len(g.in_arcs(u)) != d:
            return None
    return d


def transpose(g: Digraph) -> Digraph:
    # A witness f for g also works for the transpose: the defining relation is symmetric.
    label = g.label[2:-1] if g.label.startswith("T(") else (f"T({g.label})" if g.label else "")
    return Digraph(g.n, [(b, a) for a, b in g.arcs], label, g.skew_witness)


def distances_from(g: Digraph, u: int) -> list:
    """BFS hop counts from ``u``; unreachable nodes get ``INF``."""
    dist: list = [INF] * g.n
    dist[u] = 0
    queue = deque([u])
    while queue:
        a = queue.popleft()
        for e in g.out_arcs(a):
            b = g.arcs[e][1]
            if dist[b] == INF:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def distances_to(g: Digraph, v: int) -> list:
    dist: list = [INF] * g.n
    dist[v] = 0
    queue = deque([v])
    while queue:
        b = queue.popleft()
        for e in g.in_arcs(b):
            a = g.arcs[e][0]
            if dist[a] == INF:
                dist[a] = dist[b] + 1
                queue.append(a)
    return dist


def is_strongly_connected(g: Digraph) -> bool:
    return INF not in distances_from(g, 0) and INF not in distances_to(g, 0)


def diameter(g: Digraph) -> int:
    d = g.distance_matrix()
    m = d.max()
    if not np.isfinite(m):
        raise NotStronglyConnected(f"{g!r} is not strongly connected")
    return int(m)


def neighborhood_sizes(g: Digraph, u: int) -> list[int]:
    """``[|N_1(u)|, ..., |N_D(u)|]`` where ``N_x(u)`` is the set at distance x."""
    row = g.distance_matrix()[u]
    if not np.all(np.isfinite(row)):
        raise NotStronglyConnected(f"{g!r} is not strongly connected")
    counts = np.bincount(row.astype(np.int64), minlength=int(row.max()) + 1)
    return [int(c) for c in counts[1:]]


def moore_bound(d: int, k: int) -> int:
    """Maximum node count of a degree-d digraph of diameter k."""
    if d < 1 or k < 0:
        raise ValueError("moore_bound needs d >= 1 and k >= 0")
    return sum(d**i for i in range(k + 1))


def inverse_map(f: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(f)
    for i, j in enumerate(f):
        inv[j] = i
    return tuple(inv)


def compose_maps(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    """The map ``x -> f[g[x]]``."""
    return tuple(f[x] for x in g)


def is_permutation(f: Sequence[int], n: int) -> bool:
    return len(f) == n and sorted(f) == list(range(n))


def verify_isomorphism(a: Digraph, b: Digraph, f: Sequence[int]) -> bool:
    """True iff ``f`` carries the arcs of ``a`` onto the arcs of ``b`` with multiplicity."""
    if a.n != b.n or len(a.arcs) != len(b.arcs) or not is_permutation(f, a.n):
        return False
    mapped = Counter((f[s], f[t]) for s, t in a.arcs)
    return mapped == b.multiplicity()


def arc_mapping(a: Digraph, b: Digraph, f: Sequence[int]) -> list[int]:
    """Arc-level version of a node isomorphism.

    The k-th arc of ``a`` between (s, t) goes to the k-th arc of ``b``
    between (f[s], f[t]), both counted in arc-id order.
    """
    slots: dict[tuple[int, int], list[int]] = {}
    for e, pair in enumerate(b.arcs):
        slots.setdefault(pair, []).append(e)
    used: Counter = Counter()
    out = []
    for s, t in a.arcs:
        key = (f[s], f[t])
        bucket = slots.get(key)
        k = used[key]
        if bucket is None or k >= len(bucket):
            raise GraphError("node map is not an isomorphism")
        out.append(bucket[k])
        used[key] += 1
    return out


def _signatures(g: Digraph) -> list[tuple]:
    d = g.distance_matrix()
    fin = np.where(np.isfinite(d), d, -1).astype(np.int64)
    sigs = []
    for u in range(g.n):
        loops = sum(1 for e in g.out_arcs(u) if g.arcs[e][1] == u)
        out_prof = tuple(np.bincount(fin[u] + 1).tolist())
        in_prof = tuple(np.bincount(fin[:, u] + 1).tolist())
        sigs.append((len(g.out_arcs(u)), len(g.in_arcs(u)), loops, out_prof, in_prof))
    return sigs


def find_isomorphism(a: Digraph, b: Digraph, budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[int, ...] | None:
    """Backtracking isomorphism search from ``a`` onto ``b``.

    Candidates are filtered by degree and distance-profile signatures and
    tried in increasing node order, so the result is deterministic.
    Raises SearchBudgetExceeded when more than ``budget`` candidate
    assignments were tried without a decision.
    """
    n = a.n
    if n != b.n or len(a.arcs) != len(b.arcs):
        return None
    sig_a, sig_b = _signatures(a), _signatures(b)
    if sorted(sig_a) != sorted(sig_b):
        return None
    by_sig: dict[tuple, list[int]] = {}
    for v in range(n):
        by_sig.setdefault(sig_b[v], []).append(v)

    # Visit order: BFS over the underlying undirected graph so each node after
    # the first in its component has an already placed neighbour.
    und_a = [sorted(set(a.successors(u)) | set(a.predecessors(u))) for u in range(n)]
    order: list[int] = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in und_a[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    pos = {u: i for i, u in enumerate(order)}
    anchor = []
    for i, u in enumerate(order):
        prev = [w for w in und_a[u] if pos[w] < i]
        anchor.append(min(prev, key=pos.get) if prev else None)

    f = [-1] * n
    used = [False] * n
    steps = 0

    def consistent(u: int, c: int) -> bool:
        # arcs between u and placed nodes (and u itself) must match in both graphs
        want_out = Counter()
        for e in a.out_arcs(u):
            w = a.arcs[e][1]
            if w == u:
                want_out[c] += 1
            elif f[w] >= 0:
                want_out[f[w]] += 1
        have_out = Counter()
        for e in b.out_arcs(c):
            x = b.arcs[e][1]
            if x == c or used[x]:
                have_out[x] += 1
        if want_out != have_out:
            return False
        want_in = Counter()
        for e in a.in_arcs(u):
            w = a.arcs[e][0]
            if w != u and f[w] >= 0:
                want_in[f[w]] += 1
        have_in = Counter()
        for e in b.in_arcs(c):
            x = b.arcs[e][0]
            if x != c and used[x]:
                have_in[x] += 1
        return want_in == have_in

    und_b = [sorted(set(b.successors(v)) | set(b.predecessors(v))) for v in range(n)]

    def place(i: int) -> bool:
        nonlocal steps
        if i == n:
            return True
        u = order[i]
        if anchor[i] is None:
            pool = by_sig[sig_a[u]]
        else:
            pool = [c for c in und_b[f[anchor[i]]] if sig_b[c] == sig_a[u]]
        for c in pool:
            if used[c]:
                continue
            steps += 1
            if steps > budget:
                raise SearchBudgetExceeded(f"isomorphism search exceeded {budget} steps")
            if not consistent(u, c):
                continue
            f[u] = c
            used[c] = True
            if place(i + 1):
                return True
            f[u] = -1
            used[c] = False
        return False

    import sys
    limit = sys.getrecursionlimit()
    if limit < n + 100:
        sys.setrecursionlimit(n + 100)
    try:
        found = place(0)
    finally:
        sys.setrecursionlimit(limit)
    return tuple(f) if found else None


def find_skew_symmetry(g: Digraph, budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[int, ...] | None:
    """Isomorphism ``f`` from ``transpose(g)`` to ``g``, or None when none exists.

    A witness attached by the constructor is returned after verification.
    """
    gt = transpose(g)
    if g.skew_witness is not None and verify_isomorphism(gt, g, g.skew_witness):
        return g.skew_witness
    return find_isomorphism(gt, g, budget)


def with_witness(g: Digraph, witness: Sequence[int] | None) -> Digraph:
    return Digraph(g.n, g.arcs, g.label, witness)


def relabel(g: Digraph, label: str) -> Digraph:
    return Digraph(g.n, g.arcs, label, g.skew_witness)
