"""Pareto search over topology expressions for a target size and degree.

Costs are composed analytically from base annotations with the expansion
rules. A dynamic program runs over states (N', d') with N' dividing the
target size and d' at most the target degree, keeping at every state only
entries not beaten by another entry with at least the same capabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from .bases import DBJMOD_LATENCY, Family, base_spec, build_graph, gen_kautz, moore_latency
from .expansions import degree_cost, line_cost, power_cost
from .expr import Base, Deg, Expr, Line, Pow, Prod, Undir, depth, line_count, size, to_text
from .graph import Digraph, is_strongly_connected
from .schedule import CostVector
from .spsched import lp_cost


@dataclass(frozen=True)
class Limits:
    max_depth: int = 6
    max_power: int = 4
    max_lines: int = 6
    cycle_mesh_max_nodes: int = 64
    lp_max_nodes: int = 4096


@dataclass(frozen=True)
class Caps:
    """Capabilities that later expansion rules depend on."""

    sp_opt: bool        # cost is that of an optimal shortest-path schedule
    simple: bool
    loop_free: bool
    skew: bool
    multi_in: bool      # every node has at least two distinct in-neighbours

    def covers(self, other: "Caps") -> bool:
        return all(a or not b for a, b in zip(self._tuple(), other._tuple()))

    def _tuple(self):
        return (self.sp_opt, self.simple, self.loop_free, self.skew, self.multi_in)


@dataclass(frozen=True)
class ParetoEntry:
    expr: Expr
    n_nodes: int
    degree: int
    cost: CostVector
    provenance: str = "analytic"      # "analytic" | "lp-measured"
    exact: bool = True                # False when y is an upper bound
    fallback: bool = False
    caps: Caps = field(default=Caps(False, False, False, False, False), compare=False)
    y_bound: bool = False             # y is the conservative GenKautz bound (fast mode)

    @property
    def text(self) -> str:
        return to_text(self.expr)

    @property
    def bandwidth_optimal(self) -> bool:
        return self.cost.y == Fraction(self.n_nodes - 1, self.n_nodes)

    @property
    def sp_bwopt(self) -> bool:
        return self.caps.sp_opt and self.bandwidth_optimal

    def runtime(self, alpha: float, M: float, B: float) -> float:
        return self.cost.runtime(alpha, M, B)


def _preference(e: ParetoEntry):
    return (not e.fallback, size(e.expr), e.text)


# -- base catalog -------------------------------------------------------------

def _multi_in(g: Digraph) -> bool:
    return all(len(set(g.predecessors(v))) > 1 for v in range(g.n))


@lru_cache(maxsize=None)
def _measured_base(family: Family, params: tuple) -> tuple[CostVector, bool]:
    g = build_graph(family, params)
    return lp_cost(g), _multi_in(g)


@lru_cache(maxsize=None)
def _graph_multi_in(family: Family, params: tuple) -> bool:
    return _multi_in(build_graph(family, params))


def base_entry(family: Family | str, params=()) -> ParetoEntry:
    """Catalog entry for a base: annotated cost where tabulated, else LP."""
    spec = base_spec(family, params)
    caps_kw = dict(sp_opt=spec.shortest_path, simple=not (spec.self_loops or spec.multi_edge),
                   loop_free=not spec.self_loops, skew=spec.skew_symmetric)
    expr = Base(spec.family, spec.params)
    if spec.x is not None and spec.y is not None:
        multi = _multi_in_for(spec)
        return ParetoEntry(expr, spec.n_nodes, spec.degree, CostVector(spec.x, spec.y), "analytic",
                           True, False, Caps(multi_in=multi, **caps_kw))
    if spec.family is Family.CYCLE_MESH:
        from .bases import build_base
        _, _, cost = build_base(spec.family, spec.params)
        multi = _graph_multi_in(spec.family, spec.params)
        return ParetoEntry(expr, spec.n_nodes, spec.degree, cost, "lp-measured", True, False,
                           Caps(multi_in=multi, **caps_kw))
    cost, multi = _measured_base(spec.family, spec.params)
    return ParetoEntry(expr, spec.n_nodes, spec.degree, cost, "lp-measured", True, False,
                       Caps(multi_in=multi, **caps_kw))


def _multi_in_for(spec) -> bool:
    f, p = spec.family, spec.params
    if f is Family.COMPLETE:
        return p[0] >= 3
    if f is Family.COMPLETE_BIPARTITE:
        return p[0] >= 2
    if f is Family.UNI_RING:
        return False
    if f is Family.BI_RING:
        return True
    if f is Family.CIRCULANT:
        return p[1] >= 2
    return _graph_multi_in(f, p)


def _integer_root(n: int, k: int) -> int | None:
    r = round(n ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c >= 2 and c**k == n:
            return c
    return None


def catalog(n: int, d: int, limits: Limits = Limits()) -> list[ParetoEntry]:
    """Base entries of size n and degree d.

    Torus, hypercube and Hamming graphs (and square cycle meshes, which are
    2-D tori) are left out: powers of rings and complete graphs produce them
    with the same costs. GenKautz only enters as a fallback seed.
    """
    out = []

    def add(family, params):
        try:
            base_spec(family, params)
        except ValueError:
            return
        out.append(base_entry(family, params))

    if d == n - 1:
        add(Family.COMPLETE, (n,))
    if n % 2 == 0 and d == n // 2:
        add(Family.COMPLETE_BIPARTITE, (d,))
    if n == d + 2:
        add(Family.CIRCULANT, (n, d))
    if n >= 2:
        add(Family.UNI_RING, (d, n))
    if d % 2 == 0 and n >= 3:
        add(Family.BI_RING, (d, n))
    if d >= 2 and n <= limits.lp_max_nodes:
        k = 1
        while d**k <= n:
            if d**k == n:
                add(Family.DE_BRUIJN, (d, k))
            k += 1
    for (dd, k) in DBJMOD_LATENCY:
        if dd == d and dd**k == n:
            add(Family.DBJ_MOD, (dd, k))
    if (n, d) == (8, 2):
        add(Family.DIAMOND, ())
    if d == 2 and n <= limits.cycle_mesh_max_nodes:
        for r in range(2, math.isqrt(n) + 1):
            if n % r == 0 and r * r != n:      # r == c is the 2-D torus
                add(Family.CYCLE_MESH, (r, n // r))
    return out


# -- fallbacks ----------------------------------------------------------------

def genkautz_bound(n: int) -> Fraction:
    return Fraction(2 * (n - 1), n)


@lru_cache(maxsize=None)
def _genkautz_cost(d: int, n: int) -> CostVector | None:
    g = gen_kautz(d, n)
    if not is_strongly_connected(g):
        return None
    return lp_cost(g)


def fallback_entries(n: int, d: int, fast: bool = False) -> list[ParetoEntry]:
    """Seeds available for any size: BiRing (UniRing for odd d) and GenKautz."""
    out = []
    if d % 2 == 0 and n >= 3:
        out.append(replace(base_entry(Family.BI_RING, (d, n)), fallback=True))
    elif d % 2 == 1 and n >= 2:
        out.append(replace(base_entry(Family.UNI_RING, (d, n)), fallback=True))
    if n > d:
        expr = Base(Family.GEN_KAUTZ, (d, n))
        # only some sizes are skew-symmetric; evaluate() measures it when asked
        caps = Caps(True, n % (d + 1) == 0, n % (d + 1) == 0, False, d >= 2)
        if fast:
            from .graph import diameter
            g = gen_kautz(d, n)
            if is_strongly_connected(g):
                cost = CostVector(diameter(g), genkautz_bound(n))
                out.append(ParetoEntry(expr, n, d, cost, "lp-measured", False, True, caps, y_bound=True))
        else:
            cost = _genkautz_cost(d, n)
            if cost is not None:
                out.append(ParetoEntry(expr, n, d, cost, "lp-measured", True, True, caps))
    return out


# -- composition --------------------------------------------------------------

def compose_line(a: ParetoEntry) -> ParetoEntry:
    equal = a.caps.sp_opt and a.caps.multi_in and a.exact
    caps = Caps(equal, a.caps.loop_free, a.caps.loop_free, a.caps.skew, a.degree >= 2)
    return ParetoEntry(Line(a.expr), a.degree * a.n_nodes, a.degree, line_cost(a.cost, a.n_nodes),
                       "analytic", equal, False, caps)


def compose_degree(a: ParetoEntry, n: int) -> ParetoEntry:
    caps = Caps(False, a.caps.simple, True, a.caps.skew, True)
    return ParetoEntry(Deg(a.expr, n), n * a.n_nodes, n * a.degree, degree_cost(a.cost, a.n_nodes, n),
                       "analytic", a.exact, False, caps)


def compose_power(a: ParetoEntry, n: int) -> ParetoEntry:
    caps = Caps(a.caps.simple and a.sp_bwopt, a.caps.simple, a.caps.loop_free, a.caps.skew, True)
    return ParetoEntry(Pow(a.expr, n), a.n_nodes**n, n * a.degree, power_cost(a.cost, a.n_nodes, n),
                       "analytic", a.exact, False, caps)


def compose_product(a: ParetoEntry, b: ParetoEntry) -> ParetoEntry:
    n = a.n_nodes * b.n_nodes
    caps = Caps(True, True, True, a.caps.skew and b.caps.skew, True)
    return ParetoEntry(Prod(a.expr, b.expr), n, a.degree + b.degree,
                       CostVector(a.cost.x + b.cost.x, Fraction(n - 1, n)), "analytic",
                       a.exact and b.exact, False, caps)


def compose_undirected(a: ParetoEntry) -> ParetoEntry:
    caps = Caps(False, False, a.caps.loop_free, True, a.caps.multi_in)
    return ParetoEntry(Undir(a.expr), a.n_nodes, 2 * a.degree, a.cost, "analytic", a.exact, False, caps)


def can_product(a: ParetoEntry, b: ParetoEntry) -> bool:
    return a.caps.simple and b.caps.simple and a.sp_bwopt and b.sp_bwopt


def _beats(a: ParetoEntry, b: ParetoEntry) -> bool:
    """True when ``a`` makes ``b`` redundant for any later expansion."""
    return (a.cost.x <= b.cost.x and a.cost.y <= b.cost.y and a.caps.covers(b.caps)
            and depth(a.expr) <= depth(b.expr) and line_count(a.expr) <= line_count(b.expr))


def _reduce(entries: list[ParetoEntry]) -> list[ParetoEntry]:
    ordered = sorted(entries, key=lambda e: (e.cost.x, e.cost.y, _preference(e)))
    kept: list[ParetoEntry] = []
    for e in ordered:
        if not any(_beats(k, e) for k in kept):
            kept = [k for k in kept if not _beats(e, k)] + [e]
    return kept


def pareto_front(entries: list[ParetoEntry]) -> list[ParetoEntry]:
    """Non-dominated entries in (x, y); one entry per cost, preferring seeds, then smaller expressions."""
    best: dict[tuple, ParetoEntry] = {}
    for e in entries:
        key = (e.n_nodes, e.degree, e.cost.x, e.cost.y)
        if key not in best or _preference(e) < _preference(best[key]):
            best[key] = e
    items = sorted(best.values(), key=lambda e: (e.cost.x, e.cost.y))
    front = []
    for e in items:
        if not any(f.cost.x <= e.cost.x and f.cost.y <= e.cost.y for f in front):
            front.append(e)
    return front


@lru_cache(maxsize=None)
def _genkautz_skew(d: int, n: int) -> bool:
    from .graph import SearchBudgetExceeded, find_skew_symmetry

    try:
        return find_skew_symmetry(gen_kautz(d, n), 10**5) is not None
    except SearchBudgetExceeded:
        return False


def evaluate(e: Expr, fast: bool = False) -> ParetoEntry:
    """Analytic entry for one expression, following the same rules as the search.

    Products whose operands miss the bandwidth hypothesis are measured by
    materialising the product and solving its LP.
    """
    if isinstance(e, Base):
        if e.family is Family.GEN_KAUTZ:
            d, n = e.params
            for f in fallback_entries(n, d, fast):
                if f.expr == e:
                    return replace(f, caps=replace(f.caps, skew=_genkautz_skew(d, n)))
            raise ValueError(f"{to_text(e)} is not strongly connected")
        return base_entry(e.family, e.params)
    if isinstance(e, Line):
        return compose_line(evaluate(e.inner, fast))
    if isinstance(e, Deg):
        return compose_degree(evaluate(e.inner, fast), e.n)
    if isinstance(e, Pow):
        return compose_power(evaluate(e.inner, fast), e.n)
    if isinstance(e, Undir):
        a = evaluate(e.inner, fast)
        if not a.caps.skew:
            raise ValueError(f"{to_text(e.inner)} is not known to be skew-symmetric")
        return compose_undirected(a)
    if isinstance(e, Prod):
        a, b = evaluate(e.left, fast), evaluate(e.right, fast)
        if can_product(a, b):
            return compose_product(a, b)
        from .materialize import materialize
        m = materialize(e)
        caps = Caps(True, a.caps.simple and b.caps.simple, a.caps.loop_free and b.caps.loop_free,
                    a.caps.skew and b.caps.skew, True)
        return ParetoEntry(e, m.graph.n, a.degree + b.degree, m.cost, "lp-measured", True, False, caps)
    raise TypeError(f"not an expression: {e!r}")


def _divisors(n: int) -> list[int]:
    small = [k for k in range(1, math.isqrt(n) + 1) if n % k == 0]
    return sorted(set(small + [n // k for k in small]))


def search_states(n_target: int, d_target: int, limits: Limits = Limits()) -> dict:
    """Retained entries for every state (N', d') below the target."""
    states = [(n, d) for n in _divisors(n_target) if n >= 2 for d in range(1, d_target + 1)]
    states.sort()
    table: dict[tuple[int, int], list[ParetoEntry]] = {}
    for n, d in states:
        cands = list(catalog(n, d, limits))
        if d >= 2 and n % d == 0:
            for a in table.get((n // d, d), ()):
                if line_count(a.expr) < limits.max_lines and depth(a.expr) < limits.max_depth:
                    cands.append(compose_line(a))
        for k in range(2, d + 1):
            if d % k == 0 and n % k == 0:
                for a in table.get((n // k, d // k), ()):
                    if a.caps.loop_free and depth(a.expr) < limits.max_depth:
                        cands.append(compose_degree(a, k))
        for k in range(2, limits.max_power + 1):
            root = _integer_root(n, k)
            if root is not None and d % k == 0:
                for a in table.get((root, d // k), ()):
                    if depth(a.expr) < limits.max_depth:
                        cands.append(compose_power(a, k))
        for n1 in _divisors(n):
            n2 = n // n1
            if n1 < 2 or n2 < 2:
                continue
            for d1 in range(1, d):
                s1, s2 = (n1, d1), (n2, d - d1)
                if s1 > s2:
                    continue
                left = [a for a in table.get(s1, ()) if depth(a.expr) < limits.max_depth]
                right = [b for b in table.get(s2, ()) if depth(b.expr) < limits.max_depth]
                for i, a in enumerate(left):
                    for j, b in enumerate(right):
                        if s1 == s2 and j < i:
                            continue
                        if can_product(a, b) and line_count(a.expr) + line_count(b.expr) <= limits.max_lines:
                            cands.append(compose_product(a, b))
        if d % 2 == 0:
            for a in table.get((n, d // 2), ()):
                if a.caps.skew and depth(a.expr) < limits.max_depth:
                    cands.append(compose_undirected(a))
        table[(n, d)] = _reduce(cands)
    return table


def enumerate_topologies(n_target: int, d_target: int, limits: Limits = Limits(),
                         fast: bool = False) -> list[ParetoEntry]:
    """Pareto frontier of expressions with exactly ``n_target`` nodes and degree ``d_target``."""
    if n_target < 2 or d_target < 1:
        raise ValueError("target needs N >= 2 and d >= 1")
    table = search_states(n_target, d_target, limits)
    built = table.get((n_target, d_target), [])
    seeds = fallback_entries(n_target, d_target, fast)
    front = pareto_front(built + seeds)
    if any(e.y_bound for e in seeds):
        # The bound only prunes; anything it leaves standing gets its LP value.
        resolved = [e for e in seeds if not e.y_bound]
        for e in seeds:
            if e.y_bound:
                lower = Fraction(n_target - 1, n_target)
                if any(f.cost.x <= e.cost.x and f.cost.y <= lower for f in built + resolved):
                    continue
                cost = _genkautz_cost(d_target, n_target)
                resolved.append(replace(e, cost=cost, exact=True, y_bound=False))
        front = pareto_front(built + resolved)
    return front


# -- runtimes -----------------------------------------------------------------

def best_for(entries: list[ParetoEntry], alpha: float, M: float, B: float,
             collective: str = "rs-ag") -> tuple[ParetoEntry, float]:
    """Entry minimising runtime; allreduce doubles the reduce-scatter time."""
    if not entries:
        raise ValueError("no entries to choose from")
    factor = 2 if collective == "allreduce" else 1
    if collective not in ("rs-ag", "allreduce"):
        raise ValueError(f"unknown collective {collective!r}")
    best = min(entries, key=lambda e: (e.runtime(alpha, M, B), e.cost.x, e.text))
    return best, factor * best.runtime(alpha, M, B)


@dataclass(frozen=True)
class LowerBound:
    x: int
    y: Fraction
    runtime: float


def theoretical_lower_bound(n: int, d: int, alpha: float, M: float, B: float) -> LowerBound:
    x = moore_latency(n, d)
    y = Fraction(n - 1, n)
    return LowerBound(x, y, alpha * x + (M / B) * float(y))


def baseline_costs(n: int, alpha: float, M: float, B: float) -> dict[str, float]:
    """Allreduce time of the classic ring and double binary tree algorithms."""
    if n < 2:
        raise ValueError("baselines need N >= 2")
    ring = 2 * alpha * (n - 1) + 2 * (n - 1) * M / (n * B)
    dbt = 2 * alpha * math.log2(n) + 4 * (M / B) * math.log2(n)
    return {"ring": ring, "dbt": dbt}


@dataclass(frozen=True)
class SweepRow:
    n_nodes: int
    best: ParetoEntry | None
    allreduce: float            # 2 * best reduce-scatter time
    ring: float
    dbt: float
    lower_bound: float          # allreduce lower bound


def sweep(n_values, d: int, alpha: float, M: float, B: float, limits: Limits = Limits(),
          fast: bool = False) -> list[SweepRow]:
    rows = []
    for n in n_values:
        front = enumerate_topologies(n, d, limits, fast) if n >= 2 else []
        base = baseline_costs(n, alpha, M, B)
        lb = theoretical_lower_bound(n, d, alpha, M, B)
        if front:
            best, t = best_for(front, alpha, M, B, "allreduce")
        else:
            best, t = None, math.inf
        rows.append(SweepRow(n, best, t, base["ring"], base["dbt"], 2 * lb.runtime))
    return rows
