"""Schedules as timed sets of chunk transfers, with validation and costs.

A transfer ``((w, C), (u, v), t)`` sends chunk ``C`` of root ``w``'s shard
over arc ``(u, v)`` at step ``t``. For reduce-scatter the root is the node
that ends up owning the reduced shard; for allgather it is the node whose
shard is being spread.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .chunks import FULL, ChunkSet
from .graph import (
    Digraph,
    arc_mapping,
    diameter,
    moore_bound,
    regular_degree,
    transpose,
    verify_isomorphism,
)


class ScheduleError(ValueError):
    pass


class Kind(str, Enum):
    REDUCE_SCATTER = "reduce-scatter"
    ALLGATHER = "allgather"

    def flipped(self) -> "Kind":
        return Kind.ALLGATHER if self is Kind.REDUCE_SCATTER else Kind.REDUCE_SCATTER


RS = Kind.REDUCE_SCATTER
AG = Kind.ALLGATHER


class Transfer(NamedTuple):
    root: int
    chunk: ChunkSet
    arc: int
    step: int


class Schedule:
    """An immutable collection of transfers of one collective kind.

    ``t_max`` may exceed the last busy step: constructions such as the line
    expansion of K_2 contain idle rounds, which still cost a step each.
    """

    __slots__ = ("kind", "transfers", "t_max")

    def __init__(self, kind: Kind | str, transfers: Iterable[Transfer], t_max: int | None = None):
        self.kind = Kind(kind)
        items = []
        for tr in transfers:
            tr = Transfer(*tr)
            if tr.step < 1:
                raise ScheduleError(f"step must be >= 1, got {tr.step}")
            if not tr.chunk:
                raise ScheduleError("transfer with empty chunk")
            items.append(tr)
        self.transfers = tuple(items)
        self.t_max = max(max((tr.step for tr in items), default=0), t_max or 0)

    def __len__(self) -> int:
        return len(self.transfers)

    def __repr__(self) -> str:
        return f"<Schedule {self.kind.value}: {len(self.transfers)} transfers, t_max={self.t_max}>"

    def by_step(self) -> dict[int, list[Transfer]]:
        out: dict[int, list[Transfer]] = defaultdict(list)
        for tr in self.transfers:
            out[tr.step].append(tr)
        return dict(sorted(out.items()))

    def shifted(self, offset: int) -> "Schedule":
        return Schedule(self.kind, (tr._replace(step=tr.step + offset) for tr in self.transfers),
                        self.t_max + offset)

    def canonical(self) -> tuple:
        """Order-independent key, handy for comparing schedules."""
        return (self.kind, tuple(sorted((t.step, t.arc, t.root, t.chunk.intervals) for t in self.transfers)))


@dataclass(frozen=True)
class CostModel:
    alpha: float          # seconds per communication step
    bandwidth_B: float    # bits per second per node
    model_M: float        # bits
    degree_d: int

    def __post_init__(self):
        if min(self.alpha, self.bandwidth_B, self.model_M, self.degree_d) <= 0:
            raise ValueError("cost model parameters must be positive")

    @property
    def m_over_b(self) -> float:
        return self.model_M / self.bandwidth_B


@dataclass(frozen=True, order=True)
class CostVector:
    """Latency steps ``x`` and bandwidth coefficient ``y``: runtime = alpha*x + (M/B)*y."""

    x: int
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "y", Fraction(self.y))
        if self.x < 0 or self.y < 0:
            raise ValueError("cost components must be non-negative")

    def runtime(self, alpha: float, M: float, B: float) -> float:
        return alpha * self.x + (M / B) * float(self.y)

    def dominates(self, other: "CostVector") -> bool:
        return self.x <= other.x and self.y <= other.y and (self.x, self.y) != (other.x, other.y)


@dataclass
class ValidationReport:
    ok: bool
    missing: list = field(default_factory=list)   # (root, peer, uncovered ChunkSet)

    def __bool__(self) -> bool:
        return self.ok


def _check_arcs(s: Schedule, g: Digraph) -> None:
    m = len(g.arcs)
    for tr in s.transfers:
        if not 0 <= tr.arc < m:
            raise ScheduleError(f"arc id {tr.arc} not in graph with {m} arcs")
        if not 0 <= tr.root < g.n:
            raise ScheduleError(f"root {tr.root} out of range")


def validate(s: Schedule, g: Digraph) -> ValidationReport:
    """Check the coverage condition of reduce-scatter or allgather.

    The shard of every root is cut into atoms at all chunk endpoints used
    for that root. For each atom a bitmask of nodes is propagated step by
    step; transfers in a step only see the state before the step.
    """
    _check_arcs(s, g)
    n = g.n
    full_mask = (1 << n) - 1
    per_root: dict[int, list[Transfer]] = defaultdict(list)
    for tr in s.transfers:
        per_root[tr.root].append(tr)
    missing = []
    for v in range(n):
        items = sorted(per_root.get(v, ()), key=lambda tr: tr.step)
        cuts = {Fraction(0), Fraction(1)}
        for tr in items:
            cuts.update(tr.chunk.endpoints())
        cuts = sorted(cuts)
        index = {x: i for i, x in enumerate(cuts)}
        n_atoms = len(cuts) - 1
        spans = [[(index[a], index[b]) for a, b in tr.chunk.intervals] for tr in items]

        if s.kind is RS:
            # cover[w][k]: sources whose atom-k data for root v has reached w
            cover = [[1 << w] * n_atoms for w in range(n)]
            i = 0
            while i < len(items):
                step = items[i].step
                updates = []
                while i < len(items) and items[i].step == step:
                    a, b = g.arcs[items[i].arc]
                    ca = cover[a]
                    for lo, hi in spans[i]:
                        updates.append((b, lo, ca[lo:hi]))
                    i += 1
                for b, lo, vals in updates:
                    cb = cover[b]
                    for off, val in enumerate(vals):
                        cb[lo + off] |= val
            final = cover[v]
            lacking = [full_mask & ~final[k] for k in range(n_atoms)]
        else:
            # hold[k]: nodes holding atom k of v's shard
            hold = [1 << v] * n_atoms
            i = 0
            while i < len(items):
                step = items[i].step
                new = list(hold)
                while i < len(items) and items[i].step == step:
                    a, b = g.arcs[items[i].arc]
                    bit_a, bit_b = 1 << a, 1 << b
                    for lo, hi in spans[i]:
                        for k in range(lo, hi):
                            if hold[k] & bit_a:
                                new[k] |= bit_b
                    i += 1
                hold = new
            lacking = [full_mask & ~hold[k] for k in range(n_atoms)]

        if any(lacking):
            gaps: dict[int, list] = defaultdict(list)
            for k, mask in enumerate(lacking):
                while mask:
                    low = mask & -mask
                    gaps[low.bit_length() - 1].append((cuts[k], cuts[k + 1]))
                    mask ^= low
            for peer in sorted(gaps):
                missing.append((v, peer, ChunkSet(gaps[peer])))
    return ValidationReport(not missing, missing)


def arc_loads(s: Schedule) -> dict[int, dict[int, Fraction]]:
    """``{step: {arc_id: total chunk measure}}``."""
    loads: dict[int, dict[int, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
    for tr in s.transfers:
        loads[tr.step][tr.arc] += tr.chunk.measure()
    return {t: dict(v) for t, v in sorted(loads.items())}


def _degree(g: Digraph) -> int:
    d = regular_degree(g)
    if d is None:
        raise ScheduleError(f"{g!r} is not regular")
    return d


def step_coefficients(s: Schedule, g: Digraph) -> list[Fraction]:
    """Per-step bandwidth coefficients; T_B of step t is (M/B) times entry t-1."""
    d = _degree(g)
    loads = arc_loads(s)
    scale = Fraction(d, g.n)
    return [scale * max(loads[t].values()) if t in loads else Fraction(0)
            for t in range(1, s.t_max + 1)]


def bandwidth_coefficient(s: Schedule, g: Digraph) -> Fraction:
    """Exact y with T_B = (M/B) * y."""
    return sum(step_coefficients(s, g), Fraction(0))


def cost_vector(s: Schedule, g: Digraph) -> CostVector:
    return CostVector(s.t_max, bandwidth_coefficient(s, g))


def latency_T_L(s: Schedule, cm: CostModel) -> float:
    return s.t_max * cm.alpha


def bandwidth_T_B(s: Schedule, g: Digraph, cm: CostModel) -> tuple[float, list[float]]:
    """Total bandwidth time in seconds and its per-step breakdown."""
    d = _degree(g)
    if d != cm.degree_d:
        raise ScheduleError(f"graph degree {d} differs from cost model degree {cm.degree_d}")
    per_step = [float(c) * cm.m_over_b for c in step_coefficients(s, g)]
    return sum(per_step), per_step


def reverse_schedule(s: Schedule) -> Schedule:
    """Run the schedule backwards on the transpose graph, flipping its kind."""
    t = s.t_max
    return Schedule(s.kind.flipped(), (tr._replace(step=t - tr.step + 1) for tr in s.transfers), t)


def map_schedule(s: Schedule, f: Sequence[int], g_target: Digraph, source: Digraph) -> Schedule:
    """Relabel roots and arcs of a schedule on ``source`` through the isomorphism ``f``."""
    if not verify_isomorphism(source, g_target, f):
        raise ScheduleError("map is not an isomorphism onto the target graph")
    amap = arc_mapping(source, g_target, f)
    return Schedule(s.kind, (Transfer(f[tr.root], tr.chunk, amap[tr.arc], tr.step) for tr in s.transfers),
                    s.t_max)


def dualize(s: Schedule, g: Digraph, f: Sequence[int]) -> Schedule:
    """Turn a schedule on a skew-symmetric graph into one of the opposite kind.

    ``f`` must map ``transpose(g)`` onto ``g``.
    """
    gt = transpose(g)
    if not verify_isomorphism(gt, g, f):
        raise ScheduleError("witness is not an isomorphism from the transpose")
    return map_schedule(reverse_schedule(s), f, g, gt)


def remap_arcs(s: Schedule, source: Digraph, target: Digraph) -> Schedule:
    """Move a schedule onto a graph with the same arcs listed in another order."""
    return map_schedule(s, tuple(range(source.n)), target, source)


@dataclass
class BandwidthReport:
    optimal: bool
    equal_loads: bool
    exact_cover: bool
    y: Fraction
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.optimal


def _chunks_by_node_root(s: Schedule, g: Digraph, *, received: bool) -> dict:
    out: dict[tuple[int, int], list[ChunkSet]] = defaultdict(list)
    for tr in s.transfers:
        a, b = g.arcs[tr.arc]
        out[(b if received else a, tr.root)].append(tr.chunk)
    return out


def check_bandwidth_optimal(s: Schedule, g: Digraph) -> BandwidthReport:
    """Equal per-step loads on every arc, and every element handled exactly once.

    For reduce-scatter each node sends each element of every other root's
    shard exactly once; for allgather each node receives it exactly once.
    """
    violations = []
    loads = arc_loads(s)
    m = len(g.arcs)
    equal = True
    for t in range(1, s.t_max + 1):
        row = loads.get(t, {})
        values = set(row.values())
        if len(row) < m:
            values.add(Fraction(0))
        if len(values) > 1:
            equal = False
            violations.append(f"step {t}: unequal arc loads {sorted(values)}")
    groups = _chunks_by_node_root(s, g, received=s.kind is AG)
    exact = True
    for u in range(g.n):
        for w in range(g.n):
            if u == w:
                continue
            chunks = groups.get((u, w), [])
            total = sum((c.measure() for c in chunks), Fraction(0))
            union = ChunkSet(iv for c in chunks for iv in c.intervals)
            if total != 1 or not union.is_full():
                exact = False
                violations.append(f"node {u}, root {w}: handled measure {total}")
    y = bandwidth_coefficient(s, g)
    target = Fraction(g.n - 1, g.n)
    if y != target:
        violations.append(f"y = {y}, expected {target}")
    return BandwidthReport(equal and exact and y == target, equal, exact, y, violations)


def check_moore_optimal(s: Schedule, g: Digraph) -> bool:
    d = _degree(g)
    k = s.t_max
    return k >= 1 and g.n > moore_bound(d, k - 1)


def is_shortest_path_schedule(s: Schedule, g: Digraph) -> bool:
    dist = g.distance_matrix()
    D = diameter(g)
    for tr in s.transfers:
        u, w = g.arcs[tr.arc]
        v = tr.root
        if s.kind is RS:
            if not (dist[u, v] == dist[w, v] + 1 == D + 1 - tr.step):
                return False
        elif not (dist[v, u] == dist[v, w] - 1 == tr.step - 1):
            return False
    groups = _chunks_by_node_root(s, g, received=s.kind is AG)
    for u in range(g.n):
        for v in range(g.n):
            if u != v:
                chunks = groups.get((u, v), [])
                if not ChunkSet(iv for c in chunks for iv in c.intervals).is_full():
                    return False
    return True
