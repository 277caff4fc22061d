"""Per-layer allreduce simulation over a trace of gradient-ready times.

Layer i finishes at ``f_i = max(f_{i-1}, r_i) + 2 (alpha x + (M_i / B) y)``
with ``f_0 = 0``: allreduces run one at a time, in ready order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bases import moore_latency
from .schedule import CostVector


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class LayerTrace:
    ready: tuple[float, ...]      # seconds
    size_bits: tuple[float, ...]

    def __post_init__(self):
        if len(self.ready) != len(self.size_bits):
            raise TraceError("ready times and sizes differ in length")
        if any(b < a for a, b in zip(self.ready, self.ready[1:])):
            raise TraceError("layers must be sorted by ready time")
        if any(m <= 0 for m in self.size_bits):
            raise TraceError("layer sizes must be positive")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "LayerTrace":
        return cls(tuple(float(r) for r, _ in pairs), tuple(float(m) for _, m in pairs))

    def __len__(self) -> int:
        return len(self.ready)


@dataclass
class SimResult:
    finish: list[float] = field(default_factory=list)
    durations: list[float] = field(default_factory=list)

    @property
    def f_max(self) -> float:
        return self.finish[-1] if self.finish else 0.0

    @property
    def avg_layer(self) -> float:
        return sum(self.durations) / len(self.durations) if self.durations else 0.0


def simulate(trace: LayerTrace, cost: CostVector, alpha: float, B: float) -> SimResult:
    return _run(trace, cost.x, float(cost.y), alpha, B)


def _run(trace: LayerTrace, x: float, y: float, alpha: float, B: float) -> SimResult:
    out = SimResult()
    f = 0.0
    for r, m in zip(trace.ready, trace.size_bits):
        dur = 2 * (alpha * x + (m / B) * y)
        f = max(f, r) + dur
        out.finish.append(f)
        out.durations.append(dur)
    return out


def ring_cost(n: int) -> CostVector:
    return CostVector(n - 1, Fraction(n - 1, n))


@dataclass(frozen=True)
class CompareRow:
    name: str
    f_max: float
    avg_layer: float


def compare(trace: LayerTrace, entries, alpha: float, B: float, n: int, d: int) -> list[CompareRow]:
    """Simulate every entry plus ring, double binary tree and lower bound."""
    rows = []
    for e in entries:
        res = simulate(trace, e.cost, alpha, B)
        rows.append(CompareRow(e.text, res.f_max, res.avg_layer))
    k = math.log2(n)
    baselines = (("ring", n - 1, (n - 1) / n), ("dbt", k, 2 * k),
                 ("lower-bound", moore_latency(n, d), (n - 1) / n))
    for name, x, y in baselines:
        res = _run(trace, x, y, alpha, B)
        rows.append(CompareRow(name, res.f_max, res.avg_layer))
    return rows
