"""Exact sub-interval sets of the unit shard [0, 1)."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

Interval = tuple[Fraction, Fraction]


def _normalize(intervals: Iterable[tuple]) -> tuple[Interval, ...]:
    items = sorted((Fraction(a), Fraction(b)) for a, b in intervals)
    out: list[list[Fraction]] = []
    for a, b in items:
        if b <= a:
            continue
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


class ChunkSet:
    """A finite union of half-open intervals inside the unit shard.

    Intervals are kept sorted, disjoint and merged, so two chunk sets are
    equal exactly when they cover the same points.
    """

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[tuple] = ()):
        iv = _normalize(intervals)
        if iv and (iv[0][0] < 0 or iv[-1][1] > 1):
            raise ValueError(f"chunk {iv} leaves the unit shard")
        self.intervals = iv

    @classmethod
    def full(cls) -> "ChunkSet":
        return FULL

    @classmethod
    def interval(cls, a, b) -> "ChunkSet":
        return cls([(a, b)])

    def __repr__(self) -> str:
        body = ", ".join(f"[{a},{b})" for a, b in self.intervals)
        return f"ChunkSet({body})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ChunkSet) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def is_full(self) -> bool:
        return self.intervals == ((Fraction(0), Fraction(1)),)

    def union(self, other: "ChunkSet") -> "ChunkSet":
        return ChunkSet(self.intervals + other.intervals)

    def intersection(self, other: "ChunkSet") -> "ChunkSet":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return ChunkSet(out)

    def difference(self, other: "ChunkSet") -> "ChunkSet":
        out = []
        cuts = other.intervals
        for a, b in self.intervals:
            cur = a
            for c, d in cuts:
                if d <= cur or c >= b:
                    continue
                if c > cur:
                    out.append((cur, c))
                cur = max(cur, d)
                if cur >= b:
                    break
            if cur < b:
                out.append((cur, b))
        return ChunkSet(out)

    def complement(self) -> "ChunkSet":
        return FULL.difference(self)

    def isdisjoint(self, other: "ChunkSet") -> bool:
        return not self.intersection(other)

    def issubset(self, other: "ChunkSet") -> bool:
        return not self.difference(other)

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def scaled(self, offset, width) -> "ChunkSet":
        """Image under ``x -> offset + width * x``."""
        off, w = Fraction(offset), Fraction(width)
        return ChunkSet((off + w * a, off + w * b) for a, b in self.intervals)

    def endpoints(self) -> list[Fraction]:
        return [x for iv in self.intervals for x in iv]

    @classmethod
    def from_endpoints(cls, values: Iterable) -> "ChunkSet":
        vals = [Fraction(v) for v in values]
        if len(vals) % 2:
            raise ValueError("odd number of chunk endpoints")
        return cls(zip(vals[0::2], vals[1::2]))


FULL = ChunkSet([(0, 1)])
EMPTY = ChunkSet()


def split_equal(k: int) -> list[ChunkSet]:
    """Partition of the shard into ``k`` equal consecutive pieces."""
    return [ChunkSet([(Fraction(i, k), Fraction(i + 1, k))]) for i in range(k)]
