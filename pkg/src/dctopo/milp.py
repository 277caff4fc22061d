"""Topology-synthesis MILP: choose a d-regular link set maximising uniform all-to-all throughput.

Variables: binary ``x_i_j`` per ordered pair (all N^2 pairs), flows
``f_i_j_s_t`` and linearised products ``z_i_j_s_t = x_i_j * f_i_j_s_t`` per
pair and commodity s -> t, and the common demand ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lpformat import LpModel, Row, write_lp


@dataclass(frozen=True)
class MilpCounts:
    x: int
    f: int
    z: int
    k: int
    capacity_rows: int
    degree_rows: int
    conservation_rows: int
    endpoint_rows: int
    linearization_rows: int

    @property
    def variables(self) -> int:
        return self.x + self.f + self.z + self.k

    @property
    def rows(self) -> int:
        return (self.capacity_rows + self.degree_rows + self.conservation_rows
                + self.endpoint_rows + self.linearization_rows)


def expected_counts(n: int) -> MilpCounts:
    pairs = n * n
    commodities = n * (n - 1)
    return MilpCounts(
        x=pairs, f=pairs * commodities, z=pairs * commodities, k=1,
        capacity_rows=pairs, degree_rows=2 * n,
        conservation_rows=commodities * (n - 2), endpoint_rows=2 * commodities,
        linearization_rows=4 * pairs * commodities,
    )


def _v(prefix: str, *idx: int) -> str:
    return prefix + "_" + "_".join(map(str, idx))


def build_milp(n: int, d: int, cap: float = 1) -> LpModel:
    if n < 2:
        raise ValueError("MILP needs at least 2 nodes")
    if not 1 <= d < n:
        raise ValueError("MILP needs 1 <= d < n")
    if cap <= 0:
        raise ValueError("capacity must be positive")
    V = range(n)
    C = [(s, t) for s in V for t in V if s != t]
    m = LpModel(comments=[f"topology MILP N={n} d={d} Cap={cap:g}"])
    m.objective = [(1, "k")]
    rows = m.rows
    for i in V:
        for j in V:
            rows.append(Row(_v("cap", i, j), [(1, _v("z", i, j, s, t)) for s, t in C], "<=", cap))
    for j in V:
        rows.append(Row(_v("indeg", j), [(1, _v("x", i, j)) for i in V], "=", d))
    for j in V:
        rows.append(Row(_v("outdeg", j), [(1, _v("x", j, i)) for i in V], "=", d))
    for s, t in C:
        for j in V:
            if j in (s, t):
                continue
            terms = [(1, _v("z", i, j, s, t)) for i in V] + [(-1, _v("z", j, i, s, t)) for i in V]
            rows.append(Row(_v("flow", s, t, j), terms, "=", 0))
    for s, t in C:
        rows.append(Row(_v("src", s, t), [(1, _v("z", s, i, s, t)) for i in V] + [(-1, "k")], "=", 0))
    for s, t in C:
        rows.append(Row(_v("snk", s, t), [(1, _v("z", i, t, s, t)) for i in V] + [(-1, "k")], "=", 0))
    for i in V:
        for j in V:
            x = _v("x", i, j)
            for s, t in C:
                z, f = _v("z", i, j, s, t), _v("f", i, j, s, t)
                tag = (i, j, s, t)
                rows.append(Row(_v("zx", *tag), [(1, z), (-cap, x)], "<=", 0))
                rows.append(Row(_v("zlo", *tag), [(1, z)], ">=", 0))
                rows.append(Row(_v("zf", *tag), [(1, z), (-1, f)], "<=", 0))
                rows.append(Row(_v("zfx", *tag), [(1, z), (-1, f), (-cap, x)], ">=", -cap))
    for i in V:
        for j in V:
            for s, t in C:
                m.bounds[_v("f", i, j, s, t)] = (0, cap)
    m.bounds["k"] = (0, None)
    m.binaries = [_v("x", i, j) for i in V for j in V]
    return m


def emit_milp(n: int, d: int, cap: float = 1) -> str:
    """The MILP as deterministic LP-format text."""
    return write_lp(build_milp(n, d, cap))


def count_model(model: LpModel) -> MilpCounts:
    """Variable and row counts of a parsed model, by name prefix."""
    names = model.variables()
    pref = lambda p: sum(1 for v in names if v.startswith(p + "_"))
    rows = [r.name.split("_", 1)[0] for r in model.rows]
    return MilpCounts(
        x=pref("x"), f=pref("f"), z=pref("z"), k=int("k" in names),
        capacity_rows=rows.count("cap"), degree_rows=rows.count("indeg") + rows.count("outdeg"),
        conservation_rows=rows.count("flow"), endpoint_rows=rows.count("src") + rows.count("snk"),
        linearization_rows=sum(rows.count(p) for p in ("zx", "zlo", "zf", "zfx")),
    )
