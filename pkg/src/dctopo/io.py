"""File formats: topology JSON, schedule JSONL, edge lists, layer traces, TSV."""

from __future__ import annotations

import csv
import gzip
import json
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Sequence

from .chunks import ChunkSet
from .graph import Digraph
from .schedule import Kind, Schedule, Transfer
from .sim import LayerTrace

TOPOLOGY_FORMAT = "dctopo-topology/1"
SCHEDULE_FORMAT = "dctopo-schedule/1"


class FormatError(ValueError):
    pass


def _open(path, mode: str) -> IO:
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


# -- topology -----------------------------------------------------------------

def topology_to_dict(g: Digraph, expr: str = "") -> dict:
    from .graph import regular_degree

    return {
        "format": TOPOLOGY_FORMAT,
        "expr": expr or g.label,
        "n": g.n,
        "degree": regular_degree(g),
        "arcs": [list(a) for a in g.arcs],
        "skew_witness": list(g.skew_witness) if g.skew_witness is not None else None,
    }


def topology_from_dict(data: dict) -> Digraph:
    if data.get("format") != TOPOLOGY_FORMAT:
        raise FormatError(f"not a topology file (format {data.get('format')!r})")
    try:
        arcs = [(int(a), int(b)) for a, b in data["arcs"]]
        n = data["n"] if "n" in data else data["nodes"]
        return Digraph(int(n), arcs, data.get("expr", ""), data.get("skew_witness"))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed topology: {exc}") from None


def write_topology(path, g: Digraph, expr: str = "") -> None:
    with _open(path, "w") as fh:
        json.dump(topology_to_dict(g, expr), fh, indent=1)
        fh.write("\n")


def read_topology(path) -> Digraph:
    with _open(path, "r") as fh:
        try:
            return topology_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from None


def write_edge_list(path, g: Digraph) -> None:
    with _open(path, "w") as fh:
        fh.write(f"# nodes {g.n}\n")
        for a, b in g.arcs:
            fh.write(f"{a} {b}\n")


def read_edge_list(path) -> Digraph:
    n = None
    arcs = []
    with _open(path, "r") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# nodes"):
                n = int(line.split()[2])
            elif line and not line.startswith("#"):
                a, b = line.split()[:2]
                arcs.append((int(a), int(b)))
    if n is None:
        n = 1 + max((max(a) for a in arcs), default=-1)
    return Digraph(n, arcs)


# -- schedule -----------------------------------------------------------------

def _chunk_out(c: ChunkSet) -> list[str]:
    return [str(v) for iv in c.intervals for v in iv]


def _chunk_in(values) -> ChunkSet:
    if len(values) % 2:
        raise FormatError("chunk needs an even number of endpoints")
    v = [Fraction(x) for x in values]
    return ChunkSet(zip(v[::2], v[1::2]))


def write_schedule(path, s: Schedule, g: Digraph) -> None:
    """Header line, then one transfer per line, sorted by (step, arc, root)."""
    with _open(path, "w") as fh:
        head = {"format": SCHEDULE_FORMAT, "kind": s.kind.value, "n": g.n, "t_max": s.t_max,
                "transfers": len(s)}
        fh.write(json.dumps(head) + "\n")
        for tr in sorted(s.transfers, key=lambda t: (t.step, t.arc, t.root, t.chunk.intervals)):
            u, v = g.arcs[tr.arc]
            rec = {"step": tr.step, "arc": tr.arc, "src": u, "dst": v, "root": tr.root,
                   "chunk": _chunk_out(tr.chunk)}
            fh.write(json.dumps(rec) + "\n")


def read_schedule(path, g: Digraph | None = None) -> Schedule:
    with _open(path, "r") as fh:
        lines = [ln for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty schedule file")
    try:
        head = json.loads(lines[0])
        if head.get("format") != SCHEDULE_FORMAT:
            raise FormatError(f"not a schedule file (format {head.get('format')!r})")
        kind = Kind(head["kind"])
        transfers = []
        for ln in lines[1:]:
            rec = json.loads(ln)
            chunk = _chunk_in(rec["chunk"])
            if g is not None and tuple(g.arcs[rec["arc"]]) != (rec["src"], rec["dst"]):
                raise FormatError(f"arc {rec['arc']} does not join {rec['src']} -> {rec['dst']}")
            transfers.append(Transfer(int(rec["root"]), chunk, int(rec["arc"]), int(rec["step"])))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: malformed schedule: {exc}") from None
    return Schedule(kind, transfers, int(head.get("t_max", 0)))


# -- traces and tables --------------------------------------------------------

def read_trace(path) -> LayerTrace:
    """CSV with header ``ready_us,size_bytes``; converted to seconds and bits."""
    with _open(path, "r") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["ready_us", "size_bytes"]:
            raise FormatError(f"{path}: expected header ready_us,size_bytes")
        pairs = []
        for i, row in enumerate(reader, start=2):
            try:
                pairs.append((float(row["ready_us"]) / 1e6, float(row["size_bytes"]) * 8))
            except (TypeError, ValueError):
                raise FormatError(f"{path}:{i}: bad number") from None
    return LayerTrace.from_pairs(pairs)


def write_trace(path, rows: Iterable[tuple[float, int]]) -> None:
    """``rows`` are (ready time in microseconds, size in bytes)."""
    with _open(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ready_us", "size_bytes"])
        for r, m in rows:
            w.writerow([f"{r:g}", int(m)])


def write_tsv(fh: IO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(fh, delimiter="\t", lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)


def read_tsv(path) -> list[dict]:
    with _open(path, "r") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))
