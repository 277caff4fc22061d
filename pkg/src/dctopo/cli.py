"""Command-line interface: ``dctopo <command> ...``.

Exit codes: 0 ok, 1 validation failure, 2 usage error, 3 internal or solver
error. Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import gzip
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import io as dio
from .bases import BaseParamError
from .expr import ParseError, parse_expr, to_text
from .graph import GraphError, find_skew_symmetry, transpose
from .lpformat import LpFormatError
from .materialize import allgather_schedule, materialize
from .milp import emit_milp
from .pareto import (
    Limits,
    baseline_costs,
    best_for,
    enumerate_topologies,
    evaluate,
    sweep,
    theoretical_lower_bound,
)
from .schedule import (
    CostVector,
    ScheduleError,
    check_bandwidth_optimal,
    check_moore_optimal,
    cost_vector,
    dualize,
    is_shortest_path_schedule,
    reverse_schedule,
    validate,
)
from .sim import CompareRow, TraceError, compare, simulate
from .spsched import integer_schedule
from .units import parse_bandwidth, parse_bytes, parse_time

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, message: str, code: int, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return code


def _out(path):
    """Context manager for an output path, '-' meaning stdout."""
    if path in (None, "-"):
        class _Std:
            def __enter__(self):
                return sys.stdout

            def __exit__(self, *a):
                return False
        return _Std()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def _ms(seconds: float) -> str:
    return f"{seconds * 1e3:.6f}"


def _y(y) -> str:
    return f"{float(y):.6f}"


def _cost_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", default="10us", help="per-step latency (default 10us)")
    p.add_argument("--bandwidth", default="100Gbps", help="node bandwidth B (default 100Gbps)")
    p.add_argument("--model-bytes", default="100MB", help="allreduce size M (default 100MB = 100 MiB)")


def _costs(args) -> tuple[float, float, float]:
    try:
        alpha = parse_time(args.alpha)
        B = parse_bandwidth(args.bandwidth)
        M = parse_bytes(args.model_bytes) * 8
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if alpha < 0 or B <= 0 or M <= 0:
        raise UsageError("alpha must be >= 0, bandwidth and model size > 0")
    return alpha, M, B


def _limits(args) -> Limits:
    return Limits(max_depth=args.max_depth, max_power=args.max_power, max_lines=args.max_lines)


def _search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fast", action="store_true",
                   help="use the GenKautz latency with a y upper bound instead of solving its LP")
    p.add_argument("--max-depth", type=int, default=Limits.max_depth)
    p.add_argument("--max-power", type=int, default=Limits.max_power)
    p.add_argument("--max-lines", type=int, default=Limits.max_lines)


def _check_nd(n: int, d: int) -> None:
    if n < 2 or d < 1:
        raise UsageError("need --nodes >= 2 and --degree >= 1")


# -- commands -----------------------------------------------------------------

PARETO_HEADER = ["expr", "N", "d", "x", "y", "runtime_ms", "tag", "y_exact"]


def cmd_pareto(args) -> int:
    _check_nd(args.nodes, args.degree)
    alpha, M, B = _costs(args)
    front = enumerate_topologies(args.nodes, args.degree, _limits(args), args.fast)
    rows = []
    best = None
    if front:
        best, _ = best_for(front, alpha, M, B)
    for e in front:
        tag = "best" if e is best else "frontier"
        if e.fallback:
            tag += ",fallback"
        if not e.exact:
            tag += ",y-upper-bound"
        rows.append([e.text, e.n_nodes, e.degree, e.cost.x, _y(e.cost.y),
                     _ms(e.runtime(alpha, M, B)), tag, str(e.cost.y)])
    lb = theoretical_lower_bound(args.nodes, args.degree, alpha, M, B)
    rows.append(["lower-bound", args.nodes, args.degree, lb.x, _y(lb.y), _ms(lb.runtime),
                 "lower-bound", str(lb.y)])
    if args.baselines:
        n = args.nodes
        base = baseline_costs(n, alpha, M, B)
        k = math.log2(n)
        rows.append(["ring", n, "", n - 1, _y(Fraction(n - 1, n)), _ms(base["ring"] / 2), "baseline",
                     str(Fraction(n - 1, n))])
        rows.append(["dbt", n, "", f"{k:g}", _y(2 * k), _ms(base["dbt"] / 2), "baseline", f"{2 * k:g}"])
    with _out(args.out) as fh:
        dio.write_tsv(fh, PARETO_HEADER, rows)
    if args.plot and front:
        from .plotting import plot_pareto
        plot_pareto(front, args.plot, alpha, M, B, lb)
    return EXIT_OK


def cmd_schedule(args) -> int:
    e = parse_expr(args.expr)
    m = materialize(e)
    g = m.graph
    base = Path(args.out)
    base.parent.mkdir(parents=True, exist_ok=True)
    rs = m.schedule
    if args.granularity:
        if args.granularity < 1:
            raise UsageError("--granularity must be >= 1")
        rs, _ = integer_schedule(g, args.granularity)
    written = [str(base) + ".topology.json"]
    dio.write_topology(written[0], g, to_text(e))
    summary = {"expr": to_text(e), "nodes": g.n, "files": written}
    if args.collective in ("rs", "allreduce"):
        path = str(base) + ".rs.jsonl"
        dio.write_schedule(path, rs, g)
        written.append(path)
        c = cost_vector(rs, g)
        summary["rs"] = {"x": c.x, "y": str(c.y)}
    if args.collective in ("ag", "allreduce"):
        if args.granularity:
            f = find_skew_symmetry(g)
            if f is not None:
                ag = dualize(rs, g, f)
            else:
                ag = reverse_schedule(integer_schedule(transpose(g), args.granularity)[0])
        else:
            ag = allgather_schedule(e)
        path = str(base) + ".ag.jsonl"
        dio.write_schedule(path, ag, g)
        written.append(path)
        c = cost_vector(ag, g)
        summary["ag"] = {"x": c.x, "y": str(c.y)}
    print(json.dumps(summary))
    return EXIT_OK


def cmd_validate(args) -> int:
    g = dio.read_topology(args.topology)
    s = dio.read_schedule(args.schedule, g)
    rep = validate(s, g)
    out = {"valid": rep.ok, "kind": s.kind.value, "nodes": g.n, "transfers": len(s)}
    if rep.ok:
        c = cost_vector(s, g)
        out.update(x=c.x, y=str(c.y), y_float=float(c.y),
                   bandwidth_optimal=bool(check_bandwidth_optimal(s, g)),
                   moore_optimal=check_moore_optimal(s, g),
                   shortest_path=is_shortest_path_schedule(s, g))
    else:
        out["missing_count"] = len(rep.missing)
        out["missing"] = [{"root": r, "peer": p, "chunk": [[str(a), str(b)] for a, b in c.intervals]}
                          for r, p, c in rep.missing[:50]]
    print(json.dumps(out))
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_graph(args) -> int:
    e = parse_expr(args.expr)
    g = materialize(e).graph
    fmt = args.format or ("edgelist" if str(args.out).endswith((".txt", ".edges", ".el")) else "json")
    if fmt == "edgelist":
        dio.write_edge_list(args.out, g)
    else:
        dio.write_topology(args.out, g, to_text(e))
    return EXIT_OK


SIM_HEADER = ["entry", "x", "y", "f_max_ms", "avg_layer_ms"]


def cmd_simulate(args) -> int:
    try:
        alpha = parse_time(args.alpha)
        B = parse_bandwidth(args.bandwidth)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    trace = dio.read_trace(args.trace)
    n, d = args.nodes, args.degree
    if args.expr:
        entry = evaluate(parse_expr(args.expr), fast=args.fast)
        name, cost = entry.text, entry.cost
        n, d = n or entry.n_nodes, d or entry.degree
        entries = [entry]
    else:
        if args.x is None or args.y is None:
            raise UsageError("give --expr or both --x and --y")
        cost = CostVector(args.x, Fraction(args.y))
        name = f"x={args.x},y={args.y}"
        entries = []
    rows = []
    if entries and n and d:
        for r in compare(trace, entries, alpha, B, n, d):
            c = {"ring": (n - 1, (n - 1) / n), "dbt": (math.log2(n), 2 * math.log2(n))}.get(r.name)
            if r.name == "lower-bound":
                lb = theoretical_lower_bound(n, d, alpha, 1.0, B)
                c = (lb.x, float(lb.y))
            if c is None:
                c = (cost.x, float(cost.y))
            rows.append((r, c))
    else:
        res = simulate(trace, cost, alpha, B)
        rows.append((CompareRow(name, res.f_max, res.avg_layer), (cost.x, float(cost.y))))
    with _out(args.out) as fh:
        dio.write_tsv(fh, SIM_HEADER, [[r.name, f"{c[0]:g}", f"{c[1]:.6f}", _ms(r.f_max), _ms(r.avg_layer)]
                                       for r, c in rows])
    if args.plot:
        from .plotting import plot_simulation
        plot_simulation([r for r, _ in rows], args.plot)
    return EXIT_OK


def cmd_emit_milp(args) -> int:
    try:
        text = emit_milp(args.nodes, args.degree, args.capacity)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out in (None, "-"):
        sys.stdout.write(text)
    elif str(args.out).endswith(".gz"):
        # no name or timestamp in the header, so the bytes depend only on the model
        with open(args.out, "wb") as raw, gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as fh:
            fh.write(text.encode())
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_lower_bound(args) -> int:
    _check_nd(args.nodes, args.degree)
    alpha, M, B = _costs(args)
    lb = theoretical_lower_bound(args.nodes, args.degree, alpha, M, B)
    with _out(args.out) as fh:
        dio.write_tsv(fh, ["N", "d", "x", "y", "rs_ms", "allreduce_ms"],
                      [[args.nodes, args.degree, lb.x, _y(lb.y), _ms(lb.runtime), _ms(2 * lb.runtime)]])
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.min_nodes < 2 or args.max_nodes < args.min_nodes:
        raise UsageError("need 2 <= --min-nodes <= --max-nodes")
    alpha, M, B = _costs(args)
    ns = range(args.min_nodes, args.max_nodes + 1, args.step)
    rows = sweep(ns, args.degree, alpha, M, B, _limits(args), args.fast)
    with _out(args.out) as fh:
        dio.write_tsv(fh, ["N", "best_expr", "x", "y", "allreduce_ms", "ring_ms", "dbt_ms", "lower_bound_ms"],
                      [[r.n_nodes, r.best.text if r.best else "", r.best.cost.x if r.best else "",
                        _y(r.best.cost.y) if r.best else "", _ms(r.allreduce), _ms(r.ring), _ms(r.dbt),
                        _ms(r.lower_bound)] for r in rows])
    if args.plot:
        from .plotting import plot_sweep
        plot_sweep(rows, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dctopo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    q = sub.add_parser("pareto", help="Pareto frontier of topologies for N nodes of degree d")
    q.add_argument("--nodes", type=int, required=True)
    q.add_argument("--degree", type=int, required=True)
    _cost_args(q)
    _search_args(q)
    q.add_argument("--baselines", action="store_true", help="append ring and double binary tree rows")
    q.add_argument("--out", default="-")
    q.add_argument("--plot", help="write a frontier figure to this path")
    q.set_defaults(func=cmd_pareto)

    q = sub.add_parser("schedule", help="build a topology and its schedules")
    q.add_argument("--expr", required=True)
    q.add_argument("--collective", choices=["rs", "ag", "allreduce"], default="allreduce")
    q.add_argument("--granularity", type=int, help="split shards into P pieces (shortest-path schedule)")
    q.add_argument("--out", required=True, help="output path prefix")
    q.set_defaults(func=cmd_schedule)

    q = sub.add_parser("validate", help="check a schedule on a topology")
    q.add_argument("--topology", required=True)
    q.add_argument("--schedule", required=True)
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("graph", help="write the graph of an expression")
    q.add_argument("--expr", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--format", choices=["json", "edgelist"])
    q.set_defaults(func=cmd_graph)

    q = sub.add_parser("simulate", help="per-layer allreduce timing over a trace")
    q.add_argument("--trace", required=True)
    q.add_argument("--expr")
    q.add_argument("--x", type=int)
    q.add_argument("--y", type=str, help="bandwidth coefficient, e.g. 1 or 1023/1024")
    q.add_argument("--nodes", type=int, help="node count for baseline rows")
    q.add_argument("--degree", type=int)
    q.add_argument("--alpha", default="10us")
    q.add_argument("--bandwidth", default="100Gbps")
    q.add_argument("--fast", action="store_true")
    q.add_argument("--out", default="-")
    q.add_argument("--plot")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("emit-milp", help="write the topology-synthesis MILP in LP format")
    q.add_argument("--nodes", type=int, required=True)
    q.add_argument("--degree", type=int, required=True)
    q.add_argument("--capacity", type=float, default=1.0)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_emit_milp)

    q = sub.add_parser("lower-bound", help="runtime lower bound for N nodes of degree d")
    q.add_argument("--nodes", type=int, required=True)
    q.add_argument("--degree", type=int, required=True)
    _cost_args(q)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_lower_bound)

    q = sub.add_parser("sweep", help="best topology for each N in a range")
    q.add_argument("--degree", type=int, required=True)
    q.add_argument("--min-nodes", type=int, required=True)
    q.add_argument("--max-nodes", type=int, required=True)
    q.add_argument("--step", type=int, default=1)
    _cost_args(q)
    _search_args(q)
    q.add_argument("--out", default="-")
    q.add_argument("--plot")
    q.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing command; see --help")
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except ParseError as exc:
        return _fail("parse", exc.message, EXIT_USAGE, position=exc.position)
    except (BaseParamError, TraceError, dio.FormatError, LpFormatError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_USAGE)
    except FileNotFoundError as exc:
        return _fail("file", str(exc), EXIT_USAGE)
    except (ScheduleError, GraphError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INTERNAL)
    except Exception as exc:  # noqa: BLE001
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
