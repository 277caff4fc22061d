import json
from fractions import Fraction as F
from pathlib import Path

import pytest

from dctopo import io as dio
from dctopo.bases import complete_bipartite, diamond, uni_ring
from dctopo.graph import find_skew_symmetry, with_witness
from dctopo.schedule import validate
from dctopo.spsched import lp_schedule

SCHEMAS = Path(dio.__file__).parent / "schemas"


def test_topology_round_trip(tmp_path):
    g = uni_ring(2, 5)[0]
    g = with_witness(g, find_skew_symmetry(g))
    p = tmp_path / "t.json"
    dio.write_topology(p, g, "UniRing(2,5)")
    back = dio.read_topology(p)
    assert back.n == g.n and list(back.arcs) == list(g.arcs)
    assert tuple(back.skew_witness) == tuple(g.skew_witness)
    data = json.loads(p.read_text())
    assert data["format"] == "dctopo-topology/1" and data["degree"] == 2 and data["expr"] == "UniRing(2,5)"


def test_topology_accepts_nodes_key():
    d = {"format": "dctopo-topology/1", "nodes": 2, "arcs": [[0, 1], [1, 0]]}
    assert dio.topology_from_dict(d).n == 2


@pytest.mark.parametrize("data", [
    {"format": "other"}, {"format": "dctopo-topology/1", "n": 2}, {"format": "dctopo-topology/1", "n": 2, "arcs": [[0]]},
])
def test_topology_errors(data):
    with pytest.raises(dio.FormatError):
        dio.topology_from_dict(data)


def test_edge_list_round_trip(tmp_path):
    g = diamond()
    p = tmp_path / "g.txt"
    dio.write_edge_list(p, g)
    back = dio.read_edge_list(p)
    assert back.n == 8 and list(back.arcs) == list(g.arcs)


@pytest.mark.parametrize("suffix", [".jsonl", ".jsonl.gz"])
def test_schedule_round_trip(tmp_path, suffix):
    g, s = complete_bipartite(2)
    p = tmp_path / ("s" + suffix)
    dio.write_schedule(p, s, g)
    back = dio.read_schedule(p, g)
    assert back.kind == s.kind and back.canonical() == s.canonical()
    assert validate(back, g)


def test_schedule_lines_sorted_and_flat(tmp_path):
    g = diamond()
    s, _ = lp_schedule(g)
    p = tmp_path / "s.jsonl"
    dio.write_schedule(p, s, g)
    lines = p.read_text().splitlines()
    head = json.loads(lines[0])
    assert head["format"] == "dctopo-schedule/1" and head["transfers"] == len(lines) - 1
    recs = [json.loads(x) for x in lines[1:]]
    keys = [(r["step"], r["arc"], r["root"]) for r in recs]
    assert keys == sorted(keys)
    for r in recs:
        assert all(isinstance(v, str) for v in r["chunk"]) and len(r["chunk"]) % 2 == 0
        assert tuple(g.arcs[r["arc"]]) == (r["src"], r["dst"])
        assert all(F(v) >= 0 for v in r["chunk"])


def test_schedule_errors(tmp_path):
    g, s = complete_bipartite(2)
    p = tmp_path / "s.jsonl"
    dio.write_schedule(p, s, g)
    lines = p.read_text().splitlines()
    rec = json.loads(lines[1])
    rec["src"] = (rec["src"] + 1) % 4
    (tmp_path / "bad.jsonl").write_text("\n".join([lines[0], json.dumps(rec)]) + "\n")
    with pytest.raises(dio.FormatError):
        dio.read_schedule(tmp_path / "bad.jsonl", g)
    (tmp_path / "empty.jsonl").write_text("")
    with pytest.raises(dio.FormatError):
        dio.read_schedule(tmp_path / "empty.jsonl")
    rec = json.loads(lines[1])
    rec["chunk"] = ["0"]
    (tmp_path / "odd.jsonl").write_text("\n".join([lines[0], json.dumps(rec)]) + "\n")
    with pytest.raises(dio.FormatError):
        dio.read_schedule(tmp_path / "odd.jsonl")


def test_trace_round_trip(tmp_path):
    p = tmp_path / "t.csv"
    dio.write_trace(p, [(0, 256), (12.5, 943184)])
    tr = dio.read_trace(p)
    assert tr.ready == (0.0, 12.5e-6) and tr.size_bits == (2048.0, 943184 * 8.0)


def test_trace_errors(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("time,size\n0,1\n")
    with pytest.raises(dio.FormatError):
        dio.read_trace(p)
    p.write_text("ready_us,size_bytes\n0,abc\n")
    with pytest.raises(dio.FormatError):
        dio.read_trace(p)


def test_sample_trace_in_range():
    tr = dio.read_trace(Path(__file__).parents[1] / "data" / "sample_trace.csv")
    assert len(tr) == 40
    assert min(tr.size_bits) >= 256 * 8 and max(tr.size_bits) <= 943184 * 8


def test_schemas_are_json():
    for name in ("topology", "schedule", "trace"):
        data = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
        assert "$schema" in data or "type" in data


def test_tsv_round_trip(tmp_path):
    p = tmp_path / "x.tsv"
    with open(p, "w") as fh:
        dio.write_tsv(fh, ["a", "b"], [[1, "x"], [2, "y"]])
    assert dio.read_tsv(p) == [{"a": "1", "b": "x"}, {"a": "2", "b": "y"}]
