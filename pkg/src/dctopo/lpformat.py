"""A small writer and reader for the CPLEX LP text format."""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class LpFormatError(ValueError):
    pass


@dataclass
class Row:
    name: str
    terms: list[tuple[float, str]]      # (coefficient, variable)
    sense: str                          # "<=", ">=", "="
    rhs: float


@dataclass
class LpModel:
    name: str = ""
    sense: str = "max"
    objective: list[tuple[float, str]] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    bounds: dict[str, tuple[float | None, float | None]] = field(default_factory=dict)
    binaries: list[str] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def variables(self) -> set[str]:
        out = {v for _, v in self.objective}
        for r in self.rows:
            out.update(v for _, v in r.terms)
        out.update(self.bounds)
        out.update(self.binaries)
        return out


def _num(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def _expr(terms, width: int = 78, indent: str = "   ") -> list[str]:
    pieces = []
    for i, (c, v) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else _num(mag) + " "
        if i == 0:
            pieces.append(("- " if c < 0 else "") + coef + v)
        else:
            pieces.append(f"{sign} {coef}{v}")
    lines, cur = [], ""
    for p in pieces:
        if cur and len(cur) + 1 + len(p) > width:
            lines.append(cur)
            cur = indent + p
        else:
            cur = p if not cur else cur + " " + p
    if cur:
        lines.append(cur)
    return lines or ["0"]


def write_lp(model: LpModel) -> str:
    out = [f"\\ {c}" for c in model.comments]
    out.append("Maximize" if model.sense == "max" else "Minimize")
    obj = _expr(model.objective)
    out.append(" obj: " + obj[0])
    out.extend(obj[1:])
    out.append("Subject To")
    for r in model.rows:
        body = _expr(r.terms)
        body[-1] = f"{body[-1]} {r.sense} {_num(r.rhs)}"
        out.append(f" {r.name}: {body[0]}")
        out.extend(body[1:])
    if model.bounds:
        out.append("Bounds")
        for v, (lo, hi) in model.bounds.items():
            if lo is None and hi is None:
                out.append(f" {v} free")
            elif hi is None:
                out.append(f" {v} >= {_num(lo)}")
            elif lo is None:
                out.append(f" -inf <= {v} <= {_num(hi)}")
            else:
                out.append(f" {_num(lo)} <= {v} <= {_num(hi)}")
    if model.binaries:
        out.append("Binaries")
        line = ""
        for v in model.binaries:
            if line and len(line) + 1 + len(v) > 78:
                out.append(line)
                line = ""
            line = (line + " " + v) if line else " " + v
        if line:
            out.append(line)
    out.append("End")
    return "\n".join(out) + "\n"


_SECTIONS = {
    "maximize": "obj", "maximum": "obj", "max": "obj",
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "binaries": "bin", "binary": "bin", "bin": "bin",
    "general": "gen", "generals": "gen", "end": "end",
}
_TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][\w.]*)")


def _parse_terms(text: str) -> list[tuple[float, str]]:
    text = text.strip()
    terms = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise LpFormatError(f"cannot read term at {text[pos:pos + 20]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        terms.append((sign * coef, m.group(3)))
        pos = m.end()
    return terms


def parse_lp(text: str) -> LpModel:
    """Read back the subset of the LP format that ``write_lp`` produces."""
    model = LpModel()
    section = None
    statements: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": [], "bin": []}
    buf = ""
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if raw.startswith("\\"):
            model.comments.append(raw[1:].strip())
            continue
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            if buf:
                statements[section].append(buf)
                buf = ""
            section = _SECTIONS[key]
            if key.startswith("min"):
                model.sense = "min"
            if section == "end":
                break
            continue
        if section is None:
            raise LpFormatError(f"text before the objective section: {line!r}")
        if section in ("obj", "rows"):
            # a new statement starts with "name:"
            if re.match(r"^[A-Za-z_][\w.]*\s*:", line) and buf:
                statements[section].append(buf)
                buf = line
            else:
                buf = (buf + " " + line) if buf else line
        else:
            statements[section].append(line)
    else:
        raise LpFormatError("missing End")
    if buf:
        statements[section].append(buf)
    for s in statements["obj"]:
        _, body = s.split(":", 1)
        model.objective = _parse_terms(body)
    for s in statements["rows"]:
        name, body = s.split(":", 1)
        m = re.match(r"^(.*?)(<=|>=|=)\s*([-+]?[\d.eE+-]+)\s*$", body.strip())
        if not m:
            raise LpFormatError(f"bad constraint {name!r}")
        model.rows.append(Row(name.strip(), _parse_terms(m.group(1)), m.group(2), float(m.group(3))))
    for s in statements["bounds"]:
        parts = s.split()
        if len(parts) == 2 and parts[1] == "free":
            model.bounds[parts[0]] = (None, None)
        elif len(parts) == 5 and parts[1] == parts[3] == "<=":
            lo = None if parts[0] == "-inf" else float(parts[0])
            model.bounds[parts[2]] = (lo, float(parts[4]))
        elif len(parts) == 3 and parts[1] == ">=":
            model.bounds[parts[0]] = (float(parts[2]), None)
        else:
            raise LpFormatError(f"bad bound {s!r}")
    for s in statements["bin"]:
        model.binaries.extend(s.split())
    return model
