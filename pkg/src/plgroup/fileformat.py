"""Presentation files and JSON reports.

The presentation format is line-oriented and versioned ("plgroup v1");
rationals are always written "p/q" (or a plain integer), never floats.
Unknown keywords are rejected, not skipped.  Reports are JSON with
sorted keys and all rationals as strings, so runs diff cleanly and
replay byte-identically.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from fractions import Fraction
from typing import Optional

from .geometry import Component, Point, Q, SubInterval
from .plmap import PLMap
from .pseudogroup import Presentation, Word, check_extendable

HEADER = "plgroup v1"


class FormatError(ValueError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


def parse_q(tok: str, line_no: int = 0) -> Q:
    if "." in tok or "e" in tok.lower():
        raise FormatError(line_no, f"rational required, got {tok!r}")
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(line_no, f"bad rational {tok!r}")


def fmt_q(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else \
        f"{q.numerator}/{q.denominator}"


def _fmt_end(x: Optional[Q]) -> str:
    return "*" if x is None else fmt_q(x)


def _parse_end(tok: str, line_no: int) -> Optional[Q]:
    return None if tok == "*" else parse_q(tok, line_no)


def _fmt_flag(closed: bool) -> str:
    return "closed" if closed else "open"


def _parse_flag(tok: str, line_no: int) -> bool:
    if tok not in ("closed", "open"):
        raise FormatError(line_no, f"expected closed/open, got {tok!r}")
    return tok == "closed"


# ---------------------------------------------------------------------------
# serialization


def serialize_map(key: str, name: str, m: PLMap) -> str:
    d = m.dom
    fields = [f"{key} {name}",
              f"dom {d.component.cid} {_fmt_end(d.lo)} {_fmt_end(d.hi)} "
              f"{_fmt_flag(d.lo_closed)} {_fmt_flag(d.hi_closed)}",
              f"codom {m.codom.cid}",
              "bps " + " ".join(f"{fmt_q(x)}:{fmt_q(y)}" for x, y in m.bps)]
    if m.lo_slope is not None:
        fields.append(f"loslope {fmt_q(m.lo_slope)}")
    if m.hi_slope is not None:
        fields.append(f"hislope {fmt_q(m.hi_slope)}")
    return " | ".join(fields)


def serialize(P: Presentation) -> str:
    lines = [HEADER]
    for c in P.transversal:
        if c.is_circle:
            lines.append(f"component {c.cid} circle {fmt_q(c.length)}")
        else:
            lines.append(f"component {c.cid} interval {_fmt_end(c.lo)} "
                         f"{_fmt_end(c.hi)} {_fmt_flag(c.lo_closed)} "
                         f"{_fmt_flag(c.hi_closed)}")
    for name in sorted(P.generators):
        lines.append(serialize_map("generator", name, P.generators[name]))
    for name in sorted(P.extensions):
        lines.append(serialize_map("extension", name, P.extensions[name]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing


def _parse_map_line(line: str, n: int, comps: dict[str, Component]
                    ) -> tuple[str, str, PLMap]:
    parts = [p.strip() for p in line.split("|")]
    head = parts[0].split()
    if len(head) != 2:
        raise FormatError(n, "expected '<keyword> <name> | dom ... | ...'")
    key, name = head
    dom = codom = bps = None
    lo_slope = hi_slope = None
    for part in parts[1:]:
        toks = part.split()
        if not toks:
            raise FormatError(n, "empty field")
        if toks[0] == "dom":
            if len(toks) != 6:
                raise FormatError(n, f"dom needs 5 arguments in {name}")
            cid = toks[1]
            if cid not in comps:
                raise FormatError(n, f"unknown component {cid!r} in {name}")
            try:
                dom = SubInterval(comps[cid], _parse_end(toks[2], n),
                                  _parse_end(toks[3], n),
                                  _parse_flag(toks[4], n),
                                  _parse_flag(toks[5], n))
            except ValueError as e:
                raise FormatError(n, f"bad domain in {name}: {e}")
        elif toks[0] == "codom":
            if len(toks) != 2 or toks[1] not in comps:
                raise FormatError(n, f"bad codomain in {name}")
            codom = comps[toks[1]]
        elif toks[0] == "bps":
            bps = []
            for t in toks[1:]:
                xy = t.split(":")
                if len(xy) != 2:
                    raise FormatError(n, f"breakpoint {t!r} in {name} "
                                         "is not x:y")
                bps.append((parse_q(xy[0], n), parse_q(xy[1], n)))
            bps = tuple(bps)
        elif toks[0] == "loslope":
            lo_slope = parse_q(toks[1], n)
        elif toks[0] == "hislope":
            hi_slope = parse_q(toks[1], n)
        else:
            raise FormatError(n, f"unknown field {toks[0]!r}")
    if dom is None or codom is None or bps is None:
        raise FormatError(n, f"map {name} needs dom, codom and bps")
    try:
        return key, name, PLMap(dom, codom, bps, lo_slope, hi_slope)
    except ValueError as e:
        raise FormatError(n, f"invalid map {name}: {e}")


def parse(text: str) -> Presentation:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError(1, f"missing header {HEADER!r}")
    comps: dict[str, Component] = {}
    order: list[Component] = []
    gens: dict[str, PLMap] = {}
    exts: dict[str, PLMap] = {}
    for n, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword = line.split()[0]
        if keyword == "component":
            toks = line.split()
            if len(toks) < 4:
                raise FormatError(n, "short component line")
            cid, kind = toks[1], toks[2]
            if cid in comps:
                raise FormatError(n, f"duplicate component {cid!r}")
            if kind == "circle":
                if len(toks) != 4:
                    raise FormatError(n, "circle takes exactly one length")
                c = Component(cid, "circle", length=parse_q(toks[3], n))
            elif kind == "interval":
                if len(toks) != 7:
                    raise FormatError(n, "interval needs lo hi loflag hiflag")
                try:
                    c = Component(cid, "interval", _parse_end(toks[3], n),
                                  _parse_end(toks[4], n),
                                  _parse_flag(toks[5], n),
                                  _parse_flag(toks[6], n))
                except ValueError as e:
                    raise FormatError(n, f"bad component: {e}")
            else:
                raise FormatError(n, f"unknown component kind {kind!r}")
            comps[cid] = c
            order.append(c)
        elif keyword in ("generator", "extension"):
            key, name, m = _parse_map_line(line, n, comps)
            store = gens if key == "generator" else exts
            if name in store:
                raise FormatError(n, f"duplicate {key} {name!r}")
            store[name] = m
        else:
            raise FormatError(n, f"unknown keyword {keyword!r}")
    for name in exts:
        if name not in gens:
            raise FormatError(1, f"extension {name!r} has no generator")
    P = Presentation(tuple(order), gens, exts)
    for name in exts:
        if not check_extendable(P, name):
            raise ValueError(
                f"extension of {name!r} is not a valid witness: the "
                f"generator's domain must be relatively compact in the "
                f"extension's domain and both maps must agree there")
    return P


# ---------------------------------------------------------------------------
# JSON reports


def jsonable(x):
    """Recursively convert analysis objects to JSON-safe data.

    Rationals become strings "p/q"; dataclasses become objects tagged
    with their type name; presentations embed their own file text."""
    if isinstance(x, Fraction):
        return fmt_q(x)
    if isinstance(x, Presentation):
        return {"_type": "Presentation", "text": serialize(x)}
    if isinstance(x, Word):
        return {"_type": "Word",
                "letters": [[n, e] for n, e in x.letters]}
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        out = {"_type": type(x).__name__}
        for f in dataclasses.fields(x):
            out[f.name] = jsonable(getattr(x, f.name))
        return out
    if isinstance(x, dict):
        if all(isinstance(k, str) for k in x):
            return {k: jsonable(v) for k, v in x.items()}
        return {"_type": "pairs",
                "items": [[jsonable(k), jsonable(v)] for k, v in x.items()]}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return {"_type": "set", "items": sorted((jsonable(v) for v in x),
                                                key=json.dumps)}
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    if isinstance(x, float):
        raise TypeError("floats are banned from reports")
    return repr(x)


def dump_report(report: dict, path: Optional[str]) -> str:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path:
        write_atomic(path, text)
    return text


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".plgroup-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_report(path: str) -> dict:
    with open(path) as f:
        return json.load(f)
