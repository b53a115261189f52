"""Command line front end.

Every subcommand reads a presentation file, runs one analysis, and
emits a JSON report (stdout, or --out with an atomic write).  Exit
codes: 0 for a definite or valid answer, 2 when the bounded search
came back inconclusive, 1 for errors and failed verification.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import analysis, fileformat, planner
from .analysis import (NotTaut, Taut, Unknown, check_taut, detect_I_bundles,
                       extract_hinge, find_closed_orbits, novikov_split,
                       verify_hinge)
from .fileformat import dump_report, fmt_q, jsonable, load_report, parse_q
from .geometry import Point
from .planner import plan_general, plan_taut, verify_plan
from .pseudogroup import (Presentation, check_extendable, isotropy,
                          orbit_ball_words)

REPORT_VERSION = 1
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2


def _color(text: str, code: str) -> str:
    if os.environ.get("NO_COLOR") or not sys.stderr.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _say(msg: str, code: str = "36") -> None:
    print(_color(msg, code), file=sys.stderr)


def _load(path: str) -> tuple[Presentation, str]:
    with open(path) as f:
        text = f.read()
    return fileformat.parse(text), text


def _point(P: Presentation, text: str) -> Point:
    cid, _, coord = text.partition(":")
    if not coord:
        raise ValueError(f"point must be CID:COORD, got {text!r}")
    return Point(P.component(cid), parse_q(coord))


def _point_json(p: Point):
    return [p.component.cid, fmt_q(p.coord)]


def _report(args, command: str, P: Presentation, result,
            options=None) -> dict:
    return {
        "plgroup_report": REPORT_VERSION,
        "command": command,
        "depth": getattr(args, "depth", None),
        "options": options or {},
        "presentation": fileformat.serialize(P),
        "result": jsonable(result),
    }


# ---------------------------------------------------------------------------
# result builders (shared by the subcommands and by `verify` replay)


def _run_inspect(P: Presentation, args) -> tuple[dict, int]:
    comps = []
    for c in P.transversal:
        if c.is_circle:
            comps.append({"cid": c.cid, "kind": "circle",
                          "length": fmt_q(c.length)})
        else:
            comps.append({"cid": c.cid, "kind": "interval",
                          "lo": None if c.lo is None else fmt_q(c.lo),
                          "hi": None if c.hi is None else fmt_q(c.hi),
                          "lo_closed": c.lo_closed, "hi_closed": c.hi_closed})
    gens = {}
    for name in sorted(P.generators):
        g = P.generators[name]
        gens[name] = {
            "dom": jsonable(g.dom), "codom": g.codom.cid,
            "breakpoints": len(g.bps),
            "extendable": check_extendable(P, name)
            if name in P.extensions else None,
        }
    return {"components": comps, "generators": gens}, EXIT_OK


def _run_orbits(P: Presentation, args) -> tuple[dict, int]:
    p = _point(P, args.point)
    ball = orbit_ball_words(P, p, args.depth)
    pts = sorted(ball, key=lambda q: (q.component.cid, q.coord))
    return {
        "base": _point_json(p),
        "points": [{"point": _point_json(q), "word": jsonable(ball[q])}
                   for q in pts],
        "count": len(pts),
    }, EXIT_OK


def _run_isotropy(P: Presentation, args) -> tuple[dict, int]:
    rep = isotropy(P, _point(P, args.point), args.depth)
    return jsonable(rep), EXIT_OK


def _run_taut(P: Presentation, args) -> tuple[dict, int]:
    v = check_taut(P, args.depth)
    kind = {Taut: "taut", NotTaut: "not_taut", Unknown: "unknown"}[type(v)]
    return {"verdict": kind, "detail": jsonable(v)}, \
        EXIT_UNKNOWN if kind == "unknown" else EXIT_OK


def _run_closed_orbits(P: Presentation, args) -> tuple[dict, int]:
    rep = find_closed_orbits(P, args.depth)
    return jsonable(rep), EXIT_UNKNOWN if rep.unknown else EXIT_OK


def _run_ibundles(P: Presentation, args) -> tuple[dict, int]:
    bundles = detect_I_bundles(P, args.depth)
    return {"bundles": jsonable(bundles), "count": len(bundles)}, EXIT_OK


def _run_hinge(P: Presentation, args) -> tuple[dict, int]:
    h, info = extract_hinge(P, _point(P, args.point), args.depth)
    rep = verify_hinge(h, P, args.depth)
    code = EXIT_UNKNOWN if rep.cond3 is None else EXIT_OK
    return {"hinge": jsonable(h), "info": jsonable(info),
            "report": jsonable(rep), "ok": rep.ok}, code


def _run_split(P: Presentation, args) -> tuple[dict, int]:
    s = novikov_split(P, args.depth)
    if s is None:
        return {"found": False}, EXIT_UNKNOWN
    return {"found": True, "split": jsonable(s)}, EXIT_OK


def _build_plan(P: Presentation, depth: int, want_closed: bool):
    try:
        v = check_taut(P, depth)
    except ValueError:
        v = None  # unbounded transversal: go straight to the split pipeline
    if isinstance(v, Taut):
        return plan_taut(P, v, depth)
    s = novikov_split(P, depth)
    if s is None:
        return None
    return plan_general(P, s, depth, want_closed)


def _run_plan(P: Presentation, args) -> tuple[dict, int]:
    plan = _build_plan(P, args.depth, args.want_closed)
    if plan is None:
        return {"found": False}, EXIT_UNKNOWN
    checks = verify_plan(plan, P)
    code = EXIT_UNKNOWN if plan.unknown else EXIT_OK
    return {"found": True, "plan": jsonable(plan),
            "checks": jsonable(checks)}, code


RUNNERS = {
    "inspect": _run_inspect,
    "orbits": _run_orbits,
    "isotropy": _run_isotropy,
    "taut": _run_taut,
    "closed-orbits": _run_closed_orbits,
    "ibundles": _run_ibundles,
    "hinge": _run_hinge,
    "split": _run_split,
    "plan": _run_plan,
}


# ---------------------------------------------------------------------------
# verify: deterministic replay of a stored report


def _diff_paths(a, b, path="result", out=None):
    out = [] if out is None else out
    if type(a) is not type(b):
        out.append(path)
    elif isinstance(a, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                out.append(f"{path}.{k}")
            else:
                _diff_paths(a[k], b[k], f"{path}.{k}", out)
    elif isinstance(a, list):
        if len(a) != len(b):
            out.append(f"{path}.length")
        else:
            for i, (x, y) in enumerate(zip(a, b)):
                _diff_paths(x, y, f"{path}[{i}]", out)
    elif a != b:
        out.append(path)
    return out


def cmd_verify(args) -> int:
    rep = load_report(args.report)
    if rep.get("plgroup_report") != REPORT_VERSION:
        raise ValueError("not a plgroup report (or unsupported version)")
    command = rep.get("command")
    if command not in RUNNERS:
        raise ValueError(f"cannot verify reports for {command!r}")
    P = fileformat.parse(rep["presentation"])
    opts = {"point": None, "want_closed": False}
    opts.update(rep.get("options", {}))
    ns = argparse.Namespace(depth=rep.get("depth"), **opts)
    fresh, _code = RUNNERS[command](P, ns)
    violations = _diff_paths(rep["result"], fresh)
    if command == "plan" and fresh.get("found"):
        plan = _build_plan(P, ns.depth, getattr(ns, "want_closed", False))
        checks = verify_plan(plan, P)
        if not checks["ok"]:
            violations.extend("plan:" + v for v in checks["violations"])
    out = {"ok": not violations, "command": command,
           "violations": violations}
    print(json.dumps(out, sort_keys=True, indent=2))
    if violations:
        _say("verify: FAILED", "31")
        return EXIT_ERROR
    _say("verify: ok", "32")
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rep = load_report(args.report)
    result = rep.get("result") or {}
    fig, ax = plt.subplots(figsize=(8, 3))
    drew = False
    pts = result.get("points")
    if pts:
        cids = sorted({p["point"][0] for p in pts})
        for i, cid in enumerate(cids):
            xs = [float(Fraction(p["point"][1])) for p in pts
                  if p["point"][0] == cid]
            ax.plot(xs, [i] * len(xs), "o", label=cid)
        ax.set_yticks(range(len(cids)), cids)
        ax.set_title("orbit portrait")
        drew = True
    cover = (result.get("detail") or {}).get("cover") if not pts else None
    if cover:
        row = 0
        for chain in cover:
            for u, v in chain.get("arcs", []):
                lo = float(Fraction(u["coord"]))
                hi = float(Fraction(v["coord"]))
                if hi < lo:  # wrapped circle arc
                    hi += float(Fraction(u["component"]["length"]))
                ax.plot([lo, hi], [row, row], "-", lw=3)
            row += 1
        ax.set_ylabel("chain")
        ax.set_title("chain cover")
        drew = True
    if not drew:
        plt.close(fig)
        raise ValueError("report contains nothing to plot")
    if pts or cover:
        ax.set_xlabel("coordinate")
    fig.tight_layout()
    fig.savefig(args.out)
    plt.close(fig)
    _say(f"wrote {args.out}", "32")
    return EXIT_OK


# ---------------------------------------------------------------------------
# examples


def _example_circle() -> Presentation:
    from .geometry import Component, SubInterval
    from .plmap import PLMap
    c = Component("C", "circle", length=Fraction(1))
    r = PLMap(SubInterval(c, Fraction(0), Fraction(1), True, True), c,
              ((Fraction(0), Fraction(1, 3)), (Fraction(1), Fraction(4, 3))))
    return Presentation((c,), {"r": r})


def _example_compact(lams) -> Presentation:
    """Homotheties with full image on the open interval (-2, 2).

    Every orbit falls into a compact core, so the split/plan pipeline
    terminates with definite answers."""
    from .geometry import Component, SubInterval
    from .plmap import PLMap
    c = Component("T", "interval", Fraction(-2), Fraction(2), False, False)
    gens = {}
    for i, lam in enumerate(lams):
        a = Fraction(2, 1) / lam
        dom = SubInterval(c, -a, a, False, False)
        gens[f"g{i + 1}"] = PLMap(dom, c, ((-a, Fraction(-2)),
                                           (a, Fraction(2))))
    return Presentation((c,), gens)


def _example_interval() -> Presentation:
    from .geometry import Component
    return Presentation((Component("T", "interval", Fraction(0), Fraction(1),
                                   True, True),), {})


EXAMPLES = {
    "circle-rotation": _example_circle,
    "trivial-interval": _example_interval,
    "g2": lambda: planner.homothety_library([Fraction(2)]),
    "g23": lambda: planner.homothety_library([Fraction(2), Fraction(3)]),
    "g235": lambda: planner.homothety_library(
        [Fraction(2), Fraction(3), Fraction(5)]),
    "g2-half": lambda: planner.homothety_library([Fraction(2)], half=True),
    "g2-compact": lambda: _example_compact([Fraction(2)]),
    "g23-compact": lambda: _example_compact([Fraction(2), Fraction(3)]),
    "g235-compact": lambda: _example_compact(
        [Fraction(2), Fraction(3), Fraction(5)]),
}


def cmd_examples(args) -> int:
    if not args.name:
        for name in sorted(EXAMPLES):
            print(name)
        return EXIT_OK
    if args.name not in EXAMPLES:
        raise ValueError(f"unknown example {args.name!r}; "
                         "run `plgroup examples` for the list")
    text = fileformat.serialize(EXAMPLES[args.name]())
    if args.out:
        fileformat.write_atomic(args.out, text)
        _say(f"wrote {args.out}", "32")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(sp, point=False):
    sp.add_argument("file", help="presentation file")
    sp.add_argument("--depth", type=int, default=8,
                    help="search depth bound (default 8)")
    sp.add_argument("--seed", type=int, default=0,
                    help="seed for any randomized sampling")
    sp.add_argument("--out", help="write the JSON report here "
                                  "(atomic; default stdout)")
    if point:
        sp.add_argument("--point", required=True,
                        help="base point, written CID:COORD (e.g. T:1/2)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plgroup",
        description="exact analysis of piecewise-linear pseudo-groups "
                    "on 1-manifolds")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, needs_point in [("inspect", False), ("orbits", True),
                              ("isotropy", True), ("taut", False),
                              ("closed-orbits", False), ("ibundles", False),
                              ("hinge", True), ("split", False)]:
        _add_common(sub.add_parser(name), point=needs_point)
    plan = sub.add_parser("plan")
    _add_common(plan)
    plan.add_argument("--want-closed", action="store_true",
                      help="prefer a plan with no boundary left over")

    ver = sub.add_parser("verify")
    ver.add_argument("report", help="JSON report to re-check")

    plot = sub.add_parser("plot")
    plot.add_argument("report", help="JSON report to draw")
    plot.add_argument("--out", required=True, help="output image path")

    ex = sub.add_parser("examples")
    ex.add_argument("name", nargs="?", help="example to print")
    ex.add_argument("--out", help="write the example file here")
    return ap


def _options_for(args) -> dict:
    opts = {}
    if getattr(args, "point", None) is not None:
        opts["point"] = args.point
    if getattr(args, "want_closed", False):
        opts["want_closed"] = True
    return opts


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "plot":
            return cmd_plot(args)
        if args.command == "examples":
            return cmd_examples(args)
        P, _text = _load(args.file)
        result, code = RUNNERS[args.command](P, args)
        report = _report(args, args.command, P, result, _options_for(args))
        text = dump_report(report, args.out)
        if args.out:
            _say(f"wrote {args.out}", "32")
        else:
            sys.stdout.write(text)
        return code
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"plgroup: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
