"""Realization planning.

A plan is a symbolic surgery schedule: sphere-bundle pieces over the
transversal components, paired index-1/index-2 surgery records carrying
exact certificates (membership certificates for the holonomy enablers,
positive-chain certificates for the cancelling circles), hinge blocks
for the non-taut cores, and gluing records tying them together.  Plans
never materialize manifolds; every claim they make is rechecked by
verify_plan at the combinatorial level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .analysis import (B2B, LOOP, Hinge, HingeReport, NovikovSplit,
                       PositiveChain, Taut, _circle_loop, check_chain,
                       check_taut, chain_covers, verify_hinge)
from .geometry import (Component, Point, Q, SubInterval, full, line, interval,
                       pick, rat, sub)
from .plmap import PLMap, affine, equal_on_overlap, image, invert, restrict
from .pseudogroup import (Presentation, PiecewiseWordCert, Word,
                          certify_membership, slope_rank,
                          verify_membership_cert, word)

# the smooth cancellation of an index-1/index-2 pair follows a fixed
# local template; plans carry this annotation instead of re-deriving it
CANCEL_NOTE = "standard-pair-cancellation"


# ---------------------------------------------------------------------------
# plan data types


@dataclass(frozen=True)
class SphereBundle:
    base: Component
    kind: str = "sphere_bundle"


@dataclass(frozen=True)
class HingeBlock3:
    hinge: Hinge
    transverse_boundary_count: int
    kind: str = "hinge_block_3"


@dataclass(frozen=True)
class HingeBlock4:
    hinge: Hinge
    gluing_graph: tuple[tuple[tuple[int, str], tuple[int, str]], ...]
    kind: str = "hinge_block_4"


@dataclass(frozen=True)
class HalfPiece:
    generator: str
    kind: str = "half_piece"


Piece = Union[SphereBundle, HingeBlock3, HingeBlock4, HalfPiece]


@dataclass(frozen=True)
class Index1:
    generator: str
    dom: tuple[Q, Q]
    im: tuple[Q, Q]
    extension_cert: PiecewiseWordCert
    cert_map: PLMap
    kind: str = "index1"


@dataclass(frozen=True)
class Index2:
    pairs: str  # generator name of the paired Index1
    transverse_chain: PositiveChain
    levitt_upper_bound: int
    note: str = CANCEL_NOTE
    kind: str = "index2"


@dataclass(frozen=True)
class Genus:
    count_bound: int
    kind: str = "genus"


@dataclass(frozen=True)
class Half1:
    generator: str
    kind: str = "half1"


@dataclass(frozen=True)
class Half2:
    generator: str
    kind: str = "half2"


SurgeryRecord = Union[Index1, Index2, Genus, Half1, Half2]


@dataclass(frozen=True)
class GluingRecord:
    left: tuple  # (piece index, port name)
    right: tuple
    port_kind: str  # "circle_neighborhood" or "sphere_times_transversal"


@dataclass(frozen=True)
class IntervalData:
    """Side data for a hinge's circle extension: an interval [a1, a2]
    on which a chosen letter moves every point strictly up, with the
    letter's value at a1 below a2."""
    side: str  # "lower" or "upper"
    a1: Q
    a2: Q
    letter: tuple[str, int]
    checks: dict


@dataclass(frozen=True)
class RealizationPlan:
    dimension: int
    closed: bool
    pieces: tuple[Piece, ...]
    surgeries: tuple[SurgeryRecord, ...]
    gluings: tuple[GluingRecord, ...]
    provenance: tuple[str, ...]
    base: Optional[Presentation] = None  # presentation the records refer to
    side_data: tuple[IntervalData, ...] = ()
    unknown: Optional[str] = None


# ---------------------------------------------------------------------------
# taut plans


def _boundary_touching(P: Presentation, g: PLMap) -> bool:
    for s in (g.dom, image(g)):
        c = s.component
        if c.is_circle:
            continue
        for x in c.boundary_coords():
            lo, hi = s.closure_bounds()
            if (lo is None or lo <= x) and (hi is None or x <= hi):
                return True
    return False


def _connect_chain(P: Presentation, name: str, g: PLMap
                   ) -> Optional[PositiveChain]:
    """A chain joining the image region of g to its domain region."""
    dc = g.dom.component
    ic = g.codom
    if dc == ic:
        if dc.is_circle:
            return _circle_loop(pick(g.dom))
        if dc.lo is None or dc.hi is None or \
                not (dc.lo_closed and dc.hi_closed):
            return None
        return PositiveChain(((Point(dc, dc.lo), Point(dc, dc.hi)),), (), B2B)
    if dc.is_circle or ic.is_circle:
        return None
    if not (ic.lo is not None and ic.lo_closed and
            dc.hi is not None and dc.hi_closed):
        return None
    v = pick(image(g))
    u_pt = invert(g)(v)
    if v.coord <= ic.lo or u_pt.coord >= dc.hi:
        return None
    return PositiveChain(((Point(ic, ic.lo), v), (u_pt, Point(dc, dc.hi))),
                         (Word(((name, -1),)),), B2B)


def plan_taut(P: Presentation, taut: Taut, depth: int) -> RealizationPlan:
    pieces: list[Piece] = [SphereBundle(c) for c in P.transversal]
    provenance = ["taut-schedule"] * len(pieces)
    surgeries: list[SurgeryRecord] = []
    for name in sorted(P.generators):
        g = P.generators[name]
        if _boundary_touching(P, g):
            surgeries.append(Half1(name))
            surgeries.append(Half2(name))
            continue
        ext = P.extensions.get(name)
        cert_map = restrict(ext, g.dom) if ext is not None else g
        cert = certify_membership(P, cert_map, depth)
        if cert is None:
            return RealizationPlan(3, False, tuple(pieces), (), (),
                                   tuple(provenance), base=P,
                                   unknown=f"no membership certificate for "
                                           f"generator {name}")
        chain = _connect_chain(P, name, g)
        if chain is None or not check_chain(P, chain):
            return RealizationPlan(3, False, tuple(pieces), (), (),
                                   tuple(provenance), base=P,
                                   unknown=f"no transverse chain for "
                                           f"generator {name}")
        dlo, dhi = g.dom.closure_bounds()
        ilo, ihi = image(g).closure_bounds()
        surgeries.append(Index1(name, (dlo, dhi), (ilo, ihi), cert, cert_map))
        bound = max(1, sum(len(w.letters) for w in chain.jumps) +
                    (len(chain.closing.letters) if chain.closing else 0))
        surgeries.append(Index2(name, chain, bound))
        surgeries.append(Genus(bound))
    closed = not any(isinstance(s, (Half1, Half2)) for s in surgeries)
    return RealizationPlan(3, closed, tuple(pieces), tuple(surgeries), (),
                           tuple(provenance), base=P)


# ---------------------------------------------------------------------------
# hinge plans


def plan_hinge(h: Hinge, report: Optional[HingeReport] = None) -> Piece:
    if report is not None and not report.ok:
        raise ValueError("hinge failed verification; refusing to plan")
    if h.rank <= 2:
        n_boundary = int(h.omega.lo_closed) + int(h.omega.hi_closed)
        return HingeBlock3(h, 2 - n_boundary)
    # one block per extra rank, consecutive annulus-neighborhood pairings
    graph = tuple(((i, "N"), (i + 1, "N'"))
                  for i in range(2, h.rank))
    return HingeBlock4(h, graph)


# ---------------------------------------------------------------------------
# hinge side data (circle extensions)


def _strictly_up_on(m: PLMap, a1: Q, a2: Q) -> bool:
    """m(t) > t for every t of [a1, a2], decided per linear segment."""
    lo, hi = m.dom.closure_bounds()
    if (lo is not None and a1 < lo) or (hi is not None and a2 > hi):
        return False
    xs = sorted({x for x, _ in m.bps if a1 < x < a2} | {a1, a2})
    for x in xs:
        if m.eval_lift(x) <= x:
            return False
    return True


def _side_data(P: Presentation, h: Hinge, side: str) -> Optional[IntervalData]:
    a, b = h.core
    if side == "lower":
        if not h.omega.lo < a:
            return None
        a1 = (h.omega.lo + a) / 2
        target, toward = a, a
    else:
        if not b < h.omega.hi:
            return None
        a1 = (b + h.omega.hi) / 2
        target, toward = h.omega.hi, b
    for _ in range(12):
        got = _side_attempt(P, h, side, a1, target, a, b)
        if got is not None:
            return got
        a1 = (a1 + toward) / 2  # shrink toward the core and retry
    return None


def _side_attempt(P: Presentation, h: Hinge, side: str, a1: Q, target: Q,
                  a: Q, b: Q) -> Optional[IntervalData]:
    best: Optional[tuple[Q, tuple[str, int], PLMap]] = None
    p = Point(h.omega.component, a1)
    for (name, e), m in P.letter_items():
        if m.dom.component != h.omega.component or not m.defined_at(p):
            continue
        if m.codom != h.omega.component:
            continue
        val = m.eval_lift(a1)
        if val > a1 and (best is None or val > best[0]):
            best = (val, (name, e), m)
    if best is None:
        return None
    val, letter, m = best
    a2 = (val + target) / 2
    if not (a1 < a2 and val < a2):
        return None
    checks = {
        "in_omega": h.omega._contains_plain(a1) and h.omega._contains_plain(a2),
        "outside_core": a2 <= a or a1 >= b,
        "moves_up": _strictly_up_on(m, a1, a2),
        "value_below_a2": val < a2,
    }
    if not all(checks.values()):
        return None
    return IntervalData(side, a1, a2, letter, checks)


# ---------------------------------------------------------------------------
# general plans


def plan_general(P: Presentation, split: NovikovSplit, depth: int,
                 want_closed: bool = False) -> RealizationPlan:
    taut_v = check_taut(split.t0_presentation, depth)
    if not isinstance(taut_v, Taut):
        return RealizationPlan(3, False, (), (), (), (), base=P,
                               unknown="taut part did not certify")
    tplan = plan_taut(split.t0_presentation, taut_v, depth)
    if tplan.unknown:
        return tplan
    pieces = list(tplan.pieces)
    provenance = list(tplan.provenance)
    gluings: list[GluingRecord] = []
    sides: list[IntervalData] = []
    max_rank = 0
    for h, rep in zip(split.hinges, split.hinge_reports):
        if not rep.ok:
            return RealizationPlan(3, False, (), (), (), (), base=P,
                                   unknown="unverified hinge in split")
        piece = plan_hinge(h, rep)
        idx = len(pieces)
        pieces.append(piece)
        provenance.append("hinge-3d" if isinstance(piece, HingeBlock3)
                          else "hinge-4d")
        max_rank = max(max_rank, h.rank)
        for sd_name in ("lower", "upper"):
            sd = _side_data(P, h, sd_name)
            if sd is None:
                return RealizationPlan(3, False, (), (), (), (), base=P,
                                       unknown=f"no side data for hinge at "
                                               f"{h.core} ({sd_name} side)")
            sides.append(sd)
            gluings.append(GluingRecord((idx, f"S_{sd_name}"),
                                        (0, f"hinge{idx}_{sd_name}"),
                                        "sphere_times_transversal"))
    transverse = any(isinstance(p, HingeBlock3) and
                     p.transverse_boundary_count > 0 for p in pieces)
    if max_rank >= 3:
        dimension, closed = 4, want_closed
    elif want_closed and transverse:
        dimension, closed = 4, True  # spin the whole plan up a dimension
    else:
        dimension, closed = 3, not transverse and tplan.closed
    return RealizationPlan(dimension, closed, tuple(pieces),
                           tplan.surgeries, tuple(gluings),
                           tuple(provenance),
                           base=split.t0_presentation,
                           side_data=tuple(sides))


# ---------------------------------------------------------------------------
# verification


def verify_plan(plan: RealizationPlan, P: Presentation) -> dict:
    base = plan.base if plan.base is not None else P
    report: dict[str, object] = {}
    violations: list[str] = []
    if plan.unknown:
        violations.append(f"plan is unknown: {plan.unknown}")
    i1 = [s for s in plan.surgeries if isinstance(s, Index1)]
    i2 = [s for s in plan.surgeries if isinstance(s, Index2)]
    h1 = [s for s in plan.surgeries if isinstance(s, Half1)]
    # (a) paired counts
    if len(i1) != len(i2):
        violations.append(f"(a) {len(i1)} index-1 vs {len(i2)} index-2")
    # (b) transverse chains verify and connect image to domain
    for s in i2:
        if not check_chain(base, s.transverse_chain):
            violations.append(f"(b) chain of {s.pairs} fails")
            continue
        g = base.generators.get(s.pairs)
        if g is not None:
            if not (chain_covers(s.transverse_chain, pick(image(g))) and
                    chain_covers(s.transverse_chain, pick(g.dom))):
                violations.append(f"(b) chain of {s.pairs} misses a region")
        if s.levitt_upper_bound < 0:
            violations.append(f"(b) negative genus bound for {s.pairs}")
    # (b') genus records pair off with index-2 records and bound the
    # singularity count their chains require
    genus = [s for s in plan.surgeries if isinstance(s, Genus)]
    if len(genus) != len(i2):
        violations.append(f"(b') {len(genus)} genus records vs "
                          f"{len(i2)} index-2")
    for s, gn in zip(i2, genus):
        need = max(1, sum(len(w.letters) for w in s.transverse_chain.jumps) +
                   (len(s.transverse_chain.closing.letters)
                    if s.transverse_chain.closing else 0))
        if gn.count_bound < need:
            violations.append(f"(b') genus bound {gn.count_bound} below "
                              f"required {need}")
    # (c) membership certificates re-verify
    for s in i1:
        if not verify_membership_cert(base, s.cert_map, s.extension_cert):
            violations.append(f"(c) certificate of {s.generator} fails")
        g = base.generators.get(s.generator)
        if g is None:
            continue
        if s.dom != g.dom.closure_bounds() or s.im != image(g).closure_bounds():
            violations.append(f"(c) surgery region of {s.generator} does "
                              f"not match the generator")
        if s.cert_map.dom != g.dom or not equal_on_overlap(s.cert_map, g):
            violations.append(f"(c) certified map of {s.generator} differs "
                              f"from the generator")
    # (d) 3-dimensional hinge blocks have rank <= 2
    for p in plan.pieces:
        if isinstance(p, HingeBlock3) and p.hinge.rank > 2:
            violations.append(f"(d) rank-{p.hinge.rank} hinge in a 3d block")
    # (e) gluing ports used exactly once, kinds consistent
    seen_ports = set()
    for gl in plan.gluings:
        for port in (gl.left, gl.right):
            if port in seen_ports:
                violations.append(f"(e) port {port} used twice")
            seen_ports.add(port)
        if gl.port_kind not in ("circle_neighborhood",
                                "sphere_times_transversal"):
            violations.append(f"(e) unknown port kind {gl.port_kind}")
    # (f) dimension/closed flags consistent with the piece inventory
    if plan.dimension not in (3, 4):
        violations.append(f"(f) bad dimension {plan.dimension}")
    if plan.dimension == 3 and plan.closed:
        if h1:
            violations.append("(f) closed 3d plan with half surgeries")
        for p in plan.pieces:
            if isinstance(p, HingeBlock3) and p.transverse_boundary_count > 0:
                violations.append("(f) closed 3d plan with transverse "
                                  "boundary")
        if any(isinstance(p, HingeBlock4) for p in plan.pieces):
            violations.append("(f) 4d piece in a 3d plan")
    # (g) holonomy letters generate: inventory matches the presentation
    inventory = {s.generator for s in i1} | {s.generator for s in h1}
    if base is not None and inventory != set(base.generators):
        violations.append(f"(g) generator inventory {sorted(inventory)} != "
                          f"{sorted(base.generators)}")
    # side data rechecks
    for sd in plan.side_data:
        if not all(sd.checks.values()):
            violations.append(f"side data at {sd.a1} fails its checks")
    report["violations"] = tuple(violations)
    report["ok"] = not violations
    report["index1"] = len(i1)
    report["index2"] = len(i2)
    return report


# ---------------------------------------------------------------------------
# the homothety library


def homothety_rank(lambdas: Sequence) -> int:
    lams = [rat(x) for x in lambdas]
    return slope_rank([(l, l) for l in lams])


def homothety_library(lambdas: Sequence, half: bool = False) -> Presentation:
    """Homothety pseudo-groups x -> lambda_i * x on a line (or half-line)
    component, with extension witnesses."""
    if not lambdas:
        raise ValueError("need at least one ratio")
    lams = [rat(x) for x in lambdas]
    for l in lams:
        if l <= 0:
            raise ValueError(f"ratios must be positive, got {l}")
    if half:
        T = interval("T", 0, None, True, False)
        dom, wdom = sub(T, 0, 1, True, False), sub(T, 0, 2, True, False)
    else:
        T = line("T")
        dom, wdom = sub(T, -1, 1), sub(T, -2, 2)
    gens = {}
    exts = {}
    for i, l in enumerate(lams):
        name = f"g{i + 1}"
        gens[name] = affine(dom, l, 0)
        exts[name] = affine(wdom, l, 0)
    if homothety_rank(lams) < len(lams):
        warnings.warn("homothety ratios are multiplicatively dependent; "
                      "the family's rank is lower than its length")
    return Presentation((T,), gens, exts)
