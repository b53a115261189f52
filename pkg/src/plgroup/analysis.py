"""Structural analysis of PL pseudo-groups.

Centrepiece: positive chains.  A positive chain is a sequence of
strictly positive arcs inside components, consecutive arcs linked by
words carrying the extremity of one arc to the origin of the next; it
either runs from boundary to boundary or closes into a loop.  Tautness
asks every orbit to meet such a chain and the verdict here is
three-valued, always with an exact certificate.

The reachability engine works on exact up-sets: within a component one
can always slide positively, so the attained set per interval component
is determined by its infimum (and whether that infimum is itself
attained); circle components are all-or-nothing.  Every improvement is
recorded as an immutable event so that certificates can be rebuilt
exactly.  Co-reachability reuses the same engine on the coordinate
mirror of the presentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .geometry import (Cell, Component, Point, Q, SubInterval, cell_contains,
                       full, intersect, interval_partition, pick,
                       rel_compact_in, sub)
from .plmap import (PLMap, compose_all, equal_on_overlap, fixed_set, germ_at,
                    image, invert, restrict)
from .pseudogroup import (EquivalenceAtlas, Presentation, Word, _clip_to,
                          _covers, _map_key, eval_word, isotropy, orbit_ball,
                          orbit_ball_words, slope_rank, word_map)

B2B = "boundary_to_boundary"
LOOP = "loop"


# ---------------------------------------------------------------------------
# positive chains


@dataclass(frozen=True)
class PositiveChain:
    arcs: tuple[tuple[Point, Point], ...]
    jumps: tuple[Word, ...]
    kind: str
    closing: Optional[Word] = None

    def __post_init__(self):
        if self.kind not in (B2B, LOOP):
            raise ValueError(f"unknown chain kind {self.kind}")
        if len(self.jumps) != max(0, len(self.arcs) - 1):
            raise ValueError("need exactly one jump word between consecutive arcs")
        if self.kind == LOOP and self.closing is None:
            raise ValueError("a loop needs a closing word")


def check_chain_detail(P: Presentation, c: PositiveChain) -> tuple[bool, str]:
    if not c.arcs:
        return False, "empty chain"
    for i, (a, b) in enumerate(c.arcs):
        if a.component != b.component:
            return False, f"arc {i} crosses components"
        comp = a.component
        if comp.is_circle:
            if a.coord == b.coord:
                return False, f"arc {i} is not strictly positive"
        elif not a.coord < b.coord:
            return False, f"arc {i} is not strictly positive"
    for i, w in enumerate(c.jumps):
        src = c.arcs[i][1]
        dst = c.arcs[i + 1][0]
        got = eval_word(P, w, src)
        if got != dst:
            return False, f"jump {i} evaluates to {got}, expected {dst}"
    first = c.arcs[0][0]
    last = c.arcs[-1][1]
    if c.kind == B2B:
        if first.coord not in first.component.boundary_coords():
            return False, "origin not on the boundary"
        if last.coord not in last.component.boundary_coords():
            return False, "extremity not on the boundary"
        return True, "ok"
    got = eval_word(P, c.closing, last)
    if got != first:
        return False, f"closing word evaluates to {got}, expected {first}"
    return True, "ok"


def check_chain(P: Presentation, c: PositiveChain) -> bool:
    return check_chain_detail(P, c)[0]


def chain_covers(c: PositiveChain, p: Point) -> bool:
    """Does some (closed) arc of the chain contain the point?"""
    for a, b in c.arcs:
        if a.component != p.component:
            continue
        comp = a.component
        if comp.is_circle:
            ext = (b.coord - a.coord) % comp.length or comp.length
            if (p.coord - a.coord) % comp.length <= ext:
                return True
        elif a.coord <= p.coord <= b.coord:
            return True
    return False


# ---------------------------------------------------------------------------
# the coordinate mirror (used for co-reachability)


def _mirror_presentation(P: Presentation) -> Presentation:
    comps = {}
    order = []
    for c in P.transversal:
        if c.is_circle:
            mc = Component(c.cid, "circle", length=c.length)
        else:
            mc = Component(c.cid, "interval",
                           None if c.hi is None else -c.hi,
                           None if c.lo is None else -c.lo,
                           c.hi_closed, c.lo_closed)
        comps[c.cid] = mc
        order.append(mc)
    gens = {name: _mirror_map(g, comps) for name, g in P.generators.items()}
    return Presentation(tuple(order), gens)


def _mirror_map(g: PLMap, comps: dict[str, Component]) -> PLMap:
    d = g.dom
    mc = comps[d.component.cid]
    mcod = comps[g.codom.cid]
    dom = SubInterval(mc,
                      None if d.hi is None else -d.hi,
                      None if d.lo is None else -d.lo,
                      d.hi_closed, d.lo_closed)
    bps = tuple((-x, -y) for x, y in reversed(g.bps))
    if mc.is_circle:
        delta = dom.lo - bps[0][0]
        bps = tuple((x + delta, y) for x, y in bps)
    return PLMap(dom, mcod, bps, g.hi_slope, g.lo_slope)


def _mirror_point(p: Point, M: Presentation) -> Point:
    c = M.component(p.component.cid)
    return Point(c, -p.coord if not c.is_circle else -p.coord)


# ---------------------------------------------------------------------------
# reachability engine


@dataclass(frozen=True)
class _Event:
    """One improvement of a component's attained set.

    Interval: everything above `m` is attained (plus m itself when
    closed).  Circle: everything is attained, entered near `m`.  `prov`
    is None for a seed, else (name, e, map, src_event, inlo, inclosed):
    the letter jumped here from points just above inlo in the source.
    """

    cid: str
    m: Optional[Q]
    closed: bool
    circle: bool = False
    prov: Optional[tuple] = None


def _better(new_m, new_cl, old_m, old_cl) -> bool:
    if old_m is None:
        return False
    if new_m is None:
        return True
    return new_m < old_m or (new_m == old_m and new_cl and not old_cl)


class Reach:
    """Least fixpoint of single-letter jumps over positive-slide up-sets."""

    def __init__(self, P: Presentation, seeds: Sequence[_Event], maxiter: int):
        self.P = P
        self.events: dict[str, _Event] = {}
        self.stable = False
        for ev in seeds:
            self._improve(ev)
        for _ in range(max(1, maxiter)):
            if not self._sweep():
                self.stable = True
                break

    def _improve(self, ev: _Event) -> bool:
        cur = self.events.get(ev.cid)
        if ev.circle:
            if cur is not None and cur.circle:
                return False
            self.events[ev.cid] = ev
            return True
        if cur is None:
            self.events[ev.cid] = ev
            return True
        if cur.circle:
            return False
        if _better(ev.m, ev.closed, cur.m, cur.closed):
            self.events[ev.cid] = ev
            return True
        return False

    def _sweep(self) -> bool:
        changed = False
        for (name, e), g in sorted(self.P.letter_items(),
                                   key=lambda t: (t[0][0], -t[0][1])):
            d = g.dom
            src = self.events.get(d.component.cid)
            if src is None:
                continue
            if d.component.is_circle:
                if not src.circle:
                    continue
                inlo = d.lo
                incl = d.lo_closed
            else:
                m, cl = src.m, src.closed
                if m is None:
                    inlo, incl = d.lo, d.lo_closed
                elif d.hi is not None and (m > d.hi or
                                           (m == d.hi and not (cl and d.hi_closed))):
                    continue
                elif d.lo is not None and m < d.lo:
                    inlo, incl = d.lo, d.lo_closed
                elif d.lo is not None and m == d.lo:
                    inlo, incl = m, cl and d.lo_closed
                else:
                    inlo, incl = m, cl and d._contains_plain(m)
            if inlo is None:
                out_m: Optional[Q] = None
                out_cl = False
            else:
                out_m = g.eval_lift(inlo)
                out_cl = incl
            prov = (name, e, g, src, inlo, incl)
            if g.codom.is_circle:
                ev = _Event(g.codom.cid, g.codom.normalize(out_m), out_cl,
                            circle=True, prov=prov)
            else:
                ev = _Event(g.codom.cid, out_m, out_cl, prov=prov)
            if self._improve(ev):
                changed = True
        return changed

    def state(self, cid: str) -> Optional[_Event]:
        return self.events.get(cid)

    def attains(self, p: Point) -> bool:
        ev = self.events.get(p.component.cid)
        if ev is None:
            return False
        if ev.circle or ev.m is None:
            return True
        return p.coord > ev.m or (p.coord == ev.m and ev.closed)

    def attains_below(self, p: Point) -> bool:
        """Is some point strictly below p attained (or an arc on a circle)?"""
        ev = self.events.get(p.component.cid)
        if ev is None:
            return False
        if ev.circle or ev.m is None:
            return True
        return p.coord > ev.m

    # -- reconstruction -----------------------------------------------------

    def moves_to(self, p: Point) -> Optional[tuple[Point, list]]:
        """(origin, moves) of a weak chain from a seed point to p.

        Moves are ("arc", a, b) and ("jump", (name, e)); consecutive
        jumps are legitimate (they compose); arcs are strictly positive.
        """
        if not self.attains(p):
            return None
        return self._build(self.events[p.component.cid], p)

    def _build(self, ev: _Event, target: Point):
        comp = self.P.component(ev.cid)
        if ev.prov is None:
            origin = Point(comp, ev.m)
            moves: list = []
            if target != origin:
                moves.append(("arc", origin, target))
            return origin, moves
        name, e, g, src, inlo, incl = ev.prov
        lam = self._landing(ev, g, target)
        y = _lift_into(g, lam.coord)
        sigma = Point(g.dom.component,
                      g.dom.component.normalize(g.inv_lift(y)))
        origin, moves = self._build(src, sigma)
        moves.append(("jump", (name, e)))
        if lam != target:
            moves.append(("arc", lam, target))
        return origin, moves

    @staticmethod
    def _landing(ev: _Event, g: PLMap, target: Point) -> Point:
        comp = target.component
        yhi = g.bps[-1][1]
        if comp.is_circle:
            if ev.closed:
                return Point(comp, ev.m)
            m_lift = g.eval_lift(ev.prov[4]) if ev.prov else ev.m
            avail = yhi - m_lift
            dist = (target.coord - ev.m) % comp.length
            if dist == 0:
                dist = comp.length
            return Point(comp, ev.m + min(dist, avail) / 2)
        if ev.closed:
            return Point(comp, ev.m)
        room = min(target.coord - ev.m, yhi - ev.m)
        return Point(comp, ev.m + room / 2)


def _lift_into(g: PLMap, y_coord: Q) -> Q:
    """Lift a codomain coordinate into g's output lift window."""
    if not g.codom.is_circle:
        return y_coord
    y0, y1 = g.bps[0][1], g.bps[-1][1]
    L = g.codom.length
    y = y0 + ((y_coord - y0) % L)
    if y > y1:
        y -= L
    return y


def _entries(P: Presentation) -> list[_Event]:
    out = []
    for c in P.transversal:
        if not c.is_circle and c.lo is not None and c.lo_closed:
            out.append(_Event(c.cid, c.lo, True))
    return out


def _seed_at(p: Point) -> _Event:
    return _Event(p.component.cid, p.coord, True,
                  circle=p.component.is_circle)


# -- turning move lists into chains -----------------------------------------


def _moves_to_b2b(origin: Point, moves: list) -> Optional[PositiveChain]:
    """A boundary-to-boundary chain from a full move list, or None when a
    jump would have to sit before the first or after the last arc."""
    arcs: list = []
    jumps: list = []
    pending = Word()
    for mv in moves:
        if mv[0] == "jump":
            pending = pending.then(*mv[1])
        else:
            if arcs:
                jumps.append(pending)
                pending = Word()
            elif pending.letters:
                return None  # leading jump: origin would leave the boundary
            arcs.append((mv[1], mv[2]))
    if pending.letters or not arcs:
        return None
    return PositiveChain(tuple(arcs), tuple(jumps), B2B)


def _moves_to_loop(moves: list) -> Optional[PositiveChain]:
    """A loop from a cyclic move list (start point == end point)."""
    first_arc = next((i for i, mv in enumerate(moves) if mv[0] == "arc"), None)
    if first_arc is None:
        return None
    rotated = moves[first_arc:] + moves[:first_arc]
    arcs: list = []
    jumps: list = []
    pending = Word()
    for mv in rotated:
        if mv[0] == "jump":
            pending = pending.then(*mv[1])
        else:
            if arcs:
                jumps.append(pending)
                pending = Word()
            arcs.append((mv[1], mv[2]))
    return PositiveChain(tuple(arcs), tuple(jumps), LOOP, closing=pending)


def _co_moves(M: Presentation, R: "Reach", P: Presentation,
              v: Point) -> Optional[tuple[Point, list]]:
    """Moves from v to a boundary exit, via the mirrored engine."""
    got = R.moves_to(_mirror_point(v, M))
    if got is None:
        return None
    m_origin, m_moves = got
    out = []
    for mv in reversed(m_moves):
        if mv[0] == "jump":
            name, e = mv[1]
            out.append(("jump", (name, -e)))
        else:
            a, b = mv[1], mv[2]
            ca = P.component(a.component.cid)
            out.append(("arc", Point(ca, -b.coord), Point(ca, -a.coord)))
    exit_pt = Point(P.component(m_origin.component.cid), -m_origin.coord)
    return exit_pt, out


# ---------------------------------------------------------------------------
# closed orbits


@dataclass(frozen=True)
class FixedFamily:
    interval: SubInterval
    word: Word
    verified: bool


@dataclass(frozen=True)
class ClosedOrbitReport:
    orbits: tuple[frozenset[Point], ...]
    families: tuple[FixedFamily, ...]
    unresolved: tuple[Point, ...]
    unknown: bool


def _enumerate_composites(P: Presentation, depth: int,
                          cap: int = 4000) -> list[tuple[Word, PLMap]]:
    """All distinct word composites up to the given length (deduplicated
    by the exact map; bounded by cap)."""
    states: dict[tuple, Word] = {}
    out: list[tuple[Word, PLMap]] = []
    frontier: list[PLMap] = []
    for (name, e), m in P.letter_items():
        k = _map_key(m)
        if k not in states:
            states[k] = Word(((name, e),))
            frontier.append(m)
            out.append((states[k], m))
    for _ in range(depth - 1):
        nxt = []
        for m in frontier:
            w0 = states[_map_key(m)]
            for (name, e), l in P.letter_items():
                if w0.letters and w0.letters[-1] == (name, -e):
                    continue  # freely reduced words only
                for piece in compose_all(l, m):
                    if piece.dom.lo is not None and piece.dom.lo == piece.dom.hi:
                        continue
                    k = _map_key(piece)
                    if k in states:
                        continue
                    states[k] = w0.then(name, e)
                    nxt.append(piece)
                    out.append((states[k], piece))
                    if len(states) >= cap:
                        return out
        frontier = nxt
        if not frontier:
            break
    return out


def _verify_closed_orbit(P: Presentation, p: Point, depth: int,
                         seen_open: Optional[set[Point]] = None
                         ) -> Optional[frozenset[Point]]:
    """The finite orbit of p, verified exactly saturated; None if the
    orbit ball does not stabilize within the depth (or grows past a
    size cap, in which case the point stays unresolved).

    Letters are invertible, so the ball never leaves p's orbit: on
    failure every point visited is recorded in seen_open, sparing later
    candidates from re-exploring the same orbit."""
    ball = {p}
    frontier = [p]
    for _ in range(depth + 1):
        nxt = []
        for q in frontier:
            for _, m in P.letter_items():
                if m.defined_at(q):
                    r = m(q)
                    if r not in ball:
                        ball.add(r)
                        nxt.append(r)
        if len(ball) > 64:
            break
        if not nxt:
            # no growth: the ball is exactly closed under every letter
            return frozenset(ball)
        frontier = nxt
    if seen_open is not None:
        seen_open |= ball
    return None


def find_closed_orbits(P: Presentation, depth: int) -> ClosedOrbitReport:
    composites = _enumerate_composites(P, depth)
    candidates: list[Point] = []
    seen_pts: set[tuple[str, Q]] = set()
    families: list[FixedFamily] = []
    fam_keys: set = set()
    for w, m in composites:
        if m.dom.component != m.codom:
            continue
        pts, ivs = fixed_set(m)
        for q in pts:
            key = (q.component.cid, q.coord)
            if key not in seen_pts:
                seen_pts.add(key)
                candidates.append(q)
        for iv in ivs:
            key = (iv.component.cid, iv.lo, iv.hi)
            if key in fam_keys:
                continue
            fam_keys.add(key)
            sample = pick(iv)
            ver = _verify_closed_orbit(P, sample, depth) is not None
            families.append(FixedFamily(iv, w, ver))
    # components untouched by any generator: pointwise fixed
    for c in P.transversal:
        touched = any(g.dom.component == c or g.codom == c
                      for g in P.generators.values())
        if not touched:
            families.append(FixedFamily(full(c), Word(), True))
    orbits: list[frozenset[Point]] = []
    orbit_members: set[Point] = set()
    open_members: set[Point] = set()
    unresolved: list[Point] = []
    for q in sorted(candidates, key=lambda p: (p.component.cid, p.coord)):
        if q in orbit_members or q in open_members:
            continue
        got = _verify_closed_orbit(P, q, depth, open_members)
        if got is None:
            unresolved.append(q)
        else:
            orbits.append(got)
            orbit_members |= got
    return ClosedOrbitReport(tuple(orbits), tuple(families),
                             tuple(unresolved), bool(unresolved))


# ---------------------------------------------------------------------------
# tautness


@dataclass(frozen=True)
class EssentialOrbitCert:
    orbit_points: tuple[Point, ...]
    stabilizer_words: tuple[Word, ...]
    invariance: tuple[tuple[str, Point, Point], ...]
    side_blocking: tuple[tuple[str, str, bool], ...]
    depth: int


@dataclass(frozen=True)
class Taut:
    cover: tuple[PositiveChain, ...]
    cell_witness: dict[str, int]


@dataclass(frozen=True)
class NotTaut:
    witness: EssentialOrbitCert


@dataclass(frozen=True)
class Unknown:
    depth: int
    reason: str = ""


TautnessVerdict = Union[Taut, NotTaut, Unknown]


def cell_key(cell: Cell) -> str:
    if isinstance(cell, Point):
        return f"{cell.component.cid}:pt:{cell.coord}"
    return f"{cell.component.cid}:iv:{cell.lo}:{cell.hi}"


def _all_cuts(P: Presentation) -> dict[str, set[Q]]:
    cuts: dict[str, set[Q]] = {c.cid: set() for c in P.transversal}
    for g in P.generators.values():
        dc, cc = g.dom.component, g.codom
        for x, y in g.bps:
            cuts[dc.cid].add(dc.normalize(x))
            cuts[cc.cid].add(cc.normalize(y))
        if g.dom.lo is not None:
            cuts[dc.cid].add(dc.normalize(g.dom.lo))
        if g.dom.hi is not None:
            cuts[dc.cid].add(dc.normalize(g.dom.hi))
    return cuts


def _loop_slack(P: Presentation, M: Presentation, y: Point,
                depth: int) -> Optional[tuple[Reach, Reach, Point, Point]]:
    """A strict arc [u, v] through y's component usable in a loop at y:
    u reached from y, v co-reaching y, u < v with y in [u, v]."""
    LR = Reach(P, [_seed_at(y)], depth)
    LS = Reach(M, [_seed_at(_mirror_point(y, M))], depth)
    c = y.component
    if c.is_circle:
        evf = LR.state(c.cid)
        evb = LS.state(c.cid)
        if evf is not None and evb is not None:
            L = c.length
            u = Point(c, y.coord - L / 4)
            v = Point(c, y.coord + L / 4)
            return LR, LS, u, v
        return None
    evf = LR.state(c.cid)
    evb = LS.state(c.cid)
    if evf is None or evb is None:
        return None
    m = evf.m
    Mv = None if evb.m is None else -evb.m
    lo_ok = m is None or m < y.coord or (m == y.coord and evf.closed)
    hi_ok = Mv is None or Mv > y.coord or (Mv == y.coord and evb.closed)
    if not (lo_ok and hi_ok):
        return None
    u_coord = y.coord if (m is not None and m == y.coord) else \
        (y.coord - 1 if m is None else (m + y.coord) / 2)
    v_coord = y.coord if (Mv is not None and Mv == y.coord) else \
        (y.coord + 1 if Mv is None else (Mv + y.coord) / 2)
    if u_coord == v_coord:
        return None
    return LR, LS, Point(c, u_coord), Point(c, v_coord)


def _try_loop_cert(P: Presentation, M: Presentation, y: Point,
                   depth: int) -> Optional[PositiveChain]:
    got = _loop_slack(P, M, y, depth)
    if got is None:
        return None
    LR, LS, u, v = got
    fwd = LR.moves_to(u)
    back = _co_moves(M, LS, P, v)
    if fwd is None or back is None:
        return None
    _, m1 = fwd
    _, m2 = back
    moves = m1 + [("arc", u, v)] + m2
    try:
        return _moves_to_loop(moves)
    except ValueError:
        return None


def _try_b2b_cert(P: Presentation, R: Reach, M: Presentation, S: Reach,
                  y: Point) -> Optional[PositiveChain]:
    if not (R.attains(y) and S.attains(_mirror_point(y, M))):
        return None
    c = y.component
    evf = R.state(c.cid)
    evb = S.state(c.cid)
    m = evf.m
    Mv = None if evb.m is None else -evb.m
    u_coord = y.coord if (m is not None and m >= y.coord) else \
        (y.coord - 1 if m is None else (m + y.coord) / 2)
    v_coord = y.coord if (Mv is not None and Mv <= y.coord) else \
        (y.coord + 1 if Mv is None else (Mv + y.coord) / 2)
    u, v = Point(c, u_coord), Point(c, v_coord)
    fwd = R.moves_to(u)
    back = _co_moves(M, S, P, v)
    if fwd is None or back is None:
        return None
    _, m1 = fwd
    _, m2 = back
    mid = [("arc", u, v)] if u != v else []
    if not mid and not any(mv[0] == "arc" for mv in m1 + m2):
        return None
    try:
        return _moves_to_b2b(fwd[0], m1 + mid + m2)
    except ValueError:
        return None


def _circle_loop(y: Point) -> PositiveChain:
    c = y.component
    L = c.length
    a = Point(c, y.coord - L / 4)
    b = Point(c, y.coord + L / 4)
    z = Point(c, y.coord + 3 * L / 4)
    return PositiveChain(((a, b), (b, z)), (Word(),), LOOP, closing=Word())


def _essential_test(P: Presentation, M: Presentation, R: Reach, S: Reach,
                    orbit: frozenset[Point], depth: int
                    ) -> Optional[EssentialOrbitCert]:
    """Certify that the orbit meets no loop and no boundary-to-boundary
    chain.  Requires all four engines stable (exact fixpoints)."""
    if not (R.stable and S.stable):
        return None
    blocking = []
    for p in sorted(orbit, key=lambda q: (q.component.cid, q.coord)):
        if p.component.is_circle:
            return None  # circle points always lie on loops
        through = R.attains(p) and S.attains(_mirror_point(p, M))
        if through:
            return None
        LRS = _loop_slack(P, M, p, depth)
        if LRS is not None:
            return None
        LR = Reach(P, [_seed_at(p)], depth)
        LS = Reach(M, [_seed_at(_mirror_point(p, M))], depth)
        if not (LR.stable and LS.stable):
            return None
        blocking.append((p.component.cid, f"pt:{p.coord}", False))
    base = min(orbit, key=lambda q: (q.component.cid, q.coord))
    stab = tuple(w for w, _ in isotropy(P, base, min(depth, 4)).germs)
    inv = []
    for name, g in P.generators.items():
        for p in orbit:
            if g.defined_at(p):
                inv.append((name, p, g(p)))
    return EssentialOrbitCert(tuple(sorted(orbit, key=lambda q:
                                           (q.component.cid, q.coord))),
                              stab, tuple(inv), tuple(blocking), depth)


def check_taut(P: Presentation, depth: int) -> TautnessVerdict:
    for c in P.transversal:
        if not c.is_circle and (c.lo is None or c.hi is None):
            raise ValueError(f"component {c.cid} is unbounded; "
                             "tautness needs a cocompact transversal")
    return _check_taut_inner(P, depth)


def _check_taut_inner(P: Presentation, depth: int) -> TautnessVerdict:
    report = find_closed_orbits(P, depth)
    M = _mirror_presentation(P)
    R = Reach(P, _entries(P), depth)
    S = Reach(M, _entries(M), depth)

    # a verified essential orbit refutes tautness outright
    for orbit in report.orbits:
        cert = _essential_test(P, M, R, S, orbit, depth)
        if cert is not None:
            return NotTaut(cert)

    cuts: dict[str, set[Q]] = _all_cuts(P)
    for orbit in report.orbits:
        for p in orbit:
            cuts[p.component.cid].add(p.coord)
    for p in report.unresolved:
        cuts[p.component.cid].add(p.coord)

    cover: list[PositiveChain] = []
    witness: dict[str, int] = {}
    uncovered: list[str] = []
    for comp in P.transversal:
        cells = interval_partition([Point(comp, x) for x in cuts[comp.cid]],
                                   comp)
        for cell in cells:
            key = cell_key(cell)
            chain = _certify_cell(P, M, R, S, cell, depth)
            if chain is None:
                uncovered.append(key)
            else:
                cover.append(chain)
                witness[key] = len(cover) - 1
    if not uncovered:
        return Taut(tuple(cover), witness)
    return Unknown(depth, "uncertified cells: " + ", ".join(uncovered[:6]))


def _certify_cell(P: Presentation, M: Presentation, R: Reach, S: Reach,
                  cell: Cell, depth: int) -> Optional[PositiveChain]:
    if isinstance(cell, Point):
        samples = [cell]
    else:
        samples = [pick(cell)]
    # fall back to small orbit translates of the sample
    extra: list[Point] = []
    for q in orbit_ball(P, samples[0], min(depth, 2)):
        if q not in samples:
            extra.append(q)
    extra = sorted(extra, key=lambda q: (q.component.cid, q.coord))[:16]
    for y in samples + extra:
        if y.component.is_circle:
            return _circle_loop(y)
        chain = _try_b2b_cert(P, R, M, S, y)
        if chain is not None and check_chain(P, chain) and chain_covers(chain, y):
            return chain
        chain = _try_loop_cert(P, M, y, depth)
        if chain is not None and check_chain(P, chain) and chain_covers(chain, y):
            return chain
    return None


# ---------------------------------------------------------------------------
# I-bundles


@dataclass(frozen=True)
class IBundle:
    interval: SubInterval
    rank: int
    generators: tuple[PLMap, ...]


def detect_I_bundles(P: Presentation, depth: int) -> tuple[IBundle, ...]:
    out: list[IBundle] = []
    for comp in P.transversal:
        if comp.is_circle:
            continue
        incident = [g for g in P.generators.values()
                    if g.dom.component == comp or g.codom == comp]
        # candidate endpoints: common fixed structure + closed component ends
        cands: set[Q] = set()
        for g in incident:
            if g.dom.component == comp and g.codom == comp:
                pts, ivs = fixed_set(g)
                for q in pts:
                    cands.add(q.coord)
                for iv in ivs:
                    if iv.lo is not None:
                        cands.add(iv.lo)
                    if iv.hi is not None:
                        cands.add(iv.hi)
        if comp.lo is not None and comp.lo_closed:
            cands.add(comp.lo)
        if comp.hi is not None and comp.hi_closed:
            cands.add(comp.hi)
        cs = sorted(x for x in cands if comp.contains_coord(x))
        endpoints = _all_cuts(P)[comp.cid]
        good: list[tuple[Q, Q]] = []
        for i, a in enumerate(cs):
            for b in cs[i + 1:]:
                if _is_ibundle(P, comp, a, b, incident, endpoints):
                    good.append((a, b))
        # keep the maximal ones
        for a, b in good:
            if any((a2 <= a and b <= b2 and (a2, b2) != (a, b))
                   for a2, b2 in good):
                continue
            iv = SubInterval(comp, a, b,
                             comp.contains_coord(a), comp.contains_coord(b))
            mid = Point(comp, (a + b) / 2)
            rank = isotropy(P, mid, depth).rank
            gens = tuple(g for g in incident
                         if g.dom.component == comp and
                         intersect(g.dom, iv))
            out.append(IBundle(iv, rank, gens))
    return tuple(out)


def _is_ibundle(P: Presentation, comp: Component, a: Q, b: Q,
                incident: list[PLMap], endpoints: set[Q]) -> bool:
    if any(a < x < b for x in endpoints):
        return False
    for g in incident:
        d = g.dom
        if d.component != comp:
            continue
        # does the domain meet (a, b)?
        meets = intersect(d, SubInterval(comp, a, b, False, False))
        if not meets:
            continue
        if g.codom != comp:
            return False
        # endpoints must be fixed (one-sided evaluation at the closure)
        for x in (a, b):
            if (d.lo is not None and x < d.lo) or (d.hi is not None and x > d.hi):
                return False
            if g.eval_lift(x) != x:
                return False
    return True


# ---------------------------------------------------------------------------
# complement of an orbit


def _orbit_points(orbit) -> tuple[Point, ...]:
    if isinstance(orbit, EssentialOrbitCert):
        return orbit.orbit_points
    return tuple(sorted(orbit, key=lambda q: (q.component.cid, q.coord)))


def complement_generators(P: Presentation, orbit, depth: int = 8) -> Presentation:
    """Compactly generated presentation of the pseudo-group away from the
    orbit: excise a small band around every orbit point, clip the
    generators outside a slightly larger band, and use middle-band clips
    of the original generators as the new extension witnesses."""
    pts = _orbit_points(orbit)
    cuts = _all_cuts(P)
    for p in pts:
        cuts[p.component.cid].add(p.coord)
    deltas: dict[Point, Q] = {}
    for p in pts:
        deltas[p] = _choose_delta(P, p, cuts, depth)
    # regions
    keep: list[SubInterval] = []
    gen_region: list[SubInterval] = []
    wit_region: list[SubInterval] = []
    for comp in P.transversal:
        bands = sorted((p.coord, deltas[p]) for p in pts
                       if p.component == comp)
        keep.extend(_excise(comp, [(t, d / 2, True) for t, d in bands]))
        gen_region.extend(_excise(comp, [(t, d, True) for t, d in bands]))
        wit_region.extend(_excise(comp, [(t, 3 * d / 4, False) for t, d in bands]))
    return _reassemble(P, keep, gen_region, wit_region)


def _choose_delta(P: Presentation, p: Point, cuts: dict[str, set[Q]],
                  depth: int, tries: int = 16) -> Q:
    comp = p.component
    others = [x for x in cuts[comp.cid] if x != p.coord]
    if comp.is_circle:
        gaps = [min((x - p.coord) % comp.length,
                    (p.coord - x) % comp.length) for x in others]
        base = min(gaps) / 2 if gaps else comp.length / 4
    else:
        gaps = [abs(x - p.coord) for x in others]
        for end in (comp.lo, comp.hi):
            if end is not None and end != p.coord:
                gaps.append(abs(end - p.coord))
        base = min(gaps) / 2 if gaps else Q(1)
    delta = base
    incident = [(n, g) for n, g in P.generators.items()
                if _incident_at(g, p)]
    for _ in range(tries):
        if _delta_ok(P, p, delta, incident):
            return delta
        delta /= 2
    raise ValueError(f"no admissible excision width at {p}: "
                     "disjointness/commutation failed at all scales tried")


def _incident_at(g: PLMap, p: Point) -> bool:
    for s in (g.dom, image(g)):
        if s.component != p.component:
            continue
        c = s.component
        if c.is_circle:
            if (p.coord - s.lo) % c.length <= s.extent:
                return True
        else:
            if (s.lo is None or s.lo <= p.coord) and \
                    (s.hi is None or p.coord <= s.hi):
                return True
    return False


def _delta_ok(P: Presentation, p: Point, delta: Q,
              incident: list[tuple[str, PLMap]]) -> bool:
    comp = p.component
    try:
        band = SubInterval(comp,
                           max(p.coord - delta, comp.lo) if comp.lo is not None
                           and not comp.is_circle else p.coord - delta,
                           min(p.coord + delta, comp.hi) if comp.hi is not None
                           and not comp.is_circle else p.coord + delta,
                           False, False)
    except ValueError:
        return False
    inc_names = {n for n, _ in incident}
    # (1) non-incident generators stay clear of the band
    for n, g in P.generators.items():
        if n in inc_names:
            continue
        for s in (g.dom, image(g)):
            if s.component == comp and intersect(s, band):
                return False
    # (2) incident generators commute pairwise on the band
    for i, (_, g) in enumerate(incident):
        for _, h in incident[i + 1:]:
            for gh in compose_all(g, h):
                for clipped in _clip_to(gh, band):
                    for hg in compose_all(h, g):
                        if not equal_on_overlap(clipped, hg):
                            return False
            for hg in compose_all(h, g):
                for clipped in _clip_to(hg, band):
                    for gh in compose_all(g, h):
                        if not equal_on_overlap(clipped, gh):
                            return False
    return True


def _excise(comp: Component,
            bands: list[tuple[Q, Q, bool]]) -> list[SubInterval]:
    """Component minus open bands (t-w, t+w); closed_edges controls
    whether the kept pieces are closed at the fresh edges."""
    if not bands:
        return [full(comp)]
    if comp.is_circle:
        L = comp.length
        marks = sorted((t % L, w, ce) for t, w, ce in bands)
        out = []
        for i, (t, w, ce) in enumerate(marks):
            t2, w2, ce2 = marks[(i + 1) % len(marks)]
            lo = t + w
            hi = (t2 - w2) if i + 1 < len(marks) else (t2 - w2 + L)
            if hi > lo:
                out.append(SubInterval(comp, lo, hi, ce, ce2))
        return out
    out = []
    cur_lo, cur_lc = comp.lo, comp.lo_closed
    for t, w, ce in sorted(bands):
        lo_edge = t - w
        if cur_lo is None or lo_edge > cur_lo:
            out.append(SubInterval(comp, cur_lo, lo_edge, cur_lc, ce))
        cur_lo, cur_lc = t + w, ce
    if comp.hi is None or comp.hi > cur_lo:
        out.append(SubInterval(comp, cur_lo, comp.hi, cur_lc, comp.hi_closed))
    return out


def _reassemble(P: Presentation, keep: list[SubInterval],
                gen_region: list[SubInterval],
                wit_region: list[SubInterval]) -> Presentation:
    """Build the presentation on the kept pieces, clipping generators to
    the generator region and witnesses to the (larger) witness region."""
    comps: list[Component] = []
    piece_comp: list[tuple[SubInterval, Component]] = []
    for i, s in enumerate(keep):
        c = s.component
        if c.is_circle and s.is_full_circle:
            nc = Component(f"{c.cid}.{i}", "circle", length=c.length)
        else:
            nc = Component(f"{c.cid}.{i}", "interval", s.lo, s.hi,
                           s.lo_closed, s.hi_closed)
        comps.append(nc)
        piece_comp.append((s, nc))

    def locate(s: SubInterval) -> Optional[tuple[SubInterval, Component]]:
        for piece, nc in piece_comp:
            if piece.component == s.component and _covers([piece], s):
                return piece, nc
        return None

    def clip_into(g: PLMap, region: list[SubInterval]) -> list[PLMap]:
        out = []
        for rd in region:
            if rd.component != g.dom.component:
                continue
            for cm in _clip_to(g, rd):
                for ri in region:
                    if ri.component != g.codom:
                        continue
                    for tgt in intersect(image(cm), ri):
                        if tgt.lo is not None and tgt.lo == tgt.hi:
                            continue
                        try:
                            back = restrict(invert(cm), tgt)
                        except ValueError:
                            continue
                        out.append(invert(back))
        # dedupe
        uniq: dict[tuple, PLMap] = {}
        for m in out:
            uniq[_map_key(m)] = m
        return list(uniq.values())

    from .pseudogroup import _rehome_map
    gens: dict[str, PLMap] = {}
    exts: dict[str, PLMap] = {}
    for name, g in P.generators.items():
        gpieces = clip_into(g, gen_region)
        wpieces = clip_into(P.extensions.get(name, g), wit_region)
        k = 0
        for m in gpieces:
            at_dom = locate(m.dom)
            at_img = locate(image(m))
            if at_dom is None or at_img is None:
                continue
            rm = _rehome_map(m, at_dom[0], at_dom[1], at_img[0], at_img[1])
            if rm is None:
                continue
            nm = f"{name}.{k}"
            k += 1
            gens[nm] = rm
            for wm in wpieces:
                if not (rel_compact_in(m.dom, wm.dom) and
                        equal_on_overlap(m, wm)):
                    continue
                wd = locate(wm.dom)
                wi = locate(image(wm))
                if wd is None or wi is None or wd[1] != at_dom[1] or \
                        wi[1] != at_img[1]:
                    continue
                rw = _rehome_map(wm, wd[0], wd[1], wi[0], wi[1])
                if rw is not None and rel_compact_in(rm.dom, rw.dom):
                    exts[nm] = rw
                    break
    return Presentation(tuple(comps), gens, exts)


# ---------------------------------------------------------------------------
# hinges


@dataclass(frozen=True)
class Hinge:
    omega: SubInterval
    core: tuple[Q, Q]
    generators: tuple[PLMap, ...]
    words: tuple[Word, ...]
    rank: int


@dataclass(frozen=True)
class HingeReport:
    cond1: bool
    cond2: bool
    cond3: Optional[bool]  # None = unknown
    contraction: Optional[str]
    detail: str

    @property
    def ok(self) -> bool:
        return self.cond1 and self.cond2 and bool(self.cond3)


def extract_hinge(P: Presentation, p: Point, depth: int
                  ) -> tuple[Hinge, dict]:
    comp = p.component
    if comp.is_circle:
        raise ValueError("hinges live on interval components")
    rep = isotropy(P, p, depth)
    # pick a slope-independent basis of stabilizing words
    basis: list[tuple[Word, tuple[Q, Q]]] = []
    for w, g in rep.germs:
        trial = [pr for _, pr in basis] + [(g.left, g.right)]
        if slope_rank(trial) > slope_rank([pr for _, pr in basis]):
            basis.append((w, (g.left, g.right)))
    cuts = _all_cuts(P)[comp.cid]
    below = [x for x in cuts if x < p.coord]
    above = [x for x in cuts if x > p.coord]
    lo0 = max(below) if below else (comp.lo if comp.lo is not None
                                    else p.coord - 1)
    hi0 = min(above) if above else (comp.hi if comp.hi is not None
                                    else p.coord + 1)
    lo = p.coord - (p.coord - lo0) / 2 if lo0 != p.coord else p.coord
    hi = p.coord + (hi0 - p.coord) / 2
    for _ in range(24):
        omega = SubInterval(comp, lo, hi, False, False)
        maps = []
        ok = True
        for w, _ in basis:
            try:
                m = word_map(P, w, omega)
            except ValueError:
                ok = False
                break
            if m is None:
                ok = False
                break
            maps.append(m)
        if ok:
            core = _common_core(maps, p)
            if core is not None and lo < core[0] and core[1] < hi:
                gens = tuple(maps)
                h = Hinge(omega, core, gens, tuple(w for w, _ in basis),
                          slope_rank([pr for _, pr in basis]))
                faith = _faithfulness(P, h, depth)
                return h, faith
        lo = (lo + p.coord) / 2
        hi = (hi + p.coord) / 2
    # no stabilizers at all: degenerate rank-0 hinge
    omega = SubInterval(comp, lo, hi, False, False)
    h = Hinge(omega, (p.coord, p.coord), (), (), 0)
    return h, _faithfulness(P, h, depth)


def _common_core(maps: list[PLMap], p: Point) -> Optional[tuple[Q, Q]]:
    """[min, max] of the common fixed set of the maps around p."""
    if not maps:
        return (p.coord, p.coord)
    lo = hi = p.coord
    common_lo, common_hi = None, None
    for m in maps:
        if m.dom.component != m.codom:
            return None
        pts, ivs = fixed_set(m)
        fx: list[tuple[Q, Q]] = [(q.coord, q.coord) for q in pts]
        for iv in ivs:
            if iv.lo is None or iv.hi is None:
                return None
            fx.append((iv.lo, iv.hi))
        # the component of the fixed set containing p
        mine = [ab for ab in fx if ab[0] <= p.coord <= ab[1]]
        if not mine:
            return None
        a, b = mine[0]
        if common_lo is None:
            common_lo, common_hi = a, b
        else:
            common_lo, common_hi = max(common_lo, a), min(common_hi, b)
    if common_lo is None or common_lo > common_hi:
        return None
    return (common_lo, common_hi)


def _faithfulness(P: Presentation, h: Hinge, depth: int) -> dict:
    a, b = h.core
    comp = h.omega.component
    out = {"depth": depth}
    for tag, x in (("core_lo", a), ("core_hi", b)):
        ambient = isotropy(P, Point(comp, x), depth).rank
        local = slope_rank([(germ_at(m, Point(comp, x)).left,
                             germ_at(m, Point(comp, x)).right)
                            for m in h.generators
                            if _in_closure(m.dom, x)])
        out[tag] = {"ambient_rank": ambient, "hinge_rank": local,
                    "match": ambient == local}
    return out


def _in_closure(s: SubInterval, x: Q) -> bool:
    if s.component.is_circle:
        return (x - s.lo) % s.component.length <= s.extent
    return (s.lo is None or s.lo <= x) and (s.hi is None or x <= s.hi)


def verify_hinge(h: Hinge, P: Presentation, depth: int) -> HingeReport:
    a, b = h.core
    comp = h.omega.component
    # (1) domains and images are intervals containing the core
    cond1 = True
    for m in h.generators:
        if not (_in_closure(m.dom, a) and _in_closure(m.dom, b) and
                _in_closure(image(m), a) and _in_closure(image(m), b)):
            cond1 = False
    # (2) pairwise commutation wherever defined
    cond2 = True
    gens_pm = list(h.generators) + [invert(m) for m in h.generators]
    for i, g in enumerate(gens_pm):
        for hmap in gens_pm[i + 1:]:
            for gh in compose_all(g, hmap):
                for hg in compose_all(hmap, g):
                    if not equal_on_overlap(gh, hg):
                        cond2 = False
    # (3) a contraction toward the core, fix-point free outside it
    cond3: Optional[bool] = None
    who = None
    candidates: list[tuple[str, PLMap]] = []
    for i, m in enumerate(h.generators):
        candidates.append((f"gen{i}", m))
        candidates.append((f"gen{i}^-1", invert(m)))
    for i, m in enumerate(h.generators):
        for j, m2 in enumerate(h.generators):
            if i != j:
                for c in compose_all(m, invert(m2)):
                    candidates.append((f"gen{i}*gen{j}^-1", c))
    for tag, m in candidates:
        if _is_core_contraction(m, h):
            cond3 = True
            who = tag
            break
    if cond3 is None and not h.generators:
        cond3 = None
    detail = "ok" if (cond1 and cond2 and cond3) else "see flags"
    return HingeReport(cond1, cond2, cond3, who, detail)


def _is_core_contraction(m: PLMap, h: Hinge) -> bool:
    """Does m move every point of omega \\ core strictly toward the core
    (and fix nothing out there)?"""
    a, b = h.core
    if m.dom.component != m.codom:
        return False
    if not (_in_closure(m.dom, a) and _in_closure(m.dom, b)):
        return False
    if m.eval_lift(a) != a or m.eval_lift(b) != b:
        return False
    lo, hi = h.omega.lo, h.omega.hi
    # sample-free exact check: sign of m(x) - x is constant between
    # breakpoints and fixed points; verify on each side
    for side_lo, side_hi, want in ((b, hi, -1), (lo, a, 1)):
        if side_lo >= side_hi:
            continue
        xs = sorted({x for x, _ in m.bps if side_lo < x < side_hi}
                    | {side_lo, side_hi})
        for u, v in zip(xs, xs[1:]):
            mid = (u + v) / 2
            if (m.dom.lo is not None and mid < m.dom.lo) or \
                    (m.dom.hi is not None and mid > m.dom.hi):
                return False
            val = m.eval_lift(mid)
            if want < 0 and not (b <= val < mid):
                return False
            if want > 0 and not (mid < val <= a):
                return False
        for x in xs[1:-1]:
            val = m.eval_lift(x)
            if want < 0 and not (b <= val < x):
                return False
            if want > 0 and not (x < val <= a):
                return False
    return True


# ---------------------------------------------------------------------------
# the splitting pipeline


@dataclass(frozen=True)
class NovikovSplit:
    t0: tuple[Component, ...]
    t0_presentation: Presentation
    hinges: tuple[Hinge, ...]
    hinge_reports: tuple[HingeReport, ...]
    atlas: EquivalenceAtlas
    core_saturation: tuple[tuple[str, Point, Point], ...]
    escape_words: tuple[tuple[Point, Word], ...]
    depth: int


def novikov_split(P: Presentation, depth: int) -> Optional[NovikovSplit]:
    report = find_closed_orbits(P, depth)
    if report.unknown:
        return None
    M = _mirror_presentation(P)
    R = Reach(P, _entries(P), depth)
    S = Reach(M, _entries(M), depth)
    essential: list[frozenset[Point]] = []
    for orbit in report.orbits:
        cert = _essential_test(P, M, R, S, orbit, depth)
        if cert is not None:
            essential.append(orbit)
    hinges: list[Hinge] = []
    reports: list[HingeReport] = []
    if essential:
        for orbit in essential:
            for p in sorted(orbit, key=lambda q: (q.component.cid, q.coord)):
                h, _ = extract_hinge(P, p, depth)
                rep = verify_hinge(h, P, depth)
                hinges.append(h)
                reports.append(rep)
        allpts = frozenset(q for o in essential for q in o)
        comp_pres = complement_generators(P, allpts, depth)
    else:
        comp_pres = P
    # normalize the taut remainder to compact pieces
    norm = _taut_normalize(comp_pres, depth)
    if norm is None:
        return None
    t0_pres, atlas = norm
    sat = []
    for orbit in essential:
        for name, g in P.generators.items():
            for p in orbit:
                if g.defined_at(p):
                    q = g(p)
                    if q not in orbit:
                        return None
                    sat.append((name, p, q))
    escape = _escape_certificates(P, hinges, t0_pres, atlas, depth)
    if escape is None:
        return None
    return NovikovSplit(t0_pres.transversal, t0_pres, tuple(hinges),
                        tuple(reports), atlas, tuple(sat), escape, depth)


def _taut_normalize(P: Presentation, depth: int
                    ) -> Optional[tuple[Presentation, EquivalenceAtlas]]:
    """Exchange the transversal for a compact exhaustive one.

    Keeps circles and compact closed intervals; shrinks every other
    component to a compact closed subinterval, verified exhaustive by
    orbit sampling against the component's cell decomposition."""
    from .plmap import affine, identity_on
    from .pseudogroup import restrict_presentation
    cuts = _all_cuts(P)
    pieces: list[SubInterval] = []
    for comp in P.transversal:
        if comp.is_circle:
            pieces.append(full(comp))
            continue
        if comp.lo is not None and comp.hi is not None and \
                comp.lo_closed and comp.hi_closed:
            pieces.append(full(comp))
            continue
        piece = _compact_exhaustive_piece(P, comp, sorted(cuts[comp.cid]),
                                          depth)
        if piece is None:
            return None
        pieces.append(piece)
    newP = restrict_presentation(P, pieces)
    charts = tuple(affine(full(nc), 1, 0, codom=s.component)
                   for s, nc in zip(pieces, newP.transversal))
    atlas = EquivalenceAtlas(newP.transversal, charts)
    return newP, atlas


def _compact_exhaustive_piece(P: Presentation, comp: Component,
                              cuts: list[Q], depth: int
                              ) -> Optional[SubInterval]:
    """A compact closed subinterval meeting every orbit of the component."""
    lo = comp.lo if comp.lo is not None and comp.lo_closed else None
    hi = comp.hi if comp.hi is not None and comp.hi_closed else None
    inner = [x for x in cuts if comp.contains_coord(x)]
    if lo is None:
        below = comp.lo
        ref = min(inner) if inner else (hi if hi is not None else Q(0))
        lo = ref - 1 if below is None else (below + ref) / 2 if ref > below else below + 1
    if hi is None:
        above = comp.hi
        ref = max(inner) if inner else lo
        hi = ref + 1 if above is None else (ref + above) / 2 if ref < above else above - 1
    for _ in range(12):
        if lo >= hi:
            break
        piece = SubInterval(comp, lo, hi, True, True)
        if _exhaustive_on(P, comp, piece, depth):
            return piece
        # widen toward the missing ends
        if comp.lo is None:
            lo = lo - (hi - lo)
        elif not comp.lo_closed:
            lo = (comp.lo + lo) / 2
        if comp.hi is None:
            hi = hi + (hi - lo)
        elif not comp.hi_closed:
            hi = (hi + comp.hi) / 2
    return None


def _exhaustive_on(P: Presentation, comp: Component, piece: SubInterval,
                   depth: int) -> bool:
    cuts = _all_cuts(P)[comp.cid]
    cuts = cuts | {piece.lo, piece.hi}
    cells = interval_partition([Point(comp, x) for x in cuts
                                if comp.contains_coord(x)], comp)
    for cell in cells:
        y = cell if isinstance(cell, Point) else pick(cell)
        if piece.contains(y):
            continue
        ball = orbit_ball(P, y, depth)
        if not any(q.component == comp and piece.contains(q) for q in ball):
            return False
    return True


def _escape_certificates(P: Presentation, hinges: Sequence[Hinge],
                         t0_pres: Presentation, atlas: EquivalenceAtlas,
                         depth: int):
    """For sample points of every hinge's omega outside the core: a word
    moving them into the region covered by the T0 charts."""
    targets: list[SubInterval] = [image(ch) for ch in atlas.charts]

    def hits(q: Point) -> bool:
        # chart images live on pieces of the original components, named
        # "<cid>.<i>" with unchanged coordinates
        for t in targets:
            tc = t.component
            if not (tc == q.component or
                    tc.cid.startswith(q.component.cid + ".")):
                continue
            if tc.is_circle:
                if t.is_full_circle or \
                        (q.coord - t.lo) % tc.length <= t.extent:
                    return True
            elif t._contains_plain(q.coord):
                return True
        return False

    out = []
    for h in hinges:
        a, b = h.core
        comp = h.omega.component
        sides = []
        if h.omega.lo < a:
            sides.append(Point(comp, (h.omega.lo + a) / 2))
        if b < h.omega.hi:
            sides.append(Point(comp, (b + h.omega.hi) / 2))
        for y in sides:
            ball = orbit_ball_words(P, y, depth)
            hit = None
            for q, w in sorted(ball.items(),
                               key=lambda t: (len(t[1]), t[0].coord)):
                if hits(q):
                    hit = (y, w)
                    break
            if hit is None:
                return None
            out.append(hit)
    return tuple(out)
