"""Piecewise-linear local homeomorphisms between oriented 1-manifolds.

A `PLMap` is an orientation-preserving PL homeomorphism from a
sub-interval of one component onto a sub-interval of another (possibly
the same).  Breakpoints are exact rational pairs (x, y) in lift
coordinates: for a circle domain the x's live in the arc's lift window,
for a circle codomain the y's are an arbitrary monotone lift and are
reduced mod the circumference on evaluation.

For a bounded domain the breakpoints span the closure of the domain.
Unbounded interval domains carry explicit extension slopes instead.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Optional

from .geometry import Component, Point, Q, SubInterval, intersect, rat


class DisconnectedComposition(ValueError):
    """Raised when a composition's domain has several components."""

    def __init__(self, pieces):
        super().__init__("composition domain is disconnected")
        self.pieces = pieces


@dataclass(frozen=True)
class Germ:
    """Target of a germ together with its one-sided slopes."""

    source: Point
    target: Point
    left: Q
    right: Q

    def key(self):
        return (self.target.component.cid, self.target.coord, self.left, self.right)


@dataclass(frozen=True)
class PLMap:
    dom: SubInterval
    codom: Component
    bps: tuple[tuple[Q, Q], ...]
    lo_slope: Optional[Q] = None
    hi_slope: Optional[Q] = None

    def __post_init__(self):
        xs = [p[0] for p in self.bps]
        ys = [p[1] for p in self.bps]
        if len(self.bps) < 1:
            raise ValueError("a PL map needs at least one breakpoint")
        if any(xs[i] >= xs[i + 1] for i in range(len(xs) - 1)):
            raise ValueError("breakpoint x's must strictly increase")
        if any(ys[i] >= ys[i + 1] for i in range(len(ys) - 1)):
            raise ValueError("breakpoint y's must strictly increase")
        d = self.dom
        if d.lo is None:
            if self.lo_slope is None or self.lo_slope <= 0:
                raise ValueError("unbounded-below domain needs a positive lo_slope")
        else:
            if xs[0] != d.lo:
                raise ValueError("breakpoints must span the domain closure (lo)")
        if d.hi is None:
            if self.hi_slope is None or self.hi_slope <= 0:
                raise ValueError("unbounded-above domain needs a positive hi_slope")
        else:
            if xs[-1] != d.hi:
                raise ValueError("breakpoints must span the domain closure (hi)")
        if len(self.bps) == 1 and (d.lo is not None and d.hi is not None):
            raise ValueError("bounded domain needs two spanning breakpoints")
        if self.codom.is_circle and d.lo is not None and d.hi is not None:
            if ys[-1] - ys[0] > self.codom.length:
                raise ValueError("image overlaps itself on the circle codomain")
        if self.codom.is_circle and (d.lo is None or d.hi is None):
            raise ValueError("unbounded domain cannot map onto a circle")

    # -- evaluation ---------------------------------------------------------

    def eval_lift(self, x: Q) -> Q:
        xs = [p[0] for p in self.bps]
        if x <= xs[0]:
            if x == xs[0]:
                return self.bps[0][1]
            if self.lo_slope is None:
                raise ValueError("lift coordinate below domain")
            x0, y0 = self.bps[0]
            return y0 + self.lo_slope * (x - x0)
        if x >= xs[-1]:
            if x == xs[-1]:
                return self.bps[-1][1]
            if self.hi_slope is None:
                raise ValueError("lift coordinate above domain")
            x0, y0 = self.bps[-1]
            return y0 + self.hi_slope * (x - x0)
        i = bisect.bisect_right(xs, x) - 1
        x0, y0 = self.bps[i]
        x1, y1 = self.bps[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def inv_lift(self, y: Q) -> Q:
        ys = [p[1] for p in self.bps]
        if y <= ys[0]:
            if y == ys[0]:
                return self.bps[0][0]
            if self.lo_slope is None:
                raise ValueError("lift coordinate below image")
            x0, y0 = self.bps[0]
            return x0 + (y - y0) / self.lo_slope
        if y >= ys[-1]:
            if y == ys[-1]:
                return self.bps[-1][0]
            if self.hi_slope is None:
                raise ValueError("lift coordinate above image")
            x0, y0 = self.bps[-1]
            return x0 + (y - y0) / self.hi_slope
        i = bisect.bisect_right(ys, y) - 1
        x0, y0 = self.bps[i]
        x1, y1 = self.bps[i + 1]
        return x0 + (x1 - x0) * (y - y0) / (y1 - y0)

    def slope_at(self, x: Q, side: int) -> Q:
        """One-sided slope at a lift coordinate (side -1 left, +1 right)."""
        xs = [p[0] for p in self.bps]
        if x < xs[0] or (x == xs[0] and side < 0):
            if self.lo_slope is None:
                raise ValueError("no slope below domain")
            return self.lo_slope
        if x > xs[-1] or (x == xs[-1] and side > 0):
            if self.hi_slope is None:
                raise ValueError("no slope above domain")
            return self.hi_slope
        if side > 0:
            i = bisect.bisect_right(xs, x) - 1
            if xs[i] == x and i == len(xs) - 1:
                raise ValueError("no right slope at domain top")
        else:
            i = bisect.bisect_left(xs, x) - 1
        x0, y0 = self.bps[i]
        x1, y1 = self.bps[i + 1]
        return (y1 - y0) / (x1 - x0)

    def __call__(self, p: Point) -> Point:
        x = self.dom.lift_coord(p)
        if x is None:
            raise ValueError(f"{p} not in domain")
        return Point(self.codom, self.codom.normalize(self.eval_lift(x)))

    def defined_at(self, p: Point) -> bool:
        return self.dom.lift_coord(p) is not None


# ---------------------------------------------------------------------------
# builders


def plmap(dom: SubInterval, codom: Component, bps, lo_slope=None, hi_slope=None) -> PLMap:
    norm = tuple((rat(x), rat(y)) for x, y in bps)
    return PLMap(dom, codom, norm,
                 None if lo_slope is None else rat(lo_slope),
                 None if hi_slope is None else rat(hi_slope))


def affine(dom: SubInterval, a, b, codom: Optional[Component] = None) -> PLMap:
    """x |-> a*x + b on the given sub-interval."""
    a, b = rat(a), rat(b)
    codom = codom or dom.component
    if dom.lo is None or dom.hi is None:
        x0 = Q(0) if dom.lo is None and dom.hi is None else (dom.lo if dom.lo is not None else dom.hi)
        return PLMap(dom, codom, ((x0, a * x0 + b),),
                     a if dom.lo is None else None,
                     a if dom.hi is None else None)
    return PLMap(dom, codom, ((dom.lo, a * dom.lo + b), (dom.hi, a * dom.hi + b)))


def identity_on(s: SubInterval) -> PLMap:
    return affine(s, 1, 0)


def image(f: PLMap) -> SubInterval:
    d = f.dom
    lo = None if d.lo is None else f.bps[0][1]
    hi = None if d.hi is None else f.bps[-1][1]
    return SubInterval(f.codom, lo, hi, d.lo_closed, d.hi_closed)


def invert(f: PLMap) -> PLMap:
    newdom = image(f)
    if f.codom.is_circle:
        delta = newdom.lo - f.bps[0][1]
    else:
        delta = Q(0)
    bps = tuple((y + delta, x) for x, y in f.bps)
    inv_lo = None if f.lo_slope is None else 1 / f.lo_slope
    inv_hi = None if f.hi_slope is None else 1 / f.hi_slope
    return PLMap(newdom, f.dom.component, bps, inv_lo, inv_hi)


# ---------------------------------------------------------------------------
# restriction / composition


def _clip_bps(f: PLMap, xlo, xhi) -> tuple:
    """Breakpoints of f restricted to lift window [xlo, xhi] (finite ends
    where given; None keeps the map unbounded on that side)."""
    pts = []
    if xlo is not None:
        pts.append((xlo, f.eval_lift(xlo)))
    for x, y in f.bps:
        if (xlo is None or x > xlo) and (xhi is None or x < xhi):
            pts.append((x, y))
    if xhi is not None:
        pts.append((xhi, f.eval_lift(xhi)))
    return tuple(pts)


def _clip_bps_periodic(f: PLMap, xlo, xhi) -> tuple:
    """Breakpoints of a full-circle map clipped to [xlo, xhi], using the
    periodic extension of its lift (F(x + L) = F(x) + yspan)."""
    L = f.dom.component.length
    yspan = f.bps[-1][1] - f.bps[0][1]

    def ev(x):
        k = (x - f.bps[0][0]) // L
        return f.eval_lift(x - k * L) + k * yspan

    pts = [(xlo, ev(xlo))]
    for k in (0, 1):
        for x, y in f.bps[:-1]:
            xx, yy = x + k * L, y + k * yspan
            if xlo < xx < xhi:
                pts.append((xx, yy))
    pts.sort()
    pts.append((xhi, ev(xhi)))
    return tuple(pts)


def restrict(f: PLMap, s: SubInterval) -> PLMap:
    """f restricted to s (intersected with the domain); must be connected."""
    pieces = intersect(f.dom, s)
    if not pieces:
        raise ValueError("empty restriction")
    if len(pieces) > 1:
        raise DisconnectedComposition(pieces)
    piece = pieces[0]
    if piece.lo is not None and piece.hi is not None and piece.lo == piece.hi:
        raise ValueError("degenerate restriction")
    if f.dom.component.is_circle:
        # place the piece into f's lift window
        shift = (piece.lo - f.dom.lo) % f.dom.component.length
        xlo = f.dom.lo + shift
        xhi = xlo + (piece.hi - piece.lo)
        if xhi > f.dom.hi and not f.dom.is_full_circle:
            raise ValueError("restriction leaves the domain lift window")
        newdom = piece
    else:
        xlo, xhi = piece.lo, piece.hi
        newdom = piece
    if f.dom.component.is_circle and f.dom.is_full_circle:
        bps = _clip_bps_periodic(f, xlo, xhi)
    else:
        bps = _clip_bps(f, xlo, xhi)
    if f.dom.component.is_circle:
        # rebuild with the piece's normalised anchor
        delta = newdom.lo - xlo
        bps = tuple((x + delta, y) for x, y in bps)
    lo_slope = f.lo_slope if newdom.lo is None else None
    hi_slope = f.hi_slope if newdom.hi is None else None
    return PLMap(newdom, f.codom, bps, lo_slope, hi_slope)


def _merge_flag(end_coord, window_flag, dom_end, dom_flag):
    if dom_end is not None and end_coord == dom_end:
        return window_flag and dom_flag
    return window_flag


def compose_all(g: PLMap, f: PLMap) -> list[PLMap]:
    """All connected pieces of g o f (empty list when undefined)."""
    if f.codom != g.dom.component:
        return []
    mid = f.codom
    pieces = intersect(image(f), g.dom)
    out = []
    for piece in pieces:
        if mid.is_circle:
            L = mid.length
            y0, y1 = f.bps[0][1], f.bps[-1][1]
            # shift the piece's lift window into f's output range
            k_lo = -((piece.hi - y0) // L)
            candidates = []
            k = k_lo - 1
            while True:
                plo = piece.lo + k * L
                phi = piece.hi + k * L
                if plo > y1:
                    break
                if phi >= y0:
                    wlo = max(y0, plo)
                    whi = min(y1, phi)
                    if wlo < whi:
                        lc = (f.dom.lo_closed if wlo == y0 else True) and \
                             (piece.lo_closed if wlo == plo else True)
                        hc = (f.dom.hi_closed if whi == y1 else True) and \
                             (piece.hi_closed if whi == phi else True)
                        candidates.append((wlo, whi, lc, hc, k))
                k += 1
            # place the piece into g's lift frame: g-frame coord =
            # f-output coord - shift
            gdelta = g.dom.lo + ((piece.lo - g.dom.lo) % L) - piece.lo
            for wlo, whi, lc, hc, k in candidates:
                out.extend(_compose_window(g, f, wlo, whi, lc, hc, k * L - gdelta))
        else:
            wlo = piece.lo
            whi = piece.hi
            lc, hc = piece.lo_closed, piece.hi_closed
            out.extend(_compose_window(g, f, wlo, whi, lc, hc, Q(0)))
    return _merge_adjacent(out)


def _compose_window(g: PLMap, f: PLMap, wlo, whi, lc, hc, shift) -> list[PLMap]:
    """Compose over f-outputs in [wlo, whi]; g is evaluated at y - shift."""
    mid_circle = f.codom.is_circle
    # x-range: preimage under f
    xlo = None if wlo is None else f.inv_lift(wlo)
    xhi = None if whi is None else f.inv_lift(whi)
    if xlo is not None and xhi is not None and xlo >= xhi:
        return []
    dcomp = f.dom.component
    # final openness flags
    flo = lc if wlo is None else _merge_flag(xlo, lc, f.dom.lo, f.dom.lo_closed)
    fhi = hc if whi is None else _merge_flag(xhi, hc, f.dom.hi, f.dom.hi_closed)
    # collect breakpoint x's
    xs = set()
    if xlo is not None:
        xs.add(xlo)
    if xhi is not None:
        xs.add(xhi)
    for x, y in f.bps:
        if (xlo is None or x > xlo) and (xhi is None or x < xhi):
            xs.add(x)
    for gx, gy in g.bps:
        y = gx + shift
        if (wlo is None or y > wlo) and (whi is None or y < whi):
            xs.add(f.inv_lift(y))
    xs = sorted(xs)
    bps = tuple((x, g.eval_lift(f.eval_lift(x) - shift)) for x in xs)
    if dcomp.is_circle:
        newdom = SubInterval(dcomp, xlo, xhi, flo, fhi)
        delta = newdom.lo - xlo
        bps = tuple((x + delta, y) for x, y in bps)
        lo_s = hi_s = None
    else:
        newdom = SubInterval(dcomp, xlo, xhi, flo, fhi)
        lo_s = None
        hi_s = None
        if xlo is None:
            lo_s = f.lo_slope * g.lo_slope if g.lo_slope is not None else None
            if lo_s is None:
                # g bounded below but window unbounded cannot happen
                raise ValueError("inconsistent unbounded composition")
        if xhi is None:
            hi_s = f.hi_slope * g.hi_slope if g.hi_slope is not None else None
            if hi_s is None:
                raise ValueError("inconsistent unbounded composition")
        if not bps:
            x0 = Q(0)
            bps = ((x0, g.eval_lift(f.eval_lift(x0) - shift)),)
    try:
        return [PLMap(newdom, g.codom, bps, lo_s, hi_s)]
    except ValueError:
        return []


def _merge_adjacent(maps: list[PLMap]) -> list[PLMap]:
    if len(maps) < 2:
        return maps
    circle = maps[0].dom.component.is_circle
    if circle:
        return _merge_circle(maps)
    maps = sorted(maps, key=lambda m: (m.dom.lo is None, m.dom.lo or Q(0)))
    out = [maps[0]]
    for m in maps[1:]:
        last = out[-1]
        if (last.dom.hi is not None and m.dom.lo == last.dom.hi
                and (last.dom.hi_closed or m.dom.lo_closed)
                and last.bps[-1][1] == m.bps[0][1]):
            newdom = SubInterval(last.dom.component, last.dom.lo, m.dom.hi,
                                 last.dom.lo_closed, m.dom.hi_closed)
            bps = last.bps + m.bps[1:]
            out[-1] = PLMap(newdom, last.codom, bps, last.lo_slope, m.hi_slope)
        else:
            out.append(m)
    return out


def _merge_circle(maps: list[PLMap]) -> list[PLMap]:
    """Glue composition pieces whose arcs abut on the circle."""
    L = maps[0].dom.component.length
    codom = maps[0].codom
    maps = list(maps)
    merged = True
    while merged and len(maps) > 1:
        merged = False
        for i in range(len(maps)):
            for j in range(len(maps)):
                if i == j:
                    continue
                a, b = maps[i], maps[j]
                if a.dom.is_full_circle or b.dom.is_full_circle:
                    continue
                if (b.dom.lo - a.dom.hi) % L != 0:
                    continue
                if not (a.dom.hi_closed or b.dom.lo_closed):
                    continue
                if a.dom.extent + b.dom.extent > L:
                    continue
                dy = a.bps[-1][1] - b.bps[0][1]
                if codom.is_circle:
                    if dy % codom.length != 0:
                        continue
                elif dy != 0:
                    continue
                dx = a.dom.hi - b.dom.lo
                tail = tuple((x + dx, y + dy) for x, y in b.bps
                             if x + dx > a.bps[-1][0])
                bps = a.bps + tail
                newdom = SubInterval(a.dom.component, a.dom.lo,
                                     a.dom.lo + a.dom.extent + b.dom.extent,
                                     a.dom.lo_closed, b.dom.hi_closed)
                try:
                    m = PLMap(newdom, codom, bps)
                except ValueError:
                    continue
                maps = [maps[t] for t in range(len(maps)) if t not in (i, j)]
                maps.append(m)
                merged = True
                break
            if merged:
                break
    return maps


def compose(g: PLMap, f: PLMap) -> Optional[PLMap]:
    """g o f, or None when the domain is empty.

    Raises DisconnectedComposition when the domain splits into several
    intervals (possible on circles); use compose_all for the pieces.
    """
    pieces = compose_all(g, f)
    if not pieces:
        return None
    if len(pieces) > 1:
        raise DisconnectedComposition(pieces)
    return pieces[0]


# ---------------------------------------------------------------------------
# comparison


def equal_on_overlap(f: PLMap, g: PLMap) -> bool:
    """Do f and g agree on the intersection of their domains?

    Vacuously true when the domains are disjoint (or target different
    components).  Exact: both maps are PL, so agreement at all
    breakpoints of both plus segment midpoints decides equality.
    """
    if f.dom.component != g.dom.component:
        return True
    if f.codom != g.codom:
        return False
    for piece in intersect(f.dom, g.dom):
        if piece.lo is not None and piece.hi is not None and piece.lo == piece.hi:
            if piece.lo_closed and piece.hi_closed:
                p = Point(piece.component, piece.component.normalize(piece.lo))
                if f(p) != g(p):
                    return False
            continue
        try:
            rf = restrict(f, piece)
            rg = restrict(g, piece)
        except DisconnectedComposition:
            return False
        xs = sorted({x for x, _ in rf.bps} | {x for x, _ in rg.bps})
        samples = list(xs)
        for a, b in zip(xs, xs[1:]):
            samples.append((a + b) / 2)
        for x in samples:
            ya = rf.codom.normalize(rf.eval_lift(x))
            yb = rg.codom.normalize(rg.eval_lift(x))
            if ya != yb:
                return False
        if rf.lo_slope != rg.lo_slope or rf.hi_slope != rg.hi_slope:
            return False
        if rf.dom.lo is None or rf.dom.hi is None:
            # unbounded overlap: compare the extension rays at a far sample
            if rf.dom.lo is None:
                x = (xs[0] if xs else Q(0)) - 1
                if rf.eval_lift(x) != rg.eval_lift(x):
                    return False
            if rf.dom.hi is None:
                x = (xs[-1] if xs else Q(0)) + 1
                if rf.eval_lift(x) != rg.eval_lift(x):
                    return False
    return True


# ---------------------------------------------------------------------------
# germs and fixed sets


def germ_at(f: PLMap, p: Point) -> Germ:
    """Germ of f at a point of the closure of its domain.

    At a one-sided point (domain-closure endpoint) the existing side's
    slope is used for both one-sided slopes.
    """
    d = f.dom
    c = d.component
    if c.is_circle:
        x = d.lo + ((p.coord - d.lo) % c.length)
        if x > d.hi:
            if x - c.length >= d.lo:
                x -= c.length
            else:
                raise ValueError(f"{p} not in domain closure")
    else:
        x = p.coord
        if (d.lo is not None and x < d.lo) or (d.hi is not None and x > d.hi):
            raise ValueError(f"{p} not in domain closure")
    target = Point(f.codom, f.codom.normalize(f.eval_lift(x)))
    try:
        right = f.slope_at(x, +1)
    except ValueError:
        right = None
    try:
        left = f.slope_at(x, -1)
    except ValueError:
        left = None
    if left is None and right is None:
        raise ValueError("degenerate germ")
    if left is None:
        left = right
    if right is None:
        right = left
    return Germ(p, target, left, right)


def fixed_set(f: PLMap) -> tuple[list[Point], list[SubInterval]]:
    """Isolated fixed points and maximal fixed sub-intervals of f.

    Requires dom and codom on the same component.
    """
    if f.dom.component != f.codom:
        return [], []
    c = f.codom
    shifts = [Q(0)]
    if c.is_circle:
        L = c.length
        lo_d = f.bps[0][1] - f.bps[-1][0]
        hi_d = f.bps[-1][1] - f.bps[0][0]
        k = -(-lo_d // L)  # ceil
        shifts = []
        while k * L <= hi_d:
            shifts.append(k * L)
            k += 1
    raw_pts: set[Q] = set()
    raw_ivs: list[tuple[Q, Q]] = []
    segs = []
    if f.dom.lo is None:
        segs.append((None, f.bps[0][0], f.lo_slope,
                     f.bps[0][1] - f.lo_slope * f.bps[0][0]))
    for (x0, y0), (x1, y1) in zip(f.bps, f.bps[1:]):
        s = (y1 - y0) / (x1 - x0)
        segs.append((x0, x1, s, y0 - s * x0))
    if f.dom.hi is None:
        segs.append((f.bps[-1][0], None, f.hi_slope,
                     f.bps[-1][1] - f.hi_slope * f.bps[-1][0]))
    for shift in shifts:
        for (a, b, s, t) in segs:
            # solve s*x + t = x + shift on [a, b]
            if s == 1:
                if t == shift:
                    raw_ivs.append((a, b))
            else:
                x = (shift - t) / (s - 1)
                if (a is None or x >= a) and (b is None or x <= b):
                    raw_pts.add(x)
    # merge intervals (None = unbounded end), absorb their endpoints,
    # and drop points they cover
    NEG, POS = Q(-1) * 10 ** 30, Q(10 ** 30)  # ordering sentinels only
    raw_ivs.sort(key=lambda ab: (NEG if ab[0] is None else ab[0]))
    merged: list[list] = []
    for a, b in raw_ivs:
        if merged:
            pa, pb = merged[-1]
            if pb is None or (a is not None and a <= pb):
                if b is None or pb is None:
                    merged[-1][1] = None
                else:
                    merged[-1][1] = max(pb, b)
                continue
        merged.append([a, b])
    pts = []
    for x in sorted(raw_pts):
        if any((a is None or a <= x) and (b is None or x <= b) for a, b in merged):
            continue
        if not c.contains_coord(c.normalize(x)):
            continue
        p = Point(c, c.normalize(x))
        if f.dom.contains(p):
            pts.append(p)
    ivs = []
    for a, b in merged:
        if a is not None and a == b:
            continue
        lc = a is not None
        hc = b is not None
        for piece in intersect(f.dom, SubInterval(c, a, b, lc, hc)):
            if piece.lo is not None and piece.lo == piece.hi:
                continue
            ivs.append(piece)
    # dedupe circle points that reduce to the same spot
    seen = set()
    uniq = []
    for p in pts:
        if p.coord not in seen:
            seen.add(p.coord)
            uniq.append(p)
    return uniq, ivs
