"""Exact geometry of oriented one-dimensional manifolds.

Components are oriented intervals (possibly unbounded, with open or
closed ends) and circles of positive rational circumference.  All
coordinates are `fractions.Fraction`; nothing in this package ever
touches floating point.

Circle coordinates are taken mod the circumference and normalised into
[0, length).  A sub-interval of a circle is stored as an anchored arc:
`lo` is the normalised anchor and `hi = lo + extent` in the universal
cover, with 0 < extent <= length (extent == length is the full circle).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

Q = Fraction


def rat(x) -> Q:
    """Coerce ints/strings/Fractions to Fraction (never floats)."""
    if isinstance(x, float):
        raise TypeError("floating point coordinates are not allowed")
    return Q(x)


# ---------------------------------------------------------------------------
# components


@dataclass(frozen=True)
class Component:
    """One oriented connected 1-manifold, named by `cid`.

    kind == "interval": endpoints lo/hi (None means -oo/+oo), with
    closedness flags.  Boundary points exist only at closed finite ends.
    kind == "circle": `length` > 0, both endpoint slots unused.
    """

    cid: str
    kind: str
    lo: Optional[Q] = None
    hi: Optional[Q] = None
    lo_closed: bool = False
    hi_closed: bool = False
    length: Optional[Q] = None

    def __post_init__(self):
        if self.kind == "interval":
            if self.lo is not None and self.hi is not None and self.lo >= self.hi:
                raise ValueError(f"component {self.cid}: empty interval")
            if self.lo is None and self.lo_closed:
                raise ValueError(f"component {self.cid}: -oo cannot be closed")
            if self.hi is None and self.hi_closed:
                raise ValueError(f"component {self.cid}: +oo cannot be closed")
        elif self.kind == "circle":
            if self.length is None or self.length <= 0:
                raise ValueError(f"component {self.cid}: circle needs length > 0")
        else:
            raise ValueError(f"component {self.cid}: unknown kind {self.kind!r}")

    @property
    def is_circle(self) -> bool:
        return self.kind == "circle"

    @property
    def bounded(self) -> bool:
        return self.is_circle or (self.lo is not None and self.hi is not None)

    def normalize(self, x: Q) -> Q:
        """Reduce a coordinate into the fundamental domain (circles only)."""
        if self.is_circle:
            return x % self.length
        return x

    def contains_coord(self, x: Q) -> bool:
        if self.is_circle:
            return True
        if self.lo is not None and (x < self.lo or (x == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (x > self.hi or (x == self.hi and not self.hi_closed)):
            return False
        return True

    def boundary_coords(self) -> tuple[Q, ...]:
        """Coordinates of the manifold boundary (closed finite ends)."""
        if self.is_circle:
            return ()
        out = []
        if self.lo is not None and self.lo_closed:
            out.append(self.lo)
        if self.hi is not None and self.hi_closed:
            out.append(self.hi)
        return tuple(out)


def interval(cid: str, lo, hi, lo_closed: bool = False, hi_closed: bool = False) -> Component:
    return Component(cid, "interval",
                     None if lo is None else rat(lo),
                     None if hi is None else rat(hi),
                     lo_closed, hi_closed)


def line(cid: str) -> Component:
    return Component(cid, "interval", None, None, False, False)


def circle(cid: str, length) -> Component:
    return Component(cid, "circle", length=rat(length))


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True, order=False)
class Point:
    component: Component
    coord: Q

    def __post_init__(self):
        object.__setattr__(self, "coord", self.component.normalize(rat(self.coord)))
        if not self.component.contains_coord(self.coord):
            raise ValueError(f"coordinate {self.coord} outside component {self.component.cid}")

    def __repr__(self):
        return f"Point({self.component.cid}, {self.coord})"


def point(comp: Component, x) -> Point:
    return Point(comp, rat(x))


# ---------------------------------------------------------------------------
# sub-intervals


@dataclass(frozen=True)
class SubInterval:
    """A connected piece of a component.

    Interval component: ordinary (possibly unbounded) sub-interval.
    Circle component: anchored arc, lo in [0, length), lo < hi <= lo+length,
    coordinates of the arc live in the lift window [lo, hi].
    """

    component: Component
    lo: Optional[Q]
    hi: Optional[Q]
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        c = self.component
        if c.is_circle:
            if self.lo is None or self.hi is None:
                raise ValueError("circle arcs need finite anchor/extent")
            lo = rat(self.lo) % c.length
            extent = rat(self.hi) - rat(self.lo)
            if extent <= 0 or extent > c.length:
                raise ValueError("circle arc extent must lie in (0, length]")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", lo + extent)
            if extent == c.length:
                # the full circle is clopen; normalise flags
                object.__setattr__(self, "lo_closed", True)
                object.__setattr__(self, "hi_closed", True)
        else:
            lo = None if self.lo is None else rat(self.lo)
            hi = None if self.hi is None else rat(self.hi)
            if lo is not None and hi is not None:
                if lo > hi or (lo == hi and not (self.lo_closed and self.hi_closed)):
                    raise ValueError("empty sub-interval")
            if lo is None and self.lo_closed:
                raise ValueError("-oo cannot be closed")
            if hi is None and self.hi_closed:
                raise ValueError("+oo cannot be closed")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
            # clip openness to what the component itself allows
            if lo is not None and self.component.lo == lo and self.lo_closed and not self.component.lo_closed:
                raise ValueError("sub-interval closed at an open component end")
            if hi is not None and self.component.hi == hi and self.hi_closed and not self.component.hi_closed:
                raise ValueError("sub-interval closed at an open component end")
            if lo is not None and self.component.lo is not None and lo < self.component.lo:
                raise ValueError("sub-interval leaves component")
            if hi is not None and self.component.hi is not None and hi > self.component.hi:
                raise ValueError("sub-interval leaves component")

    # -- basic queries ------------------------------------------------------

    @property
    def is_full_circle(self) -> bool:
        c = self.component
        return c.is_circle and (self.hi - self.lo) == c.length

    @property
    def extent(self) -> Optional[Q]:
        if self.lo is None or self.hi is None:
            return None
        return self.hi - self.lo

    def lift_coord(self, p: Point) -> Optional[Q]:
        """Place a point of the component into this arc's lift window.

        Returns the lifted coordinate, or None when the point is not in
        the sub-interval.  For interval components this is the plain
        coordinate (after a membership check).
        """
        c = self.component
        if p.component != c:
            return None
        if not c.is_circle:
            return p.coord if self._contains_plain(p.coord) else None
        x = p.coord % c.length
        # shift into [lo, lo+length)
        x = self.lo + ((x - self.lo) % c.length)
        if x < self.lo or x > self.hi:
            return None
        if x == self.lo and not self.lo_closed and not self.is_full_circle:
            # anchor excluded; but the same point may reappear at the top
            if self.lo + c.length <= self.hi:
                return self.lo + c.length
            return None
        if x == self.hi and not self.hi_closed and not self.is_full_circle:
            return None
        return x

    def _contains_plain(self, x: Q) -> bool:
        if self.lo is not None and (x < self.lo or (x == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (x > self.hi or (x == self.hi and not self.hi_closed)):
            return False
        return True

    def contains(self, p: Point) -> bool:
        if self.is_full_circle:
            return p.component == self.component
        return self.lift_coord(p) is not None

    def closure_bounds(self) -> tuple[Optional[Q], Optional[Q]]:
        return self.lo, self.hi

    def compact_closure(self) -> bool:
        """Is the closure of this set inside its component compact?"""
        if self.component.is_circle:
            return True
        if self.lo is None or self.hi is None:
            return False
        return True

    def closure_contained_in(self, other: "SubInterval") -> bool:
        """closure(self) subset of other (both in the same component)."""
        if self.component != other.component:
            return False
        c = self.component
        if c.is_circle:
            if other.is_full_circle:
                return True
            if self.is_full_circle:
                return False
            # closed arc [self.lo, self.hi] inside other's arc
            a = other.lo + ((self.lo - other.lo) % c.length)
            b = a + (self.hi - self.lo)
            if a < other.lo or b > other.hi:
                return False
            if a == other.lo and not other.lo_closed:
                return False
            if b == other.hi and not other.hi_closed:
                return False
            return True
        # interval component: closure may be cut short by the component ends
        lo, hi = self.lo, self.hi
        if lo is not None and c.lo == lo and not c.lo_closed:
            pass  # closure inside the manifold stays open at a missing end
        if lo is None:
            ok_lo = other.lo is None
        else:
            lo_in_manifold = c.contains_coord(lo)
            if not lo_in_manifold:
                ok_lo = other.lo is None or other.lo <= lo
                if other.lo == lo and not other.lo_closed:
                    ok_lo = True  # the point lo is not in the manifold at all
            else:
                ok_lo = other.lo is None or other.lo < lo or (other.lo == lo and other.lo_closed)
        if hi is None:
            ok_hi = other.hi is None
        else:
            hi_in_manifold = c.contains_coord(hi)
            if not hi_in_manifold:
                ok_hi = other.hi is None or other.hi >= hi
                if other.hi == hi and not other.hi_closed:
                    ok_hi = True
            else:
                ok_hi = other.hi is None or other.hi > hi or (other.hi == hi and other.hi_closed)
        return ok_lo and ok_hi

    def __repr__(self):
        l = "[" if self.lo_closed else "("
        r = "]" if self.hi_closed else ")"
        return f"Sub({self.component.cid}, {l}{self.lo}, {self.hi}{r})"


def sub(comp: Component, lo, hi, lo_closed: bool = False, hi_closed: bool = False) -> SubInterval:
    return SubInterval(comp,
                       None if lo is None else rat(lo),
                       None if hi is None else rat(hi),
                       lo_closed, hi_closed)


def full(comp: Component) -> SubInterval:
    """The whole component as a SubInterval."""
    if comp.is_circle:
        return SubInterval(comp, Q(0), comp.length, True, True)
    return SubInterval(comp, comp.lo, comp.hi, comp.lo_closed, comp.hi_closed)


def contains(s: SubInterval, p: Point) -> bool:
    return s.contains(p)


def rel_compact_in(a: SubInterval, b: SubInterval) -> bool:
    """closure(a) compact (inside the component) and contained in b."""
    if not a.compact_closure():
        return False
    return a.closure_contained_in(b)


# ---------------------------------------------------------------------------
# intersections / unions on one component


def intersect(a: SubInterval, b: SubInterval) -> list[SubInterval]:
    """Intersection of two sub-intervals of the same component.

    Returns a list (a circle intersection can have two arcs).
    """
    if a.component != b.component:
        return []
    c = a.component
    if not c.is_circle:
        if b.lo is None:
            lo, lc = a.lo, a.lo_closed
        elif a.lo is None or b.lo > a.lo:
            lo, lc = b.lo, b.lo_closed
        elif b.lo < a.lo:
            lo, lc = a.lo, a.lo_closed
        else:
            lo, lc = a.lo, a.lo_closed and b.lo_closed
        if b.hi is None:
            hi, hc = a.hi, a.hi_closed
        elif a.hi is None or b.hi < a.hi:
            hi, hc = b.hi, b.hi_closed
        elif b.hi > a.hi:
            hi, hc = a.hi, a.hi_closed
        else:
            hi, hc = a.hi, a.hi_closed and b.hi_closed
        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and not (lc and hc)):
                return []
        try:
            return [SubInterval(c, lo, hi, lc, hc)]
        except ValueError:
            return []
    # circle: intersect lift windows of a with b shifted by multiples of L
    if a.is_full_circle:
        return [b]
    if b.is_full_circle:
        return [a]
    L = c.length
    out = []
    base = b.lo + ((a.lo - b.lo) // L) * L - L  # lowest copy of b near a's window
    for k in (0, 1, 2, 3):
        blo = base + k * L
        bhi = blo + (b.hi - b.lo)
        lo = max(a.lo, blo)
        hi = min(a.hi, bhi)
        if lo > hi:
            continue
        lc = (a.lo_closed if lo == a.lo else True) and (b.lo_closed if lo == blo else True)
        hc = (a.hi_closed if hi == a.hi else True) and (b.hi_closed if hi == bhi else True)
        if lo == hi and not (lc and hc):
            continue
        if lo == hi:
            # a single shared point; represent as a degenerate closed arc is
            # not allowed, so callers treat points separately.  Skip: point
            # overlaps never matter for open-map domains.
            continue
        out.append(SubInterval(c, lo, hi, lc, hc))
    # dedupe arcs that are the same set mod L
    uniq = []
    seen = set()
    for s in out:
        key = (s.lo % L, (s.hi - s.lo), s.lo_closed, s.hi_closed)
        if key not in seen:
            seen.add(key)
            uniq.append(s)
    return uniq


# ---------------------------------------------------------------------------
# cells

Cell = Union[Point, SubInterval]


def interval_partition(cuts: Iterable[Point], comp: Component) -> list[Cell]:
    """Order the given cut points of `comp` and return the cell decomposition.

    Cells alternate between cut points (Point cells) and the open
    intervals between them.  Closed component endpoints appear as their
    own Point cells; unbounded ends give unbounded open cells.  On a
    circle with no cuts the single cell is the full circle.
    """
    xs = sorted({p.coord for p in cuts if p.component == comp})
    cells: list[Cell] = []
    if comp.is_circle:
        if not xs:
            return [full(comp)]
        L = comp.length
        for i, x in enumerate(xs):
            cells.append(Point(comp, x))
            nxt = xs[(i + 1) % len(xs)] + (L if i + 1 == len(xs) else 0)
            if nxt > x:
                cells.append(SubInterval(comp, x, nxt, False, False))
        return cells
    # interval component
    lo, hi = comp.lo, comp.hi
    marks: list[Q] = []
    if lo is not None and comp.lo_closed and (not xs or xs[0] != lo):
        marks.append(lo)
    marks.extend(xs)
    if hi is not None and comp.hi_closed and (not marks or marks[-1] != hi):
        marks.append(hi)
    marks = sorted(set(marks))
    if not marks:
        return [full(comp)]
    first = marks[0]
    if lo is None or first > lo:
        cells.append(SubInterval(comp, lo, first, False, False))
    for i, x in enumerate(marks):
        cells.append(Point(comp, x))
        if i + 1 < len(marks):
            if marks[i + 1] > x:
                cells.append(SubInterval(comp, x, marks[i + 1], False, False))
    last = marks[-1]
    if hi is None or last < hi:
        cells.append(SubInterval(comp, last, hi, False, False))
    return cells


def cell_contains(cell: Cell, p: Point) -> bool:
    if isinstance(cell, Point):
        return cell == p
    return cell.contains(p)


def pick(s: SubInterval) -> Point:
    """A canonical rational point in the (nonempty) sub-interval."""
    c = s.component
    if c.is_circle:
        x = s.lo + (s.hi - s.lo) / 2 if not s.lo_closed else s.lo
        return Point(c, x)
    if s.lo is not None and s.lo_closed:
        return Point(c, s.lo)
    if s.hi is not None and s.hi_closed:
        return Point(c, s.hi)
    if s.lo is not None and s.hi is not None:
        return Point(c, (s.lo + s.hi) / 2)
    if s.lo is not None:
        return Point(c, s.lo + 1)
    if s.hi is not None:
        return Point(c, s.hi - 1)
    return Point(c, Q(0))
