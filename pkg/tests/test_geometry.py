import pytest
from fractions import Fraction as Q

from plgroup.geometry import (Component, Point, SubInterval, circle, interval,
                              interval_partition, intersect, line, pick, rat,
                              rel_compact_in, sub)


def test_rat_rejects_floats():
    with pytest.raises(TypeError):
        rat(0.5)
    assert rat("3/4") == Q(3, 4)
    assert rat(2) == Q(2)


def test_component_boundary():
    c = interval("a", 0, 1, True, True)
    assert c.boundary_coords() == (Q(0), Q(1))
    o = interval("b", -2, 2, False, False)
    assert o.boundary_coords() == ()
    r = line("r")
    assert r.boundary_coords() == ()
    s = circle("s", 3)
    assert s.boundary_coords() == ()


def test_circle_point_normalization():
    s = circle("s", 3)
    assert Point(s, Q(7, 2)) == Point(s, Q(1, 2))
    assert Point(s, Q(-1)) == Point(s, Q(2))


def test_subinterval_validation():
    c = interval("a", 0, 1, False, False)
    with pytest.raises(ValueError):
        SubInterval(c, Q(0), Q(1), True, False)  # closed at open end
    with pytest.raises(ValueError):
        SubInterval(c, Q(-1), Q(1, 2), False, False)  # leaves component
    with pytest.raises(ValueError):
        SubInterval(c, Q(1, 2), Q(1, 4), False, False)  # empty


def test_circle_arc_anchoring():
    s = circle("s", 4)
    a = SubInterval(s, Q(5), Q(7), True, False)
    assert a.lo == Q(1) and a.hi == Q(3)
    # wrap arc
    b = SubInterval(s, Q(3), Q(5), False, False)
    assert b.lo == Q(3) and b.hi == Q(5)
    assert b.contains(Point(s, Q(0)))
    assert not b.contains(Point(s, Q(2)))
    full = SubInterval(s, Q(1), Q(5), True, False)
    assert full.is_full_circle


def test_intersect_intervals():
    c = line("r")
    a = sub(c, 0, 2, True, False)
    b = sub(c, 1, 3, False, True)
    (p,) = intersect(a, b)
    assert (p.lo, p.hi, p.lo_closed, p.hi_closed) == (Q(1), Q(2), False, False)
    # disjoint
    assert intersect(sub(c, 0, 1, False, False), sub(c, 2, 3, False, False)) == []
    # single shared endpoint, both closed: degenerate point interval
    (q,) = intersect(sub(c, 0, 1, True, True), sub(c, 1, 2, True, True))
    assert q.lo == q.hi == Q(1)
    # single shared endpoint, one open: empty
    assert intersect(sub(c, 0, 1, True, False), sub(c, 1, 2, True, True)) == []


def test_intersect_unbounded():
    c = line("r")
    a = sub(c, None, 1, False, False)
    b = sub(c, -1, None, True, False)
    (p,) = intersect(a, b)
    assert (p.lo, p.hi, p.lo_closed, p.hi_closed) == (Q(-1), Q(1), True, False)


def test_intersect_circle_two_pieces():
    s = circle("s", 4)
    a = SubInterval(s, Q(3), Q(6), False, False)   # (3, 2) through 0
    b = SubInterval(s, Q(1), Q(4), True, True)     # [1, 0] through 3
    got = sorted(intersect(a, b), key=lambda x: x.lo)
    assert len(got) == 2
    assert (got[0].lo, got[0].hi) == (Q(1), Q(2))
    assert (got[1].lo, got[1].hi) == (Q(3), Q(4))


def test_rel_compact():
    c = line("r")
    assert rel_compact_in(sub(c, 0, 1, True, True), sub(c, -1, 2, False, False))
    assert not rel_compact_in(sub(c, 0, 1, False, False), sub(c, 0, 2, False, False))
    # closed component end: no margin needed there
    h = interval("h", 0, None, True, False)
    assert rel_compact_in(sub(h, 0, 1, True, False), sub(h, 0, 2, True, False))
    s = circle("s", 3)
    assert rel_compact_in(SubInterval(s, Q(0), Q(1), False, False),
                          SubInterval(s, Q(0), Q(3), True, False))


def test_interval_partition():
    c = interval("a", 0, 10, True, True)
    cells = interval_partition([Point(c, Q(3)), Point(c, Q(7))], c)
    kinds = [type(x).__name__ for x in cells]
    assert kinds == ["Point", "SubInterval", "Point", "SubInterval", "Point",
                     "SubInterval", "Point"]
    assert cells[0] == Point(c, Q(0))
    assert (cells[1].lo, cells[1].hi) == (Q(0), Q(3))
    o = line("r")
    cells = interval_partition([Point(o, Q(0))], o)
    assert len(cells) == 3
    assert cells[0].lo is None and cells[0].hi == Q(0)
    s = circle("s", 4)
    cells = interval_partition([Point(s, Q(1)), Point(s, Q(3))], s)
    assert len(cells) == 4
    # no cuts on a circle: one full clopen cell
    (full,) = interval_partition([], s)
    assert full.is_full_circle
    # no cuts on the line: the whole component
    (whole,) = interval_partition([], o)
    assert whole.lo is None and whole.hi is None


def test_pick():
    c = line("r")
    assert pick(sub(c, 0, 1, True, False)).coord == Q(0)
    assert pick(sub(c, 0, 1, False, False)).coord == Q(1, 2)
    assert pick(sub(c, 0, None, False, False)).coord == Q(1)
    assert pick(sub(c, None, None, False, False)).coord == Q(0)


def test_lift_coord():
    s = circle("s", 4)
    a = SubInterval(s, Q(3), Q(6), True, False)
    assert a.lift_coord(Point(s, Q(1))) == Q(5)
    assert a.lift_coord(Point(s, Q(3))) == Q(3)
    assert a.lift_coord(Point(s, Q(2))) is None
