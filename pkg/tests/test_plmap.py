import pytest
from fractions import Fraction as Q

from plgroup.geometry import Point, circle, line, sub
from plgroup.plmap import (DisconnectedComposition, affine, compose,
                           compose_all, equal_on_overlap, fixed_set, germ_at,
                           identity_on, image, invert, plmap, restrict)

R = line("r")


def pt(x, c=R):
    return Point(c, Q(x))


def test_evaluate_frozen():
    # breakpoints (0,0), (1,2), (3,3): slope 2 then 1/2
    f = plmap(sub(R, 0, 3, True, True), R, [(0, 0), (1, 2), (3, 3)])
    assert f(pt(Q(1, 2))).coord == Q(1)
    assert f(pt(2)).coord == Q(5, 2)
    assert f(pt(3)).coord == Q(3)
    with pytest.raises(ValueError):
        f(pt(4))


def test_affine_and_unbounded():
    h = affine(sub(R, None, None), 2, 1)  # x -> 2x + 1 on the whole line
    assert h(pt(-5)).coord == -9
    assert h(pt("1/3")).coord == Q(5, 3)
    g = invert(h)
    assert g(pt(-9)).coord == -5
    assert g(pt(1)).coord == 0


def test_image_and_invert():
    f = plmap(sub(R, 0, 3, True, False), R, [(0, 0), (1, 2), (3, 3)])
    im = image(f)
    assert (im.lo, im.hi, im.lo_closed, im.hi_closed) == (Q(0), Q(3), True, False)
    g = invert(f)
    assert g.bps == ((Q(0), Q(0)), (Q(2), Q(1)), (Q(3), Q(3)))
    assert g(pt(Q(5, 2))).coord == 2


def test_germ_frozen():
    f = plmap(sub(R, 0, 3, True, True), R, [(0, 0), (1, 2), (3, 3)])
    g = germ_at(f, pt(1))
    assert g.target.coord == 2
    assert (g.left, g.right) == (Q(2), Q(1, 2))
    # one-sided at the domain-closure bottom
    g0 = germ_at(f, pt(0))
    assert (g0.left, g0.right) == (Q(2), Q(2))


def test_compose_interval():
    f = affine(sub(R, 0, 1, False, False), 2, 0)    # (0,1) -> (0,2)
    g = affine(sub(R, 1, 3, True, False), 1, 5)     # [1,3) -> [6,8)
    h = compose(g, f)
    assert (h.dom.lo, h.dom.hi, h.dom.lo_closed, h.dom.hi_closed) == \
        (Q(1, 2), Q(1), True, False)
    assert h(pt(Q(3, 4))).coord == Q(13, 2)
    # empty composition
    k = affine(sub(R, 10, 11, False, False), 1, 0)
    assert compose(k, f) is None


def test_compose_breakpoint_pullback():
    f = affine(sub(R, 0, 4, True, True), Q(1, 2), 0)  # [0,4] -> [0,2]
    g = plmap(sub(R, 0, 2, True, True), R, [(0, 0), (1, 3), (2, 4)])
    h = compose(g, f)
    xs = [x for x, _ in h.bps]
    assert xs == [Q(0), Q(2), Q(4)]           # g's kink at 1 pulls back to 2
    assert h(pt(1)).coord == Q(3, 2)


def test_compose_unbounded():
    a = affine(sub(R, None, None), 2, 0)
    b = affine(sub(R, None, None), 3, 1)
    h = compose(b, a)
    assert h(pt(5)).coord == 31
    assert h.lo_slope == 6 and h.hi_slope == 6


def test_identity_fixed_set():
    i = identity_on(sub(R, 0, 1, False, False))
    pts, ivs = fixed_set(i)
    assert pts == []
    assert len(ivs) == 1 and (ivs[0].lo, ivs[0].hi) == (Q(0), Q(1))
    # identity on the whole line: one unbounded fixed interval
    pts, ivs = fixed_set(affine(sub(R, None, None), 1, 0))
    assert pts == [] and len(ivs) == 1 and ivs[0].lo is None and ivs[0].hi is None


def test_fixed_points():
    # x -> 2x fixes 0
    pts, ivs = fixed_set(affine(sub(R, None, None), 2, 0))
    assert [p.coord for p in pts] == [0] and ivs == []
    # map with a fixed plateau: (0,0),(1,1) identity then slope 2
    f = plmap(sub(R, 0, 2, True, True), R, [(0, 0), (1, 1), (2, 3)])
    pts, ivs = fixed_set(f)
    assert pts == []
    assert len(ivs) == 1 and (ivs[0].lo, ivs[0].hi) == (Q(0), Q(1))


def test_restrict():
    f = plmap(sub(R, 0, 3, True, True), R, [(0, 0), (1, 2), (3, 3)])
    r = restrict(f, sub(R, Q(1, 2), 2, False, True))
    assert (r.dom.lo, r.dom.hi) == (Q(1, 2), Q(2))
    assert r.bps == ((Q(1, 2), Q(1)), (Q(1), Q(2)), (Q(2), Q(5, 2)))
    with pytest.raises(ValueError):
        restrict(f, sub(R, 5, 6, False, False))


def test_equal_on_overlap():
    f = affine(sub(R, 0, 2, False, False), 2, 0)
    g = affine(sub(R, 1, 3, False, False), 2, 0)
    assert equal_on_overlap(f, g)
    h = affine(sub(R, 1, 3, False, False), 2, Q(1, 100))
    assert not equal_on_overlap(f, h)
    # disjoint domains: vacuous
    k = affine(sub(R, 10, 12, False, False), 7, 0)
    assert equal_on_overlap(f, k)


# -- circles ----------------------------------------------------------------

S = circle("s", 4)


def test_circle_rotation():
    rot = plmap(sub(S, 0, 4, True, True), S, [(0, 1), (4, 5)])
    assert rot(Point(S, Q(3))).coord == 0
    r2 = compose(rot, rot)
    assert r2(Point(S, Q(3))).coord == 1
    pts, ivs = fixed_set(rot)
    assert pts == [] and ivs == []
    r4 = compose(r2, r2)
    pts, ivs = fixed_set(r4)
    assert len(ivs) == 1 and ivs[0].is_full_circle


def test_circle_arc_map():
    # arc (3, 6) = through zero, pushed forward by +2
    f = plmap(sub(S, 3, 6, False, False), S, [(3, 5), (6, 8)])
    assert f(Point(S, Q(1))).coord == 3
    assert image(f).lo == Q(1) and image(f).hi == Q(4)
    g = invert(f)
    assert g(Point(S, Q(3))).coord == 1


def test_circle_disconnected_composition():
    # f maps a long arc onto most of the circle; g lives on an arc whose
    # preimage under f is cut by f's domain ends
    f = plmap(sub(S, 1, 4, False, False), S, [(1, 1), (4, 4)])  # identity on (1,4)
    g = plmap(sub(S, 3, 6, False, False), S, [(3, 3), (6, 6)])  # identity on (3,2)
    with pytest.raises(DisconnectedComposition):
        compose(g, f)
    pieces = compose_all(g, f)
    assert len(pieces) == 2


def test_circle_fixed_point():
    # expand the arc (1,3) about 2: x -> 2x - 2 on lift
    f = plmap(sub(S, 1, 3, False, False), S, [(1, 0), (3, 4)])
    pts, ivs = fixed_set(f)
    assert [p.coord for p in pts] == [2] and ivs == []
