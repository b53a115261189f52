import pytest
from fractions import Fraction as Q

from plgroup.geometry import Point, circle, line, sub
from plgroup.plmap import affine, equal_on_overlap, plmap
from plgroup.pseudogroup import (AtlasError, EquivalenceAtlas, Presentation,
                                 Word, certify_membership, check_extendable,
                                 eval_word, isotropy, normalize_generators,
                                 orbit_ball, prime_exponents,
                                 pullback_presentation, restrict_presentation,
                                 slope_rank, validate_atlas,
                                 verify_membership_cert, word, word_map)

R = line("r")


def g2():
    """One generator x -> 2x on the line."""
    return Presentation((R,), {"g": affine(sub(R, None, None), 2, 0)})


def g23():
    return Presentation((R,), {
        "g": affine(sub(R, None, None), 2, 0),
        "h": affine(sub(R, None, None), 3, 0),
    })


def pt(x, c=R):
    return Point(c, Q(x))


def test_eval_word():
    P = g2()
    assert eval_word(P, Word(), pt(5)) == pt(5)
    assert eval_word(P, word("g", "g"), pt(1)) == pt(4)
    assert eval_word(P, word("g", "g-"), pt(1)) == pt(1)
    with pytest.raises(KeyError):
        eval_word(P, word("nope"), pt(1))


def test_eval_word_partial():
    # generator defined only on (0, 1)
    P = Presentation((R,), {"g": affine(sub(R, 0, 1, False, False), 2, 0)})
    assert eval_word(P, word("g"), pt(Q(1, 2))) == pt(1)
    assert eval_word(P, word("g", "g"), pt(Q(1, 2))) is None


def test_orbit_ball_frozen():
    P = g2()
    assert {p.coord for p in orbit_ball(P, pt(1), 2)} == \
        {Q(1, 4), Q(1, 2), Q(1), Q(2), Q(4)}
    assert orbit_ball(P, pt(1), 0) == {pt(1)}
    assert orbit_ball(P, pt(0), 5) == {pt(0)}


def test_orbit_symmetry():
    P = g23()
    ball = orbit_ball(P, pt(1), 3)
    for q in ball:
        assert pt(1) in orbit_ball(P, q, 3)


def test_prime_exponents():
    assert prime_exponents(Q(12)) == {2: 2, 3: 1}
    assert prime_exponents(Q(2, 9)) == {2: 1, 3: -2}
    assert prime_exponents(Q(1)) == {}


def test_slope_rank_frozen():
    assert slope_rank([(Q(2), Q(2)), (Q(3), Q(3))]) == 2
    assert slope_rank([(Q(4), Q(4)), (Q(8), Q(8))]) == 1
    assert slope_rank([]) == 0
    # genuinely two-sided: (2,2) and (2,4) are independent
    assert slope_rank([(Q(2), Q(2)), (Q(2), Q(4))]) == 2


def test_isotropy_frozen():
    rep = isotropy(g23(), pt(0), 1)
    pairs = {(g.left, g.right) for _, g in rep.germs}
    assert (Q(2), Q(2)) in pairs and (Q(3), Q(3)) in pairs
    assert rep.rank == 2
    assert rep.commutative
    P = Presentation((R,), {
        "g": affine(sub(R, None, None), 4, 0),
        "h": affine(sub(R, None, None), 8, 0),
    })
    assert isotropy(P, pt(0), 1).rank == 1
    # trivial presentation
    T = Presentation((R,), {})
    assert isotropy(T, pt(5), 3).rank == 0
    # away from the fixed point: no stabilizing germs
    assert isotropy(g2(), pt(1), 2).rank == 0


def test_check_extendable():
    g = affine(sub(R, 0, 1, False, False), 2, 0)
    good = affine(sub(R, -1, 2, False, False), 2, 0)
    bad = affine(sub(R, -1, 2, False, False), 3, 0)
    P = Presentation((R,), {"g": g}, {"g": good})
    assert check_extendable(P, "g")
    P2 = Presentation((R,), {"g": g}, {"g": g})
    assert not check_extendable(P2, "g")
    P3 = Presentation((R,), {"g": g}, {"g": bad})
    assert not check_extendable(P3, "g")
    with pytest.raises(KeyError):
        check_extendable(Presentation((R,), {"g": g}), "g")


def test_certify_membership_generator():
    P = g2()
    cert = certify_membership(P, P.generators["g"], 3)
    assert cert is not None
    assert verify_membership_cert(P, P.generators["g"], cert)


def test_certify_membership_square():
    P = g2()
    f = affine(sub(R, 0, 1, False, False), 4, 0)
    cert = certify_membership(P, f, 3)
    assert cert is not None
    words = {c[1].letters for c in cert.cells}
    assert (("g", 1), ("g", 1)) in words
    assert verify_membership_cert(P, f, cert)


def test_certify_membership_unknown():
    P = g2()
    f = affine(sub(R, 0, 1, False, False), 3, 0)
    assert certify_membership(P, f, 5) is None


def test_word_map():
    P = g2()
    m = word_map(P, word("g", "g"))
    assert equal_on_overlap(m, affine(sub(R, None, None), 4, 0))


def test_normalize_generators_circle():
    S = circle("s", 4)
    rot = plmap(sub(S, 0, 4, True, True), S, [(0, 1), (4, 5)])
    P = Presentation((S,), {"r": rot}, {"r": rot})
    N = normalize_generators(P)
    assert len(N.generators) == 2
    for name, g in N.generators.items():
        assert not g.dom.is_full_circle
        assert check_extendable(N, name)


def test_restrict_presentation():
    P = g2()
    Pr = restrict_presentation(P, [sub(R, -2, 2, False, False)])
    assert len(Pr.generators) == 1
    (m,) = Pr.generators.values()
    assert (m.dom.lo, m.dom.hi) == (Q(-1), Q(1))
    assert m(Point(m.dom.component, Q(1, 2))).coord == 1
    # disjoint U: no generators
    P2 = Presentation((R,), {"g": affine(sub(R, 0, 1, False, False), 2, 0)})
    Pe = restrict_presentation(P2, [sub(R, 5, 6, False, False)])
    assert Pe.generators == {}


def test_pullback_identity_chart():
    P = g2()
    newc = line("r2")
    chart = affine(sub(newc, None, None), 1, 0, codom=R)
    atlas = EquivalenceAtlas((newc,), (chart,))
    Pp = pullback_presentation(P, atlas)
    assert len(Pp.generators) == 1
    (m,) = Pp.generators.values()
    assert m(Point(newc, Q(3))).coord == 6


def test_pullback_shift_chart():
    P = g2()
    newc = line("r2")
    # chart x -> x - 1: pullback of x -> 2x is x -> 2x + 1... conjugate:
    # chart^-1 . g . chart : x -> 2(x-1) + 1 = 2x - 1
    chart = affine(sub(newc, None, None), 1, -1, codom=R)
    atlas = EquivalenceAtlas((newc,), (chart,))
    Pp = pullback_presentation(P, atlas)
    (m,) = Pp.generators.values()
    assert m(Point(newc, Q(3))).coord == 5
    assert m(Point(newc, Q(1))).coord == 1
    # isotropy rank is preserved through the chart
    assert isotropy(Pp, Point(newc, Q(1)), 2).rank == \
        isotropy(P, pt(0), 2).rank


def test_atlas_validation_failures():
    P = g2()
    newc = line("r2")
    half = affine(sub(newc, 0, None, False, False), 1, 0, codom=R)
    atlas = EquivalenceAtlas((newc,), (half,))
    with pytest.raises(AtlasError):
        validate_atlas(P, atlas)
    # two overlapping charts with no change word
    a = affine(sub(newc, None, 1, False, False), 1, 0, codom=R)
    b = affine(sub(newc, -1, None, False, False), 1, 0, codom=R)
    atlas2 = EquivalenceAtlas((newc,), (a, b))
    with pytest.raises(AtlasError):
        validate_atlas(P, atlas2)
    # with identity change words it validates
    atlas3 = EquivalenceAtlas((newc,), (a, b),
                              {(0, 1): Word(), (1, 0): Word()})
    validate_atlas(P, atlas3)
    Pp = pullback_presentation(P, atlas3)
    assert Pp.generators
