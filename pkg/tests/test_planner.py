from dataclasses import replace
from fractions import Fraction as Q

import pytest

from plgroup.analysis import Taut, check_taut, extract_hinge, novikov_split, \
    verify_hinge
from plgroup.geometry import circle, full, interval, line, point, sub
from plgroup.plmap import affine, plmap
from plgroup.pseudogroup import Presentation
from plgroup.planner import (Genus, GluingRecord, Half1, HingeBlock3,
                             HingeBlock4, Index1, Index2, RealizationPlan,
                             SphereBundle, homothety_library, homothety_rank,
                             plan_general, plan_hinge, plan_taut, verify_plan)


def circle_trivial():
    C = circle("C", 1)
    return C, Presentation((C,), {})


def circle_with_shift():
    C = circle("C", 4)
    g = plmap(sub(C, 1, 2), C, ((1, 2), (2, 3)))
    w = plmap(sub(C, Q(1, 2), Q(5, 2)), C,
              ((Q(1, 2), Q(3, 2)), (Q(5, 2), Q(7, 2))))
    return C, Presentation((C,), {"g": g}, {"g": w})


def unit_trivial():
    T = interval("T", 0, 1, True, True)
    return T, Presentation((T,), {})


# ---------------------------------------------------------------------------
# taut plans


def test_plan_trivial_circle():
    _, P = circle_trivial()
    v = check_taut(P, 4)
    assert isinstance(v, Taut)
    plan = plan_taut(P, v, 4)
    assert plan.unknown is None
    assert len(plan.pieces) == 1 and isinstance(plan.pieces[0], SphereBundle)
    assert plan.surgeries == ()
    assert plan.dimension == 3 and plan.closed
    assert verify_plan(plan, P)["ok"]


def test_plan_circle_generator_pairs_surgeries():
    _, P = circle_with_shift()
    v = check_taut(P, 5)
    assert isinstance(v, Taut)
    plan = plan_taut(P, v, 5)
    assert plan.unknown is None
    i1 = [s for s in plan.surgeries if isinstance(s, Index1)]
    i2 = [s for s in plan.surgeries if isinstance(s, Index2)]
    assert len(i1) == 1 and len(i2) == 1
    assert i1[0].generator == "g" and i2[0].pairs == "g"
    assert i1[0].dom == (1, 2) and i1[0].im == (2, 3)
    rep = verify_plan(plan, P)
    assert rep["ok"], rep["violations"]


def test_plan_trivial_interval():
    T, P = unit_trivial()
    v = check_taut(P, 4)
    plan = plan_taut(P, v, 4)
    assert len(plan.pieces) == 1
    assert plan.pieces[0].base == T
    assert plan.surgeries == ()
    assert verify_plan(plan, P)["ok"]


def test_verify_catches_dropped_index2():
    _, P = circle_with_shift()
    plan = plan_taut(P, check_taut(P, 5), 5)
    mutated = replace(plan, surgeries=tuple(
        s for s in plan.surgeries if not isinstance(s, Index2)))
    rep = verify_plan(mutated, P)
    assert not rep["ok"]
    assert any(v.startswith("(a)") for v in rep["violations"])


def test_verify_catches_bad_inventory():
    _, P = circle_with_shift()
    plan = plan_taut(P, check_taut(P, 5), 5)
    mutated = replace(plan, surgeries=tuple(
        s for s in plan.surgeries if not isinstance(s, Index1)))
    rep = verify_plan(mutated, P)
    assert any(v.startswith("(g)") for v in rep["violations"])


# ---------------------------------------------------------------------------
# hinge plans


def g2_wide():
    T = interval("T", -2, 2, False, False)
    g = plmap(sub(T, -1, 1), T, ((-1, -2), (1, 2)))
    return T, Presentation((T,), {"g": g})


def g23_wide():
    T = interval("T", -2, 2, False, False)
    g = plmap(sub(T, -1, 1), T, ((-1, -2), (1, 2)))
    h = plmap(sub(T, Q(-2, 3), Q(2, 3)), T, ((Q(-2, 3), -2), (Q(2, 3), 2)))
    return T, Presentation((T,), {"g": g, "h": h})


def test_plan_hinge_rank_one():
    T, P = g2_wide()
    h, _ = extract_hinge(P, point(T, 0), 4)
    rep = verify_hinge(h, P, 4)
    piece = plan_hinge(h, rep)
    assert isinstance(piece, HingeBlock3)
    assert piece.transverse_boundary_count == 2


def test_plan_hinge_rank_two():
    T, P = g23_wide()
    h, _ = extract_hinge(P, point(T, 0), 4)
    assert h.rank == 2
    piece = plan_hinge(h, verify_hinge(h, P, 4))
    assert isinstance(piece, HingeBlock3)
    assert piece.transverse_boundary_count == 2


def test_plan_hinge_rank_three_goes_4d():
    T = line("T")
    P = Presentation((T,), {"g": affine(sub(T, -1, 1), 2, 0),
                            "h": affine(sub(T, -1, 1), 3, 0),
                            "k": affine(sub(T, -1, 1), 5, 0)})
    h, _ = extract_hinge(P, point(T, 0), 4)
    assert h.rank == 3
    piece = plan_hinge(h)
    assert isinstance(piece, HingeBlock4)
    assert len(piece.gluing_graph) == 1  # r - 2 pairings


def test_plan_hinge_refuses_unverified():
    from plgroup.analysis import Hinge, HingeReport
    T = line("T")
    h = Hinge(sub(T, -1, 1), (0, 0), (), (), 1)
    bad = HingeReport(True, False, True, None, "see flags")
    with pytest.raises(ValueError):
        plan_hinge(h, bad)


# ---------------------------------------------------------------------------
# general plans


def test_plan_general_doubling():
    T, P = g2_wide()
    s = novikov_split(P, 6)
    assert s is not None
    plan = plan_general(P, s, 6)
    assert plan.unknown is None, plan.unknown
    assert plan.dimension == 3
    assert not plan.closed  # hinge block has transverse boundary
    assert any(isinstance(p, HingeBlock3) for p in plan.pieces)
    assert len(plan.side_data) == 2
    for sd in plan.side_data:
        assert all(sd.checks.values())
    assert len(plan.gluings) == 2
    rep = verify_plan(plan, P)
    assert rep["ok"], rep["violations"]


def test_plan_general_two_slopes_open_vs_closed():
    T, P = g23_wide()
    s = novikov_split(P, 6)
    assert s is not None
    plan = plan_general(P, s, 6, want_closed=False)
    assert plan.unknown is None
    assert plan.dimension == 3 and not plan.closed
    assert verify_plan(plan, P)["ok"]
    lifted = plan_general(P, s, 6, want_closed=True)
    assert lifted.dimension == 4 and lifted.closed


def test_verify_flags_closed_3d_with_transverse_boundary():
    T, P = g2_wide()
    s = novikov_split(P, 6)
    plan = plan_general(P, s, 6)
    mutated = replace(plan, closed=True)
    rep = verify_plan(mutated, P)
    assert any(v.startswith("(f)") for v in rep["violations"])


# ---------------------------------------------------------------------------
# homothety library


def test_homothety_basic():
    P = homothety_library([2])
    assert set(P.generators) == {"g1"}
    g = P.generators["g1"]
    assert g.eval_lift(Q(1, 2)) == 1
    assert "g1" in P.extensions
    assert homothety_rank([2]) == 1


def test_homothety_independent_pair():
    import warnings as W
    with W.catch_warnings():
        W.simplefilter("error")
        P = homothety_library([2, 3])  # no warning expected
    assert homothety_rank([2, 3]) == 2


def test_homothety_dependent_warns():
    with pytest.warns(UserWarning):
        homothety_library([4, 8])
    assert homothety_rank([4, 8]) == 1


def test_homothety_half_line():
    P = homothety_library([2], half=True)
    T = P.transversal[0]
    assert T.lo == 0 and T.lo_closed and T.hi is None
    g = P.generators["g1"]
    assert g.dom.lo == 0 and g.dom.lo_closed


def test_homothety_rejects_nonpositive():
    with pytest.raises(ValueError):
        homothety_library([2, 0])
    with pytest.raises(ValueError):
        homothety_library([])
