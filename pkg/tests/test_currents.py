import math
import random

import pytest
from hypothesis import given, strategies as st

from geocurrents.curves import GeodesicBox, intersection_number, unoriented_box_count
from geocurrents.currents import (bonahon_residual, box_measure_estimate, estimator_term,
                                  find_lift_chain, find_rh_box, invariance_check, join_side_by_side,
                                  liouville_box_measure, plateau_limit, recover_length,
                                  sidebyside_check, validate_rh_system)
from geocurrents.errors import AmbiguityError, PreconditionError, RHConditionError, SearchExhaustedError
from geocurrents.functionals import hyperbolic_length, intersection_with, zero_functional

DEG = math.pi / 180


@pytest.fixture(scope="module")
def box_sys(g2):
    return find_rh_box(g2.element("a1"), [v * DEG for v in (304, 14, 81, 141.5)], 15 * DEG)


@pytest.fixture(scope="module")
def chain(g2):
    return find_lift_chain(g2.element("a1"), [v * DEG for v in (0, 90, 170, 230, 290)], 20 * DEG)


def test_found_system_is_valid(box_sys):
    assert box_sys.kind == 1
    again = validate_rh_system(box_sys.x, box_sys.p1, box_sys.q1, box_sys.p2, box_sys.q2)
    assert again.box.angles == pytest.approx(box_sys.box.angles, abs=1e-12)


def test_equal_left_lifts_are_rejected(box_sys):
    s = box_sys
    with pytest.raises(RHConditionError) as info:
        validate_rh_system(s.x, s.p1, s.q1, s.p1, s.q2)
    assert info.value.condition == "nontrivial"
    with pytest.raises(RHConditionError) as info:
        validate_rh_system(s.x, s.p1, s.q1, s.x * s.p1, s.q2)
    assert info.value.condition == "nontrivial"


def test_wrong_handedness_is_rejected(box_sys):
    s = box_sys
    # swapping the r-lifts turns every edge to the other side
    with pytest.raises(RHConditionError) as info:
        validate_rh_system(s.x, s.p2, s.q2, s.p1, s.q1)
    assert info.value.condition in ("edges", "diagonals", "corners")


def test_target_validation(g2):
    x = g2.element("a1")
    with pytest.raises(PreconditionError):
        find_rh_box(x, [0.0, 1.0, 2.0], 0.1)
    with pytest.raises(PreconditionError):
        find_rh_box(x, [0.0, 2.0, 1.0, 3.0], 0.1)
    with pytest.raises(PreconditionError):
        find_rh_box(x, [0.0, 0.1, 2.0, 4.0], 0.2)


def test_search_can_be_exhausted(g2):
    with pytest.raises(SearchExhaustedError):
        find_rh_box(g2.element("a1"), [0.0, 0.05, 0.1, 0.15], 0.001, L_max=2)


def test_zero_functional_gives_zero_mass(box_sys):
    est = box_measure_estimate(zero_functional(), box_sys)
    assert est.converged and est.value == 0.0


def test_length_estimate_matches_liouville(box_sys):
    est = box_measure_estimate(hyperbolic_length(), box_sys)
    assert est.converged
    assert est.value == pytest.approx(liouville_box_measure(box_sys.box), abs=1e-6)


@pytest.mark.parametrize("word", ["b1 a2", "a1", "b1", "a1 b1"])
def test_curve_estimate_is_lift_count(box_sys, g2, word):
    C = g2.element(word)
    est = box_measure_estimate(intersection_with(C), box_sys)
    assert est.converged
    assert est.value == unoriented_box_count(C, box_sys.box)


def test_estimator_terms_are_eventually_constant_for_curves(box_sys, g2):
    f = intersection_with(g2.element("b1 a2"))
    terms = [estimator_term(f, box_sys, n) for n in range(8, 14)]
    assert len(set(terms)) == 1


def test_plateau_reports_non_convergence():
    est = plateau_limit(lambda n: (-1) ** n, 10, 1e-6)
    assert not est.converged and est.n_used == 10
    est = plateau_limit(lambda n: 1.0 / 2 ** n, 60, 1e-6)
    assert est.converged


def test_invariance(box_sys, g2):
    assert invariance_check(hyperbolic_length(), box_sys, g2.element("b2 a1")) < 1e-6
    assert invariance_check(intersection_with(g2.element("b1 a2")), box_sys, g2.element("b2")) == 0


def test_side_by_side_additivity(chain, g2):
    assert len(chain) == 2
    union = join_side_by_side(chain[0], chain[1])
    assert union.kind >= 1
    assert sidebyside_check(hyperbolic_length(), chain[0], chain[1]) < 1e-6
    assert sidebyside_check(intersection_with(g2.element("b1")), chain[0], chain[1]) == 0
    for s in chain:
        assert box_measure_estimate(hyperbolic_length(), s).value == pytest.approx(
            liouville_box_measure(s.box), abs=1e-6)


def test_unrelated_boxes_cannot_be_joined(chain, box_sys):
    with pytest.raises(PreconditionError):
        join_side_by_side(chain[0], box_sys)


@pytest.mark.parametrize("word", ["b1", "a1 b1", "b1 a2"])
def test_length_recovery(g2, word):
    y = g2.element(word)
    rec = recover_length(hyperbolic_length(), y)
    assert rec.value == pytest.approx(2 * math.acosh(abs(y.iso.trace) / 2), abs=1e-6)


@pytest.mark.parametrize("word", ["b1", "a2", "a1 a1 b1"])
def test_intersection_recovery_is_exact(g2, word):
    y = g2.element(word)
    rec = recover_length(intersection_with(g2.element("a1")), y)
    assert rec.value == intersection_number(g2.element("a1"), y)


def test_liouville_closed_forms():
    box = GeodesicBox.from_values(0, 1, 2, 3)
    assert liouville_box_measure(box) == pytest.approx(math.log(4 / 3), abs=1e-12)
    assert liouville_box_measure(box.complement()) == pytest.approx(math.log(4), abs=1e-12)
    # geodesics from the negative reals landing in [1, 4): one period of diag(2)
    assert liouville_box_measure(GeodesicBox.from_values(math.inf, 0, 1, 4)) == pytest.approx(
        2 * math.log(2), abs=1e-12)


def test_repeated_corners_are_refused():
    with pytest.raises(AmbiguityError):
        liouville_box_measure(GeodesicBox.from_angles(0.0, 1.0, 2.0, 2.0 + 1e-14))


angles4 = st.lists(st.floats(0, 2 * math.pi, allow_nan=False), min_size=4, max_size=4, unique=True)


@given(angles4)
def test_bonahon_identity(ts):
    ts = sorted(ts)
    gaps = [ts[1] - ts[0], ts[2] - ts[1], ts[3] - ts[2], ts[0] + 2 * math.pi - ts[3]]
    if min(gaps) < 1e-3:
        return
    assert abs(bonahon_residual(GeodesicBox.from_angles(*ts))) < 1e-9


def test_bonahon_on_seeded_boxes():
    rng = random.Random(7)
    for _ in range(50):
        ts = sorted(rng.uniform(0, 2 * math.pi) for _ in range(4))
        assert abs(bonahon_residual(GeodesicBox.from_angles(*ts))) < 1e-6
