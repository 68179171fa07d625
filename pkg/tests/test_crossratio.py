import math

import pytest
from hypothesis import given, strategies as st

from geocurrents.crossratio import (check_crossratio_axioms, endpoint_conventions_differ,
                                    hyperbolic_crossratio, multicurve_crossratio, period,
                                    period_functional, registered_crossratios, sample_tuples,
                                    signed_crossratio, zero_crossratio)
from geocurrents.boundary import endpoint_angles
from geocurrents.curves import intersection_number
from geocurrents.errors import PreconditionError
from geocurrents.functionals import hyperbolic_length
from geocurrents.hypgeom import BoundaryPoint
from geocurrents.sgroup import conjugacy_classes, get_presentation


def _verdicts(reports):
    return {r.axiom.split(":")[1]: r.passed for r in reports}


def test_hyperbolic_passes_all_axioms():
    reps = check_crossratio_axioms(hyperbolic_crossratio(), samples=200, tol=1e-9)
    assert all(r.passed for r in reps), [r.to_dict() for r in reps if not r.passed]


def test_signed_fails_positivity_only():
    v = _verdicts(check_crossratio_axioms(signed_crossratio(), samples=100, tol=1e-9))
    assert v == {"flip": True, "additivity": True, "invariance": True, "positivity": False}


def test_zero_passes():
    assert all(r.passed for r in check_crossratio_axioms(zero_crossratio(), samples=50))


def test_closed_form_value():
    cr = hyperbolic_crossratio()
    # [0, 1, 4, inf] is the period of diag(2)
    assert cr(0.0, 1.0, 4.0, math.inf) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_order_is_checked():
    with pytest.raises(PreconditionError):
        hyperbolic_crossratio()(0.0, 4.0, 1.0, math.inf)


def test_period_is_length_on_ball(g2):
    f = hyperbolic_length()
    cr = hyperbolic_crossratio()
    worst = 0.0
    classes = [g for g in conjugacy_classes(4, g2) if not g.is_identity]
    assert len(classes) > 500
    for g in classes:
        worst = max(worst, abs(period(cr, g) - f(g)))
    assert worst < 1e-9


def test_period_powers_and_inverse(g2):
    cr = hyperbolic_crossratio()
    for w in ("a1", "a1 b2", "b1 a2 B1"):
        g = g2.element(w)
        base = period(cr, g)
        assert period(cr, g.inverse()) == pytest.approx(base, abs=1e-9)
        for n in (2, 3, 5):
            assert period(cr, g ** n) == pytest.approx(n * base, abs=1e-9)


@pytest.mark.parametrize("sign", ["+", "-"])
def test_multicurve_period_is_intersection(g2, sign):
    C = g2.element("a1")
    cr = multicurve_crossratio(C, sign)
    for w in ("b1", "a1", "a2", "a1 b1", "a1 a1 b1", "b1 a2 B2"):
        g = g2.element(w)
        assert period(cr, g) == intersection_number(C, g)


def test_endpoint_conventions_split_on_corner_lifts(g2):
    a1 = g2.element("a1")
    r, a = endpoint_angles(a1.iso)
    # the repelling end of the axis of a1 sits exactly on a corner
    on_corner = [tuple(BoundaryPoint.from_angle(t) for t in (r, a - 0.2, a + 0.2, r - 0.2))]
    generic = [tuple(t) for t in sample_tuples(20, seed=2)]
    assert endpoint_conventions_differ(a1, generic) == []
    diff = endpoint_conventions_differ(a1, on_corner)
    assert len(diff) == 1 and diff[0]["plus"] != diff[0]["minus"]


def test_period_functional_registry(g2):
    f = period_functional(hyperbolic_crossratio())
    assert f(g2.element("a1 b1")) == pytest.approx(hyperbolic_length()(g2.element("a1 b1")), abs=1e-9)
    assert set(registered_crossratios()) == {"hyperbolic", "zero"}


@given(st.lists(st.floats(0, 2 * math.pi), min_size=4, max_size=4, unique=True))
def test_flip_symmetry(ts):
    ts = sorted(ts)
    gaps = [ts[1] - ts[0], ts[2] - ts[1], ts[3] - ts[2], ts[0] + 2 * math.pi - ts[3]]
    if min(gaps) < 1e-4:
        return
    cr = hyperbolic_crossratio()
    p = [BoundaryPoint.from_angle(t) for t in ts]
    assert cr(*p) == pytest.approx(cr(p[2], p[3], p[0], p[1]), rel=1e-9, abs=1e-12)
