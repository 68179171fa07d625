import math

import pytest
from hypothesis import given, strategies as st

from geocurrents.config import using
from geocurrents.errors import NotHyperbolicError, NumericDegradationError, PreconditionError
from geocurrents.hypgeom import (BoundaryPoint, Isometry, axis, compose, diag, distance,
                                 fixed_points, normalizer, parallelogram_residual, rotation,
                                 translation_length)

G = diag(2.0)
H = Isometry(1.0, 1.0, 1.0, 2.0)


def test_identity_and_diagonal_products():
    ident = Isometry(1.0, 0.0, 0.0, 1.0)
    assert compose(ident, H).close_to(H)
    assert compose(G, G).close_to(Isometry(4.0, 0.0, 0.0, 0.25))


def test_hand_product():
    assert compose(G, H).close_to(Isometry(2.0, 2.0, 0.5, 1.0))


def test_projective_sign_is_canonical():
    m = Isometry(-2.0, -2.0, -0.5, -1.0)
    assert (m.a, m.b, m.c, m.d) == (2.0, 2.0, 0.5, 1.0)


def test_determinant_drift_is_reported():
    with pytest.raises(NumericDegradationError):
        Isometry(1.0, 0.0, 0.0, 1.1)


def test_fixed_points_of_diagonal():
    att, rep = fixed_points(G)
    assert math.isinf(att.value) and rep.value == 0.0


def test_fixed_points_of_symmetric_matrix():
    att, rep = fixed_points(H)
    assert att.value == pytest.approx((-1 + math.sqrt(5)) / 2, abs=1e-12)
    assert rep.value == pytest.approx((-1 - math.sqrt(5)) / 2, abs=1e-12)


def test_parabolic_is_rejected():
    with pytest.raises(NotHyperbolicError):
        fixed_points(Isometry(1.0, 1.0, 0.0, 1.0))
    with pytest.raises(NotHyperbolicError):
        translation_length(Isometry(1.0, 1.0, 0.0, 1.0))


def test_translation_lengths_closed_form():
    assert translation_length(G) == pytest.approx(2 * math.log(2), abs=1e-12)
    assert translation_length(compose(G, H)) == pytest.approx(2 * math.acosh(1.5), abs=1e-12)


def test_parallelogram_identity_on_hand_pair():
    # traces 2.5 and 3: 2.5 * 3 = 3 + 4.5
    assert abs(parallelogram_residual(G, H)) < 1e-12
    assert parallelogram_residual(H, G) == pytest.approx(parallelogram_residual(G, H), abs=1e-12)


def test_parallelogram_needs_crossing_axes():
    # T sends 0 -> 1 and inf -> 2, so the conjugate has axis 1 -> 2, parallel to 0 -> inf
    T = Isometry(2.0, 1.0, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        parallelogram_residual(G, T @ G @ T.inverse())


def test_boundary_point_equality_tolerance():
    p = BoundaryPoint.from_value(1.0)
    assert p == BoundaryPoint.from_value(1.0 + 1e-12)
    assert p != BoundaryPoint.from_value(1.001)
    with using(eps_bdy=1e-2):
        assert p == BoundaryPoint.from_value(1.001)


def test_infinity_sits_at_angle_zero():
    assert BoundaryPoint.from_value(math.inf).angle == 0.0
    assert BoundaryPoint.from_value(0.0).angle == pytest.approx(math.pi)


def test_normalizer_sends_axis_to_imaginary_axis():
    ax = axis(H)
    n = normalizer(ax.repelling, ax.attracting)
    assert abs(n.apply_boundary(ax.repelling).value) < 1e-12
    assert math.isinf(n.apply_boundary(ax.attracting).value) or abs(n.apply_boundary(ax.attracting).value) > 1e12


def test_distance_on_imaginary_axis():
    assert distance(1j, 2j) == pytest.approx(math.log(2), abs=1e-12)


hyperbolic = st.tuples(st.floats(1.2, 4.0), st.floats(-2.0, 2.0), st.floats(0.0, 2 * math.pi)).map(
    lambda t: compose(compose(rotation(t[2]), compose(Isometry(1.0, t[1], 0.0, 1.0), diag(t[0]))),
                      compose(Isometry(1.0, -t[1], 0.0, 1.0), rotation(-t[2]))))
conjugator = st.tuples(st.floats(-2, 2), st.floats(0.5, 2.0), st.floats(0, 2 * math.pi)).map(
    lambda t: compose(Isometry(1.0, t[0], 0.0, 1.0), compose(diag(t[1]), rotation(t[2]))))


@given(hyperbolic, conjugator)
def test_conjugation_moves_fixed_points_and_keeps_length(m, k):
    conj = compose(compose(k, m), k.inverse())
    att, rep = fixed_points(m)
    catt, crep = fixed_points(conj)
    assert k.apply_boundary(att) == catt
    assert k.apply_boundary(rep) == crep
    assert translation_length(conj) == pytest.approx(translation_length(m), abs=1e-9)


@given(hyperbolic, st.integers(1, 20))
def test_length_is_homogeneous_in_powers(m, n):
    assert translation_length(m ** n) == pytest.approx(n * translation_length(m), abs=1e-9)


@given(hyperbolic, hyperbolic)
def test_parallelogram_identity_on_crossing_pairs(g, h):
    from geocurrents.boundary import axes_cross
    from geocurrents.errors import GeoCurrentsError

    try:
        crossing = axes_cross(g, h)
    except GeoCurrentsError:
        return
    if crossing:
        assert abs(parallelogram_residual(g, h)) <= 1e-9 * max(1.0, abs(g.trace * h.trace))
