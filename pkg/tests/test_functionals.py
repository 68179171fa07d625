import json
import math

import pytest
from hypothesis import given, strategies as st

from geocurrents.curves import MultiCurve, curve_from_words
from geocurrents.errors import InvalidLaminationError, ParseError, PreconditionError
from geocurrents.functionals import (conjugation_defect, get_functional, graph_length,
                                     halfintegrality_check, hyperbolic_length, intersection_with,
                                     registered_names, systole_estimate, tree_translation_length,
                                     zero_functional)
from geocurrents.sgroup import GeneratingSet, get_presentation

GEN_LENGTH = 2 * math.acosh(1 + math.sqrt(2) / 2)


def test_hyperbolic_length_values(g2, fr):
    f = hyperbolic_length()
    assert f(g2.element("a1")) == pytest.approx(GEN_LENGTH, abs=1e-12)
    assert f(g2.element("a1 b1")) == pytest.approx(2 * math.acosh(1 + math.sqrt(2)), abs=1e-12)
    assert f(fr.element("a")) == pytest.approx(2 * math.log(3), abs=1e-12)
    g = g2.element("a1 b2 A2")
    assert f(g) == pytest.approx(f(g.inverse()), abs=1e-12)


def test_intersection_functional_examples(g2):
    f = intersection_with(g2.element("a1"))
    assert f(g2.element("b1")) == 1
    assert f(g2.element("a1")) == 0
    assert intersection_with(MultiCurve.single(g2.element("a1"), 2.0))(g2.element("b1")) == 2
    assert f.integer_valued and f.symmetric


def test_graph_lengths(g2, fr):
    assert graph_length(GeneratingSet.standard(g2))(g2.element("a1")) == 1
    rogue = GeneratingSet.from_words(fr, ["a", "b", "b b"])
    assert graph_length(rogue)(fr.element("b b b")) == 2
    assert graph_length(rogue, stabilized=True)(fr.element("b b b")) == pytest.approx(1.5, abs=1e-9)
    heavy = GeneratingSet.from_words(fr, ["a", "b"], [2.0, 1.0])
    assert graph_length(heavy)(fr.element("a")) == 2


def test_tree_lengths(g2):
    t = tree_translation_length([(g2.element("a1"), 1.0)])
    assert t(g2.element("b1")) == 1
    assert t(g2.element("a1")) == 0
    both = tree_translation_length([(g2.element("a1"), 1.0), (g2.element("a2"), 1.0)])
    assert both(g2.element("b1 b2")) == 2


def test_tree_rejects_bad_laminations(g2):
    with pytest.raises(InvalidLaminationError):
        tree_translation_length([(g2.element("a1"), 1.0), (g2.element("b1"), 1.0)])
    with pytest.raises(InvalidLaminationError):
        tree_translation_length([(g2.element("a1 b2"), 1.0)])


def test_systoles(g2):
    assert systole_estimate(hyperbolic_length(), 2, g2) == pytest.approx(GEN_LENGTH, abs=1e-12)
    assert systole_estimate(intersection_with(g2.element("a1")), 2, g2) == 0
    assert systole_estimate(zero_functional(), 2, g2) == 0


def test_halfintegrality(g2):
    rep = halfintegrality_check(intersection_with(g2.element("a1")), 3, g2)
    assert rep.passed and rep.values_integral
    bad = halfintegrality_check(hyperbolic_length(), 3, g2)
    assert not bad.passed and bad.witness is not None
    assert abs(bad.witness_value - round(bad.witness_value)) > 1e-6


def test_additive_extension(g2):
    f = hyperbolic_length()
    C1 = curve_from_words(g2, ["a1"])
    C2 = curve_from_words(g2, ["b1 a2"], [0.5])
    assert f(C1.union(C2)) == pytest.approx(f(C1) + f(C2), abs=1e-12)


def test_non_additive_functional_refuses_multicurves(g2):
    from geocurrents.functionals import CurveFunctional

    f = CurveFunctional("odd", lambda g: 1.0, additive=False)
    with pytest.raises(PreconditionError):
        f(curve_from_words(g2, ["a1"]))


def test_registry_lookup(tmp_path, g2):
    assert {"hyperbolic", "zero", "graph", "curve", "tree", "period"} <= set(registered_names())
    path = tmp_path / "c.json"
    path.write_text(json.dumps([{"word": "a1", "weight": 1.0}]))
    f = get_functional(f"curve:{path}", g2)
    assert f(g2.element("b1")) == 1
    t = get_functional(f"tree:{path}", g2)
    assert t(g2.element("b1")) == 1
    p = get_functional("period", g2)
    assert p(g2.element("a1")) == pytest.approx(GEN_LENGTH, abs=1e-9)
    with pytest.raises(ParseError):
        get_functional("nonsense", g2)
    with pytest.raises(ParseError):
        get_functional(f"curve:{tmp_path / 'missing.json'}", g2)


@pytest.mark.parametrize("name", ["hyperbolic", "zero", "period"])
def test_registered_functionals_are_conjugation_invariant(g2, name):
    f = get_functional(name, g2)
    assert conjugation_defect(f, g2, count=100, seed=0) < 1e-9


def test_intersection_functional_is_conjugation_invariant(g2):
    assert conjugation_defect(intersection_with(g2.element("a1")), g2, count=100, seed=0) == 0


@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4]), min_size=1, max_size=5), st.integers(1, 20))
def test_hyperbolic_length_is_homogeneous(w, n):
    pres = get_presentation("genus2")
    g = pres.element(tuple(w))
    if g.is_identity:
        return
    f = hyperbolic_length()
    assert f.raw(g ** n) == pytest.approx(n * f.raw(g), rel=1e-9, abs=1e-9)
