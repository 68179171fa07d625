import json
import math

import pytest

from geocurrents.axioms import (ALL_SUITES, additivity_limit_sequence, check_hyperbolic,
                                check_lamination, check_parry, check_positivity,
                                check_power_smoothing, check_smoothing, check_stability,
                                check_symmetry, check_tree_dual, classified_pairs, run_suites,
                                sample_classes, sample_pairs)
from geocurrents.errors import PreconditionError
from geocurrents.functionals import (graph_length, hyperbolic_length, intersection_with,
                                     tree_translation_length, zero_functional)
from geocurrents.sgroup import GeneratingSet


@pytest.fixture(scope="module")
def pairs(g2):
    return sample_pairs(g2, 3, 150, seed=4)


@pytest.fixture(scope="module")
def classes(g2):
    return sample_classes(g2, 3, 30, seed=4)


def _by_name(reports):
    return {r.axiom: r for r in reports}


def test_sample_is_seeded(g2):
    s1, s2 = sample_pairs(g2, 3, 40, seed=9), sample_pairs(g2, 3, 40, seed=9)
    assert [(g.word, h.word) for g, h, _ in s1] == [(g.word, h.word) for g, h, _ in s2]
    assert len(s1) == 40


def test_hyperbolic_length_smooths(pairs):
    reps = check_smoothing(hyperbolic_length(), pairs)
    assert len(reps) == 4
    assert all(r.passed for r in reps), [r.to_dict() for r in reps if not r.passed]
    assert sum(r.sample_size for r in reps) == 2 * len(pairs)


def test_negated_length_fails_disconnected_smoothing(pairs):
    f = hyperbolic_length().scaled(-1.0)
    reps = _by_name(check_smoothing(f, pairs))
    bad = reps["smoothing:oriented-disconnected"]
    assert not bad.passed and bad.worst_margin < 0
    assert bad.witness is not None and {"a", "b", "class"} <= set(bad.witness)
    assert bad.witness["class"] in ("RCross", "LCross")


def test_failing_margin_is_reproducible(pairs, g2):
    f = hyperbolic_length().scaled(-1.0)
    bad = _by_name(check_smoothing(f, pairs))["smoothing:oriented-disconnected"]
    w = bad.witness
    a, b = g2.element(w["a"]), g2.element(w["b"])
    assert f(a) + f(b) - f(a * b) == pytest.approx(bad.worst_margin, abs=1e-12)


def test_stability_and_power_smoothing(classes):
    f = hyperbolic_length()
    assert check_stability(f, classes, N=6, tol=1e-9).passed
    ps = check_power_smoothing(f, classes)
    assert ps.passed and abs(ps.worst_margin) < 1e-9
    assert check_power_smoothing(zero_functional(), classes).passed
    assert check_stability(intersection_with(classes[0].pres.element("a1")), classes).passed


def test_word_length_over_redundant_generators(fr):
    rogue = GeneratingSet.from_words(fr, ["a", "b", "b b"])
    f = graph_length(rogue)
    b = fr.element("b")
    assert f(b) == 1 and f(b ** 2) == 1
    assert not check_stability(f, [b]).passed
    # the smallest power already fails
    st = check_stability(f, [b], N=2)
    assert not st.passed
    assert st.witness["g"] == "b" and st.witness["n"] == 2 and st.witness["f_gn"] == 1
    ps = check_power_smoothing(f, [b])
    assert not ps.passed
    assert (ps.witness["n"], ps.witness["m"]) == (1, 1)


def test_alternating_limit_sequence(fr):
    rogue = GeneratingSet.from_words(fr, ["a", "b", "b b"])
    seq = additivity_limit_sequence(graph_length(rogue), fr.element("a b"), fr.element("b"), N=20)
    assert seq.values[:6] == [2, 1, 2, 1, 2, 1]
    assert all(v == (2 if n % 2 == 0 else 1) for n, v in enumerate(seq.values))
    assert not seq.converged


def test_limit_sequence_converges_for_length(g2):
    a, x = g2.element("a1"), g2.element("b1")
    seq = additivity_limit_sequence(hyperbolic_length(), a, x, N=20)
    assert seq.converged
    zero = additivity_limit_sequence(zero_functional(), a, x, N=5)
    assert zero.values == [0.0] * 6 and zero.converged


def test_limit_sequence_precondition(g2):
    with pytest.raises(PreconditionError):
        additivity_limit_sequence(hyperbolic_length(), g2.element("b1"), g2.element("a1"))


def test_lamination_suite(pairs, g2):
    assert check_lamination(intersection_with(g2.element("a1")), pairs).passed
    assert check_lamination(zero_functional(), pairs).passed
    bad = check_lamination(hyperbolic_length(), pairs)
    assert not bad.passed and bad.witness is not None


def test_trace_identity_suite(pairs):
    assert check_hyperbolic(hyperbolic_length(), pairs).passed
    assert check_hyperbolic(zero_functional(), pairs).passed
    assert not check_hyperbolic(hyperbolic_length().scaled(2.0), pairs).passed


def test_trace_identity_on_hand_pair():
    # worked by hand: traces 2.5 and 3 give 2.5 * 3 = 3 + 4.5
    la, lb, lab, laB = 2.5, 3.0, 3.0, 4.5
    assert la * lb == lab + laB


def test_tree_suites(pairs, g2):
    for lam in ([(g2.element("a1"), 1.0)], [(g2.element("a1"), 1.0), (g2.element("a2"), 2.0)]):
        f = tree_translation_length(lam)
        assert check_parry(f, pairs).passed
        assert check_tree_dual(f, pairs).passed
    assert not check_parry(hyperbolic_length(), pairs).passed
    assert not check_tree_dual(hyperbolic_length(), pairs).passed


def test_parry_on_repeated_element(g2):
    g = g2.element("a1 b2")
    rep = check_parry(hyperbolic_length(), classified_pairs([(g, g)]))
    # (g, g) shares a power, so the pair is rejected rather than counted
    assert rep.sample_size == 0 and rep.skipped == 1


def test_positivity_and_symmetry(classes):
    f = hyperbolic_length()
    assert check_positivity(f, classes).passed
    assert check_symmetry(f, classes).passed
    assert not check_positivity(f.scaled(-1.0), classes).passed


def test_passing_functionals_are_positive(pairs, classes, g2):
    # anything passing smoothing should be nonnegative on the sampled classes
    for f in (hyperbolic_length(), intersection_with(g2.element("a1")), zero_functional()):
        if all(r.passed for r in check_smoothing(f, pairs)):
            assert check_positivity(f, classes).passed


def test_run_suites_is_deterministic(g2):
    f = intersection_with(g2.element("a1"))
    kw = dict(seed=3, pair_radius=3, pair_cap=60, class_cap=20)
    r1 = [r.to_dict() for r in run_suites(f, g2, ALL_SUITES, **kw)]
    r2 = [r.to_dict() for r in run_suites(f, g2, ALL_SUITES, **kw)]
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    with pytest.raises(PreconditionError):
        run_suites(f, g2, ["nope"])


def test_failed_evaluation_never_passes(classes):
    from geocurrents.errors import GeoCurrentsError
    from geocurrents.functionals import CurveFunctional

    def broken(g):
        raise GeoCurrentsError("no value")

    rep = check_positivity(CurveFunctional("broken", broken), classes[:3])
    assert not rep.passed and math.isinf(rep.worst_margin)
