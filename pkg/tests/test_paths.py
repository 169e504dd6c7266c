import itertools

import pytest

from markedlength import (AdmissiblePathSpec, GroupInputError, ScaledMetric, Segment,
                          UnsupportedError, WordMetric, check_admissible, enumerate_ball,
                          extension_certificate, extension_search, multiply, perturbation_search,
                          simultaneous_extension, stable_length)
from markedlength.paths import extension_certificate_bruteforce, fellow_travel
import oracles


def _s(g):
    return "" if g.is_identity() else str(g)


@pytest.fixture
def F(F2):
    return [F2.parse("a"), F2.parse("b"), F2.parse("A")]


def _path(F2, D):
    P = F2.parse
    return AdmissiblePathSpec([Segment(P("aaaaa")), Segment(P("bbb"), P("b")), Segment(P("aaaaa"))],
                              D=D, tau=0)


# ------------------------------------------------------------ admissible paths


def test_admissible_example(F2, S1):
    v = check_admissible(_path(F2, 2), S1)
    assert v.passed and v.axis_segments == 1
    assert v.conditions["LL1"][0]["length"] == 3
    assert v.conditions["BP"][0]["entry"] == 0 and v.conditions["BP"][0]["exit"] == 0


def test_admissible_fails_long_local(F2, S1):
    v = check_admissible(_path(F2, 4), S1)
    assert not v.passed
    assert not v.conditions["LL1"][0]["pass"]
    assert all(r["pass"] for r in v.conditions["BP"])


def test_admissible_vacuous(F2, S1):
    assert check_admissible(AdmissiblePathSpec([Segment(F2.parse("ab"))]), S1).passed
    assert check_admissible(AdmissiblePathSpec([]), S1).passed


def test_admissible_gaps_and_coset_axes(F2, S1):
    P = F2.parse
    segs = [Segment(P("bbb"), P("b")), Segment(P("aaaaa")), Segment(P("bbb"), P("b"))]
    spec = AdmissiblePathSpec(segs, D=2, tau=0)
    v = check_admissible(spec, S1)
    assert v.passed and v.conditions["LL2"][0]["gap"] == 5
    # a gap of length 2 is too short for the special variant but the two
    # axes are distinct cosets, which is enough for the general one
    segs[1] = Segment(P("aa"))
    assert not check_admissible(AdmissiblePathSpec(segs, D=2, tau=0), S1).passed
    v = check_admissible(AdmissiblePathSpec(segs, D=2, tau=0, special=False), S1)
    assert v.passed and v.conditions["LL2"][0]["distinct_axes"]


def test_admissible_rejects_off_axis_label(F2, S1):
    spec = AdmissiblePathSpec([Segment(F2.parse("a")), Segment(F2.parse("ab"), F2.parse("b"))])
    v = check_admissible(spec, S1)
    assert not v.passed
    assert not v.conditions["endpoints_on_axis"][0]["pass"]


def test_admissible_bounded_projection_failure(F2, S1):
    # entering the b-axis along a word that already travels along it
    P = F2.parse
    spec = AdmissiblePathSpec([Segment(P("aabb")), Segment(P("bbb"), P("b")), Segment(P("a"))],
                              D=2, tau=0)
    v = check_admissible(spec, S1)
    assert not v.conditions["BP"][0]["pass"]


def test_admissible_translation_invariant(F2, S1):
    spec = _path(F2, 2)
    base = check_admissible(spec, S1).to_dict()
    for w in enumerate_ball(F2, 3):
        assert check_admissible(spec.translated(w), S1).to_dict() == base


def test_admissible_periodic_unrolling(F2, S1):
    P = F2.parse
    spec = AdmissiblePathSpec([Segment(P("bbb"), P("b")), Segment(P("aaa"))], D=2, periodic=True)
    assert len(spec.unrolled()) == 6 and len(spec.vertices()) == 7
    assert check_admissible(spec, S1).passed
    assert fellow_travel(spec, S1) == 0


def test_admissible_needs_word_metric(F2, S1):
    from markedlength import GreenMetric, RandomWalkMeasure
    G = GreenMetric(RandomWalkMeasure.uniform(F2), N=20, tail_tol=10)
    with pytest.raises(UnsupportedError):
        check_admissible(_path(F2, 2), G)


# ------------------------------------------------------------------ extension


def test_extension_examples(F2, S1, F):
    P = F2.parse
    out = extension_search(P("aa"), P("AA"), F, 1, S1)
    assert str(out.f) == "b" and out.defect == 1 and out.success
    out = extension_search(F2.identity, F2.identity, F, 1, S1)
    assert str(out.f) == "a" and out.defect == 1
    # all three candidates tie at defect 1 for g = h = b; the first wins
    out = extension_search(P("b"), P("b"), F, 1, S1)
    assert out.defect == 1 and [d for _, d in out.defects] == [1, 1, 1]
    assert str(out.f) == "a"


def test_extension_accepts_strings(F2, S1):
    out = extension_search(F2.parse("aa"), F2.parse("AA"), ["a", "b", "A"], 1, S1)
    assert str(out.f) == "b"
    with pytest.raises(GroupInputError):
        extension_search(F2.parse("a"), F2.parse("a"), [], 1, S1)


def test_extension_defects_match_strings(F2, S1, F):
    ball = enumerate_ball(F2, 3)
    for g, h in itertools.product(ball, ball):
        out = extension_search(g, h, F, 1, S1)
        ref = oracles.brute_extension_defects(_s(g), _s(h), ["a", "b", "A"])
        assert [d for _, d in out.defects] == ref
        assert out.defect == min(ref)


def test_extension_certificate_radius8(F):
    cert = extension_certificate(F, 1, 8)
    assert cert.passed and cert.max_min_defect == 1
    assert cert.pairs == (1 + 2 * (3 ** 8 - 1)) ** 2


@pytest.mark.parametrize("Fw,eps", [(["a", "b", "A"], 1), (["a", "b", "A"], 0), (["a"], 1),
                                    (["a", "b"], 1), (["ab", "B"], 1)])
def test_certificate_routes_agree(F2, Fw, eps):
    Fs = [F2.parse(w) for w in Fw]
    fast = extension_certificate(Fs, eps, 4)
    slow = extension_certificate_bruteforce(Fs, eps, 4)
    assert fast.method == "prefix_classes" and slow.method == "bruteforce"
    assert fast.passed == slow.passed
    assert fast.max_min_defect == slow.max_min_defect


def test_certificate_string_oracle_radius4():
    ball = sorted(oracles.ball_words(2, 4))
    worst = max(min(oracles.brute_extension_defects(g, h, ["a", "b", "A"])) for g in ball for h in ball)
    assert worst == 1


def test_certificate_failure_witness(F2):
    cert = extension_certificate([F2.parse("a")], 1, 3)
    assert not cert.passed
    g, h = cert.failures[0]
    out = extension_search(g, h, [F2.parse("a")], 1, WordMetric(F2))
    assert not out.success


def test_certificate_other_metric_uses_bruteforce(F2, S2, F):
    cert = extension_certificate(F, 1, 2, S2)
    assert cert.method == "bruteforce"


# --------------------------------------------------------------- perturbation


def test_perturbation_examples(F2, S1, F):
    out = perturbation_search(F2.parse("A"), F, 1, S1)
    assert str(out.f) == "b" and out.defect == 0 and out.success
    assert out.defects[0][1] is None  # a^-1 a = 1 is skipped
    out = perturbation_search(F2.parse("abA"), F, 1, S1)
    assert str(out.f) == "a" and out.defect == 0


def test_perturbation_no_cancellation_is_free(F2, S1):
    out = perturbation_search(F2.parse("ab"), [F2.parse("b")], 1, S1)
    assert out.defect == 0


def test_perturbation_stable_below_length(F2, S1, S2, F):
    for A in (S1, S2):
        for g in enumerate_ball(F2, 3):
            out = perturbation_search(g, F, 1, A)
            for f, d in out.defects:
                if d is not None:
                    assert d >= -1e-12
            if out.f is not None:
                gf = multiply(g, out.f)
                assert float(stable_length(A, gf)) <= A.dist1(gf) + 1e-12


def test_perturbation_certificate_ball4(F2, S1, F):
    # every g in the ball admits an f with defect <= 2 eps
    for g in enumerate_ball(F2, 4):
        assert perturbation_search(g, F, 1, S1).success


# --------------------------------------------------------------- simultaneous


def test_simultaneous_examples(F2, S1, D2, S2, F):
    out = simultaneous_extension(F2.parse("A"), F, S1, D2, 1)
    assert str(out.f) == "b" and (out.defect1, out.defect2) == (0, 0) and out.success
    out = simultaneous_extension(F2.parse("ab"), [F2.parse("b")], S1, D2, 1)
    assert (out.defect1, out.defect2) == (0, 0)
    out = simultaneous_extension(F2.parse("B"), F, S1, S2, 1)
    assert out.success and max(out.defect1, out.defect2) == 0
    assert len(out.candidates) == 3


def test_simultaneous_defects_match_single(F2, S1, S2, F):
    for g in enumerate_ball(F2, 2):
        out = simultaneous_extension(g, F, S1, S2, 1)
        for f, d1, d2 in out.candidates:
            if d1 is None:
                continue
            p1 = perturbation_search(g, [f], 1, S1).defect
            p2 = perturbation_search(g, [f], 1, S2).defect
            assert (d1, d2) == (p1, p2)


def test_scaled_defects_scale(F2, S1, F):
    D3 = ScaledMetric(S1, 3)
    for g in enumerate_ball(F2, 2):
        a = perturbation_search(g, F, 1, S1)
        b = perturbation_search(g, F, 1, D3)
        for (f1, d1), (f2, d2) in zip(a.defects, b.defects):
            assert (d1 is None) == (d2 is None)
            if d1 is not None:
                assert d2 == pytest.approx(3 * d1)
