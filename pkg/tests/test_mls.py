from fractions import Fraction

import pytest

from markedlength import (CombinedMetric, FreeProductMetric, GreenMetric, GroupInputError,
                          MarkedGroup, RandomWalkMeasure, ScaledMetric, WordMetric,
                          algebraic_length, coarse_additivity_check, confined_check,
                          conjugacy_key, dilation_bounds, enumerate_ball,
                          enumerate_conjugacy_reps, inverse, length_profile, mls_compare, multiply,
                          power, rough_isometry_certificate, stable_length, stable_length_profile)
from markedlength.mls import classes_up_to, cycle_mean_stable_length, fekete_stable_length
import oracles


def _conj(h, g):
    return multiply(multiply(h, g), inverse(h))


# ------------------------------------------------------------- stable length


def test_stable_length_examples(F2, S1, D2):
    assert stable_length(S1, F2.parse("abA")) == 1
    assert stable_length(S1, F2.identity) == 0
    for g in enumerate_ball(F2, 3):
        assert stable_length(D2, g) == 2 * stable_length(S1, g)


def test_stable_length_marking_matches_cyclic_core(F2, S1):
    for g in enumerate_ball(F2, 4):
        w = "" if g.is_identity() else str(g)
        assert stable_length(S1, g) == len(oracles.cyclic_core(w))


def test_exact_cycle_mean_against_powers(F2, S2):
    """d(1, g^n) = n l(g) + O(1): the cycle mean must sit between the Fekete
    upper bound and (d(1, g^n) - 2 |core|)/n at every n."""
    for key in enumerate_conjugacy_reps(F2, 3)[1:]:
        g = key.canonical
        prof = stable_length_profile(S2, g)
        assert prof.method == "exact_cycle_mean"
        ell = prof.value
        assert isinstance(ell, (int, Fraction))
        up, _ = fekete_stable_length(S2, g, 12)
        assert ell <= up + 1e-12
        x = F2.identity
        for n in range(1, 25):
            x = multiply(x, g)
            assert S2.dist1(x) - 2 * len(g.word) <= n * ell <= S2.dist1(x)


def test_cycle_mean_S2_known_values(F2, S2):
    P = F2.parse
    assert stable_length(S2, P("ab")) == 1
    assert stable_length(S2, P("aB")) == 2
    assert stable_length(S2, P("ba")) == 1
    assert stable_length(S2, P("aab")) == 2


def test_fekete_route_upper_bounds_exact(F2, S2):
    for key in enumerate_conjugacy_reps(F2, 3)[1:]:
        g = key.canonical
        ex = stable_length_profile(S2, g, method="exact")
        fk = stable_length_profile(S2, g, N=10, method="fekete")
        assert fk.method == "fekete" and fk.horizon == 10 and 1 <= fk.n <= 10
        assert float(ex.value) <= fk.value + 1e-12


def test_green_stable_length_is_letter_weighted(F2):
    mu = RandomWalkMeasure.uniform(F2)
    G = GreenMetric(mu, N=40, tail_tol=1.0)
    v1, _ = G.measure(F2.parse("a"))
    prof = stable_length_profile(G, F2.parse("abAB"))
    assert prof.method == "exact_cyclic"
    assert prof.value == pytest.approx(4 * v1)


def test_free_product_stable_length():
    G = MarkedGroup.free_product([("free", 1), ("abelian", 2)])
    A = FreeProductMetric(G, [WordMetric(G.factor_group(0)), WordMetric(G.factor_group(1))])
    assert stable_length(A, G.parse("a b c")) == 3
    assert stable_length(A, G.parse("b b c")) == 3
    assert stable_length(A, G.parse("c a A B")) == 2  # reduces to c B


def test_stable_length_rejects_bad_horizon(F2, S1):
    with pytest.raises(GroupInputError):
        stable_length_profile(S1, F2.parse("a"), N=0)


@pytest.mark.parametrize("name", ["S1", "S2", "D2"])
def test_homogeneity(F2, request, name):
    A = request.getfixturevalue(name)
    for g in enumerate_ball(F2, 4):
        ell = stable_length(A, g)
        for n in range(-4, 5):
            assert stable_length(A, power(g, n)) == abs(n) * ell


@pytest.mark.parametrize("name", ["S1", "S2"])
def test_conjugation_invariance(F2, request, name):
    A = request.getfixturevalue(name)
    hs = enumerate_ball(F2, 2)
    for g in enumerate_ball(F2, 3):
        ell = stable_length(A, g)
        for h in hs:
            assert stable_length(A, _conj(h, g)) == ell


# ---------------------------------------------------------- algebraic length


def test_algebraic_length_examples(F2, S1):
    val, arg, cert = algebraic_length(S1, F2.parse("abA"), 3)
    assert val == 1 and str(arg) == "a" and cert
    assert algebraic_length(S1, F2.identity, 3)[0] == 0


@pytest.mark.parametrize("name", ["S1", "S2", "D2"])
def test_length_chain_ball4(F2, request, name):
    A = request.getfixturevalue(name)
    for g in enumerate_ball(F2, 4):
        prof = length_profile(A, g, R=2)
        assert prof.chain_holds()


def test_convexity_sandwich(F2, S1, S2):
    # |l - l_alg| <= 2 C_cvx + 2 (covering radius); C_cvx = 1 and covering radius 0
    for A in (S1, S2):
        for g in enumerate_ball(F2, 3):
            prof = length_profile(A, g, R=3)
            assert prof.algebraic - float(prof.stable.value) <= 2


# -------------------------------------------------------------- comparisons


def test_compare_examples(F2, S1, S2, D2):
    assert mls_compare(S1, S1, L=4).max_gap == 0
    rep = mls_compare(S1, S2, L=4)
    assert rep.witness == "ab" and rep.witness_lengths == (2, 1)
    assert not rep.equal and rep.tolerance == 0
    rep = mls_compare(S1, D2, L=4)
    assert all(row["l2"] == 2 * row["l1"] for row in rep.classes)


def test_compare_class_sample_is_complete(F2, S1):
    keys = classes_up_to(S1, 4)
    for n in range(5):
        assert sum(1 for k in keys if len(k.canonical.word) == n) == oracles.class_count_formula(n)


def test_compare_explicit_sample(F2, S1, S2):
    rep = mls_compare(S1, S2, sample=[F2.parse("babB"), F2.parse("a")])
    assert rep.description == {"explicit_classes": 2}
    assert rep.witness == "ab"
    with pytest.raises(GroupInputError):
        mls_compare(S1, S2)


def test_compare_estimated_tolerance(F2, S1):
    # non-marking word metrics on Z^2 are Fekete estimates, so a tolerance applies
    Z = MarkedGroup.free_product([("abelian", 2)])
    A = WordMetric(Z)
    B = WordMetric(Z, ["a", "b", "ab"])
    rep = mls_compare(A, B, sample=[Z.parse("a"), Z.parse("a b")], N=8)
    assert rep.tolerance == pytest.approx(2 / 8)


def test_rough_isometry_examples(S1, S2, D2):
    assert all(row["C"] == 0 for row in rough_isometry_certificate(D2, S1, 2, 2, 6).C_profile)
    for A in (S1, S2, D2):
        assert all(row["C"] == 0 for row in rough_isometry_certificate(A, A, 1, 1, 4).C_profile)
    prof = [row["C"] for row in rough_isometry_certificate(S1, S2, 1, 1, 6).C_profile]
    assert prof == sorted(prof) and prof[-1] > prof[0]
    with pytest.raises(GroupInputError):
        rough_isometry_certificate(S1, S2, 1, 1, 0)


def test_rough_isometry_against_naive(F2, S1, S2):
    oracle = oracles.bfs_word_lengths(["a", "b", "ab"], 6)
    worst = {r: 0 for r in range(1, 5)}
    for w in oracles.ball_words(2, 4):
        gap = abs(len(w) - oracle[w])
        for r in range(len(w), 5):
            if r >= 1:
                worst[r] = max(worst[r], gap)
    prof = rough_isometry_certificate(S1, S2, 1, 1, 4).C_profile
    assert [row["C"] for row in prof] == [worst[r] for r in range(1, 5)]


def test_dilation_examples(S1, S2, D2):
    assert dilation_bounds(S1, D2, 6) == ((2, "a"), (2, "a"))
    (lo, lw), (hi, hw) = dilation_bounds(S1, S2, 4)
    assert lo <= 0.5 and lw == "ab" and hi >= 1
    assert dilation_bounds(S1, S1, 1) == ((1, "a"), (1, "a"))
    with pytest.raises(GroupInputError):
        dilation_bounds(S1, S1, 0)


def test_coarse_additivity_examples(F2, S1, D2):
    assert coarse_additivity_check(S1, S1, 0, 4)[0]["defect"] == 0
    assert coarse_additivity_check(D2, S1, 0, 4)[0]["defect"] == 0
    mu = RandomWalkMeasure.uniform(F2)
    rep = coarse_additivity_check(GreenMetric(mu, N=40, tail_tol=1.0), S1, 1, 4)
    assert rep[0]["defect"] == pytest.approx(0, abs=1e-12)
    assert 0 < rep[1]["defect"] < float("inf") and rep[1]["error"] > 0


def test_coarse_additivity_combination(F2, S1, S2):
    C = CombinedMetric([(1.0, S1), (1.0, S2)])
    rep = coarse_additivity_check(C, S1, 0, 3)
    # S2 is not additive along S1 geodesics, e.g. 1 -> a -> ab
    assert rep[0]["defect"] > 0


# -------------------------------------------------------------------- confined


def test_confined_examples(F2):
    P = F2.parse

    def even_a(g):
        return sum(1 if x == 1 else -1 if x == -1 else 0 for x in g.word) % 2 == 0

    assert confined_check(even_a, [P("b")], 4).passed

    def in_a(g):
        return all(abs(x) == 1 for x in g.word)

    v = confined_check(in_a, [P("a"), P("A")], 3)
    assert not v.passed and str(v.witness) == "b"
    assert confined_check(lambda g: True, [P("a")], 3).passed
    with pytest.raises(GroupInputError):
        confined_check(in_a, [F2.identity], 2)
    with pytest.raises(GroupInputError):
        confined_check(in_a, [], 2)


def test_conjugacy_key_roundtrip_in_compare(F2, S1, S2):
    rep = mls_compare(S1, S2, sample=[conjugacy_key(F2.parse("babB"))])
    assert rep.classes[0]["key"] == "ab"


def test_cycle_mean_direct(F2, S2):
    assert cycle_mean_stable_length(S2, F2.parse("ab")) == 1
