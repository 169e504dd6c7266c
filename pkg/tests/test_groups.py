import pytest

from markedlength import (GroupInputError, MarkedGroup, ResourceBudgetError, conjugacy_key,
                          cyclic_reduce, enumerate_ball, enumerate_conjugacy_reps,
                          enumerate_sphere, inverse, is_conjugate, multiply, power, sphere_size)
from markedlength.groups import exponent_sum, in_cyclic_subgroup, reduce
import oracles


def _s(g):
    return "" if g.is_identity() else str(g)


def test_reduce_examples(F2):
    assert str(F2.parse("a b B a")) == "aa"
    e = F2.parse("")
    assert e.is_identity() and len(e) == 0
    assert F2.parse("1").is_identity()


def test_parse_notations(F2):
    assert F2.parse("a^-1") == F2.parse("A") == F2.parse("a⁻¹")
    assert str(F2.parse("a²b")) == "aab"
    assert str(F2.parse("a^3 b^-2")) == "aaaBB"


def test_unknown_symbol(F2):
    with pytest.raises(GroupInputError):
        F2.parse("ax")


def test_syllable_merge_in_free_product(ZZ):
    # a a b B a: the b-syllable collapses and the a-syllables merge
    assert str(ZZ.parse("a a b B a")) == "aaa"
    assert len(ZZ.parse("a a b B a")) == 3


def test_abelian_factor_normal_form():
    G = MarkedGroup.free_product([("free", 1), ("abelian", 2)])
    # c and b commute inside the abelian factor; the exponent vector is sorted
    assert G.parse("c b") == G.parse("b c")
    # b . a . (c a A B) = b . a . (c B); the abelian syllable prints sorted
    assert str(G.parse("b a c a A B")) == "baBc"


def test_multiply_examples(F2):
    assert str(multiply(F2.parse("ab"), F2.parse("Ba"))) == "aa"
    assert str(multiply(F2.identity, F2.parse("b"))) == "b"
    x = multiply(F2.parse("ab"), F2.parse("ab"))
    assert str(x) == "abab" and len(x) == 4


def test_group_mismatch(F2, ZZ):
    with pytest.raises(GroupInputError):
        multiply(F2.parse("a"), ZZ.parse("a"))


def test_cyclic_reduce_examples(F2):
    core, conj = cyclic_reduce(F2.parse("abA"))
    assert (str(core), str(conj)) == ("b", "a")
    core, conj = cyclic_reduce(F2.parse("b"))
    assert (str(core), str(conj)) == ("b", "1")
    core, conj = cyclic_reduce(F2.parse("abaB"))
    assert (str(core), str(conj)) == ("abaB", "1")


def test_cyclic_reduce_identity_exhaustive(F2):
    for g in enumerate_ball(F2, 5):
        core, conj = cyclic_reduce(g)
        assert multiply(multiply(conj, core), inverse(conj)) == g
        assert _s(core) == oracles.cyclic_core(_s(g))


def test_conjugacy_key_examples(F2):
    assert conjugacy_key(F2.parse("abA")).canonical == conjugacy_key(F2.parse("b")).canonical
    assert conjugacy_key(F2.identity).canonical.is_identity()
    assert conjugacy_key(F2.parse("ab")).canonical == conjugacy_key(F2.parse("ba")).canonical


def test_conjugator_identity(F2):
    for g in enumerate_ball(F2, 4):
        key = conjugacy_key(g)
        c = key.conjugator
        assert multiply(multiply(inverse(c), g), c) == key.canonical


def test_conjugacy_key_matches_naive_necklace(F2):
    for g in enumerate_ball(F2, 6):
        assert _s(conjugacy_key(g).canonical) == oracles.necklace(_s(g))


def test_conjugation_invariance_exhaustive(F2):
    ws = enumerate_ball(F2, 3)
    for g in enumerate_ball(F2, 4):
        k = conjugacy_key(g).canonical
        for w in ws:
            assert conjugacy_key(multiply(multiply(w, g), inverse(w))).canonical == k


def test_is_conjugate(F2):
    assert is_conjugate(F2.parse("ab"), F2.parse("ba"))
    assert not is_conjugate(F2.parse("ab"), F2.parse("aB"))


def test_sphere_examples(F2):
    assert len(enumerate_sphere(F2, 1)) == 4
    assert len(enumerate_sphere(F2, 2)) == 12
    assert [str(g) for g in enumerate_sphere(F2, 0)] == ["1"]


def test_sphere_formula(F2):
    for n in range(1, 11):
        assert sphere_size(F2, n) == 4 * 3 ** (n - 1)
    for n in range(1, 7):
        assert len(enumerate_sphere(F2, n)) == 4 * 3 ** (n - 1)


def test_ball_matches_bruteforce(F2):
    got = {_s(g) for g in enumerate_ball(F2, 5)}
    assert got == oracles.ball_words(2, 5)


def test_sphere_order_deterministic(F2):
    a = [g.word for g in enumerate_sphere(F2, 4)]
    b = [g.word for g in enumerate_sphere(F2, 4)]
    assert a == b == sorted(a, key=lambda w: [2 * (abs(x) - 1) + (x < 0) for x in w])


def test_conjugacy_reps_examples(F2):
    assert len(enumerate_conjugacy_reps(F2, 0)) == 1
    assert len(enumerate_conjugacy_reps(F2, 1)) == 5
    assert len(enumerate_conjugacy_reps(F2, 2)) == 13


def test_conjugacy_reps_against_burnside_count(F2):
    reps = enumerate_conjugacy_reps(F2, 8)
    by_len = [0] * 9
    for k in reps:
        by_len[len(k.canonical)] += 1
    assert by_len == [oracles.class_count_formula(n) for n in range(9)]


def test_conjugacy_reps_against_naive_necklaces(F2):
    naive = {oracles.necklace(w) for w in oracles.ball_words(2, 6)}
    naive = {w for w in naive if len(w) <= 6}
    got = {_s(k.canonical) for k in enumerate_conjugacy_reps(F2, 6)}
    # every class of cyclic length <= 6 has a representative of length <= 6
    assert got == naive


def test_budget_error(F2):
    with pytest.raises(ResourceBudgetError):
        enumerate_sphere(F2, 30)


def test_power_and_inverse(F2):
    g = F2.parse("abA")
    assert power(g, 3) == F2.parse("abbbA")
    assert power(g, -1) == inverse(g)
    assert power(g, 0).is_identity()


def test_membership_helpers(F2):
    assert in_cyclic_subgroup(F2.parse("ababab"), F2.parse("ab"))
    assert in_cyclic_subgroup(F2.parse("BABA"), F2.parse("ab"))
    assert not in_cyclic_subgroup(F2.parse("aab"), F2.parse("ab"))
    assert exponent_sum(F2.parse("abAAb"), "a") == -1


def test_reduce_function_idempotent(F2):
    raw = F2.parse("abBa").word
    assert reduce(F2, reduce(F2, raw).word) == reduce(F2, raw)


def test_group_validation():
    with pytest.raises(GroupInputError):
        MarkedGroup.free(0)
    with pytest.raises(GroupInputError):
        MarkedGroup.free_product([("cyclic", 2)])
    with pytest.raises(GroupInputError):
        MarkedGroup.free(2, ["a", "a"])
