import itertools
import warnings

import pytest

from markedlength import (ContractingAxis, GroupInputError, MarkedGroup, WindowExhaustedError,
                          WordMetric, contraction_constant, elementary_membership, elliptic_radical,
                          enumerate_ball, lemma_audit, multiply, power, proj_diameter, project,
                          quasiconvexity_audit, weakly_independent)
import oracles


def test_project_examples(F2, S1):
    ax = ContractingAxis(F2.parse("a"), 8)
    r = project(ax, F2.parse("aaabb"), S1)
    assert [str(p) for p in r.points] == ["aaa"] and r.distance == 2
    r = project(ax, F2.parse("aaa"), S1)
    assert [str(p) for p in r.points] == ["aaa"] and r.distance == 0
    r = project(ax, F2.parse("b"), S1)
    assert r.points == (F2.identity,) and r.distance == 1


def test_project_finite_set(F2, S1):
    pts = [F2.parse("ab"), F2.parse("aB")]
    r = project(pts, F2.parse("a"), S1)
    assert set(r.points) == set(pts) and r.distance == 1
    with pytest.raises(GroupInputError):
        project([], F2.parse("a"), S1)


def test_window_edge(F2, S1):
    ax = ContractingAxis(F2.parse("a"), 3)
    with pytest.warns(UserWarning):
        r = project(ax, F2.parse("a" * 6), S1)
    assert r.touches_edge
    with pytest.raises(WindowExhaustedError):
        project(ax, F2.parse("a" * 6), S1, strict=True)


def test_axis_validation(F2):
    with pytest.raises(GroupInputError):
        ContractingAxis(F2.identity)
    with pytest.raises(GroupInputError):
        ContractingAxis(F2.parse("a"), 0)


def _naive_projection(axis_words, x):
    ds = [len(oracles.free_reduce(oracles.invert(x) + p)) for p in axis_words]
    m = min(ds)
    return {p for p, d in zip(axis_words, ds) if d == m}, m


def test_project_matches_string_oracle(F2, S1):
    for h in ["a", "ab", "aB"]:
        ax = ContractingAxis(F2.parse(h), 8)
        words = [oracles.free_reduce(h * k) if k >= 0 else oracles.invert(h) * -k
                 for k in range(-8, 9)]
        for x in enumerate_ball(F2, 3):
            r = project(ax, x, S1)
            w = "" if x.is_identity() else str(x)
            near, m = _naive_projection(words, w)
            assert {("" if p.is_identity() else str(p)) for p in r.points} == near
            assert r.distance == m


def test_proj_diameter_examples(F2, S1):
    ax = ContractingAxis(F2.parse("a"), 8)
    x, y = F2.parse("b"), F2.parse("aaaaab")
    assert proj_diameter(ax, x, y, S1) == 5
    assert proj_diameter(ax, x, x, S1) == 0
    assert 5 <= S1.distance(x, y) + 4 * 1


def test_projection_equivariance(F2, S1):
    ax = ContractingAxis(F2.parse("ab"), 8)
    for w in enumerate_ball(F2, 3):
        moved = ax.translate(w)
        for x in enumerate_ball(F2, 2):
            lhs = project(moved, multiply(w, x), S1).points
            rhs = tuple(multiply(w, p) for p in project(ax, x, S1).points)
            assert set(lhs) == set(rhs)


def _naive_contraction(h, R, W=8):
    axis = [oracles.free_reduce(h * k) if k >= 0 else oracles.invert(h) * -k
            for k in range(-W, W + 1)]
    ball = sorted(oracles.ball_words(2, R))
    worst = {}
    for x, y in itertools.combinations_with_replacement(ball, 2):
        path = oracles.free_reduce(oracles.invert(x) + y)
        verts = [oracles.free_reduce(x + path[:i]) for i in range(len(path) + 1)]
        proj = set()
        dmin = None
        for v in verts:
            near, m = _naive_projection(axis, v)
            proj |= near
            dmin = m if dmin is None else min(dmin, m)
        diam = max(len(oracles.free_reduce(oracles.invert(p) + q)) for p in proj for q in proj)
        worst[dmin] = max(worst.get(dmin, 0), diam)
    for c in range(1, R + 1):
        if all(d <= c for lo, d in worst.items() if lo >= c):
            return c
    return None


@pytest.mark.parametrize("h", ["a", "ab"])
def test_contraction_matches_brute_force(F2, S1, h):
    res = contraction_constant(ContractingAxis(F2.parse(h), 8), S1, 4)
    assert res.C == _naive_contraction(h, 4)


def test_contraction_examples(F2, S1):
    res = contraction_constant(ContractingAxis(F2.parse("a"), 8), S1, 6)
    assert res.C == 1 and res.verdict == "contracting_at_scale"
    hull = contraction_constant(ContractingAxis(F2.parse("ab"), 8, hull=True), S1, 6)
    assert hull.C == 1
    # the discrete orbit of ab skips the vertex a, so a geodesic passing one
    # step off the orbit can project to two orbit points
    orbit = contraction_constant(ContractingAxis(F2.parse("ab"), 8), S1, 6)
    assert orbit.C == 2


def test_flat_axis_constant_grows_with_radius():
    # in Z^2 the x-axis is not contracting: the estimate grows with the scale
    # (roughly 2R/3), unlike the tree axes whose estimate is stable
    Z2 = MarkedGroup.free_product([("abelian", 2)])
    A = WordMetric(Z2)
    ax = ContractingAxis(Z2.parse("a"), 12)
    Cs = [contraction_constant(ax, A, R).C for R in (4, 6, 8)]
    assert Cs == [3, 4, 6]


def test_quasiconvexity_examples(F2, S1):
    ax = ContractingAxis(F2.parse("a"), 8)
    qc = quasiconvexity_audit(ax, S1, 6, C=1)
    assert qc.ok and qc.excursion <= 3


@pytest.mark.parametrize("h", ["a", "ab"])
def test_lemma_audit_ball5(F2, S1, h):
    rep = lemma_audit(ContractingAxis(F2.parse(h), 8), S1, 5)
    assert rep["points"] == 485
    assert all(v == 0 for v in rep["violations"].values()), rep["examples"]


def test_weak_independence_examples(F2, S1):
    a, b = F2.parse("a"), F2.parse("b")
    r = weakly_independent(a, b, S1, W=8, B=2)
    assert r.independent and r.diameter == 0 and r.scale == (8, 2)
    r = weakly_independent(a, power(a, 2), S1, W=8, B=2)
    assert not r.independent and r.witness is not None
    assert r.diameter == 32  # a^-16 .. a^16
    assert not weakly_independent(F2.parse("ab"), F2.parse("ab"), S1).independent
    with pytest.raises(GroupInputError):
        weakly_independent(F2.identity, a, S1)


def test_membership_examples(F2):
    a, b = F2.parse("a"), F2.parse("b")
    v = elementary_membership(power(a, 3), a)
    assert (v.verdict, v.m) == ("in_E_plus", 1)
    v = elementary_membership(b, a, 5)
    assert (v.verdict, v.m, v.certified) == ("not_in_E_up_to", 5, True)
    v = elementary_membership(F2.identity, a)
    assert (v.verdict, v.m) == ("in_E_plus", 1)
    with pytest.raises(GroupInputError):
        elementary_membership(a, F2.identity)


def test_membership_inverse_and_free_product():
    G = MarkedGroup.free_product([("free", 1), ("abelian", 2)])
    # b and c commute, so c b c^-1 = b
    v = elementary_membership(G.parse("c"), G.parse("b"))
    assert v.verdict == "in_E_plus"
    v = elementary_membership(G.parse("a"), G.parse("b"), 3)
    assert v.verdict == "not_in_E_up_to" and not v.certified


def test_elliptic_radical(F2):
    assert elliptic_radical(F2) == [F2.identity]


def test_no_spurious_warnings_in_interior(F2, S1):
    ax = ContractingAxis(F2.parse("a"), 8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for x in enumerate_ball(F2, 3):
            project(ax, x, S1)
