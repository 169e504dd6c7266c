"""Stable and algebraic translation lengths and comparisons between actions."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import GroupInputError
from .groups import (ConjugacyKey, GroupElement, conjugacy_key, cyclic_reduce, enumerate_ball,
                     enumerate_conjugacy_reps, enumerate_sphere, inverse, multiply,
                     tree_index)
from .metrics import (CombinedMetric, FreeProductMetric, GreenMetric, ScaledMetric, WordMetric,
                      common_prefix, geodesic, mul_words)


@dataclass(frozen=True)
class StableLength:
    """Stable length with the method that produced it.

    ``method`` is "exact_cyclic" (tree-type metric read off the cyclic core),
    "exact_cycle_mean" (mean-payoff cycle on the quotient of the axis
    neighbourhood) or "fekete" (min_{n <= horizon} d(1, g^n)/n, an upper bound
    attained at ``n``).
    """

    value: float
    method: str
    horizon: int = 0
    n: int = 0

    @property
    def exact(self):
        return self.method != "fekete"

    def __float__(self):
        return float(self.value)


def _letter_weights(action):
    """Per-letter weights when the action is a weighted tree metric."""
    G = action.group
    if isinstance(action, WordMetric) and action.is_marking:
        return {x: 1 for x in G.alphabet}
    if isinstance(action, ScaledMetric):
        w = _letter_weights(action.base)
        return None if w is None else {x: action.factor * v for x, v in w.items()}
    if isinstance(action, GreenMetric) and action._weights is not None:
        return {x: v for x, (v, _) in action._weights.items()}
    if isinstance(action, CombinedMetric):
        ws = [(c, _letter_weights(m)) for c, m in action.terms]
        if any(w is None for _, w in ws):
            return None
        return {x: sum(c * w[x] for c, w in ws) for x in G.alphabet}
    return None


def cycle_mean_stable_length(action, g):
    """Exact stable length of g for a word metric on a free group.

    The quotient of the Morse neighbourhood of the axis of the cyclic core by
    the core's own translation is a finite graph; each generator move advances
    along the axis by an integer.  The stable length is the period divided by
    the best mean advance per move over its cycles (Karp's algorithm).
    """
    if not (isinstance(action, WordMetric) and action.group.is_free):
        raise GroupInputError("cycle-mean method needs a word metric on a free group")
    core, _ = cyclic_reduce(g)
    c = core.word
    p = len(c)
    if p == 0:
        return Fraction(0)
    M = action.morse
    K = action.max_generator_length
    G = action.group

    def axis(lo, hi):
        return tuple(c[m % p] for m in range(lo, hi))

    # a move by s cancels at most K letters, so only the last K axis letters
    # before the current position and the tail take part
    behind = [axis(i - K, i) for i in range(p)]
    ahead = [axis(i - K, i + M + K + 1) for i in range(p)]
    start = (0, ())
    ids = {start: 0}
    order = [start]
    edges = []
    k = 0
    while k < len(order):
        i, t = order[k]
        w = behind[i] + t
        fwd = ahead[i]
        for s in action.moves:
            y = mul_words(G, w, s)
            j = common_prefix(y, fwd)
            tail = y[j:]
            if len(tail) > M:
                continue
            step = j - K
            node = ((i + step) % p, tail)
            if node not in ids:
                ids[node] = len(order)
                order.append(node)
            edges.append((k, ids[node], step))
        k += 1
    V = len(order)
    src = np.array([e[0] for e in edges])
    dst = np.array([e[1] for e in edges])
    wt = np.array([e[2] for e in edges], dtype=float)
    D = np.full((V + 1, V), -np.inf)
    D[0, 0] = 0.0
    for n in range(1, V + 1):
        cand = D[n - 1][src] + wt
        np.maximum.at(D[n], dst, cand)
    # Karp: best mean = max_v min_n (D_V(v) - D_n(v)) / (V - n).  Candidate
    # values have denominators <= V, so floats pick the right entry and the
    # exact fraction is rebuilt from the integer path weights.
    top = D[V]
    with np.errstate(invalid="ignore"):
        means = (top[None, :] - D[:V]) / (V - np.arange(V))[:, None]
    means[~np.isfinite(D[:V])] = np.inf
    inner = means.min(axis=0)
    inner[~np.isfinite(top)] = -np.inf
    v = int(np.argmax(inner))
    best = None
    if np.isfinite(inner[v]):
        n = int(np.argmin(means[:, v]))
        best = Fraction(int(top[v] - D[n, v]), V - n)
    if best is None or best <= 0:
        raise GroupInputError("no advancing cycle found; generating set too small")
    return Fraction(p) / best


def fekete_stable_length(action, g, N):
    """(min_{1 <= n <= N} d(1, c^n)/n, argmin n) for the cyclic core c."""
    core, _ = cyclic_reduce(g)
    best, arg = None, 0
    x = core.group.identity
    for n in range(1, N + 1):
        x = multiply(x, core)
        v = action.dist1(x) / n
        if best is None or v < best - 1e-15:
            best, arg = v, n
    return best, arg


def stable_length_profile(action, g, N=16, method="auto"):
    """StableLength of g; ``method`` is "auto", "exact" or "fekete"."""
    if N < 1:
        raise GroupInputError("N must be at least 1")
    if g.is_identity():
        return StableLength(0, "exact_cyclic")
    if method in ("auto", "exact"):
        core, _ = cyclic_reduce(g)
        w = _letter_weights(action)
        if w is not None and action.group.is_free:
            return StableLength(sum(w[x] for x in core.word), "exact_cyclic")
        if isinstance(action, WordMetric) and action.is_marking:
            return StableLength(len(core.word), "exact_cyclic")
        if isinstance(action, ScaledMetric):
            inner = stable_length_profile(action.base, g, N, method)
            if inner.exact:
                return StableLength(action.factor * inner.value, inner.method)
        if isinstance(action, WordMetric) and action.group.is_free:
            return StableLength(cycle_mean_stable_length(action, g), "exact_cycle_mean")
        if isinstance(action, FreeProductMetric):
            pieces = action.syllable_pieces(core)
            if len(pieces) >= 2:
                return StableLength(sum(action.factor_metrics[i].dist1(h) for i, h in pieces),
                                    "exact_cyclic")
            i, h = pieces[0]
            inner = stable_length_profile(action.factor_metrics[i], h, N, method)
            if inner.exact:
                return inner
        if method == "exact":
            raise GroupInputError("no exact stable length for this action")
    value, n = fekete_stable_length(action, g, N)
    return StableLength(value, "fekete", N, n)


def stable_length(action, g, N=16):
    return stable_length_profile(action, g, N).value


def algebraic_length(action, g, R):
    """(min_{|x| <= R} d(x, g x), minimizer, certified).

    Not certified when every minimizer lies on the boundary sphere.
    """
    best, arg = None, None
    for x in enumerate_ball(g.group, R):
        v = action.dist1(multiply(multiply(inverse(x), g), x))
        if best is None or v < best:
            best, arg = v, x
    certified = not (R > 0 and len(arg.word) == R)
    return best, arg, certified


@dataclass
class LengthProfile:
    element: GroupElement
    stable: StableLength
    algebraic: float
    audit_radius: int
    algebraic_certified: bool
    upper: float

    def chain_holds(self, tol=1e-9):
        return float(self.stable.value) <= self.algebraic + tol and self.algebraic <= self.upper + tol


def length_profile(action, g, R=3, N=16):
    st = stable_length_profile(action, g, N)
    alg, _, cert = algebraic_length(action, g, R)
    return LengthProfile(g, st, alg, R, cert, action.dist1(g))


# ------------------------------------------------------------ comparisons


def classes_up_to(action, L):
    """Conjugacy keys whose stable length under ``action`` is at most L.

    Uses |core| <= c * l(g) with c = action.length_bound() to bound the search.
    """
    c = action.length_bound()
    if c is None:
        raise GroupInputError("action gives no length bound for class enumeration")
    G = action.group
    cap = int(math.floor(c * L + 1e-9))
    out = []
    for key in enumerate_conjugacy_reps(G, cap):
        if float(stable_length_profile(action, key.canonical).value) <= L + 1e-9:
            out.append(key)
    return out


@dataclass
class ComparisonReport:
    description: dict
    classes: list = field(default_factory=list)
    max_gap: float = 0.0
    max_gap_witness: str = None
    witness: str = None
    witness_lengths: tuple = None
    equal: bool = True
    tolerance: float = 0.0
    C_profile: list = field(default_factory=list)
    dilation: dict = None

    def to_dict(self):
        return {
            "sample": self.description,
            "classes": self.classes,
            "max_gap": self.max_gap,
            "max_gap_witness": self.max_gap_witness,
            "witness": self.witness,
            "witness_lengths": list(self.witness_lengths) if self.witness_lengths else None,
            "equal": self.equal,
            "tolerance": self.tolerance,
            "C_profile": self.C_profile,
            "dilation": self.dilation,
        }


def _num(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def mls_compare(action1, action2, sample=None, L=None, N=16, tol=None):
    """Compare stable lengths class by class.

    ``witness`` is the first class (by l1, then canonical order) where the
    lengths differ; ``max_gap_witness`` attains the largest difference.
    """
    if sample is None:
        if L is None:
            raise GroupInputError("give a sample or a length bound L")
        sample = classes_up_to(action1, L)
        desc = {"classes_with_l1_at_most": L, "count": len(sample)}
    else:
        sample = [k if isinstance(k, ConjugacyKey) else conjugacy_key(k) for k in sample]
        desc = {"explicit_classes": len(sample)}
    rows = []
    any_estimate = False
    for key in sample:
        p1 = stable_length_profile(action1, key.canonical, N)
        p2 = stable_length_profile(action2, key.canonical, N)
        any_estimate |= not (p1.exact and p2.exact)
        rows.append((key, p1, p2))
    rows.sort(key=lambda r: (float(r[1].value), r[0].canonical.sort_key()))
    if tol is None:
        tol = 0.0 if not any_estimate else 2.0 / N
    rep = ComparisonReport(desc, tolerance=tol)
    for key, p1, p2 in rows:
        l1, l2 = p1.value, p2.value
        gap = abs(float(l1) - float(l2))
        rep.classes.append({"key": str(key.canonical), "l1": _num(l1), "l2": _num(l2),
                            "method1": p1.method, "method2": p2.method})
        if gap > rep.max_gap:
            rep.max_gap = gap
            rep.max_gap_witness = str(key.canonical)
        if gap > tol + 1e-12 and rep.witness is None:
            rep.witness = str(key.canonical)
            rep.witness_lengths = (_num(l1), _num(l2))
    rep.equal = rep.witness is None
    return rep


def _values_on_ball(action, R):
    """(elements or None, d values) over the ball of radius R under ``action``."""
    G = action.group
    c = action.length_bound()
    if c is None:
        raise GroupInputError("action gives no length bound for ball enumeration")
    radius = int(math.floor(c * R + 1e-9))
    if G.is_free:
        idx = tree_index(G, radius)
        return idx, action.tree_values(idx)
    ball = enumerate_ball(G, radius)
    return ball, action.dist1_many(ball)


def rough_isometry_certificate(action1, action2, lam1, lam2, R):
    """Least C(r) with lam1 d2 - C <= d1 <= lam2 d2 + C on the action1-ball r.

    By left-invariance it is enough to compare d1(1, g) and d2(1, g).
    """
    if R < 1:
        raise GroupInputError("R must be at least 1")
    holder, d1 = _values_on_ball(action1, R)
    if isinstance(holder, list):
        d2 = action2.dist1_many(holder)
    else:
        d2 = action2.tree_values(holder)
    excess = np.maximum(np.maximum(lam1 * d2 - d1, d1 - lam2 * d2), 0.0)
    profile = []
    for r in range(1, R + 1):
        mask = d1 <= r + 1e-9
        profile.append({"R": r, "C": _num(float(excess[mask].max()) if mask.any() else 0.0)})
    rep = ComparisonReport({"ball_under_action1": R, "lambda": [lam1, lam2]}, C_profile=profile)
    rep.max_gap = profile[-1]["C"]
    return rep


def dilation_bounds(action1, action2, L, N=16):
    """((Dil_-, witness), (Dil_+, witness)) over classes with 0 < l1 <= L."""
    keys = [k for k in classes_up_to(action1, L) if not k.canonical.is_identity()]
    if not keys:
        raise GroupInputError("empty class sample")
    lo = hi = None
    for key in keys:
        l1 = stable_length_profile(action1, key.canonical, N).value
        l2 = stable_length_profile(action2, key.canonical, N).value
        if l1 == 0:
            continue
        ratio = Fraction(l2) / Fraction(l1) if all(
            isinstance(v, (int, Fraction)) for v in (l1, l2)) else float(l2) / float(l1)
        if lo is None or ratio < lo[0]:
            lo = (ratio, str(key.canonical))
        if hi is None or ratio > hi[0]:
            hi = (ratio, str(key.canonical))
    return (_num(lo[0]), lo[1]), (_num(hi[0]), hi[1])


def coarse_additivity_check(metric, reference, r, R, max_pairs=None, seed=0):
    """Max |d(1, h) - d(1, f) - d(f, h)| over f near reference geodesics [1, h].

    h runs over the reference ball of radius R (left-invariance puts the
    first endpoint at the identity); f runs over group elements within
    reference distance r' of a geodesic vertex, for r' = 0..r.
    Returns {r': {"defect": ..., "error": ...}} where ``error`` is the summed
    truncation error bound (zero for exact metrics).
    """
    G = reference.group
    if isinstance(reference, WordMetric) and not reference.is_marking:
        hs = [GroupElement(G, w) for w in reference.ball(R)]
    else:
        hs = enumerate_ball(G, R)
    if max_pairs is not None and len(hs) > max_pairs:
        rng = np.random.default_rng(seed)
        pick = sorted(rng.choice(len(hs), size=max_pairs, replace=False).tolist())
        hs = [hs[i] for i in pick]
    measure = getattr(metric, "measure", None)

    def val(x):
        if measure is not None:
            v, e = measure(x)
            return v, e
        return float(metric.dist1(x)), 0.0

    near = [[GroupElement(G, ())]]
    for k in range(1, r + 1):
        if isinstance(reference, WordMetric) and not reference.is_marking:
            near.append([GroupElement(G, w) for w, d in reference.ball(k).items() if d == k])
        else:
            near.append(enumerate_sphere(G, k))
    out = {}
    for rr in range(r + 1):
        worst, err = 0.0, 0.0
        for h in hs:
            dh, eh = val(h)
            for v in geodesic(reference, G.identity, h).vertices:
                for off in near[rr]:
                    f = multiply(v, off)
                    df, ef = val(f)
                    dfh, efh = val(multiply(inverse(f), h))
                    defect = abs(dh - df - dfh)
                    if defect > worst:
                        worst, err = defect, eh + ef + efh
        out[rr] = {"defect": worst, "error": err}
    return out


@dataclass
class ConfinedVerdict:
    passed: bool
    radius: int
    witness: GroupElement = None
    checked: int = 0


def confined_check(H, P, R, group=None):
    """Check that every g in the ball R has p in P with g^-1 p g in H.

    ``H`` is a membership predicate on group elements.
    """
    P = list(P)
    if not P:
        raise GroupInputError("P must be nonempty")
    if any(p.is_identity() for p in P):
        raise GroupInputError("P must not contain the identity")
    G = group or P[0].group
    count = 0
    for g in enumerate_ball(G, R):
        count += 1
        gi = inverse(g)
        if not any(H(multiply(multiply(gi, p), g)) for p in P):
            return ConfinedVerdict(False, R, g, count)
    return ConfinedVerdict(True, R, None, count)
