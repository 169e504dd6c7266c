"""Left-invariant metrics on marked groups.

Every metric is defined through ``dist1(g) = d(1, g)`` and extended by
left-invariance, ``d(g, h) = d(1, g^-1 h)``.
"""

import itertools
import math
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (DegenerateError, DivergenceRiskError, GroupInputError, PrecisionError,
                     ResourceBudgetError, UnsupportedError)
from .groups import (GroupElement, _push, enumerate_ball, inverse, multiply, syllables,
                     tree_index, word_key)
from .tree import letter_to_code

DEFAULT_BFS_BUDGET = 3_000_000


def mul_words(group, u, v):
    """Normal-form product of two normal-form words (tuples)."""
    if group.is_free:
        k = 0
        m = min(len(u), len(v))
        while k < m and u[-1 - k] == -v[k]:
            k += 1
        return u[:len(u) - k] + v[k:]
    out = list(u)
    for x in v:
        _push(group, out, x)
    return tuple(out)


def common_prefix(u, v):
    k = 0
    m = min(len(u), len(v))
    while k < m and u[k] == v[k]:
        k += 1
    return k


@dataclass(frozen=True)
class GeodesicWitness:
    vertices: tuple
    steps: tuple

    def __len__(self):
        return len(self.vertices)


class MetricAction:
    """Base class: a left-invariant pseudo-metric with identity basepoint."""

    kind = "abstract"
    integer_valued = False

    def __init__(self, group):
        self.group = group

    def dist1(self, g):
        raise NotImplementedError

    def distance(self, g, h):
        if g == h:
            return 0
        return self.dist1(multiply(inverse(g), h))

    def dist1_many(self, elements):
        return np.array([self.dist1(g) for g in elements], dtype=float)

    def tree_values(self, index):
        """d(1, v) for every vertex of a free-group tree index."""
        G = self.group
        return np.array([self.dist1(GroupElement(G, index.word(v))) for v in range(index.size)],
                        dtype=float)

    def marking_scale(self):
        """c when d(1, g) = c * |g| exactly, else None."""
        return None

    def length_bound(self):
        """c with |g| <= c * d(1, g) for all g, or None if unknown."""
        return None

    def describe(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class WordMetric(MetricAction):
    """Word metric of a finite generating set (the marking by default).

    BFS neighbours are expanded in generator order, each generator followed by
    its inverse; the first geodesic found wins.
    """

    kind = "word"
    integer_valued = True

    def __init__(self, group, generators=None, budget=DEFAULT_BFS_BUDGET):
        super().__init__(group)
        if generators is None:
            generators = group.generators()
        gens = []
        for s in generators:
            if isinstance(s, str):
                s = group.parse(s)
            if s.group != group:
                raise GroupInputError("generator from a different group")
            if s.is_identity():
                raise GroupInputError("the identity is not allowed as a generator")
            gens.append(s)
        if not gens:
            raise GroupInputError("empty generating set")
        self.generators = tuple(gens)
        moves = []
        for s in gens:
            for t in (s.word, inverse(s).word):
                if t not in moves:
                    moves.append(t)
        self.moves = tuple(moves)
        self.budget = budget
        letters = {(x,) for x in group.alphabet}
        self.is_marking = set(moves) == letters
        self.max_generator_length = max(len(t) for t in moves)
        self._ball = {(): 0}
        self._ball_parent = {(): None}
        self._ball_frontier = [()]
        self._ball_radius = 0
        self._tree_cache = {}
        if self.is_marking:
            self.letter_lengths = {x: 1 for x in group.alphabet}
        else:
            self.letter_lengths = self._letter_lengths()
        lam = max(self.letter_lengths.values())
        K = self.max_generator_length
        self.morse = int(math.floor(lam * (K - 1))) * K

    def describe(self):
        gens = [str(s) for s in self.generators]
        return {"kind": "word", "generators": gens}

    def marking_scale(self):
        return 1 if self.is_marking else None

    def length_bound(self):
        return self.max_generator_length

    # global BFS over the Cayley graph, grown on demand
    def _grow(self):
        G = self.group
        nxt = []
        d = self._ball_radius + 1
        ball, parent = self._ball, self._ball_parent
        for w in self._ball_frontier:
            for t in self.moves:
                v = mul_words(G, w, t)
                if v not in ball:
                    ball[v] = d
                    parent[v] = (w, t)
                    nxt.append(v)
        if len(ball) > self.budget:
            raise ResourceBudgetError(f"word-metric ball exceeds budget {self.budget}")
        self._ball_frontier = nxt
        self._ball_radius = d
        return bool(nxt)

    def ball(self, R):
        """Dict word -> distance for the ball of radius R of this metric."""
        while self._ball_radius < R:
            if not self._grow():
                break
        return {w: d for w, d in self._ball.items() if d <= R}

    def sphere_counts(self, R):
        self.ball(R)
        counts = [0] * (R + 1)
        for d in self._ball.values():
            if d <= R:
                counts[d] += 1
        return counts

    def _letter_lengths(self, max_radius=12):
        want = set(self.group.alphabet)
        out = {}
        while True:
            for x in list(want):
                if (x,) in self._ball:
                    out[x] = self._ball[(x,)]
                    want.discard(x)
            if not want:
                return out
            if self._ball_radius >= max_radius or not self._grow():
                raise GroupInputError("generating set does not reach every marking letter")

    def _bfs_path(self, word):
        """Geodesic word path from the identity in the global ball."""
        while word not in self._ball:
            if not self._grow():
                raise GroupInputError("element not reachable")
        out = [word]
        while self._ball_parent[out[-1]] is not None:
            out.append(self._ball_parent[out[-1]][0])
        return out[::-1]

    def _restricted_bfs(self, target, want_path=False):
        """BFS inside the M-neighbourhood of the tree geodesic [1, target]."""
        if not target:
            return (0, [()]) if want_path else 0
        G = self.group
        M = self.morse
        dist = {(): 0}
        parent = {(): None}
        frontier = [()]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for w in frontier:
                for t in self.moves:
                    v = mul_words(G, w, t)
                    if v in dist or len(v) - common_prefix(v, target) > M:
                        continue
                    dist[v] = d
                    parent[v] = w
                    if v == target:
                        if not want_path:
                            return d
                        path = [v]
                        while parent[path[-1]] is not None:
                            path.append(parent[path[-1]])
                        return d, path[::-1]
                    nxt.append(v)
            frontier = nxt
        raise GroupInputError("element not reachable by the generating set")

    def dist1(self, g):
        if self.is_marking:
            return len(g.word)
        if self.group.is_free:
            return self._restricted_bfs(g.word)
        w = g.word
        while w not in self._ball:
            if not self._grow():
                raise GroupInputError("element not reachable")
        return self._ball[w]

    def tree_values(self, index):
        if self.is_marking:
            return index.depth[:index.size].astype(float)
        key = index.radius
        if key not in self._tree_cache:
            big = tree_index(self.group, index.radius + self.morse, budget=40_000_000)
            nbrs = []
            allids = np.arange(big.size, dtype=np.int32)
            for t in self.moves:
                nbrs.append(big.move_word(allids, [letter_to_code(x) for x in t]))
            dist = np.full(big.size, -1, dtype=np.int32)
            dist[0] = 0
            frontier = np.array([0], dtype=np.int32)
            d = 0
            while frontier.size:
                d += 1
                cand = np.concatenate([nb[frontier] for nb in nbrs])
                cand = cand[cand >= 0]
                cand = np.unique(cand[dist[cand] < 0])
                dist[cand] = d
                frontier = cand
            self._tree_cache = {key: dist[:index.size].astype(float)}
        return self._tree_cache[key]

    def geodesic_words(self, word):
        """Vertex words of a geodesic from the identity to ``word``."""
        if self.is_marking:
            if self.group.is_free:
                return [word[:i] for i in range(len(word) + 1)]
            out, cur = [()], []
            for x in word:
                _push(self.group, cur, x)
                out.append(tuple(cur))
            return out
        if self.group.is_free:
            return self._restricted_bfs(word, want_path=True)[1]
        return self._bfs_path(word)


class ScaledMetric(MetricAction):
    kind = "scaled"

    def __init__(self, base, factor):
        super().__init__(base.group)
        if not factor > 0:
            raise GroupInputError("scale factor must be positive")
        self.base = base
        self.factor = factor
        self.integer_valued = base.integer_valued and float(factor).is_integer()

    def describe(self):
        return {"kind": "scaled", "factor": self.factor, "base": self.base.describe()}

    def dist1(self, g):
        v = self.factor * self.base.dist1(g)
        return int(v) if self.integer_valued else v

    def tree_values(self, index):
        return self.factor * self.base.tree_values(index)

    def marking_scale(self):
        c = self.base.marking_scale()
        return None if c is None else self.factor * c

    def length_bound(self):
        c = self.base.length_bound()
        return None if c is None else c / self.factor


class CombinedMetric(MetricAction):
    """Weighted sum of metrics, d = sum_i c_i d_i with c_i >= 0."""

    kind = "combination"

    def __init__(self, terms):
        terms = [(float(c), m) for c, m in terms if c != 0]
        if not terms:
            raise GroupInputError("a combination needs a nonzero term")
        if any(c < 0 for c, _ in terms):
            raise GroupInputError("combination weights must be nonnegative")
        super().__init__(terms[0][1].group)
        self.terms = terms

    def describe(self):
        return {"kind": "combination", "terms": [[c, m.describe()] for c, m in self.terms]}

    def dist1(self, g):
        return sum(c * m.dist1(g) for c, m in self.terms)

    def tree_values(self, index):
        return sum(c * m.tree_values(index) for c, m in self.terms)

    def marking_scale(self):
        scales = [m.marking_scale() for _, m in self.terms]
        if any(s is None for s in scales):
            return None
        return sum(c * s for (c, _), s in zip(self.terms, scales))

    def length_bound(self):
        inv = 0.0
        for c, m in self.terms:
            b = m.length_bound()
            if b is not None:
                inv += c / b
        return None if inv == 0 else 1.0 / inv


class FreeProductMetric(MetricAction):
    """Sum over normal-form syllables of a per-factor metric."""

    kind = "free_product_composite"

    def __init__(self, group, factor_metrics):
        super().__init__(group)
        factor_metrics = list(factor_metrics)
        if group.kind != "free_product":
            raise GroupInputError("composite metrics need a free-product group")
        if len(factor_metrics) != len(group.factors):
            raise GroupInputError(
                f"{len(group.factors)} factors but {len(factor_metrics)} factor metrics")
        self.local = []
        for i, m in enumerate(factor_metrics):
            fg = group.factor_group(i)
            if m.group != fg:
                raise GroupInputError(f"metric {i} is not defined on factor {i}")
            gens = group.factor_generators(i)
            self.local.append({g: j + 1 for j, g in enumerate(gens)})
        self.factor_metrics = factor_metrics
        self.integer_valued = all(m.integer_valued for m in factor_metrics)

    def describe(self):
        return {"kind": "free_product_composite",
                "factors": [m.describe() for m in self.factor_metrics]}

    def syllable_pieces(self, g):
        out = []
        for syl in syllables(g):
            i = self.group.factor_of(syl[0])
            loc = self.local[i]
            word = [loc[abs(x)] * (1 if x > 0 else -1) for x in syl]
            out.append((i, GroupElement(self.factor_metrics[i].group, word)))
        return out

    def dist1(self, g):
        return sum(self.factor_metrics[i].dist1(h) for i, h in self.syllable_pieces(g))

    def marking_scale(self):
        scales = {m.marking_scale() for m in self.factor_metrics}
        if len(scales) == 1 and None not in scales:
            return scales.pop()
        return None

    def length_bound(self):
        bounds = [m.length_bound() for m in self.factor_metrics]
        return None if None in bounds else max(bounds)


def free_product_distance(factor_metrics, g):
    return FreeProductMetric(g.group, factor_metrics).dist1(g)


def distance(A, g, h):
    return A.distance(g, h)


def geodesic(A, g, h):
    """Lattice geodesic from g to h for word metrics."""
    if not isinstance(A, WordMetric):
        raise UnsupportedError("geodesics are available for word metrics only")
    G = A.group
    rel = multiply(inverse(g), h)
    words = A.geodesic_words(rel.word)
    verts = tuple(multiply(g, GroupElement(G, w)) for w in words)
    return GeodesicWitness(verts, tuple(1 for _ in range(len(verts) - 1)))


def gromov_product(A, x, y, base):
    return 0.5 * (A.distance(base, x) + A.distance(base, y) - A.distance(x, y))


# ---------------------------------------------------------------- balls


def metric_ball(A, R):
    """Elements at distance <= R from the identity under a word metric."""
    if not isinstance(A, WordMetric):
        raise UnsupportedError("metric balls are enumerated for word metrics")
    G = A.group
    items = sorted(A.ball(R).items(), key=lambda kv: (kv[1], len(kv[0]), word_key(kv[0])))
    return [GroupElement(G, w) for w, _ in items]


def distance_matrix(A, points):
    """Pairwise distances, computed through left-invariance."""
    n = len(points)
    D = np.zeros((n, n))
    cache = {}
    invs = [inverse(p) for p in points]
    for i in range(n):
        for j in range(i + 1, n):
            rel = multiply(invs[i], points[j])
            v = cache.get(rel.word)
            if v is None:
                v = A.dist1(rel)
                cache[rel.word] = v
            D[i, j] = D[j, i] = v
    return D


def delta_from_matrix(D, rows=None):
    """Least delta for the four-point condition over the given base points."""
    n = len(D)
    best = 0.0
    for w in (range(n) if rows is None else rows):
        gp = 0.5 * (D[w][:, None] + D[w][None, :] - D)
        for z in range(n):
            m = np.minimum(gp[:, z][:, None], gp[z, :][None, :])
            best = max(best, float((m - gp).max()))
    return 2.0 * best


@dataclass
class DeltaEstimate:
    delta: float
    radius: int
    points: int
    exhaustive: bool
    samples: int

    def __float__(self):
        return self.delta


def delta_estimate(A, R, max_points=220, samples=None, seed=0):
    """Four-point hyperbolicity constant over the ball of radius R.

    Exhaustive for R <= 4 when the ball has at most ``max_points`` elements;
    otherwise base points w are drawn at random and the sample size is
    reported.
    """
    pts = metric_ball(A, R)
    D = distance_matrix(A, pts)
    n = len(pts)
    if R <= 4 and n <= max_points:
        return DeltaEstimate(delta_from_matrix(D), R, n, True, n)
    rng = np.random.default_rng(seed)
    k = samples or min(n, 64)
    rows = sorted(rng.choice(n, size=min(k, n), replace=False).tolist())
    return DeltaEstimate(delta_from_matrix(D, rows), R, n, False, len(rows))


def _letter_symmetries(A, pts):
    """Index permutations of ``pts`` induced by signed permutations of the
    generators, for the marking of a free group (unique geodesics, so the
    chosen midpoints are carried along).  Otherwise only the identity."""
    n = len(pts)
    ident = [np.arange(n)]
    G = A.group
    if not (G.is_free and A.is_marking):
        return ident
    index = {p.word: i for i, p in enumerate(pts)}
    r = G.rank
    out = []
    for perm in itertools.permutations(range(1, r + 1)):
        for signs in itertools.product((1, -1), repeat=r):
            table = {}
            for k, (img, sg) in enumerate(zip(perm, signs), start=1):
                table[k], table[-k] = sg * img, -sg * img
            out.append(np.array([index[tuple(table[x] for x in p.word)] for p in pts]))
    return out


def midpoint_convexity_audit(A, R, max_pairs=None, seed=0):
    """Least C with d(m1, m2) <= (d(x1, x2) + d(y1, y2)) / 2 + C.

    Segments are lattice geodesics [x, y] between points of the ball R and
    midpoints are the vertices at distance floor(d(x, y)/2) from x.  All
    quadruples are scanned (first segments up to letter symmetries when
    geodesics are unique) unless ``max_pairs`` caps the number of first
    segments, which are then drawn at random.
    """
    if not isinstance(A, WordMetric):
        raise UnsupportedError("midpoint audit needs geodesics")
    pts = metric_ball(A, R)
    n = len(pts)
    index = {p.word: i for i, p in enumerate(pts)}
    D = distance_matrix(A, pts)
    mid = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i == j:
                mid[i, j] = i
                continue
            path = geodesic(A, pts[i], pts[j]).vertices
            m = path[(len(path) - 1) // 2]
            k = index.get(m.word)
            if k is None:
                pts.append(m)
                index[m.word] = k = len(pts) - 1
            mid[i, j] = k
    if len(pts) > n:
        D = distance_matrix(A, pts)
    # integer metrics are compared exactly as 2 d(m1, m2) - d(x1, x2) - d(y1, y2)
    if A.integer_valued:
        W, Dn = 2 * D.astype(np.int32), D[:n, :n].astype(np.int32)
    else:
        W, Dn = 2 * D, D[:n, :n]
    # first segments up to symmetry: keep (i, j) when it is the least code in its orbit
    code = np.arange(n)[:, None] * n + np.arange(n)[None, :]
    least = code.copy()
    for perm in _letter_symmetries(A, pts[:n]):
        least = np.minimum(least, perm[:, None] * n + perm[None, :])
    ii, jj = np.nonzero(least == code)
    exhaustive = True
    if max_pairs is not None and len(ii) > max_pairs:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(len(ii), size=max_pairs, replace=False))
        ii, jj = ii[pick], jj[pick]
        exhaustive = False
    worst = -np.inf
    order = np.argsort(mid[ii, jj], kind="stable")
    ii, jj = ii[order], jj[order]
    ms = mid[ii, jj]
    row = None
    for t in range(len(ii)):
        if t == 0 or ms[t] != ms[t - 1]:
            row = W[ms[t]][mid]
        i, j = ii[t], jj[t]
        excess = row - (Dn[i][:, None] + Dn[j][None, :])
        worst = max(worst, float(excess.max()) / 2.0)
    return {"C": max(0.0, worst), "radius": R, "points": n,
            "first_segments": int(len(ii)), "exhaustive": exhaustive}


def bilipschitz_audit(A1, A2, R):
    """Observed ratios of two word metrics on the marked ball of radius R.

    Also returns the a-priori constants from the generator translation table:
    d2 <= (max_s d2(s)) d1 and d1 <= (max_t d1(t)) d2.
    """
    G = A1.group
    ball = [g for g in enumerate_ball(G, R) if not g.is_identity()]
    d1 = A1.dist1_many(ball)
    d2 = A2.dist1_many(ball)
    up = max(A2.dist1(GroupElement(G, t)) for t in A1.moves) if isinstance(A1, WordMetric) else None
    down = max(A1.dist1(GroupElement(G, t)) for t in A2.moves) if isinstance(A2, WordMetric) else None
    return {"radius": R, "max_d2_over_d1": float((d2 / d1).max()),
            "max_d1_over_d2": float((d1 / d2).max()),
            "table_d2_over_d1": up, "table_d1_over_d2": down}


# ----------------------------------------------------------- random walks


class RandomWalkMeasure:
    """Finitely supported probability measure on a marked group."""

    def __init__(self, support, symmetric=None, check_generation=True):
        items = []
        for g, p in support:
            if p <= 0:
                raise GroupInputError("probabilities must be positive")
            items.append((g, p))
        if not items:
            raise GroupInputError("empty support")
        self.group = items[0][0].group
        merged = {}
        for g, p in items:
            if g.group != self.group:
                raise GroupInputError("support elements from different groups")
            merged[g] = merged.get(g, 0) + p
        total = sum(merged.values())
        if abs(float(total) - 1.0) > 1e-12:
            raise GroupInputError(f"probabilities sum to {float(total)}, not 1")
        self.support = tuple(sorted(merged.items(), key=lambda kv: kv[0].sort_key()))
        self.mass = dict(self.support)
        sym = all(abs(float(p) - float(self.mass.get(inverse(g), 0))) <= 1e-15
                  for g, p in self.support)
        if symmetric and not sym:
            raise GroupInputError("measure flagged symmetric but support is not symmetric")
        self.symmetric = sym
        if check_generation:
            self._check_generation()

    @classmethod
    def uniform(cls, group, elements=None):
        if elements is None:
            elements = [GroupElement(group, (x,)) for x in group.alphabet]
        p = Fraction(1, len(elements))
        return cls([(g, p) for g in elements])

    def _check_generation(self, max_radius=8, budget=200_000):
        G = self.group
        want = {(x,) for x in G.alphabet}
        steps = [g.word for g, _ in self.support]
        seen = {()}
        frontier = [()]
        for _ in range(max_radius):
            nxt = []
            for w in frontier:
                for t in steps:
                    v = mul_words(G, w, t)
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
            if want <= seen:
                return
            if len(seen) > budget or not frontier:
                break
        raise GroupInputError("support does not generate the group (within the search radius)")

    @property
    def nearest_neighbour(self):
        return self.group.is_free and all(len(g.word) == 1 for g, _ in self.support)

    def describe(self):
        return {"support": [[str(g), float(p)] for g, p in self.support]}


def convolution_power(mu, n, exact=False, budget=2_000_000):
    """Dict GroupElement -> probability of the n-fold convolution."""
    if n < 0:
        raise GroupInputError("n must be nonnegative")
    G = mu.group
    conv = (lambda p: Fraction(p).limit_denominator(10 ** 15)) if exact else float
    steps = [(g.word, conv(p)) for g, p in mu.support]
    cur = {(): Fraction(1) if exact else 1.0}
    for _ in range(n):
        nxt = {}
        for w, p in cur.items():
            for t, q in steps:
                v = mul_words(G, w, t)
                nxt[v] = nxt.get(v, 0) + p * q
        if len(nxt) > budget:
            raise ResourceBudgetError(f"convolution support exceeds budget {budget}")
        cur = nxt
    return {GroupElement(G, w): p for w, p in sorted(cur.items(), key=lambda kv: (len(kv[0]), word_key(kv[0])))}


def convolution_powers(mu, N, budget=2_000_000):
    """[mu^{*n} for n = 0..N] as dicts GroupElement -> float."""
    G = mu.group
    steps = [(g.word, float(p)) for g, p in mu.support]
    cur = {(): 1.0}
    out = [{G.identity: 1.0}]
    for _ in range(N):
        nxt = {}
        for w, p in cur.items():
            for t, q in steps:
                v = mul_words(G, w, t)
                nxt[v] = nxt.get(v, 0.0) + p * q
        if len(nxt) > budget:
            raise ResourceBudgetError(f"convolution support exceeds budget {budget}")
        cur = nxt
        out.append({GroupElement(G, w): p for w, p in cur.items()})
    return out


def _series_mul(a, b, N):
    return np.convolve(a, b)[:N + 1]


class _FirstPassage:
    """Truncated first-passage generating functions of a nearest-neighbour walk.

    For each letter y, F_y(z) = sum_n P(first visit to y at step n) z^n solves
    F_y = z mu(y) + z * sum_{w != y} mu(w) F_{w^-1} F_y, and the return series
    is G(1, 1) = 1 / (1 - sum_y z mu(y) F_{y^-1}).  Coefficients up to degree N
    are exact.
    """

    def __init__(self, mu, N):
        G = mu.group
        letters = G.alphabet
        m = {x: float(mu.mass.get(GroupElement(G, (x,)), 0.0)) for x in letters}
        F = {x: np.zeros(N + 1) for x in letters}
        z = np.zeros(N + 1)
        if N >= 1:
            z[1] = 1.0
        for _ in range(N + 1):
            new = {}
            for y in letters:
                acc = np.zeros(N + 1)
                for w in letters:
                    if w != y and m[w] > 0:
                        acc += m[w] * F[-w]
                rhs = m[y] * z + _series_mul(z, _series_mul(acc, F[y], N), N)
                new[y] = rhs
            F = new
        U = np.zeros(N + 1)
        for y in letters:
            U += m[y] * _series_mul(z, F[-y], N)
        g11 = np.zeros(N + 1)
        g11[0] = 1.0
        power = g11.copy()
        for _ in range(N):
            power = _series_mul(power, U, N)
            g11 = g11 + power
        self.N = N
        self.F = F
        self.G11 = g11

    def green_coefficients(self, word):
        out = self.G11.copy()
        for x in word:
            out = _series_mul(out, self.F[x], self.N)
        return out


_FP_CACHE = {}


def _first_passage(mu, N):
    key = (id(mu), N)
    if key not in _FP_CACHE:
        _FP_CACHE[key] = (mu, _FirstPassage(mu, N))
    return _FP_CACHE[key][1]


def return_probabilities(mu, N, budget=2_000_000):
    """[mu^{*n}(1) for n = 0..N] as floats."""
    if mu.nearest_neighbour:
        return list(_first_passage(mu, N).G11)
    G = mu.group
    steps = [(g.word, float(p)) for g, p in mu.support]
    cur = {(): 1.0}
    out = [1.0]
    for _ in range(N):
        nxt = {}
        for w, p in cur.items():
            for t, q in steps:
                v = mul_words(G, w, t)
                nxt[v] = nxt.get(v, 0.0) + p * q
        if len(nxt) > budget:
            raise ResourceBudgetError(f"convolution support exceeds budget {budget}")
        cur = nxt
        out.append(cur.get((), 0.0))
    return out


SpectralEstimate = namedtuple("SpectralEstimate", "value root_estimate ratio_estimate horizon")


def spectral_radius_report(mu, N):
    """Two lower bounds for the spectral radius and their maximum.

    For symmetric mu the even return probabilities p_{2n} are the moments of a
    measure on [0, rho^2], so both max_n p_{2n}^{1/2n} and the increasing
    ratios sqrt(p_{2n}/p_{2n-2}) stay below rho.
    """
    if not mu.symmetric:
        raise GroupInputError("spectral radius estimate needs a symmetric measure")
    if N < 2 or N % 2:
        raise GroupInputError("N must be even and at least 2")
    p = return_probabilities(mu, N)
    roots = [p[n] ** (1.0 / n) for n in range(2, N + 1, 2) if p[n] > 0]
    if not roots:
        raise DegenerateError(f"no return mass at even times up to {N}")
    ratios = [math.sqrt(p[n] / p[n - 2]) for n in range(4, N + 1, 2) if p[n] > 0 and p[n - 2] > 0]
    root = max(roots)
    ratio = max(ratios) if ratios else 0.0
    return SpectralEstimate(max(root, ratio), root, ratio, N)


def spectral_radius_estimate(mu, N):
    return spectral_radius_report(mu, N).value


def _tail_bound(mu, r, N):
    rho = spectral_radius_estimate(mu, max(4, N + (N % 2)))
    q = rho * r
    if q >= 1:
        raise DivergenceRiskError(f"r * rho_hat = {q:.6f} >= 1")
    return q ** (N + 1) / (1 - q)


def green_function(mu, r, x, N):
    """(partial sum of mu^{*n}(x) r^n over n <= N, geometric tail bound)."""
    if r < 1:
        raise GroupInputError("r must be at least 1")
    if N < 0:
        raise GroupInputError("N must be nonnegative")
    tail = _tail_bound(mu, r, N)
    powers = r ** np.arange(N + 1)
    if mu.nearest_neighbour:
        coeffs = _first_passage(mu, N).green_coefficients(x.word)
    else:
        coeffs = np.array([float(d.get(x, 0.0)) for d in convolution_powers(mu, N)])
    return float(coeffs @ powers), tail


GreenDistance = namedtuple("GreenDistance", "value error")


class GreenMetric(MetricAction):
    """Green metric -log(G_r(1, g) / G_r(1, 1)) of a symmetric random walk.

    For nearest-neighbour walks on free groups the ratio is the product of the
    first-passage functions F_y(r) over the letters of g, which makes the
    truncated metric an exact weighted tree metric.  Other measures use the
    partial sums of convolution powers.
    """

    kind = "green"

    def __init__(self, mu, r=1.0, N=40, tail_tol=1e-9):
        super().__init__(mu.group)
        if not mu.symmetric:
            raise GroupInputError("green metrics need a symmetric measure")
        if r < 1:
            raise GroupInputError("r must be at least 1")
        self.mu = mu
        self.r = r
        self.N = N
        self.tail_tol = tail_tol
        self.tail = _tail_bound(mu, r, N)
        powers = r ** np.arange(N + 1)
        self._weights = None
        if mu.nearest_neighbour:
            fp = _first_passage(mu, N)
            self._weights = {}
            for x, series in fp.F.items():
                val = float(series @ powers)
                if val <= 0:
                    raise PrecisionError(f"letter {x} unreachable within {N} steps; increase N")
                self._weights[x] = (-math.log(val), math.log1p(self.tail / val))
            self._g11 = float(fp.G11 @ powers)
        else:
            self._powers = powers
            self._dists = convolution_powers(mu, N)
            self._g11 = float(sum(float(d.get(self.group.identity, 0.0)) * powers[n]
                                  for n, d in enumerate(self._dists)))

    def describe(self):
        return {"kind": "green", "r": self.r, "N": self.N, "measure": self.mu.describe()}

    def measure(self, g):
        """GreenDistance(value, error bound) for d(1, g)."""
        if g.is_identity():
            return GreenDistance(0.0, 0.0)
        if self._weights is not None:
            val = sum(self._weights[x][0] for x in g.word)
            err = sum(self._weights[x][1] for x in g.word)
            return GreenDistance(val, err)
        gx = float(sum(float(d.get(g, 0.0)) * self._powers[n] for n, d in enumerate(self._dists)))
        if gx <= 0:
            raise PrecisionError(f"{g} unreachable within {self.N} steps; increase N")
        val = -math.log(gx / self._g11)
        err = math.log1p(self.tail / gx) + math.log1p(self.tail / self._g11)
        return GreenDistance(val, err)

    def dist1(self, g):
        val, err = self.measure(g)
        if err > self.tail_tol:
            raise PrecisionError(
                f"truncation error bound {err:.3e} exceeds tolerance {self.tail_tol:.1e}; increase N")
        return val

    def tree_values(self, index):
        if self._weights is None:
            return super().tree_values(index)
        w = np.zeros(2 * self.group.rank)
        for x, (val, _) in self._weights.items():
            w[letter_to_code(x)] = val
        out = np.zeros(index.size)
        for n in range(1, index.radius + 1):
            ids = index.sphere_ids(n)
            out[ids] = out[index.parent[ids]] + w[index.last[ids]]
        return out

    def marking_scale(self):
        if self._weights is None:
            return None
        vals = {round(v, 15) for v, _ in self._weights.values()}
        return vals.pop() if len(vals) == 1 else None


def green_distance(mu, r, x, y, N, tail_tol=math.inf):
    """GreenDistance(value, error) for d_{r, mu}(x, y) at truncation N."""
    A = GreenMetric(mu, r, N, tail_tol)
    return A.measure(multiply(inverse(x), y))
