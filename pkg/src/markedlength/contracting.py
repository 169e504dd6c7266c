"""Closest-point projections to cyclic axes and contraction audits.

Every verdict here is tied to a finite scope: the axis window W (exponents
|k| <= W) and the audit radius R.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GroupInputError, UnsupportedError, WindowExhaustedError
from .groups import GroupElement, cyclic_reduce, inverse, multiply, power, tree_index
from .metrics import WordMetric, distance_matrix, geodesic, metric_ball, mul_words
from .tree import ancestors, letter_to_code
from .tree import distance_matrix as tree_distance_matrix


@dataclass(frozen=True)
class ContractingAxis:
    """The orbit points offset * h^k for |k| <= window.

    With ``hull=True`` the marked geodesics joining consecutive orbit points
    are included, so the axis becomes a lattice path instead of a discrete
    orbit.
    """

    h: GroupElement
    window: int = 8
    offset: GroupElement = None
    C_hat: int = None
    gauge_samples: tuple = ()
    hull: bool = False

    def __post_init__(self):
        if self.h.is_identity():
            raise GroupInputError("the axis generator must have infinite order")
        if self.window < 1:
            raise GroupInputError("window must be at least 1")
        if self.offset is None:
            object.__setattr__(self, "offset", self.h.group.identity)

    @property
    def group(self):
        return self.h.group

    @property
    def exponents(self):
        if not self.hull:
            return list(range(-self.window, self.window + 1))
        out = []
        for k in range(-self.window, self.window):
            n = len(self._step_words(k)) - 1
            out += [k + i / n for i in range(n)]
        return out + [self.window]

    def _step_words(self, k):
        a, b = power(self.h, k), power(self.h, k + 1)
        return [v for v in geodesic(WordMetric(self.group), a, b).vertices]

    @property
    def points(self):
        if not self.hull:
            return [multiply(self.offset, power(self.h, k)) for k in self.exponents]
        out = []
        for k in range(-self.window, self.window):
            out += [multiply(self.offset, v) for v in self._step_words(k)[:-1]]
        return out + [multiply(self.offset, power(self.h, self.window))]

    def translate(self, w):
        return replace(self, offset=multiply(w, self.offset))

    def describe(self):
        return {"h": str(self.h), "offset": str(self.offset), "window": self.window,
                "hull": self.hull}


@dataclass(frozen=True)
class ProjectionResult:
    points: tuple
    distance: float
    indices: tuple = ()
    touches_edge: bool = False


def _axis_points(A):
    if isinstance(A, ContractingAxis):
        return A.points, A.exponents, True
    pts = list(A)
    if not pts:
        raise GroupInputError("empty projection target")
    return pts, list(range(len(pts))), False


def project(A, x, action, strict=False):
    """All nearest points of the window (or finite set) A to x."""
    pts, labels, is_axis = _axis_points(A)
    ds = [action.distance(x, p) for p in pts]
    m = min(ds)
    idx = [i for i, d in enumerate(ds) if d == m]
    touches = is_axis and (idx[0] == 0 or idx[-1] == len(pts) - 1)
    if touches:
        msg = f"projection of {x} touches the window edge of {A.describe()}"
        if strict:
            raise WindowExhaustedError(msg)
        warnings.warn(msg)
    return ProjectionResult(tuple(pts[i] for i in idx), m, tuple(labels[i] for i in idx), touches)


def proj_diameter(A, x, y, action, strict=False):
    px = project(A, x, action, strict).points
    py = project(A, y, action, strict).points
    union = list(dict.fromkeys(px + py))
    best = 0
    for i in range(len(union)):
        for j in range(i + 1, len(union)):
            best = max(best, action.distance(union[i], union[j]))
    return best


class _Scan:
    """Distances among ball points and to axis points, for repeated audits."""

    def __init__(self, axis, action, R):
        if not isinstance(action, WordMetric):
            raise UnsupportedError("audits need a word metric")
        G = action.group
        self.axis = axis
        self.action = action
        self.R = R
        self.tree = G.is_free and action.is_marking
        apts = axis.points
        self.apts = apts
        P = len(apts)
        if self.tree:
            idx = tree_index(G, R)
            self.index = idx
            n = idx.size
            self.pts = None
            self.D = tree_distance_matrix(idx)
            anc = ancestors(idx)
            depth = idx.depth.astype(np.int64)
            DA = np.empty((n, P), dtype=np.int64)
            for k, p in enumerate(apts):
                pid = np.full(R + 1, -1, dtype=np.int64)
                pid[0] = 0
                for t in range(1, min(R, len(p.word)) + 1):
                    pid[t] = idx.id_of([letter_to_code(y) for y in p.word[:t]])
                lcp = ((anc == pid[None, :]) & (pid[None, :] >= 0)).sum(axis=1) - 1
                DA[:, k] = depth + len(p.word) - 2 * lcp
            self.DA = DA
        else:
            pts = metric_ball(action, R)
            self.pts = pts
            self.D = distance_matrix(action, pts).astype(np.int64)
            self.DA = np.array([[action.distance(x, p) for p in apts] for x in pts], dtype=np.int64)
        self.n = len(self.D)
        self.AD = np.array([[action.distance(p, q) for q in apts] for p in apts], dtype=np.int64)
        self.dist = self.DA.min(axis=1)
        hit = self.DA == self.dist[:, None]
        if hit[:, 0].any() or hit[:, -1].any():
            raise WindowExhaustedError(
                f"window {axis.window} too small for audit radius {R} on axis {axis.h}")
        self.proj = [np.flatnonzero(row) for row in hit]
        self.mask = [int(sum(1 << int(i) for i in r)) for r in self.proj]
        self._diam = {}

    def element(self, i):
        if self.tree:
            return GroupElement(self.action.group, self.index.word(i))
        return self.pts[i]

    def mask_diam(self, m):
        d = self._diam.get(m)
        if d is None:
            idx = [i for i in range(len(self.apts)) if m >> i & 1]
            d = int(self.AD[np.ix_(idx, idx)].max())
            self._diam[m] = d
        return d

    def neighbours(self):
        if self.tree:
            return self.index.neighbours()
        G = self.action.group
        pos = {p.word: i for i, p in enumerate(self.pts)}
        out = np.full((self.n, len(self.action.moves)), -1, dtype=np.int64)
        for i, p in enumerate(self.pts):
            for j, t in enumerate(self.action.moves):
                out[i, j] = pos.get(mul_words(G, p.word, t), -1)
        return out


def _geodesic_walk(scan, start_filter=None, record=None):
    """Visit every lattice geodesic with both ends in the ball.

    Tree case: non-backtracking walks from every start.  Other word metrics:
    the BFS witness geodesic of every ordered pair.  ``record`` receives
    (start, end, min distance to axis, max distance to axis, projection mask).
    """
    n = scan.n
    dist = scan.dist
    mask = scan.mask
    if scan.tree:
        nb = scan.neighbours()
        for x in range(n):
            if start_filter is not None and not start_filter(x):
                continue
            stack = [(x, -1, int(dist[x]), int(dist[x]), mask[x])]
            while stack:
                v, prev, lo, hi, m = stack.pop()
                record(x, v, lo, hi, m)
                for u in nb[v]:
                    if u < 0 or u == prev:
                        continue
                    du = int(dist[u])
                    stack.append((int(u), v, min(lo, du), max(hi, du), m | mask[u]))
        return
    pos = {p.word: i for i, p in enumerate(scan.pts)}
    for x in range(n):
        if start_filter is not None and not start_filter(x):
            continue
        for y in range(n):
            path = geodesic(scan.action, scan.pts[x], scan.pts[y]).vertices
            lo, hi, m = None, None, 0
            inside = True
            for v in path:
                i = pos.get(v.word)
                if i is None:
                    inside = False
                    break
                d = int(dist[i])
                lo = d if lo is None else min(lo, d)
                hi = d if hi is None else max(hi, d)
                m |= mask[i]
            if inside:
                record(x, y, lo, hi, m)


@dataclass
class ContractionResult:
    C: int
    verdict: str
    radius: int
    window: int
    max_diam_by_distance: dict = field(default_factory=dict)
    geodesics: int = 0

    def to_dict(self):
        return {"C_hat": self.C, "verdict": self.verdict, "R": self.radius, "window": self.window,
                "max_diam_by_distance": {str(k): v for k, v in sorted(self.max_diam_by_distance.items())},
                "geodesics": self.geodesics}


def contraction_constant(A, action, R, scan=None):
    """Least integer C >= 1 for which the contracting condition holds in ball R.

    Every lattice geodesic with ends in the ball and distance >= C from the
    axis window must project to a set of diameter <= C.  Returns a
    ContractionResult whose ``C`` is None (verdict "not_contracting_at_scale")
    when no C <= R works.
    """
    scan = scan or _Scan(A, action, R)
    seen = set()
    count = [0]

    def record(x, v, lo, hi, m):
        count[0] += 1
        seen.add((lo, m))

    _geodesic_walk(scan, record=record)
    worst = {}
    for lo, m in seen:
        d = scan.mask_diam(m)
        if d > worst.get(lo, -1):
            worst[lo] = d
    C = None
    for c in range(1, R + 1):
        if all(d <= c for lo, d in worst.items() if lo >= c):
            C = c
            break
    verdict = "contracting_at_scale" if C is not None else "not_contracting_at_scale"
    return ContractionResult(C, verdict, R, A.window, worst, count[0])


def with_contraction(A, action, R):
    """Copy of the axis carrying its estimated constant and gauge samples."""
    res = contraction_constant(A, action, R)
    samples = tuple(sorted(res.max_diam_by_distance.items()))
    return replace(A, C_hat=res.C, gauge_samples=samples), res


@dataclass
class QuasiconvexityResult:
    excursion: int
    bound: int
    ok: bool
    pairs: int


def quasiconvexity_audit(A, action, R, C=None, scan=None):
    """Max distance to the axis along geodesics between points of N_C(axis)."""
    scan = scan or _Scan(A, action, R)
    if C is None:
        C = A.C_hat if A.C_hat is not None else contraction_constant(A, action, R, scan).C
    if C is None:
        raise GroupInputError("no contraction constant available")
    dist = scan.dist
    best = [0, 0]

    def record(x, v, lo, hi, m):
        if dist[v] <= C:
            best[1] += 1
            if hi > best[0]:
                best[0] = hi

    _geodesic_walk(scan, start_filter=lambda x: dist[x] <= C, record=record)
    return QuasiconvexityResult(best[0], 3 * C, best[0] <= 3 * C, best[1])


def lemma_audit(A, action, R, C=None):
    """Scan the projection lemmas over all x, y in the ball of radius R.

    Checks d_A(x, y) <= d(x, y) + 4C; d(o, x) >= d(o, a) + d(a, x) - 4C for
    window points o and a in pi(x); the thin quadrilateral inequality
    d(x, y) >= d(x, a) + d(a, b) + d(b, y) - 8C whenever d(a, b) > C; and
    quasiconvexity of N_C.  Returns counts and the first few violations.
    """
    scan = _Scan(A, action, R)
    if C is None:
        C = contraction_constant(A, action, R, scan).C
    if C is None:
        raise GroupInputError("axis is not contracting at this scale")
    n = scan.n
    D, DA, AD = scan.D, scan.DA, scan.AD
    viol = {"lipschitz": [], "geodesic_along_projection": [], "thin_quadrilateral": []}
    # projection diameters for all pairs, via the cached mask diameters
    masks = scan.mask
    for x in range(n):
        px = scan.proj[x]
        # geodesic along projection: every window point o
        for a in px:
            lhs = DA[x]
            rhs = AD[a] + DA[x, a] - 4 * C
            bad = np.flatnonzero(lhs < rhs)
            for o in bad[:3]:
                viol["geodesic_along_projection"].append(
                    (str(scan.element(x)), str(scan.apts[o]), str(scan.apts[a])))
        dA = np.array([scan.mask_diam(masks[x] | masks[y]) for y in range(n)])
        bad = np.flatnonzero(dA > D[x] + 4 * C)
        for y in bad[:3]:
            viol["lipschitz"].append((str(scan.element(x)), str(scan.element(int(y)))))
        for y in range(x, n):
            for a in px:
                for b in scan.proj[y]:
                    if AD[a, b] > C and D[x, y] < DA[x, a] + AD[a, b] + DA[y, b] - 8 * C:
                        viol["thin_quadrilateral"].append(
                            (str(scan.element(x)), str(scan.element(y))))
    qc = quasiconvexity_audit(A, action, R, C, scan)
    return {
        "axis": str(A.h), "window": A.window, "R": R, "C_hat": C, "points": n,
        "violations": {k: len(v) for k, v in viol.items()} | {"quasi_convex": 0 if qc.ok else 1},
        "examples": {k: v[:5] for k, v in viol.items()},
        "quasi_convex_excursion": qc.excursion,
    }


@dataclass
class WeakIndependence:
    independent: bool
    diameter: float
    witness: tuple
    scale: tuple

    def to_dict(self):
        return {"independent": self.independent, "diameter": self.diameter,
                "witness": list(self.witness) if self.witness else None,
                "scale": {"W": self.scale[0], "B": self.scale[1]}}


def weakly_independent(g, h, action, W=8, B=2):
    """Is diam pi_<g>({h^k : |k| <= W}) <= B?  Reported at scale (W, B).

    The window of <g> is chosen wide enough to contain the projections of all
    the sampled h^k (and is checked for edge contact).
    """
    if g.is_identity() or h.is_identity():
        raise GroupInputError("both elements need infinite order")
    core, _ = cyclic_reduce(g)
    Wg = W * (len(h.word) + 1) // max(1, len(core.word)) + W + 2
    axis = ContractingAxis(g, Wg)
    best, wit = 0, None
    projs = []
    for k in range(-W, W + 1):
        pr = project(axis, power(h, k), action, strict=True)
        projs.append((k, pr))
    for i, (k1, p1) in enumerate(projs):
        for k2, p2 in projs[i:]:
            for u in p1.points:
                for v in p2.points:
                    d = action.distance(u, v)
                    if d > best:
                        best, wit = d, (f"h^{k1}", f"h^{k2}")
    ok = best <= B
    return WeakIndependence(ok, best, None if ok else wit, (W, B))


@dataclass
class MembershipVerdict:
    verdict: str
    m: int
    certified: bool
    note: str = ""

    def __str__(self):
        return f"{self.verdict}({self.m})"


def elementary_membership(g, h, M=5):
    """Decide g h^m g^-1 = h^(+-m) for 1 <= m <= M by normal forms."""
    if h.is_identity():
        raise GroupInputError("h must have infinite order")
    if M < 1:
        raise GroupInputError("M must be at least 1")
    gi = inverse(g)
    for m in range(1, M + 1):
        hm = power(h, m)
        c = multiply(multiply(g, hm), gi)
        if c == hm:
            return MembershipVerdict("in_E_plus", m, True)
        if c == inverse(hm):
            return MembershipVerdict("in_E_minus", m, True)
    if g.group.is_free:
        return MembershipVerdict("not_in_E_up_to", M, True,
                                 "exact: centralizers in free groups are cyclic")
    return MembershipVerdict("not_in_E_up_to", M, False, "checked up to M only")


def elliptic_radical(group):
    """Largest finite normal subgroup: trivial for the supported families."""
    return [group.identity]
