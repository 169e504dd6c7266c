"""Growth rates, Poincare series and Manhattan curve estimates.

Annuli are always taken with respect to the first action:
A1(n, L) = {g : |d1(1, g) - n| <= L}, and the conjugacy version uses the
stable length l1 instead of d1.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateError, GroupInputError
from .groups import GroupElement, cyclic_reduce, enumerate_ball, tree_index
from .metrics import CombinedMetric, WordMetric
from .mls import classes_up_to, mls_compare, rough_isometry_certificate, stable_length_profile


# ------------------------------------------------------------ data access


def orbit_values(action1, action2, radius, predicate=None):
    """(d1, d2) arrays over all g with d1(1, g) <= radius (d2 may be None)."""
    G = action1.group
    if isinstance(action1, WordMetric) and not action1.is_marking:
        ball = action1.ball(int(math.floor(radius)))
        elems = [GroupElement(G, w) for w in ball]
        d1 = np.fromiter(ball.values(), dtype=float, count=len(ball))
        if predicate is not None:
            keep = np.array([bool(predicate(g)) for g in elems], dtype=bool)
            elems = [g for g, k in zip(elems, keep) if k]
            d1 = d1[keep]
        d2 = None if action2 is None else action2.dist1_many(elems)
        return d1, d2
    c = action1.length_bound()
    if c is None:
        raise GroupInputError("first action gives no length bound")
    marked = int(math.floor(c * radius + 1e-9))
    if G.is_free:
        idx = tree_index(G, marked)
        d1 = action1.tree_values(idx)
        keep = d1 <= radius + 1e-9
        if predicate is not None:
            ids = np.flatnonzero(keep)
            ok = np.array([bool(predicate(GroupElement(G, idx.word(int(v))))) for v in ids],
                          dtype=bool)
            keep = np.zeros_like(keep)
            keep[ids[ok]] = True
        d2 = None if action2 is None else action2.tree_values(idx)[keep]
        return d1[keep], d2
    elems = enumerate_ball(G, marked)
    if predicate is not None:
        elems = [g for g in elems if predicate(g)]
    d1 = action1.dist1_many(elems)
    keep = d1 <= radius + 1e-9
    elems = [g for g, k in zip(elems, keep) if k]
    d2 = None if action2 is None else action2.dist1_many(elems)
    return d1[keep], d2


_CLASS_CACHE = {}


def class_values(action1, action2, radius, predicate=None):
    """(l1, l2) arrays over conjugacy classes with l1 <= radius.

    With a predicate, a class is kept when some cyclic permutation of its
    cyclically reduced representative satisfies it.
    """
    key = (id(action1), radius)
    if key not in _CLASS_CACHE:
        keys = classes_up_to(action1, radius)
        l1 = np.array([float(stable_length_profile(action1, k.canonical).value) for k in keys])
        _CLASS_CACHE[key] = (action1, keys, l1)
    _, keys, l1 = _CLASS_CACHE[key]
    if predicate is not None:
        keep = np.array([_class_meets(k.canonical, predicate) for k in keys], dtype=bool)
        keys = [k for k, ok in zip(keys, keep) if ok]
        l1 = l1[keep]
    if action2 is None:
        return l1, None
    k2 = (id(action1), id(action2), radius)
    if k2 not in _CLASS_CACHE:
        allkeys = _CLASS_CACHE[key][1]
        _CLASS_CACHE[k2] = (action2, {k.canonical.word: float(stable_length_profile(action2, k.canonical).value)
                                      for k in allkeys})
    table = _CLASS_CACHE[k2][1]
    l2 = np.array([table[k.canonical.word] for k in keys])
    return l1, l2


def _class_meets(g, predicate):
    core, _ = cyclic_reduce(g)
    w = core.word
    if not w:
        return bool(predicate(g))
    G = g.group
    return any(predicate(GroupElement(G, w[i:] + w[:i])) for i in range(len(w)))


def _counts(values, top):
    idx = np.floor(values + 1e-9).astype(int)
    return np.bincount(idx[idx <= top], minlength=top + 1)[:top + 1].astype(float)


# ----------------------------------------------------------------- growth


@dataclass
class GrowthEstimate:
    value: float
    ratio: float
    direct: float
    radius: int
    counts: list
    estimator: str
    window: int = 1

    def __float__(self):
        return float(self.value)


def _ratio_from_counts(counts, weighted=False):
    """Mean of log(c(n+1)/c(n)) over the top three n, with a width-2 window
    when some shells are empty (parity-periodic counts)."""
    c = np.asarray(counts, dtype=float)
    R = len(c) - 1
    if weighted:
        c = c * np.maximum(np.arange(len(c)), 1)
    if R >= 3 and (c[R - 3:R + 1] > 0).all():
        return math.log(c[R] / c[R - 3]) / 3.0, 1
    if R >= 3:
        hi, lo = c[R] + c[R - 1], c[R - 2] + c[R - 3]
        if hi > 0 and lo > 0:
            return math.log(hi / lo) / 2.0, 2
    raise DegenerateError("empty shells: cannot form a growth ratio")


def growth_rate(action, R, estimator="ratio", predicate=None):
    """Exponential growth of the orbit (or of a subset) under an integer metric."""
    if R < 3:
        raise GroupInputError("R must be at least 3")
    d, _ = orbit_values(action, None, R, predicate)
    counts = _counts(d, R)
    ratio, width = _ratio_from_counts(counts)
    total = counts.sum()
    direct = math.log(total) / R if total > 0 else -math.inf
    value = ratio if estimator == "ratio" else direct
    return GrowthEstimate(value, ratio, direct, R, counts.astype(int).tolist(), estimator, width)


def conj_growth_rate(action, L, estimator="ratio", predicate=None):
    """Growth of conjugacy classes by stable length.

    The ratio uses n * c(n): class counts carry a 1/n factor (a necklace of
    length n has up to n rotations) which otherwise biases the ratio by
    log((n-1)/n).
    """
    if L < 4:
        raise GroupInputError("L must be at least 4")
    l1, _ = class_values(action, None, L, predicate)
    counts = _counts(l1, L)
    ratio, width = _ratio_from_counts(counts, weighted=True)
    total = counts.sum()
    direct = math.log(total) / L if total > 0 else -math.inf
    value = ratio if estimator == "ratio" else direct
    return GrowthEstimate(value, ratio, direct, L, counts.astype(int).tolist(), estimator, width)


# ------------------------------------------------------------ Poincare sums


@dataclass
class PoincarePartial:
    partial_sum: float
    shell_sums: list
    ratios: list
    verdict: str
    radius: int
    mode: str


def poincare_partial(action1, action2, a, b, R, mode="orbit", margin=0.02):
    """Partial sum of exp(-a d2 - b d1) over the ball (or classes) of radius R.

    The verdict reads the last three shell ratios: all below 1 - margin is
    "converging", all above 1 + margin is "diverging", else "inconclusive".
    """
    if R < 3:
        raise GroupInputError("R must be at least 3")
    if mode == "orbit":
        v1, v2 = orbit_values(action1, action2, R)
    elif mode == "conjugacy":
        v1, v2 = class_values(action1, action2, R)
    else:
        raise GroupInputError(f"unknown mode {mode!r}")
    w = np.exp(-a * v2 - b * v1)
    idx = np.floor(v1 + 1e-9).astype(int)
    shells = np.bincount(idx, weights=w, minlength=R + 1)[:R + 1]
    ratios = [float(shells[n + 1] / shells[n]) if shells[n] > 0 else math.inf for n in range(R)]
    tail = ratios[-3:]
    if all(r < 1 - margin for r in tail):
        verdict = "converging"
    elif all(r > 1 + margin for r in tail):
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return PoincarePartial(float(shells.sum()), shells.tolist(), ratios, verdict, R, mode)


# ------------------------------------------------------------ theta curves


def _annulus_sums(v1, v2, a_values, n_values, L):
    out = np.zeros((len(a_values), len(n_values)))
    for j, n in enumerate(n_values):
        mask = np.abs(v1 - n) <= L + 1e-9
        sub = v2[mask]
        for i, a in enumerate(a_values):
            out[i, j] = np.exp(-a * sub).sum()
    return out


@dataclass
class ThetaEstimate:
    ratio: float
    direct: float
    n: int
    L: float
    mode: str

    def __float__(self):
        return float(self.ratio)


def theta_report(action1, action2, a, n, L=1):
    """Both estimators of theta(a) on the orbit annuli around n and n + 1."""
    if n < 4:
        raise GroupInputError("n must be at least 4")
    if not action1.integer_valued:
        raise GroupInputError("the first action must be integer valued")
    v1, v2 = orbit_values(action1, action2, n + 1 + L)
    S = _annulus_sums(v1, v2, [a], [n, n + 1], L)[0]
    if (S <= 0).any():
        raise DegenerateError("empty annulus")
    return ThetaEstimate(math.log(S[1] / S[0]), math.log(S[0]) / n, n, L, "orbit")


def theta_estimate(action1, action2, a, n, L=1):
    return theta_report(action1, action2, a, n, L).ratio


def big_theta_report(action1, action2, a, n, L=1):
    """Conjugacy-class version; the ratio carries the n/(n+1) class-count weight."""
    if n < 4:
        raise GroupInputError("n must be at least 4")
    v1, v2 = class_values(action1, action2, n + 1 + L)
    S = _annulus_sums(v1, v2, [a], [n, n + 1], L)[0]
    if (S <= 0).any():
        raise DegenerateError("empty annulus")
    return ThetaEstimate(math.log((n + 1) * S[1] / (n * S[0])), math.log(S[0]) / n, n, L,
                         "conjugacy")


def big_theta_estimate(action1, action2, a, n, L=1):
    return big_theta_report(action1, action2, a, n, L).ratio


@dataclass
class ManhattanSample:
    grid: list
    theta: list
    big_theta: list
    theta_direct: list
    big_theta_direct: list
    n: int
    L: float
    method: str = "ratio"
    endpoints: dict = field(default_factory=dict)

    def rows(self):
        for i, a in enumerate(self.grid):
            yield {"a": a, "theta_hat": self.theta[i],
                   "big_theta_hat": None if self.big_theta is None else self.big_theta[i],
                   "method": self.method, "n": self.n, "L": self.L}

    def to_dict(self):
        return {"grid": self.grid, "theta": self.theta, "big_theta": self.big_theta,
                "theta_direct": self.theta_direct, "big_theta_direct": self.big_theta_direct,
                "n": self.n, "L": self.L, "method": self.method, "endpoints": self.endpoints}


def manhattan_curve(action1, action2, grid, n, L=1, conjugacy=True, endpoints=True,
                    growth_radius=None):
    """theta and Theta estimates over a grid of a-values."""
    grid = [float(a) for a in grid]
    if n < 4:
        raise GroupInputError("n must be at least 4")
    v1, v2 = orbit_values(action1, action2, n + 1 + L)
    S = _annulus_sums(v1, v2, grid, [n, n + 1], L)
    if (S <= 0).any():
        raise DegenerateError("empty annulus")
    theta = np.log(S[:, 1] / S[:, 0]).tolist()
    theta_d = (np.log(S[:, 0]) / n).tolist()
    big = big_d = None
    if conjugacy:
        c1, c2 = class_values(action1, action2, n + 1 + L)
        Q = _annulus_sums(c1, c2, grid, [n, n + 1], L)
        if (Q <= 0).any():
            raise DegenerateError("empty class annulus")
        big = np.log((n + 1) * Q[:, 1] / (n * Q[:, 0])).tolist()
        big_d = (np.log(Q[:, 0]) / n).tolist()
    ends = {}
    if endpoints:
        Rg = growth_radius or n
        ends["delta1"] = growth_rate(action1, _radius_for(action1, Rg)).value
        ends["delta2"] = (growth_rate(action2, _radius_for(action2, Rg)).value
                          if action2.integer_valued else None)
        if conjugacy and action1.group.is_free:
            ends["delta1_conj"] = conj_growth_rate(action1, _class_radius(action1, Rg)).value
            ends["delta2_conj"] = (conj_growth_rate(action2, _class_radius(action2, Rg)).value
                                   if action2.integer_valued else None)
    return ManhattanSample(grid, theta, big, theta_d, big_d, n, L, "ratio", ends)


def _radius_for(action, R):
    """Radius in the action's units whose ball reaches marked length about R."""
    c = action.length_bound()
    if c is None or c >= 1:
        return max(4, R)
    return max(4, int(math.ceil(R / c)))


def _class_radius(action, R, max_marked=10):
    """Class-length radius reaching marked length about R, capped so the
    enumeration of cyclic words stays below length ``max_marked``."""
    c = action.length_bound() or 1
    return max(4, min(int(math.ceil(R / c)) if c < 1 else R, int(max_marked // c)))


@dataclass
class LineTest:
    verdict: str
    slope: float
    intercept: float
    max_residual: float
    convexity_gap: float
    tolerance: float
    end_slopes: tuple
    checks: dict = field(default_factory=dict)

    def to_dict(self):
        return {"verdict": self.verdict, "slope": self.slope, "intercept": self.intercept,
                "max_residual": self.max_residual, "convexity_gap": self.convexity_gap,
                "tolerance": self.tolerance, "end_slopes": list(self.end_slopes),
                "checks": self.checks}


def line_test(sample, tol=0.02, dilation=None):
    """Is the estimated theta curve a straight line on the grid?

    "line" when the least-squares residual is at most ``tol``; "convex" when
    the largest midpoint-convexity gap exceeds 3 * tol; otherwise
    "inconclusive".  ``end_slopes`` are minus the secant slopes at the two
    ends of the grid; with ``dilation = (Dil_-, Dil_+)`` they are compared to
    the dilation bounds.
    """
    a = np.asarray(sample.grid, dtype=float)
    t = np.asarray(sample.theta, dtype=float)
    d2 = sample.endpoints.get("delta2")
    if d2 is not None:
        keep = (a >= -1e-12) & (a <= d2 + 1e-12)
        a, t = a[keep], t[keep]
    if len(a) < 5:
        raise GroupInputError("line test needs at least 5 grid points in [0, delta2]")
    order = np.argsort(a)
    a, t = a[order], t[order]
    slope, intercept = np.polyfit(a, t, 1)
    resid = float(np.abs(t - (slope * a + intercept)).max())
    gaps = []
    for i in range(1, len(a) - 1):
        w = (a[i] - a[i - 1]) / (a[i + 1] - a[i - 1])
        interp = (1 - w) * t[i - 1] + w * t[i + 1]
        gaps.append(interp - t[i])
    gap = float(max(gaps)) if gaps else 0.0
    if resid <= tol:
        verdict = "line"
    elif gap > 3 * tol:
        verdict = "convex"
    else:
        verdict = "inconclusive"
    lo_slope = float(-(t[1] - t[0]) / (a[1] - a[0]))
    hi_slope = float(-(t[-1] - t[-2]) / (a[-1] - a[-2]))
    checks = {}
    d1 = sample.endpoints.get("delta1")
    if d1 is not None and d2:
        checks["endpoint_slope"] = -d1 / d2
    if dilation is not None:
        checks["dilation"] = list(dilation)
        checks["end_slopes_match_dilation"] = bool(
            abs(hi_slope - dilation[0]) <= 0.1 and abs(lo_slope - dilation[1]) <= 0.1
            or abs(lo_slope - dilation[0]) <= 0.1 and abs(hi_slope - dilation[1]) <= 0.1)
    return LineTest(verdict, float(slope), float(intercept), resid, gap, tol,
                    (lo_slope, hi_slope), checks)


def critical_exponent(action1, metric, n, L=1):
    """s with sum_{A1(n+1)} e^{-s d} = sum_{A1(n)} e^{-s d} (d real valued)."""
    v1, v = orbit_values(action1, metric, n + 1 + L)
    inner = np.abs(v1 - n) <= L + 1e-9
    outer = np.abs(v1 - n - 1) <= L + 1e-9

    def f(s):
        return (np.log(np.exp(-s * (v[outer] - v[outer].min())).sum()) - s * v[outer].min()
                - np.log(np.exp(-s * (v[inner] - v[inner].min())).sum()) + s * v[inner].min())

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise DegenerateError("no root for the critical exponent")
    return brentq(f, lo, hi, xtol=1e-12)


def linear_combination_check(action1, action2, a, b, sample, N=16):
    """Compare l_* of d_* = a d2 + b d1 with a l2 + b l1 on sample elements.

    l_* is computed on the combined metric itself (exact when it is a tree
    metric, else a Fekete estimate), independently of l1 and l2.
    """
    star = CombinedMetric([(a, action2), (b, action1)])
    worst, rows = 0.0, []
    for g in sample:
        ls = stable_length_profile(star, g, N)
        l1 = stable_length_profile(action1, g, N).value
        l2 = stable_length_profile(action2, g, N).value
        gap = abs(float(ls.value) - (a * float(l2) + b * float(l1)))
        worst = max(worst, gap)
        rows.append({"g": str(g), "l_star": float(ls.value), "method": ls.method,
                     "combination": a * float(l2) + b * float(l1)})
    return {"max_gap": worst, "rows": rows, "metric": star}


def subset_rigidity_experiment(action1, action2, E, R=8, L=8, N=16):
    """Juxtapose growth of E, growth of its complement, class growth in E,
    MLS agreement on classes meeting E and the rough-isometry profile."""
    full = growth_rate(action1, R)
    inside = growth_rate(action1, R, predicate=E)
    try:
        outside = growth_rate(action1, R, predicate=lambda g: not E(g)).value
    except DegenerateError:
        outside = None
    try:
        conj = conj_growth_rate(action1, max(L, 4), predicate=E).value
    except DegenerateError:
        conj = None
    keys = [k for k in classes_up_to(action1, L) if _class_meets(k.canonical, E)]
    cmp = mls_compare(action1, action2, sample=keys, N=N)
    cert = rough_isometry_certificate(action1, action2, 1, 1, min(R, 6))
    notes = []
    if inside.value < full.value - 0.05:
        notes.append("E grows strictly slower than G: the largeness hypothesis fails")
    return {
        "delta1_G": full.value,
        "delta1_E": inside.value,
        "delta1_complement": outside,
        "delta1c_E": conj,
        "mls_agreement_on_E": {"classes": len(keys), "equal": cmp.equal, "max_gap": cmp.max_gap,
                               "witness": cmp.witness},
        "C_profile": cert.C_profile,
        "R": R, "L": L,
        "notes": notes,
    }
