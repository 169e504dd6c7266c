"""Admissible paths and searches for almost-geodesic extensions g f h."""

from dataclasses import dataclass, field

from .contracting import ContractingAxis, project
from .errors import GroupInputError, UnsupportedError
from .groups import GroupElement, enumerate_ball, in_cyclic_subgroup, inverse, multiply
from .metrics import WordMetric, common_prefix, geodesic, mul_words
from .mls import stable_length_profile


@dataclass
class Segment:
    """One labelled piece of a path; ``axis`` is the generator of its axis
    for axis segments and None for connecting segments."""

    label: GroupElement
    axis: GroupElement = None


@dataclass
class AdmissiblePathSpec:
    segments: list
    D: float = 0.0
    tau: float = 0.0
    special: bool = True
    base: GroupElement = None
    window: int = 8
    periodic: bool = False
    periods: int = 3

    def unrolled(self):
        return list(self.segments) * (self.periods if self.periodic else 1)

    def vertices(self):
        segs = self.unrolled()
        if not segs:
            return [self.base] if self.base is not None else []
        G = segs[0].label.group
        v = self.base if self.base is not None else G.identity
        out = [v]
        for s in segs:
            v = multiply(v, s.label)
            out.append(v)
        return out

    def translated(self, w):
        base = self.base if self.base is not None else w.group.identity
        return AdmissiblePathSpec(self.segments, self.D, self.tau, self.special,
                                  multiply(w, base), self.window, self.periodic, self.periods)


@dataclass
class AdmissibleVerdict:
    passed: bool
    conditions: dict = field(default_factory=dict)
    axis_segments: int = 0

    def to_dict(self):
        return {"passed": self.passed, "axis_segments": self.axis_segments,
                "conditions": self.conditions}


def _same_coset(v1, h1, v2, h2):
    if not (in_cyclic_subgroup(h1, h2) and in_cyclic_subgroup(h2, h1)):
        return False
    return in_cyclic_subgroup(multiply(inverse(v1), v2), h1)


def check_admissible(spec, action, strict_window=True):
    """Evaluate LL1, BP and LL2' (special) or LL2 for a labelled path.

    Axis segment i with generator h lives on the coset axis v_i <h>, where v_i
    is its starting vertex.  Projections use the axis window of ``spec``.
    """
    if not isinstance(action, WordMetric):
        raise UnsupportedError("admissible paths are checked for word metrics")
    segs = spec.unrolled()
    verts = spec.vertices()
    conds = {"endpoints_on_axis": [], "LL1": [], "BP": [], "LL2": []}
    if not segs:
        return AdmissibleVerdict(True, conds, 0)
    ps = [i for i, s in enumerate(segs) if s.axis is not None]
    axes = {}
    for i in ps:
        s = segs[i]
        ok = in_cyclic_subgroup(s.label, s.axis)
        conds["endpoints_on_axis"].append({"segment": i, "pass": ok})
        axes[i] = ContractingAxis(s.axis, spec.window, verts[i])
    last = len(segs) - 1
    for j, i in enumerate(ps):
        length = action.distance(verts[i], verts[i + 1])
        exempt = i == 0 or i == last
        conds["LL1"].append({"segment": i, "length": length, "exempt": exempt,
                             "pass": bool(exempt or length > spec.D)})
        X = axes[i]
        before = verts[ps[j - 1] + 1] if j > 0 else verts[0]
        after = verts[ps[j + 1]] if j + 1 < len(ps) else verts[-1]
        d_in = _proj_diam(X, before, verts[i], action, strict_window)
        d_out = _proj_diam(X, verts[i + 1], after, action, strict_window)
        conds["BP"].append({"segment": i, "entry": d_in, "exit": d_out,
                            "pass": bool(d_in <= spec.tau and d_out <= spec.tau)})
    for j in range(len(ps) - 1):
        i, k = ps[j], ps[j + 1]
        gap = action.distance(verts[i + 1], verts[k])
        row = {"segments": [i, k], "gap": gap}
        if spec.special:
            row["pass"] = bool(gap > spec.D)
        else:
            distinct = not _same_coset(verts[i], segs[i].axis, verts[k], segs[k].axis)
            row["distinct_axes"] = distinct
            if distinct:
                pts = axes[k].points
                sample = max(_proj_diam(axes[i], p, q, action, False)
                             for p in pts[:1] + pts[-1:] for q in pts)
                row["intersection_sample"] = {"window": spec.window, "projection_diameter": sample}
            row["pass"] = bool(distinct or gap > spec.D)
        conds["LL2"].append(row)
    passed = all(r["pass"] for rows in conds.values() for r in rows)
    return AdmissibleVerdict(passed, conds, len(ps))


def _proj_diam(axis, x, y, action, strict):
    px = project(axis, x, action, strict).points
    py = project(axis, y, action, strict).points
    union = list(dict.fromkeys(px + py))
    best = 0
    for a in range(len(union)):
        for b in range(a + 1, len(union)):
            best = max(best, action.distance(union[a], union[b]))
    return best


def fellow_travel(spec, action):
    """Max distance from the geodesic [start, end] to the path's vertices.

    The path is subdivided along lattice geodesics of its segments.
    """
    verts = spec.vertices()
    pathpts = [verts[0]]
    for a, b in zip(verts, verts[1:]):
        pathpts += list(geodesic(action, a, b).vertices[1:])
    geo = geodesic(action, verts[0], verts[-1]).vertices
    return max(min(action.distance(p, q) for q in pathpts) for p in geo)


# ---------------------------------------------------------------- extension


@dataclass
class ExtensionOutcome:
    f: GroupElement
    defect: float
    defects: list
    success: bool

    def to_dict(self):
        return {"f": str(self.f), "defect": self.defect,
                "defects": [[str(f), d] for f, d in self.defects], "success": self.success}


def _as_elements(group, F):
    out = [group.parse(f) if isinstance(f, str) else f for f in F]
    if not out:
        raise GroupInputError("F must be nonempty")
    return out


def extension_search(g, h, F, eps, action):
    """The f in F minimizing |d(1, g f h) - d(1, g) - d(1, h)| (first on ties)."""
    F = _as_elements(g.group, F)
    dg, dh = action.dist1(g), action.dist1(h)
    defects = []
    for f in F:
        defects.append((f, abs(action.dist1(multiply(multiply(g, f), h)) - dg - dh)))
    f, d = min(defects, key=lambda fd: fd[1])
    return ExtensionOutcome(f, d, defects, d <= eps)


@dataclass
class ExtensionCertificate:
    radius: int
    F: list
    eps: float
    pairs: int
    evaluated: int
    max_min_defect: float
    failures: list
    method: str

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {"radius": self.radius, "F": [str(f) for f in self.F], "eps": self.eps,
                "pairs": self.pairs, "evaluated": self.evaluated,
                "max_min_defect": self.max_min_defect, "passed": self.passed,
                "failures": [[str(g), str(h)] for g, h in self.failures[:20]],
                "method": self.method}


def extension_certificate(F, eps, R, action=None, max_failures=100):
    """Check extension_search succeeds for every g, h in the marked ball R.

    For the marking of a free group, d(1, g f h) = |w| + |h| - 2 k where
    w = g f and k is the common prefix length of w^-1 and h, so the defect
    depends on h only through those prefix lengths.  Every h realizes the
    same prefix lengths as its deepest prefix on the union of the paths to
    the words (g f)^-1, and that prefix is itself in the ball; scanning those
    prefixes covers all pairs exactly.
    """
    F = list(F)
    G = F[0].group
    action = action or WordMetric(G)
    if not (isinstance(action, WordMetric) and action.is_marking and G.is_free):
        return extension_certificate_bruteforce(F, eps, R, action, max_failures)
    ball = enumerate_ball(G, R)
    fw = [f.word for f in F]
    nF = len(F)
    worst = 0
    failures = []
    evaluated = 0
    for g in ball:
        gw = g.word
        lg = len(gw)
        us = []
        for f in fw:
            w = mul_words(G, gw, f)
            us.append((len(w), tuple(-x for x in reversed(w))))
        lcp = [[common_prefix(us[a][1], us[b][1]) for b in range(nF)] for a in range(nF)]
        for b in range(nF):
            ub = us[b][1]
            for t in range(min(len(ub), R) + 1):
                evaluated += 1
                best = min(abs(us[a][0] - lg - 2 * min(t, lcp[a][b])) for a in range(nF))
                if best > worst:
                    worst = best
                if best > eps and len(failures) < max_failures:
                    failures.append((g, GroupElement(G, ub[:t])))
    return ExtensionCertificate(R, F, eps, len(ball) ** 2, evaluated, worst, failures,
                                "prefix_classes")


def extension_certificate_bruteforce(F, eps, R, action=None, max_failures=100):
    F = list(F)
    G = F[0].group
    action = action or WordMetric(G)
    ball = enumerate_ball(G, R)
    worst = 0
    failures = []
    for g in ball:
        for h in ball:
            out = extension_search(g, h, F, eps, action)
            worst = max(worst, out.defect)
            if not out.success and len(failures) < max_failures:
                failures.append((g, h))
    return ExtensionCertificate(R, F, eps, len(ball) ** 2, len(ball) ** 2, worst, failures,
                                "bruteforce")


@dataclass
class PerturbationOutcome:
    f: GroupElement
    defect: float
    defects: list
    success: bool

    def to_dict(self):
        return {"f": str(self.f) if self.f is not None else None, "defect": self.defect,
                "defects": [[str(f), d] for f, d in self.defects], "success": self.success}


def _perturbation_defect(action, x, N):
    prof = stable_length_profile(action, x, N)
    return float(action.dist1(x)) - float(prof.value)


def perturbation_search(g, F, eps, action, N=16):
    """The f in F minimizing d(1, g f) - l(g f) among f with g f nontrivial.

    Candidates with g f = 1 are skipped (they are recorded with defect None).
    """
    F = _as_elements(g.group, F)
    defects = []
    best = None
    for f in F:
        x = multiply(g, f)
        if x.is_identity():
            defects.append((f, None))
            continue
        d = _perturbation_defect(action, x, N)
        defects.append((f, d))
        if best is None or d < best[1] - 1e-12:
            best = (f, d)
    if best is None:
        return PerturbationOutcome(None, None, defects, False)
    return PerturbationOutcome(best[0], best[1], defects, best[1] <= 2 * eps + 1e-12)


@dataclass
class SimultaneousOutcome:
    f: GroupElement
    defect1: float
    defect2: float
    candidates: list
    success: bool

    def to_dict(self):
        return {"f": str(self.f) if self.f is not None else None, "defect1": self.defect1,
                "defect2": self.defect2,
                "candidates": [[str(f), d1, d2] for f, d1, d2 in self.candidates],
                "success": self.success}


def simultaneous_extension(g, S, action1, action2, eps, N=16):
    """The f in S minimizing the larger of the two perturbation defects."""
    S = _as_elements(g.group, S)
    rows = []
    best = None
    for f in S:
        x = multiply(g, f)
        if x.is_identity():
            rows.append((f, None, None))
            continue
        d1 = _perturbation_defect(action1, x, N)
        d2 = _perturbation_defect(action2, x, N)
        rows.append((f, d1, d2))
        if best is None or max(d1, d2) < max(best[1], best[2]) - 1e-12:
            best = (f, d1, d2)
    if best is None:
        return SimultaneousOutcome(None, None, None, rows, False)
    ok = best[1] <= 2 * eps + 1e-12 and best[2] <= 2 * eps + 1e-12
    return SimultaneousOutcome(best[0], best[1], best[2], rows, ok)
