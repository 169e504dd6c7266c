"""Command-line front end.

Every subcommand reads an optional TOML config (see ``markedlength.config``),
runs one library operation and writes a JSON report with ``schema: 1``.
Exit codes: 0 success, 1 verdict failure under ``--strict``, 2 input error.
"""

import argparse
import csv
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import contracting, groups, manhattan, metrics, mls, paths
from .config import build_config, load_config
from .errors import GroupInputError, MarkedLengthError

SCHEMA = 1


# ----------------------------------------------------------------- helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, groups.GroupElement):
        return str(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, (int, bool)):
        return int(x) if x.denominator == 1 else float(x)
    return x


def _param(args, cfg, name, default=None, cast=None):
    v = getattr(args, name, None)
    if v is None:
        v = cfg.params.get(name, default)
    if v is None:
        return None
    return cast(v) if cast else v


def _elements(group, text):
    return [group.parse(s.strip()) for s in str(text).split(",") if s.strip()]


def _grid(text):
    """'start:stop:step' (stop excluded) or a comma list."""
    if isinstance(text, (list, tuple)):
        return [float(a) for a in text]
    text = str(text)
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise GroupInputError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step - 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [float(a) for a in text.split(",") if a.strip()]


def _check(args, ok, message):
    if not ok:
        args.failures.append(message)


# --------------------------------------------------------------- commands


def cmd_groups_info(args, cfg):
    G = cfg.group
    R = _param(args, cfg, "R", 4, int)
    reps = groups.enumerate_conjugacy_reps(G, R)
    by_len = [0] * (R + 1)
    for k in reps:
        by_len[len(k.canonical.word)] += 1
    return {"group": repr(G), "alphabet": [G.letter_name(x) for x in G.alphabet],
            "sphere_sizes": [groups.sphere_size(G, n) for n in range(R + 1)],
            "classes_by_cyclic_length": by_len,
            "elliptic_radical": [str(g) for g in contracting.elliptic_radical(G)]}


def cmd_groups_reduce(args, cfg):
    g = cfg.group.parse(args.word)
    core, conj = groups.cyclic_reduce(g)
    key = groups.conjugacy_key(g)
    return {"input": args.word, "normal_form": str(g), "length": len(g),
            "cyclic_core": str(core), "conjugator": str(conj),
            "conjugacy_key": str(key.canonical)}


def cmd_groups_conjugate(args, cfg):
    g, h = cfg.group.parse(args.g), cfg.group.parse(args.h)
    return {"g": str(g), "h": str(h), "conjugate": groups.is_conjugate(g, h)}


def cmd_metrics_distance(args, cfg):
    G = cfg.group
    g = G.parse(args.g)
    h = G.parse(args.h) if args.h is not None else G.identity
    out = {}
    for name in cfg.pair:
        A = cfg.actions[name]
        row = {"kind": A.kind, "distance": metrics.distance(A, h, g)}
        if isinstance(A, metrics.WordMetric):
            row["geodesic"] = [str(v) for v in metrics.geodesic(A, h, g).vertices]
        out[name] = row
    return {"from": str(h), "to": str(g), "actions": out}


def cmd_metrics_delta(args, cfg):
    R = _param(args, cfg, "R", 3, int)
    out = {}
    for name in cfg.pair:
        est = metrics.delta_estimate(cfg.actions[name], R, samples=_param(args, cfg, "samples"),
                                     seed=cfg.seed)
        out[name] = {"delta": est.delta, "R": est.radius, "points": est.points,
                     "exhaustive": est.exhaustive, "samples": est.samples}
    return {"actions": out}


def cmd_metrics_convexity(args, cfg):
    R = _param(args, cfg, "R", 3, int)
    out = {}
    for name in cfg.pair:
        out[name] = metrics.midpoint_convexity_audit(cfg.actions[name], R,
                                                     _param(args, cfg, "max_pairs"), cfg.seed)
    return {"R": R, "actions": out}


def cmd_metrics_green(args, cfg):
    mu = cfg.measure
    N = _param(args, cfg, "N", 40, int)
    r = _param(args, cfg, "r", 1.0, float)
    R = _param(args, cfg, "R", 2, int)
    spec = metrics.spectral_radius_report(mu, N + (N % 2))
    gm = metrics.GreenMetric(mu, r=r, N=N, tail_tol=float("inf"))
    values = []
    for g in groups.enumerate_ball(cfg.group, R):
        d = gm.measure(g)
        values.append({"element": str(g), "distance": d.value, "error": d.error})
    return {"measure": mu.describe(), "N": N, "r": r,
            "spectral_radius": {"value": spec.value, "root_estimate": spec.root_estimate,
                                "ratio_estimate": spec.ratio_estimate, "horizon": spec.horizon},
            "tail_bound": gm.tail, "distances": values}


def _axis(args, cfg):
    h = cfg.group.parse(args.axis)
    return contracting.ContractingAxis(h, _param(args, cfg, "window", 8, int), hull=args.hull)


def cmd_contract_audit(args, cfg):
    A = _axis(args, cfg)
    action = cfg.action(0)
    R = _param(args, cfg, "R", 5, int)
    res = contracting.contraction_constant(A, action, R)
    report = {"axis": str(A.h), "window": A.window, "hull": A.hull, "R": R, "C_hat": res.C,
              "verdict": res.verdict, "violations": []}
    report["max_diam_by_distance"] = res.to_dict()["max_diam_by_distance"]
    if res.C is not None and not args.no_lemmas:
        audit = contracting.lemma_audit(A, action, R, res.C)
        for lemma, count in sorted(audit["violations"].items()):
            if count:
                report["violations"].append(
                    {"lemma": lemma, "count": count,
                     "examples": [list(e) for e in audit["examples"].get(lemma, [])]})
        report["quasi_convex_excursion"] = audit["quasi_convex_excursion"]
    _check(args, res.C is not None and not report["violations"],
           f"axis {A.h}: verdict {res.verdict}, {len(report['violations'])} lemma(s) violated")
    return report


def cmd_contract_independence(args, cfg):
    g, h = cfg.group.parse(args.g), cfg.group.parse(args.h)
    res = contracting.weakly_independent(g, h, cfg.action(0), _param(args, cfg, "W", 8, int),
                                         _param(args, cfg, "B", 2, int))
    _check(args, res.independent, f"{g} and {h} are not weakly independent at this scale")
    return {"g": str(g), "h": str(h)} | res.to_dict()


def cmd_contract_membership(args, cfg):
    g, h = cfg.group.parse(args.g), cfg.group.parse(args.h)
    v = contracting.elementary_membership(g, h, _param(args, cfg, "M", 5, int))
    return {"g": str(g), "h": str(h), "verdict": v.verdict, "m": v.m,
            "certified": v.certified, "note": v.note}


def cmd_paths_extend(args, cfg):
    G = cfg.group
    g, h = G.parse(args.g), G.parse(args.h)
    F = _elements(G, _param(args, cfg, "F", "a,b,A"))
    eps = _param(args, cfg, "eps", 1.0, float)
    res = paths.extension_search(g, h, F, eps, cfg.action(0))
    _check(args, res.success, f"no f in F brings the defect of ({g}, {h}) within {eps}")
    return {"g": str(g), "h": str(h), "eps": eps} | res.to_dict()


def cmd_paths_certificate(args, cfg):
    G = cfg.group
    F = _elements(G, _param(args, cfg, "F", "a,b,A"))
    eps = _param(args, cfg, "eps", 1.0, float)
    R = _param(args, cfg, "R", 6, int)
    cert = paths.extension_certificate(F, eps, R, cfg.action(0))
    _check(args, cert.passed, f"extension certificate failed on {len(cert.failures)} pair(s)")
    return cert.to_dict()


def cmd_paths_perturb(args, cfg):
    G = cfg.group
    g = G.parse(args.g)
    F = _elements(G, _param(args, cfg, "F", "a,b,A"))
    eps = _param(args, cfg, "eps", 1.0, float)
    res = paths.perturbation_search(g, F, eps, cfg.action(0), _param(args, cfg, "N", 16, int))
    return {"g": str(g), "eps": eps} | res.to_dict()


def cmd_mls_compare(args, cfg):
    a1, a2 = cfg.action(0), cfg.action(1)
    L = _param(args, cfg, "L", 4, int)
    N = _param(args, cfg, "N", 16, int)
    rep = mls.mls_compare(a1, a2, L=L, N=N, tol=_param(args, cfg, "tol", None, float))
    (lo, lo_w), (hi, hi_w) = mls.dilation_bounds(a1, a2, L, N)
    R = _param(args, cfg, "R", min(L, 6), int)
    lam = _param(args, cfg, "lam", [1.0, 1.0])
    cert = mls.rough_isometry_certificate(a1, a2, float(lam[0]), float(lam[1]), R)
    out = rep.to_dict()
    out["classes"] = [{"key": c["key"], "l1": c["l1"], "l2": c["l2"]} for c in out["classes"]]
    out["dilation"] = {"lo": lo, "hi": hi, "lo_witness": lo_w, "hi_witness": hi_w}
    out["C_profile"] = cert.C_profile
    out["rough_isometry"] = {"lambda": [float(lam[0]), float(lam[1])], "R": R}
    out["pair"] = list(cfg.pair)
    _check(args, rep.equal, f"marked length spectra differ at {rep.witness}")
    return out


def cmd_mls_length(args, cfg):
    g = cfg.group.parse(args.g)
    R = _param(args, cfg, "R", 3, int)
    N = _param(args, cfg, "N", 16, int)
    out = {}
    for name in cfg.pair:
        p = mls.length_profile(cfg.actions[name], g, R, N)
        out[name] = {"stable": p.stable.value, "method": p.stable.method,
                     "horizon": p.stable.horizon, "algebraic": p.algebraic,
                     "algebraic_certified": p.algebraic_certified, "d1": p.upper,
                     "chain_holds": p.chain_holds()}
    return {"g": str(g), "actions": out}


def cmd_manhattan_curve(args, cfg):
    a1, a2 = cfg.action(0), cfg.action(1)
    grid = _grid(_param(args, cfg, "grid", "0:0.55:0.05"))
    n = _param(args, cfg, "n", 10, int)
    L = _param(args, cfg, "L", 1, int)
    sample = manhattan.manhattan_curve(a1, a2, grid, n, L, conjugacy=not args.no_conjugacy)
    report = sample.to_dict()
    dil_L = _param(args, cfg, "dilation_L", 6, int)
    dil = None
    if dil_L:
        (lo, _), (hi, _) = mls.dilation_bounds(a1, a2, dil_L)
        dil = (lo, hi)
        report["dilation"] = {"lo": lo, "hi": hi, "L": dil_L}
    try:
        lt = manhattan.line_test(sample, _param(args, cfg, "tol", 0.02, float), dil)
        report["line_test"] = lt.to_dict()
    except GroupInputError as exc:
        report["line_test"] = {"verdict": "skipped", "reason": str(exc)}
    return report, list(sample.rows())


def cmd_manhattan_growth(args, cfg):
    R = _param(args, cfg, "R", 8, int)
    out = {}
    for name in cfg.pair:
        A = cfg.actions[name]
        est = manhattan.growth_rate(A, R)
        row = {"growth": est.value, "direct": est.direct, "counts": est.counts,
               "window": est.window}
        if args.conjugacy:
            c = manhattan.conj_growth_rate(A, max(4, R))
            row["conj_growth"] = c.value
            row["conj_counts"] = c.counts
        out[name] = row
    return {"R": R, "actions": out}


def cmd_manhattan_poincare(args, cfg):
    a1, a2 = cfg.action(0), cfg.action(1)
    res = manhattan.poincare_partial(a1, a2, float(args.a), float(args.b),
                                     _param(args, cfg, "R", 8, int), args.mode)
    return {"a": float(args.a), "b": float(args.b), "R": res.radius, "mode": res.mode,
            "partial_sum": res.partial_sum, "shell_sums": res.shell_sums,
            "ratios": res.ratios, "verdict": res.verdict}


# ----------------------------------------------------------------- parser


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML experiment config")
    p.add_argument("--out", help="report path (JSON; .csv for plot grids); default stdout")
    p.add_argument("--strict", action="store_true", help="exit 1 when a check fails")
    p.add_argument("--seed", type=int, help="RNG seed for sampled audits (overrides config)")
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface compatibility; work runs in one thread")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="markedlength",
                                     description="Marked length spectra on marked groups.")
    top = parser.add_subparsers(dest="group_cmd", required=True)

    def sub(parent, name, func, help):
        p = parent.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=func)
        return p

    g = top.add_parser("groups", help="normal forms, conjugacy and enumeration")
    gs = g.add_subparsers(dest="cmd", required=True)
    p = sub(gs, "info", cmd_groups_info, "sphere sizes and class counts")
    p.add_argument("--R", type=int)
    p = sub(gs, "reduce", cmd_groups_reduce, "normal form and cyclic reduction of a word")
    p.add_argument("word")
    p = sub(gs, "conjugate", cmd_groups_conjugate, "decide conjugacy")
    p.add_argument("g")
    p.add_argument("h")

    m = top.add_parser("metrics", help="distances, hyperbolicity and Green metrics")
    ms = m.add_subparsers(dest="cmd", required=True)
    p = sub(ms, "distance", cmd_metrics_distance, "distance and geodesic under each action")
    p.add_argument("--g", required=True)
    p.add_argument("--h")
    p = sub(ms, "delta", cmd_metrics_delta, "four-point hyperbolicity constant on a ball")
    p.add_argument("--R", type=int)
    p.add_argument("--samples", type=int)
    p = sub(ms, "convexity", cmd_metrics_convexity, "midpoint convexity audit")
    p.add_argument("--R", type=int)
    p.add_argument("--max-pairs", dest="max_pairs", type=int)
    p = sub(ms, "green", cmd_metrics_green, "spectral radius and Green distances")
    p.add_argument("--N", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--R", type=int)

    c = top.add_parser("contract", help="projections and contraction audits")
    cs = c.add_subparsers(dest="cmd", required=True)
    p = sub(cs, "audit", cmd_contract_audit, "contraction constant and projection lemmas")
    p.add_argument("--axis", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--R", type=int)
    p.add_argument("--hull", action="store_true", help="include geodesics between orbit points")
    p.add_argument("--no-lemmas", dest="no_lemmas", action="store_true")
    p = sub(cs, "independence", cmd_contract_independence, "weak independence of two axes")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--W", type=int)
    p.add_argument("--B", type=int)
    p = sub(cs, "membership", cmd_contract_membership, "membership in E(h)")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--M", type=int)

    pa = top.add_parser("paths", help="extension searches and certificates")
    ps = pa.add_subparsers(dest="cmd", required=True)
    p = sub(ps, "extend", cmd_paths_extend, "best f in F for a pair (g, h)")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--F")
    p.add_argument("--eps", type=float)
    p = sub(ps, "certificate", cmd_paths_certificate, "exhaustive extension certificate")
    p.add_argument("--F")
    p.add_argument("--eps", type=float)
    p.add_argument("--R", type=int)
    p = sub(ps, "perturb", cmd_paths_perturb, "perturb g to a contracting element")
    p.add_argument("--g", required=True)
    p.add_argument("--F")
    p.add_argument("--eps", type=float)
    p.add_argument("--N", type=int)

    ml = top.add_parser("mls", help="marked length spectrum comparisons")
    mls_ = ml.add_subparsers(dest="cmd", required=True)
    p = sub(mls_, "compare", cmd_mls_compare, "compare two actions class by class")
    p.add_argument("--L", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--R", type=int)
    p.add_argument("--tol", type=float)
    p = sub(mls_, "length", cmd_mls_length, "stable and algebraic length of one element")
    p.add_argument("--g", required=True)
    p.add_argument("--R", type=int)
    p.add_argument("--N", type=int)

    mh = top.add_parser("manhattan", help="growth, Poincare sums and Manhattan curves")
    mhs = mh.add_subparsers(dest="cmd", required=True)
    p = sub(mhs, "curve", cmd_manhattan_curve, "theta and Theta estimates on a grid")
    p.add_argument("--grid")
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--dilation-L", dest="dilation_L", type=int)
    p.add_argument("--no-conjugacy", dest="no_conjugacy", action="store_true")
    p = sub(mhs, "growth", cmd_manhattan_growth, "growth rate of each action")
    p.add_argument("--R", type=int)
    p.add_argument("--conjugacy", action="store_true")
    p = sub(mhs, "poincare", cmd_manhattan_poincare, "partial Poincare sum verdict")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--R", type=int)
    p.add_argument("--mode", choices=["orbit", "conjugacy"], default="orbit")
    return parser


# ----------------------------------------------------------------- output


def _write(args, command, cfg, result, rows=None):
    report = {"schema": SCHEMA, "command": command, "seed": cfg.seed,
              "config": cfg.raw, "result": result,
              "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2, default=str) + "\n"
    out = Path(args.out) if args.out else None
    if out is not None and out.suffix == ".csv":
        if rows is None:
            raise GroupInputError(f"{command} produces no CSV data")
        with open(out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else [])
            writer.writeheader()
            writer.writerows(rows)
        out = out.with_suffix(".json")
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = f"{args.group_cmd} {args.cmd}"
    try:
        if args.config:
            cfg = load_config(args.config)
        else:
            cfg = build_config({"group": {"kind": "free", "rank": 2}})
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.raw = dict(cfg.raw, seed=args.seed)
        args.failures = []
        result = args.func(args, cfg)
        rows = None
        if isinstance(result, tuple):
            result, rows = result
        _write(args, command, cfg, result, rows)
    except (MarkedLengthError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.strict and args.failures:
        for msg in args.failures:
            print(f"check failed: {msg}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())
