"""Command-line front end.

Exit codes: 0 success, 1 analysis error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bifurcation, crn, equilibria, geometry, sirph, threshold
from .modeldsl import Model, check_hungarian, load_model, parse_model
from .sampling import DEFAULT_SEED, positive_draws
from .symalg import GroebnerBudgetExceeded, ParseError

ANALYSIS_ERRORS = (
    equilibria.EquilibriumError,
    threshold.ThresholdError,
    crn.CrnError,
    bifurcation.BifurcationError,
    GroebnerBudgetExceeded,
    ParseError,
    ZeroDivisionError,
)


class UsageError(Exception):
    """Bad command-line input (unknown model, parameter or malformed flag)."""


# model loading -----------------------------------------------------------------------


def bundled_models() -> list[str]:
    root = resources.files("epikit") / "models"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".mod"))


def resolve_model(ref: str) -> Model:
    """Load a model from a path, falling back to the bundled model of the same stem."""
    path = Path(ref)
    if path.is_file():
        return load_model(path)
    stem = path.name[:-4] if path.name.endswith(".mod") else path.name
    res = resources.files("epikit") / "models" / f"{stem}.mod"
    if res.is_file():
        return parse_model(res.read_text(encoding="utf-8"))
    raise UsageError(f"no model file {ref!r} and no bundled model {stem!r} "
                     f"(bundled: {', '.join(bundled_models())})")


def parse_fixings(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip() or not value.strip():
            raise UsageError(f"--fix expects name=value, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def prepare(args) -> Model:
    m = resolve_model(args.model)
    if getattr(args, "infectious", None):
        names = [v for v in args.infectious.split(",") if v]
        try:
            m = m.with_infectious(names)
        except KeyError as e:
            raise UsageError(str(e.args[0])) from None
    fix = parse_fixings(getattr(args, "fix", None))
    if fix:
        unknown = set(fix) - set(m.params)
        if unknown:
            raise UsageError(f"--fix refers to unknown parameters {sorted(unknown)}")
        m = m.substitute_params(fix)
    return m


def _range(text: str) -> tuple[float, float]:
    a, sep, b = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    lo, hi = float(a), float(b)
    if not lo < hi:
        raise argparse.ArgumentTypeError("range needs lo < hi")
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# output helpers -------------------------------------------------------------------------


def emit(args, command: str, model: Model, result: dict, text: str) -> None:
    if args.json:
        payload = {"command": command, "model": model.name, "result": result}
        out = json.dumps(payload, indent=2, default=_json_default)
    else:
        out = text
    if args.output:
        Path(args.output).write_text(out + ("" if out.endswith("\n") else "\n"), encoding="utf-8")
    else:
        print(out)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Fraction):
        return float(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _s(v) -> str | None:
    return None if v is None else str(v)


def _matrix(M) -> list[list[str]]:
    return M.to_strings()


def _fp(p: equilibria.NumericFixedPoint, names) -> dict:
    return {
        "coordinates": dict(zip(names, p.coordinates)),
        "eigenvalues": [[e.real, e.imag] for e in p.jacobian_eigenvalues],
        "classification": p.classification,
        "interior": p.interior,
        "residual": p.residual,
        "converged": p.converged,
    }


# subcommands ------------------------------------------------------------------------------


def cmd_check(args):
    m = prepare(args)
    rep = check_hungarian(m)
    lines = [f"{m.name}: {'no negative cross-effects' if rep.ok else 'negative cross-effects found'}"]
    lines += ["  " + d for d in rep.describe(m)]
    result = {"ok": rep.ok, "violations": [{"equation": i + 1, "variable": m.state_vars[i], "term": str(t)}
                                           for i, t in rep.violations]}
    emit(args, "check", m, result, "\n".join(lines))
    return 0


def cmd_dfe(args):
    m = prepare(args)
    sols = equilibria.dfe(m)
    result = {"count": len(sols), "equilibria": [s.to_strings() for s in sols]}
    text = "\n".join(", ".join(f"{k} = {v}" for k, v in s.to_strings().items()) for s in sols)
    emit(args, "dfe", m, result, text)
    if args.expect_unique_dfe and len(sols) != 1:
        print(f"error: expected a unique DFE, found {len(sols)}", file=sys.stderr)
        return 1
    return 0


def cmd_ngm(args):
    m = prepare(args)
    r = threshold.ngm(m)
    sr = threshold.r0_ngm(r, seed=args.seed)
    names = ("M", "V1", "F1", "F", "V", "F_dfe", "V_dfe", "K")
    result = {k: _matrix(getattr(r, k)) for k in names}
    result.update({"infectious": list(r.infectious), "dfe": r.dfe_used.to_strings(),
                   "R_N": _s(sr.value), "method": sr.method, "charpoly": str(sr.charpoly)})
    text = "\n".join(f"{k} = {getattr(r, k)}" for k in names)
    text += f"\nR_N = {sr.value if sr.resolved else 'unresolved'}  ({sr.method})"
    emit(args, "ngm", m, result, text)
    return 0


def _locus_agreement(rn, rj, seed: int, draws: int, guard: float):
    names = sorted(rn.free_symbols | rj.free_symbols)
    agree = checked = 0
    for vals in positive_draws(names, draws, seed):
        a = float(rn.evaluate(vals)) - 1.0
        b = float(rj.evaluate(vals)) - 1.0
        if abs(a) <= guard or abs(b) <= guard:
            continue
        checked += 1
        agree += int(np.sign(a) == np.sign(b))
    return agree, checked


def cmd_r0(args):
    m = prepare(args)
    point = threshold.unique_dfe(m)
    sr = threshold.r0_ngm(threshold.ngm(m, point), seed=args.seed)
    jf = threshold.r0_jacfact(m, point, seed=args.seed)
    result = {
        "R_N": _s(sr.value), "R_N_method": sr.method,
        "R_J": _s(jf.R_J), "R_J_candidates": [str(v) for v in jf.per_factor_RJ], "relaxed": jf.relaxed,
        "factors": [{"poly": str(f.poly), "kind": f.kind} for f in jf.factors],
        "draws": args.draws, "seed": args.seed,
    }
    lines = [f"R_N = {sr.value if sr.resolved else 'unresolved'}", f"R_J = {jf.R_J if jf.R_J is not None else 'undetermined'}"
             + ("  (relaxed Descartes condition)" if jf.relaxed else "")]
    if sr.value is not None and jf.R_J is not None:
        agree, checked = _locus_agreement(sr.value, jf.R_J, args.seed, args.draws, args.tol_guard)
        result["loci_agree"] = agree == checked
        result["draws_checked"] = checked
        lines.append(f"unit loci agree at {agree}/{checked} random draws (seed {args.seed})")
    else:
        result["loci_agree"] = None
        result["draws_checked"] = 0
        lines.append("unit loci not compared: " + (jf.diagnostic or "R_N unresolved"))
    emit(args, "r0", m, result, "\n".join(lines))
    return 0


def cmd_rur(args):
    m = prepare(args)
    keep = args.keep or (m.infectious_vars[0] if m.infectious else m.state_vars[-1])
    if keep not in m.state_vars:
        raise UsageError(f"--keep {keep!r} is not a state variable")
    r = equilibria.rur_reduce(m, keep)
    result = {"kept_var": keep, "univariate": str(r.univariate), "cofactor": str(r.cofactor),
              "removed_power": r.removed_power, "degree": r.degree,
              "back_subs": {k: str(v) for k, v in r.back_subs.items()}}
    lines = [f"univariate: {r.univariate}", f"cofactor ({keep}^{r.removed_power} removed, degree {r.degree}): {r.cofactor}"]
    lines += [f"{k} = {v}" for k, v in r.back_subs.items()]
    emit(args, "rur", m, result, "\n".join(lines))
    return 0


def cmd_fixed_points(args):
    m = prepare(args)
    if m.params:
        raise UsageError(f"fix every parameter with --fix (free: {', '.join(m.params)})")
    pts = equilibria.fixed_points_numeric(m, {})
    result = {"state_vars": list(m.state_vars), "points": [_fp(p, m.state_vars) for p in pts]}
    lines = []
    for p in pts:
        eig = ", ".join(f"{e.real:.6g}{e.imag:+.6g}i" for e in p.jacobian_eigenvalues)
        lines.append(f"({', '.join(f'{c:.9g}' for c in p.coordinates)})  {p.classification}  eig [{eig}]")
    emit(args, "fixed-points", m, result, "\n".join(lines) or "no fixed points in the non-negative orthant")
    return 0


def cmd_crn(args):
    m = prepare(args)
    g = crn.to_crn(m)
    stats = crn.crn_stats(g)
    if args.dot:
        Path(args.dot).write_text(g.to_dot(m.name), encoding="utf-8")
    text = "\n".join(f"{r['source']} -> {r['product']}  [{r['rate']}]" for r in stats["reactions"])
    text += (f"\nn_V={stats['n_V']} n_R={stats['n_R']} n_s={stats['n_s']} linkage classes={stats['linkage_classes']}"
             f" rank={stats['stoich_rank']} deficiency={stats['deficiency']}"
             f" weakly reversible={stats['weakly_reversible']}")
    emit(args, "crn", m, stats, text)
    return 0


def _sirph_spec(m: Model) -> sirph.SirPhSpec:
    if m.sirph is None:
        raise UsageError(f"model {m.name} has no sirph section")
    names = m.state_vars if len(m.state_vars) == m.sirph.n + 2 else ()
    return sirph.spec_from_section(m.sirph, m.params, names)


def cmd_kernel(args):
    m = resolve_model(args.model)
    spec = _sirph_spec(m)
    fix = parse_fixings(args.fix)
    objs = sirph.kernel(spec, laplace_var=args.laplace_var)
    if fix:
        unknown = set(fix) - set(m.params)
        if unknown:
            raise UsageError(f"--fix refers to unknown parameters {sorted(unknown)}")
        missing = set(m.params) - set(fix)
        if missing:
            raise UsageError(f"kernel quadrature needs every parameter fixed (free: {sorted(missing)})")
        try:
            draws = [{k: Fraction(v) for k, v in fix.items()}]
        except ValueError:
            raise UsageError("kernel --fix values must be numbers") from None
    else:
        draws = list(positive_draws(m.params, args.draws, args.seed))
    checks = []
    for vals in draws:
        chk = sirph.kernel_quadrature_check(spec, vals, objects=objs)
        checks.append({"params": {k: float(v) for k, v in vals.items()}, "integral": chk.integral + chk.tail,
                       "R_integral": chk.R_integral, "residual": chk.residual, "T": chk.T})
    worst = max(c["residual"] for c in checks)
    ok = worst < args.tol_quad
    result = {"laplace_var": objs.laplace_var, "a_hat": str(objs.a_hat), "R_integral": str(objs.R_integral),
              "checks": checks, "max_residual": worst, "ok": bool(ok)}
    text = (f"a_hat({objs.laplace_var}) = {objs.a_hat}\nR = {objs.R_integral}\n"
            f"quadrature: max residual {worst:.3e} over {len(checks)} draw(s) -> {'ok' if ok else 'FAIL'}")
    emit(args, "kernel", m, result, text)
    return 0 if ok else 1


def cmd_geometry(args):
    m = prepare(args)
    g = geometry.geometry_objects(m)
    result = {
        "state_vars": list(m.state_vars), "L": str(g.L), "H": str(g.H),
        "N_lagrange": _matrix(g.N_lagrange), "R_lagrange": [_matrix(r) for r in g.R_lagrange],
        "EYM": str(g.EYM), "N_hamilton": _matrix(g.N_hamilton), "R_hamilton": [_matrix(r) for r in g.R_hamilton],
        "invariant_failures": g.invariant_failures(),
    }
    text = "\n".join([f"L = {g.L}", f"H = {g.H}", f"N_lagrange = {g.N_lagrange}",
                      *(f"R_{v} = {r}" for v, r in zip(m.state_vars, g.R_lagrange)),
                      f"EYM = {g.EYM}", f"N_hamilton = {g.N_hamilton}"])
    emit(args, "geometry", m, result, text)
    return 0


def cmd_scan(args):
    m = resolve_model(args.model)
    fix = parse_fixings(args.fix)
    unknown = set(fix) - set(m.params)
    if unknown:
        raise UsageError(f"--fix refers to unknown parameters {sorted(unknown)}")
    if args.free not in m.params:
        raise UsageError(f"--free {args.free!r} is not a parameter")
    lo, hi = args.range
    scan = bifurcation.branch_scan(m, args.free, lo, hi, fix, n=args.points, tol=args.tol_event)
    if args.csv:
        Path(args.csv).write_text(scan.to_csv(), encoding="utf-8")
    result = {"free_param": args.free, "range": [lo, hi], "points": args.points,
              "events": [{"value": v, "event": e} for v, e in scan.events]}
    emit(args, "bifurcate-scan", m, result, scan.events_csv().rstrip("\n"))
    return 0


def cmd_bt(args):
    m = resolve_model(args.model)
    fix = parse_fixings(args.fix)
    free = [p for p in args.free.split(",") if p]
    if len(free) != 2 or any(p not in m.params for p in free):
        raise UsageError("--free needs two parameter names separated by a comma")
    unknown = set(fix) - set(m.params)
    if unknown:
        raise UsageError(f"--fix refers to unknown parameters {sorted(unknown)}")
    box = args.box
    if len(box) != 2:
        raise UsageError("--box needs two ranges, e.g. 0.03:0.1,0.2:0.5")
    cands = bifurcation.bt_candidates(m, free, box, fix, grid=args.grid)
    if args.csv:
        Path(args.csv).write_text(bifurcation.candidates_csv(cands, free), encoding="utf-8")
    result = {"free": free, "candidates": [
        {"params": c.param_values, "kind": c.kind, "residuals": list(c.residuals),
         "witness": _fp(c.witness_fixed_point, m.state_vars)} for c in cands]}
    emit(args, "bifurcate-bt", m, result, bifurcation.candidates_csv(cands, free).rstrip("\n"))
    return 0


def cmd_simulate(args):
    m = prepare(args)
    if m.params:
        raise UsageError(f"fix every parameter with --fix (free: {', '.join(m.params)})")
    traj = bifurcation.simulate(m, {}, args.init, args.t_end, args.dt)
    if args.csv:
        Path(args.csv).write_text(traj.to_csv(), encoding="utf-8")
    result = {"state_vars": list(m.state_vars), "t": traj.t.tolist(), "y": traj.y.tolist()}
    emit(args, "simulate", m, result, traj.to_csv().rstrip("\n"))
    return 0


# argument parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="model file, or the name of a bundled model")
    common.add_argument("--infectious", help="comma-separated infectious variables (overrides the file)")
    common.add_argument("--fix", action="append", default=[], metavar="NAME=VALUE",
                        help="fix a parameter to a number or an expression in the other parameters")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for random parameter draws")
    common.add_argument("--draws", type=int, default=20, help="number of random positive parameter draws")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--output", "-o", help="write the report to this file instead of stdout")

    p = argparse.ArgumentParser(prog="epikit", description="Analysis of polynomial kinetic ODE models.")
    p.add_argument("--list-models", action="store_true", help="list bundled models and exit")
    sub = p.add_subparsers(dest="command", metavar="command")

    sub.add_parser("check", parents=[common], help="non-negativity (negative cross-effect) check").set_defaults(fn=cmd_check)
    d = sub.add_parser("dfe", parents=[common], help="disease-free equilibria")
    d.add_argument("--expect-unique-dfe", action="store_true", help="exit 1 unless exactly one DFE is found")
    d.set_defaults(fn=cmd_dfe)
    sub.add_parser("ngm", parents=[common], help="next-generation matrix and R_N").set_defaults(fn=cmd_ngm)
    r = sub.add_parser("r0", parents=[common], help="R_N and R_J side by side")
    r.add_argument("--tol-guard", type=float, default=1e-7, help="guard band around 1 for locus comparison")
    r.set_defaults(fn=cmd_r0)
    u = sub.add_parser("rur", parents=[common], help="univariate reduction of the fixed-point system")
    u.add_argument("--keep", help="state variable to keep (default: first infectious)")
    u.set_defaults(fn=cmd_rur)
    sub.add_parser("fixed-points", parents=[common], help="numeric fixed points at fixed parameters").set_defaults(
        fn=cmd_fixed_points)
    c = sub.add_parser("crn", parents=[common], help="reaction network, deficiency, DOT export")
    c.add_argument("--dot", metavar="PATH", help="write the complex graph in DOT format")
    c.set_defaults(fn=cmd_crn)
    k = sub.add_parser("kernel", parents=[common], help="SIR-PH-FA kernel objects and quadrature check")
    k.add_argument("--laplace-var", default="s", help="name of the Laplace variable")
    k.add_argument("--tol-quad", type=float, default=1e-6, help="maximum accepted quadrature residual")
    k.set_defaults(fn=cmd_kernel)
    sub.add_parser("geometry", parents=[common], help="Lagrange-Hamilton objects").set_defaults(fn=cmd_geometry)

    b = sub.add_parser("bifurcate", help="branch scans and Bogdanov-Takens candidates")
    bsub = b.add_subparsers(dest="mode", metavar="mode")
    sc = bsub.add_parser("scan", parents=[common], help="one-parameter branch scan")
    sc.add_argument("--free", required=True, help="parameter to vary")
    sc.add_argument("--range", required=True, type=_range, help="lo:hi")
    sc.add_argument("--points", type=int, default=101, help="grid size")
    sc.add_argument("--csv", metavar="PATH", help="write branch data as CSV")
    sc.add_argument("--tol-event", type=float, default=bifurcation.EVENT_TOL, help="event refinement tolerance")
    sc.set_defaults(fn=cmd_scan)
    bt = bsub.add_parser("bt", parents=[common], help="Bogdanov-Takens candidates in a parameter box")
    bt.add_argument("--free", required=True, help="two parameters, comma separated")
    bt.add_argument("--box", required=True, type=lambda t: [_range(x) for x in t.split(",")],
                    help="lo1:hi1,lo2:hi2")
    bt.add_argument("--grid", type=int, default=8, help="seed grid size per axis")
    bt.add_argument("--csv", metavar="PATH", help="write candidates as CSV")
    bt.set_defaults(fn=cmd_bt)

    s = sub.add_parser("simulate", parents=[common], help="integrate the ODE and emit a trajectory")
    s.add_argument("--init", required=True, type=_floats, help="comma-separated initial state")
    s.add_argument("--t-end", required=True, type=float)
    s.add_argument("--dt", type=float, default=0.1, help="output spacing")
    s.add_argument("--csv", metavar="PATH", help="write the trajectory as CSV")
    s.set_defaults(fn=cmd_simulate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.list_models:
        print("\n".join(bundled_models()))
        return 0
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except ANALYSIS_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
