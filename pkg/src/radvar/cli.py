"""Command-line front end: ``radvar <subcommand> ...``.

Every run writes ``report.json`` and ``meta.json`` (timestamp and argv, kept
apart so reports are byte-reproducible) into ``--out``; solver runs also
write ``profile.csv`` and sweeps write ``sweep.json``.

Exit codes: 0 success, 1 usage error, 2 hypothesis violation or
incompatible data, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import convexfun as cf
from .catalog import example2_energy, example2_profile, example_catalog, get_example
from .directsolve import SolveOptions, minimize, perturbation_sweep
from .elsolve import ELPair, fixed_point_solve, momentum_from_profile, residuals
from .errors import (
    HypothesisViolation,
    IncompatibleProblem,
    NoConvergence,
    RadvarError,
    SchemaError,
    UnknownExample,
)
from .problem import (
    DiscreteProfile,
    RadialProblem,
    frad_value,
    geometric_grid,
    load_problem,
    uniform_grid,
)
from .symmetry import BallFunction, symmetrization_report
from .verify import (
    check_momentum_bound,
    check_slope_bound,
    convexity_certificate,
    extremality_check,
    p_monotonicity_certificate,
)

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_NOCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# serialization


def _fmt(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    return json.dumps(str(obj))


def dumps(obj) -> str:
    """JSON text with floats written to 17 significant digits."""
    return _fmt(obj) + "\n"


def write_profile_csv(path: Path, grid, u, slopes, p=None, res_h=None, res_g=None):
    n = len(grid) - 1

    def cell(arr, i):
        return "" if arr is None or i >= n else "%.17g" % arr[i]

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "slope", "p", "res_h", "res_g"])
        for i in range(n + 1):
            w.writerow(
                ["%.17g" % grid[i], "%.17g" % u[i], cell(slopes, i),
                 "" if p is None else "%.17g" % p[i], cell(res_h, i), cell(res_g, i)]
            )


def read_profile_csv(path) -> DiscreteProfile:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    r = np.array([float(x["r"]) for x in rows])
    u = np.array([float(x["u"]) for x in rows])
    return DiscreteProfile.from_values(r, u)


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    subcommand: str
    problem: str | None
    example: str | None
    n: int | None
    out: Path
    seed: int
    tol: float | None
    eps: float

    def load(self) -> RadialProblem:
        if (self.problem is None) == (self.example is None):
            raise UsageError("give exactly one of a problem spec path or --example")
        if self.n is not None and self.n < 8:
            raise UsageError("--n must be >= 8")
        if self.example:
            return get_example(self.example, eps=self.eps, n=self.n)
        try:
            spec = json.loads(Path(self.problem).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read problem spec: {exc}") from exc
        return load_problem(spec, seed=self.seed)

    def grid(self, prob: RadialProblem):
        spec = (prob.spec or {}).get("grid", {})
        n = self.n or spec.get("n", 400)
        if spec.get("grading") == "geometric":
            return geometric_grid(prob.R, n, spec.get("r_min", prob.R * 1e-4))
        return uniform_grid(prob.R, n)

    def solve_options(self) -> SolveOptions:
        kw = {"seed": self.seed}
        if self.tol is not None:
            kw["tol"] = self.tol
        return SolveOptions(**kw)


def _write(cfg: RunConfig, report: dict, argv):
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "report.json").write_text(dumps(report))
    meta = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "argv": list(argv),
        "version": __version__,
    }
    (cfg.out / "meta.json").write_text(dumps(meta))


def _profile_rows(prob: RadialProblem, prof: DiscreteProfile, cfg: RunConfig, p=None):
    if p is None:
        p = momentum_from_profile(prob, prof)
    rep = residuals(prob, ELPair(prof.grid, prof.u, p, prof.slopes))
    write_profile_csv(cfg.out / "profile.csv", prof.grid, prof.u, prof.slopes, p, rep.res_h_cells, rep.res_g_cells)
    return rep


def _problem_header(prob: RadialProblem) -> dict:
    return {"name": prob.name, "N": prob.N, "R": prob.R, "compatibility": prob.report.to_dict()}


# --------------------------------------------------------------------------
# subcommands


def cmd_check(cfg: RunConfig, args) -> tuple[dict, int]:
    prob = cfg.load()
    rep = prob.report
    code = EXIT_OK if rep.compatible else EXIT_HYPOTHESIS
    return {"command": "check", **_problem_header(prob)}, code


def cmd_solve_direct(cfg: RunConfig, args) -> tuple[dict, int]:
    prob = cfg.load()
    grid = cfg.grid(prob)
    res = minimize(prob, grid, cfg.solve_options())
    cfg.out.mkdir(parents=True, exist_ok=True)
    rep = _profile_rows(prob, res.profile, cfg)
    out = {
        "command": "solve-direct",
        **_problem_header(prob),
        "n": len(grid) - 1,
        "value": res.value,
        "start": res.start,
        "start_values": res.values,
        "max_slope": float(np.max(np.abs(res.profile.slopes))),
        "residuals": rep.to_dict(),
        "warnings": res.warnings,
    }
    return out, EXIT_OK


def cmd_solve_el(cfg: RunConfig, args) -> tuple[dict, int]:
    prob = cfg.load()
    grid = cfg.grid(prob)
    code = EXIT_OK
    kw = {"max_iter": args.max_iter}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    try:
        pair = fixed_point_solve(prob, grid, init=args.init, **kw)
    except NoConvergence as exc:
        pair = exc.result
        code = EXIT_NOCONV
    cfg.out.mkdir(parents=True, exist_ok=True)
    _profile_rows(prob, pair.profile, cfg, pair.p)
    out = {
        "command": "solve-el",
        **_problem_header(prob),
        "n": len(grid) - 1,
        "status": pair.status,
        "iterations": pair.iterations,
        "value": frad_value(prob, pair.profile),
        "residuals": pair.report.to_dict(),
    }
    return out, code


def _certificates(prob: RadialProblem, prof: DiscreteProfile) -> dict:
    p = momentum_from_profile(prob, prof)
    pair = ELPair(prof.grid, prof.u, p, prof.slopes)
    pair.report = residuals(prob, pair)
    out = {"residuals": pair.report.to_dict(), "convexity": convexity_certificate(prof).to_dict()}
    for key, fn in (("momentum_bound", check_momentum_bound), ("slope_bound", check_slope_bound)):
        try:
            out[key] = fn(prob, pair).to_dict()
        except RadvarError as exc:
            out[key] = {"error": f"{type(exc).__name__}: {exc}"}
    if prob.h.is_convex:
        try:
            out["p_monotonicity"] = p_monotonicity_certificate(prob, pair, 0.5).to_dict()
        except RadvarError as exc:
            out["p_monotonicity"] = {"error": f"{type(exc).__name__}: {exc}"}
    if prob.g_samples is not None:
        try:
            out["extremality"] = extremality_check(prob.g_samples, prof, prob).to_dict()
        except RadvarError as exc:
            out["extremality"] = {"error": f"{type(exc).__name__}: {exc}"}
    return out


def cmd_verify(cfg: RunConfig, args) -> tuple[dict, int]:
    prob = cfg.load()
    if args.profile:
        prof = read_profile_csv(args.profile)
    else:
        prof = minimize(prob, cfg.grid(prob), cfg.solve_options()).profile
    cfg.out.mkdir(parents=True, exist_ok=True)
    _profile_rows(prob, prof, cfg)
    out = {
        "command": "verify",
        **_problem_header(prob),
        "value": frad_value(prob, prof),
        "certificates": _certificates(prob, prof),
    }
    return out, EXIT_OK


def cmd_symmetrize(cfg: RunConfig, args) -> tuple[dict, int]:
    prob = cfg.load()
    if args.ball:
        ball = BallFunction.from_csv(args.ball, prob.R)
    else:
        R, amp = prob.R, args.amp
        ball = BallFunction.from_function(
            R, args.n_r, args.n_theta, lambda r, t: -(R - r) * (1 + amp * (r / R) * np.cos(t))
        )
    rep = symmetrization_report(prob, ball)
    return {"command": "symmetrize", **_problem_header(prob), "report": rep.to_dict()}, EXIT_OK


def _function_from_args(args) -> cf.ConvexScalar:
    if args.kind == "abs":
        return cf.Power(args.coef, 1.0, label="|s|")
    if args.kind == "power":
        return cf.Power(args.coef, args.exp)
    if args.kind == "xlog":
        return cf.XLog(args.coef)
    if args.kind == "pwl":
        if not args.breakpoints or not args.values:
            raise UsageError("--kind pwl needs --breakpoints and --values")
        return cf.make_pwl(args.breakpoints, args.values, args.domain_end)
    raise UsageError(f"unknown kind {args.kind}")


def cmd_conjugate(cfg: RunConfig, args) -> tuple[dict, int]:
    f = _function_from_args(args)
    fs = f.conjugate()
    fss = fs.conjugate()
    s = np.linspace(-args.s_max, args.s_max, args.points)
    table = {"s": s.tolist(), "f": f(s).tolist(), "f_star": fs(s).tolist(), "f_star_star": fss(s).tolist()}
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "conjugate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "f", "f_star", "f_star_star"])
        for row in zip(*table.values()):
            w.writerow(["%.17g" % x for x in row])
    out = {"command": "conjugate", "f": f.label, "f_star": repr(fs), "f_star_star": repr(fss), "table": table}
    return out, EXIT_OK


def cmd_example(cfg: RunConfig, args) -> tuple[dict, int]:
    name = args.name
    if name not in example_catalog():
        raise UnknownExample(name)
    cfg.example = name
    prob = cfg.load()
    grid = cfg.grid(prob)
    opts = cfg.solve_options()
    out = {"command": "example", **_problem_header(prob), "n": len(grid) - 1}
    code = EXIT_OK
    cfg.out.mkdir(parents=True, exist_ok=True)
    if name == "perturbation":
        lambdas = args.lam or [0.1, 1.0, 10.0]
        rep = perturbation_sweep(prob, lambdas, args.a, grid, opts)
        (cfg.out / "sweep.json").write_text(dumps(rep.to_dict()))
        out["sweep"] = rep.to_dict()
        res = minimize(prob, grid, opts)
        _profile_rows(prob, res.profile, cfg)
        return out, code
    res = minimize(prob, grid, opts)
    out["direct"] = {"value": res.value, "start": res.start, "start_values": res.values,
                     "max_slope": float(np.max(np.abs(res.profile.slopes)))}
    out["certificates"] = _certificates(prob, res.profile)
    el = {}
    for init in ("zero", "cone"):
        try:
            pair = fixed_point_solve(prob, grid, init=init)
        except NoConvergence as exc:
            pair = exc.result
        el[init] = {"status": pair.status, "iterations": pair.iterations,
                    "value": frad_value(prob, pair.profile), "residuals": pair.report.to_dict()}
    out["el"] = el
    if name == "example2":
        ref = DiscreteProfile.from_function(grid, lambda r: example2_profile(r, cfg.eps))
        conv = convexity_certificate(ref)
        out["reference"] = {
            "closed_form_value": example2_energy(cfg.eps),
            "quadrature_value": frad_value(prob, ref),
            "convexity": conv.to_dict(),
            "is_convex": conv.passes,
            "direct_minus_reference": res.value - frad_value(prob, ref),
        }
    _profile_rows(prob, res.profile, cfg)
    return out, code


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="number of grid cells")
    common.add_argument("--eps", type=float, default=0.5, help="example2 parameter")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("radvar_out"))
    common.add_argument("--tol", type=float, default=None)

    probsrc = _Parser(add_help=False)
    probsrc.add_argument("problem", nargs="?", help="problem spec (JSON)")
    probsrc.add_argument("--example", default=None, help="catalog problem instead of a spec file")

    ap = _Parser(prog="radvar", description="Radial variational problems: solve and verify.")
    ap.add_argument("--version", action="version", version=f"radvar {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    sub.add_parser("check", parents=[common, probsrc], help="compatibility report")
    sub.add_parser("solve-direct", parents=[common, probsrc], help="direct minimization")
    el = sub.add_parser("solve-el", parents=[common, probsrc], help="Euler-Lagrange fixed point")
    el.add_argument("--init", choices=["zero", "cone"], default="zero")
    el.add_argument("--max-iter", type=int, default=10000)
    ver = sub.add_parser("verify", parents=[common, probsrc], help="certificates on a profile")
    ver.add_argument("--profile", default=None, help="profile CSV (default: solve first)")
    sym = sub.add_parser("symmetrize", parents=[common, probsrc], help="planar symmetrization check")
    sym.add_argument("--ball", default=None, help="CSV with r,theta,value rows")
    sym.add_argument("--n-r", type=int, default=64)
    sym.add_argument("--n-theta", type=int, default=64)
    sym.add_argument("--amp", type=float, default=0.3)
    conj = sub.add_parser("conjugate", parents=[common], help="tables of f, f*, f**")
    conj.add_argument("--kind", choices=["abs", "power", "pwl", "xlog"], required=True)
    conj.add_argument("--coef", type=float, default=1.0)
    conj.add_argument("--exp", type=float, default=2.0)
    conj.add_argument("--breakpoints", type=float, nargs="*")
    conj.add_argument("--values", type=float, nargs="*")
    conj.add_argument("--domain-end", type=float, default=None)
    conj.add_argument("--s-max", type=float, default=2.0)
    conj.add_argument("--points", type=int, default=41)
    ex = sub.add_parser("example", parents=[common], help="full pipeline on a catalog problem")
    ex.add_argument("name")
    ex.add_argument("--lambda", dest="lam", type=float, action="append", default=None)
    ex.add_argument("--a", type=float, default=10.0)
    return ap


COMMANDS = {
    "check": cmd_check,
    "solve-direct": cmd_solve_direct,
    "solve-el": cmd_solve_el,
    "verify": cmd_verify,
    "symmetrize": cmd_symmetrize,
    "conjugate": cmd_conjugate,
    "example": cmd_example,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"radvar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(
        args.cmd,
        getattr(args, "problem", None),
        getattr(args, "example", None),
        args.n,
        args.out,
        args.seed,
        args.tol,
        args.eps,
    )
    try:
        report, code = COMMANDS[args.cmd](cfg, args)
    except UsageError as exc:
        print(f"radvar: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnknownExample, SchemaError) as exc:
        _write(cfg, {"command": args.cmd, "error": f"{type(exc).__name__}: {exc}"}, argv)
        print(f"radvar: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HypothesisViolation, IncompatibleProblem) as exc:
        _write(cfg, {"command": args.cmd, "error": f"{type(exc).__name__}: {exc}"}, argv)
        print(f"radvar: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NoConvergence as exc:
        _write(cfg, {"command": args.cmd, "error": f"NoConvergence: {exc}"}, argv)
        return EXIT_NOCONV
    except RadvarError as exc:
        _write(cfg, {"command": args.cmd, "error": f"{type(exc).__name__}: {exc}"}, argv)
        print(f"radvar: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    _write(cfg, report, argv)
    print(f"radvar {args.cmd}: wrote {cfg.out / 'report.json'} (exit {code})")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
