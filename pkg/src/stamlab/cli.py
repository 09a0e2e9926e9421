"""``stam`` command-line front end.

Every command prints a JSON report on stdout and a short human summary on
stderr. Exit codes: 0 when every check holds, 2 when a violation or
counterexample was found, 1 on errors and failed reproduction criteria.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from . import density1d as dens
from . import explorer, fracpart, gauss, io, repro
from .fracpart import check_fsa, enumerate_extreme_partitions
from .setfn import check_submodular_log, check_supermodular, check_supermodular_local

EXIT_OK, EXIT_ERROR, EXIT_FOUND = 0, 1, 2

FAMILIES = ("gaussian", "uniform", "triangle", "laplace", "smoothed-laplace")


class CommandError(Exception):
    """User-facing error with a machine-readable kind."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise CommandError(f"{name} must be an integer, got {raw!r}") from None


def density_from_arg(arg: str, dx: float) -> dens.GridDensity:
    """A JSON file path, or ``family[:param]`` such as ``gaussian:0.01``."""
    if Path(arg).is_file():
        return io.density_from_json(io.load_json(arg))
    name, _, param = arg.partition(":")
    if name not in FAMILIES:
        raise CommandError(f"{arg!r} is neither a file nor one of {', '.join(FAMILIES)}")
    try:
        p = float(param) if param else None
    except ValueError:
        raise CommandError(f"bad parameter in {arg!r}") from None
    if name == "gaussian":
        return dens.gaussian(p if p is not None else 1.0, dx=dx)
    if name == "uniform":
        return dens.uniform(0.0, p if p is not None else 1.0, dx=dx)
    if name == "triangle":
        return dens.triangle(0.0, p if p is not None else 2.0, dx=dx)
    if name == "laplace":
        return dens.laplace(p if p is not None else 1.0, dx=dx)
    return dens.smoothed_laplace(p if p is not None else 1.0, dx=dx)


def _verdict(rep) -> int:
    return EXIT_OK if rep.holds else EXIT_FOUND


# commands --------------------------------------------------------------------
# each returns (result dict, list of property reports, exit code, summary line)

def cmd_check_fsa(args):
    v = io.setfn_from_json(io.load_json(args.file))
    rep = check_fsa(v, tol=args.tol, mode=args.mode, rel=args.rel)
    summary = f"fractional superadditivity {'holds' if rep.holds else 'FAILS'}, margin {rep.margin:.6g}"
    return {}, [rep], _verdict(rep), summary


def cmd_check_supermodular(args):
    v = io.setfn_from_json(io.load_json(args.file))
    check = check_supermodular_local if args.local else check_supermodular
    rep = check(v, tol=args.tol, rel=args.rel)
    summary = f"supermodularity {'holds' if rep.holds else 'FAILS'}, margin {rep.margin:.6g}"
    return {}, [rep], _verdict(rep), summary


def cmd_check_submodular_log(args):
    v = io.setfn_from_json(io.load_json(args.file))
    rep = check_submodular_log(v, tol=args.tol)
    summary = f"product-form submodularity {'holds' if rep.holds else 'FAILS'}, margin {rep.margin:.6g}"
    return {}, [rep], _verdict(rep), summary


def cmd_extreme_partitions(args):
    verts = enumerate_extreme_partitions(args.n)
    if args.float:
        verts = [fracpart.FractionalPartition(b.n, {m: float(w) for m, w in b.weights.items()}) for b in verts]
    return {"n": args.n, "count": len(verts), "partitions": verts}, [], EXIT_OK, \
        f"{len(verts)} extreme fractional partitions for n={args.n}"


def cmd_gauss_nu(args):
    ens = io.ensemble_from_json(io.load_json(args.file))
    nu = gauss.nu_G(ens, include_constant=args.constant)
    return {"nu": nu}, [], EXIT_OK, f"det-root set function for n={ens.n}, d={ens.d}"


def cmd_gauss_counterexample(args):
    nu, gap = gauss.supermodularity_counterexample(args.eps)
    rep = check_supermodular(nu)
    code = EXIT_FOUND if gap > 0 else EXIT_OK
    return {"eps": args.eps, "nu": nu, "gap": gap}, [rep], code, f"supermodularity gap {gap:+.7f}"


def cmd_gauss_search(args):
    res = gauss.search_supermodularity_violation(
        args.d, args.n, seed=args.seed, iters=args.iters, starts=args.starts, threads=args.threads
    )
    found = res.gap > args.tol
    result = {"ensemble": res.ensemble, "gap": res.gap, "relative_gap": res.relative_gap,
              "start": res.start, "evaluations": res.evaluations, "nu": gauss.nu_G(res.ensemble)}
    return result, [], EXIT_FOUND if found else EXIT_OK, \
        f"best supermodularity gap {res.gap:.6g} ({'violation found' if found else 'none found'})"


def cmd_gauss_equality(args):
    ens = io.ensemble_from_json(io.load_json(args.file))
    diag = gauss.epi_equality_diagnostic(ens, tol=args.tol)
    code = EXIT_OK if diag.equality_holds else EXIT_FOUND
    return {"diagnostic": diag}, [], code, \
        f"equality {'holds' if diag.equality_holds else 'fails'}, proportional={diag.proportional}"


def cmd_density_nu(args):
    fs = [density_from_arg(s, args.dx) for s in args.densities]
    nu = dens.nu_from_densities(fs)
    return {"nu": nu}, [], EXIT_OK, f"entropy powers of {nu.n} densities"


def cmd_density_entropy(args):
    f = density_from_arg(args.density, args.dx)
    h = dens.entropy(f)
    return {"entropy": h, "entropy_power": dens.entropy_power(f), "grid": f.meta()}, [], EXIT_OK, \
        f"h = {h:.9g} nats"


def cmd_density_fisher(args):
    f = density_from_arg(args.density, args.dx)
    fi = dens.fisher_information(f)
    result = {"fisher": fi, "fisher_score_form": dens.fisher_information_score(f),
              "ni": dens.entropy_power(f) * fi, "grid": f.meta()}
    return result, [], EXIT_OK, f"I = {fi:.9g}"


def cmd_bc(args):
    w = dens.BCWeights(tuple(args.weights))
    h = dens.bc_entropy_formula(w)
    result = {"weights": list(w.a), "entropy": h}
    code, summary = EXIT_OK, f"h(X + X') = {h:.12g}"
    if args.verify:
        oracle = dens.bc_selfconv_entropy_exact(w)
        result["oracle"] = oracle
        result["difference"] = h - oracle
        if abs(h - oracle) > args.tol:
            code = EXIT_ERROR
        summary += f", oracle {oracle:.12g}"
    return result, [], code, summary


def cmd_debruijn(args):
    f = density_from_arg(args.density, args.dx)
    rep = dens.de_bruijn_check(f, args.eps, rtol=args.rtol)
    return {"de_bruijn": rep}, [], EXIT_OK if rep.holds else EXIT_ERROR, \
        f"de Bruijn slopes {'match' if rep.holds else 'do not match'} within {args.rtol:g}"


def cmd_qsup(args):
    x, y, z = (density_from_arg(s, args.dx) for s in (args.x, args.y, args.z))
    gap = dens.q_sup_gap(x, y, z)
    found = gap < -args.tol
    return {"gap": gap, "violation": found}, [], EXIT_FOUND if found else EXIT_OK, \
        f"N(X+Y+Z) + N(Z) - N(X+Z) - N(Y+Z) = {gap:.9g}"


def cmd_stack(args):
    a = io.point_from_json(io.load_json(args.a))
    b = io.point_from_json(io.load_json(args.b))
    s = explorer.stack_points(a, b, args.m, args.l)
    return {"point": s}, [], EXIT_OK, f"stacked point in dimension {s.dim}"


def cmd_dim2_ray(args):
    ray = explorer.dim2_ray_construct(args.u1, args.u2, args.C, dx=args.dx)
    result = {"point": ray.achieved, "n_weights": ray.n_weights, "smoothing_var": ray.smoothing_var,
              "details": ray.details}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.dump(ray.x, out / "x.json")
        io.dump(ray.y, out / "y.json")
        result["files"] = [str(out / "x.json"), str(out / "y.json")]
    nx, ny, nxy = ray.achieved.values.values
    return result, [], EXIT_OK, f"N(X) = {nx:.6g}, N(Y) = {ny:.6g}, N(X+Y) = {nxy:.6g}"


def cmd_dim3_gap(args):
    rep = explorer.dim3_gap_report(args.a, args.b, args.c)
    return {"gap_report": rep}, [], EXIT_OK, \
        f"FSA ray [{rep.fsa_lower:g}, inf) against the single value {rep.stam_value:g}"


def cmd_ni_probe(args):
    f = density_from_arg(args.family, args.dx)
    probe = explorer.ni_monotonicity_probe(f, args.steps)
    line = ", ".join(f"{p:.6g}" for p in probe.products)
    return {"steps": probe.steps, "grids": probe.grid}, [], EXIT_OK, f"N*I along self-convolutions: {line}"


def cmd_repro(args):
    numbers = repro.RECIPES[args.name]
    kwargs = {"eps": args.eps} if args.eps is not None else {}
    results = repro.run_criteria(numbers, seed=args.seed, quick=args.quick, **kwargs)
    if args.json:
        out = Path(args.json)
        out.mkdir(parents=True, exist_ok=True)
        for r in results:
            io.dump(r, out / f"criterion_{r.number:02d}.json")
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed and r.within_budget for r in results)
    code = EXIT_OK if ok else EXIT_ERROR
    if ok and args.name != "all" and any(r.violation_found for r in results):
        code = EXIT_FOUND
    passed = sum(r.passed and r.within_budget for r in results)
    return {"criteria": results}, [], code, f"{passed}/{len(results)} criteria pass"


# parser ----------------------------------------------------------------------

def _add_tol(p, default=0.0, rel=True):
    p.add_argument("--tol", type=float, default=default, help="tolerance on the margin")
    if rel:
        p.add_argument("--rel", action="store_true", help="scale the tolerance by v([n])")


def _add_dx(p):
    p.add_argument("--dx", type=float, default=dens.DEFAULT_DX, help="grid step for built-in families")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (env STAM_THREADS)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (env STAM_SEED)")
    parser.add_argument("--indent", type=int, default=2, help="JSON indent, 0 for one line")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-fsa", help="fractional superadditivity of a set function")
    p.add_argument("file")
    p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")
    _add_tol(p)
    p.set_defaults(func=cmd_check_fsa)

    p = sub.add_parser("check-supermodular", help="supermodularity of a set function")
    p.add_argument("file")
    p.add_argument("--local", action="store_true", help="use the local two-element form")
    _add_tol(p)
    p.set_defaults(func=cmd_check_supermodular)

    p = sub.add_parser("check-submodular-log", help="product-form submodularity, n = 3")
    p.add_argument("file")
    _add_tol(p, rel=False)
    p.set_defaults(func=cmd_check_submodular_log)

    p = sub.add_parser("extreme-partitions", help="vertices of the fractional-partition polytope")
    p.add_argument("-n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="rational weights (default)")
    g.add_argument("--float", action="store_true", help="decimal weights")
    p.set_defaults(func=cmd_extreme_partitions)

    gp = sub.add_parser("gauss", help="Gaussian ensembles").add_subparsers(dest="gauss_command", required=True)
    p = gp.add_parser("nu", help="det-root set function of an ensemble")
    p.add_argument("file")
    p.add_argument("--constant", action="store_true", help="include the 2 pi e factor")
    p.set_defaults(func=cmd_gauss_nu)
    p = gp.add_parser("counterexample", help="diagonal supermodularity counterexample")
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_gauss_counterexample)
    p = gp.add_parser("search", help="hill-climbing search for supermodularity violations")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-12, help="smallest gap reported as a violation")
    p.set_defaults(func=cmd_gauss_search)
    p = gp.add_parser("equality", help="EPI equality diagnostic")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_gauss_equality)

    dp = sub.add_parser("density", help="1-D densities on a grid").add_subparsers(dest="density_command", required=True)
    p = dp.add_parser("nu", help="entropy powers of all subset sums")
    p.add_argument("densities", nargs="+", help="JSON files or family[:param]")
    _add_dx(p)
    p.set_defaults(func=cmd_density_nu)
    for name, fn in (("entropy", cmd_density_entropy), ("fisher", cmd_density_fisher)):
        p = dp.add_parser(name)
        p.add_argument("density", help="JSON file or family[:param]")
        _add_dx(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("bc", help="entropy of X + X' for an interval mixture")
    p.add_argument("--weights", type=float, nargs="+", required=True)
    p.add_argument("--verify", action="store_true", help="compare with the exact convolution oracle")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_bc)

    p = sub.add_parser("debruijn", help="finite-difference de Bruijn check")
    p.add_argument("density", help="JSON file or family[:param]")
    p.add_argument("--eps", type=float, nargs="+", default=[1e-3])
    p.add_argument("--rtol", type=float, default=0.02)
    _add_dx(p)
    p.set_defaults(func=cmd_debruijn)

    p = sub.add_parser("qsup", help="N(X+Y+Z) + N(Z) - N(X+Z) - N(Y+Z)")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("z")
    p.add_argument("--tol", type=float, default=1e-9, help="negative gaps above -tol count as round-off")
    _add_dx(p)
    p.set_defaults(func=cmd_qsup)

    p = sub.add_parser("stack", help="geometric-mean stacking of two points")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-m", type=int, default=1)
    p.add_argument("-l", type=int, default=1)
    p.set_defaults(func=cmd_stack)

    p = sub.add_parser("dim2-ray", help="explicit witnesses with N(X+Y) >= C")
    p.add_argument("--u1", type=float, required=True)
    p.add_argument("--u2", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--out", help="directory for the two density files")
    _add_dx(p)
    p.set_defaults(func=cmd_dim2_ray)

    p = sub.add_parser("dim3-gap", help="FSA ray against the closure for additive pairs")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.set_defaults(func=cmd_dim3_gap)

    p = sub.add_parser("ni-probe", help="N*I along normalized self-convolutions")
    p.add_argument("--family", default="smoothed-laplace", help="family[:param] or JSON file")
    p.add_argument("--steps", type=int, default=4)
    _add_dx(p)
    p.set_defaults(func=cmd_ni_probe)

    p = sub.add_parser("repro", help="regenerate the reference numbers")
    p.add_argument("name", choices=tuple(repro.RECIPES))
    p.add_argument("--quick", action="store_true", help="coarser grids, doubled tolerances")
    p.add_argument("--json", metavar="DIR", help="write one report per criterion")
    p.add_argument("--eps", type=float, default=None, help="epsilon for the counterexample")
    p.set_defaults(func=cmd_repro)
    return parser


def _inputs(args) -> dict:
    skip = {"func", "threads", "indent", "json", "out"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = v
        if isinstance(v, str) and Path(v).is_file():
            out[k + "_content"] = io.load_json(v)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = " ".join(x for x in (args.command, getattr(args, "gauss_command", None),
                                   getattr(args, "density_command", None)) if x)
    try:
        if args.seed is None:
            args.seed = _env_int("STAM_SEED", 0)
        if args.threads is None:
            args.threads = _env_int("STAM_THREADS", 1)
        if args.threads < 1:
            raise CommandError("--threads must be at least 1")
        result, reports, code, summary = args.func(args)
        report = io.RunReport(command, _inputs(args), reports, result,
                              {"seed": args.seed, "grid_dx": getattr(args, "dx", None)}, code)
    except (CommandError, ValueError, OSError, RuntimeError) as exc:
        kind = "schema" if isinstance(exc, io.SchemaError) else type(exc).__name__
        err = {"command": command, "error": {"kind": kind, "message": str(exc)}, "exit_status": EXIT_ERROR}
        print(io.dumps(err, args.indent))
        print(f"stam {command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(io.dumps(report, args.indent))
    print(f"stam {command}: {summary} (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
