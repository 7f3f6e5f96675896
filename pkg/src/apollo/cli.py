"""Command-line interface.

Exit status: 0 success, 2 usage, 3 validation, 4 budget exceeded, 5 I/O.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from fractions import Fraction

import numpy as np

from . import __version__
from .boxdim import box_counts, box_dimension
from .census import AUGMENTED, EUCLIDEAN, GEOMETRIC, MAX, VECTOR, CountTable, count_table, fit_exponent, geometric_grid
from .descartes import eval_form
from .errors import ApolloError, BudgetExceededError
from .packing import generate, packing_spec, seed_count_below, tangency_check
from .serialize import circles_to_csv, counts_to_csv, dump_json, read_circles_csv, read_counts_csv, render_svg, sieve_to_csv
from .sieve import almost_prime_census
from . import spectral as sp

EXIT_USAGE, EXIT_VALIDATION, EXIT_BUDGET, EXIT_IO = 2, 3, 4, 5


class ValidationError(ApolloError, ValueError):
    """Configuration that parses but breaks an invariant."""


def parse_root(text: str) -> tuple:
    try:
        root = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ValidationError(f"root must be four comma-separated integers, got {text!r}") from None
    if len(root) != 4:
        raise ValidationError(f"root needs 4 curvatures, got {len(root)}")
    q = eval_form(root)
    if q != 0:
        raise ValidationError(f"root fails Descartes form (Q = {q})")
    return root


def _number(text: str):
    """Integer, decimal, ``p/q`` or ``1e6`` as an exact Fraction."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _float_list(text: str) -> list:
    return [float(_number(t)) for t in text.split(",") if t]


def _r_list(text: str) -> list:
    out = []
    for t in text.split(","):
        out.append(None if t.lower() in ("inf", "none") else int(t))
    return out


def _grid(args) -> list:
    if args.grid:
        grid = _float_list(args.grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("grid must be strictly increasing")
        return grid
    if args.tmax is None:
        raise ValidationError("give --tmax or --grid")
    return geometric_grid(float(args.tmin), float(args.tmax), args.per_decade)


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    elif os.environ.get("APOLLO_THREADS"):
        try:
            n = int(os.environ["APOLLO_THREADS"])
        except ValueError:
            raise ValidationError("APOLLO_THREADS must be an integer") from None
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise ValidationError("thread count must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="apollo", description="Exact Apollonian packing census tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, root=True):
        if root:
            sp_.add_argument("--root", type=str, required=True, help="comma-separated quadruple, e.g. -1,2,2,3")
        sp_.add_argument("--out", help="output file (default: stdout, no sidecar)")
        sp_.add_argument("--threads", type=int, default=None, help="worker processes (default: APOLLO_THREADS or all cores)")
        sp_.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
        sp_.add_argument("--budget", type=int, default=None, help="node cap for traversals")

    def grid_args(sp_):
        sp_.add_argument("--tmin", type=_number, default=Fraction(10))
        sp_.add_argument("--tmax", type=_number)
        sp_.add_argument("--per-decade", type=int, default=24)
        sp_.add_argument("--grid", help="explicit comma-separated thresholds")

    g = sub.add_parser("gen", help="generate circles to a curvature cutoff")
    common(g)
    g.add_argument("--max-curv", type=_number, required=True)
    g.add_argument("--check", action="store_true", help="verify recorded tangencies exactly")

    c = sub.add_parser("count", help="tabulate N_T")
    common(c)
    grid_args(c)
    c.add_argument("--mode", choices=[AUGMENTED, VECTOR, GEOMETRIC], default=AUGMENTED)
    c.add_argument("--norm", choices=[MAX, EUCLIDEAN], default=MAX)
    c.add_argument("--engine", choices=["auto", "numpy", "exact"], default="auto")

    f = sub.add_parser("fit", help="fit N_T ~ c T^alpha")
    common(f, root=False)
    f.add_argument("--counts", help="counts CSV from `count` (its sidecar supplies root/mode/norm)")
    f.add_argument("--root", type=str)
    grid_args(f)
    f.add_argument("--mode", choices=[AUGMENTED, VECTOR, GEOMETRIC], default=AUGMENTED)
    f.add_argument("--norm", choices=[MAX, EUCLIDEAN], default=MAX)
    f.add_argument("--window", help="lo,hi (default: top two decades)")

    b = sub.add_parser("boxdim", help="box-counting dimension of the residual set")
    common(b)
    b.add_argument("--cutoff", type=_number, default=Fraction(10**4))
    b.add_argument("--eps-exp", default="4:9", help="box sides 2^-a .. 2^-b as a:b")

    s = sub.add_parser("sieve", help="almost-prime census")
    common(s)
    grid_args(s)
    s.add_argument("--coords", default="1", help="witness positions, e.g. 1 or 1,2")
    s.add_argument("--R", dest="R", default="2", help="max prime factors; comma list, inf allowed")
    s.add_argument("--alpha-ref", type=float, default=1.30568)
    s.add_argument("--include-bounding", action="store_true")

    q = sub.add_parser("spectral", help="special-function values and self-checks as JSON")
    common(q, root=False)
    q.add_argument("--n", type=int, choices=[2, 3], required=True)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--s1", type=float)
    q.add_argument("--s0", type=float)
    q.add_argument("--q", dest="q_omega", type=float, default=1.0)
    q.add_argument("--ell-max", type=int, default=50)

    r = sub.add_parser("render", help="SVG drawing")
    common(r, root=False)
    r.add_argument("--in", dest="infile", help="circles CSV from `gen`")
    r.add_argument("--root", type=str)
    r.add_argument("--max-curv", type=_number, default=Fraction(100))
    return p


# -- commands ---------------------------------------------------------------


def _cmd_gen(args, meta):
    spec = packing_spec(parse_root(args.root))
    pk = generate(spec, args.max_curv, budget=args.budget, workers=_threads(args), record_tangencies=args.check)
    meta.update(root=list(spec.root), kind=spec.kind, max_curv=args.max_curv, circles=len(pk))
    if spec.period is not None:
        meta["window"] = f"center x in [0, {spec.period})"
    if args.check:
        rep = tangency_check(pk)
        meta["tangency"] = {"checked": rep.checked, "failures": len(rep.failures)}
        if not rep.ok:
            meta["warnings"].append(f"{len(rep.failures)} tangency failures")
    return circles_to_csv(pk)


def _table(args, root) -> CountTable:
    return count_table(root, _grid(args), args.mode, args.norm, workers=_threads(args), budget=args.budget, engine=getattr(args, "engine", "auto"))


def _cmd_count(args, meta):
    root = parse_root(args.root)
    t = _table(args, root)
    extra = dict(t.meta)
    warning = extra.pop("warning", None)
    meta.update(root=list(root), mode=t.mode, norm=t.norm, **extra)
    if warning:
        meta["warnings"].append(warning)
    if args.mode == AUGMENTED and t.rows:
        # seed circles are the geometric count's extra rows
        spec = packing_spec(root)
        meta["seed_offset_at_tmax"] = seed_count_below(spec, t.rows[-1][0])
    return counts_to_csv(t.rows)


def _cmd_fit(args, meta):
    import json

    if args.counts:
        with open(args.counts) as fh:
            rows = read_counts_csv(fh.read())
        side = {}
        if os.path.exists(args.counts + ".meta.json"):
            with open(args.counts + ".meta.json") as fh:
                side = json.load(fh)
        root = tuple(side.get("root") or parse_root(args.root or ""))
        t = CountTable(rows, side.get("mode", args.mode), side.get("norm", args.norm), root)
    else:
        if not args.root:
            raise ValidationError("fit needs --counts or --root")
        root = parse_root(args.root)
        t = _table(args, root)
    window = tuple(_float_list(args.window)) if args.window else None
    if window is not None and len(window) != 2:
        raise ValidationError("window must be lo,hi")
    res = fit_exponent(t, window)
    meta["note"] = (
        "the error-term saving of the counting asymptotic is about 0.003 in the exponent "
        "and is not resolvable by a desk-scale fit"
    )
    return dump_json(
        {
            "c": res.c,
            "alpha": res.alpha,
            "residual": res.residual,
            "window": list(res.window),
            "mode": t.mode,
            "norm": t.norm,
            "root": list(t.root),
        }
    )


def _cmd_boxdim(args, meta):
    spec = packing_spec(parse_root(args.root))
    try:
        a, b = (int(x) for x in args.eps_exp.split(":"))
    except ValueError:
        raise ValidationError("--eps-exp must look like 4:9") from None
    eps = [Fraction(1, 2**j) for j in range(a, b + 1)]
    circles = generate(spec, args.cutoff, budget=args.budget, workers=_threads(args), record_tangencies=False)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = box_dimension(circles, eps, cutoff=args.cutoff)
    meta["warnings"] += [str(w.message) for w in caught]
    counts = box_counts(circles, eps)
    meta.update(root=list(spec.root), cutoff=args.cutoff)
    return dump_json(
        {
            "alpha": res.alpha,
            "c": res.c,
            "residual": res.residual,
            "window": list(res.window),
            "epsilons": [str(e) for e in eps],
            "counts": counts,
            "root": list(spec.root),
        }
    )


def _cmd_sieve(args, meta):
    root = parse_root(args.root)
    try:
        coords = tuple(int(c) for c in args.coords.split(","))
        Rs = _r_list(args.R)
    except ValueError:
        raise ValidationError("coords and R must be comma-separated integers") from None
    rep = almost_prime_census(root, _grid(args), coords, Rs, args.alpha_ref, args.include_bounding)
    meta.update(root=list(root), alpha_ref=rep.alpha_ref, coords=list(coords), include_bounding=args.include_bounding)
    meta["convention"] = "witness = quadruple creating the circle in the generator tree; own curvature first"
    return sieve_to_csv(rep.rows)


def spectral_report(n, delta, s1=None, s0=None, q_omega=1.0, ell_max=50) -> dict:
    """Values and residuals of the special-function identities for one parameter set."""
    params = sp.SpectralParams(n, delta, s1=s1, s0=s0, q_omega=q_omega)
    ells = list(range(ell_max + 1))
    t = np.linspace(-1, 1, 401)
    th = np.linspace(0, math.pi, 201)
    rec = 0.0
    bound = 0.0
    ml1 = ml2 = 0.0
    for ell in ells:
        p = sp.legendre_P(ell, t)
        bound = max(bound, float(np.max(np.abs(p))))
        if ell >= 2:
            r = ell * p - (2 * ell - 1) * t * sp.legendre_P(ell - 1, t) + (ell - 1) * sp.legendre_P(ell - 2, t)
            rec = max(rec, float(np.max(np.abs(r)) / ell))
        if ell >= 1:
            m, m1 = sp.M_theta(ell, th), sp.M_theta(ell - 1, th)
            m2 = sp.M_theta(ell - 2, th) if ell >= 2 else np.zeros_like(th)
            r1 = m - ((-2 * ell + 1) * np.cos(2 * th) * m1 - (ell - 1) ** 2 * m2)
            scale1 = np.abs(m) + np.abs((-2 * ell + 1) * np.cos(2 * th) * m1) + (ell - 1) ** 2 * np.abs(m2)
            ml1 = max(ml1, float(np.max(np.abs(r1) / scale1)))
            terms = [
                4 * (-2 * ell + 1) * np.cos(2 * th) * m1,
                (-2 * ell + 1) * np.sin(2 * th) * sp.M_theta_deriv(ell - 1, th),
                2 * (ell - 1) ** 2 * (ell - 2) * m2,
            ]
            lhs = 2 * (ell + 1) * m
            scale2 = np.abs(lhs) + sum(np.abs(x) for x in terms)
            ml2 = max(ml2, float(np.max(np.abs(lhs - sum(terms)) / scale2)))
    norm_err = 0.0
    if (n - 1) / 2 < delta < n - 1:
        norm_err = max(abs(sp.v_norm(n, delta, l) / sp.v_norm_recursive(n, delta, l) - 1) for l in range(min(ell_max, 30) + 1))
    out = {
        "params": {"n": n, "delta": delta, "s1": s1, "s0": s0, "q_omega": q_omega},
        "values": {
            "ladder_coeffs": [list(sp.ladder_coeffs(l, delta)) for l in ells[1:]],
            "v_norm": [sp.v_norm(n, delta, l) for l in ells],
            "c_coeff_ratio": [sp.c_coeff_ratio(n, delta, l) for l in ells],
            "kappa_flat_factor": sp.kappa_flat_factor(n, delta),
            "horospherical_main_exponent": sp.horospherical_main_exponent(n, delta),
        },
        "checks": {
            "legendre_max_abs": bound,
            "legendre_recursion_residual": rec,
            "M_theta_identity_1_residual": ml1,
            "M_theta_identity_2_residual": ml2,
            "v_norm_closed_vs_recursive": norm_err,
        },
    }
    if ell_max >= 10:
        tail = ells[max(1, ell_max // 10) :]
        out["checks"]["c_coeff_growth_exponent"] = sp.growth_exponent([sp.c_coeff_ratio(n, delta, l) for l in tail], tail)
        out["checks"]["c_coeff_claimed_exponent"] = (n - 2) / 2
    if s1 is not None:
        out["values"]["horospherical_error_exponent"] = sp.horospherical_error_exponent(params)
    if s0 is not None and s0 > 0:
        out["values"]["sector_error_exponent"] = sp.sector_error_exponent(n, delta, s0, q_omega)
    return out


def _cmd_spectral(args, meta):
    rep = spectral_report(args.n, args.delta, args.s1, args.s0, args.q_omega, args.ell_max)
    if args.s1 is not None and args.n == 3:
        meta["warnings"].append("s1 is a user input; no value is computed by this tool")
    return dump_json(rep)


def _cmd_render(args, meta):
    if args.infile:
        with open(args.infile) as fh:
            circles = read_circles_csv(fh.read())
    elif args.root:
        spec = packing_spec(parse_root(args.root))
        circles = generate(spec, args.max_curv, budget=args.budget, workers=_threads(args), record_tangencies=False)
    else:
        raise ValidationError("render needs --in or --root")
    return render_svg(circles)


COMMANDS = {
    "gen": _cmd_gen,
    "count": _cmd_count,
    "fit": _cmd_fit,
    "boxdim": _cmd_boxdim,
    "sieve": _cmd_sieve,
    "spectral": _cmd_spectral,
    "render": _cmd_render,
}


def parse_args(argv=None) -> argparse.Namespace:
    """Parse and validate; usage errors exit with status 2."""
    args = build_parser().parse_args(argv)
    if getattr(args, "root", None):
        parse_root(args.root)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    meta = {"command": args.command, "seed": args.seed, "version": __version__, "warnings": []}
    try:
        text = COMMANDS[args.command](args, meta)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ApolloError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
            with open(args.out + ".meta.json", "w", newline="") as fh:
                fh.write(dump_json(meta))
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
