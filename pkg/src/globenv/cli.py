"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 unreadable or invalid input data,
3 infeasible test configuration (for example a significance level below the
resolution of the simulations).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io, svg
from .applications import fboxplot, necdf_test
from .composite import adjusted_test, gaussian_ecdf_stages
from .curves import CurveSet, ArgGrid
from .envelope import central_region, global_envelope_test
from .errors import (
    AlphaInfeasibleError,
    BetaTooSmallError,
    GlobalEnvelopeError,
    ParseError,
)
from .ftests import frank_fanova, frank_flm, graph_fanova, graph_flm
from .measures import MeasureSpec, Orientation, forder

__all__ = ["main", "build_parser"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_output(sp, with_svg=True):
    sp.add_argument("--json", metavar="PATH", help="write the result as JSON")
    if with_svg:
        sp.add_argument("--svg", metavar="PATH", help="write a drawing as SVG")


def _add_measure(sp, default_type="erl"):
    sp.add_argument("--type", default=default_type,
                    choices=["rank", "erl", "cont", "area", "qdir", "st", "unscaled"],
                    help=f"measure type (default {default_type})")
    sp.add_argument("--alternative", default="two.sided",
                    choices=["two.sided", "less", "greater"], help="sidedness")
    sp.add_argument("--beta", type=float, default=2.5,
                    help="directional quantile percent for the qdir measure")
    sp.add_argument("--nstep", type=int, default=2, choices=[1, 2],
                    help="combining mode for several input files")


def _add_rng(sp):
    sp.add_argument("--seed", type=int, default=0, help="master random seed")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: GLOBENV_THREADS or 1); results do not depend on it")


def _spec(args) -> MeasureSpec:
    return MeasureSpec(args.type, args.alternative, args.beta)


def _read_sets(paths) -> list[CurveSet]:
    return [io.read_curve_set(p) for p in paths]


def _single_or_list(sets):
    return sets[0] if len(sets) == 1 else sets


def _write_json(args, payload):
    if getattr(args, "json", None):
        io.write_json(payload, args.json)


def _decision(p: float, alpha: float) -> str:
    if p <= alpha:
        return f"reject the null hypothesis at alpha={alpha:g} (p = {p:.6g})"
    return f"no evidence against the null hypothesis at alpha={alpha:g} (p = {p:.6g})"


def _cmd_order(args) -> int:
    sets = _read_sets(args.files)
    spec = _spec(args)
    m = forder(_single_or_list(sets), spec, args.nstep)
    if m.orientation is Orientation.SMALLER_EXTREME:
        idx = np.argsort(m.values, kind="stable")
    else:
        idx = np.argsort(-m.values, kind="stable")
    ordering = (idx + 1).tolist()
    print(" ".join(map(str, ordering)))
    _write_json(args, {
        "command": "order",
        "type": spec.type.value,
        "alternative": spec.alternative.value,
        "nstep": args.nstep,
        "ordering": ordering,
        "measures": m.values.tolist(),
    })
    return 0


def _cmd_central_region(args) -> int:
    sets = _read_sets(args.files)
    env = central_region(_single_or_list(sets), _spec(args), args.coverage, args.nstep)
    print(f"type={args.type} coverage={args.coverage:g} critical={env.critical:.6g}")
    _write_json(args, env)
    if args.svg:
        svg.save(env, args.svg)
    return 0


def _cmd_envelope_test(args) -> int:
    sets = _read_sets(args.files)
    env = global_envelope_test(_single_or_list(sets), _spec(args), args.alpha, args.nstep)
    if env.p_interval is not None:
        lo, hi = env.p_interval
        print(f"p interval = [{lo:.6g}, {hi:.6g}]")
    print(_decision(env.p, args.alpha))
    _write_json(args, env)
    if args.svg:
        obs = [cs.values[0] for cs in sets]
        svg.save(env, args.svg, curves=obs if len(sets) > 1 else obs[0])
    return 0


def _cmd_fboxplot(args) -> int:
    sets = _read_sets(args.files)
    res = fboxplot(_single_or_list(sets), _spec(args), args.coverage, args.factor, args.nstep)
    out = (res.outlier_indices + 1).tolist()
    print("outliers:", " ".join(map(str, out)) if out else "none")
    _write_json(args, res)
    if args.svg:
        svg.save(res, args.svg, curves=[cs.values for cs in sets])
    return 0


def _cmd_fanova(args) -> int:
    cs = io.read_curve_set(args.curves)
    groups = io.read_labels(args.groups)
    common = dict(nsim=args.nsim, alpha=args.alpha, variances=args.variances,
                  spec=_spec(args), seed=args.seed, threads=args.threads)
    if args.rank:
        if args.contrasts:
            raise _UsageError("--contrasts applies to the graph test only")
        res = frank_fanova(cs, groups, **common)
    else:
        res = graph_fanova(cs, groups, contrasts=args.contrasts, **common)
    print(_decision(res.p, args.alpha))
    _write_json(args, res)
    if args.svg:
        svg.save(res, args.svg)
    return 0


def _cmd_flm(args) -> int:
    cs = io.read_curve_set(args.curves)
    table = io.read_factor_table(args.factors)
    common = dict(nsim=args.nsim, alpha=args.alpha, spec=_spec(args),
                  seed=args.seed, threads=args.threads)
    if args.rank:
        if args.contrasts:
            raise _UsageError("--contrasts applies to the graph test only")
        res = frank_flm(cs, table, args.full, args.reduced, **common)
    else:
        res = graph_flm(cs, table, args.full, args.reduced,
                        contrasts=args.contrasts, **common)
    print(_decision(res.p, args.alpha))
    _write_json(args, res)
    if args.svg:
        svg.save(res, args.svg)
    return 0


def _cmd_necdf(args) -> int:
    samples, names = io.read_samples(args.file)
    res = necdf_test(samples, nsim=args.nsim, alpha=args.alpha, spec=_spec(args),
                     seed=args.seed, threads=args.threads)
    print(_decision(res.p, args.alpha))
    _write_json(args, res)
    if args.svg:
        svg.save(res, args.svg, titles=[f"ecdf of {n}" for n in names])
    return 0


def _cmd_composite(args) -> int:
    folder = Path(args.dir)
    names = sorted(p.name for p in folder.glob("*.csv"))
    if not names:
        raise ParseError(f"{folder}: no curve-set CSV files")
    primary = args.primary or names[0]
    if primary not in names:
        raise _UsageError(f"--primary {primary!r} is not among the files in {folder}")
    ordered = [primary] + [n for n in names if n != primary]
    stages = [io.read_curve_set(folder / n) for n in ordered]
    res = adjusted_test(stages, _spec(args), args.alpha)
    print(f"stage envelope level = {res.alpha_star:.6g}")
    print(_decision(res.p, args.alpha))
    _write_json(args, res)
    if args.svg:
        svg.save(res.envelope, args.svg, curves=stages[0].values[0],
                 titles=[f"adjusted envelope (p = {res.p:.6g})"])
    return 0


def _cmd_demo_polynomial(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 101]))
    x = np.linspace(0.0, 1.0, args.n)
    truth = 0.8 * x - 1.8 * x**2 + 1.05 * x**3
    y = truth + rng.normal(0.0, args.noise, args.n)
    X = np.vander(x, 4, increasing=True)
    Q, R = np.linalg.qr(X)
    fitted = Q @ (Q.T @ y)
    resid = y - fitted
    curves = np.empty((args.nsim, args.n))
    for b in range(args.nsim):
        ystar = fitted + resid[rng.permutation(args.n)]
        curves[b] = Q @ (Q.T @ ystar)
    cset = CurveSet(ArgGrid.one_d(x), curves, 0)
    env = central_region(cset, MeasureSpec("erl"), coverage=args.coverage)
    inside = env.contains(truth)
    print(f"central region of {args.nsim} refitted cubic curves at coverage {args.coverage:g}")
    print(f"true curve inside the region: {inside}")
    _write_json(args, {
        "command": "demo-polynomial",
        "coverage": args.coverage,
        "inside": bool(inside),
        "truth": truth.tolist(),
        "envelope": env.to_dict(),
    })
    if args.svg:
        svg.save(env, args.svg, curves=truth,
                 titles=[f"bootstrap band for a cubic fit (true curve {'inside' if inside else 'outside'})"])
    return 0


def _cmd_demo_normality(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 203]))
    data = rng.lognormal(mean=4.0, sigma=0.35, size=args.n)
    results = {}
    panels = []
    for label, values, stream in (("raw", data, 1), ("log", np.log(data), 2)):
        stages = gaussian_ecdf_stages(values, s=args.s, s2=args.s,
                                      seed=[args.seed, 203, stream])
        res = adjusted_test(stages, MeasureSpec("erl"), alpha=args.alpha)
        results[label] = res
        panels.append((res.envelope, stages.primary.values[0],
                       f"{label} data: adjusted p = {res.p:.6g}"))
        print(f"{label} data: adjusted p = {res.p:.6g} "
              f"({'reject' if res.p <= args.alpha else 'accept'} normality at alpha={args.alpha:g})")
    _write_json(args, {
        "command": "demo-normality",
        "alpha": args.alpha,
        "raw": results["raw"].to_dict(),
        "log": results["log"].to_dict(),
    })
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(svg.render_panels(panels))
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="globenv",
                description="Global envelopes with intrinsic graphical interpretation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("order", help="order curves from the most extreme to the least")
    sp.add_argument("files", nargs="+", help="curve-set CSV files (several files are combined)")
    _add_measure(sp)
    _add_output(sp, with_svg=False)
    sp.set_defaults(handler=_cmd_order)

    sp = sub.add_parser("central-region", help="central region of a sample of curves")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--coverage", type=float, default=0.50)
    _add_measure(sp)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_central_region)

    sp = sub.add_parser("envelope-test", help="Monte Carlo global envelope test")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--alpha", type=float, default=0.05)
    _add_measure(sp)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_envelope_test)

    sp = sub.add_parser("fboxplot", help="functional boxplot with outlier detection")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--coverage", type=float, default=0.50)
    sp.add_argument("--factor", type=float, default=1.5)
    _add_measure(sp, default_type="area")
    _add_output(sp)
    sp.set_defaults(handler=_cmd_fboxplot)

    sp = sub.add_parser("fanova", help="permutation one-way functional ANOVA")
    sp.add_argument("curves", help="curve-set CSV, one curve per subject")
    sp.add_argument("groups", help="CSV with one labelled column of group labels")
    sp.add_argument("--nsim", type=int, default=999)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--contrasts", action="store_true", help="test pairwise group differences")
    sp.add_argument("--variances", default="equal", choices=["equal", "unequal"])
    sp.add_argument("--rank", action="store_true", help="test the pointwise F statistic instead")
    _add_measure(sp)
    _add_rng(sp)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_fanova)

    sp = sub.add_parser("flm", help="Freedman-Lane permutation test in a functional GLM")
    sp.add_argument("curves")
    sp.add_argument("factors", help="CSV of factors, one row per curve")
    sp.add_argument("--full", required=True, help="full model, e.g. 'Y ~ group + age'")
    sp.add_argument("--reduced", required=True, help="reduced model, e.g. 'Y ~ age'")
    sp.add_argument("--nsim", type=int, default=999)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--contrasts", action="store_true")
    sp.add_argument("--rank", action="store_true", help="test the F statistic instead of coefficients")
    _add_measure(sp)
    _add_rng(sp)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_flm)

    sp = sub.add_parser("necdf", help="n-sample test of equal distributions via ecdfs")
    sp.add_argument("file", help="CSV with one sample per column, ragged columns allowed")
    sp.add_argument("--nsim", type=int, default=999)
    sp.add_argument("--alpha", type=float, default=0.05)
    _add_measure(sp)
    _add_rng(sp)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_necdf)

    sp = sub.add_parser("composite", help="adjusted envelope test for a fitted null model")
    sp.add_argument("dir", help="directory of stage curve-set CSVs")
    sp.add_argument("--primary", help="file name of the data stage (default: first by name)")
    sp.add_argument("--alpha", type=float, default=0.05)
    _add_measure(sp)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_composite)

    sp = sub.add_parser("demo-polynomial",
                        help="bootstrap central region around a fitted cubic curve")
    sp.add_argument("--n", type=int, default=100, help="number of data points")
    sp.add_argument("--noise", type=float, default=0.1, help="noise standard deviation")
    sp.add_argument("--nsim", type=int, default=2000, help="bootstrap samples")
    sp.add_argument("--coverage", type=float, default=0.95)
    sp.add_argument("--seed", type=int, default=0)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_demo_polynomial)

    sp = sub.add_parser("demo-normality",
                        help="adjusted test of normality on skewed data, raw and log scale")
    sp.add_argument("--n", type=int, default=115, help="sample size")
    sp.add_argument("--s", type=int, default=199, help="stages and simulations per stage")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    _add_output(sp)
    sp.set_defaults(handler=_cmd_demo_normality)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (AlphaInfeasibleError, BetaTooSmallError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except GlobalEnvelopeError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
