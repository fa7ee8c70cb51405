"""Command-line entry point: ``python3 -m fuchsdim <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import mpmath
import numpy as np

from . import coding, diophantine, gauss_oracle
from .dimension import dimension_report, solve_bowen
from .group_model import GroupSpecError, builtin, builtin_names, load_group_spec, validate
from .transfer import assemble, make_grid

DIGITS = 12


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating, mpmath.mpf)):
        return f"{float(x):.{DIGITS}g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating, mpmath.mpf)):
        v = float(x)
        return float(f"{v:.{DIGITS}g}") if np.isfinite(v) else str(v)
    return x


def emit(header, rows, fmt: str, out, extra: dict | None = None):
    if fmt == "json":
        doc = {"columns": list(header), "rows": [list(r) for r in rows]}
        if extra:
            doc.update(extra)
        out.write(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    for k, v in (extra or {}).items():
        if not isinstance(v, (dict, list)):
            w.writerow([f"# {k}", _fmt(v)])
    out.write(buf.getvalue())


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"bad number list {text!r}") from e


def _group(args):
    if args.group and args.builtin:
        raise UsageError("give either --group or --builtin")
    if args.group:
        return load_group_spec(args.group)
    name = args.builtin or "gamma2"
    if name not in builtin_names():
        raise UsageError(f"unknown builtin {name!r}; choose from {', '.join(builtin_names())}")
    return builtin(name)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


# -- commands ----------------------------------------------------------------------------


def cmd_validate(args, out):
    rep = validate(_group(args))
    emit(("check", "status", "slack", "detail"), rep.as_rows(), args.format, out, {"group": rep.group, "ok": rep.ok})
    return 0 if rep.ok else 1


def cmd_code_point(args, out):
    g = _group(args)
    if (args.t is None) == (args.x is None):
        raise UsageError("give exactly one of --t or --x")
    if args.x is not None:
        with mpmath.workdps(args.dps):
            letters = coding.expand(g, mpmath.mpf(args.x), args.n, dps=args.dps)
    else:
        letters = coding.expand(g, np.exp(-1j * args.t), args.n)
    words, truncated = coding.cuspidal_decompose(g, letters)
    rows = [(r, W.a0, W.eps, W.n, W.length, "".join(W.letters)) for r, W in enumerate(words)]
    emit(("r", "a0", "type", "n", "length", "letters"), rows, args.format, out,
         {"letters": "".join(letters), "truncated": truncated})
    return 0


def cmd_enum(args, out):
    g = _group(args)
    alph = coding.enumerate_alphabet(g, args.T)
    rows = [(W.a0, W.eps, W.n, W.length) for W in alph.words]
    emit(("a0", "type", "n", "length"), rows, args.format, out, {"T": args.T, "size": len(alph)})
    return 0


def cmd_transition(args, out):
    g = _group(args)
    words = coding.enumerate_alphabet(g, args.T).words
    tm = coding.transition_matrix(g, words)
    ok, witness = coding.check_aperiodicity(tm)
    labels = [f"{W.a0}{W.eps}{W.n}" for W in words]
    rows = [(labels[i], *map(int, tm.M[i])) for i in range(len(words))]
    extra = {"aperiodic": ok}
    if witness:
        extra["witness"] = f"{witness[0]!r} -> {witness[1]!r}"
    emit(("word", *labels), rows, args.format, out, extra)
    return 0


def cmd_dimension(args, out):
    g = _group(args)
    grid = make_grid(g, args.grid or 128)
    Ts = _floats(args.T)
    res = _map(lambda T: solve_bowen(g, T, grid, tol=args.tol), Ts, args.threads)
    rows = [(r.T, r.s, r.residual, r.iterations, r.grid_m) for r in res]
    if args.dump_operator:
        assemble(g, res[-1].s, res[-1].T, grid).dump(args.dump_operator)
    emit(("T", "s_T", "residual", "iterations", "m"), rows, args.format, out, {"group": g.name})
    return 0


def cmd_theta(args, out):
    g = _group(args)
    Ts = _floats(args.T)
    m = args.grid or 128
    rep = dimension_report(g, Ts, m=m, m_spectral=2 * m)
    rows = [tuple(r) for r in rep.rows]
    extra = {k: v for k, v in rep.to_dict().items() if k not in ("rows", "group", "diagnostics")}
    extra.update(rep.diagnostics)
    if args.format == "json":
        extra["report"] = rep.to_dict()
    emit(("T", "s_T", "residual", "m"), rows, args.format, out, {"group": g.name, **extra})
    return 0


def cmd_hensley(args, out):
    Ns = [int(v) for v in _floats(args.N_list)]
    grid = gauss_oracle.UnitGrid(args.grid or 256)
    dims = _map(lambda N: gauss_oracle.gauss_dim(N, grid, tol=args.tol), Ns, args.threads)
    fit = gauss_oracle.hensley_fit(Ns, [d.s for d in dims])
    rows = [(d.N, d.s, d.N * (1.0 - d.s), d.residual) for d in sorted(dims, key=lambda d: d.N)]
    emit(("N", "dim", "N_one_minus_dim", "residual"), rows, args.format, out,
         {"constant": fit.constant, "target": gauss_oracle.HENSLEY})
    return 0


def _samples(g, args):
    rng = np.random.default_rng(args.seed)
    if args.loop_T:
        return [diophantine.loop_point(g, diophantine.random_loop(g, args.loop_T, rng), dps=args.dps)
                for _ in range(args.samples)]
    return [diophantine.random_alpha(rng, args.lo, args.hi, dps=args.dps) for _ in range(args.samples)]


def cmd_bad_scan(args, out):
    g = _group(args)
    alphas = _samples(g, args)
    d_min = diophantine.min_denominator(g)
    verdicts = _map(lambda a: diophantine.bad_test(g, float(a), args.eps, args.Q, d_min), alphas, args.threads)
    rows = [(i, a, v) for i, (a, v) in enumerate(zip(alphas, verdicts))]
    emit(("sample", "alpha", "bad"), rows, args.format, out, {"eps": args.eps, "Q": args.Q, "seed": args.seed})
    return 0


def cmd_dio_verify(args, out):
    g = _group(args)
    alphas = _samples(g, args)
    checks = _map(lambda a: diophantine.expansion_approximation_check(g, a, R=args.depth, dps=args.dps),
                  alphas, args.threads)
    rows = []
    for i, vs in enumerate(checks):
        rows += [(i, v.r, v.length, v.D, v.value, v.lower, v.upper, v.ok) for v in vs]
    violations = sum(not r[-1] for r in rows)
    emit(("sample", "r", "length", "D", "value", "lower", "upper", "ok"), rows, args.format, out,
         {"violations": violations, "seed": args.seed})
    return 0


# -- parser ------------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--builtin", help=f"built-in group ({', '.join(builtin_names())})")
    p.add_argument("--group", help="JSON group-spec file")
    p.add_argument("--grid", type=int, help="nodes per arc (nodes on [0,1] for hensley)")
    p.add_argument("--tol", type=float, default=1e-10, help="tolerance on |lambda - 1|")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--dump-operator", help="write the last assembled operator to this .npz file")
    p.add_argument("--threads", type=int, default=1, help="parallel independent jobs")
    return p


def _sampling(p):
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--loop-T", type=float, default=None, help="sample attracting points of W_T word loops")
    p.add_argument("--lo", type=float, default=-2.0)
    p.add_argument("--hi", type=float, default=2.0)
    p.add_argument("--dps", type=int, default=80)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fuchsdim", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("validate-group", parents=[common], help="check a group presentation")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("code-point", parents=[common], help="boundary expansion of one point")
    p.add_argument("--t", type=float, help="boundary parameter, point exp(-i t)")
    p.add_argument("--x", type=str, help="real point of the half-plane boundary (decimal string)")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--dps", type=int, default=60)
    p.set_defaults(fn=cmd_code_point)

    p = sub.add_parser("enum-cuspidal", parents=[common], help="cuspidal words with |W| <= T")
    p.add_argument("--T", type=float, required=True)
    p.set_defaults(fn=cmd_enum)

    p = sub.add_parser("transition-matrix", parents=[common], help="transition matrix on W_T")
    p.add_argument("--T", type=float, required=True)
    p.set_defaults(fn=cmd_transition)

    p = sub.add_parser("dimension", parents=[common], help="s_T from the Bowen equation")
    p.add_argument("--T", default="25,50,100,200", help="comma separated list")
    p.set_defaults(fn=cmd_dimension)

    p = sub.add_parser("theta", parents=[common], help="spectral and regression Theta")
    p.add_argument("--T", default="25,50,100,200", help="comma separated list")
    p.set_defaults(fn=cmd_theta)

    p = sub.add_parser("hensley", parents=[common], help="dim E_N and the Hensley constant")
    p.add_argument("--N-list", dest="N_list", default="20,50,100,200")
    p.set_defaults(fn=cmd_hensley)

    p = sub.add_parser("bad-scan", parents=[common], help="bad(eps) verdicts up to Q for sampled points")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--Q", type=float, required=True)
    _sampling(p)
    p.set_defaults(fn=cmd_bad_scan)

    p = sub.add_parser("dio-verify", parents=[common], help="two-sided expansion approximation table")
    p.add_argument("--depth", type=int, default=15)
    _sampling(p)
    p.set_defaults(fn=cmd_dio_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.fn(args, out)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (GroupSpecError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
