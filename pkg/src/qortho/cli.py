"""Command-line interface.

Numeric flags accept "p/q" literals; eval/coeffs/connect/expand keep those
exact (Fraction arithmetic end to end), while density/verify/sample always
work in float.  Output is CSV (default) or JSON, deterministic byte-for-byte
for a fixed command line: the first line is
`# qortho v1, <subcommand>, <flags>` with flags sorted by name.

Exit codes: 0 success, 2 usage (argparse), 3 ParameterError,
4 NonConvergenceError, 1 other qortho errors or failed verification.
"""

import argparse
import json
import sys
from fractions import Fraction

from .qcore import (
    NonConvergenceError,
    ParameterError,
    QOrthoError,
    is_exact,
)
from . import connect, densities, expand, polyfam, sampler, verify


def _num(s):
    """Parse a numeric literal: 'p/q' -> Fraction, '3' -> int, else float."""
    s = s.strip()
    if "/" in s:
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError("bad rational literal %r" % s)
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("bad numeric literal %r" % s)


def _num_list(s):
    return [_num(tok) for tok in s.split(",") if tok.strip()]


def _float_list(s):
    return [float(tok) for tok in s.split(",") if tok.strip()]


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _json_val(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def _flag_string(args):
    skip = {"func", "cmd", "out", "format"}
    parts = []
    for k in sorted(vars(args)):
        if k in skip:
            continue
        v = getattr(args, k)
        if v is None or v is False:
            continue
        if isinstance(v, list):
            v = ",".join(_fmt(item) for item in v)
        elif v is True:
            v = "true"
        else:
            v = _fmt(v)
        parts.append("%s=%s" % (k.replace("_", "-"), v))
    return " ".join(parts)


def _emit(args, columns, rows, extra_meta=None):
    flags = _flag_string(args)
    if args.format == "json":
        meta = {"tool": "qortho v1", "subcommand": args.cmd, "flags": flags}
        if extra_meta:
            meta.update(extra_meta)
        doc = {
            "meta": meta,
            "columns": list(columns),
            "rows": [[_json_val(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, sort_keys=True) + "\n"
    else:
        lines = ["# qortho v1, %s, %s" % (args.cmd, flags)]
        if extra_meta:
            lines.append(
                "# " + ", ".join("%s=%s" % (k, _fmt(v))
                                 for k, v in sorted(extra_meta.items()))
            )
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_FAMILY_PARAMS = {
    "qhermite": ("q",),
    "rogers": ("beta", "q"),
    "asc": ("y", "rho", "q"),
    "bigb": ("q",),
    "chebt": (),
    "chebu": (),
    "chebt-hat": ("q",),
    "chebu-hat": ("q",),
    "hermite": (),
    "kesten": ("y", "rho"),
    "kesten-hat": ("y", "rho", "q"),
}

_FAMILY_CTOR = {
    "qhermite": polyfam.QHermite,
    "rogers": polyfam.Rogers,
    "asc": polyfam.ASC,
    "bigb": polyfam.BigB,
    "chebt": polyfam.ChebT,
    "chebu": polyfam.ChebU,
    "chebt-hat": polyfam.ChebT_hat,
    "chebu-hat": polyfam.ChebU_hat,
    "hermite": polyfam.ClassicalHermite,
    "kesten": polyfam.Kesten,
    "kesten-hat": polyfam.KestenHat,
}


def _mk_family(args):
    names = _FAMILY_PARAMS[args.family]
    vals = []
    for name in names:
        v = getattr(args, name)
        if v is None:
            raise ParameterError(
                "family %r requires --%s" % (args.family, name)
            )
        vals.append(v)
    return _FAMILY_CTOR[args.family](*vals)


def _cmd_eval(args):
    fam = _mk_family(args)
    rows = []
    for x in args.x:
        val = polyfam.eval(fam, args.n, x)
        rows.append((args.n, x, val))
    _emit(args, ("n", "x", "value"), rows)
    return 0


def _cmd_coeffs(args):
    fam = _mk_family(args)
    poly = polyfam.coeffs(fam, args.n)
    rows = [(args.n, k, c) for k, c in enumerate(poly.coeffs)]
    _emit(args, ("n", "k", "coeff"), rows)
    return 0


_DENSITY_CTOR = {
    "fn": lambda a: densities.fN(a.q, a.trunc_eps),
    "fcn": lambda a: densities.fCN(_req(a, "y"), _req(a, "rho"), a.q, a.trunc_eps),
    "fr": lambda a: densities.fR(_req(a, "beta"), a.q, a.trunc_eps),
    "fu": lambda a: densities.fU(a.q),
    "ft": lambda a: densities.fT(a.q),
    "fk": lambda a: densities.fK(_req(a, "y"), _req(a, "rho"), a.q),
}


def _req(args, name):
    v = getattr(args, name)
    if v is None:
        raise ParameterError("density %r requires --%s" % (args.density, name))
    return float(v)


def _cmd_density(args):
    args.q = float(args.q)
    dens = _DENSITY_CTOR[args.density](args)
    xs = [float(x) for x in args.x]
    rows = [(x, densities.density_eval(dens, x)) for x in xs]
    _emit(args, ("x", "value"), rows)
    return 0


def _cmd_expand(args):
    params = {}
    for name in ("q", "rho", "y", "beta", "gamma"):
        v = getattr(args, name)
        if v is not None:
            params[name] = v
    if args.x is not None:
        spec = expand.ExpansionSpec(args.id, dict(params), args.k)
        rows = []
        for x in args.x:
            res = expand.expansion_eval(spec, float(x), tol=args.tol)
            rows.append((float(x), res.value, res.tail, res.n_terms))
        _emit(args, ("x", "value", "tail", "n_terms"), rows)
        return 0
    k_max = args.k_max if args.k_max is not None else 8
    rows = [(n, expand.expansion_coeff(args.id, n, **params))
            for n in range(k_max + 1)]
    _emit(args, ("n", "coeff"), rows)
    return 0


def _cmd_connect(args):
    params = {}
    for name in ("q", "y", "rho", "beta", "gamma"):
        v = getattr(args, name)
        if v is not None:
            params[name] = v
    mat = connect.connection(args.pair, args.n, **params)
    row = mat.rows.get(args.n, {})
    rows = [(args.n, k, row[k]) for k in sorted(row, reverse=True)]
    _emit(args, ("n", "k", "coeff"), rows)
    return 0


def _cmd_verify(args):
    config = {}
    if args.suite and args.suite != "all":
        config["suites"] = tuple(s.strip() for s in args.suite.split(","))
    if args.q_grid:
        config["q_grid"] = tuple(args.q_grid)
    if args.tol is not None:
        config["tol"] = args.tol
    reports, ok = verify.run_all(config)
    rows = [
        (r.check_id, json.dumps(r.params, sort_keys=True), r.residual,
         r.tolerance, r.passed)
        for r in reports
    ]
    n_fail = sum(1 for r in reports if not r.passed)
    _emit(args, ("check_id", "params", "residual", "tolerance", "pass"), rows,
          extra_meta={"checks": len(reports), "failures": n_fail})
    return 0 if ok else 1


def _cmd_sample(args):
    dens_args = argparse.Namespace(
        density=args.target, q=float(args.q),
        y=args.y, rho=args.rho, beta=None,
        trunc_eps=1e-14,
    )
    dens = _DENSITY_CTOR[args.target](dens_args)
    result = sampler.sample(dens, args.n, seed=args.seed, batch=args.batch)
    meta = {
        "acceptance_rate": result.acceptance_rate,
        "envelope": result.envelope,
        "proposals": result.n_proposed,
    }
    if args.binary:
        data = result.samples.astype("<f8").tobytes()
        if args.out:
            with open(args.out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
        return 0
    rows = [(i, float(v)) for i, v in enumerate(result.samples)]
    _emit(args, ("i", "x"), rows, extra_meta=meta)
    return 0


def _add_common(p, *names):
    if "q" in names:
        p.add_argument("--q", type=_num, default=None)
    if "y" in names:
        p.add_argument("--y", type=_num, default=None)
    if "rho" in names:
        p.add_argument("--rho", type=_num, default=None)
    if "beta" in names:
        p.add_argument("--beta", type=_num, default=None)
    if "gamma" in names:
        p.add_argument("--gamma", type=_num, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qortho",
        description="q-orthogonal polynomial families, densities, expansions",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("eval", help="evaluate a family member p_n(x)")
    p.add_argument("--family", choices=sorted(_FAMILY_PARAMS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=_num_list, required=True)
    _add_common(p, "q", "y", "rho", "beta")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("coeffs", help="monomial coefficients of p_n (exact)")
    p.add_argument("--family", choices=sorted(_FAMILY_PARAMS), required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p, "q", "y", "rho", "beta")
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("density", help="evaluate a density on points")
    p.add_argument("--density", choices=sorted(_DENSITY_CTOR), required=True)
    p.add_argument("--x", type=_num_list, required=True)
    p.add_argument("--trunc-eps", type=float, default=1e-14)
    _add_common(p, "q", "y", "rho", "beta")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("expand", help="expansion coefficients or kernel values")
    p.add_argument("--id", choices=sorted(expand.EXPANSION_IDS), required=True)
    p.add_argument("--x", type=_num_list, default=None)
    p.add_argument("--k", type=int, default=None,
                   help="fixed truncation order for evaluation")
    p.add_argument("--k-max", type=int, default=None,
                   help="highest coefficient index to list")
    p.add_argument("--tol", type=float, default=1e-9)
    _add_common(p, "q", "y", "rho", "beta", "gamma")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("connect", help="connection coefficients for row n")
    p.add_argument("--pair", choices=sorted(connect.PAIRS), required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p, "q", "y", "rho", "beta", "gamma")
    p.set_defaults(func=_cmd_connect)

    p = sub.add_parser("verify", help="run verification checks")
    p.add_argument("--suite", default="all")
    p.add_argument("--q-grid", type=_float_list, default=None)
    p.add_argument("--tol", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sample", help="rejection-sample fn or fcn")
    p.add_argument("--target", choices=("fn", "fcn"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch", type=int, default=65536)
    p.add_argument("--binary", action="store_true")
    _add_common(p, "q", "y", "rho")
    p.set_defaults(func=_cmd_sample)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print("qortho: %s" % exc, file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        print("qortho: %s" % exc, file=sys.stderr)
        return 4
    except QOrthoError as exc:
        print("qortho: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
