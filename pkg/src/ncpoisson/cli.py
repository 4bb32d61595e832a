"""Command-line interface: generate elliptic brackets, run verification batteries, export JSON.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import elliptic, matrep, projective, theta
from .freealg import Tensor, parse_word, render_terms, render_word
from .polyvec import RTensor

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULT_TOLS = {
    "jac2": 1e-8,
    "chart": 1e-9,
    "homogeneous": 1e-9,
    "matrix": 1e-8,
    "theta": 1e-8,
    "abelian": 1e-10,
}

_TAU_RE = re.compile(r"^\s*([+-]?[\d.]+(?:e[+-]?\d+)?)\s*([+-])\s*([\d.]+(?:e[+-]?\d+)?)?\s*[ij]\s*$", re.I)


class InputError(ValueError):
    pass


def parse_tau(s: str) -> complex:
    """Parse 'RE+IMi' (also RE-IMi, and a bare 'i' imaginary part means 1)."""
    m = _TAU_RE.match(s)
    if not m:
        raise InputError(f"cannot parse tau {s!r}; expected RE+IMi, e.g. 0.3+1.1i")
    re_part = float(m.group(1))
    im = float(m.group(3)) if m.group(3) else 1.0
    return complex(re_part, -im if m.group(2) == "-" else im)


def cjson(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def cload(v) -> complex:
    return complex(v[0], v[1])


# ------------------------------------------------------------ serialisation


def rtensor_doc(r: RTensor) -> list:
    return [[int(i), int(j), int(a), int(b), cjson(r.r[i, j, a, b])] for i, j, a, b in zip(*np.nonzero(r.r))]


def rtensor_load(n: int, triplets) -> RTensor:
    r = np.zeros((n, n, n, n), dtype=complex)
    for i, j, a, b, v in triplets:
        r[i, j, a, b] = cload(v)
    return RTensor(r)


def theta_doc(B) -> list:
    out = []
    for (i, j) in sorted(B.theta):
        for (left, right), v in sorted(B.theta[(i, j)].terms.items()):
            out.append({"i": i, "j": j, "left_word": render_word(left, "u"),
                        "right_word": render_word(right, "u"), "coeff": cjson(v)})
    return out


def theta_load(entries, n_total: int, chart: int) -> projective.AffineBracket:
    grid: dict = {}
    for e in entries:
        key = (e["i"], e["j"])
        pair = (parse_word(e["left_word"]), parse_word(e["right_word"]))
        d = grid.setdefault(key, {})
        d[pair] = d.get(pair, 0) + cload(e["coeff"])
    return projective.AffineBracket(n_total - 1, {k: Tensor(v) for k, v in grid.items()},
                                    n_total=n_total, chart=chart)


def render_bracket(B) -> str:
    lines = []
    for (i, j) in sorted(B.theta):
        lines.append(f"theta[{i},{j}] = {render_terms(B.theta[(i, j)], 'u')}")
    return "\n".join(lines)


# ------------------------------------------------------------- commands


def _params(args) -> elliptic.EllipticParams:
    tau = parse_tau(args.tau)
    trunc = args.truncation
    if trunc is None and os.environ.get("NCPOISSON_TRUNCATION"):
        trunc = int(os.environ["NCPOISSON_TRUNCATION"])
    try:
        return elliptic.EllipticParams(args.n, args.k, tau, truncation=trunc)
    except ValueError as e:
        raise InputError(str(e)) from e


def _tol(args, check: str) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get("NCPOISSON_TOL")
    return float(env) if env else DEFAULT_TOLS[check]


def cmd_gen(args) -> tuple[dict, int]:
    p = _params(args)
    c = elliptic.c_coeffs(p)
    r = elliptic.r_tensor_from_c(c)
    doc = {"params": {"n": p.n, "k": p.k, "tau": cjson(p.tau), "truncation": p.ctx.M},
           "c_matrix": [[cjson(v) for v in row] for row in c]}
    if args.form in ("homogeneous", "both"):
        doc["r_tensor"] = rtensor_doc(r)
    if args.form in ("affine", "both"):
        chart = p.n - 1 if args.chart is None else args.chart
        A = projective.descend(r, chart)
        doc["chart"] = chart
        doc["affine_theta"] = theta_doc(A)
        doc["render"] = render_bracket(A)
    doc["abelianization_max"] = elliptic.abelianize(r).max_abs()
    return doc, EXIT_OK


def _load_input(path: str):
    with open(path) as fh:
        doc = json.load(fh)
    pd = doc["params"]
    p = elliptic.EllipticParams(pd["n"], pd["k"], cload(pd["tau"]), truncation=pd.get("truncation"))
    r = rtensor_load(p.n, doc["r_tensor"]) if "r_tensor" in doc else None
    A = theta_load(doc["affine_theta"], p.n, doc.get("chart", p.n - 1)) if "affine_theta" in doc else None
    return p, r, A


def _report(check: str, p, residual: float, tol: float, **extra) -> dict:
    return {"check": check, "params": {"n": p.n, "k": p.k, "tau": cjson(p.tau)},
            "residual": float(residual), "tolerance": tol, "pass": bool(residual < tol), **extra}


def cmd_verify(args) -> tuple[dict, int]:
    if args.input:
        try:
            p, r_in, A_in = _load_input(args.input)
        except (OSError, KeyError, ValueError) as e:
            raise InputError(f"cannot load {args.input}: {e}") from e
    else:
        p, r_in, A_in = _params(args), None, None
    check = args.check
    tol = _tol(args, check)
    r = r_in if r_in is not None else elliptic.build_r_tensor(p)
    if check == "jac2":
        cert = elliptic.jac2_certificate(elliptic.c_coeffs(p))
        rep = _report(check, p, cert.residual, tol)
    elif check == "chart":
        A = A_in if A_in is not None else projective.descend(r, args.chart)
        res = projective.jacobi_affine(A, degree=args.degree, n_random=args.samples, seed=args.seed)
        rep = _report(check, p, res, tol, degree=args.degree, chart=A.chart)
    elif check == "homogeneous":
        res = projective.jacobi_homogeneous(r, degree=args.degree, chart=args.chart)
        rep = _report(check, p, res, tol, degree=args.degree)
    elif check == "matrix":
        A = A_in if A_in is not None else projective.descend(r, args.chart)
        res = matrep.jacobi_matrix_test(A, args.N, samples=args.samples, degree=args.degree, seed=args.seed)
        rep = _report(check, p, res, tol, N=args.N, samples=args.samples, degree=args.degree)
    elif check == "theta":
        results = theta.theta_selftest(p.ctx, samples=args.samples, seed=args.seed)
        rep = _report(check, p, max(results.values()), tol, identities=results)
    elif check == "abelian":
        ab = elliptic.abelianize(r)
        q = elliptic.q_commutative(p)
        defect = float(np.abs(ab.b - q.b).max())
        rep = _report(check, p, defect, tol, commutative_max=q.max_abs(),
                      nonabelian_max=float(np.abs(r.r).max()),
                      commutative_trivial=bool(q.max_abs() < tol))
    else:  # pragma: no cover - argparse restricts the choices
        raise InputError(f"unknown check {check}")
    return rep, EXIT_OK if rep["pass"] else EXIT_FAIL


def cmd_theta_selftest(args) -> tuple[dict, int]:
    p = _params(args)
    tol = _tol(args, "theta")
    results = theta.theta_selftest(p.ctx, samples=args.samples, seed=args.seed)
    code = EXIT_OK if max(results.values()) < tol else EXIT_FAIL
    return {k: float(v) for k, v in sorted(results.items())}, code


def cmd_contfrac(args) -> tuple[dict, int]:
    try:
        seq = elliptic.contfrac(args.n, args.k)
    except ValueError as e:
        raise InputError(str(e)) from e
    doc = {"n": args.n, "k": args.k, "contfrac": seq,
           "d_all": elliptic.tridiag_det(seq), "d_tail": elliptic.tridiag_det(seq[1:])}
    doc["pass"] = doc["d_all"] == args.n and doc["d_tail"] == args.k
    return doc, EXIT_OK if doc["pass"] else EXIT_FAIL


# ------------------------------------------------------------------ parser


def _common(sp, with_params=True):
    if with_params:
        sp.add_argument("--n", type=int, default=3)
        sp.add_argument("--k", type=int, default=1)
        sp.add_argument("--tau", default=os.environ.get("NCPOISSON_TAU", "0.3+1.1i"))
        sp.add_argument("--truncation", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None, help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncpoisson", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="coefficients, r-tensor and chart bracket as JSON")
    _common(g)
    g.add_argument("--form", choices=["affine", "homogeneous", "both"], default="both")
    g.add_argument("--chart", type=int, default=None)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="run one verification battery")
    v.add_argument("check", choices=sorted(DEFAULT_TOLS))
    _common(v)
    v.add_argument("--input", default=None, help="re-verify a document produced by gen")
    v.add_argument("--chart", type=int, default=None)
    v.add_argument("--degree", type=int, default=None)
    v.add_argument("--N", type=int, default=2)
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--tol", type=float, default=None)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("theta-selftest", help="theta identity battery as {identity: max residual}")
    _common(t)
    t.add_argument("--samples", type=int, default=20)
    t.add_argument("--tol", type=float, default=None)
    t.set_defaults(func=cmd_theta_selftest)

    c = sub.add_parser("contfrac", help="continued fraction of n/k with determinant check")
    c.add_argument("n", type=int)
    c.add_argument("k", type=int)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_contfrac)
    return ap


_VERIFY_DEFAULTS = {
    "chart": {"degree": 3, "samples": 50},
    "homogeneous": {"degree": 2, "samples": 0},
    "matrix": {"degree": 3, "samples": 100},
    "theta": {"degree": 0, "samples": 20},
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "verify":
        for key, val in _VERIFY_DEFAULTS.get(args.check, {}).items():
            if getattr(args, key) is None:
                setattr(args, key, val)
        if args.degree is not None and args.degree < 1 and args.check in ("chart", "homogeneous", "matrix"):
            print("error: degree must be >= 1", file=sys.stderr)
            return EXIT_INPUT
    try:
        doc, code = args.func(args)
    except (InputError, ValueError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
