"""Command-line interface: ``banach-interp <command> ...``.

Commands
--------
verify ID|all
    Run verification experiments; exit status 1 when any claim fails.
norm
    Norm and dual norm of a vector.
tensor-norm
    Injective, projective or ``d_2`` norm of a matrix.
interp
    Bounds for a complex interpolation norm of a vector.
factorize
    Outer spectral factorization of sampled matrix weights, or the analytic
    factorization of ``F(z)`` for constant boundary norm families.
constants
    Type 2 or 2-convexity constant of a space.

Spaces are written ``lp:n:p``, ``wl2:w1,...,wn`` or ``schatten:k:p``
(``p`` may be ``inf``).  Vectors and matrices are JSON arrays or
``{"re": ..., "im": ...}`` objects.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .estimates import complex_from_json, to_jsonable
from .harness import EXPERIMENTS, ExperimentConfig, default_config, parse_space, run_all, verify


def _load_json(text_or_path: str):
    """Parse inline JSON, or read it from a file when prefixed with ``@``."""
    if text_or_path.startswith("@"):
        with open(text_or_path[1:]) as fh:
            return json.load(fh)
    return json.loads(text_or_path)


def _emit(obj):
    print(json.dumps(to_jsonable(obj), sort_keys=True, indent=1))


def _estimate_summary(est, witnesses: bool):
    out = est.to_json()
    if not witnesses:
        out.pop("witnesses", None)
        out.pop("info", None)
    return out


# ---------------------------------------------------------------------------
# verify


def _cmd_verify(args) -> int:
    if args.id == "all":
        if args.config:
            raise SystemExit("--config applies to a single experiment")
        summary = run_all(args.seed, out_dir=args.out_dir)
        for e, rep in summary["reports"].items():
            for line in rep.summary_lines():
                print(line)
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(
                    {"passed": summary["passed"], "experiments": summary["experiments"]}, fh, sort_keys=True, indent=1
                )
                fh.write("\n")
        print("PASSED" if summary["passed"] else "FAILED")
        return 0 if summary["passed"] else 1
    if args.config:
        obj = _load_json("@" + args.config)
        obj.setdefault("experiment", args.id)
        config = ExperimentConfig.from_json(obj)
    else:
        config = default_config(args.id, args.seed)
    if args.trials is not None:
        config.trials = args.trials
        for fam in config.params.get("families", []):
            fam["trials"] = min(int(fam.get("trials", args.trials)), args.trials)
    rep = verify(args.id, config)
    out = args.out or config.output
    if out:
        rep.write_json(out)
    if args.csv:
        rep.write_csv(args.csv)
    for line in rep.summary_lines():
        print(line)
    print("PASSED" if rep.passed else "FAILED")
    return 0 if rep.passed else 1


# ---------------------------------------------------------------------------
# one-off computations


def _cmd_norm(args) -> int:
    from .spaces import dual_norm, norm

    X = parse_space(args.space)
    x = complex_from_json(_load_json(args.vector)).reshape(X.shape)
    _emit({"space": X.to_json(), "norm": norm(X, x), "dual_norm": dual_norm(X, x)})
    return 0


def _cmd_tensor_norm(args) -> int:
    from .tensor import d2_norm, injective_norm, projective_norm

    E, F = parse_space(args.E), parse_space(args.F)
    T = complex_from_json(_load_json(args.matrix))
    fn = {"inj": injective_norm, "proj": projective_norm, "d2": d2_norm}[args.kind]
    _emit(_estimate_summary(fn(T, E, F), args.witnesses))
    return 0


def _cmd_interp(args) -> int:
    from .interp import InterpolationPair, closed_form_interpolant, interp_norm
    from .spaces import norm

    if args.input:
        obj = _load_json("@" + args.input)
        X0, X1 = parse_space(obj["pair"][0]), parse_space(obj["pair"][1])
        theta = float(obj["theta"])
        x = complex_from_json(obj["vector"])
    else:
        if not args.pair or args.theta is None or args.vector is None:
            raise SystemExit("interp needs --pair X0 X1 --theta T --vector V (or --input)")
        X0, X1 = parse_space(args.pair[0]), parse_space(args.pair[1])
        theta = args.theta
        x = complex_from_json(_load_json(args.vector))
    pair = InterpolationPair(X0, X1, theta)
    est = interp_norm(pair, x.reshape(X0.shape), degree=args.degree, grid=args.grid)
    out = _estimate_summary(est, args.witnesses)
    Xt = closed_form_interpolant(pair)
    if Xt is not None:
        out["closed_form_space"] = Xt.to_json()
        out["closed_form_norm"] = norm(Xt, x.reshape(Xt.shape))
    _emit(out)
    return 0


def _parse_handle(text: str, rows: int, cols: int):
    """``schatten:p``, ``op:E->G`` or ``pi2:X`` on ``rows x cols`` matrices."""
    from .handles import MatrixSchattenNorm, OperatorNorm, Pi2Norm

    kind, _, rest = text.partition(":")
    if kind == "schatten":
        return MatrixSchattenNorm((rows, cols), rest)
    if kind == "op":
        E, G = (parse_space(s) for s in rest.split("->"))
        h = OperatorNorm(E, G)
    elif kind == "pi2":
        h = Pi2Norm(parse_space(rest), rows)
    else:
        raise SystemExit(f"unknown norm {text!r}; use schatten:p, op:E->G or pi2:X")
    if h.shape != (rows, cols):
        raise SystemExit(f"norm {text!r} acts on {h.shape} matrices, need {(rows, cols)}")
    return h


def _cmd_factorize(args) -> int:
    from .analytic import (
        BoundaryNormFamily,
        MatrixPolynomial,
        outer_spectral_factorize,
        outerness_check,
        theorem23_factorize,
    )

    if args.spectral:
        if not args.input:
            raise SystemExit("factorize --spectral needs --input phi.json")
        obj = _load_json("@" + args.input)
        Phi = complex_from_json(obj["samples"] if isinstance(obj, dict) else obj)
        A = outer_spectral_factorize(Phi, max_degree=args.max_degree, tol=args.tol)
        _emit({"factor": A.to_json(), "info": A.info, "outer": outerness_check(A)})
        return 0
    if args.input:
        F = MatrixPolynomial.from_json(_load_json("@" + args.input))
    else:
        F = MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    n, m = F.shape
    alpha = BoundaryNormFamily.constant(_parse_handle(args.alpha, m, m))
    beta = BoundaryNormFamily.constant(_parse_handle(args.beta, m, n))
    res = theorem23_factorize(F, alpha, beta, args.epsilon)
    out = res.to_json()
    if not args.witnesses:
        out.pop("B_boundary", None)
        out.pop("gamma_samples", None)
    out["ok"] = res.ok
    _emit(out)
    return 0 if res.ok else 1


def _cmd_constants(args) -> int:
    from .factorization import m2_convexity_constant, type2_constant

    X = parse_space(args.space)
    fn = type2_constant if args.kind == "type2" else m2_convexity_constant
    _emit({"space": X.to_json(), "kind": args.kind, **fn(X, seed=args.seed).to_json()})
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="banach-interp", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification experiments")
    v.add_argument("id", choices=sorted(EXPERIMENTS) + ["all"])
    v.add_argument("--config", help="experiment config JSON file")
    v.add_argument("--out", help="report JSON path (summary JSON for 'all')")
    v.add_argument("--csv", help="per-trial margins CSV path")
    v.add_argument("--out-dir", help="directory for per-experiment reports ('all')")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, help="cap on trials per family")
    v.set_defaults(func=_cmd_verify)

    n = sub.add_parser("norm", help="norm and dual norm of a vector")
    n.add_argument("--space", required=True)
    n.add_argument("--vector", required=True, help="JSON or @file")
    n.set_defaults(func=_cmd_norm)

    t = sub.add_parser("tensor-norm", help="injective, projective or d2 norm")
    t.add_argument("--kind", choices=["inj", "proj", "d2"], required=True)
    t.add_argument("--E", required=True)
    t.add_argument("--F", required=True)
    t.add_argument("--matrix", required=True, help="(F.size, E.size) matrix, JSON or @file")
    t.add_argument("--witnesses", action="store_true")
    t.set_defaults(func=_cmd_tensor_norm)

    i = sub.add_parser("interp", help="interpolation norm bounds")
    i.add_argument("--pair", nargs=2, metavar=("X0", "X1"))
    i.add_argument("--theta", type=float)
    i.add_argument("--vector", help="JSON or @file")
    i.add_argument("--input", help="JSON file with pair, theta, vector")
    i.add_argument("--degree", type=int, default=4)
    i.add_argument("--grid", type=int, default=64)
    i.add_argument("--witnesses", action="store_true")
    i.set_defaults(func=_cmd_interp)

    f = sub.add_parser("factorize", help="spectral or analytic factorization")
    mode = f.add_mutually_exclusive_group(required=True)
    mode.add_argument("--spectral", action="store_true", help="outer factor of boundary samples")
    mode.add_argument("--thm23", action="store_true", help="analytic factorization of F(z)")
    f.add_argument("--input", help="samples JSON (spectral) or matrix polynomial JSON")
    f.add_argument("--max-degree", type=int)
    f.add_argument("--tol", type=float, default=1e-8)
    f.add_argument("--alpha", default="schatten:inf", help="schatten:p, op:E->G or pi2:X")
    f.add_argument("--beta", default="schatten:inf")
    f.add_argument("--epsilon", type=float, default=0.1)
    f.add_argument("--witnesses", action="store_true")
    f.set_defaults(func=_cmd_factorize)

    c = sub.add_parser("constants", help="type 2 or 2-convexity constant")
    c.add_argument("--space", required=True)
    c.add_argument("--kind", choices=["type2", "m2"], default="type2")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=_cmd_constants)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
