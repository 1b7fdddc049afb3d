"""Command line front end.

Exit status: 0 on success, 2 when a mathematical check fails, 1 on usage or
input errors. All randomness comes from ``--seed``; identical arguments give
byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import matcore, projconst, seqmodel, signsearch
from .blowup import BlowupSpec, verify_remark
from .matrixio import MatrixParseError, read_matrix

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2

DEFAULT_TOLS = {
    "identity": 1e-8,  # blowup identities
    "gap": 1e-8,  # spectral gap for top projectors
    "zero": 1e-10,  # Sgn ambiguity threshold
    "eq": 1e-9,  # von Neumann equality
    "grid": 1e-6,  # grid certificate slack
    "limit": 1e-6,  # eps-limit convergence
    "lemma": 1e-9,  # annihilator duality residuals
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# serialization


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def flatten(obj, prefix: str = "") -> dict:
    """Nested dicts to dotted keys; lists of scalars are joined with spaces."""
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            out.update(flatten(v, f"{prefix}.{i}" if prefix else str(i)))
    elif isinstance(obj, list):
        out[prefix] = " ".join(str(v) for v in obj)
    else:
        out[prefix] = obj
    return out


def render(report: dict, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    flat = flatten(report)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(flat.keys())
        w.writerow(flat.values())
        return buf.getvalue()
    return "".join(f"{k}: {v}\n" for k, v in flat.items())


# ---------------------------------------------------------------------------
# helpers


def _parse_list(text: str, conv=Fraction) -> list:
    try:
        return [conv(t) for t in text.replace(",", " ").split()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse list {text!r}") from None


def _workers() -> int:
    raw = os.environ.get("PROJCONST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"PROJCONST_THREADS must be an integer, got {raw!r}") from None


def _ascent_opts(args) -> signsearch.AscentOptions:
    return signsearch.AscentOptions(restarts=args.restarts, seed=args.seed, grid=args.grid,
                                    grid_tol=args.tols["grid"])


def _sign_matrix_from_file(path) -> np.ndarray:
    a = read_matrix(path)
    try:
        return matcore.as_sign(np.rint(a).astype(int)) if np.all(np.isin(a, (-1.0, 1.0))) else matcore.as_sign(a)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _diag_to_json(dg: signsearch.SimplexDiag) -> list:
    return list(dg.diag)


# ---------------------------------------------------------------------------
# commands; each returns (report dict, ok flag)


def cmd_pin(args):
    a = read_matrix(args.matrix)
    if args.diag:
        dg = [float(x) for x in _parse_list(args.diag)]
        value = matcore.pi_n_diag_product(a, dg, args.n)
    else:
        value = matcore.pi_n(a, args.n)
    return {"command": "pin", "n": args.n, "value": value,
            "eigenvalues": matcore.eigvals_desc(a)}, True


def cmd_lambda(args):
    b = read_matrix(args.basis)
    res = projconst.relative_projection_constant(projconst.SubspaceLinf(b))
    ok = res.lp_status == "optimal" and res.value >= res.dual_bound - 1e-8
    return {
        "command": "lambda",
        "value": res.value,
        "dual_bound": res.dual_bound,
        "lp_status": res.lp_status,
        "iterations": res.iterations,
        "P": res.optimal_p.p,
        "tol": 1e-8,
    }, ok


def cmd_search(args):
    opts = _ascent_opts(args)
    records = signsearch.search_classes(args.n, args.m, args.eps, opts, workers=_workers())
    best = signsearch.best_record(records)
    out_records = []
    for r in records:
        out_records.append({
            "class_id": r.class_id,
            "sign_matrix": r.sign_matrix,
            "best_D": _diag_to_json(r.result.best_d),
            "value": r.result.value,
            "grid_certificate": None if r.result.grid_certificate is None else {
                "resolution": f"1/{r.result.grid_certificate[0]}",
                "best_grid_value": r.result.grid_certificate[1],
                "tol": opts.grid_tol,
                "ok": r.result.certified,
            },
        })
    certified = all(r.result.certified for r in records) if args.m <= opts.grid_max_dim else None
    report = {
        "command": "search",
        "n": args.n,
        "m": args.m,
        "eps": args.eps,
        "restarts": args.restarts,
        "seed": args.seed,
        "classes": out_records,
        "best": {
            "class_id": best.class_id,
            "sign_matrix": best.sign_matrix,
            "best_D": _diag_to_json(best.result.best_d),
            "value": best.result.value,
        },
        "status": "grid-certified" if certified else "best found",
    }
    return report, certified is not False


def cmd_blowup(args):
    mult = [int(x) for x in _parse_list(args.mult, int)]
    spec = BlowupSpec(tuple(mult))
    q = np.array([float(x) for x in spec.q])
    if args.s0 == "auto":
        s0, _ = signsearch.best_sign_matrix(q, args.n)
        maximizer = True
    else:
        s0 = _sign_matrix_from_file(args.s0)
        if args.assume_maximizer:
            maximizer = True
        elif s0.shape[0] <= 5:
            _, best = signsearch.best_sign_matrix(q, args.n)
            maximizer = matcore.pi_n_diag_product(s0, q, args.n) >= best - 1e-12
        else:
            maximizer = False
    p0 = read_matrix(args.p0) if args.p0 else None
    rep = verify_remark(s0, spec, args.n, maximizer, p0, tol=args.tols["identity"],
                        gap_tol=args.tols["gap"], zero_tol=args.tols["zero"])
    out = {"command": "blowup", "s0": s0, **rep.to_dict()}
    return out, (rep.passed if maximizer else True)


def cmd_kobos(args):
    rep = seqmodel.kobos_report(args.truncation)
    return {"command": "kobos", **rep.to_dict()}, rep.passed


def _random_pair(rng, d):
    k = int(rng.integers(1, d))
    while True:
        m = rng.standard_normal((d, d))
        if np.linalg.svd(m, compute_uv=False)[-1] > 1e-3:
            break
    return projconst.SubspaceLinf(m[:, :k]), projconst.SubspaceLinf(m[:, k:])


def duality_fuzz(trials: int, seed: int, dims, tol: float = 1e-9) -> dict:
    rng = np.random.default_rng(seed)
    names = ("dim_u0_eq_dim_v", "double_annihilator", "dual_direct_sum", "adjoint_is_projection", "norm_equality")
    passed = dict.fromkeys(names, 0)
    failures = []
    for t in range(trials):
        d = int(dims[t % len(dims)]) if len(dims) > 1 else int(dims[0])
        v, u = _random_pair(rng, d)
        r = projconst.lemma1_check(v, u, tol)
        flags = {
            "dim_u0_eq_dim_v": r.dims_ok,
            "double_annihilator": r.double_annihilator_residual <= tol,
            "dual_direct_sum": r.dual_direct_sum_ok,
            "adjoint_is_projection": r.adjoint_residual <= tol,
            "norm_equality": r.norms_equal,
        }
        for k, ok in flags.items():
            passed[k] += bool(ok)
        if not all(flags.values()):
            failures.append({"trial": t, "d": d, "failed": [k for k, ok in flags.items() if not ok]})
    return {
        "trials": trials,
        "seed": seed,
        "dims": list(dims),
        "tol": tol,
        "identities": {k: {"passed": passed[k], "ok": passed[k] == trials} for k in names},
        "failures": failures,
    }


def cmd_duality_fuzz(args):
    dims = [args.dim] if args.dim else list(range(2, 9))
    if any(d < 2 for d in dims):
        raise UsageError("--dim must be at least 2")
    rep = duality_fuzz(args.trials, args.seed, dims, args.tols["lemma"])
    return {"command": "duality-fuzz", **rep}, not rep["failures"]


def cmd_vn_check(args):
    a, b = read_matrix(args.a), read_matrix(args.b)
    cert = matcore.vn_trace_check(a, b, args.tols["eq"])
    return {
        "command": "vn-check",
        "lhs": cert.lhs,
        "bound": cert.bound,
        "gap": cert.gap,
        "equality": cert.equality,
        "eq_tol": args.tols["eq"],
        "shared_basis": cert.shared_basis,
        "certificate_residual": cert.residual,
        "residual_tol": matcore.RESID_TOL,
    }, cert.gap >= -args.tols["eq"] and (not cert.equality or cert.residual <= matcore.RESID_TOL)


S_STAR = np.array([[1, 1, -1], [1, 1, 1], [-1, 1, 1]])


def cmd_eps_limit(args):
    s = _sign_matrix_from_file(args.matrix) if args.matrix else S_STAR
    eps_seq = [float(x) for x in _parse_list(args.eps_seq)]
    res = signsearch.eps_limit_check(s, args.n, eps_seq, _ascent_opts(args), args.tols["limit"])
    return {
        "command": "eps-limit",
        "n": args.n,
        "sign_matrix": s,
        "eps_seq": res.eps_seq,
        "values": res.values,
        "limit_value": res.limit_value,
        "nondecreasing": res.nondecreasing,
        "converged": res.converged,
        "limit_tol": res.limit_tol,
    }, res.nondecreasing and res.converged


def cmd_stabilizer(args):
    a = read_matrix(args.matrix) if args.matrix else S_STAR
    group = signsearch.stabilizer(a)
    out = {
        "command": "stabilizer",
        "order": len(group),
        "is_group": signsearch.is_group(group),
        "elements": [{"perm": list(g.perm), "signs": list(g.signs)} for g in group],
    }
    ok = out["is_group"]
    if args.diag:
        dg = signsearch.SimplexDiag(tuple(_parse_list(args.diag)))
        lam = signsearch.symmetrize(dg, group)
        invariant = all(tuple(g.act_diag(lam.diag)) == lam.diag for g in group)
        idem = signsearch.symmetrize(lam, group) == lam
        out.update({"D": list(dg.diag), "symmetrized": list(lam.diag), "invariant": invariant,
                    "idempotent": idem, "tol": 0})
        ok = ok and invariant and idem
    return out, ok


COMMANDS = {
    "pin": cmd_pin,
    "lambda": cmd_lambda,
    "search": cmd_search,
    "blowup": cmd_blowup,
    "kobos": cmd_kobos,
    "duality-fuzz": cmd_duality_fuzz,
    "vn-check": cmd_vn_check,
    "eps-limit": cmd_eps_limit,
    "stabilizer": cmd_stabilizer,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)

    ascent = _Parser(add_help=False)
    ascent.add_argument("--restarts", type=int, default=32)
    ascent.add_argument("--grid", type=int, default=60, help="grid resolution 1/GRID for the d <= 4 check")

    parser = _Parser(prog="maxproj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pin", parents=[common], help="Ky Fan sum of a matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--diag", help="diagonal D as 'a,b,...'; computes pi_n(A D)")

    p = sub.add_parser("lambda", parents=[common], help="projection constant of span(basis) in l_inf^d")
    p.add_argument("--basis", required=True)

    p = sub.add_parser("search", parents=[common, ascent], help="maximize over the simplex for every sign class")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.0)

    p = sub.add_parser("blowup", parents=[common], help="verify the blow-up identity chain")
    p.add_argument("--s0", required=True, help="sign matrix file, or 'auto' for the exhaustive maximizer")
    p.add_argument("--mult", required=True, help="multiplicities, e.g. 2,2,2")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p0", help="m x m projector for the final inequality")
    p.add_argument("--assume-maximizer", action="store_true")

    p = sub.add_parser("kobos", parents=[common], help="exact counterexample report")
    p.add_argument("--truncation", type=int, default=6)

    p = sub.add_parser("duality-fuzz", parents=[common], help="random checks of the annihilator duality")
    p.add_argument("--dim", type=int, help="ambient dimension (default: cycle through 2..8)")
    p.add_argument("--trials", type=int, default=200)

    p = sub.add_parser("vn-check", parents=[common], help="von Neumann trace inequality with certificate")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    p = sub.add_parser("eps-limit", parents=[common, ascent], help="maxima over D >= eps as eps decreases")
    p.add_argument("--matrix", help="sign matrix file (default: the 3x3 hexagon sign matrix)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--eps-seq", default="1/4,1/8,1/16,1/32")

    p = sub.add_parser("stabilizer", parents=[common], help="signed-permutation stabilizer and averaging")
    p.add_argument("--matrix", help="symmetric matrix file (default: the 3x3 hexagon sign matrix)")
    p.add_argument("--diag", help="diagonal D to average, e.g. 1/2,1/4,1/4")
    return parser


def _split_tols(argv: list[str]) -> tuple[list[str], dict]:
    tols = dict(DEFAULT_TOLS)
    rest = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--tol."):
            name, _, value = tok[len("--tol."):].partition("=")
            if not value:
                value = next(it, None)
                if value is None:
                    raise UsageError(f"missing value for --tol.{name}")
            if name not in tols:
                raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(sorted(tols))}")
            try:
                tols[name] = float(value)
            except ValueError:
                raise UsageError(f"bad value for --tol.{name}: {value!r}") from None
        else:
            rest.append(tok)
    return rest, tols


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv, tols = _split_tols(argv)
        args = build_parser().parse_args(argv)
        args.tols = tols
        report, ok = COMMANDS[args.command](args)
    except MatrixParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report["tolerances"] = tols
    report["ok"] = bool(ok)
    out.write(render(report, args.format))
    return EXIT_OK if ok else EXIT_CHECK


def main() -> None:
    sys.exit(run())
