"""Command line front end: ``diagforge <command> [options]``.

Every command reads a JSON document (``--input`` file, or stdin) when it
needs one and prints a JSON report to stdout (or ``--output``). Exit codes:
0 success, 2 infeasible (report still printed), 3 invalid input, 4 tolerance
or model-size failure. Errors are also written to stderr as JSON.
"""

import argparse
import sys
from dataclasses import asdict

import numpy as np

from . import carpenter as cp
from . import jsonio
from . import obstructions as ob
from . import schurhorn as sh
from .errors import DiagforgeError, Infeasible, InvalidInput
from .jsonio import encode_matrix, parse_complex, parse_matrix, parse_real, require
from .numkit import (conditional_expectation_diag, flatten_constant_diagonal, is_unitary,
                     max_abs, normalized_trace, verify_projection_family)

VERIFY_FAILED = 4


def _read_input(args):
    if args.input and args.input != "-":
        with open(args.input) as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    return jsonio.loads(text)


def _floats(text):
    try:
        return [parse_real(x.strip()) for x in text.split(",") if x.strip()]
    except InvalidInput:
        raise
    except Exception as exc:
        raise InvalidInput(f"bad number list {text!r}") from exc


def _family_json(fam, eps):
    return {
        "kind": "projection_family", "dim": fam.dim, "eps": eps,
        "projections": [encode_matrix(P) for P in fam.projections],
        "unitary": encode_matrix(fam.unitary),
        "patterns": fam.patterns.astype(int).tolist(),
        "target": fam.target.tolist(),
        "residuals": fam.residuals().tolist(), "residual": fam.residual,
        "traces": fam.traces(),
        "report": fam.report,
    }


def _synthesis_json(res, eps, model, spectrum):
    return {
        "kind": "synthesis", "model": model, "dim": res.dim, "eps": eps,
        "unitary": encode_matrix(res.unitary),
        "normal": [complex(v) for v in res.normal],
        "target": [complex(v) for v in res.target],
        "diagonal": [complex(v) for v in res.diagonal()],
        "residual": res.residual,
        "spectrum": [complex(v) for v in spectrum],
        "report": res.report,
    }


def _parse_diagonal_spec(doc):
    return cp.DiagonalSpec([parse_complex(v) for v in require(doc, "head")],
                           [parse_complex(v) for v in require(doc, "tail_pattern")])


def _parse_tracial_spectrum(doc):
    return sh.TracialSpectrum([jsonio.parse_exact_complex(v) for v in require(doc, "values")],
                              [parse_real(w) for w in require(doc, "weights")])


def _parse_blocks(doc):
    return [(jsonio.parse_exact_complex(require(b, "value")), parse_real(require(b, "weight")))
            for b in doc]


# -- commands -----------------------------------------------------------------------

def cmd_flatten(args):
    doc = _read_input(args)
    if "matrix" in doc:
        N = parse_matrix(doc["matrix"])
    else:
        N = np.diag([parse_complex(v) for v in require(doc, "diagonal")])
    U = flatten_constant_diagonal(N, tol=args.tol or 1e-9)
    diag = conditional_expectation_diag(U.conj().T @ N @ U)
    tau = normalized_trace(N)
    return 0, {"kind": "flatten", "dim": len(N), "unitary": encode_matrix(U),
               "diagonal": [complex(v) for v in diag], "trace": complex(tau),
               "residual": float(np.max(np.abs(diag - tau)))}


def cmd_carpenter(args):
    eps = args.eps if args.eps is not None else 0.05
    if args.kind == "block":
        if args.alpha is not None:
            alpha, beta = _floats(args.alpha), _floats(args.beta or "")
        else:
            doc = _read_input(args)
            alpha, beta = require(doc, "alpha"), require(doc, "beta")
        fam = cp.carpenter_block([float(parse_real(a)) for a in alpha],
                                 [float(parse_real(b)) for b in beta], eps, method=args.method)
    elif args.kind == "discrete":
        doc = _read_input(args)
        joint = cp.JointPartitionSpec([_parse_diagonal_spec(s) for s in require(doc, "specs")])
        fam = cp.carpenter_discrete(joint, eps, max_dim=args.max_dim)
    elif args.kind == "tracial":
        doc = _read_input(args)
        targets = doc.get("trace_targets")
        part = cp.TracialPartition(
            int(require(doc, "dim")),
            [[parse_real(x) for x in col] for col in require(doc, "columns")],
            [parse_real(t) for t in targets] if targets is not None else None)
        fam = cp.carpenter_tracial(part, eps, max_dim=args.max_dim)
    else:
        doc = _read_input(args)
        level, fam = cp.carpenter_uhf([[parse_real(x) for x in col]
                                       for col in require(doc, "columns")],
                                      eps, max_dim=args.max_dim)
    return 0, _family_json(fam, eps)


def cmd_synth(args):
    eps = args.eps if args.eps is not None else 0.05
    doc = _read_input(args)
    if args.kind == "discrete":
        spec = require(doc, "spectrum")
        N = sh.DiscreteSpectrum([(parse_complex(z), int(m)) for z, m in spec.get("finite_eigs", [])],
                                [parse_complex(z) for z in require(spec, "essential")])
        res = sh.synth_diagonal_discrete(N, _parse_diagonal_spec(require(doc, "target")), eps,
                                         max_dim=args.max_dim)
        return 0, _synthesis_json(res, eps, "discrete", N.points())
    N = _parse_tracial_spectrum(require(doc, "spectrum"))
    res = sh.synth_diagonal_tracial(N, _parse_blocks(require(doc, "blocks")), eps,
                                    max_dim=args.max_dim)
    return 0, _synthesis_json(res, eps, "tracial", N.points())


def cmd_feasibility(args):
    doc = _read_input(args)
    N = _parse_tracial_spectrum(require(doc, "spectrum"))
    blocks = _parse_blocks(require(doc, "blocks"))
    witness = sh.feasibility_partition(N, blocks)
    return 0, {"kind": "feasibility", "feasible": True, "gamma": witness.to_json(),
               "exact": witness.is_exact()}


def cmd_obstruct(args):
    if args.kind == "arveson":
        res = ob.arveson_search(args.restarts, args.iters, args.seed or 0)
        out = res.to_json()
        out.update(kind="arveson", unitary=encode_matrix(res.unitary))
        return 0, out
    if args.kind == "square":
        cert = ob.square_infeasibility_certificate()
        out = cert.to_json()
        out["kind"] = "square"
        return Infeasible.exit_code, out
    eps = args.eps if args.eps is not None else 0.05
    out = ob.contrast_demo(eps, args.restarts, args.iters, args.seed or 0)
    out["kind"] = "contrast"
    return 0, out


def _artifact_family(doc):
    if doc.get("kind") == "synthesis":
        U = parse_matrix(doc["unitary"])
        normal = np.array([parse_complex(v) for v in doc["normal"]])
        keys = sorted({(round(v.real, 12), round(v.imag, 12)) for v in normal})
        projs = []
        for k in keys:
            rows = U[[(round(v.real, 12), round(v.imag, 12)) == k for v in normal], :]
            projs.append(rows.conj().T @ rows)
        return projs, U
    projs = [parse_matrix(P) for P in require(doc, "projections")]
    U = parse_matrix(doc["unitary"]) if "unitary" in doc else None
    return projs, U


def cmd_verify(args):
    doc = _read_input(args)
    if args.kind == "family":
        tol = args.tol or 1e-9
        projs, U = _artifact_family(doc)
        rep = verify_projection_family(projs, tol)
        out = {"kind": "verify_family", **asdict(rep)}
        ok = rep.passed
        if U is not None:
            out["unitary_residual"] = max_abs(U.conj().T @ U - np.eye(len(U)))
            ok = ok and is_unitary(U, 1e-10)
        if "target" in doc and "residual" in doc and doc.get("kind") == "projection_family":
            diag = np.array([np.diagonal(P).real for P in projs])
            resid = float(np.max(np.abs(diag - np.array(doc["target"], float))))
            out["diagonal_residual"] = resid
            ok = ok and resid < float(doc["eps"])
        if doc.get("kind") == "synthesis":
            out["diagonal_residual"] = float(doc["residual"])
            ok = ok and float(doc["residual"]) < float(doc["eps"])
        out["passed"] = bool(ok)
        return (0 if ok else VERIFY_FAILED), out
    if doc.get("kind") == "synthesis":
        U = parse_matrix(doc["unitary"])
        normal = np.array([parse_complex(v) for v in doc["normal"]])
        diag = (np.abs(U) ** 2).T @ normal
        spectrum = list(normal) + [parse_complex(v) for v in doc.get("spectrum", [])]
        tol = args.tol if args.tol is not None else 1e-8 + float(doc.get("eps", 0))
    else:
        diag = [parse_complex(v) for v in require(doc, "diagonal")]
        spectrum = [parse_complex(v) for v in require(doc, "spectrum")]
        tol = args.tol if args.tol is not None else 1e-9
    res = sh.check_necessity(list(diag), spectrum, tol)
    out = {"kind": "verify_necessity", "passed": res.ok, "tol": tol,
           "max_distance": res.max_distance, "index": res.index,
           "value": res.value}
    return (0 if res.ok else VERIFY_FAILED), out


# -- parser -------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input JSON file (default: stdin)")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--eps", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--max-dim", type=int, dest="max_dim")
    common.add_argument("--tol", type=float)

    parser = argparse.ArgumentParser(prog="diagforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flatten", parents=[common], help="constant-diagonal unitary")
    p.set_defaults(func=cmd_flatten)

    p = sub.add_parser("carpenter", parents=[common], help="projection constructions")
    p.add_argument("kind", choices=["block", "discrete", "tracial", "uhf"])
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--method", choices=["compact", "proof"], default="compact")
    p.set_defaults(func=cmd_carpenter)

    p = sub.add_parser("synth", parents=[common], help="diagonal synthesis")
    p.add_argument("kind", choices=["discrete", "tracial"])
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("feasibility", parents=[common], help="tracial feasibility LP")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("obstruct", parents=[common], help="obstructions and contrast")
    p.add_argument("kind", choices=["arveson", "square", "contrast"])
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--iters", type=int, default=2000)
    p.set_defaults(func=cmd_obstruct)

    p = sub.add_parser("verify", parents=[common], help="check emitted artifacts")
    p.add_argument("kind", choices=["family", "necessity"])
    p.set_defaults(func=cmd_verify)
    return parser


def _emit(args, report):
    text = jsonio.dumps(report)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error_json(exc):
    out = {"error": type(exc).__name__, "message": str(exc),
           "exit_code": getattr(exc, "exit_code", 3)}
    for attr in ("index", "value", "distance"):
        if getattr(exc, attr, None) is not None:
            out[attr] = getattr(exc, attr)
    return out


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code else 0
    try:
        code, report = args.func(args)
    except Infeasible as exc:
        report = {"kind": args.command, "feasible": False,
                  "certificate": exc.certificate.to_json() if exc.certificate else None,
                  "message": str(exc)}
        _emit(args, report)
        sys.stderr.write(jsonio.dumps(_error_json(exc)))
        return exc.exit_code
    except DiagforgeError as exc:
        sys.stderr.write(jsonio.dumps(_error_json(exc)))
        return exc.exit_code
    except (KeyError, TypeError, ValueError, OSError) as exc:
        sys.stderr.write(jsonio.dumps({"error": "InvalidInput", "message": str(exc),
                                       "exit_code": 3}))
        return 3
    _emit(args, report)
    if code == Infeasible.exit_code:
        sys.stderr.write(jsonio.dumps({"error": "Infeasible", "message": "no solution; see report",
                                       "exit_code": code}))
    return code


if __name__ == "__main__":
    sys.exit(main())
