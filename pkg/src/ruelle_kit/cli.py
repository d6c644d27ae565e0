"""Command-line front end.

Exit codes: 0 success, 2 validation or check failure, 3 solver failure
(non-convergence, non-primitive input), 1 I/O or schema error.  Results go
to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Any

from . import kgraph as kg
from .errors import (
    BracketError,
    CertificateError,
    ConvergenceError,
    DegenerateSpaceError,
    NotPrimitiveError,
    RuelleKitError,
    SchemaError,
    VerificationError,
)
from .ksystem import (
    beta_search,
    check_cocycle_condition,
    commutation_witness,
    joint_rpf_solve,
    kms_functional,
)
from .ruelle import rpf_solve
from .serialize import (
    FORMAT,
    dumps,
    elements_from_json,
    graph_from_json,
    kgraph_measure_to_json,
    measure_from_json,
    rpf_solution_to_json,
    system_from_json,
)
from .symspace import certificates, compose, format_word, word_lengths

log = logging.getLogger("ruelle_kit")

EXIT_OK, EXIT_IO, EXIT_FAIL, EXIT_SOLVER = 0, 1, 2, 3


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            return [(prefix, ",".join(_scalar(x) for x in obj))]
        out = []
        for i, x in enumerate(obj):
            out.extend(_flatten(x, f"{prefix}.{i}"))
        return out
    return [(prefix, _scalar(obj))]


def _scalar(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(report: dict, fmt: str) -> None:
    report = {"format": FORMAT, **report}
    if fmt == "tsv":
        sys.stdout.write("key\tvalue\n")
        for k, v in _flatten(json.loads(dumps(report))):
            sys.stdout.write(f"{k}\t{v}\n")
    else:
        sys.stdout.write(dumps(report) + "\n")


def _load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


class _IOFailure(Exception):
    pass


def _doc_type(doc: dict) -> str:
    t = doc.get("type")
    if t is None:
        t = "kgraph" if "edges" in doc else "system"
    return t


def _degree_bound(text: str | None, rank: int) -> tuple[int, ...]:
    if text is None:
        return (2,) * rank
    parts = [int(x) for x in text.split(",")]
    if len(parts) == 1:
        parts = parts * rank
    if len(parts) != rank:
        raise SchemaError(f"degree bound {text!r} does not have {rank} entries")
    return tuple(parts)


def _theta(args, doc: dict) -> float:
    if args.theta is not None:
        return float(args.theta)
    return float(doc.get("theta", 0.0))


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    doc = _load(args.input)
    if _doc_type(doc) == "kgraph":
        return _kgraph_validate(args, doc)
    system = system_from_json(doc)
    prod = compose(*system.maps)
    ok = check_cocycle_condition(system)
    report = {
        "command": "validate",
        "type": "system",
        "rank": system.rank,
        "maps_commute": True,
        "cocycle_condition": ok,
        "certificates": [vars(certificates(system.space, m)) for m in system.maps],
        "product_certificate": vars(certificates(system.space, prod)),
        "valid": ok,
    }
    _emit(report, args.format)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_rpf(args) -> int:
    system = system_from_json(_load(args.input))
    i = args.coordinate
    if not 0 <= i < system.rank:
        raise SchemaError(f"coordinate {i} out of range for rank {system.rank}")
    sol = rpf_solve(system.triple(i), args.depth, tol=args.tol, max_iter=args.max_iter)
    report = {"command": "rpf", "coordinate": i, **rpf_solution_to_json(sol)}
    report.pop("format")
    _emit(report, args.format)
    return EXIT_OK


def cmd_joint_rpf(args) -> int:
    system = system_from_json(_load(args.input))
    sol = joint_rpf_solve(system, args.depth, tol=args.tol, max_iter=args.max_iter)
    report = {
        "command": "joint-rpf",
        "depth": sol.depth,
        "lambda": list(sol.eigenvalues),
        "mu": {format_word(system.space, w): float(v) for w, v in sol.measure.masses.items()},
        "residuals": list(sol.residuals),
        "uniqueness": sol.uniqueness,
    }
    _emit(report, args.format)
    return EXIT_OK


def cmd_cocycle_check(args) -> int:
    system = system_from_json(_load(args.input))
    ok = check_cocycle_condition(system)
    wit = commutation_witness(system, args.depth)
    report = {
        "command": "cocycle-check",
        "cocycle_condition": ok,
        "operators_commute": wit is None,
        "witness": None if wit is None else {"i": wit[0], "j": wit[1], "word": format_word(system.space, wit[2])},
    }
    _emit(report, args.format)
    return EXIT_OK if ok and wit is None else EXIT_FAIL


def cmd_beta_search(args) -> int:
    doc = _load(args.input)
    interval = (args.beta_min, args.beta_max)
    if _doc_type(doc) == "kgraph":
        graph = graph_from_json(doc)
        res = kg.kgraph_beta_search(graph, theta=_theta(args, doc), beta_interval=interval, tol=args.tol, jobs=args.jobs)
    else:
        system = system_from_json(doc)
        res = beta_search(system, interval, tol=args.tol, depth=args.depth, jobs=args.jobs)
    _emit({"command": "beta-search", "betas": res.betas, "coordinate_roots": res.coordinate_roots}, args.format)
    return EXIT_OK


def cmd_kms_eval(args) -> int:
    doc = _load(args.input)
    system = system_from_json(doc)
    terms = elements_from_json(system.space, doc.get("elements", []))
    if "measure" in doc:
        mu = measure_from_json(system.space, doc["measure"])
    else:
        depth = max([args.depth] + [max(word_lengths(g.u) + word_lengths(g.v)) for _, g in terms])
        mu = joint_rpf_solve(system, depth, tol=args.tol, max_iter=args.max_iter).measure
    value = kms_functional(mu, terms)
    _emit({"command": "kms-eval", "value": float(value), "n_terms": len(terms), "measure_depth": mu.depth}, args.format)
    return EXIT_OK


def _kgraph_validate(args, doc: dict) -> int:
    graph = graph_from_json(doc)
    rep = kg.validate(graph)
    _emit({"command": "kgraph validate", **rep.to_dict()}, args.format)
    if not rep.valid:
        for v in rep.violations:
            print(f"violation: {json.dumps(v, sort_keys=True)}", file=sys.stderr)
    return EXIT_OK if rep.valid else EXIT_FAIL


def cmd_kgraph(args) -> int:
    doc = _load(args.input)
    if args.action == "validate":
        return _kgraph_validate(args, doc)
    graph = graph_from_json(doc)
    theta = _theta(args, doc)
    measure = kg.kgraph_rpf_solve(graph, theta=theta, tol=args.tol)
    if args.action == "rpf":
        report = {"command": "kgraph rpf", **kgraph_measure_to_json(measure)}
        report.pop("format")
        _emit(report, args.format)
        return EXIT_OK
    # kms
    if args.dynamics == "normalized":
        beta = 1.0 if args.beta is None else args.beta
        dyn = kg.normalized_dynamics(measure, beta)
    else:
        if args.beta is None:
            raise SchemaError("--beta is required with unnormalized dynamics")
        beta = args.beta
        dyn = kg.unnormalized_dynamics(measure)
    bound = _degree_bound(args.degree_bound, graph.rank)
    kms_tol = 1e-9 if args.kms_tol is None else args.kms_tol
    rep = kg.kms_check(graph, measure, beta, dyn, bound, kms_tol)
    _emit({"command": "kgraph kms", "dynamics": args.dynamics, **rep.to_dict()}, args.format)
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- parser -----------------------------------------------------------------


def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _depth(x: str) -> int:
    v = int(x)
    if v < 1:
        raise argparse.ArgumentTypeError("depth must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--tol", type=_positive, default=1e-10)
    common.add_argument("--max-iter", type=int, default=100_000)
    common.add_argument("--depth", type=_depth, default=6)
    common.add_argument("--jobs", type=int, default=1)

    p = argparse.ArgumentParser(prog="ruelle-kit", description="Ruelle operators, RPF data and KMS checks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="validate a system or graph file")
    s.add_argument("input")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("rpf", parents=[common], help="RPF data of one coordinate operator")
    s.add_argument("input")
    s.add_argument("--coordinate", type=int, default=0)
    s.set_defaults(func=cmd_rpf)

    s = sub.add_parser("joint-rpf", parents=[common], help="joint eigenvalues and eigenmeasure")
    s.add_argument("input")
    s.set_defaults(func=cmd_joint_rpf)

    s = sub.add_parser("cocycle-check", parents=[common], help="cocycle condition and operator commutation")
    s.add_argument("input")
    s.set_defaults(func=cmd_cocycle_check)
    s.set_defaults(depth=None)

    s = sub.add_parser("beta-search", parents=[common], help="inverse temperatures with all eigenvalues 1")
    s.add_argument("input")
    s.add_argument("--beta-min", type=float, default=-50.0)
    s.add_argument("--beta-max", type=float, default=50.0)
    s.add_argument("--theta", type=float, default=None)
    s.set_defaults(func=cmd_beta_search, depth=None)

    s = sub.add_parser("kms-eval", parents=[common], help="evaluate the KMS functional on groupoid elements")
    s.add_argument("input")
    s.set_defaults(func=cmd_kms_eval, depth=1)

    s = sub.add_parser("kgraph", parents=[common], help="higher-rank graph tools")
    s.add_argument("action", choices=("validate", "rpf", "kms"))
    s.add_argument("input")
    s.add_argument("--theta", type=float, default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--degree-bound", default=None, help="comma-separated bound, e.g. 2,2")
    s.add_argument("--dynamics", choices=("unnormalized", "normalized"), default="unnormalized")
    s.add_argument("--kms-tol", type=_positive, default=None)
    s.set_defaults(func=cmd_kgraph, tol=1e-12)
    return p


def _setup_logging() -> None:
    level = os.environ.get("RUELLE_KIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "beta-search" and not args.beta_min < args.beta_max:
        parser.error("--beta-min must be below --beta-max")
    try:
        return args.func(args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NotPrimitiveError, ConvergenceError, VerificationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CertificateError, BracketError, DegenerateSpaceError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except RuelleKitError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
