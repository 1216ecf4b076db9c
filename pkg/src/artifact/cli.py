"""Command line entry point: classpoly, nsystem, verify, eval, selftest."""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys

import jsonschema
import mpmath
from mpmath import mp

from .classpoly import (ClassPolyError, JobConfig, compare, expected_polynomial, prepare, resolve_path, run)
from .mpnum import InconclusiveError
from .nsystem import NSystem, NSystemError, verify_nsystem
from .polforms import TripleError
from .siegel import PoleError, invariant_eval, period_matrix

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3

_TRIPLE_LIST = {"type": "array", "items": {"type": "string"}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["field", "invariant"],
    "properties": {
        "name": {"type": "string"},
        "field": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "cm_type": {"anyOf": [{"enum": ["auto"]},
                              {"type": "string", "pattern": r"^\s*[+-]\s*,?\s*[+-]\s*$"},
                              {"type": "array", "items": {"enum": [1, -1]}, "minItems": 2, "maxItems": 2}]},
        "level": {"type": "integer", "minimum": 1},
        "invariant": {"type": "string"},
        "orbit_generators": {"type": "array", "items": _TRIPLE_LIST},
        "precision": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "start": {"type": "integer", "minimum": 64},
                "max": {"type": "integer", "minimum": 64},
                "growth": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "signs": {"type": "array", "items": {"enum": ["+", "-"]}},
        "system": {"anyOf": [{"type": "string"}, _TRIPLE_LIST]},
        "jobs": {"type": "integer", "minimum": 1},
        "expected": {
            "type": "object",
            "additionalProperties": False,
            "required": ["ring", "coefficients"],
            "properties": {
                "ring": {"enum": ["Kr", "Kr0"]},
                "coefficients": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "pairing": {"type": "object"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "stem": {"type": "string"}},
        },
    },
}


class ConfigError(ValueError):
    pass


def load_config(path, overrides=None):
    try:
        path = resolve_path(path)
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("config file not found: %s" % path) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config is not valid JSON: %s" % exc) from exc
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError("config key %s: %s" % (where, exc.message)) from exc
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return JobConfig.from_dict(data, os.path.dirname(os.path.abspath(path)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(obj, fmt, text):
    if fmt == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def _error(fmt, code, kind, message):
    if fmt == "json":
        print(json.dumps({"error": kind, "message": message, "exit_code": code}))
    else:
        print("error (%s): %s" % (kind, message), file=sys.stderr)
    return code


def _precision_overrides(args):
    if args.prec is None:
        return {}
    return {"precision": {"start": args.prec, "max": max(args.prec, 8000), "growth": 2}}


def cmd_classpoly(args):
    job = load_config(args.config, _precision_overrides(args))
    logf = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    P, report = run(job, jobs=args.jobs, log_fn=logf)
    K = P.ring.K
    poly = P.to_json()
    status = EXIT_OK
    if job.expected:
        Q = expected_polynomial(K, P.ring.cmtype, job.expected)
        same, literal = compare(P, Q)
        report["expected_match"] = same
        report["expected_literal_match"] = literal
        if not same:
            status = EXIT_FAIL
    if report.get("denominator_check") == "fail":
        status = EXIT_FAIL
    stem = job.output.get("stem") or job.name or "classpoly"
    out_dir = args.out or job.output.get("dir")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, stem + ".txt"), "w") as fh:
            fh.write(P.to_paper() + "\n")
        with open(os.path.join(out_dir, stem + ".json"), "w") as fh:
            json.dump(poly, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(out_dir, stem + ".report.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    text = [P.to_paper(), ""]
    text.append("pairing: %s" % report["pairing_mode"])
    if "real_entries" in report:
        text.append("real: %s  conjugate pairs: %s" % (report["real_entries"], report["conjugate_pairs"]))
    text.append("precision: %d bits, residual 2^%.1f, denominator check: %s"
                % (report["precision"], P.residual, report.get("denominator_check")))
    if "expected_match" in report:
        text.append("expected polynomial: %s (literal: %s)" % (
            "match" if report["expected_match"] else "MISMATCH",
            "yes" if report["expected_literal_match"] else "no"))
    _emit({"polynomial": poly, "report": report}, args.format, "\n".join(text))
    return status


def cmd_nsystem(args):
    job = load_config(args.config, _precision_overrides(args))
    K, S, mode, pairing, ring = prepare(job)
    rep = verify_nsystem(S, S.orbit_ideals())
    S.generators = S.generators or job.orbit_generators
    text = S.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    _emit({"system": [str(t) for t in S.triples], "labels": [list(c) for c in S.labels or []],
           "pairing_mode": mode, "verified": rep.ok}, args.format, text.rstrip())
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_verify(args):
    try:
        with open(resolve_path(args.path)) as fh:
            S = NSystem.from_text(fh.read())
    except FileNotFoundError as exc:
        raise ConfigError("system file not found: %s" % args.path) from exc
    except TripleError as exc:
        return _emit_report(args.format, [("triples well formed", False, str(exc))])
    except NSystemError as exc:
        raise ConfigError("cannot read system: %s" % exc) from exc
    return _emit_report(args.format, verify_nsystem(S).checks)


def _emit_report(fmt, checks):
    ok = all(c[1] for c in checks)
    first = next((c[0] for c in checks if not c[1]), None)
    _emit({"ok": ok, "checks": [{"name": n, "ok": o, "detail": d} for n, o, d in checks], "first_failure": first},
          fmt, "\n".join("%s  %s%s" % ("PASS" if o else "FAIL", n, "  (" + d + ")" if d else "") for n, o, d in checks))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_eval(args):
    job = load_config(args.config)
    K, S, mode, pairing, ring = prepare(job)
    i = args.index - 1
    if not 0 <= i < len(S):
        raise ConfigError("index must lie between 1 and %d" % len(S))
    prec = args.prec or 256
    tau = period_matrix(S.triples[i], prec + 32)
    val = invariant_eval(job.invariant, tau, prec + 32, index=i)
    digits = int(prec * 0.30103) - 2
    with mp.workprec(prec):
        s = mpmath.nstr(val, digits)
    _emit({"index": args.index, "triple": str(S.triples[i]), "value": s, "precision": prec}, args.format,
          "f(tau_%d) = %s" % (args.index, s))
    return EXIT_OK


def cmd_selftest(args):
    from . import selftest
    rng = random.Random(args.seed)
    results = selftest.run_all(rng, quick=not args.full)
    ok = all(r[1] for r in results)
    _emit({"seed": args.seed, "results": [{"name": n, "ok": o, "detail": d} for n, o, d in results]},
          args.format, "\n".join("%s  %s  %s" % ("PASS" if o else "FAIL", n, d) for n, o, d in results))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, help="working precision in bits")
    common.add_argument("--jobs", type=int, default=None, help="worker processes for evaluations")
    common.add_argument("--seed", type=int, default=20100, help="seed for randomized checks")
    common.add_argument("--verbose", "-v", action="store_true")
    common.add_argument("--format", choices=("paper", "json"), default="paper")

    p = argparse.ArgumentParser(prog="artifact", description="Genus 2 class invariants and class polynomials.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("classpoly", parents=[common], help="compute a class polynomial")
    c.add_argument("--config", required=True)
    c.add_argument("--out", help="directory for polynomial and report files")
    c.set_defaults(func=cmd_classpoly)
    c = sub.add_parser("nsystem", parents=[common], help="build an N-system")
    c.add_argument("--config", required=True)
    c.add_argument("--out", help="file for the system table")
    c.set_defaults(func=cmd_nsystem)
    c = sub.add_parser("verify", parents=[common], help="check a serialized N-system")
    c.add_argument("path")
    c.set_defaults(func=cmd_verify)
    c = sub.add_parser("eval", parents=[common], help="evaluate the invariant at one period matrix")
    c.add_argument("--config", required=True)
    c.add_argument("--index", type=int, default=1, help="1-based position in the N-system")
    c.set_defaults(func=cmd_eval)
    c = sub.add_parser("selftest", parents=[common], help="seeded numerical sanity checks")
    c.add_argument("--full", action="store_true", help="run the larger sample sizes")
    c.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    fmt = args.format
    try:
        return args.func(args)
    except ConfigError as exc:
        return _error(fmt, EXIT_CONFIG, "config", str(exc))
    except InconclusiveError as exc:
        return _error(fmt, EXIT_INCONCLUSIVE, "inconclusive", str(exc))
    except ClassPolyError as exc:
        code = EXIT_INCONCLUSIVE if type(exc).__name__ == "ReconstructionFailed" else EXIT_FAIL
        return _error(fmt, code, type(exc).__name__, str(exc))
    except PoleError as exc:
        return _error(fmt, EXIT_FAIL, "pole", str(exc))
    except (TripleError, NSystemError, ValueError) as exc:
        return _error(fmt, EXIT_FAIL, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
