"""Command line front end.

Four subcommands: ``analyze`` runs chosen criteria on a state file,
``scan`` locates a detection threshold along a parametric family,
``batch`` collects detection statistics over a sampled family, and
``fnf`` reports the filter normal form of a state file.

State file format (JSON, canonical writer below): keys dimA, dimB and
matrix, where matrix is the flat row-major list of the (dA*dB)^2 complex
entries, each as an [re, im] pair, in the composite index i*dB + j.

Reports serialize deterministically (sorted keys); all wall-clock data
lives under the single top-level key "timing" so byte comparisons of
reports from identical seeds/flags just drop that key.  Exit codes:
0 success, 1 invalid input or usage, 2 numerical failure (a partial
report is still emitted).
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import (
    AmbiguousThresholdError,
    NoConvergenceError,
    NoThresholdError,
    SingularReducedStateError,
    ValidationError,
)
from .states import DensityMatrix, mix_with_white_noise
from .normal_form import to_fnf
from .zoo import CRITERIA, evaluate_criteria, get_family, threshold_scan

SCHEMA_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the documented contract
    # is exit 1 for invalid input, so route errors through _UsageError.
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def read_state_file(path):
    """Parse and validate a state file; error messages name the violated
    invariant and the offending entry."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read state file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"state file {path} is not valid JSON: {exc}") from exc
    for key in ("dimA", "dimB", "matrix"):
        if key not in data:
            raise ValidationError(f"state file is missing the {key!r} field")
    dim_a, dim_b = data["dimA"], data["dimB"]
    if not (isinstance(dim_a, int) and isinstance(dim_b, int)):
        raise ValidationError("dimA and dimB must be integers")
    n = dim_a * dim_b
    entries = data["matrix"]
    if len(entries) != n * n:
        raise ValidationError(
            f"matrix has {len(entries)} entries, expected (dimA*dimB)^2 = {n * n}"
        )
    flat = np.empty(n * n, dtype=complex)
    for idx, pair in enumerate(entries):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise ValidationError(
                f"matrix entry {idx} must be an [re, im] pair, got {pair!r}"
            )
        flat[idx] = complex(pair[0], pair[1])
    try:
        return DensityMatrix(dim_a, dim_b, flat.reshape(n, n))
    except ValidationError as exc:
        raise ValidationError(f"state file {path}: {exc}") from exc


def state_file_text(rho):
    """Canonical state file serialization (bit-stable round trips)."""
    flat = rho.matrix.reshape(-1)
    matrix = [[float(z.real), float(z.imag)] for z in flat]
    return json.dumps(
        {"dimA": rho.dim_a, "dimB": rho.dim_b, "matrix": matrix},
        sort_keys=True,
        separators=(",", ":"),
    )


def write_state_file(rho, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_file_text(rho))


def render_report(report, as_json):
    if as_json:
        return json.dumps(report, sort_keys=True, indent=2, default=float)
    lines = []

    def emit(prefix, value):
        if isinstance(value, dict):
            for k in sorted(value):
                emit(f"{prefix}.{k}" if prefix else str(k), value[k])
        elif isinstance(value, (list, tuple)):
            lines.append(f"{prefix} = {json.dumps(value, default=float)}")
        else:
            lines.append(f"{prefix} = {value}")

    emit("", report)
    return "\n".join(lines)


def _emit(report, args):
    text = render_report(report, args.json)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _base_report(command, args):
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "seed": getattr(args, "seed", None),
    }


def _parse_criteria(spec):
    names = [c.strip() for c in spec.split(",") if c.strip()]
    if not names:
        raise ValidationError("empty criteria list")
    for name in names:
        if name not in CRITERIA:
            raise ValidationError(
                f"unknown criterion {name!r}; available: {', '.join(CRITERIA)}"
            )
    return names


def _check_applicable(criteria, rho):
    dims = (rho.dim_a, rho.dim_b)
    for name in criteria:
        if name in ("cmc-sdp", "lur-extract") and dims != (2, 2):
            raise ValidationError(f"{name} requires a 2x2 system, state is {dims[0]}x{dims[1]}")
        if name in ("prop3", "prop6") and rho.dim_a != rho.dim_b:
            raise ValidationError(
                f"{name} requires equal local dimensions, state is {dims[0]}x{dims[1]}"
            )


def cmd_analyze(args):
    rho = read_state_file(args.state)
    criteria = _parse_criteria(args.criteria)
    _check_applicable(criteria, rho)
    report = _base_report("analyze", args)
    report["input"] = {"path": args.state, "dimA": rho.dim_a, "dimB": rho.dim_b}
    verdicts = []
    failures = 0
    t0 = time.perf_counter()
    for name in criteria:
        try:
            verdict = evaluate_criteria(rho, [name], tol=args.tol)[name]
            verdicts.append(verdict.to_dict())
        except (SingularReducedStateError, NoConvergenceError, ValidationError) as exc:
            failures += 1
            verdicts.append({
                "criterion": name,
                "error": {"type": type(exc).__name__, "message": str(exc)},
            })
    report["criteria"] = verdicts
    report["timing"] = {"seconds": time.perf_counter() - t0}
    _emit(report, args)
    return 2 if failures else 0


def cmd_scan(args):
    family = get_family(args.family)
    if args.criterion not in CRITERIA:
        raise ValidationError(
            f"unknown criterion {args.criterion!r}; available: {', '.join(CRITERIA)}"
        )
    report = _base_report("scan", args)
    report["input"] = {
        "family": args.family,
        "criterion": args.criterion,
        "p_min": args.p_min,
        "p_max": args.p_max,
        "bisect_tol": args.tol,
    }
    t0 = time.perf_counter()
    status = "ok"
    try:
        result = threshold_scan(
            family, args.criterion,
            p_min=args.p_min, p_max=args.p_max, bisect_tol=args.tol,
        )
        report["threshold"] = {
            "value": result.threshold,
            "bracket": [result.lower, result.upper],
            "evaluations": result.evaluations,
            "detected_above": result.detected_above,
        }
    except NoThresholdError as exc:
        status = "no_threshold"
        report["threshold"] = None
        report["message"] = str(exc)
    except AmbiguousThresholdError as exc:
        status = "ambiguous"
        report["threshold"] = None
        report["message"] = str(exc)
    except (NoConvergenceError, SingularReducedStateError) as exc:
        status = "numerical_failure"
        report["threshold"] = None
        report["message"] = str(exc)
    report["status"] = status
    report["timing"] = {"seconds": time.perf_counter() - t0}
    _emit(report, args)
    return 0 if status in ("ok", "no_threshold") else 2


def _batch_job(payload):
    family_name, entropy, criteria, tol = payload
    family = get_family(family_name)
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    results = {}
    try:
        rho = family.make(rng)
    except ValidationError as exc:
        return {name: {"error": type(exc).__name__} for name in criteria}
    for name in criteria:
        try:
            verdict = evaluate_criteria(rho, [name], tol=tol)[name]
            results[name] = {"detected": verdict.detected, "margin": verdict.margin}
        except (SingularReducedStateError, NoConvergenceError, ValidationError) as exc:
            results[name] = {"error": type(exc).__name__}
    return results


def _wilson(count, n, z=1.959963984540054):
    if n == 0:
        return [0.0, 1.0]
    phat = count / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return [max(0.0, center - half), min(1.0, center + half)]


def cmd_batch(args):
    family = get_family(args.family)
    if family.parametric:
        raise ValidationError(
            f"family {args.family!r} is parametric; batch needs a sampled "
            "family (chessboard, random-AxB)"
        )
    if args.n < 1:
        raise ValidationError("--n must be at least 1")
    criteria = _parse_criteria(args.criteria)
    probe = family.make(np.random.default_rng(0))
    _check_applicable(criteria, probe)
    seeds = [int(s.generate_state(1)[0]) for s in
             np.random.SeedSequence(args.seed).spawn(args.n)]
    jobs = [(args.family, s, criteria, args.tol) for s in seeds]
    t0 = time.perf_counter()
    workers = args.workers or os.cpu_count() or 1
    if workers > 1 and args.n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_batch_job, jobs,
                                 chunksize=max(1, args.n // (workers * 8))))
    else:
        rows = [_batch_job(job) for job in jobs]
    report = _base_report("batch", args)
    # worker count is environmental and must not affect results, so it is
    # deliberately not part of the report
    report["input"] = {"family": args.family, "n": args.n, "criteria": criteria}
    stats = {}
    for name in criteria:
        detected = [r[name].get("detected") for r in rows if "error" not in r[name]]
        margins = [r[name].get("margin") for r in rows if "error" not in r[name]]
        failures = sum("error" in r[name] for r in rows)
        n_ok = len(detected)
        count = sum(detected)
        stats[name] = {
            "evaluated": n_ok,
            "failures": failures,
            "detected": count,
            "rate": count / n_ok if n_ok else None,
            "wilson95": _wilson(count, n_ok),
            "margins": margins if args.per_state else None,
            "per_state_detected": detected if args.per_state else None,
        }
    report["rates"] = stats
    report["timing"] = {"seconds": time.perf_counter() - t0}
    _emit(report, args)
    return 0


def cmd_fnf(args):
    rho = read_state_file(args.state)
    if args.regularize:
        if not 0 < args.regularize < 1:
            raise ValidationError("--regularize must be in (0, 1)")
        rho = mix_with_white_noise(rho, 1.0 - args.regularize)
    report = _base_report("fnf", args)
    report["input"] = {"path": args.state, "dimA": rho.dim_a, "dimB": rho.dim_b,
                       "regularize": args.regularize}
    t0 = time.perf_counter()
    code = 0
    try:
        fnf = to_fnf(rho, tol=args.tol, max_iter=args.max_iter)
        report["fnf"] = {
            "xi": [float(x) for x in fnf.xi],
            "iterations": fnf.iterations,
            "residual": fnf.residual,
            "filterA": [[float(z.real), float(z.imag)] for z in fnf.filter_a.reshape(-1)],
            "filterB": [[float(z.real), float(z.imag)] for z in fnf.filter_b.reshape(-1)],
        }
    except (SingularReducedStateError, NoConvergenceError) as exc:
        report["fnf"] = None
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = 2
    report["timing"] = {"seconds": time.perf_counter() - t0}
    _emit(report, args)
    return code


def build_parser():
    parser = _Parser(
        prog="covsep",
        description="Covariance-matrix separability tests for bipartite states",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="run criteria on a state file")
    p.add_argument("--state", required=True, help="path to a JSON state file")
    p.add_argument("--criteria", default=",".join(CRITERIA),
                   help=f"comma list from: {', '.join(CRITERIA)}")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None, help="write the report to a file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scan", help="bisect a detection threshold")
    p.add_argument("--family", required=True)
    p.add_argument("--criterion", required=True)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-4,
                   help="bisection tolerance on the parameter")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("batch", help="detection rates over a sampled family")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--criteria", default="ccnr,prop4,prop6")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: available parallelism)")
    p.add_argument("--per-state", action="store_true",
                   help="include per-state margins in the report")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("fnf", help="filter normal form of a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--regularize", type=float, default=None,
                   help="mix this much white noise in first (rank-deficient inputs)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fnf)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NoConvergenceError, SingularReducedStateError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def script_main():
    sys.exit(main())


if __name__ == "__main__":
    script_main()
