"""Command-line front end.

Exit codes: 0 success (or certified), 2 ran correctly but not certified,
1 usage or resource error.  Errors are printed to stderr as a JSON object with
a ``reason`` field and never leave a partial report behind.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .certifier import certify_spread
from .errors import DomainError, InvalidDimensionError, WellSpreadError
from .oracle import mc_trace_multi, net_distortion, shift_ablation, sweep_table
from .randmodels import load_instance, sample_gaussian, sample_planted_nbr, save_instance
from .recovery import AscentParams, evaluate_overlap, recover
from .report import Timer, atomic_write_text, build_report, write_report

OUTPUT_DIR_ENV = "WELLSPREAD_OUTPUT_DIR"
EXIT_OK, EXIT_ERROR, EXIT_NOT_CERTIFIED = 0, 1, 2


class UsageError(WellSpreadError):
    reason = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wellspread", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--out", type=Path, default=None, help="report path (JSON)")

    p = sub.add_parser("certify", help="certify spreadness of a Gaussian matrix")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--ell", type=int, default=4)
    p.add_argument("--input", type=Path, help="instance file; its matrix is certified")
    common(p)

    p = sub.add_parser("recover", help="recover a planted sparse vector")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--restarts", type=int, default=30)
    p.add_argument("--max-steps", type=int, default=200)
    p.add_argument("--input", type=Path, help="instance file, read blind")
    common(p)

    p = sub.add_parser("plant", help="write a planted instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--no-evaluation", action="store_true", help="omit the hidden vector")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("oracle-trace", help="Monte Carlo trace moments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--ensemble", choices=["gaussian", "rademacher", "bounded"], default="gaussian")
    p.add_argument("--table", type=Path, help="tab-delimited sweep row output")
    common(p)

    p = sub.add_parser("oracle-net", help="net estimate of the distortion (d <= 3)")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--resolution", type=float, default=1e-2)
    p.add_argument("--input", type=Path)
    common(p)

    p = sub.add_parser("oracle-ablation", help="spectral norm with and without Shift")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--replicates", type=int, default=10)
    common(p)
    return parser


# ------------------------------------------------------------- validation


def _validate(args):
    if args.command in ("certify", "recover", "oracle-net") and getattr(args, "input", None):
        return
    n, d = args.n, args.d
    if n is None or d is None:
        raise UsageError("--n and --d are required unless --input is given")
    if n < 1 or d < 1:
        raise InvalidDimensionError("n and d must be positive")
    if d > n:
        raise InvalidDimensionError(f"d = {d} exceeds n = {n}")
    t = getattr(args, "t", None)
    if t is not None and t < 1:
        raise DomainError("t must be at least 1")
    rho = getattr(args, "rho", None)
    if rho is not None and not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0, 1)")
    ell = getattr(args, "ell", None)
    if ell is not None and (ell < 2 or ell % 2):
        raise DomainError(f"ell must be an even integer >= 2, got {ell}")
    if getattr(args, "restarts", 1) < 1:
        raise DomainError("restarts must be at least 1")
    if getattr(args, "replicates", 1) < 1:
        raise DomainError("replicates must be at least 1")


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("out", "table"):
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _report_path(args) -> Path:
    if args.out is not None:
        return args.out
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    return base / f"{args.command}-seed{args.seed}.json"


# --------------------------------------------------------------- commands


def run_certify(args):
    timer = Timer()
    with timer.stage("sample"):
        if args.input:
            A = load_instance(args.input, blind=True).A_tilde
        else:
            A = sample_gaussian(args.n, args.d, 1.0, args.seed)
    n, d = A.shape
    if args.t > min(n, d):
        raise DomainError(f"t = {args.t} must not exceed min(n, d) = {min(n, d)}")
    with timer.stage("certify"):
        cert = certify_spread(A, args.t, args.ell)
    result = cert.to_dict()
    code = EXIT_OK if cert.certified else EXIT_NOT_CERTIFIED
    return result, timer.stages, code


def run_recover(args):
    timer = Timer()
    with timer.stage("sample"):
        if args.input:
            inst = load_instance(args.input, blind=True)
        else:
            inst = sample_planted_nbr(args.n, args.d, args.rho, args.sigma, args.seed)
    params = AscentParams(max_steps=args.max_steps, restarts=args.restarts, seed=args.seed)
    with timer.stage("recover"):
        res = recover(inst.blind().A_tilde, args.t, args.rho, params)
    result = res.to_dict()
    result["n"], result["d"] = inst.n, inst.d
    if inst.has_evaluation:
        result["overlap"] = evaluate_overlap(res.v_hat, inst.hidden_v)
    return result, timer.stages, EXIT_OK


def run_plant(args):
    inst = sample_planted_nbr(args.n, args.d, args.rho, args.sigma, args.seed)
    save_instance(args.out, inst, include_evaluation=not args.no_evaluation)
    return None, {}, EXIT_OK


def run_oracle_trace(args):
    timer = Timer()
    with timer.stage("trace"):
        stats = mc_trace_multi(args.n, args.d, args.t, [args.ell], args.replicates, args.ensemble, args.seed)
    st = stats[args.ell]
    table = sweep_table([st])
    if args.table:
        atomic_write_text(args.table, table)
    sys.stdout.write(table)
    result = st.to_dict()
    result["table"] = table
    return result, timer.stages, EXIT_OK


def run_oracle_net(args):
    timer = Timer()
    if args.input:
        A = load_instance(args.input, blind=True).A_tilde
    else:
        A = sample_gaussian(args.n, args.d, 1.0, args.seed)
    with timer.stage("net"):
        est = net_distortion(A, args.resolution)
    result = est.to_dict()
    result["sqrt_n"] = math.sqrt(A.shape[0])
    return result, timer.stages, EXIT_OK


def run_oracle_ablation(args):
    timer = Timer()
    with timer.stage("ablation"):
        stats = shift_ablation(args.n, args.d, args.t, args.replicates, args.seed)
    return stats.to_dict(), timer.stages, EXIT_OK


COMMANDS = {
    "certify": run_certify,
    "recover": run_recover,
    "plant": run_plant,
    "oracle-trace": run_oracle_trace,
    "oracle-net": run_oracle_net,
    "oracle-ablation": run_oracle_ablation,
}


def _fail(exc) -> int:
    reason = getattr(exc, "reason", "error")
    payload = {"error": str(exc), "reason": reason}
    if getattr(exc, "count", None) is not None:
        payload["count"], payload["limit"] = exc.count, exc.limit
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_ERROR


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        result, timings, code = COMMANDS[args.command](args)
        if result is not None:
            report = build_report(args.command, _config(args), result, timings)
            write_report(_report_path(args), report)
        return code
    except (WellSpreadError, ValueError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
