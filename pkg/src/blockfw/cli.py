"""Command-line front end.

    blockfw solve --gen pencil:n=10,seed=42 --mode both --partition uniform:2 --max-iter 11
    blockfw sweep --gen er:n=30,p=0.2,seed=7 --mode outer --partition sdd --partition uniform:5

Exit codes: 0 success, 2 usage or input error, 3 first iteration infeasible,
4 solver failure.
"""

import argparse
import csv
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import benchmarks as bm
from .cone import membership_fw, region_boundary, write_region_csv
from .errors import (BlockFWError, FirstIterationInfeasible, InvalidPartition, NotFactorizable,
                     ParseError, SolverFailure)
from .ipm import IpmSettings, solve_sdp
from .iterative import RunConfig, run_inner, run_outer
from .model import Status, read_sdpa
from .partition import parse_partition

log = logging.getLogger("blockfw")

MODES = ("inner", "outer", "both", "exact", "membership", "region")
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- output formatting ----------------------------------------------------------


def _num(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return "%.17g" % x


def dumps(obj, indent=0):
    """JSON with floats written as %.17g and keys in insertion order."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if all(isinstance(v, (int, float, np.number)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- problem sources ----------------------------------------------------------


def _parse_kv(text):
    out = {}
    for tok in filter(None, text.split(",")):
        if "=" not in tok:
            raise UsageError(f"expected key=value in generator spec, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _graph(kv, seed):
    kind = kv.get("graph", "er")
    n = int(kv.get("n", 30))
    if kind == "er":
        return bm.gen_erdos_renyi(n, float(kv.get("p", 0.2)), seed)
    if kind == "complete":
        return bm.Graph.complete(n)
    if kind == "cycle":
        return bm.Graph.cycle(n)
    if kind == "empty":
        return bm.Graph.empty(n)
    raise UsageError(f"unknown graph kind {kind!r}")


def generate(spec, seed=None):
    """Problem from ``pencil:n=..,seed=..``, ``theta:graph=cycle,n=5``,
    ``er:n=..,p=..,seed=..`` or ``bqo:n=..,seed=..``."""
    name, _, rest = spec.partition(":")
    try:
        kv = _parse_kv(rest)
        s = int(kv.get("seed", seed if seed is not None else 0))
        if name == "pencil":
            return bm.gen_pencil_sdp(int(kv.get("n", 10)), s)
        if name == "theta":
            return bm.lovasz_theta_sdp(_graph(kv, s))
        if name == "er":
            kv["graph"] = "er"
            return bm.lovasz_theta_sdp(_graph(kv, s))
        if name == "bqo":
            return bm.bqo_relax_sdp(bm.gen_bqo(int(kv.get("n", 20)), s))
    except ValueError as exc:
        raise UsageError(f"bad generator spec {spec!r}: {exc}") from None
    raise UsageError(f"unknown generator {name!r} (expected pencil, theta, er or bqo)")


def load_problem(args):
    if bool(args.input) == bool(args.gen):
        raise UsageError("give exactly one of --input and --gen")
    if args.input:
        try:
            return read_sdpa(args.input)
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    return generate(args.gen, args.seed)


def _partitions(args, n):
    specs = args.partition or []
    parts, seen = [], set()
    for spec in specs:
        part = parse_partition(spec, n)
        if part in seen:
            log.warning("duplicate partition %s ignored", spec)
            continue
        seen.add(part)
        parts.append(part)
    return parts


def _config(args, part):
    settings = IpmSettings(gap_tol=args.tol, feas_tol=args.tol)
    return RunConfig(part, max_iter=args.max_iter, settings=settings)


# -- solve --------------------------------------------------------------------


def _trace_dict(trace, timings):
    return {
        "bounds": [float(b) for b in trace.bounds],
        "status": [r.status.value for r in trace],
        "basis_shift": [float(r.basis_shift) for r in trace],
        "wall_ms": [float(r.wall_ms) if timings else 0.0 for r in trace],
        "exact": trace.exact,
    }


def _write_trace(path, trace, timings):
    if not timings:
        for r in trace:
            r.wall_ms = 0.0
    with open(path, "w", newline="") as fh:
        trace.to_csv(fh)


def _trace_paths(path, mode):
    if mode != "both":
        return {mode: path}
    root, ext = os.path.splitext(path)
    return {"inner": f"{root}_inner{ext or '.csv'}", "outer": f"{root}_outer{ext or '.csv'}"}


def cmd_solve(args):
    prob = load_problem(args)
    summary = {"mode": args.mode, "n": prob.n, "m": prob.m}
    if "objective_flipped" in prob.meta or "sense_flipped" in prob.meta:
        summary["sense_flipped"] = True
    timings = {}

    if args.mode == "exact" or args.reference:
        tic = time.perf_counter()
        rep = solve_sdp(prob, IpmSettings(gap_tol=args.tol, feas_tol=args.tol))
        timings["exact_ms"] = (time.perf_counter() - tic) * 1e3
        if rep.status != Status.OPTIMAL:
            raise SolverFailure(f"full-cone solve ended with status {rep.status.value}", status=rep.status)
        summary["p_star"] = rep.primal_value
        summary["d_star"] = rep.dual_value
        if args.mode == "exact":
            print("p_star %.17g" % rep.primal_value)

    if args.mode == "region":
        parts = _partitions(args, prob.n)
        if prob.m != 2 or not np.array_equal(prob.C, np.eye(prob.n)):
            raise UsageError("region mode needs a pencil problem (C = I, two constraints)")
        rows = region_boundary(-prob.A[0], -prob.A[1], parts, n_angles=args.angles)
        if args.trace:
            write_region_csv(args.trace, rows, parts)
        else:
            write_region_csv(sys.stdout, rows, parts)
        summary["partition"] = [p.label() for p in parts]

    elif args.mode == "membership":
        parts = _partitions(args, prob.n)
        if len(parts) != 1:
            raise UsageError("membership mode needs exactly one --partition")
        # the matrix as written in the file (matrix 0 of an SDPA file)
        M = -prob.C if prob.meta.get("objective_flipped") else prob.C
        res = membership_fw(M, parts[0])
        print(res.verdict)
        summary.update(partition=parts[0].label(), verdict=res.verdict, margin=res.margin)

    elif args.mode in ("inner", "outer", "both"):
        parts = _partitions(args, prob.n)
        if len(parts) != 1:
            raise UsageError(f"{args.mode} mode needs exactly one --partition (use sweep for several)")
        part = parts[0]
        cfg = _config(args, part)
        summary["partition"] = part.label()
        paths = _trace_paths(args.trace, args.mode) if args.trace else {}
        runs = {"inner": run_inner, "outer": run_outer}
        kinds = ("inner", "outer") if args.mode == "both" else (args.mode,)
        for kind in kinds:
            tic = time.perf_counter()
            try:
                trace = runs[kind](prob, cfg).trace
            except (SolverFailure, FirstIterationInfeasible) as exc:
                if exc.trace is not None and kind in paths:
                    _write_trace(paths[kind], exc.trace, not args.no_timings)
                raise
            timings[f"{kind}_ms"] = (time.perf_counter() - tic) * 1e3
            key = "upper_trace" if kind == "inner" else "lower_trace"
            summary[key] = _trace_dict(trace, not args.no_timings)
            if kind in paths:
                _write_trace(paths[kind], trace, not args.no_timings)
            print(f"{kind} bound %.17g after {len(trace)} iteration(s)" % trace.bounds[-1])
        if args.mode == "both":
            gap = min(summary["upper_trace"]["bounds"]) - max(summary["lower_trace"]["bounds"])
            summary["final_gap"] = gap
            print("final gap %.17g" % gap)
        else:
            summary["final_gap"] = None

    if args.no_timings:
        timings = {k: 0.0 for k in timings}
    summary["timings"] = timings
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(dumps(summary) + "\n")
    return EXIT_OK


# -- sweep --------------------------------------------------------------------


def sweep(prob, parts, modes, args):
    """One row per (partition, mode); failures are recorded, not raised."""
    jobs = [(part, kind) for part in parts for kind in modes]

    def run(job):
        part, kind = job
        fn = run_inner if kind == "inner" else run_outer
        try:
            trace = fn(prob, _config(args, part)).trace
            return {"partition": part.label(), "mode": kind, "status": "ok", "trace": trace}
        except BlockFWError as exc:
            log.warning("sweep row %s/%s failed: %s", part.label(), kind, exc)
            trace = getattr(exc, "trace", None)
            status = "infeasible" if isinstance(exc, FirstIterationInfeasible) else "failed"
            return {"partition": part.label(), "mode": kind, "status": status, "trace": trace}

    workers = max(1, args.jobs)
    if workers == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def write_sweep_csv(fh, rows, t_max):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["partition", "mode", "status", "iterations"] + [f"t{t}" for t in range(1, t_max + 1)])
    for row in rows:
        trace = row["trace"]
        k = len(trace) if trace is not None else 0
        # iterations after an early stop repeat the last bound
        vals = [_num(trace.bound_at(t)) if k else "" for t in range(1, t_max + 1)]
        w.writerow([row["partition"], row["mode"], row["status"], k] + vals)


def cmd_sweep(args):
    prob = load_problem(args)
    if not args.partition:
        raise UsageError("sweep needs at least one --partition")
    if args.mode not in ("inner", "outer", "both"):
        raise UsageError("sweep supports modes inner, outer and both")
    parts = _partitions(args, prob.n)
    modes = ("inner", "outer") if args.mode == "both" else (args.mode,)
    rows = sweep(prob, parts, modes, args)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            write_sweep_csv(fh, rows, args.max_iter)
    else:
        write_sweep_csv(sys.stdout, rows, args.max_iter)
    if args.summary:
        summary = {
            "mode": args.mode,
            "rows": [
                {"partition": r["partition"], "mode": r["mode"], "status": r["status"],
                 "bounds": [] if r["trace"] is None else [float(b) for b in r["trace"].bounds]}
                for r in rows
            ],
        }
        with open(args.summary, "w") as fh:
            fh.write(dumps(summary) + "\n")
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="blockfw", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep"):
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--input", metavar="FILE", help="SDPA sparse file")
        src.add_argument("--gen", metavar="SPEC", help="pencil:n=10,seed=42 | theta:graph=cycle,n=5 | er:n=30,p=0.2 | bqo:n=40")
        p.add_argument("--mode", choices=MODES, default="both" if name == "solve" else "outer")
        p.add_argument("--partition", action="append", metavar="SPEC",
                       help="uniform:K, sdd, or explicit sizes like 2,2,2 (repeatable)")
        p.add_argument("--max-iter", type=int, default=10)
        p.add_argument("--tol", type=float, default=1e-8, help="interior-point tolerance")
        p.add_argument("--trace", metavar="FILE.csv")
        p.add_argument("--summary", metavar="FILE.json")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--reference", action="store_true", help="also solve the full SDP for p_star")
        p.add_argument("--angles", type=int, default=72, help="rays in region mode")
        p.add_argument("--no-timings", action="store_true", help="write zero timings (byte-stable output)")
    return parser


def _setup_logging():
    level = os.environ.get("BLOCKFW_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.max_iter < 1 or args.tol <= 0 or args.jobs < 1:
        print("error: --max-iter and --jobs must be >= 1 and --tol > 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        return cmd_solve(args) if args.command == "solve" else cmd_sweep(args)
    except (UsageError, InvalidPartition, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FirstIterationInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverFailure, NotFactorizable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
