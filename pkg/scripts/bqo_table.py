"""Inner bounds on the binary quadratic relaxation min <Q, X> s.t. X_ii = 1.

Reports the relative gap to the full-cone optimum after each iteration for
SDD and uniform block partitions.  The default is n = 40; ``--full`` runs
n = 100 with blocks of 10 and 20.

    python scripts/bqo_table.py [--full] [--n 40] [--max-iter 10]
"""

import argparse
import os
from dataclasses import dataclass, replace

from _common import RESULTS, Timer, add_config_args, config_from_args, write_rows

from blockfw.benchmarks import bqo_relax_sdp, gen_bqo
from blockfw.ipm import solve_sdp
from blockfw.iterative import RunConfig, run_inner
from blockfw.partition import parse_partition


@dataclass(frozen=True)
class BqoConfig:
    n: int = 40
    seed: int = 2024
    partitions: tuple = ("sdd", "uniform:10")
    max_iter: int = 10
    out: str = os.path.join(RESULTS, "bqo_gaps.csv")


FULL = dict(n=100, partitions=("sdd", "uniform:10", "uniform:20"))


def run(cfg):
    prob = bqo_relax_sdp(gen_bqo(cfg.n, cfg.seed))
    with Timer() as tm:
        pstar = solve_sdp(prob).primal_value
    print(f"BQO n={cfg.n} seed={cfg.seed}: p* = {pstar:.6f} (full solve {tm.seconds:.1f}s)")
    rows = []
    for label in cfg.partitions:
        rc = RunConfig(parse_partition(label, cfg.n), max_iter=cfg.max_iter, stop_tol=0.0)
        with Timer() as tm:
            tr = run_inner(prob, rc).trace
        gaps = [abs(tr.bound_at(t) - pstar) / abs(pstar) for t in range(1, cfg.max_iter + 1)]
        print(f"{label:>12}: " + " ".join(f"{g:.2%}" for g in gaps) + f"  ({tm.seconds:.1f}s)")
        rows += [[label, t, "%.12g" % tr.bound_at(t), "%.6g" % g] for t, g in enumerate(gaps, start=1)]
    write_rows(cfg.out, ["partition", "t", "upper", "rel_gap"], rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    add_config_args(ap, BqoConfig)
    ap.add_argument("--full", action="store_true", help="n = 100 with blocks of 10 and 20")
    args = ap.parse_args(argv)
    base = replace(BqoConfig(), **FULL) if args.full else None
    run(config_from_args(BqoConfig, args, base))


if __name__ == "__main__":
    main()
