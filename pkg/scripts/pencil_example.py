"""Inner/outer traces on a fixed-seed pencil instance (the two-variable LMI example).

The instance is max x + y s.t. I + xA + yB psd, stored in minimize form with
optimum p* = max(x + y).  In that max form, restricting the dual slack to a
block factor-width-two cone shrinks the feasible (x, y) set and gives lower
bounds on x + y; relaxing the primal gives upper bounds.  Both columns are
printed together with their relative gaps.

    python scripts/pencil_example.py [--n 10] [--seed 42] [--max-iter 11]
"""

import argparse
import os
from dataclasses import dataclass

from _common import RESULTS, Timer, add_config_args, config_from_args, write_rows

from blockfw.benchmarks import gen_pencil_sdp
from blockfw.ipm import solve_sdp
from blockfw.iterative import RunConfig, run_inner, run_outer
from blockfw.partition import parse_partition


@dataclass(frozen=True)
class PencilConfig:
    n: int = 10
    seed: int = 42
    partitions: tuple = ("sdd", "uniform:2", "uniform:5")
    max_iter: int = 11
    out: str = os.path.join(RESULTS, "pencil_traces.csv")


def run(cfg):
    prob = gen_pencil_sdp(cfg.n, cfg.seed)
    pstar = solve_sdp(prob).primal_value
    print(f"pencil n={cfg.n} seed={cfg.seed}: max x + y = {pstar:.6f}")
    rows = []
    for label in cfg.partitions:
        part = parse_partition(label, cfg.n)
        rc = RunConfig(part, max_iter=cfg.max_iter, stop_tol=0.0)
        with Timer() as tm:
            lower = run_outer(prob, rc).trace  # feasible (x, y): lower bounds on x + y
            upper = run_inner(prob, rc).trace  # relaxed: upper bounds on x + y
        print(f"\n{label} ({part.label()}), {tm.seconds:.1f}s")
        print(f"{'t':>3} {'lower':>12} {'gap':>8} {'upper':>12} {'gap':>8}")
        for t in range(1, cfg.max_iter + 1):
            lo, up = lower.bound_at(t), upper.bound_at(t)
            print(f"{t:3d} {lo:12.6f} {abs(lo - pstar) / abs(pstar):8.3%} {up:12.6f} "
                  f"{abs(up - pstar) / abs(pstar):8.3%}")
            rows.append([label, t, "%.12g" % lo, "%.12g" % up, "%.12g" % pstar])
    write_rows(cfg.out, ["partition", "t", "lower", "upper", "p_star"], rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    add_config_args(ap, PencilConfig)
    run(config_from_args(PencilConfig, ap.parse_args(argv)))


if __name__ == "__main__":
    main()
