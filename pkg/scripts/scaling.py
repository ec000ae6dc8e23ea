"""Wall-clock of the inner iteration on growing pencil instances.

Each size uses blocks of ``n // n_blocks`` so the number of pair subproblems
stays fixed while their size grows.  Sizes beyond a few hundred are possible
but slow with the dense in-repo kernel.

    python scripts/scaling.py [--sizes 50 100 200] [--max-iter 3]
"""

import argparse
import os
from dataclasses import dataclass

from _common import RESULTS, Timer, add_config_args, config_from_args, write_rows

from blockfw.benchmarks import gen_pencil_sdp
from blockfw.iterative import RunConfig, run_inner
from blockfw.partition import make_uniform


@dataclass(frozen=True)
class ScalingConfig:
    sizes: tuple = (50, 100, 200)
    n_blocks: int = 10
    seed: int = 2025
    max_iter: int = 3
    out: str = os.path.join(RESULTS, "scaling.csv")


def run(cfg):
    rows = []
    print(f"{'n':>5} {'block':>5} {'iters':>5} {'seconds':>8}  bounds")
    for n in cfg.sizes:
        prob = gen_pencil_sdp(n, cfg.seed)
        part = make_uniform(n, max(n // cfg.n_blocks, 1))
        with Timer() as tm:
            tr = run_inner(prob, RunConfig(part, max_iter=cfg.max_iter, stop_tol=0.0)).trace
        print(f"{n:5d} {part.blocks[0]:5d} {len(tr):5d} {tm.seconds:8.2f}  "
              + " ".join(f"{b:.5f}" for b in tr.bounds) + ("" if tr.is_monotone() else "  (not monotone)"))
        rows.append([n, part.blocks[0], len(tr), "%.3f" % tm.seconds, "%.12g" % tr.bounds[-1]])
    write_rows(cfg.out, ["n", "block", "iterations", "seconds", "last_bound"], rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    add_config_args(ap, ScalingConfig)
    run(config_from_args(ScalingConfig, ap.parse_args(argv)))


if __name__ == "__main__":
    main()
