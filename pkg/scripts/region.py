"""Boundary of {(x, y) : I + xA + yB in K} along rays, for several cones K.

For each direction angle the script finds the largest r with
I + r (cos a A + sin a B) in K, for the PSD cone and block factor-width-two
cones of the given partitions.  The CSV can be plotted as nested regions.

    python scripts/region.py [--n 10] [--seed 3] [--angles 72]
"""

import argparse
import os
from dataclasses import dataclass

from _common import RESULTS, Timer, add_config_args, config_from_args

from blockfw.benchmarks import gen_pencil_sdp
from blockfw.cone import region_boundary, write_region_csv
from blockfw.partition import parse_partition


@dataclass(frozen=True)
class RegionConfig:
    n: int = 10
    seed: int = 3
    partitions: tuple = ("sdd", "uniform:2", "uniform:5")
    angles: int = 72
    out: str = os.path.join(RESULTS, "region.csv")


def run(cfg):
    prob = gen_pencil_sdp(cfg.n, cfg.seed)
    A, B = -prob.A[0], -prob.A[1]
    parts = [parse_partition(label, cfg.n) for label in cfg.partitions]
    with Timer() as tm:
        rows = region_boundary(A, B, parts, n_angles=cfg.angles)
    os.makedirs(os.path.dirname(cfg.out) or ".", exist_ok=True)
    write_region_csv(cfg.out, rows, parts)
    print(f"{len(rows)} rays over {len(parts)} partitions in {tm.seconds:.1f}s -> {cfg.out}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    add_config_args(ap, RegionConfig)
    run(config_from_args(RegionConfig, ap.parse_args(argv)))


if __name__ == "__main__":
    main()
