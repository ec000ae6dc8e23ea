"""Success rate of the outer iteration on Lovasz theta problems of random graphs.

An instance counts as a success at iteration t when theta(G) / U_t >= 0.99,
where U_t is the upper bound on theta(G) after t outer iterations.  The default
is the desk-scale run (40 graphs on 20 nodes); ``--full`` switches to 140
graphs on 30 nodes.

    python scripts/theta_success.py [--full] [--n-graphs 40] [--n-nodes 20]
"""

import argparse
import os
from dataclasses import dataclass, replace

from _common import RESULTS, Timer, add_config_args, config_from_args, write_rows

from blockfw.benchmarks import gen_erdos_renyi, lovasz_theta_sdp, success_rate_experiment
from blockfw.ipm import solve_sdp
from blockfw.iterative import RunConfig
from blockfw.partition import parse_partition


@dataclass(frozen=True)
class ThetaConfig:
    n_nodes: int = 20
    n_graphs: int = 40
    p_low: float = 0.2
    p_high: float = 0.8
    seed0: int = 1000
    partitions: tuple = ("sdd", "uniform:2", "uniform:5")
    max_iter: int = 7
    threshold: float = 0.99
    checkpoints: tuple = (1, 3, 5, 7)
    out: str = os.path.join(RESULTS, "theta_success.csv")


FULL = dict(n_nodes=30, n_graphs=140)


def graphs(cfg):
    span = max(cfg.n_graphs - 1, 1)
    return [gen_erdos_renyi(cfg.n_nodes, cfg.p_low + (cfg.p_high - cfg.p_low) * k / span, cfg.seed0 + k)
            for k in range(cfg.n_graphs)]


def run(cfg):
    gs = graphs(cfg)
    thetas = [-solve_sdp(lovasz_theta_sdp(g)).primal_value for g in gs]
    print(f"{len(gs)} graphs on {cfg.n_nodes} nodes, threshold {cfg.threshold}")
    print(f"{'partition':>12} " + " ".join(f"{'t=' + str(t):>7}" for t in cfg.checkpoints) + "   time")
    rows = []
    for label in cfg.partitions:
        rc = RunConfig(parse_partition(label, cfg.n_nodes), max_iter=cfg.max_iter, stop_tol=0.0)
        with Timer() as tm:
            rates = success_rate_experiment(gs, rc, cfg.threshold, thetas, checkpoints=cfg.checkpoints)
        print(f"{label:>12} " + " ".join(f"{rates[t]:7.1%}" for t in cfg.checkpoints) + f" {tm.seconds:6.1f}s")
        rows += [[label, t, "%.6f" % rates[t]] for t in cfg.checkpoints]
    write_rows(cfg.out, ["partition", "t", "success_rate"], rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    add_config_args(ap, ThetaConfig)
    ap.add_argument("--full", action="store_true", help="30-node, 140-graph run")
    args = ap.parse_args(argv)
    base = replace(ThetaConfig(), **FULL) if args.full else None
    run(config_from_args(ThetaConfig, args, base))


if __name__ == "__main__":
    main()
