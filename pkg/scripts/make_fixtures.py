"""Regenerate tests/fixtures: SDPA files plus manifest.json with reference values.

p_star comes from a tight full-cone interior-point solve of each instance;
the combinatorial oracles (stable set, BQO brute force) are stored alongside.

    python scripts/make_fixtures.py [--out tests/fixtures]
"""

import argparse
import json
import os
import time

from blockfw import benchmarks as bm
from blockfw.ipm import IpmSettings, solve_sdp
from blockfw.model import Status, write_sdpa

REF_SETTINGS = IpmSettings(gap_tol=1e-10, feas_tol=1e-10, max_iter=200)

PENCILS = [(10, 42), (10, 1), (10, 2), (10, 3), (20, 4), (20, 5), (20, 6), (40, 7), (40, 8), (40, 9)]
ER_GRAPHS = [(10, 0.3, 11), (10, 0.5, 12), (15, 0.2, 13), (15, 0.4, 14), (20, 0.2, 15),
             (20, 0.5, 16), (20, 0.8, 17), (25, 0.3, 19),
             (30, 0.2, 7), (30, 0.3, 18)]
BQO = [(8, 21), (10, 22), (12, 23), (14, 24), (16, 25), (18, 26), (20, 27), (20, 28)]


def default_partitions(n):
    """Partitions exercised by the corpus tests: SDD and a mid-size uniform one."""
    block = 2 if n <= 10 else 5
    return ["sdd", f"uniform:{block}"]


def instances():
    for n, seed in PENCILS:
        yield f"pencil_n{n}_s{seed}", bm.gen_pencil_sdp(n, seed), {"generator": "pencil", "n": n, "seed": seed}
    named = {"k4": bm.Graph.complete(4), "c5": bm.Graph.cycle(5), "empty6": bm.Graph.empty(6)}
    for name, g in named.items():
        yield f"theta_{name}", bm.lovasz_theta_sdp(g), {"generator": "theta", "graph": name,
                                                        "n": g.n_nodes, "stable_set": bm.stable_set_brute(g)}
    for n, p, seed in ER_GRAPHS:
        g = bm.gen_erdos_renyi(n, p, seed)
        yield (f"theta_er_n{n}_p{int(p * 10)}_s{seed}", bm.lovasz_theta_sdp(g),
               {"generator": "er", "n": n, "p_edge": p, "seed": seed, "edges": len(g.edges),
                "stable_set": bm.stable_set_brute(g)})
    for n, seed in BQO:
        Q = bm.gen_bqo(n, seed)
        yield f"bqo_n{n}_s{seed}", bm.bqo_relax_sdp(Q), {"generator": "bqo", "n": n, "seed": seed,
                                                          "brute": bm.bqo_brute(Q)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures"))
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    manifest = {"reference_settings": {"gap_tol": REF_SETTINGS.gap_tol, "feas_tol": REF_SETTINGS.feas_tol},
                "tolerances": {"p_star_abs": 1e-6, "monotone_rel": 1e-7}, "instances": []}
    for name, prob, info in instances():
        tic = time.perf_counter()
        rep = solve_sdp(prob, REF_SETTINGS)
        if rep.status != Status.OPTIMAL:
            raise SystemExit(f"{name}: reference solve ended with {rep.status.value}")
        fname = f"{name}.dat-s"
        write_sdpa(prob, os.path.join(args.out, fname), comment=f"{name} (minimize form, C = -F0)")
        entry = dict(name=name, file=fname, **info, m=prob.m, p_star=rep.primal_value,
                     d_star=rep.dual_value, partitions=default_partitions(prob.n))
        manifest["instances"].append(entry)
        print(f"{name:28s} n={prob.n:3d} m={prob.m:4d} p*={rep.primal_value:+.10f} "
              f"({(time.perf_counter() - tic) * 1e3:.0f} ms)")
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    print(f"{len(manifest['instances'])} instances written to {os.path.normpath(args.out)}")


if __name__ == "__main__":
    main()
