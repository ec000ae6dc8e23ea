"""Instance generators for the three experiment families and their exact oracles.

* pencil:  max x + y  s.t.  I + xA + yB psd
* theta:   Lovasz theta number of a graph
* bqo:     binary quadratic optimization over {-1, 1}^n and its SDP relaxation

Graph nodes are numbered from 0.
"""

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import FirstIterationInfeasible, SolverFailure, TooLarge
from .ipm import solve_sdp
from .iterative import run_outer
from .model import SdpProblem

log = logging.getLogger(__name__)

CHECKPOINTS = (1, 3, 5, 7)


def _rng(seed):
    return np.random.default_rng(np.uint64(seed % 2**64))


def _sym_normal(rng, n):
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2.0


def gen_pencil_sdp(n, seed):
    """C = I, A_1 = -A, A_2 = -B, b = (1, 1): the dual is max x + y with I + xA + yB psd."""
    if n < 2:
        raise ValueError("pencil instances need n >= 2")
    rng = _rng(seed)
    A = _sym_normal(rng, n)
    B = _sym_normal(rng, n)
    return SdpProblem(np.eye(n), np.stack([-A, -B]), np.ones(2),
                      meta={"generator": "pencil", "n": n, "seed": int(seed)})


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: frozenset

    def __post_init__(self):
        edges = set()
        for e in self.edges:
            i, j = sorted(int(v) for v in e)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not 0 <= i < j < self.n_nodes:
                raise ValueError(f"edge {(i, j)} outside 0..{self.n_nodes - 1}")
            edges.add((i, j))
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def complete(cls, n):
        return cls(n, frozenset(combinations(range(n), 2)))

    @classmethod
    def cycle(cls, n):
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def empty(cls, n):
        return cls(n, frozenset())

    def adjacency(self):
        M = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        for i, j in self.edges:
            M[i, j] = M[j, i] = True
        return M


def gen_erdos_renyi(n_nodes, p_edge, seed):
    if not 0.0 <= p_edge <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = _rng(seed)
    i, j = np.triu_indices(n_nodes, k=1)
    keep = rng.random(len(i)) < p_edge
    return Graph(n_nodes, frozenset(zip(i[keep].tolist(), j[keep].tolist())))


def lovasz_theta_sdp(g):
    """min <-J, X>  s.t.  tr X = 1,  X_ij = 0 on edges; optimum is -theta(G)."""
    n = g.n_nodes
    edges = sorted(g.edges)
    A = np.zeros((1 + len(edges), n, n))
    A[0] = np.eye(n)
    for k, (i, j) in enumerate(edges, start=1):
        A[k, i, j] = A[k, j, i] = 0.5
    b = np.zeros(1 + len(edges))
    b[0] = 1.0
    return SdpProblem(-np.ones((n, n)), A, b,
                      meta={"generator": "theta", "sense_flipped": True, "n": n, "edges": len(edges)})


def stable_set_brute(g):
    """Exact stability number by branch and bound over bitmasks."""
    n = g.n_nodes
    if n > 30:
        raise TooLarge(f"brute-force stable set is limited to 30 nodes, got {n}")
    nbr = [0] * n
    for i, j in g.edges:
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i
    best = 0

    def grow(cand, size):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        v = (cand & -cand).bit_length() - 1
        # either v is in the set, or it is not
        grow(cand & ~nbr[v] & ~(1 << v), size + 1)
        grow(cand & ~(1 << v), size)

    grow((1 << n) - 1, 0)
    return best


def bqo_relax_sdp(Q):
    """min <Q, X>  s.t.  X_ii = 1,  X psd."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    A = np.zeros((n, n, n))
    A[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    return SdpProblem(Q, A, np.ones(n), meta={"generator": "bqo", "n": n})


def gen_bqo(n, seed):
    rng = _rng(seed)
    return _sym_normal(rng, n)


def bqo_brute(Q, chunk=1 << 14):
    """min over x in {-1, 1}^n of x'Qx (x_0 fixed to 1 by symmetry)."""
    Q = np.asarray(Q, dtype=float)
    Q = (Q + Q.T) / 2.0
    n = Q.shape[0]
    if n > 20:
        raise TooLarge(f"brute-force BQO is limited to n = 20, got {n}")
    if n == 1:
        return float(Q[0, 0])
    total = 1 << (n - 1)
    bits = np.arange(n - 1, dtype=np.int64)
    best = np.inf
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = np.ones((len(codes), n))
        X[:, 1:] = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        vals = np.einsum("ki,ij,kj->k", X, Q, X)
        best = min(best, float(vals.min()))
    return best


def success_rates(bounds, thetas, threshold, checkpoints=CHECKPOINTS):
    """Fraction of instances whose bound reaches ``threshold * theta`` at each checkpoint.

    ``bounds[g]`` is the outer trace on the minimize-form theta problem (values
    <= -theta); its negation is an upper bound on theta.  A missing trace counts
    as a failure.
    """
    rates = {}
    for t in checkpoints:
        hits = 0
        for trace, theta in zip(bounds, thetas):
            if trace is None:
                continue
            upper = -trace[min(t, len(trace)) - 1]
            if upper > 0 and theta / upper >= threshold:
                hits += 1
        rates[t] = hits / len(thetas) if thetas else 0.0
    return rates


def success_rate_experiment(graphs, cfg, threshold=0.99, thetas=None, checkpoints=CHECKPOINTS):
    """Outer-iteration success rate per checkpoint iteration.

    ``thetas`` are the exact theta values; they are computed with the full-cone
    solver when omitted.
    """
    if thetas is None:
        thetas = [-solve_sdp(lovasz_theta_sdp(g)).primal_value for g in graphs]
    traces = []
    for g in graphs:
        if cfg.partition.n != g.n_nodes:
            raise ValueError("partition size does not match the graph")
        try:
            traces.append(list(run_outer(lovasz_theta_sdp(g), cfg).trace.bounds))
        except (SolverFailure, FirstIterationInfeasible) as exc:
            log.warning("outer run failed on a %d-node graph: %s", g.n_nodes, exc)
            traces.append(None)
    return success_rates(traces, thetas, threshold, checkpoints)
