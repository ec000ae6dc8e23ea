"""Scattered block SDPs for the inner and outer iterations.

Every svec coordinate of a pair block X_kl corresponds to exactly one svec
coordinate of the n x n matrix (same sqrt(2) weight), so restricting data to
the pairs and scattering block variables back are both index selections on
svec vectors.  ``pair_columns`` builds that index map once per partition.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch
from .ipm import ConicProgram
from .linalg import CholFactor, smat, svec, svec_dim, triu_index
from .partition import pair_indices


@lru_cache(maxsize=32)
def _global_position(n):
    rows, cols, _ = triu_index(n)
    pos = np.full((n, n), -1, dtype=np.int64)
    pos[rows, cols] = np.arange(len(rows))
    return pos


@lru_cache(maxsize=32)
def pair_columns(part):
    """Concatenated global svec positions of every pair block, in pair order.

    Returns ``(colmap, offsets)`` where block ``q`` owns
    ``colmap[offsets[q]:offsets[q+1]]``.
    """
    pos = _global_position(part.n)
    chunks, sizes = [], []
    for pair in part.pairs():
        idx = pair.indices
        r, c, _ = triu_index(len(idx))
        chunks.append(pos[idx[r], idx[c]])
        sizes.append(len(r))
    colmap = np.concatenate(chunks)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    colmap.setflags(write=False)
    offsets.setflags(write=False)
    return colmap, offsets


def congruence_matrix(V):
    """Matrix of X -> V' X V in svec coordinates (square, svec_dim(n))."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    r, s, w_out = triu_index(n)
    i, j, _ = triu_index(n)
    c_in = np.where(i == j, 0.5, 1.0 / np.sqrt(2.0))
    Vi, Vj = V[i], V[j]  # rows of V, one per input coordinate
    T = Vi[:, r] * Vj[:, s] + Vj[:, r] * Vi[:, s]
    T *= c_in[:, None]
    T *= w_out[None, :]
    return T.T


def _check(prob, part, basis):
    if part.n != prob.n:
        raise DimensionMismatch(f"partition covers n={part.n}, problem has n={prob.n}")
    if basis.upper.shape != (prob.n, prob.n):
        raise DimensionMismatch(f"basis is {basis.upper.shape}, problem has n={prob.n}")


def _split(flat, part):
    """Cut a concatenated block svec vector (or row stack) into pair matrices."""
    _, offsets = pair_columns(part)
    out = {}
    for q, pair in enumerate(pair_indices(part)):
        out[pair] = smat(flat[..., offsets[q]:offsets[q + 1]], pair.dim)
    return out


@dataclass(frozen=True, eq=False)
class ScatteredSdp:
    """Block data of the inner subproblem in basis V (flat svec storage)."""

    partition: object
    basis: CholFactor
    c: np.ndarray  # concatenated svec(C_hat_kl)
    A: np.ndarray  # (m, total) rows of concatenated svec(A_hat_i,kl)
    b: np.ndarray

    @property
    def cost_blocks(self):
        return _split(self.c, self.partition)

    @property
    def cons_blocks(self):
        per_pair = _split(self.A, self.partition)
        return {(i, pair): M[i] for pair, M in per_pair.items() for i in range(len(self.b))}

    def to_conic(self):
        dims = tuple(p.dim for p in pair_indices(self.partition))
        return ConicProgram(dims, 0, self.c, self.A, self.b)


@dataclass(frozen=True, eq=False)
class DualizedOuterSdp:
    """Standard-form rewrite of the outer dual subproblem.

    Variables are the pair blocks X_kl and free scalars y; the equality rows
    are svec of ``sum V'E'X_kl E V + sum y_i A_i = C`` (upper triangle only).
    """

    partition: object
    basis: CholFactor
    block_cols: np.ndarray  # (svec_dim(n), total) action of the blocks
    free_cols: np.ndarray  # (svec_dim(n), m) columns svec(A_i)
    rhs: np.ndarray  # svec(C)
    b: np.ndarray

    @property
    def n_equalities(self):
        return self.rhs.shape[0]

    def to_conic(self):
        dims = tuple(p.dim for p in pair_indices(self.partition))
        c = np.concatenate([np.zeros(self.block_cols.shape[1]), -self.b])
        A = np.hstack([self.block_cols, self.free_cols])
        return ConicProgram(dims, len(self.b), c, A, self.rhs)


def scatter(prob, part, basis=None):
    basis = basis or CholFactor.identity(prob.n)
    _check(prob, part, basis)
    V = basis.upper
    colmap, _ = pair_columns(part)
    Ct = V @ prob.C @ V.T
    c = svec(Ct)[colmap]
    if prob.m:
        At = V @ prob.A @ V.T
        A = svec(At)[:, colmap]
    else:
        A = np.zeros((0, len(colmap)))
    return ScatteredSdp(part, basis, c, A, prob.b.copy())


def build_outer_dual(prob, part, basis=None):
    basis = basis or CholFactor.identity(prob.n)
    _check(prob, part, basis)
    colmap, _ = pair_columns(part)
    if basis.shift == 0.0 and np.array_equal(basis.upper, np.eye(prob.n)):
        block_cols = np.zeros((svec_dim(prob.n), len(colmap)))
        block_cols[colmap, np.arange(len(colmap))] = 1.0
    else:
        block_cols = congruence_matrix(basis.upper)[:, colmap]
    free_cols = svec(prob.A).reshape(prob.m, -1).T if prob.m else np.zeros((svec_dim(prob.n), 0))
    return DualizedOuterSdp(part, basis, block_cols, free_cols, svec(prob.C), prob.b.copy())


def assemble_flat(flat, part, basis=None):
    """sum_kl E_kl' X_kl E_kl (then V' . V) from concatenated block svecs."""
    colmap, _ = pair_columns(part)
    acc = np.zeros(svec_dim(part.n))
    np.add.at(acc, colmap, flat)
    M = smat(acc, part.n)
    if basis is not None:
        V = basis.upper if isinstance(basis, CholFactor) else np.asarray(basis)
        M = V.T @ M @ V
        M = (M + M.T) * 0.5
    return M


def gather(cert, basis):
    """Full-space iterate V' (sum E'X_kl E) V of a block solution."""
    if basis.upper.shape != (cert.partition.n, cert.partition.n):
        raise DimensionMismatch("basis and certificate dimensions differ")
    return assemble_flat(cert.flat(), cert.partition, basis)
