"""Membership tests and certificates for DD, SDD, block factor-width-two
cones and their duals."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SolverFailure
from .ipm import ConicProgram, IpmSettings, solve
from .linalg import min_eig, smat, spectral_norm, svec, svec_dim, sym
from .model import Status
from .partition import Partition, extract, pair_indices, trivial
from .subproblem import assemble_flat, congruence_matrix, pair_columns

REL_TOL = 1e-9
MEMBERSHIP_SETTINGS = IpmSettings(gap_tol=1e-9, feas_tol=1e-9, max_iter=150)
# a stalled kernel run is still accepted at this accuracy
ACCEPT_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class BlockCertificate:
    """Pair blocks X_kl, keyed by :class:`PairIndex` in lexicographic order."""

    partition: Partition
    blocks: dict

    @classmethod
    def from_list(cls, part, mats):
        return cls(part, dict(zip(pair_indices(part), mats)))

    @classmethod
    def from_flat(cls, part, flat):
        _, offsets = pair_columns(part)
        mats = [smat(flat[offsets[q]:offsets[q + 1]], p.dim) for q, p in enumerate(pair_indices(part))]
        return cls.from_list(part, mats)

    @classmethod
    def identity(cls, part, scale=1.0):
        """Blocks that assemble to ``scale * I``."""
        w = scale / (part.p - 1)
        return cls.from_list(part, [w * np.eye(p.dim) for p in pair_indices(part)])

    def flat(self):
        parts = []
        for pair in pair_indices(self.partition):
            X = self.blocks[pair]
            if X.shape != (pair.dim, pair.dim):
                raise DimensionMismatch(f"block ({pair.k}, {pair.l}) has shape {X.shape}, expected {pair.dim}")
            parts.append(svec(X))
        return np.concatenate(parts)

    def min_block_eig(self):
        return min(min_eig(X) for X in self.blocks.values())

    def is_valid(self, tol=REL_TOL):
        return all(min_eig(X) >= -tol * (1.0 + spectral_norm(X)) for X in self.blocks.values())


def assemble(cert, basis=None):
    """sum E_kl' X_kl E_kl, congruence-transformed by V when a basis is given."""
    if basis is not None and basis.upper.shape != (cert.partition.n,) * 2:
        raise DimensionMismatch("basis and certificate dimensions differ")
    return assemble_flat(cert.flat(), cert.partition, basis)


@dataclass
class Membership:
    inside: bool
    certificate: BlockCertificate = None
    margin: float = None
    worst_pair: object = None
    min_eig: float = None
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return "In" if self.inside else "Out"

    def __bool__(self):
        return self.inside


def _tol(A):
    return REL_TOL * (1.0 + spectral_norm(A))


def max_scaling(M0, D, part, basis=None, cap=None, settings=None):
    """Largest t (<= cap) with M0 + t*D in FW(V); returns (t, blocks_flat, solution).

    Solved as  min -t  s.t.  sum V'E'X_kl E V - t D = M0  (+ t + s = cap).
    Returns t = None when the program is infeasible.
    """
    n = part.n
    M0, D = sym(M0), sym(D)
    if M0.shape != (n, n) or D.shape != (n, n):
        raise DimensionMismatch(f"matrices must be {n}x{n}")
    colmap, _ = pair_columns(part)
    nb = len(colmap)
    N = svec_dim(n)
    if basis is None:
        block_cols = np.zeros((N, nb))
        block_cols[colmap, np.arange(nb)] = 1.0
    else:
        block_cols = congruence_matrix(basis.upper)[:, colmap]
    dims = [p.dim for p in pair_indices(part)]
    if cap is None:
        A = np.hstack([block_cols, -svec(D)[:, None]])
        c = np.zeros(nb + 1)
        c[-1] = -1.0
        rhs = svec(M0)
    else:
        # columns: blocks | slack (1x1 block) | t
        dims = dims + [1]
        top = np.hstack([block_cols, np.zeros((N, 1)), -svec(D)[:, None]])
        cap_row = np.zeros((1, nb + 2))
        cap_row[0, -2:] = 1.0
        A = np.vstack([top, cap_row])
        c = np.zeros(nb + 2)
        c[-1] = -1.0
        rhs = np.concatenate([svec(M0), [cap]])
    prog = ConicProgram(tuple(dims), 1, c, A, rhs)
    sol = solve(prog, settings or MEMBERSHIP_SETTINGS)
    if sol.status == Status.INFEASIBLE:
        return None, None, sol
    near = max(sol.primal_residual, sol.dual_residual, sol.gap) <= ACCEPT_TOL
    if sol.status != Status.OPTIMAL and not (near and sol.status in (Status.MAX_ITER, Status.NUMERICAL_TROUBLE)):
        raise SolverFailure(f"decomposition program ended with status {sol.status.value}", status=sol.status)
    flat = np.concatenate([svec(X) for X in sol.X[: len(pair_indices(part))]])
    return float(sol.x_free[0]), flat, sol


def membership_fw(A, part, settings=None):
    """Decide A in FW^n_{alpha,2}; In carries the pair blocks, Out the margin."""
    A = sym(A)
    if A.shape[0] != part.n:
        raise DimensionMismatch(f"matrix is {A.shape[0]}x{A.shape[0]}, partition covers {part.n}")
    t, flat, _ = max_scaling(A, -np.eye(part.n), part, settings=settings)
    if t is None:
        raise SolverFailure("margin program reported infeasible")
    if t >= -_tol(A):
        cert = BlockCertificate.from_flat(part, flat)
        shifted = {p: X + (t / (part.p - 1)) * np.eye(p.dim) for p, X in cert.blocks.items()}
        return Membership(True, certificate=BlockCertificate(part, shifted), margin=t)
    return Membership(False, margin=t)


def membership_dual(A, part):
    """A in (FW^n_{alpha,2})*: every pair principal submatrix is PSD."""
    A = sym(A)
    if A.shape[0] != part.n:
        raise DimensionMismatch(f"matrix is {A.shape[0]}x{A.shape[0]}, partition covers {part.n}")
    tol = _tol(A)
    worst, worst_eig = None, np.inf
    for pair in pair_indices(part):
        e = min_eig(extract(A, pair))
        if e < worst_eig:
            worst, worst_eig = pair, e
    if worst_eig >= -tol:
        return Membership(True, min_eig=worst_eig)
    return Membership(False, worst_pair=worst, min_eig=worst_eig)


def is_dd(A):
    A = sym(A)
    off = np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))
    return bool(np.all(np.diag(A) >= off - REL_TOL * (1.0 + np.max(np.abs(A)))))


def is_sdd_oracle(A):
    """SDD test through the factor-width-two decomposition (trivial partition)."""
    A = sym(A)
    if A.shape[0] == 1:
        return bool(A[0, 0] >= 0)
    return membership_fw(A, trivial(A.shape[0])).inside


def psd_radius(D):
    """Largest t with I + t D psd (inf if D is psd)."""
    lo = min_eig(D)
    return np.inf if lo >= 0 else -1.0 / lo


def fw_radius(D, part, cap=1e3):
    """Largest t <= cap with I + tD in FW (``inf`` if the cap is reached)."""
    r = psd_radius(D)
    if np.isfinite(r) and r < cap:
        # FW is inside PSD, so the PSD radius bounds the answer
        t, _, _ = max_scaling(np.eye(part.n), D, part, cap=1.01 * r)
        return t
    t, _, _ = max_scaling(np.eye(part.n), D, part, cap=cap)
    return np.inf if t is None or t >= cap * (1 - 1e-6) else t


def region_boundary(A, B, partitions, n_angles=72, cap=1e3):
    """Boundary of {(x, y): I + xA + yB in cone} along rays from the origin.

    Yields one row per angle: angle, PSD radius, then one FW radius per
    partition (``inf`` when the ray never leaves the cone within ``cap``).
    """
    rows = []
    for theta in np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False):
        D = np.cos(theta) * np.asarray(A) + np.sin(theta) * np.asarray(B)
        rows.append([theta, psd_radius(D)] + [fw_radius(D, part, cap) for part in partitions])
    return rows


def write_region_csv(path_or_file, rows, partitions):
    header = ["angle", "radius_psd"] + [f"radius_fw_{p.label()}" for p in partitions]
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["%.17g" % v for v in row])
    finally:
        if own:
            fh.close()
