"""Dense symmetric linear algebra primitives.

Symmetric matrices are plain ``numpy`` arrays of shape ``(n, n)``; ``sym``
produces a copy that is symmetric bit-for-bit.  The ``svec`` map stacks the
upper triangle row by row with off-diagonal entries scaled by sqrt(2), so that
``svec(A) @ svec(B) == <A, B>``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotFactorizable

SQRT2 = np.sqrt(2.0)


def sym(a):
    """Return the symmetric part of ``a`` as a new float array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    return (a + a.T) * 0.5


def inner(a, b):
    """Trace inner product <A, B> of two symmetric matrices."""
    return float(np.vdot(a, b))


@lru_cache(maxsize=64)
def triu_index(n):
    """Row/column indices and svec weights for dimension ``n`` (cached)."""
    rows, cols = np.triu_indices(n)
    weights = np.where(rows == cols, 1.0, SQRT2)
    for arr in (rows, cols, weights):
        arr.setflags(write=False)
    return rows, cols, weights


def svec_dim(n):
    return n * (n + 1) // 2


def smat_dim(k):
    """Inverse of ``svec_dim``; raises if ``k`` is not triangular."""
    n = int(round((np.sqrt(8 * k + 1) - 1) / 2))
    if svec_dim(n) != k:
        raise DimensionMismatch(f"length {k} is not a triangular number")
    return n


def svec(a):
    """Symmetric vectorization; works on a matrix or a stack ``(..., n, n)``."""
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"svec expects square matrices, got shape {a.shape}")
    rows, cols, w = triu_index(a.shape[-1])
    return a[..., rows, cols] * w


def smat(v, n=None):
    """Inverse of ``svec``; accepts a vector or a stack ``(..., k)``."""
    v = np.asarray(v, dtype=float)
    k = v.shape[-1]
    if n is None:
        n = smat_dim(k)
    elif svec_dim(n) != k:
        raise DimensionMismatch(f"length {k} does not match dimension {n}")
    rows, cols, w = triu_index(n)
    out = np.zeros(v.shape[:-1] + (n, n))
    vals = v / w
    out[..., rows, cols] = vals
    out[..., cols, rows] = vals
    return out


def min_eig(a):
    """Smallest eigenvalue of a symmetric matrix."""
    a = np.asarray(a, dtype=float)
    if a.shape == (1, 1):
        return float(a[0, 0])
    return float(scipy.linalg.eigvalsh(a, subset_by_index=[0, 0])[0])


def spectral_norm(a):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(a)
    return float(max(abs(w[0]), abs(w[-1])))


@dataclass(frozen=True)
class CholFactor:
    """Upper-triangular ``upper`` with ``upper.T @ upper == input + shift * I``."""

    upper: np.ndarray
    shift: float = 0.0

    @property
    def n(self):
        return self.upper.shape[0]

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), 0.0)

    def reconstruct(self):
        return self.upper.T @ self.upper


def chol_psd(a, eps=1e-12):
    """Cholesky factor of ``a + shift*I`` with the smallest shift on the ladder
    ``0, eps, 10 eps, 100 eps, ...`` that lets the factorization go through.

    Raises NotFactorizable once the shift would exceed ``1e-2 * ||a||_2``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    a = sym(a)
    n = a.shape[0]
    limit = 1e-2 * spectral_norm(a)
    shift = 0.0
    step = eps if eps > 0 else np.finfo(float).tiny
    while True:
        try:
            upper = scipy.linalg.cholesky(a + shift * np.eye(n), lower=False, check_finite=True)
            return CholFactor(upper, shift)
        except np.linalg.LinAlgError:
            pass
        shift = step if shift == 0.0 else shift * 10.0
        if shift > limit:
            raise NotFactorizable(
                f"matrix is too far from PSD: required shift exceeds {limit:.3g}"
            )
