import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blockfw.errors import DimensionMismatch, NotFactorizable
from blockfw.linalg import chol_psd, min_eig, smat, svec, svec_dim, sym

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def sym_matrices(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: arrays(np.float64, (n, n), elements=finite).map(lambda a: (a + a.T) / 2)
    )


def test_chol_identity():
    f = chol_psd(np.eye(3), 1e-12)
    assert np.array_equal(f.upper, np.eye(3))
    assert f.shift == 0.0


def test_chol_hand_example():
    f = chol_psd(np.array([[4.0, 2.0], [2.0, 5.0]]), 1e-12)
    assert np.allclose(f.upper, [[2.0, 1.0], [0.0, 2.0]], atol=1e-15)
    assert f.shift == 0.0
    assert np.allclose(f.upper.T @ f.upper, [[4, 2], [2, 5]])


def test_chol_singular_boundary():
    a = np.diag([1.0, 0.0])
    f = chol_psd(a, 1e-12)
    assert 0.0 < f.shift <= 1e-10
    err = np.linalg.norm(f.reconstruct() - (a + f.shift * np.eye(2)))
    assert err <= 1e-10


def test_chol_far_from_psd_raises():
    with pytest.raises(NotFactorizable):
        chol_psd(np.diag([1.0, -1.0]), 1e-12)


def test_chol_random_reconstruction():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        G = rng.standard_normal((n, int(rng.integers(1, n + 1))))
        a = G @ G.T
        f = chol_psd(a, 1e-12)
        err = np.linalg.norm(f.upper.T @ f.upper - (a + f.shift * np.eye(n)))
        assert err <= 1e-10 * max(1.0, np.linalg.norm(a))
        if min_eig(a) >= 1e-10 * np.linalg.norm(a, 2):
            assert f.shift == 0.0


def test_min_eig_examples():
    assert min_eig(np.eye(5)) == pytest.approx(1.0)
    assert min_eig(np.diag([3.0, -2.0])) == pytest.approx(-2.0)
    M = np.full((3, 3), -0.9) + 1.9 * np.eye(3)
    assert pd_by_ldl(M + 0.8 * np.eye(3) + 1e-12 * np.eye(3))
    assert not pd_by_ldl(M + 0.8 * np.eye(3))
    assert min_eig(M) == pytest.approx(-0.8, abs=1e-9)


def pd_by_ldl(a):
    """Exact positive-definiteness test via Gaussian elimination on Fractions."""
    from fractions import Fraction

    m = [[Fraction(x) for x in row] for row in a]
    n = len(m)
    for k in range(n):
        if m[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return True


@given(st.integers(2, 4).flatmap(lambda n: arrays(np.int64, (n, n), elements=st.integers(-9, 9))))
def test_min_eig_bracketed_exactly(a):
    """a - (lam - d)I is PD and a - (lam + d)I is not, checked in rational arithmetic."""
    a = (a + a.T).astype(float)
    lam = min_eig(a)
    d = 1e-9 * (1 + np.abs(a).max())
    eye = np.eye(len(a))
    assert pd_by_ldl(a - (lam - d) * eye)
    assert not pd_by_ldl(a - (lam + d) * eye)


def test_svec_identity():
    assert np.allclose(svec(np.eye(2)), [1.0, 0.0, 1.0])


def test_svec_inner_product(rng):
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    A, B = A + A.T, B + B.T
    assert svec(A) @ svec(B) == pytest.approx(np.trace(A @ B), abs=1e-12)


@settings(max_examples=50)
@given(sym_matrices())
def test_svec_roundtrip(a):
    # sqrt(2) scaling can round the off-diagonals by one unit in the last place
    np.testing.assert_array_max_ulp(smat(svec(a)), sym(a), maxulp=1)
    assert np.array_equal(np.diag(smat(svec(a))), np.diag(sym(a)))
    assert svec(a) @ svec(a) == pytest.approx(np.vdot(a, a), rel=1e-12, abs=1e-12)
    assert np.vdot(a, a) >= 0


def test_svec_stack_and_errors():
    stack = np.stack([np.eye(3), 2 * np.eye(3)])
    v = svec(stack)
    assert v.shape == (2, svec_dim(3))
    assert np.array_equal(smat(v), stack)
    with pytest.raises(DimensionMismatch):
        smat(np.zeros(4))
    with pytest.raises(DimensionMismatch):
        smat(np.zeros(6), n=4)


def test_sym_rejects_nonsquare():
    with pytest.raises(DimensionMismatch):
        sym(np.zeros((2, 3)))
