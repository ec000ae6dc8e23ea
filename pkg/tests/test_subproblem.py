import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockfw.cone import BlockCertificate, assemble
from blockfw.errors import DimensionMismatch
from blockfw.ipm import solve
from blockfw.linalg import CholFactor, chol_psd, svec, svec_dim
from blockfw.model import SdpProblem, Status, residuals
from blockfw.partition import Partition, embed, extract, make_uniform, pair_indices, trivial
from blockfw.subproblem import build_outer_dual, congruence_matrix, gather, scatter

from conftest import random_psd, random_sym


def random_problem(rng, n, m):
    return SdpProblem(random_sym(rng, n), np.stack([random_sym(rng, n) for _ in range(m)]), rng.standard_normal(m))


def random_basis(rng, n):
    return chol_psd(random_psd(rng, n) + 0.1 * np.eye(n))


def test_scatter_identity_cost():
    prob = SdpProblem(np.eye(4), np.eye(4)[None], [1.0])
    sub = scatter(prob, Partition((2, 2)), None)
    (pair, Chat), = sub.cost_blocks.items()
    assert np.array_equal(Chat, np.eye(4))


def test_scatter_data_relation(rng):
    prob = random_problem(rng, 7, 3)
    part = Partition((2, 3, 2))
    basis = random_basis(rng, 7)
    sub = scatter(prob, part, basis)
    V = basis.upper
    for pair, Chat in sub.cost_blocks.items():
        assert np.allclose(Chat, extract(V @ prob.C @ V.T, pair), atol=1e-13)
    for (i, pair), Ahat in sub.cons_blocks.items():
        assert np.allclose(Ahat, extract(V @ prob.A[i] @ V.T, pair), atol=1e-13)


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 3), min_size=2, max_size=4))
def test_trace_identities(seed, blocks):
    """<C, V'(sum E'X E)V> == sum <C_hat, X> and likewise for every A_i."""
    rng = np.random.default_rng(seed)
    part = Partition(tuple(blocks))
    n = part.n
    prob = random_problem(rng, n, 2)
    basis = random_basis(rng, n)
    cert = BlockCertificate.from_list(part, [random_sym(rng, p.dim) for p in pair_indices(part)])
    X = assemble(cert, basis)
    sub = scatter(prob, part, basis)
    flat = cert.flat()
    scale = 1 + np.abs(X).max() * (1 + np.abs(prob.C).max())
    assert abs(np.vdot(prob.C, X) - sub.c @ flat) <= 1e-12 * scale
    assert np.allclose(np.einsum("kij,ij->k", prob.A, X), sub.A @ flat, atol=1e-12 * scale)
    # gather is the same full-space iterate
    assert np.allclose(gather(cert, basis), X, atol=1e-13 * scale)
    # extract/embed adjointness on the same draw
    pair = pair_indices(part)[0]
    B = random_sym(rng, pair.dim)
    assert abs(np.vdot(prob.C, embed(B, pair, n)) - np.vdot(extract(prob.C, pair), B)) <= 1e-12 * scale


def test_gather_identity():
    part = make_uniform(6, 2)
    assert np.allclose(gather(BlockCertificate.identity(part), CholFactor.identity(6)), np.eye(6))


def test_scatter_solution_is_feasible():
    rng = np.random.default_rng(9)
    n = 6
    X0 = random_psd(rng, n) + np.eye(n)
    A = np.stack([random_sym(rng, n) for _ in range(3)])
    b = np.einsum("kij,ij->k", A, X0)
    prob = SdpProblem(random_psd(rng, n), A, b)
    part = trivial(n)
    sub = scatter(prob, part)
    sol = solve(sub.to_conic())
    if sol.status == Status.INFEASIBLE:
        pytest.skip("random instance has no SDD-feasible point")
    assert sol.status == Status.OPTIMAL
    flat = np.concatenate([svec(M) for M in sol.X])
    X = gather(BlockCertificate.from_flat(part, flat), CholFactor.identity(n))
    assert np.abs(residuals(prob, X)).max() <= 1e-7 * (1 + np.abs(b).max())
    assert np.vdot(prob.C, X) == pytest.approx(sol.primal_value, rel=1e-10, abs=1e-10)
    assert np.linalg.eigvalsh(X).min() >= -1e-8 * (1 + np.linalg.norm(X, 2))


def test_scatter_matches_direct_block_formulation():
    """Same optimum as modelling X = sum E'X_kl E directly in cvxpy."""
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(10)
    n = 6
    part = make_uniform(n, 2)
    A = np.stack([random_sym(rng, n) for _ in range(2)])
    X0 = np.eye(n)
    prob = SdpProblem(random_psd(rng, n), A, np.einsum("kij,ij->k", A, X0))
    sol = solve(scatter(prob, part).to_conic())
    blocks = [cp.Variable((p.dim, p.dim), PSD=True) for p in pair_indices(part)]
    X = 0
    for blk, pair in zip(blocks, pair_indices(part)):
        E = np.zeros((pair.dim, n))
        E[np.arange(pair.dim), pair.indices] = 1.0
        X = X + E.T @ blk @ E
    cons = [cp.trace(A[i] @ X) == prob.b[i] for i in range(2)]
    ref = cp.Problem(cp.Minimize(cp.trace(prob.C @ X)), cons).solve(solver="CLARABEL")
    assert sol.primal_value == pytest.approx(ref, rel=1e-6, abs=1e-6)


def test_outer_dual_two_by_two():
    prob = SdpProblem(np.eye(2), np.diag([1.0, 0.0])[None], [1.0])
    sub = build_outer_dual(prob, trivial(2))
    sol = solve(sub.to_conic())
    assert sol.status == Status.OPTIMAL
    assert sol.x_free[0] == pytest.approx(1.0, abs=1e-7)
    assert -sol.primal_value == pytest.approx(1.0, abs=1e-7)


def test_outer_dual_row_count(rng):
    for n in (2, 5, 9):
        prob = random_problem(rng, n, 2)
        sub = build_outer_dual(prob, trivial(n), random_basis(rng, n))
        assert sub.n_equalities == svec_dim(n) == n * (n + 1) // 2
        assert sub.to_conic().A.shape[0] == n * (n + 1) // 2


def test_outer_dual_encodes_matrix_equation(rng):
    n = 5
    prob = random_problem(rng, n, 2)
    part = Partition((2, 3))
    basis = random_basis(rng, n)
    sub = build_outer_dual(prob, part, basis)
    blocks = [random_sym(rng, p.dim) for p in pair_indices(part)]
    cert = BlockCertificate.from_list(part, blocks)
    y = rng.standard_normal(2)
    lhs = sub.block_cols @ cert.flat() + sub.free_cols @ y
    M = assemble(cert, basis) + np.tensordot(y, prob.A, axes=1)
    assert np.allclose(lhs, svec(M), atol=1e-12)


def test_outer_dual_without_constraints_is_membership():
    from blockfw.cone import membership_fw

    rng = np.random.default_rng(11)
    for C in (np.eye(4), random_psd(rng, 4, rank=2) - 0.3 * np.eye(4)):
        prob = SdpProblem(C, [], [])
        sol = solve(build_outer_dual(prob, make_uniform(4, 1)).to_conic())
        feasible = sol.status == Status.OPTIMAL
        assert feasible == membership_fw(C, make_uniform(4, 1)).inside


def test_outer_dual_matches_discretized_primal():
    """n = 2, m = 1: the dual value equals a grid minimum of the primal."""
    C = np.array([[2.0, 0.7], [0.7, 1.0]])
    prob = SdpProblem(C, np.diag([1.0, 0.0])[None], [1.0])
    sol = solve(build_outer_dual(prob, trivial(2)).to_conic())
    lower = -sol.primal_value
    # X = [[1, c], [c, d]] with d >= c^2
    c = np.linspace(-3, 3, 6001)
    grid = C[0, 0] + 2 * C[0, 1] * c + C[1, 1] * c**2
    assert lower == pytest.approx(grid.min(), abs=1e-5)
    assert lower <= grid.min() + 1e-7


def test_congruence_matrix(rng):
    n = 4
    V = rng.standard_normal((n, n))
    X = random_sym(rng, n)
    assert np.allclose(congruence_matrix(V) @ svec(X), svec(V.T @ X @ V), atol=1e-12)


def test_dimension_checks(rng):
    prob = random_problem(rng, 4, 1)
    with pytest.raises(DimensionMismatch):
        scatter(prob, trivial(5))
    with pytest.raises(DimensionMismatch):
        build_outer_dual(prob, trivial(4), CholFactor.identity(3))
    with pytest.raises(DimensionMismatch):
        gather(BlockCertificate.identity(trivial(4)), CholFactor.identity(5))
