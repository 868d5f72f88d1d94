import numpy as np
import pytest

from christoffel_outliers import (
    ConvergenceError,
    KernelSpec,
    NotPositiveDefiniteError,
    cg_ridge_solve,
    frobenius_norm,
    gram_matrix,
    ridge_objective,
    spd_factor,
    spd_solve,
)

from helpers import random_spd_triple


# ---------------------------------------------------------------------------
# spd_factor
# ---------------------------------------------------------------------------


def test_factor_identity():
    F = spd_factor(np.eye(3))
    assert np.array_equal(F.lower, np.eye(3))
    assert F.jitter_applied == 0.0


def test_factor_diagonal():
    F = spd_factor(np.diag([4.0, 9.0]))
    assert np.array_equal(F.lower, np.diag([2.0, 3.0]))


def test_factor_reconstructs_kernel_system():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 2))
    G = gram_matrix(KernelSpec.rbf(1.0), X)
    A = G + 1e-3 * np.eye(6)
    F = spd_factor(A)
    recon = F.lower @ F.lower.T
    rel = np.linalg.norm(recon - A, "fro") / np.linalg.norm(A, "fro")
    assert rel <= 1e-10
    assert F.jitter_applied == 0.0


def test_factor_escalates_jitter_on_singular_input():
    # Rank-one matrix: plain Cholesky fails, jitter rescues it.
    A = np.ones((3, 3))
    F = spd_factor(A)
    assert F.jitter_applied > 0.0
    recon = F.lower @ F.lower.T
    target = A + F.jitter_applied * np.eye(3)
    assert np.linalg.norm(recon - target, "fro") <= 1e-8 * np.linalg.norm(target, "fro")


def test_factor_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError, match="not positive definite"):
        spd_factor(np.diag([1.0, -1.0]))


def test_factor_rejects_asymmetric_and_zero():
    with pytest.raises(ValueError, match="symmetric"):
        spd_factor(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NotPositiveDefiniteError):
        spd_factor(np.zeros((2, 2)))


def test_factor_empty_jitter_schedule_forbids_jitter():
    with pytest.raises(NotPositiveDefiniteError):
        spd_factor(np.ones((3, 3)), jitter_scales=())


# ---------------------------------------------------------------------------
# spd_solve
# ---------------------------------------------------------------------------


def test_solve_identity_returns_rhs():
    F = spd_factor(np.eye(4))
    b = np.array([1.0, -2.0, 3.0, 0.5])
    assert np.array_equal(spd_solve(F, b), b)


def test_solve_diagonal():
    F = spd_factor(np.diag([2.0, 4.0]))
    assert np.allclose(spd_solve(F, [2.0, 4.0]), [1.0, 1.0], rtol=1e-15, atol=0)


def test_solve_random_residual():
    rng = np.random.default_rng(1)
    B = rng.normal(size=(5, 5))
    A = B @ B.T + np.eye(5)
    A = 0.5 * (A + A.T)
    b = rng.normal(size=5)
    x = spd_solve(spd_factor(A), b)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-9


def test_solve_matrix_rhs():
    rng = np.random.default_rng(2)
    A = np.diag([1.0, 2.0, 3.0])
    B = rng.normal(size=(3, 4))
    X = spd_solve(spd_factor(A), B)
    assert np.allclose(A @ X, B, rtol=1e-12, atol=1e-12)


def test_solve_dimension_mismatch():
    F = spd_factor(np.eye(3))
    with pytest.raises(ValueError, match="mismatch"):
        spd_solve(F, np.ones(4))


# ---------------------------------------------------------------------------
# cg_ridge_solve
# ---------------------------------------------------------------------------


def test_cg_zero_rhs_returns_gamma():
    sol = cg_ridge_solve(np.eye(3), np.zeros(3), gamma=5.0, rho=0.1)
    assert np.array_equal(sol.theta, np.zeros(3))
    assert sol.objective_value == 5.0
    assert sol.iterations == 0
    assert sol.residual_norm == 0.0


def test_cg_diagonal_hand_case():
    # (I + I) theta = g with g = (2, 0): theta = (1, 0), objective 4 - 2 = 2.
    sol = cg_ridge_solve(np.eye(2), np.array([2.0, 0.0]), gamma=4.0, rho=1.0)
    assert np.allclose(sol.theta, [1.0, 0.0], rtol=1e-12, atol=1e-12)
    assert sol.objective_value == pytest.approx(2.0, rel=1e-12)


def test_cg_matches_cholesky_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 51))
        G, g, gamma = random_spd_triple(rng, n)
        rho = float(10.0 ** rng.uniform(-3, 0))
        sol = cg_ridge_solve(G, g, gamma, rho)
        closed = gamma - float(g @ spd_solve(spd_factor(G + rho * np.eye(n)), g))
        assert sol.objective_value == pytest.approx(closed, rel=1e-6)
        assert sol.residual_norm <= 1e-8 * np.linalg.norm(g)


def test_cg_objective_is_the_minimum():
    rng = np.random.default_rng(4)
    G, g, gamma = random_spd_triple(rng, 12)
    rho = 0.05
    sol = cg_ridge_solve(G, g, gamma, rho)
    for _ in range(25):
        other = sol.theta + rng.normal(size=12) * rng.uniform(0.01, 2.0)
        value = ridge_objective(G, g, gamma, rho, other)
        assert value >= sol.objective_value - 1e-8


def test_objective_monotone_in_rho_and_limits_to_gamma():
    rng = np.random.default_rng(5)
    G, g, gamma = random_spd_triple(rng, 10)
    values = [
        cg_ridge_solve(G, g, gamma, rho).objective_value
        for rho in (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e2)
    ]
    diffs = np.diff(values)
    assert np.all(diffs >= -1e-10 * gamma)
    huge = cg_ridge_solve(G, g, gamma, 1e12).objective_value
    assert huge == pytest.approx(gamma, rel=1e-6)


def test_cg_raises_on_iteration_cap():
    rng = np.random.default_rng(6)
    G, g, gamma = random_spd_triple(rng, 30)
    with pytest.raises(ConvergenceError) as excinfo:
        cg_ridge_solve(G, g, gamma, rho=1e-6, tol=1e-14, max_iter=2)
    assert excinfo.value.residual_norm > 0.0
    assert excinfo.value.iterations == 2


def test_cg_validates_inputs():
    with pytest.raises(ValueError):
        cg_ridge_solve(np.eye(2), np.ones(2), 1.0, rho=0.0)
    with pytest.raises(ValueError):
        cg_ridge_solve(np.eye(2), np.ones(2), 1.0, rho=1.0, tol=0.0)
    with pytest.raises(ValueError):
        cg_ridge_solve(np.eye(2), np.ones(3), 1.0, rho=1.0)


def test_objective_clamped_at_zero_with_warning():
    # gamma slightly below the attainable minimum forces a negative value.
    with pytest.warns(RuntimeWarning):
        value = ridge_objective(np.eye(2), np.array([1.0, 0.0]), gamma=-1.0, rho=1.0,
                                theta=np.array([0.5, 0.0]))
    assert value == 0.0


# ---------------------------------------------------------------------------
# frobenius_norm
# ---------------------------------------------------------------------------


def test_frobenius_cases():
    assert frobenius_norm(np.zeros((3, 3))) == 0.0
    assert frobenius_norm(np.eye(4)) == 2.0
    assert frobenius_norm(np.array([[3.0, 4.0], [0.0, 0.0]])) == 5.0
