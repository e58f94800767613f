import numpy as np
import pytest

from gpflow import (FrozenHamiltonian, GridSpec, KrylovConfig, PhysicsParams, Preconditioner,
                    WaveField, apply_shifted, l2_norm, solve_shifted)
from gpflow.linalg import IndefiniteShiftError, LinearSolveError, dense_solve_shifted

from conftest import CASE1, gaussian_start, random_field, random_params
from test_operator import sine_mode


def test_sine_eigenvector_solution():
    g = GridSpec(2.0, 0.125)
    u, lam = sine_mode(g, 3, 2)
    Hf = FrozenHamiltonian(g, PhysicsParams(), np.zeros((2, g.n, g.n)))
    tau = 0.8
    rhs = WaveField.from_components(g, u, -0.5j * u)
    x, rep = solve_shifted(Hf, tau, rhs)
    assert rep.converged
    exact = rhs / (1 + tau * (-0.5 * lam))
    assert l2_norm(x - exact) <= 1e-10 * l2_norm(exact)


def test_tiny_tau_is_identity(rng, small_grid):
    Hf = FrozenHamiltonian.at(random_field(rng, small_grid, True), PhysicsParams(**CASE1))
    rhs = random_field(rng, small_grid)
    x, _ = solve_shifted(Hf, 1e-12, rhs)
    assert l2_norm(x - rhs) <= 1e-9 * l2_norm(rhs)


@pytest.mark.parametrize("pre", list(Preconditioner))
def test_matches_dense_lu_case1(tiny_grid, pre):
    g = tiny_grid
    p = PhysicsParams(**CASE1)
    Hf = FrozenHamiltonian.at(gaussian_start(g), p)
    rhs = gaussian_start(g, vortex=True)
    for tau in (0.1, 1.0):
        x, rep = solve_shifted(Hf, tau, rhs, KrylovConfig(preconditioner=pre))
        ref = dense_solve_shifted(Hf, tau, rhs)
        assert l2_norm(x - ref) <= 1e-9 * l2_norm(ref)


def test_residual_contract(rng):
    for _ in range(10):
        g = GridSpec(1.0, 2.0 / rng.integers(2, 20))
        p = random_params(rng, nonneg=True)
        Hf = FrozenHamiltonian.at(random_field(rng, g, True), p)
        rhs = random_field(rng, g, True)
        tau = rng.uniform(0.05, 1.0)
        cfg = KrylovConfig(rel_tol=1e-10, abs_tol=1e-14)
        x, rep = solve_shifted(Hf, tau, rhs, cfg)
        res = l2_norm(apply_shifted(Hf, tau, x) - rhs)
        assert res <= cfg.rel_tol * l2_norm(rhs) + cfg.abs_tol
        assert rep.final_residual == pytest.approx(res, rel=1e-6, abs=1e-16)


def test_initial_guess_does_not_change_solution(rng, small_grid):
    Hf = FrozenHamiltonian.at(random_field(rng, small_grid, True), PhysicsParams(**CASE1))
    rhs = random_field(rng, small_grid, True)
    a, _ = solve_shifted(Hf, 0.5, rhs)
    b, _ = solve_shifted(Hf, 0.5, rhs, x0=random_field(rng, small_grid))
    assert l2_norm(a - b) <= 1e-9 * l2_norm(a)


def test_good_guess_converges_immediately(rng, small_grid):
    Hf = FrozenHamiltonian.at(random_field(rng, small_grid, True), PhysicsParams(**CASE1))
    rhs = random_field(rng, small_grid, True)
    a, _ = solve_shifted(Hf, 0.5, rhs, KrylovConfig(rel_tol=1e-13))
    _, rep = solve_shifted(Hf, 0.5, rhs, x0=a)
    assert rep.iterations == 0


def _indefinite(g):
    w = np.full((2, g.n, g.n), -500.0)
    return FrozenHamiltonian(g, PhysicsParams(), w)


def test_indefinite_shift_detected(rng, small_grid):
    with pytest.raises(IndefiniteShiftError, match="reduce tau"):
        solve_shifted(_indefinite(small_grid), 1.0, random_field(rng, small_grid))


def test_indefinite_minres_fallback(rng, small_grid):
    Hf = _indefinite(small_grid)
    rhs = random_field(rng, small_grid)
    cfg = KrylovConfig(allow_indefinite=True)
    x, rep = solve_shifted(Hf, 1.0, rhs, cfg)
    assert rep.method == "minres"
    assert l2_norm(apply_shifted(Hf, 1.0, x) - rhs) <= cfg.rel_tol * l2_norm(rhs) + cfg.abs_tol


def test_non_convergence_raises(rng, small_grid):
    Hf = FrozenHamiltonian.at(random_field(rng, small_grid, True), PhysicsParams(**CASE1))
    with pytest.raises(LinearSolveError) as info:
        solve_shifted(Hf, 1.0, random_field(rng, small_grid), KrylovConfig(max_iters=2))
    assert not info.value.report.converged


def test_diagonal_preconditioner_helps_large_potential(small_grid):
    g = small_grid
    X, Y = g.mesh()
    w = np.stack([1e4 * (X ** 2 + Y ** 2), 1e4 * (X ** 2 + Y ** 2)])
    Hf = FrozenHamiltonian(g, PhysicsParams(), w)
    rhs = gaussian_start(g)
    _, plain = solve_shifted(Hf, 1.0, rhs)
    x, pre = solve_shifted(Hf, 1.0, rhs, KrylovConfig(preconditioner=Preconditioner.DIAGONAL))
    assert pre.iterations < plain.iterations
    assert l2_norm(apply_shifted(Hf, 1.0, x) - rhs) <= 1e-10 * l2_norm(rhs) + 1e-14


def test_rejects_nonpositive_tau(small_grid):
    Hf = FrozenHamiltonian.linear(small_grid, PhysicsParams())
    with pytest.raises(ValueError):
        solve_shifted(Hf, -1.0, gaussian_start(small_grid))
    with pytest.raises(ValueError):
        dense_solve_shifted(Hf, 0.0, gaussian_start(small_grid))


def test_krylov_config_validation():
    with pytest.raises(ValueError):
        KrylovConfig(rel_tol=0)
    with pytest.raises(ValueError):
        KrylovConfig(max_iters=0)
