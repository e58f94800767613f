import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpflow import (Backtrack, GridSpec, KrylovConfig, PhysicsParams, SolverConfig, coercivity_constants, dissipation_audit, energy, gfsi_step, heuristic_tau0,
                    l2_norm, solve_ground_state)
from gpflow.gfsi import (IterationRecord, NoDissipativeStepError, NormalizationError,
                         calibrate_c_user)
from gpflow.oracle import gfsi_step_dense, linear_ground_state_dense, phase_aligned_distance

from conftest import CASE1, CASE2, gaussian_start, random_field, random_params


def test_linear_eigenfunction_is_fixed_point():
    g = GridSpec(2.0, 0.25)
    p = PhysicsParams(beta=0.4, omega1=0.3, omega2=0.1)
    mu, psi = linear_ground_state_dense(p, g)
    nxt, rec = gfsi_step(psi, p, SolverConfig(tau=0.7, krylov=KrylovConfig(rel_tol=1e-13)))
    assert phase_aligned_distance(nxt, psi) <= 1e-9
    assert l2_norm(nxt - psi) <= 1e-9
    assert rec.lambda_ == pytest.approx(mu, abs=1e-8)


def test_step_matches_dense(rng, tiny_grid):
    for _ in range(5):
        psi = random_field(rng, tiny_grid, True)
        p = random_params(rng)
        tau = rng.uniform(0.05, 1.0)
        nxt, _ = gfsi_step(psi, p, SolverConfig(tau=tau, krylov=KrylovConfig(allow_indefinite=True)))
        assert np.max(np.abs(nxt.data - gfsi_step_dense(psi, p, tau).data)) <= 1e-9


def test_step_requires_normalized_input(rng, small_grid):
    psi = random_field(rng, small_grid)
    with pytest.raises(NormalizationError):
        gfsi_step(psi, PhysicsParams(), SolverConfig(tau=0.1))


def test_solve_normalizes_nearly_unit_data(small_grid):
    psi = gaussian_start(small_grid) * (1 + 5e-7)
    res = solve_ground_state(psi, PhysicsParams(), SolverConfig(tau=1.0, max_steps=3))
    assert res.records[0].mass == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NormalizationError):
        solve_ground_state(psi * 1.01, PhysicsParams(), SolverConfig(tau=1.0))


def test_solver_config_validation():
    for bad in (dict(tau=0.0), dict(tau=1.0, stop_tol=0.0), dict(tau=1.0, max_steps=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    with pytest.raises(ValueError):
        Backtrack(shrink=1.0)


def test_step_record_fields(small_grid):
    p = PhysicsParams(**CASE1)
    psi = gaussian_start(small_grid)
    e0 = energy(psi, p).total
    nxt, rec = gfsi_step(psi, p, SolverConfig(tau=0.5), energy_n=e0)
    tnorm = rec.tilde_l2
    assert rec.lambda_ == pytest.approx((1 - tnorm) / (0.5 * tnorm), rel=1e-14)
    assert rec.energy == pytest.approx(energy(nxt, p).total, rel=1e-14)
    assert rec.inf_increment == pytest.approx(np.max(np.abs(nxt.data - psi.data)), rel=1e-14)
    assert rec.dissipation_ok == (rec.energy <= e0 + 1e-12)
    assert rec.tau_used == 0.5 and rec.krylov_iters > 0


@pytest.mark.parametrize("case,tau", [(CASE1, 1.0), (CASE1, 0.1), (CASE2, 0.5)])
def test_per_step_invariants(case, tau):
    g = GridSpec(4.0, 0.25)
    p = PhysicsParams(**case)
    res = solve_ground_state(gaussian_start(g), p, SolverConfig(tau=tau, max_steps=40))
    rep = coercivity_constants(p, g)
    e_prev = res.initial_energy
    for r in res.records:
        assert abs(r.mass - 1) <= 1e-12
        assert r.tilde_l2 <= 1 + 1e-8
        assert r.lambda_ >= -1e-8
        if min(p.k11, p.k12, p.k22) >= 0 and rep.satisfied:
            assert r.tilde_h1_sq <= (2 / rep.C0) * e_prev + 1e-8
        e_prev = r.energy


def test_linear_harmonic_ground_state():
    g = GridSpec(8.0, 0.125)
    res = solve_ground_state(gaussian_start(g), PhysicsParams(), SolverConfig(tau=1.0))
    assert res.converged
    assert abs(res.energy.total - 1.0) <= 5e-3
    assert res.stationarity_residual < 1e-5
    assert res.records[-1].inf_increment / 1.0 < 1e-7


def test_converged_result_consistency():
    g = GridSpec(4.0, 0.25)
    p = PhysicsParams(**CASE2)
    res = solve_ground_state(gaussian_start(g), p, SolverConfig(tau=1.0))
    assert res.converged and res.monotone
    assert res.stationarity_residual <= 100 * 1e-7
    assert abs(res.records[-1].lambda_ - res.mu) <= 1e-4
    assert res.energies[0] == res.initial_energy
    assert len(res.energies) == res.steps + 1


def test_max_steps_returns_unconverged(small_grid):
    res = solve_ground_state(gaussian_start(small_grid), PhysicsParams(**CASE1),
                             SolverConfig(tau=0.1, max_steps=3))
    assert not res.converged and res.steps == 3 and len(res.records) == 3


def test_extrapolated_guess_leaves_iterates_unchanged(small_grid):
    p = PhysicsParams(**CASE1)
    psi0 = gaussian_start(small_grid)
    kry = KrylovConfig(rel_tol=1e-13)
    a = solve_ground_state(psi0, p, SolverConfig(tau=0.5, max_steps=15, krylov=kry))
    b = solve_ground_state(psi0, p, SolverConfig(tau=0.5, max_steps=15, krylov=kry,
                                                 extrapolate_guess=False))
    assert l2_norm(a.psi_g - b.psi_g) <= 1e-10
    assert sum(r.krylov_iters for r in a.records) <= sum(r.krylov_iters for r in b.records)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), theta=st.floats(0, 2 * math.pi))
def test_phase_equivariance(seed, theta):
    rng = np.random.default_rng(seed)
    g = GridSpec(1.5, 0.25)
    p = random_params(rng, nonneg=True)
    psi0 = random_field(rng, g, True)
    cfg = SolverConfig(tau=0.5, max_steps=5, krylov=KrylovConfig(rel_tol=1e-14, abs_tol=1e-16),
                       extrapolate_guess=False)
    rot = np.exp(1j * theta)
    base = [psi0]
    turned = [psi0 * rot]
    for _ in range(5):
        base.append(gfsi_step(base[-1], p, cfg)[0])
        turned.append(gfsi_step(turned[-1], p, cfg)[0])
    for a, b in zip(base, turned):
        assert np.max(np.abs(a.data * rot - b.data)) <= 1e-10


STRONG = dict(k11=10000.0, k12=8000.0, k22=10000.0, beta=-1.0)


def test_strong_interaction_large_tau_not_monotone():
    g = GridSpec(8.0, 0.125)
    res = solve_ground_state(gaussian_start(g), PhysicsParams(**STRONG), SolverConfig(tau=1.0, max_steps=400))
    audit = dissipation_audit(res.records, res.initial_energy)
    assert not audit.monotone
    assert audit.first_increase is not None and not res.monotone


def test_backtracking_restores_monotonicity():
    g = GridSpec(8.0, 0.125)
    cfg = SolverConfig(tau=1.0, max_steps=400, safeguard=Backtrack())
    res = solve_ground_state(gaussian_start(g), PhysicsParams(**STRONG), cfg)
    assert res.monotone
    assert any(r.tau_used < 1.0 for r in res.records)
    assert all(r.dissipation_ok for r in res.records)


def test_backtracking_gives_up(small_grid):
    cfg = SolverConfig(tau=1.0, safeguard=Backtrack(max_halvings=0))
    p = PhysicsParams(**STRONG)
    psi = gaussian_start(small_grid)
    # an unreachable reference energy makes every trial step an increase
    e_low = energy(psi, p).total - 1e6
    with pytest.raises(NoDissipativeStepError, match="no dissipative step"):
        gfsi_step(psi, p, cfg, energy_n=e_low)


def _rec(n, e, h1=0.0):
    return IterationRecord(n=n, energy=e, lambda_=0.0, mass=1.0, tilde_l2=1.0, inf_increment=0.0,
                           h1_increment_sq=h1, dissipation_ok=True, krylov_iters=0, tau_used=1.0)


def test_audit_constant_energy():
    recs = [_rec(n, 2.0) for n in range(1, 6)]
    rep = dissipation_audit(recs, 2.0)
    assert rep.monotone and rep.first_increase is None and not rep.bound_checked


def test_audit_reports_first_increase_and_bound():
    recs = [_rec(1, 1.9, 0.01), _rec(2, 1.8, 0.01), _rec(3, 1.85, 0.01), _rec(4, 1.9, 0.0)]
    cr = coercivity_constants(PhysicsParams(**CASE1), GridSpec(4.0, 0.25))
    rep = dissipation_audit(recs, 2.0, cr)
    assert rep.first_increase == 3
    assert rep.bound_checked and rep.first_bound_violation == 3
    tight = [_rec(1, 2.0 - 0.1 * cr.C0, 1.0)]
    assert dissipation_audit(tight, 2.0, cr).first_bound_violation == 1


def test_audit_on_real_run_case1():
    g = GridSpec(4.0, 1 / 16)
    p = PhysicsParams(**CASE1)
    res = solve_ground_state(gaussian_start(g), p, SolverConfig(tau=0.5))
    rep = dissipation_audit(res.records, res.initial_energy, coercivity_constants(p, g))
    assert rep.monotone and rep.bound_checked


def test_heuristic_tau0_min_selection():
    p = PhysicsParams(k11=1.0)
    E0 = 2.0
    assert heuristic_tau0(E0, p, C_user=1e-3) == 1 / (4 * E0)
    c = 10.0
    c_tilde = (2 * c * 1.0 * (c * math.sqrt(E0))) ** 2
    assert heuristic_tau0(E0, p, C_user=c) == pytest.approx(2 / c_tilde, rel=1e-14)
    with pytest.raises(ValueError):
        heuristic_tau0(0.0, p, 1.0)


@settings(max_examples=50, deadline=None)
@given(k1=st.floats(0, 1e5), k2=st.floats(0, 1e5), E0=st.floats(0.1, 100), c=st.floats(1e-3, 10))
def test_heuristic_tau0_monotone_in_interaction(k1, k2, E0, c):
    lo, hi = sorted((k1, k2))
    assert heuristic_tau0(E0, PhysicsParams(k11=hi), c) <= heuristic_tau0(E0, PhysicsParams(k11=lo), c)


def test_calibrated_threshold_decreases_with_interaction():
    g = GridSpec(8.0, 0.125)
    psi = gaussian_start(g)

    def params(k):
        return PhysicsParams(k11=k, k12=0.8 * k, k22=k, beta=-1.0)

    c = calibrate_c_user(energy(psi, params(4000)).total, 4000, 0.8)
    # at the calibration point 2 / C_tilde equals the boundary step
    p0 = params(4000)
    E0 = energy(psi, p0).total
    assert 2 / (2 * c * 4000 * c * math.sqrt(E0)) ** 2 == pytest.approx(0.8, rel=1e-12)
    taus = [heuristic_tau0(energy(psi, params(k)).total, params(k), c) for k in (1000, 4000, 5000, 10000, 15000)]
    assert all(a >= b for a, b in zip(taus, taus[1:]))
