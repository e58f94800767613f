"""Normalized gradient flow with semi-implicit discretization.

One step freezes the densities at the current iterate, solves

    (I + tau H_{Psi^n}) Psi_tilde = Psi^n,

and renormalizes ``Psi^{n+1} = Psi_tilde / ||Psi_tilde||``. The projection
multiplier ``lambda = (1 - ||Psi_tilde||) / (tau ||Psi_tilde||)`` is recorded
together with the energy so every step can be audited.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .energy import EnergyBreakdown, chemical_potential, energy
from .grid import WaveField, h1_seminorm_sq, inner_l2, l2_norm, linf_norm
from .linalg import KrylovConfig, solve_shifted
from .operator import FrozenHamiltonian, apply_h
from .physics import CoercivityReport, PhysicsParams

log = logging.getLogger(__name__)

# energy increase tolerated before a step counts as non-dissipative
MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class Backtrack:
    shrink: float = 0.5
    max_halvings: int = 20

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    max_steps: int = 100_000
    stop_tol: float = 1e-7
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    safeguard: Backtrack | None = None
    record_h1_increments: bool = True
    extrapolate_guess: bool = True

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    n: int
    energy: float
    lambda_: float
    mass: float
    tilde_l2: float
    inf_increment: float
    h1_increment_sq: float
    dissipation_ok: bool
    krylov_iters: int
    tau_used: float
    tilde_h1_sq: float = math.nan


@dataclass
class GroundStateResult:
    psi_g: WaveField
    energy: EnergyBreakdown
    mu: float
    steps: int
    records: list[IterationRecord]
    stationarity_residual: float
    converged: bool
    initial_energy: float
    lambda_pairing: float = math.nan

    @property
    def energies(self) -> np.ndarray:
        """Energy trajectory including the initial state."""
        return np.array([self.initial_energy] + [r.energy for r in self.records])

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.energies) <= MONOTONE_TOL))


class NormalizationError(ValueError):
    pass


class NoDissipativeStepError(RuntimeError):
    pass


def _step(psi_n: WaveField, p: PhysicsParams, cfg: SolverConfig, n: int,
          energy_n: float | None = None, warm: WaveField | None = None):
    if abs(l2_norm(psi_n) - 1.0) > 1e-10:
        raise NormalizationError(f"iterate not normalized: ||psi|| = {l2_norm(psi_n)!r}")
    Hf = FrozenHamiltonian.at(psi_n, p)
    need_energy_n = cfg.safeguard is not None and energy_n is None
    if need_energy_n:
        energy_n = energy(psi_n, p).total
    tau = cfg.tau
    halvings = 0
    total_iters = 0
    while True:
        tilde, rep = solve_shifted(Hf, tau, psi_n, cfg.krylov, x0=warm)
        total_iters += rep.iterations
        tnorm = l2_norm(tilde)
        nxt = tilde / tnorm
        e_next = energy(nxt, p).total
        if cfg.safeguard is None or e_next <= energy_n + MONOTONE_TOL:
            break
        if halvings >= cfg.safeguard.max_halvings:
            raise NoDissipativeStepError(
                f"no dissipative step found at n={n} after {halvings} reductions (tau={tau:g})")
        halvings += 1
        tau *= cfg.safeguard.shrink
        warm = None
        log.debug("step %d: energy rose, retrying with tau=%g", n, tau)
    inc = nxt - psi_n
    rec = IterationRecord(
        n=n,
        energy=e_next,
        lambda_=(1.0 - tnorm) / (tau * tnorm),
        mass=l2_norm(nxt) ** 2,
        tilde_l2=tnorm,
        inf_increment=linf_norm(inc),
        h1_increment_sq=h1_seminorm_sq(inc) if cfg.record_h1_increments else math.nan,
        dissipation_ok=(energy_n is None) or (e_next <= energy_n + MONOTONE_TOL),
        krylov_iters=total_iters,
        tau_used=tau,
        tilde_h1_sq=h1_seminorm_sq(tilde) if cfg.record_h1_increments else math.nan,
    )
    return nxt, rec, tilde


def gfsi_step(psi_n: WaveField, p: PhysicsParams, cfg: SolverConfig,
              energy_n: float | None = None, warm_start: WaveField | None = None
              ) -> tuple[WaveField, IterationRecord]:
    """Advance one GFSI step from a normalized iterate.

    ``energy_n`` (the energy of ``psi_n``) fills ``dissipation_ok``; it is
    computed on demand when a backtracking safeguard is configured.
    """
    nxt, rec, _ = _step(psi_n, p, cfg, 1, energy_n=energy_n, warm=warm_start)
    return nxt, rec


def _extrapolated_guess(psi: WaveField, tilde_prev: WaveField, inc: WaveField,
                        inc_prev: WaveField | None) -> WaveField:
    """CG starting point ``||tilde_prev|| * (psi + r * inc)``.

    ``tilde_prev`` is parallel to ``psi``; adding the last increment times the
    observed contraction rate ``r`` anticipates the next one. Only the CG
    starting point changes, never the solution.
    """
    rate = 0.0
    if inc_prev is not None:
        den = l2_norm(inc_prev) ** 2
        if den > 0.0:
            rate = min(max(inner_l2(inc, inc_prev) / den, 0.0), 1.0)
    return (psi + inc * rate) * l2_norm(tilde_prev)


def stationarity_residual(psi: WaveField, p: PhysicsParams, mu: float) -> float:
    """``||H_psi psi - mu psi||_inf / max(1, ||H_psi psi||_inf)``."""
    Hpsi = apply_h(FrozenHamiltonian.at(psi, p), psi)
    return linf_norm(Hpsi - mu * psi) / max(1.0, linf_norm(Hpsi))


def solve_ground_state(psi0: WaveField, p: PhysicsParams, cfg: SolverConfig,
                       callback: Callable[[IterationRecord], None] | None = None
                       ) -> GroundStateResult:
    """Iterate GFSI until ``||Psi^{n+1} - Psi^n||_inf / tau < stop_tol``.

    ``psi0`` must have unit mass to within 1e-6; it is renormalized exactly
    before the first step. Hitting ``max_steps`` returns ``converged=False``.
    """
    nrm = l2_norm(psi0)
    if abs(nrm - 1.0) > 1e-6:
        raise NormalizationError(f"initial data has ||psi0|| = {nrm!r}; normalize it first")
    psi = psi0 / nrm
    e_prev = energy(psi, p).total
    e0 = e_prev
    records: list[IterationRecord] = []
    warm = None
    inc = inc_prev = None
    converged = False
    for n in range(1, cfg.max_steps + 1):
        guess = warm
        if cfg.extrapolate_guess and warm is not None and inc is not None:
            guess = _extrapolated_guess(psi, warm, inc, inc_prev)
        psi_old = psi
        psi, rec, warm = _step(psi, p, cfg, n, energy_n=e_prev, warm=guess)
        inc_prev, inc = inc, psi - psi_old
        records.append(rec)
        e_prev = rec.energy
        if callback is not None:
            callback(rec)
        if rec.inf_increment / rec.tau_used < cfg.stop_tol:
            converged = True
            break
    eb = energy(psi, p)
    mu = chemical_potential(psi, p)
    res = stationarity_residual(psi, p, mu)
    lam_pair = float(mu)  # <H_psi psi, psi> for unit mass
    if converged and records:
        gap = abs(records[-1].lambda_ - lam_pair)
        log.debug("lambda from norm formula %.12g, from pairing %.12g (gap %.3e)",
                  records[-1].lambda_, lam_pair, gap)
    return GroundStateResult(
        psi_g=psi, energy=eb, mu=mu, steps=len(records), records=records,
        stationarity_residual=res, converged=converged, initial_energy=e0,
        lambda_pairing=lam_pair,
    )


@dataclass(frozen=True)
class AuditReport:
    monotone: bool
    first_increase: int | None
    bound_checked: bool
    first_bound_violation: int | None


def dissipation_audit(records: Sequence[IterationRecord], initial_energy: float,
                      coercivity: CoercivityReport | None = None) -> AuditReport:
    """Check the energy trajectory step by step.

    Plain monotonicity is ``E^{n+1} - E^n <= 1e-12``. When a satisfied
    coercivity report is supplied and increments were recorded, also checks
    ``E^{n+1} - E^n <= -(C0/2) |Psi^{n+1} - Psi^n|_{H^1}^2 + 1e-10``.
    Reported indices are the step numbers ``n`` of the offending records.
    """
    first_inc = None
    first_bound = None
    check_bound = (coercivity is not None and coercivity.satisfied and coercivity.C0 is not None
                   and all(not math.isnan(r.h1_increment_sq) for r in records))
    e_prev = initial_energy
    for r in records:
        dE = r.energy - e_prev
        if first_inc is None and dE > MONOTONE_TOL:
            first_inc = r.n
        if check_bound and first_bound is None and dE > -0.5 * coercivity.C0 * r.h1_increment_sq + 1e-10:
            first_bound = r.n
        e_prev = r.energy
    return AuditReport(monotone=first_inc is None, first_increase=first_inc,
                       bound_checked=check_bound, first_bound_violation=first_bound)


def heuristic_tau0(E0: float, p: PhysicsParams, C_user: float, d: int = 2) -> float:
    """Advisory step bound ``min(2 / C_tilde, 1 / (4 E0))``.

    ``C_tilde = (2 C k_m (C sqrt(E0))^{d/2})^{4/(4-d)}`` where ``C`` is the
    generic constant supplied as ``C_user``. Never enforced by the solver.
    """
    if not (E0 > 0 and C_user > 0):
        raise ValueError("E0 and C_user must be positive")
    c_e = C_user * math.sqrt(E0)
    c_tilde = (2.0 * C_user * p.k_max * c_e ** (d / 2.0)) ** (4.0 / (4.0 - d))
    if c_tilde == 0.0:
        return 1.0 / (4.0 * E0)
    return min(2.0 / c_tilde, 1.0 / (4.0 * E0))


def calibrate_c_user(E0: float, k_max: float, tau_boundary: float) -> float:
    """The ``C_user`` for which ``2 / C_tilde`` equals ``tau_boundary`` (d = 2)."""
    # 2 / (2 C k (C sqrt(E0)))^2 = tau  =>  C^2 = sqrt(2 / tau) / (2 k sqrt(E0))
    return math.sqrt(math.sqrt(2.0 / tau_boundary) / (2.0 * k_max * math.sqrt(E0)))
