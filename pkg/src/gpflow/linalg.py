"""Solvers for the shifted system (I + tau H) x = rhs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .grid import WaveField, l2_norm
from .kernels import backend
from .operator import FrozenHamiltonian, assemble_dense

log = logging.getLogger(__name__)


class Preconditioner(str, Enum):
    NONE = "none"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class KrylovConfig:
    """Inner-solve settings. ``max_iters=None`` means ``10 * 2N``."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_iters: int | None = None
    preconditioner: Preconditioner = Preconditioner.NONE
    allow_indefinite: bool = False

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool
    method: str = "cg"


class LinearSolveError(RuntimeError):
    def __init__(self, message: str, report: SolveReport | None = None):
        super().__init__(message)
        self.report = report


class IndefiniteShiftError(LinearSolveError):
    """CG met a direction with non-positive curvature."""


def _weighted_norm(h: float, sumsq: float) -> float:
    return h * float(np.sqrt(max(sumsq, 0.0)))


def _sumsq(a: np.ndarray) -> float:
    return float(np.sum(a.real * a.real) + np.sum(a.imag * a.imag))


def solve_shifted(Hf: FrozenHamiltonian, tau: float, rhs: WaveField,
                  cfg: KrylovConfig | None = None, x0: WaveField | None = None
                  ) -> tuple[WaveField, SolveReport]:
    """Conjugate gradients on (I + tau H) x = rhs with the real L2 pairing.

    Residuals are measured in the h^2-weighted L2 norm. The returned solution
    satisfies ``||(I + tau H) x - rhs|| <= rel_tol ||rhs|| + abs_tol`` as
    re-checked on the true (not recursively updated) residual.

    Raises
    ------
    IndefiniteShiftError
        A search direction with ``p^H A p <= 0`` was met and
        ``cfg.allow_indefinite`` is false.
    LinearSolveError
        No convergence within ``max_iters``.
    """
    cfg = cfg or KrylovConfig()
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    g = rhs.grid
    h = g.h
    p_ = Hf.params
    coords = g.coords
    b = np.ascontiguousarray(rhs.data)
    tol = cfg.rel_tol * l2_norm(rhs) + cfg.abs_tol
    max_iters = cfg.max_iters or 10 * 2 * g.size

    x = np.array(x0.data if x0 is not None else b, dtype=np.complex128, order="C")
    r = np.empty_like(x)
    ap = np.empty_like(x)

    def true_residual():
        backend.apply_shifted(x, Hf.w, coords, h, p_.omega1, p_.omega2, p_.beta, 1.0, tau, ap)
        np.subtract(b, ap, out=r)
        return _sumsq(r)

    diag = None
    if cfg.preconditioner == Preconditioner.DIAGONAL:
        diag = 1.0 + tau * (2.0 / (h * h) + Hf.w)

    it = 0
    rr = true_residual()
    while True:
        if _weighted_norm(h, rr) <= tol:
            break
        # (re)start from the current true residual
        if diag is None:
            z = r
            rz = rr
        else:
            z = r / diag
            rz = float(np.sum(r.real * z.real + r.imag * z.imag))
        p = z.copy()
        while it < max_iters:
            pap = backend.apply_shifted_dot(p, Hf.w, coords, h, p_.omega1, p_.omega2, p_.beta, 1.0, tau, ap)
            it += 1
            if pap <= 0.0:
                report = SolveReport(it, _weighted_norm(h, rr), False)
                if cfg.allow_indefinite:
                    log.warning("indefinite shifted operator at tau=%g; falling back to MINRES", tau)
                    return _minres(Hf, tau, rhs, cfg, x0, max_iters)
                raise IndefiniteShiftError("indefinite shift; reduce tau", report)
            alpha = rz / pap
            rr = backend.cg_update(x, r, p, ap, alpha)
            if _weighted_norm(h, rr) <= tol:
                break
            if diag is None:
                rz_new = rr
            else:
                z = r / diag
                rz_new = float(np.sum(r.real * z.real + r.imag * z.imag))
            backend.cg_direction(p, z, rz_new / rz)
            rz = rz_new
        rr = true_residual()
        if _weighted_norm(h, rr) <= tol:
            break
        if it >= max_iters:
            report = SolveReport(it, _weighted_norm(h, rr), False)
            raise LinearSolveError(f"CG did not converge in {it} iterations "
                                   f"(residual {report.final_residual:.3e} > {tol:.3e})", report)
    return WaveField(g, x), SolveReport(it, _weighted_norm(h, rr), True)


def _minres(Hf, tau, rhs, cfg, x0, max_iters):
    g = rhs.grid
    shape = rhs.data.shape
    n = rhs.data.size

    # Hermitian complex system as the equivalent real symmetric one [re; im]
    def split(z):
        return np.concatenate([z.real, z.imag])

    def mv(v):
        z = (v[:n] + 1j * v[n:]).reshape(shape)
        return split(Hf.shifted_matvec(tau, z).ravel())

    A = spla.LinearOperator((2 * n, 2 * n), matvec=mv, dtype=np.float64)
    b = split(rhs.data.ravel())
    tol = cfg.rel_tol * l2_norm(rhs) + cfg.abs_tol
    xr = split((x0.data if x0 is not None else rhs.data).ravel())
    res = np.inf
    ok = False
    # MINRES tracks a recursive residual; correct against the true one
    for _ in range(5):
        r = b - mv(xr)
        res = g.h * float(np.linalg.norm(r))
        if res <= tol:
            ok = True
            break
        rnorm = np.linalg.norm(r)
        dx, _ = spla.minres(A, r, rtol=0.1 * tol / (g.h * rnorm), maxiter=max_iters)
        xr = xr + dx
    xf = WaveField(g, (xr[:n] + 1j * xr[n:]).reshape(shape))
    report = SolveReport(-1, res, ok, method="minres")
    if not ok:
        raise LinearSolveError(f"MINRES fallback failed (residual {res:.3e} > {tol:.3e})", report)
    return xf, report


def dense_solve_shifted(Hf: FrozenHamiltonian, tau: float, rhs: WaveField) -> WaveField:
    """Direct LU solve of the assembled (I + tau H); small grids only."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    H = assemble_dense(Hf)
    herm_dev = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if herm_dev > 1e-13 * max(1.0, np.max(np.abs(H))):
        raise LinearSolveError(f"assembled operator not Hermitian (deviation {herm_dev:.3e})")
    A = np.eye(H.shape[0]) + tau * H
    try:
        x = scipy.linalg.solve(A, rhs.data.ravel())
    except scipy.linalg.LinAlgError as exc:
        raise LinearSolveError(f"singular shifted matrix: {exc}") from exc
    return WaveField(rhs.grid, x.reshape(rhs.data.shape))
