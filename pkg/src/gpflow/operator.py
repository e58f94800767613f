"""Matrix-free coupled Hamiltonian with densities frozen at an iterate.

For component i the operator acts as

    -1/2 Lap_h u_i + (V_i + rho_i) u_i - omega_i Lz_h u_i + beta u_{other}

with the 5-point Laplacian and a central-difference angular momentum, both
using zero Dirichlet ghost values. Axis convention: ``x`` runs along the last
array axis, ``y`` along the middle one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridMismatchError, GridSpec, WaveField
from .kernels import backend
from .physics import PhysicsParams, densities, potentials

DENSE_MAX_N = 32


class GridTooLargeError(ValueError):
    pass


def apply_laplacian(g: GridSpec, u: np.ndarray) -> np.ndarray:
    """5-point Laplacian of one ``(n, n)`` complex component."""
    u = np.ascontiguousarray(u, dtype=np.complex128)
    out = np.empty_like(u)
    backend.laplacian(u, g.h, out)
    return out


def apply_lz(g: GridSpec, u: np.ndarray) -> np.ndarray:
    """``-i (x d/dy - y d/dx) u`` by central differences."""
    u = np.ascontiguousarray(u, dtype=np.complex128)
    out = np.empty_like(u)
    backend.lz(u, g.coords, g.h, out)
    return out


@dataclass(frozen=True)
class FrozenHamiltonian:
    """H_Psi with the multiplication fields ``w_i = V_i + rho_i`` fixed.

    Build with :meth:`at` to freeze the densities of an iterate.
    """

    grid: GridSpec
    params: PhysicsParams
    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        if w.shape != (2, self.grid.n, self.grid.n):
            raise ValueError(f"frozen fields must have shape {(2, self.grid.n, self.grid.n)}")
        if not np.isfinite(w).all():
            raise ValueError("frozen fields contain non-finite values")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @classmethod
    def at(cls, psi: WaveField, params: PhysicsParams, density_scale: float = 1.0) -> "FrozenHamiltonian":
        """Freeze at ``psi``. ``density_scale=0.5`` gives the operator whose
        quadratic form is the energy."""
        v1, v2 = potentials(params, psi.grid)
        r1, r2 = densities(psi, params)
        return cls(psi.grid, params, np.stack([v1 + density_scale * r1, v2 + density_scale * r2]))

    @classmethod
    def linear(cls, grid: GridSpec, params: PhysicsParams) -> "FrozenHamiltonian":
        """The density-free operator (potential only)."""
        v1, v2 = potentials(params, grid)
        return cls(grid, params, np.stack([v1, v2]))

    def _apply(self, u: np.ndarray, shift: float, scale: float) -> np.ndarray:
        u = np.ascontiguousarray(u, dtype=np.complex128)
        out = np.empty_like(u)
        p = self.params
        backend.apply_shifted(u, self.w, self.grid.coords, self.grid.h,
                              p.omega1, p.omega2, p.beta, shift, scale, out)
        return out

    def matvec(self, u: np.ndarray) -> np.ndarray:
        return self._apply(u, 0.0, 1.0)

    def shifted_matvec(self, tau: float, u: np.ndarray) -> np.ndarray:
        return self._apply(u, 1.0, tau)


def _check_grid(Hf: FrozenHamiltonian, u: WaveField) -> None:
    if u.grid != Hf.grid:
        raise GridMismatchError(f"field on {u.grid}, operator on {Hf.grid}")


def apply_h(Hf: FrozenHamiltonian, u: WaveField) -> WaveField:
    _check_grid(Hf, u)
    return WaveField(u.grid, Hf.matvec(u.data))


def apply_shifted(Hf: FrozenHamiltonian, tau: float, u: WaveField) -> WaveField:
    """``(I + tau H) u``."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    _check_grid(Hf, u)
    return WaveField(u.grid, Hf.shifted_matvec(tau, u.data))


def flat_index(g: GridSpec, c: int, iy: int, ix: int) -> int:
    return c * g.size + iy * g.n + ix


def assemble_dense(Hf: FrozenHamiltonian) -> np.ndarray:
    """Explicit ``2N x 2N`` matrix in (component, y, x) row-major order.

    Assembled node by node from the stencil coefficients, independently of
    the matrix-free kernels.
    """
    g = Hf.grid
    n = g.n
    if n > DENSE_MAX_N:
        raise GridTooLargeError(f"dense assembly limited to n <= {DENSE_MAX_N}, got {n}")
    p = Hf.params
    h = g.h
    xs = g.coords
    N2 = 2 * g.size
    A = np.zeros((N2, N2), dtype=np.complex128)
    lap_c = -0.5 / (h * h)
    rot_c = 1.0 / (2.0 * h)
    for c in range(2):
        om = p.omega1 if c == 0 else p.omega2
        for iy in range(n):
            for ix in range(n):
                row = flat_index(g, c, iy, ix)
                A[row, row] += 2.0 / (h * h) + Hf.w[c, iy, ix]
                A[row, flat_index(g, 1 - c, iy, ix)] += p.beta
                # -omega Lz u = i omega (x du/dy - y du/dx)
                for d in (-1, 1):
                    if 0 <= ix + d < n:
                        col = flat_index(g, c, iy, ix + d)
                        A[row, col] += lap_c
                        A[row, col] += 1j * om * (-xs[iy]) * d * rot_c
                    if 0 <= iy + d < n:
                        col = flat_index(g, c, iy + d, ix)
                        A[row, col] += lap_c
                        A[row, col] += 1j * om * xs[ix] * d * rot_c
    return A
