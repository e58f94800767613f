"""Dense reference computations for small grids.

Used by the test suite and ``gpflow validate`` to cross-check the
matrix-free path. Nothing in the solver imports this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grid import GridSpec, WaveField, l2_norm
from .linalg import dense_solve_shifted
from .operator import FrozenHamiltonian, assemble_dense
from .physics import PhysicsParams

ORACLE_MAX_N = 16


@dataclass
class DenseReference:
    grid: GridSpec
    matrix: np.ndarray

    @classmethod
    def build(cls, Hf: FrozenHamiltonian) -> "DenseReference":
        if Hf.grid.n > ORACLE_MAX_N:
            raise ValueError(f"oracle grids limited to n <= {ORACLE_MAX_N}")
        A = assemble_dense(Hf)
        dev = np.max(np.abs(A - A.conj().T))
        if dev > 1e-13 * max(1.0, np.max(np.abs(A))):
            raise AssertionError(f"assembled matrix not Hermitian: {dev:.3e}")
        return cls(Hf.grid, A)

    def to_field(self, vec: np.ndarray) -> WaveField:
        n = self.grid.n
        return WaveField(self.grid, np.asarray(vec).reshape(2, n, n))

    @staticmethod
    def to_vector(f: WaveField) -> np.ndarray:
        return f.data.ravel()


def linear_ground_state_dense(p: PhysicsParams, g: GridSpec) -> tuple[float, WaveField]:
    """Smallest eigenpair of the density-free operator (K must vanish)."""
    if p.k11 or p.k12 or p.k22:
        raise ValueError("linear oracle requires K = 0")
    ref = DenseReference.build(FrozenHamiltonian.linear(g, p))
    vals, vecs = scipy.linalg.eigh(ref.matrix, subset_by_index=[0, 0])
    psi = ref.to_field(vecs[:, 0])
    return float(vals[0]), psi / l2_norm(psi)


def linear_ground_space_dense(p: PhysicsParams, g: GridSpec, tol: float = 1e-9
                              ) -> tuple[float, list[WaveField]]:
    """Smallest eigenvalue and an orthonormal basis of its eigenspace (K must vanish).

    With beta = 0 the components decouple and the ground level is at least
    doubly degenerate, so a single eigenvector is not unique.
    """
    if p.k11 or p.k12 or p.k22:
        raise ValueError("linear oracle requires K = 0")
    ref = DenseReference.build(FrozenHamiltonian.linear(g, p))
    vals, vecs = scipy.linalg.eigh(ref.matrix)
    keep = np.flatnonzero(vals <= vals[0] + tol * max(1.0, abs(vals[0])))
    basis = [ref.to_field(vecs[:, k]) for k in keep]
    return float(vals[0]), [b / l2_norm(b) for b in basis]


def eigenspace_distance(psi: WaveField, basis: list[WaveField]) -> float:
    """L2 distance from ``psi`` to the span of an orthonormal ``basis``."""
    h2 = psi.grid.h ** 2
    proj = psi * 0.0
    for b in basis:
        proj = proj + b * (h2 * np.vdot(b.data, psi.data))
    return l2_norm(psi - proj)


def gfsi_step_dense(psi_n: WaveField, p: PhysicsParams, tau: float) -> WaveField:
    """One GFSI step with a dense LU solve in place of CG."""
    Hf = FrozenHamiltonian.at(psi_n, p)
    tilde = dense_solve_shifted(Hf, tau, psi_n)
    return tilde / l2_norm(tilde)


def phase_aligned_distance(a: WaveField, b: WaveField) -> float:
    """``min_theta ||a - e^{i theta} b||_{L2}``."""
    h2 = a.grid.h ** 2
    z = h2 * np.vdot(b.data, a.data)
    phase = z / abs(z) if abs(z) > 0 else 1.0
    return l2_norm(a - b * phase)
