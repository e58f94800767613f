"""Model parameters, trapping potentials, coupled densities and coercivity constants."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .grid import GridMismatchError, GridSpec, WaveField


@dataclass(frozen=True)
class HarmonicPotential:
    """``V_i = gamma * (x^2 + y^2) / 2 + |beta| (optional) + offset``.

    ``offset`` is a manual constant shift applied to both components.
    """

    gamma: float = 1.0
    add_abs_beta: bool = True
    offset: float = 0.0


@dataclass(frozen=True)
class CustomPotential:
    """Tabulated potential values per component on a fixed grid."""

    grid: GridSpec
    v1: np.ndarray = field(compare=False)
    v2: np.ndarray = field(compare=False)

    def __post_init__(self):
        for v in (self.v1, self.v2):
            if np.shape(v) != self.grid.shape:
                raise GridMismatchError(f"table shape {np.shape(v)} != grid shape {self.grid.shape}")


Potential = Union[HarmonicPotential, CustomPotential]


class AssumptionWarning(UserWarning):
    """The interaction matrix violates the positivity assumption on K."""


@dataclass(frozen=True)
class PhysicsParams:
    k11: float = 0.0
    k12: float = 0.0
    k22: float = 0.0
    beta: float = 0.0
    omega1: float = 0.0
    omega2: float = 0.0
    potential: Potential = field(default_factory=HarmonicPotential)

    def __post_init__(self):
        if self.omega1 < 0 or self.omega2 < 0:
            raise ValueError("rotation frequencies must be non-negative")

    @property
    def k21(self) -> float:
        return self.k12

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.k11, self.k12], [self.k12, self.k22]], dtype=float)

    @property
    def k_max(self) -> float:
        """k_m = max |k_ij|."""
        return max(abs(self.k11), abs(self.k12), abs(self.k22))

    @property
    def omega_max(self) -> float:
        return max(self.omega1, self.omega2)

    def omega(self, component: int) -> float:
        return self.omega1 if component == 1 else self.omega2

    def interaction_ok(self) -> bool:
        """True if K is positive definite or entrywise non-negative."""
        nonneg = min(self.k11, self.k12, self.k22) >= 0
        posdef = self.k11 > 0 and self.k11 * self.k22 - self.k12 ** 2 > 0
        return nonneg or posdef

    def check_assumptions(self) -> bool:
        ok = self.interaction_ok()
        if not ok:
            warnings.warn(
                f"interaction matrix K={self.K.tolist()} is neither positive definite nor "
                "entrywise non-negative; dissipation guarantees do not apply",
                AssumptionWarning,
                stacklevel=2,
            )
        return ok


def eval_potential(p: PhysicsParams, g: GridSpec, component: int) -> np.ndarray:
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    pot = p.potential
    if isinstance(pot, CustomPotential):
        if pot.grid != g:
            raise GridMismatchError(f"custom potential tabulated on {pot.grid}, requested on {g}")
        return np.asarray(pot.v1 if component == 1 else pot.v2, dtype=float)
    X, Y = g.mesh()
    shift = (abs(p.beta) if pot.add_abs_beta else 0.0) + pot.offset
    return pot.gamma * (X * X + Y * Y) / 2.0 + shift


def potentials(p: PhysicsParams, g: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    return eval_potential(p, g, 1), eval_potential(p, g, 2)


def densities(psi: WaveField, p: PhysicsParams) -> tuple[np.ndarray, np.ndarray]:
    """Coupled densities rho_1 = k11|psi1|^2 + k12|psi2|^2, rho_2 = k12|psi1|^2 + k22|psi2|^2."""
    d = psi.data
    n1 = d[0].real ** 2 + d[0].imag ** 2
    n2 = d[1].real ** 2 + d[1].imag ** 2
    return p.k11 * n1 + p.k12 * n2, p.k12 * n1 + p.k22 * n2


@dataclass(frozen=True)
class CoercivityReport:
    alpha: float | None
    C0: float | None
    a_psi_hint: float | None
    satisfied: bool


def coercivity_constants(p: PhysicsParams, g: GridSpec) -> CoercivityReport:
    """Largest alpha with ``V_i >= (1+alpha)/2 * omega_i^2 r^2 + |beta|`` and C0 = alpha / (2(1+alpha)).

    Only harmonic potentials that include the ``|beta|`` shift (or an equivalent
    offset) are analysed; anything else reports ``satisfied=False``.
    ``a_psi_hint`` is left unset here, the solver fills in step-size advice.
    """
    pot = p.potential
    if not isinstance(pot, HarmonicPotential):
        return CoercivityReport(alpha=None, C0=None, a_psi_hint=None, satisfied=False)
    shift = (abs(p.beta) if pot.add_abs_beta else 0.0) + pot.offset
    if shift < abs(p.beta) or pot.gamma <= 0:
        return CoercivityReport(alpha=None, C0=None, a_psi_hint=None, satisfied=False)
    w = p.omega_max
    if w == 0.0:
        return CoercivityReport(alpha=math.inf, C0=0.5, a_psi_hint=None, satisfied=True)
    alpha = pot.gamma / (w * w) - 1.0
    if alpha <= 0:
        return CoercivityReport(alpha=alpha, C0=None, a_psi_hint=None, satisfied=False)
    return CoercivityReport(alpha=alpha, C0=alpha / (2.0 * (1.0 + alpha)), a_psi_hint=None, satisfied=True)
