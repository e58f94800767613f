"""Discrete energy functional, chemical potential and the energy gradient pairing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import WaveField, check_same_grid, h1_seminorm_sq, inner_l2
from .operator import FrozenHamiltonian, apply_h, apply_lz
from .physics import PhysicsParams, densities, potentials


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    interaction: float
    rotation: float
    josephson: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.interaction + self.rotation + self.josephson

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "interaction": self.interaction,
            "rotation": self.rotation,
            "josephson": self.josephson,
            "total": self.total,
        }


def _interaction_sum(psi: WaveField, p: PhysicsParams) -> float:
    """h^2 sum (rho_1 |psi_1|^2 + rho_2 |psi_2|^2)."""
    r1, r2 = densities(psi, p)
    d = psi.data
    n1 = d[0].real ** 2 + d[0].imag ** 2
    n2 = d[1].real ** 2 + d[1].imag ** 2
    h = psi.grid.h
    return float(h * h * (np.sum(r1 * n1) + np.sum(r2 * n2)))


def energy(psi: WaveField, p: PhysicsParams) -> EnergyBreakdown:
    g = psi.grid
    h2 = g.h * g.h
    d = psi.data
    v1, v2 = potentials(p, g)
    n1 = d[0].real ** 2 + d[0].imag ** 2
    n2 = d[1].real ** 2 + d[1].imag ** 2

    kinetic = 0.5 * h1_seminorm_sq(psi)
    potential = float(h2 * (np.sum(v1 * n1) + np.sum(v2 * n2)))
    interaction = 0.5 * _interaction_sum(psi, p)
    rotation = 0.0
    for c, om in ((0, p.omega1), (1, p.omega2)):
        if om == 0.0:
            continue
        pairing = h2 * np.vdot(d[c], apply_lz(g, d[c]))
        # Lz_h is Hermitian, so the pairing is real up to rounding
        if abs(pairing.imag) > 1e-12 * max(1.0, abs(pairing.real)) + 1e-12:
            raise ArithmeticError(f"rotation pairing has imaginary part {pairing.imag:.3e}")
        rotation -= om * float(pairing.real)
    josephson = float(2.0 * p.beta * h2 * np.sum(d[0].real * d[1].real + d[0].imag * d[1].imag))
    return EnergyBreakdown(kinetic, potential, interaction, rotation, josephson)


def total_energy(psi: WaveField, p: PhysicsParams) -> float:
    return energy(psi, p).total


def chemical_potential(psi: WaveField, p: PhysicsParams) -> float:
    """mu = E(psi) + 1/2 h^2 sum (rho_1 |psi_1|^2 + rho_2 |psi_2|^2)."""
    return energy(psi, p).total + 0.5 * _interaction_sum(psi, p)


def energy_gradient_pairing(psi: WaveField, phi: WaveField, p: PhysicsParams) -> float:
    """Directional derivative of E at psi along phi, ``2 (H_psi psi, phi)``."""
    check_same_grid(psi, phi)
    Hf = FrozenHamiltonian.at(psi, p)
    return 2.0 * inner_l2(apply_h(Hf, psi), phi)
