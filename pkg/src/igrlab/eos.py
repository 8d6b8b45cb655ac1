"""Ideal-gas (polytropic) equation of state in nondimensional form.

Temperature carries no gas constant, so ``temperature(rho, eps) == eps``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EosDomainError(ValueError):
    """Raised when a thermodynamic input is outside the admissible set."""

    def __init__(self, field: str, value):
        self.field = field
        super().__init__(f"{field} must be > 0, got min {np.min(value)!r}")


def _check(rho, eps):
    rho = np.asarray(rho, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if not np.all(rho > 0):
        raise EosDomainError("rho", rho)
    if not np.all(eps > 0):
        raise EosDomainError("eps", eps)
    return rho, eps


@dataclass(frozen=True)
class IdealGasEos:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")

    def pressure(self, rho, eps):
        rho, eps = _check(rho, eps)
        return (self.gamma - 1.0) * rho * eps

    def sound_speed_sq(self, rho, eps):
        rho, eps = _check(rho, eps)
        return self.gamma * (self.gamma - 1.0) * eps * np.ones_like(rho)

    def sound_speed(self, rho, eps):
        return np.sqrt(self.sound_speed_sq(rho, eps))

    def d3_rho_eps(self, rho, eps):
        """(g-1)(g-2)(g-3) eps / rho^3.

        This is the third isentropic density derivative of the *specific*
        energy eps(rho, s).  The third derivative of the energy density
        rho*eps is :meth:`d3_energy_density`.
        """
        rho, eps = _check(rho, eps)
        g = self.gamma
        return (g - 1.0) * (g - 2.0) * (g - 3.0) * eps / rho**3

    def d3_energy_density(self, rho, eps):
        """Third isentropic density derivative of rho*eps: g(g-1)(g-2) eps / rho^2."""
        rho, eps = _check(rho, eps)
        g = self.gamma
        return g * (g - 1.0) * (g - 2.0) * eps / rho**2

    def entropy(self, rho, eps):
        rho, eps = _check(rho, eps)
        g = self.gamma
        return np.log((g - 1.0) * eps * rho ** (1.0 - g))

    def eps_from_entropy(self, rho, s):
        rho = np.asarray(rho, dtype=float)
        if not np.all(rho > 0):
            raise EosDomainError("rho", rho)
        g = self.gamma
        return rho ** (g - 1.0) * np.exp(s) / (g - 1.0)

    def temperature(self, rho, eps):
        rho, eps = _check(rho, eps)
        return eps * np.ones_like(rho)

    def eps_from_pressure(self, rho, p):
        return np.asarray(p, dtype=float) / ((self.gamma - 1.0) * np.asarray(rho, dtype=float))
