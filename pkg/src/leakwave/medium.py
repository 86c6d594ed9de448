"""Thermophysical state of the propagation medium."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Medium:
    """Quiescent gas properties feeding the wavenumber and metric formulas.

    Attributes:
        c0: speed of sound [m/s]
        rho0: ambient density [kg/m^3]
        mu: dynamic viscosity [Pa s]; zero selects the inviscid limit
        gamma: specific heat ratio
        prandtl: Prandtl number
    """

    c0: float = 343.0
    rho0: float = 1.204
    mu: float = 1.825e-5
    gamma: float = 1.4
    prandtl: float = 0.71

    def __post_init__(self):
        if self.c0 <= 0 or self.rho0 <= 0 or self.prandtl <= 0:
            raise DomainError("c0, rho0 and prandtl must be strictly positive")
        if self.mu < 0:
            raise DomainError("dynamic viscosity must be non-negative")
        if self.gamma <= 1:
            raise DomainError("specific heat ratio must exceed 1")

    @classmethod
    def air_standard(cls) -> "Medium":
        """Dry air at 20 degC, 1 atm: c0 = 343 m/s, rho0 = 1.204 kg/m^3,
        mu = 1.825e-5 Pa s, gamma = 1.4, Pr = 0.71."""
        return cls()

    @property
    def kinematic_viscosity(self) -> float:
        """nu = mu / rho0 [m^2/s]."""
        return self.mu / self.rho0

    def inviscid(self) -> "Medium":
        """Copy of this medium with viscosity switched off."""
        return Medium(self.c0, self.rho0, 0.0, self.gamma, self.prandtl)
