"""Scalar acoustic metrics and dimensionless-number helpers.

Levels are referenced to 20 uPa, the standard reference pressure in air.
All functions are pure and accept plain floats; domain violations raise
:class:`~leakwave.errors.DomainError`.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DomainError, EnergyViolationError

#: Reference pressure in air [Pa].
P_REF = 20e-6

#: Energy tolerance for analytically produced power coefficients.
ENERGY_TOL_ANALYTIC = 1e-6
#: Energy tolerance for coefficients estimated by the measurement pipeline,
#: where spectral-estimation noise must not trip hard errors.
ENERGY_TOL_ESTIMATED = 0.02


def ispl(p_rms: float) -> float:
    """Incident sound pressure level 20*log10(p_rms / 20 uPa) [dB].

    ``p_rms`` is the root-mean-squared pressure of the sound [Pa].
    """
    if p_rms <= 0:
        raise DomainError("ispl requires a strictly positive RMS pressure")
    return 20.0 * math.log10(p_rms / P_REF)


def oispl(band_rms: Sequence[float]) -> float:
    """Overall level across frequency bands: 10*log10(sum p_i^2 / p_ref^2) [dB].

    ``band_rms`` holds the per-band RMS pressures [Pa]; entries must be
    non-negative with at least one strictly positive.
    """
    p = np.asarray(band_rms, dtype=np.float64)
    if p.size == 0:
        raise DomainError("oispl requires at least one band")
    if np.any(p < 0):
        raise DomainError("band RMS pressures must be non-negative")
    total = float(np.sum(p * p))
    if total <= 0:
        raise DomainError("oispl requires at least one non-zero band")
    return 10.0 * math.log10(total / P_REF**2)


def transmission_loss(tau: float) -> float:
    """TL = 10*log10(1/tau) [dB] from a power transmission ratio.

    Negative TL (gain, tau > 1) is returned as is: measurement pipelines
    legitimately produce it near noise floors, and the caller decides
    whether it signals a calibration fault.
    """
    if tau <= 0:
        raise DomainError("transmission ratio must be strictly positive")
    return 10.0 * math.log10(1.0 / tau)


def absorption_coefficient(
    r2: float, t2: float, energy_tol: float = ENERGY_TOL_ANALYTIC
) -> float:
    """Power absorption alpha = 1 - |R|^2 - |T|^2, clamped to [-tol, 1].

    Raises :class:`EnergyViolationError` when reflected plus transmitted
    power exceeds incident power beyond ``energy_tol``, which signals an
    inconsistent decomposition rather than physics.
    """
    if r2 < 0 or t2 < 0:
        raise DomainError("power coefficients must be non-negative")
    if r2 > 1 + energy_tol or t2 > 1 + energy_tol:
        raise DomainError("power coefficient exceeds 1 beyond tolerance")
    alpha = 1.0 - r2 - t2
    if alpha < -energy_tol:
        raise EnergyViolationError(
            f"R^2 + T^2 = {r2 + t2:.6g} exceeds 1 + {energy_tol:g}"
        )
    return min(alpha, 1.0)


def strouhal(f: float, length: float, a: float) -> float:
    """Strouhal number St = f*L/a comparing the acoustic period with the
    convective timescale through a constriction."""
    if f <= 0 or length <= 0 or a <= 0:
        raise DomainError("strouhal requires strictly positive inputs")
    return f * length / a


def stokes_wavelength(nu: float, f: float) -> float:
    """Wavelength of the oscillatory viscous (Stokes) layer, 2*sqrt(pi*nu/f) [m]."""
    if nu <= 0 or f <= 0:
        raise DomainError("stokes_wavelength requires strictly positive inputs")
    return 2.0 * math.sqrt(math.pi * nu / f)


def circular_duct_cutoff(diameter: float, c0: float) -> float:
    """Cut-on frequency of the first azimuthal mode of a rigid circular duct.

    f_c = 1.8412 * c0 / (pi * D).  The 1.8412 constant is the first
    non-trivial zero of J1', standard rigid-wall duct theory.
    """
    if diameter <= 0 or c0 <= 0:
        raise DomainError("circular_duct_cutoff requires strictly positive inputs")
    return 1.8412 * c0 / (math.pi * diameter)
