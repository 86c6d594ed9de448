"""Circular-orifice leak transmission via a coupled interface system.

A leak path of cross-section S2 and length L connects an outer duct of
section S1 to an inner duct of section S3, anechoically terminated.
Plane waves on the three segments carry complex amplitudes

    region 1 (x < 0):  A e^{-ikx} + B e^{+ikx}
    region 2 (leak):   C e^{-ikx} + D e^{+ikx}
    region 3 (x > L):  E e^{-ikx}

Pressure and volumetric-flow continuity at both interfaces give four
homogeneous equations M p = 0 in p = [A, B, C, D, E]; normalizing A = 1
turns them into a 4x4 inhomogeneous solve.  The propagation length inside
the exponentials is the end-corrected L_eff = L + 0.821 r (flanged
circular opening, applied once to the total length).  Narrow-duct
viscothermal dissipation enters through the complex wavenumber

    k = (w/c0) [1 + (1-i)/r sqrt(mu/(2 rho0 w)) (1 + (gamma-1)/sqrt(Pr))]

with w = 2 pi f, whose negative imaginary part makes the forward wave
e^{-ikx} decay with x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateGeometryError, DomainError, EnergyViolationError
from .medium import Medium
from .metrics import ENERGY_TOL_ANALYTIC
from .signals import Spectrum, SpectrumKind

#: End-correction coefficient for a flanged circular opening (L_eff = L + 0.821 r).
END_CORRECTION = 0.821

#: Condition-number guard for the 4x4 interface solve.
CONDITION_LIMIT = 1e12

#: Residual acceptance for the solved amplitudes, relative to ||M||.
RESIDUAL_LIMIT = 1e-12


@dataclass(frozen=True)
class OrificePlateSpec:
    """A circular-orifice plate mounted flush in a duct bore.

    ``area_ratio`` is the open-area fraction relative to the bore,
    (inner_diameter / bore_diameter)^2.
    """

    label: str
    inner_diameter: float
    thickness: float
    area_ratio: float
    bore_diameter: float

    def __post_init__(self):
        if min(self.inner_diameter, self.thickness, self.bore_diameter) <= 0:
            raise DomainError("plate dimensions must be strictly positive")
        if not 0 < self.area_ratio <= 1:
            raise DomainError("area_ratio must lie in (0, 1]")
        implied = (self.inner_diameter / self.bore_diameter) ** 2
        if abs(implied - self.area_ratio) > 1e-9 * max(self.area_ratio, 1e-12):
            raise DomainError(
                f"area_ratio {self.area_ratio:g} inconsistent with diameters "
                f"(implies {implied:g})"
            )

    @classmethod
    def from_area_ratio(
        cls, label: str, area_ratio: float, bore_diameter: float, thickness: float
    ) -> "OrificePlateSpec":
        """Build from the exact open-area fraction; the inner diameter follows
        as bore * sqrt(ratio)."""
        return cls(
            label=label,
            inner_diameter=bore_diameter * math.sqrt(area_ratio),
            thickness=thickness,
            area_ratio=area_ratio,
            bore_diameter=bore_diameter,
        )


#: Bore of the reference impedance tube [m].
TUBE_BORE_DIAMETER = 0.0254

#: The five steel orifice plates of the reference experiment, keyed by
#: plate number.  Open-area ratios are exact; thickness is 0.125 bores.
REFERENCE_PLATES: dict[int, OrificePlateSpec] = {
    n: OrificePlateSpec.from_area_ratio(
        label, ratio, TUBE_BORE_DIAMETER, 0.125 * TUBE_BORE_DIAMETER
    )
    for n, (label, ratio) in {
        1: ("0.5% Orifice Plate", 0.005),
        2: ("1% Orifice Plate", 0.010),
        3: ("5% Orifice Plate", 0.050),
        4: ("10% Orifice Plate", 0.100),
        5: ("100% Orifice Plate", 1.000),
    }.items()
}


@dataclass(frozen=True)
class LeakGeometry:
    """Geometric inputs of the interface system.

    area_outer / area_leak / area_inner are S1 / S2 / S3 [m^2]; ``length``
    is the physical leak length [m] and ``radius`` the equivalent circular
    radius used in the end correction and the viscous wavenumber.  For an
    irregular leak the radius is the caller's modeling choice; the
    ``circular`` constructor derives it from the leak area.
    """

    area_outer: float
    area_leak: float
    area_inner: float
    length: float
    radius: float

    def __post_init__(self):
        if (
            min(self.area_outer, self.area_leak, self.area_inner) <= 0
            or self.length <= 0
            or self.radius <= 0
        ):
            raise DomainError("geometry values must be strictly positive")
        if self.area_leak > min(self.area_outer, self.area_inner) * (1 + 1e-12):
            raise DomainError("leak area must not exceed either duct area")

    @classmethod
    def circular(
        cls, area_outer: float, area_inner: float, length: float, radius: float
    ) -> "LeakGeometry":
        """Leak is a circular hole of the given radius: S2 = pi r^2."""
        return cls(area_outer, math.pi * radius**2, area_inner, length, radius)

    @classmethod
    def from_plate(cls, plate: OrificePlateSpec) -> "LeakGeometry":
        bore_area = math.pi * (plate.bore_diameter / 2) ** 2
        return cls.circular(
            bore_area, bore_area, plate.thickness, plate.inner_diameter / 2
        )

    def effective_length(self) -> float:
        """End-corrected propagation length L + 0.821 r."""
        return self.length + END_CORRECTION * self.radius

    @property
    def sigma(self) -> float:
        """Open-area fraction S2/S1."""
        return self.area_leak / self.area_outer


@dataclass(frozen=True)
class WaveAmplitudes:
    """Solved complex wave amplitudes, normalized so the incident A = 1.

    For an inviscid medium with equal duct areas the system is passive:
    |B|^2 + |E|^2 <= 1 (checked by the test suite, not at construction,
    since the type cannot see the medium it was solved under).
    """

    a: complex
    b: complex
    c: complex
    d: complex
    e: complex

    def as_vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e], dtype=np.complex128)


def blackstock_wavenumber(medium: Medium, r: float, f):
    """Viscothermal wavenumber of a narrow circular duct of radius r.

    Accepts a scalar frequency or an array [Hz]; returns complex.  With
    mu = 0 this reduces exactly to w/c0, and for r -> infinity the
    correction vanishes.  Im(k) < 0, so e^{-ikx} decays along +x.
    """
    f_arr = np.asarray(f, dtype=np.float64)
    if r <= 0:
        raise DomainError("duct radius must be strictly positive")
    if np.any(f_arr <= 0):
        raise DomainError("frequencies must be strictly positive")
    omega = 2.0 * math.pi * f_arr
    k0 = omega / medium.c0
    if medium.mu == 0.0:
        k = k0.astype(np.complex128)
    else:
        boundary = np.sqrt(medium.mu / (2.0 * medium.rho0 * omega))
        thermal = 1.0 + (medium.gamma - 1.0) / math.sqrt(medium.prandtl)
        k = k0 * (1.0 + ((1.0 - 1.0j) / r) * boundary * thermal)
    return complex(k) if np.isscalar(f) else k


def _coupling_batch(geom: LeakGeometry, k: np.ndarray) -> np.ndarray:
    """Stack of 4x5 coupling matrices, one per wavenumber."""
    s1, s2, s3 = geom.area_outer, geom.area_leak, geom.area_inner
    leff = geom.effective_length()
    zm = np.exp(-1j * k * leff)
    zp = np.exp(+1j * k * leff)
    n = k.size
    m = np.zeros((n, 4, 5), dtype=np.complex128)
    m[:, 0, 0] = 1.0
    m[:, 0, 1] = 1.0
    m[:, 0, 2] = -1.0
    m[:, 0, 3] = -1.0
    m[:, 1, 0] = s1
    m[:, 1, 1] = -s1
    m[:, 1, 2] = -s2
    m[:, 1, 3] = s2
    m[:, 2, 2] = zm
    m[:, 2, 3] = zp
    m[:, 2, 4] = -zm
    m[:, 3, 2] = s2 * zm
    m[:, 3, 3] = -s2 * zp
    m[:, 3, 4] = -s3 * zm
    return m


def assemble_coupling_matrix(geom: LeakGeometry, k: complex) -> np.ndarray:
    """The 4x5 coupling matrix M with rows: pressure and volumetric-flow
    continuity at x = 0, then the same pair at x = L, end-corrected."""
    if not np.isfinite(k):
        raise DomainError("wavenumber must be finite")
    return _coupling_batch(geom, np.atleast_1d(np.asarray(k, dtype=np.complex128)))[0]


def _solve_sweep(geom: LeakGeometry, k: np.ndarray) -> np.ndarray:
    """Solve the interface system for each wavenumber; rows are [B, C, D, E]."""
    m = _coupling_batch(geom, k)
    sub = np.ascontiguousarray(m[:, :, 1:])
    rhs = np.ascontiguousarray(-m[:, :, 0])

    cond = np.linalg.cond(sub)
    bad = np.flatnonzero(~np.isfinite(cond) | (cond > CONDITION_LIMIT))
    if bad.size:
        raise DegenerateGeometryError(
            f"interface system ill-conditioned (cond > {CONDITION_LIMIT:g}) "
            f"at bin(s) {bad[:8].tolist()}"
        )

    x = _kernels.solve_batch(sub, rhs)

    full = np.concatenate([np.ones((k.size, 1), dtype=np.complex128), x], axis=1)
    residual = np.linalg.norm(np.einsum("nij,nj->ni", m, full), axis=1)
    scale = np.linalg.norm(m, axis=(1, 2))
    worst = np.flatnonzero(residual > RESIDUAL_LIMIT * scale)
    if worst.size:
        raise DegenerateGeometryError(
            f"solve residual above {RESIDUAL_LIMIT:g}*||M|| at bin(s) "
            f"{worst[:8].tolist()}"
        )
    return x


def solve_amplitudes(geom: LeakGeometry, k: complex) -> WaveAmplitudes:
    """Wave amplitudes [A=1, B, C, D, E] satisfying all four continuity rows."""
    b, c, d, e = _solve_sweep(geom, np.atleast_1d(np.asarray(k, np.complex128)))[0]
    return WaveAmplitudes(1.0 + 0.0j, complex(b), complex(c), complex(d), complex(e))


def transmission_coefficient(
    amps: WaveAmplitudes, geom: LeakGeometry, include_area_ratio: bool = True
) -> float:
    """Power transmission ratio tau = (S3/S1) |E/A|^2.

    The S3/S1 factor makes tau a true power ratio for unequal duct areas;
    it reduces to the plain pressure ratio |E/A|^2 for the equal-bore tube.
    ``include_area_ratio=False`` returns |E/A|^2 itself.
    """
    ratio = geom.area_inner / geom.area_outer if include_area_ratio else 1.0
    return ratio * abs(amps.e / amps.a) ** 2


def _wavenumbers(
    geom: LeakGeometry, medium: Medium, frequencies: np.ndarray, viscous: bool
) -> np.ndarray:
    if viscous:
        return np.asarray(
            blackstock_wavenumber(medium, geom.radius, frequencies),
            dtype=np.complex128,
        )
    return (2.0 * math.pi * frequencies / medium.c0).astype(np.complex128)


def _check_frequencies(frequencies) -> np.ndarray:
    f = np.asarray(frequencies, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise DomainError("frequency grid must be a non-empty 1-D array")
    if np.any(f <= 0):
        raise DomainError("frequencies must be strictly positive")
    if np.any(np.diff(f) <= 0):
        raise DomainError("frequencies must be strictly increasing")
    return f


def tl_spectrum(
    geom: LeakGeometry,
    medium: Medium,
    frequencies,
    viscous: bool = True,
    include_area_ratio: bool = True,
) -> Spectrum:
    """Transmission-loss spectrum TL(f) = 10 log10(1/tau(f)) [dB]."""
    f = _check_frequencies(frequencies)
    k = _wavenumbers(geom, medium, f, viscous)
    x = _solve_sweep(geom, k)
    ratio = geom.area_inner / geom.area_outer if include_area_ratio else 1.0
    tau = ratio * np.abs(x[:, 3]) ** 2
    return Spectrum(f, -10.0 * np.log10(tau), SpectrumKind.DECIBEL)


def alpha_spectrum(
    geom: LeakGeometry, medium: Medium, frequencies, viscous: bool = True
) -> Spectrum:
    """Power absorption spectrum alpha(f) = 1 - |B/A|^2 - (S3/S1)|E/A|^2.

    Rounding can leave values a few ULP below zero for a lossless medium;
    these are clipped to 0.  A deficit beyond the analytic tolerance is an
    energy violation and raises.
    """
    f = _check_frequencies(frequencies)
    k = _wavenumbers(geom, medium, f, viscous)
    x = _solve_sweep(geom, k)
    ratio = geom.area_inner / geom.area_outer
    alpha = 1.0 - np.abs(x[:, 0]) ** 2 - ratio * np.abs(x[:, 3]) ** 2
    if np.any(alpha < -ENERGY_TOL_ANALYTIC):
        raise EnergyViolationError(
            "reflected plus transmitted power exceeds incident power"
        )
    return Spectrum(
        f, np.maximum(alpha, 0.0), SpectrumKind.POWER_COEFFICIENT
    )


def expansion_chamber_inverse_tau(sigma: float, k_leff: float) -> float:
    """Closed-form 1/tau of a lossless expansion chamber with area jump sigma:

        1/tau = cos^2(k L_eff) + (1/4) (sigma + 1/sigma)^2 sin^2(k L_eff)

    Valid for equal outer ducts (S1 = S3) and a real wavenumber.  Serves as
    the independent reference the interface solve is verified against.
    """
    if sigma <= 0:
        raise DomainError("area fraction must be strictly positive")
    c, s = math.cos(k_leff), math.sin(k_leff)
    return c * c + 0.25 * (sigma + 1.0 / sigma) ** 2 * s * s
