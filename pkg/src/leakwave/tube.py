"""Virtual two-sided impedance tube.

Propagation is assembled per frequency bin and inverted with a single
inverse FFT: exact linear plane-wave transport with no numerical
dispersion, so any round-trip error against the analytical model is
attributable purely to the signal-processing chain.  The source wave
travels source -> mic 1 -> sample plane -> mic 2 -> termination.  By
default only first-order reflections are modeled (the source end is
non-reflecting); a multi-bounce option closes the geometric series of
reflections trapped between the sample and a reflective termination, for
stress-testing gating logic.

Layout defaults (source_to_mic1 = 1.0 m, mic1_to_sample = 0.5 m,
sample_to_mic2 = 0.5 m) separate the arrivals by about 2.9 ms at
c0 = 343 m/s, comfortably gateable at 51.2 kHz sampling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, ShapeError
from .medium import Medium
from .metrics import circular_duct_cutoff
from .signals import PressureTrace, Spectrum, SpectrumKind
from .sigproc import TwoMicLayout
from .tmm import LeakGeometry, _solve_sweep, _wavenumbers, blackstock_wavenumber

#: Per-bin passivity slack for analytically derived ports.
PASSIVITY_TOL = 1e-9


class Termination(enum.Enum):
    ANECHOIC = "anechoic"
    RIGID = "rigid"
    REFLECTION = "reflection"


@dataclass(frozen=True)
class TubeLayout:
    """Geometry and termination of the virtual tube."""

    bore_diameter: float = 0.0254
    source_to_mic1: float = 1.0
    mic1_to_sample: float = 0.5
    sample_to_mic2: float = 0.5
    termination: Termination = Termination.ANECHOIC
    termination_reflection: complex = 0.0 + 0.0j
    mic2_to_termination: float = 0.5
    medium: Medium = field(default_factory=Medium.air_standard)
    include_duct_losses: bool = False

    def __post_init__(self):
        lengths = (
            self.bore_diameter,
            self.source_to_mic1,
            self.mic1_to_sample,
            self.sample_to_mic2,
            self.mic2_to_termination,
        )
        if min(lengths) <= 0:
            raise DomainError("all tube lengths must be strictly positive")
        if self.termination is Termination.ANECHOIC and self.termination_reflection != 0:
            raise DomainError("anechoic termination implies zero reflection")

    def termination_coefficient(self) -> complex:
        if self.termination is Termination.ANECHOIC:
            return 0.0 + 0.0j
        if self.termination is Termination.RIGID:
            return 1.0 + 0.0j
        return complex(self.termination_reflection)

    def plane_wave_cutoff(self) -> float:
        return circular_duct_cutoff(self.bore_diameter, self.medium.c0)


@dataclass(frozen=True)
class TwoPort:
    """Frequency-sampled reflection and transmission of the sample, seen
    from the source side; the back-side responses support multi-bounce
    closure and default to the front-side values (symmetric sample).

    ``area_ratio`` is S3/S1 so the passivity bound |r|^2 + (S3/S1)|t|^2 <= 1
    is a true power statement for unequal duct areas.
    """

    frequencies: np.ndarray
    reflection: np.ndarray
    transmission: np.ndarray
    area_ratio: float = 1.0
    reflection_back: np.ndarray | None = None
    transmission_back: np.ndarray | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        r = np.asarray(self.reflection, dtype=np.complex128)
        t = np.asarray(self.transmission, dtype=np.complex128)
        if f.ndim != 1 or r.shape != f.shape or t.shape != f.shape:
            raise ShapeError("port responses must match the frequency grid")
        power = np.abs(r) ** 2 + self.area_ratio * np.abs(t) ** 2
        if np.any(power > 1.0 + PASSIVITY_TOL):
            raise DomainError(
                f"two-port is active: |r|^2 + (S3/S1)|t|^2 peaks at {power.max():.12g}"
            )
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "reflection", r)
        object.__setattr__(self, "transmission", t)

    def back_reflection(self) -> np.ndarray:
        return (
            self.reflection
            if self.reflection_back is None
            else np.asarray(self.reflection_back, dtype=np.complex128)
        )

    def back_transmission(self) -> np.ndarray:
        return (
            self.transmission
            if self.transmission_back is None
            else np.asarray(self.transmission_back, dtype=np.complex128)
        )


def identity_port(frequencies) -> TwoPort:
    """A sample that is not there: r = 0, t = 1."""
    f = np.asarray(frequencies, dtype=np.float64)
    return TwoPort(f, np.zeros(f.size, complex), np.ones(f.size, complex))


def rigid_port(frequencies) -> TwoPort:
    """A hard wall at the sample plane: r = 1, t = 0."""
    f = np.asarray(frequencies, dtype=np.float64)
    return TwoPort(f, np.ones(f.size, complex), np.zeros(f.size, complex))


def two_port_from_tmm(
    geom: LeakGeometry, medium: Medium, frequencies, viscous: bool = True
) -> TwoPort:
    """Port responses r = B/A and t = E/A from the interface solve, plus the
    swapped-geometry back-side responses for multi-bounce closure."""
    f = np.asarray(frequencies, dtype=np.float64)
    if f.ndim != 1 or f.size == 0 or np.any(f <= 0):
        raise DomainError("frequencies must be a non-empty positive 1-D array")
    k = _wavenumbers(geom, medium, f, viscous)
    x = _solve_sweep(geom, k)
    swapped = LeakGeometry(
        geom.area_inner, geom.area_leak, geom.area_outer, geom.length, geom.radius
    )
    xb = _solve_sweep(swapped, k)
    return TwoPort(
        f,
        x[:, 0],
        x[:, 3],
        area_ratio=geom.area_inner / geom.area_outer,
        reflection_back=xb[:, 0],
        transmission_back=xb[:, 3],
    )


def _port_on_grid(
    port: TwoPort, freqs: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Interpolate the port responses onto an FFT grid.

    Bins outside the port's support (including DC) take the response of the
    nearest provided bin, so the port's own low-frequency limit governs the
    DC behavior (an orifice stays transparent, a hard wall keeps blocking).
    """
    if np.array_equal(port.frequencies, freqs):
        return (
            port.reflection,
            port.transmission,
            port.back_reflection(),
            port.back_transmission(),
        )

    def interp(resp):
        out = np.interp(freqs, port.frequencies, resp.real).astype(np.complex128)
        out += 1j * np.interp(freqs, port.frequencies, resp.imag)
        return out

    r, t, rb, tb = (
        interp(v)
        for v in (
            port.reflection,
            port.transmission,
            port.back_reflection(),
            port.back_transmission(),
        )
    )
    return r, t, rb, tb


def simulate_mic_traces(
    layout: TubeLayout,
    port: TwoPort,
    source: PressureTrace,
    multi_bounce: bool = False,
    cutoff_energy_fraction: float = 0.01,
) -> tuple[PressureTrace, PressureTrace]:
    """Microphone pressures for a source wave launched down the tube.

    Mic 1 records the direct wave plus the sample reflection, delayed by
    twice mic1_to_sample and scaled by r(f); mic 2 records the t(f)-
    transmitted wave plus, for reflective terminations, the termination
    echo.  Optional duct attenuation applies the imaginary part of the
    bore-radius viscothermal wavenumber along each path.  Assembly is
    periodic in the trace length, so the guard requires every modeled
    path delay to stay below half the trace duration.
    """
    fs = source.sample_rate
    n = len(source)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    c0 = layout.medium.c0

    d_mic1 = layout.source_to_mic1
    d_sample = layout.source_to_mic1 + layout.mic1_to_sample
    d_mic2 = d_sample + layout.sample_to_mic2
    d_term = layout.mic2_to_termination
    r_term = layout.termination_coefficient()

    paths = [d_mic1, 2.0 * d_sample - d_mic1, d_mic2]
    if r_term != 0:
        paths.append(d_mic2 + 2.0 * d_term)
    worst = max(paths) / c0
    if worst >= source.duration / 2:
        raise ConfigurationError(
            f"modeled path delay {worst:.4g} s exceeds half the trace duration "
            f"{source.duration:.4g} s; lengthen the source trace"
        )

    spectrum = np.fft.rfft(source.samples)
    cutoff = layout.plane_wave_cutoff()
    total = float(np.sum(np.abs(spectrum) ** 2))
    if total > 0:
        above = float(np.sum(np.abs(spectrum[freqs > cutoff]) ** 2))
        if above > cutoff_energy_fraction * total:
            raise ConfigurationError(
                f"{100 * above / total:.1f}% of source energy lies above the "
                f"plane-wave cutoff {cutoff:.0f} Hz"
            )

    k = 2.0 * math.pi * freqs / c0 + 0.0j
    if layout.include_duct_losses:
        bore_k = np.empty_like(k)
        bore_k[0] = 0.0
        bore_k[1:] = blackstock_wavenumber(
            layout.medium, layout.bore_diameter / 2, freqs[1:]
        )
        k = k.real + 1j * bore_k.imag

    def prop(distance: float) -> np.ndarray:
        return np.exp(-1j * k * distance)

    r, t, r_back, t_back = _port_on_grid(port, freqs)

    # amplitudes referenced at the sample plane
    at_sample = spectrum * prop(d_sample)
    d_cavity = layout.sample_to_mic2 + d_term  # sample rear face to termination

    mic1 = spectrum * prop(d_mic1) + at_sample * r * prop(layout.mic1_to_sample)
    if r_term == 0:
        mic2 = at_sample * t * prop(layout.sample_to_mic2)
    else:
        round_trip = r_back * r_term * prop(2.0 * d_cavity)
        if multi_bounce:
            peak = float(np.max(np.abs(round_trip)))
            if peak >= 1.0:
                raise ConfigurationError(
                    f"cavity round-trip gain {peak:.6g} >= 1: reverberation "
                    "never decays"
                )
            closure = 1.0 / (1.0 - round_trip)
        else:
            closure = np.ones_like(round_trip)
        forward = at_sample * t * closure
        mic2 = forward * (
            prop(layout.sample_to_mic2)
            + r_term * prop(2.0 * d_cavity - layout.sample_to_mic2)
        )
        if multi_bounce:
            # cavity energy leaking back through the sample toward mic 1
            mic1 = mic1 + forward * r_term * prop(2.0 * d_cavity) * t_back * prop(
                layout.mic1_to_sample
            )

    trace1 = source.with_samples(np.fft.irfft(mic1, n=n))
    trace2 = source.with_samples(np.fft.irfft(mic2, n=n))
    return trace1, trace2


def simulate_standing_wave(
    layout: TwoMicLayout, reflection: complex, tone: PressureTrace
) -> tuple[Spectrum, Spectrum]:
    """Exact two-wave field p(x) = e^{-ikx} + R e^{+ikx} sampled at the two
    microphone positions, returned as unit-incident single-bin spectra.

    The tone trace supplies only the frequency (its strongest FFT bin);
    the field itself is evaluated analytically.
    """
    spectrum = np.fft.rfft(tone.samples)
    freqs = np.fft.rfftfreq(len(tone), d=1.0 / tone.sample_rate)
    peak = 1 + int(np.argmax(np.abs(spectrum[1:])))
    f0 = float(freqs[peak])
    if f0 <= 0:
        raise ConfigurationError("tone trace carries no non-DC content")
    k = 2.0 * math.pi * f0 / layout.medium.c0
    x1 = -layout.mic1_to_reference
    x2 = x1 + layout.mic_spacing
    if x1 == x2:
        raise ConfigurationError("microphone positions coincide")
    r = complex(reflection)
    p = [np.exp(-1j * k * x) + r * np.exp(1j * k * x) for x in (x1, x2)]
    grid = np.array([f0])
    return (
        Spectrum(grid, np.array([p[0]]), SpectrumKind.PRESSURE_AMPLITUDE),
        Spectrum(grid, np.array([p[1]]), SpectrumKind.PRESSURE_AMPLITUDE),
    )
