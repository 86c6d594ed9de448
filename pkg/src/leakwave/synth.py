"""Acoustic source synthesis: discrete tones, band-limited impulses, and
broadband noise built from a prescribed band spectrum with random phases.

The broadband signal is a cosine bank

    p(t) = sum_j sqrt(2 df_j S_j) cos(2 pi f_j t + chi_j)

over N bands whose widths grow geometrically, df_j = r df_{j-1} with
df_1 = B (r - 1) / (r^N - 1), so they telescope to the total bandwidth B.
The cosine argument uses the angular frequency 2 pi f_j; writing the band
center directly inside the cosine would land the tones at f/(2 pi) Hz,
contradicting the prescribed spectrum.  Phases chi_j are drawn uniformly
from [0, pi] under a caller-supplied seed, so synthesis is reproducible
bit for bit.

Two presets resolve an ambiguity in the published band-layout constants,
which state both B = 1e4 and df_1 = 500 although the two are mutually
inconsistent under the formula above:

* ``published-formula``:   B = 1e4 Hz          (df_1 = 58.657...)
* ``published-constants``: df_1 = 500 Hz       (B = 85240.69... Hz)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, ShapeError
from .metrics import P_REF
from .signals import PressureTrace

#: Sampling rate of the reference experiment's acquisition chain [Hz].
DEFAULT_SAMPLE_RATE = 51200.0

#: Gaussian pulse sharpness such that the pressure-amplitude half-power
#: point sits at 2 ln2 / (pi * width) ~= 0.44 / width.
_GAUSS_COEFF = 8.0 * math.log(2.0)


class ImpulseShape(enum.Enum):
    GAUSSIAN = "gaussian"
    HANN_BURST = "hann_burst"


def band_layout(
    n_bands: int, growth_ratio: float, bandwidth: float, base_frequency: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Centers and widths of the geometric band layout.

    Widths satisfy df_j = r df_{j-1} with df_1 = B (r-1)/(r^N - 1); centers
    are the cumulative midpoints starting at ``base_frequency``.  r = 1 is
    the uniform-layout limit df_j = B/N, handled exactly.
    """
    if n_bands < 1:
        raise DomainError("at least one band is required")
    if bandwidth <= 0:
        raise DomainError("total bandwidth must be positive")
    if growth_ratio < 1:
        raise DomainError("growth ratio must be >= 1")
    if base_frequency < 0:
        raise DomainError("base frequency must be non-negative")
    if growth_ratio == 1.0:
        widths = np.full(n_bands, bandwidth / n_bands)
    else:
        df1 = bandwidth * (growth_ratio - 1.0) / (growth_ratio**n_bands - 1.0)
        widths = df1 * growth_ratio ** np.arange(n_bands)
    edges = base_frequency + np.concatenate([[0.0], np.cumsum(widths)])
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, widths


@dataclass(frozen=True)
class BroadbandSpec:
    """Fully determined broadband source: band layout, per-band spectrum
    levels S_j [Pa^2/Hz], and the seeded random phases chi_j in [0, pi]."""

    n_bands: int
    growth_ratio: float
    bandwidth: float
    spectrum_levels: np.ndarray
    phases: np.ndarray
    seed: int
    base_frequency: float = 0.0

    def __post_init__(self):
        levels = np.asarray(self.spectrum_levels, dtype=np.float64)
        phases = np.asarray(self.phases, dtype=np.float64)
        if levels.shape != (self.n_bands,) or phases.shape != (self.n_bands,):
            raise ShapeError("levels and phases must have one entry per band")
        if np.any(levels < 0):
            raise DomainError("spectrum levels must be non-negative")
        if np.any((phases < 0) | (phases > math.pi)):
            raise DomainError("phases must lie in [0, pi]")
        # widths below raise on invalid layout parameters
        band_layout(self.n_bands, self.growth_ratio, self.bandwidth,
                    self.base_frequency)
        object.__setattr__(self, "spectrum_levels", levels)
        object.__setattr__(self, "phases", phases)

    def layout(self) -> tuple[np.ndarray, np.ndarray]:
        return band_layout(
            self.n_bands, self.growth_ratio, self.bandwidth, self.base_frequency
        )

    def total_power(self) -> float:
        """sum_j df_j S_j [Pa^2], the mean-square pressure of the signal."""
        _, widths = self.layout()
        return float(np.sum(widths * self.spectrum_levels))

    def target_oispl(self) -> float:
        return 10.0 * math.log10(self.total_power() / P_REF**2)


#: Band-count and growth ratio shared by both published presets.
PRESET_BANDS = 100
PRESET_GROWTH = 1.01

#: Total bandwidth implied by each reading of the published constants [Hz].
PRESET_BANDWIDTH = {
    "published-formula": 1.0e4,
    "published-constants": 500.0 * (PRESET_GROWTH**PRESET_BANDS - 1.0)
    / (PRESET_GROWTH - 1.0),
}


def broadband_flat(
    oispl_db: float,
    seed: int,
    n_bands: int = PRESET_BANDS,
    growth_ratio: float = PRESET_GROWTH,
    bandwidth: float = PRESET_BANDWIDTH["published-formula"],
    base_frequency: float = 0.0,
) -> BroadbandSpec:
    """Flat-spectrum broadband source targeting the given overall level.

    The constant spectrum level S = p_ref^2 10^(OISPL/10) / B makes the
    band powers sum exactly to the target mean square.
    """
    level = P_REF**2 * 10.0 ** (oispl_db / 10.0) / bandwidth
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, math.pi, size=n_bands)
    return BroadbandSpec(
        n_bands=n_bands,
        growth_ratio=growth_ratio,
        bandwidth=bandwidth,
        spectrum_levels=np.full(n_bands, level),
        phases=phases,
        seed=seed,
        base_frequency=base_frequency,
    )


def broadband_preset(preset: str, oispl_db: float, seed: int,
                     base_frequency: float = 0.0) -> BroadbandSpec:
    if preset not in PRESET_BANDWIDTH:
        raise ConfigurationError(
            f"unknown broadband preset {preset!r}; "
            f"choose from {sorted(PRESET_BANDWIDTH)}"
        )
    return broadband_flat(
        oispl_db, seed, bandwidth=PRESET_BANDWIDTH[preset],
        base_frequency=base_frequency,
    )


def synthesize_broadband(
    spec: BroadbandSpec, sample_rate: float, duration: float
) -> PressureTrace:
    """Render the cosine bank; per-band RMS amplitude is sqrt(df_j S_j)."""
    if sample_rate <= 0 or duration <= 0:
        raise DomainError("sample rate and duration must be positive")
    centers, widths = spec.layout()
    if centers[-1] >= sample_rate / 2:
        raise ConfigurationError(
            f"highest band center {centers[-1]:.1f} Hz reaches the Nyquist "
            f"frequency {sample_rate / 2:.1f} Hz"
        )
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    amps = np.sqrt(2.0 * widths * spec.spectrum_levels)
    samples = _kernels.cosine_bank(t, amps, 2.0 * math.pi * centers, spec.phases)
    return PressureTrace(samples, sample_rate)


@dataclass(frozen=True)
class ImpulseSpec:
    """Band-limited test pulse.

    For the gaussian shape, ``width`` sets the spectral half-power point
    at about 0.44/width; the envelope is below 1e-6 of the peak outside
    +-5 widths of the center.  The hann_burst shape has exact compact
    support of one ``width``.
    """

    peak_pressure: float
    center_time: float
    width: float
    shape: ImpulseShape = ImpulseShape.GAUSSIAN

    def __post_init__(self):
        if self.peak_pressure <= 0 or self.width <= 0:
            raise DomainError("peak pressure and width must be positive")


def synthesize_impulse(
    spec: ImpulseSpec, sample_rate: float, duration: float
) -> PressureTrace:
    """Render a single band-limited pulse centered at ``spec.center_time``.

    The center time is snapped to the nearest sample so the stated peak
    pressure is realized exactly at one sample.
    """
    if sample_rate <= 0 or duration <= 0:
        raise DomainError("sample rate and duration must be positive")
    if spec.width < 4.0 / sample_rate:
        raise ConfigurationError(
            f"pulse width {spec.width:g} s is unresolvable at "
            f"{sample_rate:g} Hz (needs >= 4 samples)"
        )
    if not 0.0 <= spec.center_time <= duration:
        raise ConfigurationError("pulse center must lie within the trace")
    n = int(round(duration * sample_rate))
    t0 = round(spec.center_time * sample_rate) / sample_rate
    t = np.arange(n) / sample_rate - t0
    if spec.shape is ImpulseShape.GAUSSIAN:
        samples = spec.peak_pressure * np.exp(-_GAUSS_COEFF * (t / spec.width) ** 2)
    else:
        samples = np.where(
            np.abs(t) <= spec.width / 2,
            spec.peak_pressure * 0.5 * (1.0 + np.cos(2.0 * math.pi * t / spec.width)),
            0.0,
        )
    return PressureTrace(samples, sample_rate)


def synthesize_tone(
    f: float, ispl_db: float, sample_rate: float, duration: float, phase: float = 0.0
) -> PressureTrace:
    """Cosine at ``f`` whose RMS realizes the requested incident level:
    RMS = 20e-6 * 10^(ISPL/20) Pa."""
    if f <= 0:
        raise DomainError("tone frequency must be positive")
    if sample_rate <= 0 or duration <= 0:
        raise DomainError("sample rate and duration must be positive")
    if f >= sample_rate / 2:
        raise ConfigurationError(
            f"tone at {f:g} Hz reaches the Nyquist frequency {sample_rate / 2:g} Hz"
        )
    rms = P_REF * 10.0 ** (ispl_db / 20.0)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    samples = rms * math.sqrt(2.0) * np.cos(2.0 * math.pi * f * t + phase)
    return PressureTrace(samples, sample_rate)


def repeat_trace(trace: PressureTrace, count: int) -> PressureTrace:
    """Tile a single-period trace into ``count`` periods (pulse trains)."""
    if count < 1:
        raise DomainError("repeat count must be at least 1")
    return trace.with_samples(np.tile(trace.samples, count))
