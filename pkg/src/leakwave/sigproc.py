"""Two-sided impedance-tube measurement chain.

Impulsive route: separate each arrival from its reflections with a time
gate, Hann-window and ensemble-average the separated pulses, estimate
one-sided PSDs with Hann-windowed overlapping blocks, and form TL from
the incident/transmitted PSD ratio under an SNR mask.

Wave-decomposition route: recover the complex reflection coefficient at a
reference plane from the transfer function between two axially separated
microphones,

    R = e^{2 i k l1} (H12 - e^{-i k s}) / (e^{i k s} - H12),

with the plane-wave wavenumber k = w/c0.  Bins near sin(k s) = 0 are
singular for any two-microphone method and are flagged, never fabricated.

Window conventions: periodic Hann for PSD blocks (correct spectral
averaging, with window-power compensation in the normalization) and
symmetric Hann for pulse tapering.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DecompositionError,
    DomainError,
    EnergyViolationError,
    GatingError,
    GridMismatchError,
    InterpolationError,
    ShapeError,
)
from .medium import Medium
from .metrics import ENERGY_TOL_ESTIMATED
from .signals import PressureTrace, Spectrum, SpectrumKind


class GateTaper(enum.Enum):
    HANN = "hann"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class GateSpec:
    """Time gate [window_start, window_end) on a trace's own time axis."""

    window_start: float
    window_end: float
    taper: GateTaper = GateTaper.HANN

    def __post_init__(self):
        if self.window_end <= self.window_start:
            raise DomainError("gate must end after it starts")


@dataclass(frozen=True)
class WelchConfig:
    """Blocked PSD estimation: Hann-windowed blocks with fractional overlap."""

    block_size: int = 1000
    overlap_fraction: float = 0.5
    window: str = "hann"

    def __post_init__(self):
        if self.block_size < 16:
            raise DomainError("block size must be at least 16 samples")
        if not 0.0 <= self.overlap_fraction <= 0.95:
            raise DomainError("overlap fraction must lie in [0, 0.95]")
        if self.window != "hann":
            raise DomainError("only the hann window is supported")

    def resolution(self, sample_rate: float) -> float:
        """Bin spacing sample_rate / block_size [Hz]."""
        return sample_rate / self.block_size


@dataclass(frozen=True)
class TwoMicLayout:
    """Two upstream microphones a distance ``mic_spacing`` apart; mic 1 sits
    ``mic1_to_reference`` from the reflection reference plane, mic 2 between
    mic 1 and the plane."""

    mic_spacing: float
    mic1_to_reference: float
    medium: Medium
    sin_floor: float = 0.05

    def __post_init__(self):
        if self.mic_spacing <= 0:
            raise DomainError("microphone spacing must be positive")
        if self.mic1_to_reference <= 0:
            raise DomainError("mic 1 must sit at a positive distance")
        if self.mic1_to_reference <= self.mic_spacing:
            raise DomainError("mic 2 would sit behind the reference plane")
        if not 0 < self.sin_floor < 1:
            raise DomainError("sin floor must lie in (0, 1)")


def _gate_indices(trace: PressureTrace, gate: GateSpec) -> tuple[int, int]:
    fs = trace.sample_rate
    i0 = int(round((gate.window_start - trace.start_time) * fs))
    i1 = int(round((gate.window_end - trace.start_time) * fs))
    if i0 < 0 or i1 > len(trace):
        raise GatingError(
            f"gate [{gate.window_start:g}, {gate.window_end:g}] s falls outside "
            f"the trace [{trace.start_time:g}, {trace.start_time + trace.duration:g}] s"
        )
    if i1 <= i0:
        raise GatingError("gate spans no samples at this sample rate")
    return i0, i1


def gate_pulse(
    trace: PressureTrace, gate: GateSpec, energy_floor: float = 1e-6
) -> PressureTrace:
    """Keep the gated segment, tapered, zero elsewhere (original length).

    Raises :class:`GatingError` when the gate lies outside the trace or
    captures less than ``energy_floor`` of the trace energy.
    """
    i0, i1 = _gate_indices(trace, gate)
    total = float(np.sum(trace.samples**2))
    if total == 0.0:
        raise GatingError("trace carries no energy to gate")
    segment = trace.samples[i0:i1].copy()
    captured = float(np.sum(segment**2))
    if captured / total <= energy_floor:
        raise GatingError(
            f"gate captures {captured / total:.3g} of the trace energy "
            f"(floor {energy_floor:g})"
        )
    if gate.taper is GateTaper.HANN:
        segment *= np.hanning(segment.size)
    out = np.zeros_like(trace.samples)
    out[i0:i1] = segment
    return trace.with_samples(out)


def ensemble_average(pulses: list[PressureTrace]) -> PressureTrace:
    """Symmetric-Hann-taper each pulse, then average pointwise.

    Pulses must share length and sample rate and be time-aligned by the
    caller (same arrival offset within each trace).
    """
    if not pulses:
        raise ShapeError("at least one pulse is required")
    n = len(pulses[0])
    fs = pulses[0].sample_rate
    for p in pulses[1:]:
        if len(p) != n or p.sample_rate != fs:
            raise ShapeError("pulses must share length and sample rate")
    window = np.hanning(n)
    acc = np.zeros(n)
    for p in pulses:
        acc += window * p.samples
    return pulses[0].with_samples(acc / len(pulses))


def _periodic_hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * math.pi * np.arange(n) / n)


def welch_psd(trace: PressureTrace, cfg: WelchConfig) -> Spectrum:
    """One-sided PSD [Pa^2/Hz] from averaged Hann-windowed block periodograms.

    Normalization satisfies Parseval: sum(PSD) * df recovers the trace
    mean square for stationary input.  Bin spacing is exactly
    sample_rate / block_size.
    """
    n = len(trace)
    block = cfg.block_size
    if n < block:
        raise ShapeError(f"trace ({n} samples) shorter than one block ({block})")
    fs = trace.sample_rate
    step = max(1, int(round(block * (1.0 - cfg.overlap_fraction))))
    window = _periodic_hann(block)
    win_power = float(np.sum(window**2))

    n_seg = 1 + (n - block) // step
    starts = np.arange(n_seg) * step
    segments = trace.samples[starts[:, None] + np.arange(block)[None, :]]
    spectra = np.fft.rfft(segments * window, axis=1)
    psd = np.mean(np.abs(spectra) ** 2, axis=0) / (fs * win_power)
    psd[1:] *= 2.0
    if block % 2 == 0:
        psd[-1] /= 2.0

    freqs = np.fft.rfftfreq(block, d=1.0 / fs)
    return Spectrum(freqs, psd, SpectrumKind.PSD)


def tl_from_psd(
    incident: Spectrum,
    transmitted: Spectrum,
    noise_floor_psd: float | np.ndarray | None = None,
    snr_db: float = 10.0,
) -> Spectrum:
    """TL(f) = 10 log10(incident / transmitted) [dB] with an SNR mask.

    A bin is valid only when the incident PSD exceeds the declared noise
    floor by ``snr_db``; bins that cannot be evaluated (zero or invalid
    input) are flagged invalid rather than reported.
    """
    if incident.kind is not SpectrumKind.PSD or transmitted.kind is not SpectrumKind.PSD:
        raise ShapeError("tl_from_psd expects PSD spectra")
    if not incident.same_grid(transmitted):
        raise GridMismatchError("incident and transmitted grids differ")
    valid = incident.valid & transmitted.valid
    valid &= (incident.values > 0) & (transmitted.values > 0)
    if noise_floor_psd is not None:
        floor = np.broadcast_to(
            np.asarray(noise_floor_psd, dtype=np.float64), incident.values.shape
        )
        valid &= incident.values >= floor * 10.0 ** (snr_db / 10.0)
    tl = np.full(incident.values.shape, np.nan)
    np.divide(incident.values, transmitted.values, out=tl, where=valid)
    tl[valid] = 10.0 * np.log10(tl[valid])
    return Spectrum(incident.frequencies, tl, SpectrumKind.DECIBEL, valid=valid)


def two_mic_decompose(
    p1: Spectrum, p2: Spectrum, layout: TwoMicLayout
) -> tuple[Spectrum, Spectrum, Spectrum]:
    """Decompose the duct field into incident and reflected plane waves.

    Returns complex incident and reflected amplitude spectra at the
    reference plane plus the power reflection coefficient |R|^2.  Bins
    with |sin(k s)| below the layout's sin floor are flagged invalid.
    """
    if not p1.same_grid(p2):
        raise GridMismatchError("microphone spectra share no common grid")
    if np.any(p1.values == 0):
        raise DecompositionError("mic 1 spectrum contains zero bins")
    k = 2.0 * math.pi * p1.frequencies / layout.medium.c0
    s = layout.mic_spacing
    l1 = layout.mic1_to_reference

    mask = p1.valid & p2.valid & (np.abs(np.sin(k * s)) >= layout.sin_floor)
    idx = np.flatnonzero(mask)
    kv = k[idx]
    h12 = p2.values[idx] / p1.values[idx]
    denom = np.exp(1j * kv * s) - h12
    ok = np.abs(denom) > 0.0
    idx, kv, h12, denom = idx[ok], kv[ok], h12[ok], denom[ok]
    refl_v = np.exp(2j * kv * l1) * (h12 - np.exp(-1j * kv * s)) / denom

    # incident amplitude at the reference plane from mic 1's field value
    inc_denom = np.exp(1j * kv * l1) + refl_v * np.exp(-1j * kv * l1)
    ok = np.abs(inc_denom) >= 1e-12
    idx, refl_v, inc_denom = idx[ok], refl_v[ok], inc_denom[ok]
    inc_v = p1.values[idx] / inc_denom

    n = p1.frequencies.size
    valid = np.zeros(n, dtype=bool)
    valid[idx] = True
    incident = np.full(n, np.nan, dtype=np.complex128)
    reflected = np.full(n, np.nan, dtype=np.complex128)
    r2 = np.full(n, np.nan)
    incident[idx] = inc_v
    reflected[idx] = refl_v * inc_v
    r2[idx] = np.abs(refl_v) ** 2

    grid = p1.frequencies
    return (
        Spectrum(grid, incident, SpectrumKind.PRESSURE_AMPLITUDE, valid=valid),
        Spectrum(grid, reflected, SpectrumKind.PRESSURE_AMPLITUDE, valid=valid),
        Spectrum(
            grid, r2, SpectrumKind.POWER_COEFFICIENT, valid=valid,
            energy_tol=ENERGY_TOL_ESTIMATED,
        ),
    )


def interpolate_power_coefficient(spec: Spectrum, f: float) -> float:
    """Linear interpolation of a real coefficient between the two bracketing
    bins; both must be valid."""
    freqs = spec.frequencies
    if not freqs[0] <= f <= freqs[-1]:
        raise InterpolationError(
            f"{f:g} Hz lies outside the grid [{freqs[0]:g}, {freqs[-1]:g}] Hz"
        )
    hi = int(np.searchsorted(freqs, f))
    if freqs[hi] == f:
        if not spec.valid[hi]:
            raise InterpolationError(f"bin at {f:g} Hz is flagged invalid")
        return float(np.real(spec.values[hi]))
    lo = hi - 1
    if not (spec.valid[lo] and spec.valid[hi]):
        raise InterpolationError(f"a bracketing bin of {f:g} Hz is flagged invalid")
    w = (f - freqs[lo]) / (freqs[hi] - freqs[lo])
    return float((1.0 - w) * np.real(spec.values[lo]) + w * np.real(spec.values[hi]))


def absorption_from_reflection(r2: Spectrum) -> Spectrum:
    """alpha(f) = 1 - |R|^2 for a reflective (transmission-blocked)
    termination; negative values within the tolerance clip to zero."""
    if r2.kind is not SpectrumKind.POWER_COEFFICIENT:
        raise ShapeError("absorption_from_reflection expects |R|^2 input")
    vals = np.real(r2.values)
    alpha = np.where(r2.valid, 1.0 - vals, np.nan)
    if np.any(alpha[r2.valid] < -r2.energy_tol):
        raise EnergyViolationError("reflected power exceeds incident power")
    alpha = np.where(r2.valid, np.maximum(alpha, 0.0), np.nan)
    return Spectrum(
        r2.frequencies, alpha, SpectrumKind.POWER_COEFFICIENT,
        valid=r2.valid, energy_tol=r2.energy_tol,
    )


def extract_aligned_windows(
    trace: PressureTrace,
    center_time: float,
    period: float,
    count: int,
    window_length: float,
) -> list[PressureTrace]:
    """Cut ``count`` equal windows centered on ``center_time + i * period``.

    Each window is returned with its clock reset to zero, so repeated
    arrivals land at the same offset and can be ensemble-averaged.
    """
    if count < 1:
        raise DomainError("at least one window is required")
    if period <= 0 or window_length <= 0:
        raise DomainError("period and window length must be positive")
    fs = trace.sample_rate
    w = int(round(window_length * fs))
    if w < 1:
        raise DomainError("window spans no samples")
    windows = []
    for i in range(count):
        center = center_time + i * period
        start = int(round((center - trace.start_time) * fs)) - w // 2
        if start < 0 or start + w > len(trace):
            raise ShapeError(
                f"window {i} around {center:g} s falls outside the trace"
            )
        windows.append(
            PressureTrace(trace.samples[start : start + w], fs, 0.0)
        )
    return windows
