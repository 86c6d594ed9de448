"""Frequency- and time-domain value carriers shared by all modules.

A ``Spectrum`` is the universal currency between the analytical model,
the synthesizers and the measurement chain; a ``PressureTrace`` carries
uniformly sampled microphone pressure.  Both are immutable: arrays are
copied on construction and marked read-only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, EnergyViolationError, ShapeError


class SpectrumKind(enum.Enum):
    PRESSURE_AMPLITUDE = "pressure_amplitude"
    PSD = "psd"
    POWER_COEFFICIENT = "power_coefficient"
    DECIBEL = "decibel"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Frequency-indexed values with a per-bin validity mask.

    Bins flagged invalid (``valid[i] == False``) carry no usable value
    (typically NaN) and are excluded from downstream interpolation and
    masking logic rather than fabricated.

    ``energy_tol`` bounds power coefficients: values must lie in
    [0, 1 + energy_tol] on valid bins.  Analytical producers use the
    default 1e-6; estimates from the measurement pipeline pass 0.02.
    """

    frequencies: np.ndarray
    values: np.ndarray
    kind: SpectrumKind
    valid: np.ndarray | None = None
    energy_tol: float = 1e-6

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        v = np.asarray(self.values)
        if v.dtype.kind == "c":
            v = v.astype(np.complex128)
        else:
            v = v.astype(np.float64)
        if f.ndim != 1 or v.shape != f.shape:
            raise ShapeError("frequencies and values must be 1-D and equal length")
        if f.size == 0:
            raise ShapeError("spectrum must contain at least one bin")
        if np.any(np.diff(f) <= 0):
            raise ShapeError("frequencies must be strictly increasing")
        if self.valid is None:
            m = np.ones(f.shape, dtype=bool)
        else:
            m = np.asarray(self.valid, dtype=bool)
            if m.shape != f.shape:
                raise ShapeError("valid mask shape differs from frequency grid")
        if self.kind in (SpectrumKind.PSD, SpectrumKind.POWER_COEFFICIENT):
            if v.dtype.kind == "c":
                raise ShapeError(f"{self.kind.value} spectra must be real-valued")
            vv = v[m]
            if np.any(vv < 0):
                raise DomainError(f"{self.kind.value} values must be non-negative")
            if self.kind is SpectrumKind.POWER_COEFFICIENT and np.any(
                vv > 1.0 + self.energy_tol
            ):
                raise EnergyViolationError(
                    "power coefficient exceeds 1 beyond tolerance "
                    f"{self.energy_tol:g}"
                )
        object.__setattr__(self, "frequencies", _frozen(f))
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "valid", _frozen(m))

    def __len__(self) -> int:
        return self.frequencies.size

    @property
    def all_valid(self) -> bool:
        return bool(np.all(self.valid))

    def same_grid(self, other: "Spectrum") -> bool:
        return np.array_equal(self.frequencies, other.frequencies)

    def with_values(self, values, kind=None, valid=None, energy_tol=None) -> "Spectrum":
        return Spectrum(
            self.frequencies,
            values,
            self.kind if kind is None else kind,
            self.valid if valid is None else valid,
            self.energy_tol if energy_tol is None else energy_tol,
        )


@dataclass(frozen=True)
class PressureTrace:
    """Uniformly sampled acoustic pressure [Pa] at one location.

    Sample i sits at time ``start_time + i / sample_rate``.
    """

    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0
    calibration: float = field(default=1.0)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise ShapeError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(s)):
            raise DomainError("trace contains non-finite samples")
        if self.sample_rate <= 0:
            raise DomainError("sample_rate must be positive")
        if self.calibration <= 0:
            raise DomainError("calibration must be positive")
        object.__setattr__(self, "samples", _frozen(s))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples**2)))

    def with_samples(self, samples, start_time=None) -> "PressureTrace":
        return PressureTrace(
            samples,
            self.sample_rate,
            self.start_time if start_time is None else start_time,
            self.calibration,
        )

    def shifted(self, dt: float) -> "PressureTrace":
        return replace(self, start_time=self.start_time + dt)
