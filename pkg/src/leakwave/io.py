"""CSV trace and spectrum formats plus atomic file writes.

Floats serialize with ``repr`` (shortest round-trip form), so rereading a
file reproduces the numbers exactly and identical data always produces
identical bytes.  Header lines are ``#``-prefixed; the first carries tool
metadata, the second the column names.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import DataError
from .signals import PressureTrace, Spectrum, SpectrumKind


def atomic_write_text(path, text: str) -> None:
    """Write-temp-then-rename so readers never observe partial output."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def render_trace_csv(trace: PressureTrace, meta: str = "") -> str:
    lines = []
    if meta:
        lines.append(f"# {meta}")
    lines.append(
        f"# sample_rate_hz={float(trace.sample_rate)!r} "
        f"start_time_s={float(trace.start_time)!r}"
    )
    lines.append("# time_s,pressure_pa")
    times = trace.times()
    for t, p in zip(times.tolist(), trace.samples.tolist()):
        lines.append(f"{t!r},{p!r}")
    return "\n".join(lines) + "\n"


def write_trace_csv(path, trace: PressureTrace, meta: str = "") -> None:
    atomic_write_text(path, render_trace_csv(trace, meta))


def read_trace_csv(path) -> PressureTrace:
    """Read a trace; timing comes from the header, samples from column 2."""
    sample_rate = None
    start_time = 0.0
    samples = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for token in line[1:].split():
                        if token.startswith("sample_rate_hz="):
                            sample_rate = float(token.partition("=")[2])
                        elif token.startswith("start_time_s="):
                            start_time = float(token.partition("=")[2])
                    continue
                parts = line.split(",")
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 'time,pressure'")
                samples.append(float(parts[1]))
    except OSError as exc:
        raise DataError(f"cannot read trace {path}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"malformed number in trace {path}: {exc}") from exc
    if sample_rate is None:
        raise DataError(f"trace {path} misses the sample_rate_hz header")
    if not samples:
        raise DataError(f"trace {path} contains no samples")
    return PressureTrace(np.array(samples), sample_rate, start_time)


def render_spectrum_csv(
    spec: Spectrum, value_name: str, meta: str = "", include_valid: bool = True
) -> str:
    """Analytic spectra may drop the valid column; pipeline spectra keep it."""
    if spec.values.dtype.kind == "c":
        raise DataError("spectrum CSV export supports real-valued spectra only")
    lines = []
    if meta:
        lines.append(f"# {meta}")
    lines.append(f"# kind={spec.kind.value}")
    if include_valid:
        lines.append(f"# frequency_hz,{value_name},valid")
        for f, v, ok in zip(spec.frequencies.tolist(), spec.values.tolist(),
                            spec.valid.tolist()):
            lines.append(f"{f!r},{v!r},{int(ok)}")
    else:
        lines.append(f"# frequency_hz,{value_name}")
        for f, v in zip(spec.frequencies.tolist(), spec.values.tolist()):
            lines.append(f"{f!r},{v!r}")
    return "\n".join(lines) + "\n"


def write_spectrum_csv(
    path, spec: Spectrum, value_name: str, meta: str = "", include_valid: bool = True
) -> None:
    atomic_write_text(path, render_spectrum_csv(spec, value_name, meta, include_valid))


def read_spectrum_csv(path) -> Spectrum:
    freqs, values, valid = [], [], []
    kind = SpectrumKind.PSD
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    if line[1:].strip().startswith("kind="):
                        kind = SpectrumKind(line.partition("=")[2].strip())
                    continue
                parts = line.split(",")
                if len(parts) not in (2, 3):
                    raise DataError(
                        f"{path}:{lineno}: expected 'frequency,value[,valid]'"
                    )
                freqs.append(float(parts[0]))
                values.append(float(parts[1]))
                valid.append(bool(int(parts[2])) if len(parts) == 3 else True)
    except OSError as exc:
        raise DataError(f"cannot read spectrum {path}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"malformed value in spectrum {path}: {exc}") from exc
    if not freqs:
        raise DataError(f"spectrum {path} contains no bins")
    vals = np.array(values)
    mask = np.array(valid, dtype=bool)
    vals = np.where(mask, vals, np.nan)
    # files come from measurement pipelines; use the estimation tolerance
    return Spectrum(np.array(freqs), vals, kind, valid=mask, energy_tol=0.02)
