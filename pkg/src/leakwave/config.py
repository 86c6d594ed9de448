"""Run configuration: one JSON file shared by all CLI subcommands.

Schema version 1.  Validation is strict: unknown keys are rejected with
the offending path, required keys are named, and every block is checked
before any computation starts.  The file's SHA-256 is stamped into all
outputs so results stay traceable to their configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .medium import Medium
from .signals import PressureTrace
from .sigproc import GateSpec, GateTaper, WelchConfig
from .synth import (
    DEFAULT_SAMPLE_RATE,
    BroadbandSpec,
    ImpulseShape,
    ImpulseSpec,
    broadband_flat,
    broadband_preset,
    repeat_trace,
    synthesize_broadband,
    synthesize_impulse,
    synthesize_tone,
)
from .tmm import REFERENCE_PLATES, LeakGeometry, OrificePlateSpec
from .tube import Termination, TubeLayout

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version", "seed", "medium", "geometry", "frequencies", "tl",
    "source", "tube", "processing", "casegen", "output",
}


@dataclass(frozen=True)
class Config:
    raw: dict
    sha256: str
    path: str

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigurationError(f"{where}: missing required key '{key}'")
    return block[key]


def _check_keys(block: dict, allowed: set[str], where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigurationError(f"{where}: expected an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigurationError(
            f"{where}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _number(block: dict, key: str, where: str, default=None):
    if key not in block:
        if default is None:
            raise ConfigurationError(f"{where}: missing required key '{key}'")
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where}.{key}: expected a number")
    return float(value)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    _check_keys(raw, _TOP_KEYS, str(path))
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{path}: schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    if "seed" in raw and (isinstance(raw["seed"], bool) or not isinstance(raw["seed"], int)):
        raise ConfigurationError(f"{path}: seed must be an integer")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Config(raw=raw, sha256=digest, path=str(path))


def medium_from(cfg: Config) -> Medium:
    block = cfg.raw.get("medium", {})
    _check_keys(block, {"c0", "rho0", "mu", "gamma", "prandtl"}, "medium")
    std = Medium.air_standard()
    return Medium(
        c0=_number(block, "c0", "medium", std.c0),
        rho0=_number(block, "rho0", "medium", std.rho0),
        mu=_number(block, "mu", "medium", std.mu),
        gamma=_number(block, "gamma", "medium", std.gamma),
        prandtl=_number(block, "prandtl", "medium", std.prandtl),
    )


def geometry_from(cfg: Config) -> LeakGeometry:
    block = cfg.raw.get("geometry")
    if block is None:
        raise ConfigurationError("config: missing 'geometry' block")
    _check_keys(block, {"plate_preset", "plate", "raw"}, "geometry")
    given = [k for k in ("plate_preset", "plate", "raw") if k in block]
    if len(given) != 1:
        raise ConfigurationError(
            "geometry: give exactly one of plate_preset / plate / raw"
        )
    if given[0] == "plate_preset":
        number = block["plate_preset"]
        if number not in REFERENCE_PLATES:
            raise ConfigurationError(
                f"geometry.plate_preset: unknown plate {number!r}; "
                f"choose from {sorted(REFERENCE_PLATES)}"
            )
        return LeakGeometry.from_plate(REFERENCE_PLATES[number])
    if given[0] == "plate":
        plate = block["plate"]
        _check_keys(
            plate, {"area_ratio", "bore_diameter", "thickness", "label"},
            "geometry.plate",
        )
        spec = OrificePlateSpec.from_area_ratio(
            str(plate.get("label", "custom plate")),
            _number(plate, "area_ratio", "geometry.plate"),
            _number(plate, "bore_diameter", "geometry.plate"),
            _number(plate, "thickness", "geometry.plate"),
        )
        return LeakGeometry.from_plate(spec)
    rawgeo = block["raw"]
    _check_keys(
        rawgeo, {"area_outer", "area_leak", "area_inner", "length", "radius"},
        "geometry.raw",
    )
    return LeakGeometry(
        area_outer=_number(rawgeo, "area_outer", "geometry.raw"),
        area_leak=_number(rawgeo, "area_leak", "geometry.raw"),
        area_inner=_number(rawgeo, "area_inner", "geometry.raw"),
        length=_number(rawgeo, "length", "geometry.raw"),
        radius=_number(rawgeo, "radius", "geometry.raw"),
    )


def frequencies_from(cfg: Config) -> np.ndarray:
    block = cfg.raw.get("frequencies")
    if block is None:
        raise ConfigurationError("config: missing 'frequencies' block")
    _check_keys(block, {"start", "stop", "count", "values"}, "frequencies")
    if "values" in block:
        if {"start", "stop", "count"} & set(block):
            raise ConfigurationError(
                "frequencies: give either values or start/stop/count, not both"
            )
        values = block["values"]
        if not isinstance(values, list) or not values:
            raise ConfigurationError("frequencies.values: expected a non-empty list")
        return np.asarray(values, dtype=np.float64)
    start = _number(block, "start", "frequencies")
    stop = _number(block, "stop", "frequencies")
    count = block.get("count")
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ConfigurationError("frequencies.count: expected a positive integer")
    if not 0 < start < stop:
        raise ConfigurationError("frequencies: need 0 < start < stop")
    return np.linspace(start, stop, count)


def tl_options_from(cfg: Config) -> dict:
    block = cfg.raw.get("tl", {})
    _check_keys(block, {"viscous", "include_area_ratio"}, "tl")
    for key in block:
        if not isinstance(block[key], bool):
            raise ConfigurationError(f"tl.{key}: expected a boolean")
    return {
        "viscous": block.get("viscous", True),
        "include_area_ratio": block.get("include_area_ratio", True),
    }


_SOURCE_KEYS = {
    "tone": {"kind", "sample_rate", "duration", "frequency", "ispl_db"},
    "impulse": {
        "kind", "sample_rate", "duration", "peak_pressure", "center_time",
        "width", "shape", "repeat",
    },
    "broadband": {
        "kind", "sample_rate", "duration", "preset", "oispl_db", "bands",
        "growth_ratio", "bandwidth", "base_frequency",
    },
}


def build_source(cfg: Config, seed: int | None = None) -> PressureTrace:
    """Synthesize the configured source trace (deterministic under the seed)."""
    if seed is None:
        seed = cfg.seed
    block = cfg.raw.get("source")
    if block is None:
        raise ConfigurationError("config: missing 'source' block")
    kind = block.get("kind")
    if kind not in _SOURCE_KEYS:
        raise ConfigurationError(
            f"source.kind: expected one of {sorted(_SOURCE_KEYS)}, got {kind!r}"
        )
    _check_keys(block, _SOURCE_KEYS[kind], "source")
    fs = _number(block, "sample_rate", "source", DEFAULT_SAMPLE_RATE)
    duration = _number(block, "duration", "source")

    if kind == "tone":
        return synthesize_tone(
            _number(block, "frequency", "source"),
            _number(block, "ispl_db", "source"),
            fs,
            duration,
        )

    if kind == "impulse":
        shape_name = block.get("shape", "gaussian")
        try:
            shape = ImpulseShape(shape_name)
        except ValueError:
            raise ConfigurationError(
                f"source.shape: unknown shape {shape_name!r}"
            ) from None
        spec = ImpulseSpec(
            peak_pressure=_number(block, "peak_pressure", "source"),
            center_time=_number(block, "center_time", "source"),
            width=_number(block, "width", "source"),
            shape=shape,
        )
        repeat = block.get("repeat")
        if repeat is None:
            return synthesize_impulse(spec, fs, duration)
        _check_keys(repeat, {"count", "period"}, "source.repeat")
        count = repeat.get("count")
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise ConfigurationError("source.repeat.count: positive integer required")
        period = _number(repeat, "period", "source.repeat")
        if spec.center_time > period:
            raise ConfigurationError(
                "source.center_time must fall inside one repeat period"
            )
        base = synthesize_impulse(spec, fs, period)
        train = repeat_trace(base, math.ceil(duration / period))
        n = int(round(duration * fs))
        return train.with_samples(train.samples[:n])

    spec = _broadband_spec(block, seed)
    return synthesize_broadband(spec, fs, duration)


def _broadband_spec(block: dict, seed: int) -> BroadbandSpec:
    oispl_db = _number(block, "oispl_db", "source")
    base = _number(block, "base_frequency", "source", 0.0)
    if "preset" in block:
        if {"bands", "growth_ratio", "bandwidth"} & set(block):
            raise ConfigurationError(
                "source: give either a preset or explicit band parameters"
            )
        return broadband_preset(str(block["preset"]), oispl_db, seed, base)
    bands = block.get("bands", 100)
    if not isinstance(bands, int) or isinstance(bands, bool) or bands < 1:
        raise ConfigurationError("source.bands: positive integer required")
    return broadband_flat(
        oispl_db,
        seed,
        n_bands=bands,
        growth_ratio=_number(block, "growth_ratio", "source", 1.01),
        bandwidth=_number(block, "bandwidth", "source", 1.0e4),
        base_frequency=base,
    )


def tube_from(cfg: Config, medium: Medium) -> tuple[TubeLayout, dict]:
    """The tube layout plus simulation options (port choice, bounce, noise)."""
    block = cfg.raw.get("tube", {})
    _check_keys(
        block,
        {
            "bore_diameter", "source_to_mic1", "mic1_to_sample", "sample_to_mic2",
            "termination", "mic2_to_termination", "include_duct_losses",
            "multi_bounce", "port", "noise_rms",
        },
        "tube",
    )
    term = block.get("termination", "anechoic")
    refl = 0.0 + 0.0j
    if isinstance(term, dict):
        _check_keys(term, {"reflection"}, "tube.termination")
        pair = term.get("reflection")
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) for v in pair)
        ):
            raise ConfigurationError(
                "tube.termination.reflection: expected [real, imag]"
            )
        termination = Termination.REFLECTION
        refl = complex(pair[0], pair[1])
    elif term in ("anechoic", "rigid"):
        termination = Termination(term)
    else:
        raise ConfigurationError(
            f"tube.termination: expected 'anechoic', 'rigid' or "
            f"{{'reflection': [re, im]}}, got {term!r}"
        )
    for key in ("include_duct_losses", "multi_bounce"):
        if key in block and not isinstance(block[key], bool):
            raise ConfigurationError(f"tube.{key}: expected a boolean")
    port = block.get("port", "tmm")
    if port not in ("tmm", "identity", "rigid"):
        raise ConfigurationError(
            f"tube.port: expected 'tmm', 'identity' or 'rigid', got {port!r}"
        )
    layout = TubeLayout(
        bore_diameter=_number(block, "bore_diameter", "tube", 0.0254),
        source_to_mic1=_number(block, "source_to_mic1", "tube", 1.0),
        mic1_to_sample=_number(block, "mic1_to_sample", "tube", 0.5),
        sample_to_mic2=_number(block, "sample_to_mic2", "tube", 0.5),
        termination=termination,
        termination_reflection=refl,
        mic2_to_termination=_number(block, "mic2_to_termination", "tube", 0.5),
        medium=medium,
        include_duct_losses=block.get("include_duct_losses", False),
    )
    options = {
        "port": port,
        "multi_bounce": block.get("multi_bounce", False),
        "noise_rms": _number(block, "noise_rms", "tube", 0.0),
    }
    return layout, options


def _gate_from(block: dict, where: str) -> GateSpec:
    _check_keys(block, {"start", "end", "taper"}, where)
    taper_name = block.get("taper", "hann")
    try:
        taper = GateTaper(taper_name)
    except ValueError:
        raise ConfigurationError(f"{where}.taper: unknown taper {taper_name!r}") from None
    return GateSpec(
        window_start=_number(block, "start", where),
        window_end=_number(block, "end", where),
        taper=taper,
    )


@dataclass(frozen=True)
class ProcessingPlan:
    rep_period: float
    pulse_count: int
    window_length: float
    gate_incident: GateSpec
    gate_transmitted: GateSpec
    gate_reflected: GateSpec | None
    welch: WelchConfig
    noise_floor_psd: float
    snr_db: float
    band: tuple[float, float]


def processing_from(cfg: Config) -> ProcessingPlan:
    block = cfg.raw.get("processing")
    if block is None:
        raise ConfigurationError("config: missing 'processing' block")
    _check_keys(
        block,
        {
            "rep_period", "pulse_count", "window_length", "gate_incident",
            "gate_reflected", "gate_transmitted", "welch", "noise_floor_psd",
            "snr_db", "band",
        },
        "processing",
    )
    count = block.get("pulse_count", 1)
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ConfigurationError("processing.pulse_count: positive integer required")
    welch_block = block.get("welch", {})
    _check_keys(welch_block, {"block_size", "overlap"}, "processing.welch")
    size = welch_block.get("block_size", 1000)
    if not isinstance(size, int) or isinstance(size, bool):
        raise ConfigurationError("processing.welch.block_size: integer required")
    welch = WelchConfig(
        block_size=size,
        overlap_fraction=_number(welch_block, "overlap", "processing.welch", 0.5),
    )
    band_block = block.get("band", {"lo": 1000.0, "hi": 5000.0})
    _check_keys(band_block, {"lo", "hi"}, "processing.band")
    band = (
        _number(band_block, "lo", "processing.band"),
        _number(band_block, "hi", "processing.band"),
    )
    rep_period = _number(block, "rep_period", "processing")
    gate_reflected = None
    if "gate_reflected" in block:
        gate_reflected = _gate_from(block["gate_reflected"], "processing.gate_reflected")
    return ProcessingPlan(
        rep_period=rep_period,
        pulse_count=count,
        window_length=_number(block, "window_length", "processing", rep_period),
        gate_incident=_gate_from(
            _require(block, "gate_incident", "processing"), "processing.gate_incident"
        ),
        gate_transmitted=_gate_from(
            _require(block, "gate_transmitted", "processing"),
            "processing.gate_transmitted",
        ),
        gate_reflected=gate_reflected,
        welch=welch,
        noise_floor_psd=_number(block, "noise_floor_psd", "processing", 0.0),
        snr_db=_number(block, "snr_db", "processing", 10.0),
        band=band,
    )


@dataclass(frozen=True)
class CasegenPlanArgs:
    scale_m: float
    f_max: float
    dims: int
    duration_cycles: int
    broadband: bool
    target_level_db: float


def casegen_from(cfg: Config) -> CasegenPlanArgs:
    block = cfg.raw.get("casegen")
    if block is None:
        raise ConfigurationError("config: missing 'casegen' block")
    _check_keys(
        block,
        {"scale_m", "f_max", "dims", "duration_cycles", "broadband",
         "target_level_db"},
        "casegen",
    )
    dims = block.get("dims", 3)
    if dims not in (2, 3):
        raise ConfigurationError("casegen.dims: expected 2 or 3")
    cycles = block.get("duration_cycles", 40)
    if not isinstance(cycles, int) or isinstance(cycles, bool) or cycles < 1:
        raise ConfigurationError("casegen.duration_cycles: positive integer required")
    if "broadband" in block and not isinstance(block["broadband"], bool):
        raise ConfigurationError("casegen.broadband: expected a boolean")
    return CasegenPlanArgs(
        scale_m=_number(block, "scale_m", "casegen"),
        f_max=_number(block, "f_max", "casegen"),
        dims=dims,
        duration_cycles=cycles,
        broadband=block.get("broadband", False),
        target_level_db=_number(block, "target_level_db", "casegen", 120.0),
    )


def output_prefix(cfg: Config, default: str) -> str:
    block = cfg.raw.get("output", {})
    _check_keys(block, {"prefix"}, "output")
    prefix = block.get("prefix", default)
    if not isinstance(prefix, str) or not prefix:
        raise ConfigurationError("output.prefix: expected a non-empty string")
    return prefix
