"""Batch command-line front end.

Subcommands (all driven by one JSON config file):

    tl        analytical transmission-loss spectrum for a leak geometry
    synth     synthesize a tone / impulse / broadband source trace
    simulate  virtual-tube microphone traces for a source and sample
    process   impulsive 2-mic measurement chain on a trace pair
    casegen   external-solver case file plus a resolution report

Every command is deterministic for a fixed (config, seed): reruns write
byte-identical output.  Each output carries a header with the tool
version and the config file's SHA-256.  Exit codes: 0 success, 2 config
error, 3 data error, 4 physics/energy violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, io as iomod
from ._backend import active_backend
from .casegen import CasePlan, plan_case, render_case, validate_plan
from .errors import (
    ConfigurationError,
    DataError,
    DomainError,
    LeakwaveError,
    PhysicsError,
)
from .metrics import P_REF
from .signals import PressureTrace, Spectrum, SpectrumKind
from .sigproc import (
    GateSpec,
    ensemble_average,
    extract_aligned_windows,
    gate_pulse,
    tl_from_psd,
    welch_psd,
)
from .tmm import alpha_spectrum, tl_spectrum
from .tube import identity_port, rigid_port, simulate_mic_traces, two_port_from_tmm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PHYSICS = 4


def _meta(cfg: cfgmod.Config, command: str, seed: int) -> str:
    return (
        f"leakwave {__version__} command={command} "
        f"config_sha256={cfg.sha256[:12]} seed={seed}"
    )


def _effective_seed(cfg: cfgmod.Config, args) -> int:
    return args.seed if args.seed is not None else cfg.seed


def _out(args, name: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def _write_spectrum(args, path: Path, spec: Spectrum, value_name: str, meta: str,
                    include_valid: bool) -> None:
    if args.format == "json":
        payload = {
            "meta": meta,
            "frequency_hz": spec.frequencies.tolist(),
            value_name: [None if not ok else float(v)
                         for v, ok in zip(spec.values, spec.valid)],
        }
        if include_valid:
            payload["valid"] = spec.valid.astype(int).tolist()
        iomod.atomic_write_text(
            path.with_suffix(".json"), json.dumps(payload, sort_keys=True, indent=2) + "\n"
        )
    else:
        iomod.write_spectrum_csv(path, spec, value_name, meta, include_valid)


def _write_trace(args, path: Path, trace: PressureTrace, meta: str) -> None:
    if args.format == "json":
        payload = {
            "meta": meta,
            "sample_rate_hz": trace.sample_rate,
            "start_time_s": trace.start_time,
            "pressure_pa": trace.samples.tolist(),
        }
        iomod.atomic_write_text(
            path.with_suffix(".json"), json.dumps(payload, sort_keys=True, indent=2) + "\n"
        )
    else:
        iomod.write_trace_csv(path, trace, meta)


def cmd_tl(args) -> int:
    cfg = cfgmod.load_config(args.config)
    seed = _effective_seed(cfg, args)
    medium = cfgmod.medium_from(cfg)
    geom = cfgmod.geometry_from(cfg)
    freqs = cfgmod.frequencies_from(cfg)
    opts = cfgmod.tl_options_from(cfg)
    spec = tl_spectrum(geom, medium, freqs, **opts)
    alpha = alpha_spectrum(geom, medium, freqs, viscous=opts["viscous"])
    prefix = cfgmod.output_prefix(cfg, "leak")
    meta = _meta(cfg, "tl", seed)
    # "_model_" keeps analytical spectra distinct from the measurement
    # chain's outputs when both commands share one output directory
    _write_spectrum(args, _out(args, f"{prefix}_model_tl.csv"), spec, "tl_db",
                    meta, include_valid=False)
    _write_spectrum(args, _out(args, f"{prefix}_model_alpha.csv"), alpha, "alpha",
                    meta, include_valid=False)
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = cfgmod.load_config(args.config)
    seed = _effective_seed(cfg, args)
    trace = cfgmod.build_source(cfg, seed)
    prefix = cfgmod.output_prefix(cfg, "source")
    _write_trace(args, _out(args, f"{prefix}_trace.csv"), trace,
                 _meta(cfg, "synth", seed))
    return EXIT_OK


def _build_port(cfg, options, geom_needed, medium, source, viscous):
    freqs = np.fft.rfftfreq(len(source), d=1.0 / source.sample_rate)[1:]
    if options["port"] == "identity":
        return identity_port(freqs)
    if options["port"] == "rigid":
        return rigid_port(freqs)
    geom = geom_needed()
    return two_port_from_tmm(geom, medium, freqs, viscous=viscous)


def cmd_simulate(args) -> int:
    cfg = cfgmod.load_config(args.config)
    seed = _effective_seed(cfg, args)
    medium = cfgmod.medium_from(cfg)
    layout, options = cfgmod.tube_from(cfg, medium)
    source = cfgmod.build_source(cfg, seed)
    viscous = cfgmod.tl_options_from(cfg)["viscous"]
    port = _build_port(cfg, options, lambda: cfgmod.geometry_from(cfg), medium,
                       source, viscous)
    mic1, mic2 = simulate_mic_traces(
        layout, port, source, multi_bounce=options["multi_bounce"]
    )
    if options["noise_rms"] > 0:
        rng = np.random.default_rng(seed)
        mic1 = mic1.with_samples(
            mic1.samples + rng.normal(0.0, options["noise_rms"], len(mic1))
        )
        mic2 = mic2.with_samples(
            mic2.samples + rng.normal(0.0, options["noise_rms"], len(mic2))
        )
    prefix = cfgmod.output_prefix(cfg, "tube")
    meta = _meta(cfg, "simulate", seed)
    _write_trace(args, _out(args, f"{prefix}_mic1.csv"), mic1, meta)
    _write_trace(args, _out(args, f"{prefix}_mic2.csv"), mic2, meta)
    return EXIT_OK


def _averaged_psd(trace, gate: GateSpec, plan) -> Spectrum:
    """Slice aligned windows around each repetition, gate, average, estimate."""
    fs = trace.sample_rate
    center = 0.5 * (gate.window_start + gate.window_end)
    windows = extract_aligned_windows(
        trace, center, plan.rep_period, plan.pulse_count, plan.window_length
    )
    w = len(windows[0])
    rel_center = (w // 2) / fs
    half = 0.5 * (gate.window_end - gate.window_start)
    rel_gate = GateSpec(rel_center - half, rel_center + half, gate.taper)
    gated = [gate_pulse(win, rel_gate) for win in windows]
    return welch_psd(ensemble_average(gated), plan.welch)


def cmd_process(args) -> int:
    cfg = cfgmod.load_config(args.config)
    seed = _effective_seed(cfg, args)
    plan = cfgmod.processing_from(cfg)
    mic1 = iomod.read_trace_csv(args.incident)
    mic2 = iomod.read_trace_csv(args.transmitted)

    psd_inc = _averaged_psd(mic1, plan.gate_incident, plan)
    psd_trans = _averaged_psd(mic2, plan.gate_transmitted, plan)
    floor = plan.noise_floor_psd if plan.noise_floor_psd > 0 else None
    tl = tl_from_psd(psd_inc, psd_trans, noise_floor_psd=floor, snr_db=plan.snr_db)

    prefix = cfgmod.output_prefix(cfg, "measured")
    meta = _meta(cfg, "process", seed)
    _write_spectrum(args, _out(args, f"{prefix}_tl.csv"), tl, "tl_db", meta,
                    include_valid=True)

    lo, hi = plan.band
    in_band = (tl.frequencies >= lo) & (tl.frequencies <= hi)

    alpha = None
    if plan.gate_reflected is not None:
        # outside the analysis band the gated estimates are leakage-dominated,
        # so the energy bookkeeping is only meaningful in band
        psd_refl = _averaged_psd(mic1, plan.gate_reflected, plan)
        valid = tl.valid & psd_refl.valid & in_band
        with np.errstate(invalid="ignore", divide="ignore"):
            r2 = np.where(valid, psd_refl.values / psd_inc.values, np.nan)
            tau = np.where(valid, psd_trans.values / psd_inc.values, np.nan)
        alpha_vals = np.where(valid, 1.0 - r2 - tau, np.nan)
        if np.any(alpha_vals[valid] < -0.02):
            raise PhysicsError(
                "estimated reflected+transmitted power exceeds incident power "
                "inside the analysis band"
            )
        alpha_vals = np.where(valid, np.maximum(alpha_vals, 0.0), np.nan)
        alpha = Spectrum(
            tl.frequencies, alpha_vals, SpectrumKind.POWER_COEFFICIENT,
            valid=valid, energy_tol=0.02,
        )
        _write_spectrum(args, _out(args, f"{prefix}_alpha.csv"), alpha, "alpha",
                        meta, include_valid=True)

    df = psd_inc.frequencies[1] - psd_inc.frequencies[0]
    band_valid = in_band & tl.valid
    summary = {
        "meta": meta,
        "backend": active_backend(),
        "oispl_in_db": 10.0 * float(
            np.log10(np.sum(psd_inc.values) * df / P_REF**2)
        ),
        "oispl_out_db": 10.0 * float(
            np.log10(np.sum(psd_trans.values) * df / P_REF**2)
        ),
        "band_hz": [lo, hi],
        "valid_bins_in_band": int(np.sum(band_valid)),
        "bins_in_band": int(np.sum(in_band)),
        "mean_tl_db": (
            float(np.mean(tl.values[band_valid])) if np.any(band_valid) else None
        ),
        "alpha_computed": alpha is not None,
    }
    iomod.atomic_write_text(
        _out(args, f"{prefix}_summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    if not np.any(tl.valid):
        print("process: every bin failed the SNR mask", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def cmd_casegen(args) -> int:
    cfg = cfgmod.load_config(args.config)
    seed = _effective_seed(cfg, args)
    plan_args = cfgmod.casegen_from(cfg)
    medium = cfgmod.medium_from(cfg)
    plan = plan_case(
        plan_args.scale_m,
        plan_args.f_max,
        medium,
        dims=plan_args.dims,
        duration_cycles=plan_args.duration_cycles,
        broadband=plan_args.broadband,
        target_level_db=plan_args.target_level_db,
    )
    if args.transverse is not None:
        if args.transverse < 1:
            raise ConfigurationError("--transverse must be a positive cell count")
        counts = (12 * args.transverse,) + (args.transverse,) * (plan_args.dims - 1)
        plan = CasePlan(
            domain_extents=plan.domain_extents,
            grid_counts=counts,
            dt=plan.dt,
            n_steps=plan.n_steps,
            frequency=plan.frequency,
            broadband=plan.broadband,
            target_level_db=plan.target_level_db,
            dimensionality=plan.dimensionality,
            dt_provenance=plan.dt_provenance,
        )
    report = validate_plan(plan, medium, plan_args.scale_m)

    prefix = cfgmod.output_prefix(cfg, "case")
    meta = _meta(cfg, "casegen", seed)
    iomod.atomic_write_text(
        _out(args, f"{prefix}_case.txt"), f"# {meta}\n" + render_case(plan)
    )
    iomod.atomic_write_text(
        _out(args, f"{prefix}_report.txt"), f"# {meta}\n" + report.render() + "\n"
    )
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        print(f"casegen: plan violates rule(s): {names}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakwave",
        description="Leak-path sound transmission modeling and the two-sided "
        "impedance-tube measurement chain.",
    )
    parser.add_argument("--version", action="version",
                        version=f"leakwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_tl = sub.add_parser("tl", help="analytical TL and absorption spectra")
    common(p_tl)
    p_tl.set_defaults(func=cmd_tl)

    p_synth = sub.add_parser("synth", help="synthesize a source trace")
    common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_sim = sub.add_parser("simulate", help="virtual-tube microphone traces")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_proc = sub.add_parser("process", help="measurement chain on a trace pair")
    common(p_proc)
    p_proc.add_argument("--incident", required=True,
                        help="mic 1 (source side) trace CSV")
    p_proc.add_argument("--transmitted", required=True,
                        help="mic 2 (transmission side) trace CSV")
    p_proc.set_defaults(func=cmd_process)

    p_case = sub.add_parser("casegen", help="solver case file + resolution report")
    common(p_case)
    p_case.add_argument("--transverse", type=int, default=None,
                        help="override the transverse cell count (validation "
                        "still runs and may fail the plan)")
    p_case.set_defaults(func=cmd_casegen)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"leakwave {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"leakwave {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PhysicsError as exc:
        print(f"leakwave {args.command}: physics violation: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except LeakwaveError as exc:
        print(f"leakwave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
