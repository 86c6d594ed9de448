"""Acceptance gate: every release-blocking criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.  Tolerances are pinned here and nowhere else.

Deliberately out of reach and therefore not asserted anywhere:
* the measured-vs-analytical gap of roughly 3-4 dB at higher frequencies
  reported for the physical rig (a hardware effect, not reproducible);
* nonlinear absorption spectra of the external flow solver (vortex
  shedding physics requires that solver; only its case files are checked).
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

import leakwave as lw
from leakwave.cli import main

FS = 51200.0
C0 = 343.0
AIR = lw.Medium.air_standard()
INVISCID = AIR.inviscid()

PLATES = {n: lw.LeakGeometry.from_plate(lw.REFERENCE_PLATES[n]) for n in range(1, 6)}


def report(name: str, detail: str):
    print(f"ACCEPTANCE PASS: {name} ({detail})")


def test_closed_form_oracle_equivalence():
    """Inviscid solve equals the expansion-chamber formula to 1e-9 relative
    for sigma in {0.005, 0.01, 0.05, 0.1, 1} across 1-6 kHz, in under 1 s."""
    start = time.perf_counter()
    freqs = np.linspace(1000.0, 6000.0, 201)
    worst = 0.0
    for sigma in (0.005, 0.01, 0.05, 0.1, 1.0):
        bore = math.pi * 0.0127**2
        geom = lw.LeakGeometry(bore, sigma * bore, bore, 0.125 * 0.0254,
                               0.0127 * math.sqrt(sigma))
        spec = lw.tl_spectrum(geom, INVISCID, freqs, viscous=False)
        k_leff = 2 * math.pi * freqs / C0 * geom.effective_length()
        inv_tau = (
            np.cos(k_leff) ** 2
            + 0.25 * (sigma + 1 / sigma) ** 2 * np.sin(k_leff) ** 2
        )
        solved_inv_tau = 10.0 ** (spec.values / 10.0)
        worst = max(worst, float(np.max(np.abs(solved_inv_tau / inv_tau - 1.0))))
    elapsed = time.perf_counter() - start
    assert worst < 1e-9
    assert elapsed < 1.0
    report("closed-form oracle equivalence",
           f"max rel dev {worst:.2e}, {elapsed * 1e3:.0f} ms")


def test_limiting_cases():
    """Open plate transparent, TL -> 0 at low frequency, lossless model
    conserves power, viscosity only ever adds loss."""
    band = np.linspace(1000.0, 5000.0, 81)
    open_tl = lw.tl_spectrum(PLATES[5], AIR, band, viscous=True)
    assert np.all(np.abs(open_tl.values) < 0.05)

    low = np.array([0.01, 0.1, 1.0])
    for geom in PLATES.values():
        spec = lw.tl_spectrum(geom, INVISCID, low, viscous=False)
        assert abs(spec.values[0]) < 1e-6
        assert np.all(spec.values[:-1] <= spec.values[1:] + 1e-12)

    for geom in PLATES.values():
        alpha = lw.alpha_spectrum(geom, INVISCID, band, viscous=False)
        assert np.all(np.abs(alpha.values) <= 1e-9)

    for geom in PLATES.values():
        visc = lw.tl_spectrum(geom, AIR, band, viscous=True)
        ideal = lw.tl_spectrum(geom, AIR, band, viscous=False)
        assert np.all(visc.values >= ideal.values - 1e-12)
    report("limiting cases",
           "open plate < 0.05 dB, TL->0 at DC, inviscid alpha <= 1e-9, "
           "viscous TL >= inviscid")


def test_plate_ordering():
    """Smaller openings block more at every bin in 1-5 kHz: the published
    measured gap of 3-4 dB at high frequency is a rig effect, documented
    in the module docstring and not asserted."""
    band = np.linspace(1000.0, 5000.0, 81)
    curves = {n: lw.tl_spectrum(geom, AIR, band, viscous=True).values
              for n, geom in PLATES.items()}
    for tighter, looser in [(1, 2), (2, 3), (3, 4), (4, 5)]:
        assert np.all(curves[tighter] > curves[looser])
    margins = [float(np.min(curves[a] - curves[b]))
               for a, b in [(1, 2), (2, 3), (3, 4), (4, 5)]]
    report("plate ordering", f"min gaps {['%.2f' % m for m in margins]} dB")


def _flagship_dataset():
    period, count, duration = 0.04, 100, 4.04
    noise, seed = 0.01, 20260808
    spec = lw.ImpulseSpec(200.0, 0.02, 1.5e-4)
    base = lw.synthesize_impulse(spec, FS, period)
    n = int(round(duration * FS))
    train = base.with_samples(np.tile(base.samples, count + 1)[:n])
    port = lw.two_port_from_tmm(
        PLATES[1], AIR, np.fft.rfftfreq(n, 1 / FS)[1:], viscous=True
    )
    mic1, mic2 = lw.simulate_mic_traces(lw.TubeLayout(), port, train)
    rng = np.random.default_rng(seed)
    mic1 = mic1.with_samples(mic1.samples + rng.normal(0, noise, n))
    mic2 = mic2.with_samples(mic2.samples + rng.normal(0, noise, n))
    return mic1, mic2, period, count, noise


def test_flagship_round_trip():
    """Plate #1 virtual-tube pulses through gate -> 100-pulse ensemble ->
    Welch (1000-point blocks, 50% overlap) -> PSD-ratio TL recover the
    analytical spectrum within 0.5 dB on every SNR-valid bin in 1-5 kHz."""
    start = time.perf_counter()
    mic1, mic2, period, count, noise = _flagship_dataset()
    t_inc = 0.02 + 1.0 / C0
    t_trn = 0.02 + 2.0 / C0
    window = 0.03
    cfg = lw.WelchConfig(1000, 0.5)

    def averaged_psd(trace, center, half_gate):
        windows = lw.sigproc.extract_aligned_windows(
            trace, center, period, count, window
        )
        rel_center = (len(windows[0]) // 2) / FS
        gate = lw.GateSpec(rel_center - half_gate, rel_center + half_gate,
                           lw.GateTaper.HANN)
        gated = [lw.gate_pulse(w, gate) for w in windows]
        return lw.welch_psd(lw.ensemble_average(gated), cfg)

    psd_inc = averaged_psd(mic1, t_inc, 1.2e-3)
    psd_trans = averaged_psd(mic2, t_trn, 8.0e-3)
    floor = 2 * noise**2 / FS / count
    tl = lw.tl_from_psd(psd_inc, psd_trans, noise_floor_psd=floor, snr_db=10.0)

    band = (tl.frequencies >= 1000.0) & (tl.frequencies <= 5000.0)
    valid = band & tl.valid
    assert np.all(tl.valid[band]), "SNR mask must keep the whole band"
    analytic = lw.tl_spectrum(PLATES[1], AIR, tl.frequencies[valid], viscous=True)
    err = tl.values[valid] - analytic.values
    elapsed = time.perf_counter() - start
    assert np.max(np.abs(err)) < 0.5
    assert elapsed < 30.0
    report(
        "flagship round trip",
        f"max |err| {np.max(np.abs(err)):.3f} dB over {int(valid.sum())} bins, "
        f"{elapsed:.1f} s",
    )


def test_spectral_plumbing_exactness():
    """51.2 Hz bins exactly, Parseval within 1%, duct cutoff consistent with
    the published 7.92 kHz within 1%."""
    tone = lw.synthesize_tone(1000.0, 100.0, 51200.0, 0.25)
    psd = lw.welch_psd(tone, lw.WelchConfig(1000, 0.5))
    assert float(psd.frequencies[1] - psd.frequencies[0]) == 51.2

    rng = np.random.default_rng(777)
    noise = lw.PressureTrace(rng.normal(0.0, 1.25, int(4 * FS)), FS)
    noise_psd = lw.welch_psd(noise, lw.WelchConfig(1000, 0.5))
    df = noise_psd.frequencies[1] - noise_psd.frequencies[0]
    closure = np.sum(noise_psd.values) * df / np.mean(noise.samples**2)
    assert abs(closure - 1.0) < 0.01

    # room-temperature sound speeds up to the 346.3 m/s reference point that
    # anchors the 7.99 kHz upper edge
    for c0 in np.linspace(343.0, 346.3, 9):
        cutoff = lw.circular_duct_cutoff(0.0254, float(c0))
        assert 7910.0 <= cutoff <= 7990.5
        assert abs(cutoff - 7920.0) / 7920.0 < 0.01
    report("spectral plumbing exactness",
           f"df = 51.2 Hz exact, Parseval closure {closure:.4f}, "
           "cutoff in [7.91, 7.99] kHz")


def test_two_microphone_inversion():
    """100 seeded complex reflections with |R| <= 1 recovered to 1e-6 on
    non-singular bins; reflective-termination absorption matches 1 - |R|^2."""
    rng = np.random.default_rng(4242)
    layout = lw.TwoMicLayout(mic_spacing=0.05, mic1_to_reference=0.3, medium=AIR)
    tested = 0
    for _ in range(100):
        target = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        f = rng.uniform(300.0, 3200.0)
        tone = lw.synthesize_tone(f, 94.0, FS, 0.5)
        p1, p2 = lw.simulate_standing_wave(layout, target, tone)
        inc, refl, r2 = lw.two_mic_decompose(p1, p2, layout)
        if not inc.valid[0]:
            continue  # singular bin: flagged, never fabricated
        recovered = refl.values[0] / inc.values[0]
        assert abs(recovered - target) < 1e-6
        alpha = lw.absorption_from_reflection(r2)
        assert alpha.values[0] == pytest.approx(1 - abs(target) ** 2, abs=1e-6)
        tested += 1
    assert tested >= 90
    report("two-microphone inversion", f"{tested}/100 non-singular draws exact")


def test_broadband_synthesis():
    """Realized OISPL within 0.5 dB of 120 and 150 dB targets; band-averaged
    spectrum flat within +-1 dB across 1-6 kHz; first band width equals
    B(r-1)/(r^N - 1) to 1e-9 relative."""
    _, widths = lw.band_layout(100, 1.01, 1.0e4)
    assert widths[0] == pytest.approx(58.657431253905181, rel=1e-9)

    worst_band = 0.0
    for target in (120.0, 150.0):
        spec = lw.broadband_flat(target, seed=1234)
        trace = lw.synthesize_broadband(spec, FS, 2.0)
        realized = lw.oispl([trace.rms()])
        assert abs(realized - target) < 0.5
        psd = lw.welch_psd(trace, lw.WelchConfig(1000, 0.5))
        level = lw.P_REF**2 * 10 ** (target / 10.0) / spec.bandwidth
        for lo in range(1000, 6000, 1000):
            mask = (psd.frequencies >= lo) & (psd.frequencies < lo + 1000)
            dev = 10 * math.log10(float(np.mean(psd.values[mask])) / level)
            worst_band = max(worst_band, abs(dev))
            assert abs(dev) < 1.0
    report("broadband synthesis",
           f"OISPL on target, flatness within {worst_band:.2f} dB")


def test_case_planning():
    """Planner reproduces the published 3D transverse counts within 10% and
    every published run-matrix row passes validation.  The solver's
    absorption spectra themselves are out of reach at desk scale."""
    published = {1000.0: 300, 2000.0: 420, 3000.0: 520}
    got = {}
    for f, reference in published.items():
        plan = lw.plan_case(0.025, f, AIR, dims=3)
        got[f] = plan.grid_counts[1]
        assert abs(plan.grid_counts[1] - reference) / reference <= 0.10
        assert lw.validate_plan(plan, AIR, 0.025).passed
    for name, plan in lw.reference_case_plans().items():
        assert lw.validate_plan(plan, AIR, 0.025).passed, name
    report("case planning",
           f"transverse counts {got} vs published {published}; 5/5 rows valid")


def test_cli_determinism(tmp_path):
    """Every subcommand re-run with the same config and seed writes
    byte-identical files."""
    t_inc = 0.02 + 1.0 / C0
    t_trn = 0.02 + 2.0 / C0
    sim_cfg = {
        "schema_version": 1,
        "seed": 11,
        "geometry": {"plate_preset": 1},
        "source": {"kind": "impulse", "peak_pressure": 200.0, "center_time": 0.02,
                   "width": 1.5e-4, "sample_rate": FS, "duration": 0.44,
                   "repeat": {"count": 10, "period": 0.04}},
        "tube": {"port": "tmm", "noise_rms": 0.01},
    }
    proc_cfg = {
        "schema_version": 1,
        "seed": 11,
        "processing": {
            "rep_period": 0.04, "pulse_count": 10, "window_length": 0.03,
            "welch": {"block_size": 1000, "overlap": 0.5},
            "noise_floor_psd": 2 * 0.01**2 / FS / 10,
            "gate_incident": {"start": t_inc - 1.2e-3, "end": t_inc + 1.2e-3},
            "gate_transmitted": {"start": t_trn - 8e-3, "end": t_trn + 8e-3},
        },
    }
    configs = {
        "tl": {"schema_version": 1, "geometry": {"plate_preset": 2},
               "frequencies": {"start": 1000.0, "stop": 5000.0, "count": 41}},
        "synth": {"schema_version": 1, "seed": 11,
                  "source": {"kind": "broadband", "preset": "published-formula",
                             "oispl_db": 120.0, "sample_rate": FS,
                             "duration": 0.2}},
        "simulate": sim_cfg,
        "casegen": {"schema_version": 1,
                    "casegen": {"scale_m": 0.025, "f_max": 2000.0, "dims": 3,
                                "duration_cycles": 40}},
    }
    checked = []
    for command, payload in configs.items():
        cfg = tmp_path / f"{command}.json"
        cfg.write_text(json.dumps(payload, indent=2))
        out_a, out_b = tmp_path / f"{command}_a", tmp_path / f"{command}_b"
        assert main([command, "--config", str(cfg), "--out-dir", str(out_a)]) == 0
        assert main([command, "--config", str(cfg), "--out-dir", str(out_b)]) == 0
        names = sorted(p.name for p in out_a.iterdir())
        assert names == sorted(p.name for p in out_b.iterdir()) and names
        for name in names:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), (
                f"{command}: {name} differs between reruns"
            )
        checked.append(command)

    # process consumes the simulate outputs
    proc = tmp_path / "process.json"
    proc.write_text(json.dumps(proc_cfg, indent=2))
    mics = [str(tmp_path / "simulate_a" / f"tube_mic{i}.csv") for i in (1, 2)]
    out_a, out_b = tmp_path / "process_a", tmp_path / "process_b"
    for out in (out_a, out_b):
        assert main(["process", "--config", str(proc), "--incident", mics[0],
                     "--transmitted", mics[1], "--out-dir", str(out)]) == 0
    for name in sorted(p.name for p in out_a.iterdir()):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    checked.append("process")

    # cross-process rerun of one command for good measure
    code = (
        "import sys; from leakwave.cli import main; sys.exit(main(["
        f"'tl','--config',r'{tmp_path / 'tl.json'}','--out-dir',"
        f"r'{tmp_path / 'tl_sub'}']))"
    )
    result = subprocess.run([sys.executable, "-c", code], capture_output=True,
                            text=True)
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "tl_sub" / "leak_model_tl.csv").read_bytes() == (
        tmp_path / "tl_a" / "leak_model_tl.csv"
    ).read_bytes()
    report("CLI determinism", f"commands byte-stable: {', '.join(checked)}")
