"""Virtual impedance tube: port construction, propagation, terminations."""

import math

import numpy as np
import pytest

from leakwave.errors import ConfigurationError, DomainError
from leakwave.medium import Medium
from leakwave.sigproc import TwoMicLayout, two_mic_decompose, absorption_from_reflection
from leakwave.synth import ImpulseSpec, synthesize_impulse, synthesize_tone
from leakwave.tmm import REFERENCE_PLATES, LeakGeometry, alpha_spectrum
from leakwave.tube import (
    Termination,
    TubeLayout,
    TwoPort,
    identity_port,
    rigid_port,
    simulate_mic_traces,
    simulate_standing_wave,
    two_port_from_tmm,
)

FS = 51200.0
AIR = Medium.air_standard()
INVISCID = AIR.inviscid()


def impulse_source(duration=0.08, center=0.02, width=2.0e-4):
    return synthesize_impulse(ImpulseSpec(200.0, center, width), FS, duration)


def grid_for(source):
    return np.fft.rfftfreq(len(source), 1.0 / source.sample_rate)[1:]


class TestTwoPort:
    FREQS = np.linspace(1000.0, 5000.0, 33)

    def test_uniform_duct_port_is_transparent(self):
        s = math.pi * 0.0127**2
        geom = LeakGeometry(s, s, s, 0.003175, 0.0127)
        port = two_port_from_tmm(geom, INVISCID, self.FREQS, viscous=False)
        assert np.max(np.abs(port.reflection)) < 1e-12
        assert np.allclose(np.abs(port.transmission), 1.0, atol=1e-12)

    def test_transmission_consistent_with_coefficient(self):
        from leakwave.tmm import solve_amplitudes, transmission_coefficient, \
            blackstock_wavenumber

        geom = LeakGeometry.from_plate(REFERENCE_PLATES[1])
        port = two_port_from_tmm(geom, AIR, self.FREQS, viscous=True)
        i = 10
        k = blackstock_wavenumber(AIR, geom.radius, self.FREQS[i])
        amps = solve_amplitudes(geom, k)
        tau = transmission_coefficient(amps, geom)
        assert abs(port.transmission[i]) ** 2 == pytest.approx(tau, rel=1e-12)

    def test_passivity_for_all_plates(self):
        freqs = np.linspace(500.0, 6000.0, 45)
        for n in REFERENCE_PLATES:
            geom = LeakGeometry.from_plate(REFERENCE_PLATES[n])
            port = two_port_from_tmm(geom, AIR, freqs, viscous=True)
            power = np.abs(port.reflection) ** 2 + port.area_ratio * np.abs(
                port.transmission
            ) ** 2
            assert np.all(power <= 1 + 1e-9)

    def test_active_port_rejected(self):
        freqs = np.array([100.0, 200.0])
        with pytest.raises(DomainError):
            TwoPort(freqs, np.full(2, 0.9 + 0j), np.full(2, 0.6 + 0j))

    def test_energy_bookkeeping_against_alpha(self):
        geom = LeakGeometry.from_plate(REFERENCE_PLATES[2])
        port = two_port_from_tmm(geom, AIR, self.FREQS, viscous=True)
        alpha = alpha_spectrum(geom, AIR, self.FREQS, viscous=True)
        balance = (
            np.abs(port.reflection) ** 2
            + port.area_ratio * np.abs(port.transmission) ** 2
            + alpha.values
        )
        assert np.allclose(balance, 1.0, atol=1e-6)


class TestSimulateMicTraces:
    def test_identity_port_delays_source(self):
        source = impulse_source()
        layout = TubeLayout()
        port = identity_port(grid_for(source))
        mic1, mic2 = simulate_mic_traces(layout, port, source)
        lag = np.argmax(np.correlate(mic2.samples, mic1.samples, "full")) - (
            len(mic1) - 1
        )
        expected = (layout.mic1_to_sample + layout.sample_to_mic2) / AIR.c0 * FS
        assert abs(lag - expected) <= 1.0
        # mic1 sees only the direct arrival
        assert mic1.rms() == pytest.approx(
            float(np.sqrt(np.mean(source.samples**2))), rel=1e-6
        )

    def test_rigid_port_blocks_and_doubles_reflection(self):
        source = impulse_source()
        layout = TubeLayout()
        port = rigid_port(grid_for(source))
        mic1, mic2 = simulate_mic_traces(layout, port, source)
        assert np.sum(mic2.samples**2) < 1e-10 * np.sum(mic1.samples**2)
        # two equal-energy arrivals: direct at ~22.9 ms, reflected ~2.9 ms later
        t = mic1.times()
        first = (t > 0.020) & (t < 0.024)
        second = (t > 0.024) & (t < 0.028)
        e1, e2 = np.sum(mic1.samples[first] ** 2), np.sum(mic1.samples[second] ** 2)
        assert e1 == pytest.approx(e2, rel=1e-6)

    def test_time_shift_equivariance(self):
        source = impulse_source()
        layout = TubeLayout()
        port = identity_port(grid_for(source))
        m1a, m2a = simulate_mic_traces(layout, port, source)
        shift = 512
        shifted = source.with_samples(np.roll(source.samples, shift))
        m1b, m2b = simulate_mic_traces(layout, port, shifted)
        assert np.allclose(np.roll(m1a.samples, shift), m1b.samples, atol=1e-9)
        assert np.allclose(np.roll(m2a.samples, shift), m2b.samples, atol=1e-9)

    def test_linearity_in_source_amplitude(self):
        source = impulse_source()
        layout = TubeLayout()
        geom = LeakGeometry.from_plate(REFERENCE_PLATES[3])
        port = two_port_from_tmm(geom, AIR, grid_for(source))
        m1a, m2a = simulate_mic_traces(layout, port, source)
        doubled = source.with_samples(2.0 * source.samples)
        m1b, m2b = simulate_mic_traces(layout, port, doubled)
        assert np.allclose(m1b.samples, 2 * m1a.samples, rtol=1e-12, atol=1e-12)
        assert np.allclose(m2b.samples, 2 * m2a.samples, rtol=1e-12, atol=1e-12)

    def test_wraparound_guard(self):
        source = impulse_source(duration=0.01, center=0.005)
        port = identity_port(grid_for(source))
        with pytest.raises(ConfigurationError):
            simulate_mic_traces(TubeLayout(), port, source)

    def test_cutoff_guard_rejects_ultrasonic_source(self):
        tone = synthesize_tone(10000.0, 110.0, FS, 0.1)
        port = identity_port(grid_for(tone))
        with pytest.raises(ConfigurationError):
            simulate_mic_traces(TubeLayout(source_to_mic1=0.1,
                                           mic1_to_sample=0.05,
                                           sample_to_mic2=0.05), port, tone)

    def test_duct_losses_attenuate(self):
        source = impulse_source()
        lossy = TubeLayout(include_duct_losses=True)
        clean = TubeLayout()
        port = identity_port(grid_for(source))
        m1_clean, _ = simulate_mic_traces(clean, port, source)
        m1_lossy, _ = simulate_mic_traces(lossy, port, source)
        assert m1_lossy.rms() < m1_clean.rms()

    def test_termination_echo_appears_at_mic2(self):
        source = impulse_source(duration=0.16)
        layout = TubeLayout(
            termination=Termination.REFLECTION,
            termination_reflection=0.6 + 0.0j,
            mic2_to_termination=1.0,
        )
        port = identity_port(grid_for(source))
        _, mic2 = simulate_mic_traces(layout, port, source)
        t = mic2.times()
        # direct transmitted arrival at 2.0 m, echo after 2 more meters
        direct = np.sum(mic2.samples[(t > 0.024) & (t < 0.028)] ** 2)
        echo = np.sum(mic2.samples[(t > 0.030) & (t < 0.034)] ** 2)
        assert echo == pytest.approx(0.36 * direct, rel=1e-6)

    def test_multi_bounce_adds_cavity_ringing(self):
        source = impulse_source(duration=0.32)
        geom = LeakGeometry.from_plate(REFERENCE_PLATES[4])
        port = two_port_from_tmm(geom, AIR, grid_for(source))
        layout = TubeLayout(
            termination=Termination.REFLECTION,
            termination_reflection=0.8 + 0.0j,
            mic2_to_termination=0.5,
        )
        single = simulate_mic_traces(layout, port, source, multi_bounce=False)
        multi = simulate_mic_traces(layout, port, source, multi_bounce=True)
        # second-order echo energy only exists in the multi-bounce run
        t = multi[1].times()
        late = (t > 0.036) & (t < 0.044)
        assert np.sum(multi[1].samples[late] ** 2) > 10 * np.sum(
            single[1].samples[late] ** 2
        )

    def test_multi_bounce_unstable_cavity_rejected(self):
        source = impulse_source(duration=0.32)
        port = rigid_port(grid_for(source))
        layout = TubeLayout(termination=Termination.RIGID)
        with pytest.raises(ConfigurationError):
            simulate_mic_traces(layout, port, source, multi_bounce=True)


class TestSimulateStandingWave:
    def test_anechoic_field_is_unit_everywhere(self):
        layout = TwoMicLayout(0.1, 0.3, AIR)
        tone = synthesize_tone(800.0, 94.0, FS, 1.0)
        p1, p2 = simulate_standing_wave(layout, 0.0 + 0j, tone)
        assert abs(p1.values[0]) == pytest.approx(1.0, abs=1e-12)
        assert abs(p2.values[0]) == pytest.approx(1.0, abs=1e-12)

    def test_pressure_node_under_rigid_wall(self):
        # mic 1 at a quarter wavelength from the wall sits on a node
        f = 400.0
        l1 = AIR.c0 / (4 * f)
        layout = TwoMicLayout(0.1, l1, AIR)
        tone = synthesize_tone(f, 94.0, FS, 1.0)
        p1, _ = simulate_standing_wave(layout, 1.0 + 0j, tone)
        assert abs(p1.values[0]) < 1e-12

    def test_reflective_termination_absorption_path(self):
        # lossy reflector: alpha from the 2-mic path equals 1 - |R|^2 exactly
        target = 0.7 * np.exp(1j * 0.4)
        layout = TwoMicLayout(0.07, 0.4, AIR)
        tone = synthesize_tone(1200.0, 94.0, FS, 1.0)
        p1, p2 = simulate_standing_wave(layout, target, tone)
        _, _, r2 = two_mic_decompose(p1, p2, layout)
        alpha = absorption_from_reflection(r2)
        assert alpha.values[0] == pytest.approx(1 - abs(target) ** 2, abs=1e-6)


class TestTubeLayoutValidation:
    def test_negative_length_rejected(self):
        with pytest.raises(DomainError):
            TubeLayout(source_to_mic1=-1.0)

    def test_anechoic_with_reflection_rejected(self):
        with pytest.raises(DomainError):
            TubeLayout(termination=Termination.ANECHOIC,
                       termination_reflection=0.5 + 0j)

    def test_termination_coefficients(self):
        assert TubeLayout().termination_coefficient() == 0
        assert TubeLayout(
            termination=Termination.RIGID
        ).termination_coefficient() == 1
        layout = TubeLayout(termination=Termination.REFLECTION,
                            termination_reflection=0.3 - 0.1j)
        assert layout.termination_coefficient() == 0.3 - 0.1j
