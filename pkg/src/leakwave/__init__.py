"""leakwave: sound transmission through leak paths and its measurement.

The package couples an analytical orifice-leak transmission model with a
virtual two-sided impedance tube and the full impulsive two-microphone
signal-processing chain, so the measurement pipeline can be validated
end to end against the model.  A case planner emits resolution-checked
input files for an external compressible-flow solver.
"""

__version__ = "0.1.0"

from ._backend import active_backend
from .medium import Medium
from .metrics import (
    P_REF,
    absorption_coefficient,
    circular_duct_cutoff,
    ispl,
    oispl,
    stokes_wavelength,
    strouhal,
    transmission_loss,
)
from .signals import PressureTrace, Spectrum, SpectrumKind
from .tmm import (
    REFERENCE_PLATES,
    LeakGeometry,
    OrificePlateSpec,
    WaveAmplitudes,
    alpha_spectrum,
    assemble_coupling_matrix,
    blackstock_wavenumber,
    solve_amplitudes,
    tl_spectrum,
    transmission_coefficient,
)
from .synth import (
    BroadbandSpec,
    ImpulseShape,
    ImpulseSpec,
    band_layout,
    broadband_flat,
    broadband_preset,
    synthesize_broadband,
    synthesize_impulse,
    synthesize_tone,
)
from .sigproc import (
    GateSpec,
    GateTaper,
    TwoMicLayout,
    WelchConfig,
    absorption_from_reflection,
    ensemble_average,
    gate_pulse,
    interpolate_power_coefficient,
    tl_from_psd,
    two_mic_decompose,
    welch_psd,
)
from .tube import (
    Termination,
    TubeLayout,
    TwoPort,
    identity_port,
    rigid_port,
    simulate_mic_traces,
    simulate_standing_wave,
    two_port_from_tmm,
)
from .casegen import (
    CasePlan,
    CaseReport,
    emit_case,
    reference_case_plans,
    parse_case,
    plan_case,
    validate_plan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
