"""Case planning: Stokes-layer grid sizing, rule validation, file round trips."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leakwave.casegen import (
    CasePlan,
    emit_case,
    reference_case_plans,
    parse_case,
    plan_case,
    render_case,
    validate_plan,
)
from leakwave.errors import ConfigurationError, DataError, DomainError
from leakwave.medium import Medium
from leakwave.metrics import stokes_wavelength

AIR = Medium.air_standard()
L_REF = 0.025  # inlet-to-outlet scale of the modeled geometry [m]

#: published 3D transverse grid counts per tone frequency
PUBLISHED_TRANSVERSE = {1000.0: 300, 2000.0: 420, 3000.0: 520}


class TestPlanCase:
    def test_3d_transverse_counts_near_published(self):
        for f, published in PUBLISHED_TRANSVERSE.items():
            plan = plan_case(L_REF, f, AIR, dims=3)
            transverse = plan.grid_counts[1]
            assert abs(transverse - published) / published <= 0.10
            assert plan.grid_counts[0] == 12 * transverse
            assert plan.grid_counts[1] == plan.grid_counts[2]

    def test_stokes_floor_respected(self):
        for f in (1000.0, 2000.0, 3000.0, 6000.0):
            plan = plan_case(L_REF, f, AIR, dims=3)
            lam = stokes_wavelength(AIR.kinematic_viscosity, f)
            floor = 5 * L_REF / lam
            assert plan.grid_counts[1] >= floor
            assert plan.grid_counts[1] % 20 == 0

    def test_published_dt_and_steps_adopted(self):
        plan = plan_case(L_REF, 1000.0, AIR, dims=3)
        assert plan.dt == 1.0e-7
        assert plan.n_steps == 400_000
        assert plan.dt_provenance == "table"
        plan2k = plan_case(L_REF, 2000.0, AIR, dims=3)
        assert (plan2k.dt, plan2k.n_steps) == (7.5e-8, 540_000)

    def test_unlisted_frequency_uses_cfl(self):
        plan = plan_case(L_REF, 4000.0, AIR, dims=3, duration_cycles=10)
        assert plan.dt_provenance == "cfl"
        assert plan.dt == pytest.approx(0.7 / plan.grid_counts[1], rel=1e-12)
        assert plan.n_steps >= 10

    def test_broadband_defaults_to_published_step_count(self):
        plan = plan_case(L_REF, 6000.0, AIR, dims=2, broadband=True)
        assert plan.n_steps == 5_000_000
        assert plan.broadband

    def test_plans_always_validate(self):
        for dims in (2, 3):
            for f in (500.0, 1000.0, 2500.0, 6000.0):
                plan = plan_case(L_REF, f, AIR, dims=dims)
                assert validate_plan(plan, AIR, L_REF).passed

    @given(st.floats(min_value=100.0, max_value=20000.0),
           st.floats(min_value=100.0, max_value=20000.0))
    def test_grid_monotone_in_frequency(self, f1, f2):
        lo, hi = sorted((f1, f2))
        p_lo = plan_case(L_REF, lo, AIR, dims=2)
        p_hi = plan_case(L_REF, hi, AIR, dims=2)
        assert p_hi.grid_counts[1] >= p_lo.grid_counts[1]

    def test_invalid_inputs_rejected(self):
        with pytest.raises(DomainError):
            plan_case(-1.0, 1000.0, AIR)
        with pytest.raises(DomainError):
            plan_case(L_REF, 1000.0, AIR, dims=4)
        with pytest.raises(DomainError):
            plan_case(L_REF, 1000.0, AIR.inviscid())


class TestValidatePlan:
    def test_half_resolution_fails_stokes_rule(self):
        plan = CasePlan(
            (12.0, 1.0, 1.0), (1800, 150, 150), 1e-7, 400_000, 1000.0, False,
            120.0, 3, "table",
        )
        report = validate_plan(plan, AIR, L_REF)
        assert not report.passed
        failed = {c.name for c in report.failures()}
        assert failed == {"stokes_resolution"}
        stokes = next(c for c in report.checks if c.name == "stokes_resolution")
        assert "2.6" in stokes.detail

    def test_stokes_rule_binds_at_audio_frequencies(self):
        # the Stokes requirement dominates the acoustic-wavelength rule
        for f in np.linspace(1000.0, 6000.0, 11):
            plan = plan_case(L_REF, float(f), AIR, dims=2)
            report = validate_plan(plan, AIR, L_REF)
            margins = {c.name: c.margin for c in report.checks}
            assert margins["stokes_resolution"] < margins["acoustic_resolution"]

    def test_nonuniform_spacing_detected(self):
        plan = CasePlan(
            (12.0, 1.0), (10000, 1200), 1e-7, 1000, 1000.0, False, 120.0, 2, "cfl",
        )
        report = validate_plan(plan, AIR, L_REF)
        assert "uniform_spacing" in {c.name for c in report.failures()}

    def test_wrong_aspect_detected(self):
        plan = CasePlan(
            (8.0, 1.0), (9600, 1200), 1e-7, 1000, 1000.0, False, 120.0, 2, "cfl",
        )
        report = validate_plan(plan, AIR, L_REF)
        assert "domain_aspect" in {c.name for c in report.failures()}

    def test_report_renders_rule_lines(self):
        plan = plan_case(L_REF, 1000.0, AIR, dims=3)
        text = validate_plan(plan, AIR, L_REF).render()
        for rule in ("uniform_spacing", "domain_aspect", "stokes_resolution",
                     "acoustic_resolution"):
            assert rule in text
        assert "plan VALID" in text


class TestReferenceCasePlans:
    def test_all_five_rows_validate(self):
        for name, plan in reference_case_plans().items():
            report = validate_plan(plan, AIR, L_REF)
            assert report.passed, f"{name}: {report.render()}"

    def test_published_grids_kept_verbatim(self):
        rows = reference_case_plans()
        assert rows["2d_broadband"].grid_counts == (14400, 1200)
        assert rows["3d_tone_1khz"].grid_counts == (3600, 300, 300)
        assert rows["3d_tone_2khz"].grid_counts == (5040, 420, 420)
        assert rows["3d_tone_3khz"].grid_counts == (6240, 520, 520)
        assert rows["2d_tones"].n_steps == 1_600_000

    def test_2d_broadband_row_emits_published_fields(self):
        text = render_case(reference_case_plans()["2d_broadband"])
        assert "grid_counts = 14400 1200" in text
        assert "n_steps = 5000000" in text
        assert "dt = 2.5e-08" in text


class TestCaseFileRoundTrip:
    def test_emit_parse_identity(self, tmp_path):
        plan = plan_case(L_REF, 2000.0, AIR, dims=3)
        path = tmp_path / "case.txt"
        emit_case(plan, path)
        assert parse_case(path) == plan

    def test_double_emission_is_byte_identical(self, tmp_path):
        plan = plan_case(L_REF, 1500.0, AIR, dims=2, duration_cycles=7)
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        emit_case(plan, a)
        emit_case(plan, b)
        assert a.read_bytes() == b.read_bytes()

    def test_unwritable_path_rejected(self, tmp_path):
        plan = plan_case(L_REF, 1000.0, AIR)
        with pytest.raises(ConfigurationError):
            emit_case(plan, tmp_path / "missing_dir" / "case.txt")

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "broken.txt"
        path.write_text("schema = 1\nnot a key value line\n")
        with pytest.raises(DataError):
            parse_case(path)

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "partial.txt"
        path.write_text("schema = 1\ndimensionality = 2\n")
        with pytest.raises(DataError):
            parse_case(path)
