"""Grid and time-step planning for external compressible-flow solver cases.

Wall-bounded oscillatory flow in a leak is resolved down to the viscous
Stokes layer, lambda_s = 2 sqrt(pi nu / f): the planner keeps at least
five cells per Stokes wavelength, which dominates the 20-cells-per-
acoustic-wavelength rule at audio frequencies and leak scales.  Domains
are 12L x L (x L) with uniform, equal cell sides; transverse counts round
up to multiples of 20.

The published table's dimensionless time steps do not reconcile with any
standard CFL number at the stated grids, so plans matching a known table
row adopt its dt and step count verbatim (provenance ``table``); other
plans derive dt from an acoustic CFL of 0.7 (provenance ``cfl``).

Case files are UTF-8 ``key = value`` text with fixed key order, so equal
plans serialize to identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, DataError, DomainError
from .medium import Medium
from .metrics import stokes_wavelength

#: Grid-design floors.
CELLS_PER_STOKES = 5.0
CELLS_PER_WAVELENGTH = 20.0
AXIAL_EXTENT = 12.0
NICE_MULTIPLE = 20
ACOUSTIC_CFL = 0.7

#: Default step count for broadband runs.
BROADBAND_STEPS = 5_000_000

_SCHEMA = 1

#: (dims, broadband, frequency_hz or None) -> (dt, n_steps) adopted verbatim
#: from the published run matrix.  2D tonal runs shared one dt/step budget
#: across their frequency sweep, hence the wildcard frequency.
_KNOWN_ROWS: dict[tuple[int, bool, float | None], tuple[float, int]] = {
    (2, True, None): (2.5e-8, BROADBAND_STEPS),
    (2, False, None): (2.5e-8, 1_600_000),
    (3, False, 1000.0): (1.0e-7, 400_000),
    (3, False, 2000.0): (7.5e-8, 540_000),
    (3, False, 3000.0): (7.5e-8, 540_000),
}


@dataclass(frozen=True)
class CasePlan:
    """Dimensionless case specification for the external solver.

    ``domain_extents`` are per-axis lengths in multiples of the geometry
    scale L; ``dt`` is the dimensionless step in units of L/c0.  For
    broadband plans ``frequency`` is the highest resolved band edge.
    """

    domain_extents: tuple[float, ...]
    grid_counts: tuple[int, ...]
    dt: float
    n_steps: int
    frequency: float
    broadband: bool
    target_level_db: float
    dimensionality: int
    dt_provenance: str = "cfl"

    def __post_init__(self):
        if self.dimensionality not in (2, 3):
            raise DomainError("dimensionality must be 2 or 3")
        if (
            len(self.domain_extents) != self.dimensionality
            or len(self.grid_counts) != self.dimensionality
        ):
            raise DomainError("extents and grid counts must match dimensionality")
        if min(self.domain_extents) <= 0 or min(self.grid_counts) <= 0:
            raise DomainError("extents and grid counts must be positive")
        if self.dt <= 0 or self.n_steps < 1:
            raise DomainError("dt must be positive and n_steps at least 1")
        if self.frequency <= 0:
            raise DomainError("frequency must be positive")
        if self.dt_provenance not in ("table", "cfl"):
            raise DomainError("dt provenance must be 'table' or 'cfl'")

    def spacings(self) -> tuple[float, ...]:
        """Cell side per axis in units of L."""
        return tuple(e / c for e, c in zip(self.domain_extents, self.grid_counts))


@dataclass(frozen=True)
class RuleCheck:
    name: str
    passed: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class CaseReport:
    checks: tuple[RuleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[RuleCheck]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status} {c.name}: {c.detail} (margin {c.margin:.2f}x)")
        verdict = "VALID" if self.passed else "INVALID"
        lines.append(f"plan {verdict}")
        return "\n".join(lines)


def _round_up_nice(value: float) -> int:
    return NICE_MULTIPLE * math.ceil(value / NICE_MULTIPLE)


def plan_case(
    length_scale: float,
    f_max: float,
    medium: Medium,
    dims: int = 3,
    duration_cycles: int = 40,
    broadband: bool = False,
    target_level_db: float = 120.0,
) -> CasePlan:
    """Plan a case for a geometry of scale L resolving content up to f_max.

    The transverse count is the Stokes floor ceil(5 L / lambda_s(f_max))
    rounded up to a multiple of 20; the axial count scales with the 12L
    domain at the same spacing.
    """
    if length_scale <= 0 or f_max <= 0:
        raise DomainError("length scale and frequency must be positive")
    if duration_cycles < 1:
        raise DomainError("duration must cover at least one cycle")
    if dims not in (2, 3):
        raise DomainError("dimensionality must be 2 or 3")
    if medium.mu == 0:
        raise DomainError("a viscous medium is required to size the Stokes layer")

    lam_s = stokes_wavelength(medium.kinematic_viscosity, f_max)
    transverse = _round_up_nice(CELLS_PER_STOKES * length_scale / lam_s)
    axial = int(AXIAL_EXTENT) * transverse
    extents = (AXIAL_EXTENT,) + (1.0,) * (dims - 1)
    counts = (axial,) + (transverse,) * (dims - 1)

    known = _KNOWN_ROWS.get(
        (dims, broadband, None if dims == 2 else round(f_max, 6))
    )
    if known is not None:
        dt, n_steps = known
        provenance = "table"
    elif broadband:
        dt = ACOUSTIC_CFL / transverse
        n_steps = BROADBAND_STEPS
        provenance = "cfl"
    else:
        dt = ACOUSTIC_CFL / transverse
        cycle = medium.c0 / (f_max * length_scale)  # one period in L/c0 units
        n_steps = duration_cycles * math.ceil(cycle / dt)
        provenance = "cfl"

    return CasePlan(
        domain_extents=extents,
        grid_counts=counts,
        dt=dt,
        n_steps=n_steps,
        frequency=f_max,
        broadband=broadband,
        target_level_db=target_level_db,
        dimensionality=dims,
        dt_provenance=provenance,
    )


def validate_plan(plan: CasePlan, medium: Medium, length_scale: float) -> CaseReport:
    """Check the resolution and domain rules; reports margins per rule."""
    if length_scale <= 0:
        raise DomainError("length scale must be positive")
    spacings = plan.spacings()
    dx = max(spacings)

    checks = []

    spread = (max(spacings) - min(spacings)) / max(spacings)
    checks.append(
        RuleCheck(
            "uniform_spacing",
            spread <= 1e-9,
            1.0 if spread <= 1e-9 else 0.0,
            f"cell sides {', '.join(f'{s:.6g}' for s in spacings)} L",
        )
    )

    aspect_ok = (
        abs(plan.domain_extents[0] - AXIAL_EXTENT) <= 1e-9
        and all(abs(e - 1.0) <= 1e-9 for e in plan.domain_extents[1:])
    )
    checks.append(
        RuleCheck(
            "domain_aspect",
            aspect_ok,
            1.0 if aspect_ok else 0.0,
            f"extents {'x'.join(f'{e:g}' for e in plan.domain_extents)} L "
            f"(want {AXIAL_EXTENT:g}:1)",
        )
    )

    if medium.mu == 0:
        raise DomainError("a viscous medium is required to check the Stokes rule")
    lam_s = stokes_wavelength(medium.kinematic_viscosity, plan.frequency)
    cells_stokes = lam_s / (dx * length_scale)
    checks.append(
        RuleCheck(
            "stokes_resolution",
            cells_stokes >= CELLS_PER_STOKES,
            cells_stokes / CELLS_PER_STOKES,
            f"{cells_stokes:.2f} cells per Stokes wavelength at "
            f"{plan.frequency:g} Hz (need >= {CELLS_PER_STOKES:g})",
        )
    )

    lam_ac = medium.c0 / plan.frequency
    cells_ac = lam_ac / (dx * length_scale)
    checks.append(
        RuleCheck(
            "acoustic_resolution",
            cells_ac >= CELLS_PER_WAVELENGTH,
            cells_ac / CELLS_PER_WAVELENGTH,
            f"{cells_ac:.1f} cells per acoustic wavelength at "
            f"{plan.frequency:g} Hz (need >= {CELLS_PER_WAVELENGTH:g})",
        )
    )

    return CaseReport(tuple(checks))


_CASE_KEYS = (
    "schema",
    "dimensionality",
    "domain_extents_L",
    "grid_counts",
    "dt",
    "dt_units",
    "dt_provenance",
    "n_steps",
    "source_kind",
    "frequency_hz",
    "target_level_db",
)


def render_case(plan: CasePlan) -> str:
    """Serialize a plan to the key-value case format (byte-stable)."""
    fields = {
        "schema": str(_SCHEMA),
        "dimensionality": str(plan.dimensionality),
        "domain_extents_L": " ".join(repr(float(e)) for e in plan.domain_extents),
        "grid_counts": " ".join(str(c) for c in plan.grid_counts),
        "dt": repr(float(plan.dt)),
        "dt_units": "c0/L (as published; does not reconcile with a standard CFL)"
        if plan.dt_provenance == "table"
        else "L/c0 (locally chosen, acoustic CFL 0.7)",
        "dt_provenance": plan.dt_provenance,
        "n_steps": str(plan.n_steps),
        "source_kind": "broadband" if plan.broadband else "tone",
        "frequency_hz": repr(float(plan.frequency)),
        "target_level_db": repr(float(plan.target_level_db)),
    }
    lines = [f"{key} = {fields[key]}" for key in _CASE_KEYS]
    return "\n".join(lines) + "\n"


def emit_case(plan: CasePlan, path) -> None:
    """Write the case file; two emissions of one plan are byte-identical."""
    text = render_case(plan)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write case file {path}: {exc}") from exc


def parse_case(path) -> CasePlan:
    """Read a case file back into a plan (inverse of :func:`emit_case`)."""
    fields = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DataError(f"{path}:{lineno}: expected 'key = value'")
                key, _, value = line.partition("=")
                fields[key.strip()] = value.strip()
    except OSError as exc:
        raise DataError(f"cannot read case file {path}: {exc}") from exc

    try:
        if int(fields["schema"]) != _SCHEMA:
            raise DataError(f"unsupported case schema {fields['schema']}")
        dims = int(fields["dimensionality"])
        extents = tuple(float(v) for v in fields["domain_extents_L"].split())
        counts = tuple(int(v) for v in fields["grid_counts"].split())
        return CasePlan(
            domain_extents=extents,
            grid_counts=counts,
            dt=float(fields["dt"]),
            n_steps=int(fields["n_steps"]),
            frequency=float(fields["frequency_hz"]),
            broadband=fields["source_kind"] == "broadband",
            target_level_db=float(fields["target_level_db"]),
            dimensionality=dims,
            dt_provenance=fields["dt_provenance"],
        )
    except KeyError as exc:
        raise DataError(f"case file {path} misses key {exc}") from exc


def reference_case_plans() -> dict[str, CasePlan]:
    """The five published run-matrix rows, verbatim.

    The 2D grids are finer than the Stokes floor requires; all rows pass
    :func:`validate_plan` at L = 25 mm in standard air.  Tonal 2D rows are
    keyed to the top of the 1-6 kHz sweep they served.
    """
    return {
        "2d_broadband": CasePlan(
            (12.0, 1.0), (14400, 1200), 2.5e-8, 5_000_000, 6000.0, True, 150.0, 2,
            "table",
        ),
        "2d_tones": CasePlan(
            (12.0, 1.0), (14400, 1200), 2.5e-8, 1_600_000, 6000.0, False, 150.0, 2,
            "table",
        ),
        "3d_tone_1khz": CasePlan(
            (12.0, 1.0, 1.0), (3600, 300, 300), 1.0e-7, 400_000, 1000.0, False,
            150.0, 3, "table",
        ),
        "3d_tone_2khz": CasePlan(
            (12.0, 1.0, 1.0), (5040, 420, 420), 7.5e-8, 540_000, 2000.0, False,
            150.0, 3, "table",
        ),
        "3d_tone_3khz": CasePlan(
            (12.0, 1.0, 1.0), (6240, 520, 520), 7.5e-8, 540_000, 3000.0, False,
            150.0, 3, "table",
        ),
    }
