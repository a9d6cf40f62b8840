"""Electrostatic deflection: voltage -> fringe shift, geometry calibration,
and the per-velocity phase profile consumed by the velocity averaging.

The electrode pair sits between G1 and G2 and exerts the constant force
F = chi_SI * (E grad)E on a polarizable molecule, with (E grad)E = K * U^2.
The molecule accelerates over the effective electrode length and then drifts
to G3, so the fringe displacement is

    dx3 = C_geom * chi_SI * K * U^2 / (m * v^2),
    C_geom = l_eff * (l_eff/2 + distance_to_G3)

— exactly quadratic in voltage and inverse-quadratic in speed. Only the
combined product G = K * C_geom is scientifically meaningful; it is what the
calibration against a reference species measures.
"""

import math
from dataclasses import dataclass

import numpy as np

from .beam import MoleculeSpec
from .constants import AMU, polarizability_volume_to_si
from .errors import CalibrationError, ConfigurationError, DomainError


@dataclass(frozen=True)
class DeflectorSpec:
    k_field_per_m3: float      # (E grad)E per squared volt, K [1/m^3]
    effective_length_m: float  # electrode region traversed at constant force [m]
    distance_to_g3_m: float    # drift from electrode exit to the third grating [m]

    def __post_init__(self):
        if self.k_field_per_m3 <= 0:
            raise ConfigurationError(f"field factor K must be positive, got {self.k_field_per_m3}")
        if self.effective_length_m <= 0 or self.distance_to_g3_m <= 0:
            raise ConfigurationError("deflector lengths must be positive")

    @property
    def geometry_factor_m2(self) -> float:
        """C_geom = l*(l/2 + D): acceleration over l, then drift D [m^2]."""
        return self.effective_length_m * (
            0.5 * self.effective_length_m + self.distance_to_g3_m
        )

    @property
    def combined_constant_per_m(self) -> float:
        """The calibratable product G = K * C_geom [1/m]."""
        return self.k_field_per_m3 * self.geometry_factor_m2


def fringe_shift_from_constant(chi_A3, mass_amu, voltage_V, v, combined_constant_per_m):
    """Fringe displacement dx3 [m] from the combined constant G = K*C_geom.

    Vectorized over ``v``. Linear in chi, quadratic in U, inverse-quadratic
    in v.
    """
    if mass_amu <= 0:
        raise DomainError(f"mass must be positive, got {mass_amu} amu")
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise DomainError("speed must be positive")
    chi_si = polarizability_volume_to_si(chi_A3)
    shift = combined_constant_per_m * chi_si * voltage_V**2 / (mass_amu * AMU * v**2)
    return float(shift) if shift.ndim == 0 else shift


def fringe_shift(chi_A3, mass_amu, voltage_V, v, deflector: DeflectorSpec):
    """Fringe displacement dx3 [m] for an explicit deflector geometry.

    :param chi_A3: susceptibility volume [Angstrom^3].
    :param mass_amu: molecular mass [amu].
    :param voltage_V: electrode voltage [V].
    :param v: molecular speed [m/s] (scalar or array).
    """
    return fringe_shift_from_constant(
        chi_A3, mass_amu, voltage_V, v, deflector.combined_constant_per_m
    )


def phase_profile_from_constant(chi_A3, mass_amu, voltage_V, combined_constant_per_m,
                                grating_period_m):
    """Per-velocity fringe phase theta(v) = 2*pi*dx3(v)/d as a callable."""
    if grating_period_m <= 0:
        raise DomainError(f"grating period must be positive, got {grating_period_m}")

    def theta(v):
        return (
            2.0 * math.pi
            * fringe_shift_from_constant(chi_A3, mass_amu, voltage_V, v,
                                         combined_constant_per_m)
            / grating_period_m
        )

    return theta


def deflection_phase_profile(chi_A3, mass_amu, voltage_V, deflector: DeflectorSpec,
                             grating_period_m):
    """Per-velocity phase profile for an explicit deflector geometry."""
    return phase_profile_from_constant(
        chi_A3, mass_amu, voltage_V, deflector.combined_constant_per_m, grating_period_m
    )


@dataclass(frozen=True)
class CalibrationResult:
    combined_constant_per_m: float   # fitted G = K*C_geom [1/m]
    stderr_per_m: float              # standard error of the slope [1/m]
    n_points: int


def calibrate_geometry(reference: MoleculeSpec, measured) -> CalibrationResult:
    """Calibrate G = K*C_geom from (voltage, shift, speed) data of a reference
    species with known static polarizability.

    Least-squares slope through the origin of dx3 against the regressor
    r = alpha_SI * U^2 / (m v^2); the standard error comes from the residual
    scatter. At least two distinct voltages are required.

    :param reference: species with known alpha_stat (e.g. a fullerene).
    :param measured: iterable of (voltage_V, shift_m, v_mps) tuples.
    """
    rows = list(measured)
    if len(rows) < 2:
        raise CalibrationError(f"need at least 2 calibration points, got {len(rows)}")
    voltages = np.array([row[0] for row in rows], dtype=float)
    shifts = np.array([row[1] for row in rows], dtype=float)
    speeds = np.array([row[2] for row in rows], dtype=float)
    if np.unique(voltages).size < 2:
        raise CalibrationError("calibration voltages are all equal (rank-deficient design)")
    if np.any(speeds <= 0):
        raise CalibrationError("calibration speeds must be positive")
    alpha_si = polarizability_volume_to_si(reference.alpha_stat_A3)
    if alpha_si <= 0:
        raise CalibrationError("reference polarizability must be positive")
    regressor = alpha_si * voltages**2 / (reference.mass_amu * AMU * speeds**2)
    denom = float(np.sum(regressor**2))
    slope = float(np.sum(regressor * shifts)) / denom
    residuals = shifts - slope * regressor
    dof = len(rows) - 1
    stderr = math.sqrt(float(np.sum(residuals**2)) / dof / denom) if dof > 0 else 0.0
    return CalibrationResult(
        combined_constant_per_m=slope, stderr_per_m=stderr, n_points=len(rows)
    )
