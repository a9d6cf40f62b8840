"""kdtli: simulation and parameter estimation for near-field matter-wave
interferometry of large molecules, with electrostatic beam deflection.

The package models a three-grating interferometer whose middle grating is an
optical standing wave: fringe visibility as a function of diffracting laser
power (quantum and classical predictions), fringe deflection in an
electrostatic field, velocity averaging over the molecular beam, and the
estimation machinery that turns synthetic or measured series back into the
molecular parameters (susceptibility, optical polarizability, absorption
cross section) with statistical and systematic error budgets.
"""

__version__ = "0.1.0"

from .beam import (
    BeamSpec,
    MoleculeSpec,
    VelocityQuadrature,
    de_broglie_wavelength,
    single_velocity_quadrature,
    talbot_length,
    velocity_quadrature,
)
from .config import RunConfig, load_config, loads_config
from .conformers import (
    ConformerSample,
    EnsembleSummary,
    dipole_polarizability,
    ingest_conformer_table,
    summarize_ensemble,
    t_quantile,
    temperature_systematic,
    van_vleck_susceptibility,
)
from .constants import (
    CONSTANTS,
    PhysicalConstants,
    polarizability_si_to_volume,
    polarizability_volume_to_si,
)
from .deflection import (
    CalibrationResult,
    DeflectorSpec,
    calibrate_geometry,
    deflection_phase_profile,
    fringe_shift,
    fringe_shift_from_constant,
    phase_profile_from_constant,
)
from .errors import (
    CalibrationError,
    ConfigurationError,
    DomainError,
    FitError,
    FormatError,
    FormulaError,
    IngestionError,
    KdtliError,
    StatisticsError,
)
from .formula import parse_formula
from .model import (
    FringeObservables,
    InterferometerSpec,
    MaterialGrating,
    PhaseGrating,
    averaged_first_harmonic,
    binary_grating_coefficient,
    eikonal_phase,
    fringe_observables,
    mean_absorbed_photons,
    signal_profile,
    talbot_coefficient,
    velocity_averaged_observables,
    velocity_averaged_phase_continuous,
    wrap_phase,
)
from .scanfit import (
    FitResult,
    ScanData,
    fit_optical_polarizability,
    fit_sinusoid,
    fit_susceptibility,
    ingest_measurement_series,
    synthesize_position_scan,
    synthesize_shift_series,
    synthesize_shift_series_end_to_end,
    unwrap_shift_series,
)

__all__ = [
    "__version__",
    "BeamSpec",
    "CalibrationError",
    "CalibrationResult",
    "ConformerSample",
    "ConfigurationError",
    "CONSTANTS",
    "DeflectorSpec",
    "DomainError",
    "EnsembleSummary",
    "FitError",
    "FitResult",
    "FormatError",
    "FormulaError",
    "FringeObservables",
    "IngestionError",
    "InterferometerSpec",
    "KdtliError",
    "MaterialGrating",
    "MoleculeSpec",
    "PhaseGrating",
    "PhysicalConstants",
    "RunConfig",
    "ScanData",
    "StatisticsError",
    "VelocityQuadrature",
    "averaged_first_harmonic",
    "binary_grating_coefficient",
    "calibrate_geometry",
    "de_broglie_wavelength",
    "deflection_phase_profile",
    "dipole_polarizability",
    "eikonal_phase",
    "fit_optical_polarizability",
    "fit_sinusoid",
    "fit_susceptibility",
    "fringe_observables",
    "fringe_shift",
    "fringe_shift_from_constant",
    "ingest_conformer_table",
    "ingest_measurement_series",
    "load_config",
    "loads_config",
    "mean_absorbed_photons",
    "parse_formula",
    "phase_profile_from_constant",
    "polarizability_si_to_volume",
    "polarizability_volume_to_si",
    "signal_profile",
    "single_velocity_quadrature",
    "summarize_ensemble",
    "synthesize_position_scan",
    "synthesize_shift_series",
    "synthesize_shift_series_end_to_end",
    "t_quantile",
    "talbot_coefficient",
    "talbot_length",
    "temperature_systematic",
    "unwrap_shift_series",
    "van_vleck_susceptibility",
    "velocity_averaged_observables",
    "velocity_averaged_phase_continuous",
    "velocity_quadrature",
    "wrap_phase",
]
