"""Flat dotted-key run configuration with a bit-exact echo.

One text format, no alternatives: ``key = value`` lines with ``#`` comments.
Every output file the command-line tool writes begins with an echo of the
complete effective configuration as ``# cfg:`` / ``# cfg[assumed]:`` comment
lines; feeding such a file back through ``--config`` re-parses exactly those
lines and therefore reproduces the run bit for bit (floats are written with
``repr``, which round-trips).

Keys never set explicitly come from the defaults table below and are flagged
``assumed`` in the echo, so a result file always discloses which numbers were
measured inputs and which were stand-ins.
"""

from dataclasses import dataclass
from os import PathLike
from pathlib import Path

from .beam import BeamSpec, MoleculeSpec, VelocityQuadrature, velocity_quadrature
from .deflection import DeflectorSpec
from .errors import ConfigurationError
from .formula import parse_formula
from .model import InterferometerSpec, MaterialGrating, PhaseGrating

_DEFAULT_FORMULA = "C30H12F30N2O4"

ECHO_PREFIX = "# cfg: "
ECHO_PREFIX_ASSUMED = "# cfg[assumed]: "


@dataclass(frozen=True)
class ConfigKey:
    type: type
    default: object          # None means "derived at build time"
    help: str


# The single source of truth for configuration keys. ``None`` defaults are
# derived from other keys when the config is built (and echoed concretely).
KEYS = {
    "molecule.formula": ConfigKey(str, _DEFAULT_FORMULA, "chemical formula of the species"),
    "molecule.mass_amu": ConfigKey(float, None, "molecular mass [amu]; derived from the formula when unset"),
    "molecule.alpha_stat_A3": ConfigKey(float, 68.2, "static polarizability volume [A^3]"),
    "molecule.alpha_opt_A3": ConfigKey(float, 61.0, "optical polarizability volume at the laser wavelength [A^3]"),
    "molecule.sigma_abs_cm2": ConfigKey(float, 0.0, "absorption cross section at the laser wavelength [cm^2]"),
    "beam.v_mean_mps": ConfigKey(float, 146.0, "mean beam speed [m/s]"),
    "beam.v_fwhm_mps": ConfigKey(float, 31.0, "FWHM of the speed distribution [m/s]"),
    "beam.source_temperature_K": ConfigKey(float, 470.0, "thermal source temperature [K]"),
    "grating.period_m": ConfigKey(float, 266e-9, "period of the two material gratings [m]"),
    "grating.open_fraction": ConfigKey(float, 75.0 / 266.0, "slit width over period of the material gratings"),
    "laser.wavelength_m": ConfigKey(float, 532e-9, "standing-wave laser wavelength [m]"),
    "laser.power_W": ConfigKey(float, 8.0, "standing-wave laser power [W]"),
    "laser.waist_y_m": ConfigKey(float, 900e-6, "vertical 1/e^2 intensity waist [m]"),
    "laser.waist_z_m": ConfigKey(float, 20e-6, "waist along the flight direction [m]"),
    "laser.beam_height_m": ConfigKey(float, 0.0, "molecular-beam height for vertical averaging; 0 disables"),
    "interferometer.separation_m": ConfigKey(float, 0.105, "grating separation [m]"),
    "deflector.k_field_per_m3": ConfigKey(float, 2.0e6, "(E grad)E per squared volt [1/m^3]"),
    "deflector.effective_length_m": ConfigKey(float, 0.05, "effective electrode length [m]"),
    "deflector.distance_to_g3_m": ConfigKey(float, 0.1325, "electrode exit to third grating [m]"),
    "quadrature.n_nodes": ConfigKey(int, 64, "velocity-quadrature node count"),
    "run.seed": ConfigKey(int, 12345, "random seed for synthetic data"),
    "run.out": ConfigKey(str, "", "output path; empty selects a per-command default"),
    "simulate.power_max_W": ConfigKey(float, 10.0, "upper end of the power grid [W]"),
    "simulate.voltage_max_V": ConfigKey(float, 6000.0, "upper end of the voltage grid [V]"),
    "simulate.n_grid": ConfigKey(int, 41, "grid points for simulated curves"),
    "simulate.chi_A3": ConfigKey(float, 95.0, "susceptibility volume driving simulated deflection [A^3]"),
    "simulate.scan_voltage_V": ConfigKey(float, 0.0, "deflector voltage during a simulated position scan [V]"),
    "simulate.scan_points": ConfigKey(int, 40, "points in a simulated position scan"),
    "simulate.scan_step_m": ConfigKey(float, 30e-9, "detector step of a simulated position scan [m]"),
    "simulate.counts_per_point": ConfigKey(float, 100.0, "expected counts per scan point"),
    "stats.temperature_K": ConfigKey(float, 470.0, "temperature for the dipole-orientation average [K]"),
    "stats.significance": ConfigKey(float, 0.05, "two-sided significance level for confidence intervals"),
    "stats.delta_T_K": ConfigKey(float, 5.0, "temperature excursion for the optional systematic [K]"),
    "fit.include_absorption": ConfigKey(bool, False, "fit an absorption cross section alongside alpha_opt"),
    "fit.field_uncertainty_rel": ConfigKey(float, 0.01, "relative field-homogeneity allowance"),
    "fit.power_uncertainty_rel": ConfigKey(float, 0.10, "relative laser-power scale uncertainty"),
}


def _parse_value(key: str, text: str):
    kind = KEYS[key].type
    try:
        if kind is bool:
            if text not in ("true", "false"):
                raise ValueError("expected true or false")
            return text == "true"
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigurationError(f"invalid value for {key}: {text!r} ({exc})") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class RunConfig:
    """Effective configuration: every key has a value, and ``set_keys`` says
    which of them were given explicitly rather than defaulted."""

    def __init__(self, values=None, set_keys=None):
        self.values = {}
        self.set_keys = set(set_keys or ())
        for key, meta in KEYS.items():
            self.values[key] = meta.default
        for key, value in (values or {}).items():
            if key not in KEYS:
                raise ConfigurationError(f"unknown config key: {key}")
            self.values[key] = value
        if self.values["molecule.mass_amu"] is None:
            self.values["molecule.mass_amu"] = parse_formula(self.values["molecule.formula"])

    def __getitem__(self, key):
        if key not in KEYS:
            raise ConfigurationError(f"unknown config key: {key}")
        return self.values[key]

    def override(self, key: str, value):
        """Set one key programmatically (CLI flags); marks it explicit."""
        if key not in KEYS:
            raise ConfigurationError(f"unknown config key: {key}")
        self.values[key] = value
        self.set_keys.add(key)
        if key == "molecule.formula" and "molecule.mass_amu" not in self.set_keys:
            self.values["molecule.mass_amu"] = parse_formula(value)

    # -- builders -----------------------------------------------------------

    def molecule(self) -> MoleculeSpec:
        return MoleculeSpec(
            name=self["molecule.formula"],
            mass_amu=self["molecule.mass_amu"],
            alpha_stat_A3=self["molecule.alpha_stat_A3"],
            alpha_opt_A3=self["molecule.alpha_opt_A3"],
            sigma_abs_cm2=self["molecule.sigma_abs_cm2"],
        )

    def beam(self) -> BeamSpec:
        return BeamSpec(
            v_mean_mps=self["beam.v_mean_mps"],
            v_fwhm_mps=self["beam.v_fwhm_mps"],
            source_temperature_K=self["beam.source_temperature_K"],
        )

    def interferometer(self) -> InterferometerSpec:
        mask = MaterialGrating(
            period_m=self["grating.period_m"],
            open_fraction=self["grating.open_fraction"],
        )
        light = PhaseGrating(
            laser_wavelength_m=self["laser.wavelength_m"],
            laser_power_W=self["laser.power_W"],
            waist_y_m=self["laser.waist_y_m"],
            waist_z_m=self["laser.waist_z_m"],
            beam_height_m=self["laser.beam_height_m"],
        )
        return InterferometerSpec(
            g1=mask, g2=light, g3=mask, separation_m=self["interferometer.separation_m"]
        )

    def deflector(self) -> DeflectorSpec:
        return DeflectorSpec(
            k_field_per_m3=self["deflector.k_field_per_m3"],
            effective_length_m=self["deflector.effective_length_m"],
            distance_to_g3_m=self["deflector.distance_to_g3_m"],
        )

    def quadrature(self) -> VelocityQuadrature:
        return velocity_quadrature(self.beam(), self["quadrature.n_nodes"])

    # -- echo ---------------------------------------------------------------

    def echo_lines(self, version: str) -> list:
        """Comment block for output files; parseable back into this config."""
        lines = [f"# kdtli-config-version: {version}"]
        for key in sorted(KEYS):
            prefix = ECHO_PREFIX if key in self.set_keys else ECHO_PREFIX_ASSUMED
            lines.append(f"{prefix}{key} = {_format_value(self.values[key])}")
        return lines


def _parse_config_line(line: str, line_no: int):
    if "=" not in line:
        raise ConfigurationError(f"line {line_no}: expected 'key = value', got {line!r}")
    key, _, raw = line.partition("=")
    key = key.strip()
    raw = raw.strip()
    if key not in KEYS:
        raise ConfigurationError(f"unknown config key: {key}")
    return key, _parse_value(key, raw)


def loads_config(text: str) -> RunConfig:
    """Parse configuration text (see :func:`load_config`)."""
    lines = text.splitlines()
    echo_mode = any(
        line.startswith(ECHO_PREFIX) or line.startswith(ECHO_PREFIX_ASSUMED) for line in lines
    )
    values = {}
    set_keys = set()
    for line_no, raw in enumerate(lines, start=1):
        if echo_mode:
            # A result file: only its echo lines are configuration.
            if raw.startswith(ECHO_PREFIX):
                key, value = _parse_config_line(raw[len(ECHO_PREFIX):], line_no)
                values[key] = value
                set_keys.add(key)
            elif raw.startswith(ECHO_PREFIX_ASSUMED):
                key, value = _parse_config_line(raw[len(ECHO_PREFIX_ASSUMED):], line_no)
                values[key] = value
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = _parse_config_line(line, line_no)
        values[key] = value
        set_keys.add(key)
    return RunConfig(values, set_keys)


def load_config(path) -> RunConfig:
    """Load a config file, or recover the config echoed in a result file.

    Plain mode: ``key = value`` per line, ``#`` comments, all listed keys
    marked explicit. Echo mode (triggered by any ``# cfg:`` line in the
    file): exactly the echoed lines are read and everything else — data rows
    included — is ignored, with the set/assumed distinction preserved, so a
    rerun reproduces the original byte for byte.
    """
    if isinstance(path, (str, PathLike)):
        return loads_config(Path(path).read_text(encoding="utf-8"))
    return loads_config(path.read())
