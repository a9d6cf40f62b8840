"""Physical constants and the polarizability unit convention.

Values are loaded from the versioned plain-text table ``data/constants.txt``
(CODATA 2018).  All quantities carried around by this package are SI except
where a field name says otherwise; the two deliberate exceptions are

* polarizabilities, which are user-facing *volumes* in cubic angstroms
  (the convention  alpha_SI = 4*pi*eps0 * volume), and
* molecular masses, which are user-facing in unified atomic mass units.

The volume <-> SI conversion happens in exactly one place, namely
:func:`polarizability_volume_to_si` (and its inverse below).  Everything
downstream goes through these two functions so the unit convention has a
single point of truth.
"""

import math
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigurationError

# Field name -> unit, for documentation and for validating the data file.
_FIELDS = {
    "planck_h": "J s",
    "light_speed_c": "m / s",
    "boltzmann_kB": "J / K",
    "vacuum_permittivity_eps0": "F / m",
    "atomic_mass_unit": "kg",
    "debye": "C m",
    "angstrom3": "m^3",
}


@dataclass(frozen=True)
class PhysicalConstants:
    planck_h: float               # Planck constant            [J s]
    hbar: float                   # reduced Planck constant    [J s], = h / 2 pi
    light_speed_c: float          # speed of light in vacuum   [m / s]
    boltzmann_kB: float           # Boltzmann constant         [J / K]
    vacuum_permittivity_eps0: float   # vacuum permittivity    [F / m]
    atomic_mass_unit: float       # unified atomic mass unit   [kg]
    debye: float                  # 1 debye                    [C m]
    angstrom3: float              # 1 cubic angstrom           [m^3]


def _parse_table(text, path_label):
    """Parse the 'name = value' grammar shared by the shipped data files.

    Comment lines and trailing comments start with '#'; blank lines are
    ignored; a 'table_version = ...' entry is allowed and returned separately.
    """
    values = {}
    version = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{path_label}, line {lineno}: expected 'name = value', got {raw!r}"
            )
        name, _, value = line.partition("=")
        name = name.strip()
        value = value.strip()
        if name == "table_version":
            version = value
            continue
        try:
            values[name] = float(value)
        except ValueError as exc:
            raise ConfigurationError(
                f"{path_label}, line {lineno}: bad number {value!r} for {name}"
            ) from exc
    return values, version


def _load_constants():
    text = resources.files("kdtli.data").joinpath("constants.txt").read_text()
    values, version = _parse_table(text, "constants.txt")
    missing = set(_FIELDS) - set(values)
    extra = set(values) - set(_FIELDS)
    if missing or extra:
        raise ConfigurationError(
            f"constants.txt: missing={sorted(missing)} unexpected={sorted(extra)}"
        )
    # hbar is derived, not stored: h/(2 pi) to full precision.
    return PhysicalConstants(hbar=values["planck_h"] / (2.0 * math.pi), **values), version


CONSTANTS, CONSTANTS_TABLE_VERSION = _load_constants()

# Convenience aliases (SI).
H_PLANCK = CONSTANTS.planck_h          # [J s]
HBAR = CONSTANTS.hbar                  # [J s]
C_LIGHT = CONSTANTS.light_speed_c      # [m / s]
K_BOLTZMANN = CONSTANTS.boltzmann_kB   # [J / K]
EPSILON_0 = CONSTANTS.vacuum_permittivity_eps0   # [F / m]
AMU = CONSTANTS.atomic_mass_unit       # [kg]
DEBYE = CONSTANTS.debye                # [C m]
ANGSTROM3 = CONSTANTS.angstrom3        # [m^3]


def polarizability_volume_to_si(volume_A3):
    """Convert a polarizability volume [Angstrom^3] to SI [C m^2 / V].

    alpha_SI = 4 pi eps0 * (volume in m^3).  This is the single point where
    the volume convention meets SI; use it everywhere a polarizability enters
    a formula with SI fields.
    """
    return 4.0 * math.pi * EPSILON_0 * volume_A3 * ANGSTROM3


def polarizability_si_to_volume(alpha_si):
    """Inverse of :func:`polarizability_volume_to_si`: SI -> Angstrom^3."""
    return alpha_si / (4.0 * math.pi * EPSILON_0 * ANGSTROM3)
