import math

import pytest

from kdtli import CONSTANTS, polarizability_si_to_volume, polarizability_volume_to_si
from kdtli.constants import _parse_table
from kdtli.errors import ConfigurationError


def test_pinned_values():
    assert CONSTANTS.planck_h == 6.62607015e-34
    assert CONSTANTS.light_speed_c == 299792458.0
    assert CONSTANTS.boltzmann_kB == 1.380649e-23
    assert CONSTANTS.vacuum_permittivity_eps0 == 8.8541878128e-12
    assert CONSTANTS.atomic_mass_unit == 1.66053906660e-27
    assert CONSTANTS.debye == 3.33564095198e-30
    assert CONSTANTS.angstrom3 == 1e-30


def test_hbar_is_derived_from_h():
    # the table stores h only; hbar must satisfy the defining identity
    assert abs(CONSTANTS.hbar - CONSTANTS.planck_h / (2.0 * math.pi)) <= 1e-12 * CONSTANTS.hbar


def test_polarizability_volume_round_trip():
    for volume in (1.0, 61.0, 95.0, 0.003):
        si = polarizability_volume_to_si(volume)
        assert polarizability_si_to_volume(si) == pytest.approx(volume, rel=1e-14)


def test_volume_conversion_magnitude():
    # 1 A^3 in SI polarizability units: 4 pi eps0 * 1e-30
    assert polarizability_volume_to_si(1.0) == pytest.approx(1.11265e-40, rel=1e-4)


def test_parse_table_rejects_garbage():
    with pytest.raises(ConfigurationError):
        _parse_table("planck_h 6.6e-34\n", "inline")
    with pytest.raises(ConfigurationError):
        _parse_table("planck_h = not_a_number\n", "inline")
