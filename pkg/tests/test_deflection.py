import math

import numpy as np
import pytest

import oracles
from kdtli import (
    DeflectorSpec,
    MoleculeSpec,
    calibrate_geometry,
    deflection_phase_profile,
    fringe_shift,
    fringe_shift_from_constant,
    phase_profile_from_constant,
)
from kdtli.errors import CalibrationError, ConfigurationError, DomainError

DEFLECTOR = DeflectorSpec(
    k_field_per_m3=2.0e6, effective_length_m=0.05, distance_to_g3_m=0.1325
)


class TestDeflectorSpec:
    def test_geometry_factor(self):
        assert DEFLECTOR.geometry_factor_m2 == pytest.approx(
            0.05 * (0.025 + 0.1325), rel=1e-14
        )
        assert DEFLECTOR.combined_constant_per_m == pytest.approx(
            2.0e6 * 0.007875, rel=1e-14
        )

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            DeflectorSpec(0.0, 0.05, 0.1325)
        with pytest.raises(ConfigurationError):
            DeflectorSpec(2.0e6, -0.05, 0.1325)


class TestFringeShift:
    def test_scaling_laws_are_exact(self):
        base = fringe_shift(95.0, 1034.4, 3000.0, 146.0, DEFLECTOR)
        assert fringe_shift(95.0, 1034.4, 6000.0, 146.0, DEFLECTOR) == 4.0 * base
        assert fringe_shift(190.0, 1034.4, 3000.0, 146.0, DEFLECTOR) == 2.0 * base
        assert fringe_shift(95.0, 1034.4, 3000.0, 292.0, DEFLECTOR) == base / 4.0
        assert fringe_shift(95.0, 2068.8, 3000.0, 146.0, DEFLECTOR) == pytest.approx(
            base / 2.0, rel=1e-14
        )

    def test_magnitude_and_sign(self):
        shift = fringe_shift(95.0, 1034.4, 5000.0, 146.0, DEFLECTOR)
        assert shift > 0
        assert 10e-9 < shift < 1e-6          # tens to hundreds of nm
        assert fringe_shift(95.0, 1034.4, 0.0, 146.0, DEFLECTOR) == 0.0

    def test_vectorized_over_speed(self):
        speeds = np.array([100.0, 146.0, 200.0])
        shifts = fringe_shift_from_constant(95.0, 1034.4, 3000.0, speeds, 15750.0)
        assert shifts.shape == (3,)
        for v, s in zip(speeds, shifts):
            assert s == fringe_shift_from_constant(95.0, 1034.4, 3000.0, float(v), 15750.0)

    def test_matches_trajectory_integration(self):
        # piecewise-constant-force trajectory solved with an ODE integrator
        for voltage in (1000.0, 4000.0, 6000.0):
            for v in (110.0, 146.0, 190.0):
                expected = oracles.deflection_shift_ode(
                    95.0, 1034.4, voltage, v, 2.0e6, 0.05, 0.1325
                )
                got = fringe_shift(95.0, 1034.4, voltage, v, DEFLECTOR)
                assert got == pytest.approx(expected, rel=1e-8)

    def test_constant_route_equals_spec_route(self):
        a = fringe_shift(95.0, 1034.4, 3000.0, 146.0, DEFLECTOR)
        b = fringe_shift_from_constant(
            95.0, 1034.4, 3000.0, 146.0, DEFLECTOR.combined_constant_per_m
        )
        assert a == b

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            fringe_shift_from_constant(95.0, 1034.4, 3000.0, -1.0, 15750.0)
        with pytest.raises(DomainError):
            fringe_shift_from_constant(95.0, 0.0, 3000.0, 146.0, 15750.0)


class TestPhaseProfile:
    def test_phase_is_shift_in_grating_units(self):
        profile = phase_profile_from_constant(95.0, 1034.4, 4000.0, 15750.0, 266e-9)
        speeds = np.array([120.0, 146.0, 180.0])
        shifts = fringe_shift_from_constant(95.0, 1034.4, 4000.0, speeds, 15750.0)
        np.testing.assert_allclose(
            profile(speeds), 2.0 * math.pi * shifts / 266e-9, rtol=1e-14
        )

    def test_spec_route(self):
        a = deflection_phase_profile(95.0, 1034.4, 4000.0, DEFLECTOR, 266e-9)
        b = phase_profile_from_constant(
            95.0, 1034.4, 4000.0, DEFLECTOR.combined_constant_per_m, 266e-9
        )
        v = np.array([146.0])
        assert a(v)[0] == b(v)[0]

    def test_period_validated(self):
        with pytest.raises(DomainError):
            phase_profile_from_constant(95.0, 1034.4, 4000.0, 15750.0, 0.0)


class TestCalibrateGeometry:
    REFERENCE = MoleculeSpec("calib-ref", 720.66, 88.9, 79.0)

    def _synthetic_points(self, g_true, noise, seed):
        rng = np.random.default_rng(seed)
        points = []
        for voltage in (1000.0, 2000.0, 3000.0, 4000.0, 5000.0):
            for v in (120.0, 160.0):
                shift = fringe_shift_from_constant(
                    self.REFERENCE.alpha_stat_A3, self.REFERENCE.mass_amu,
                    voltage, v, g_true,
                )
                points.append((voltage, shift + rng.normal(0.0, noise), v))
        return points

    def test_noiseless_recovery_is_exact(self):
        g_true = 15750.0
        result = calibrate_geometry(self.REFERENCE, self._synthetic_points(g_true, 0.0, 1))
        assert result.combined_constant_per_m == pytest.approx(g_true, rel=1e-12)
        assert result.stderr_per_m == pytest.approx(0.0, abs=1e-6)
        assert result.n_points == 10

    def test_noisy_recovery_within_error(self):
        g_true = 15750.0
        hits = 0
        for seed in range(20):
            result = calibrate_geometry(
                self.REFERENCE, self._synthetic_points(g_true, 2e-9, seed)
            )
            if abs(result.combined_constant_per_m - g_true) < 2.5 * result.stderr_per_m:
                hits += 1
        assert hits >= 18

    def test_error_conditions(self):
        good = self._synthetic_points(15750.0, 0.0, 1)
        with pytest.raises(CalibrationError):
            calibrate_geometry(self.REFERENCE, good[:1])
        same_voltage = [(2000.0, s, v) for (_, s, v) in good]
        with pytest.raises(CalibrationError):
            calibrate_geometry(self.REFERENCE, same_voltage)
        with pytest.raises(CalibrationError):
            calibrate_geometry(self.REFERENCE, [(1000.0, 1e-8, -5.0), (2000.0, 4e-8, 150.0)])
