import math

import numpy as np
import pytest

import oracles
from kdtli import (
    BeamSpec,
    MoleculeSpec,
    VelocityQuadrature,
    averaged_first_harmonic,
    de_broglie_wavelength,
    single_velocity_quadrature,
    talbot_length,
    velocity_quadrature,
)
from kdtli.beam import FWHM_TO_SIGMA
from kdtli.errors import ConfigurationError, DomainError
from conftest import make_interferometer


class TestVelocityQuadrature:
    def test_invariants(self, deflection_beam):
        q = velocity_quadrature(deflection_beam, 64)
        assert len(q) == 64
        assert np.all(q.nodes > 0)
        assert np.all(np.diff(q.nodes) > 0)
        assert abs(q.weights.sum() - 1.0) < 1e-12
        # arrays are frozen along with the dataclass
        with pytest.raises(ValueError):
            q.nodes[0] = 1.0

    def test_mean_matches_truncated_gaussian(self, deflection_beam):
        q = velocity_quadrature(deflection_beam, 64)
        exact = oracles.truncated_gaussian_mean(
            deflection_beam.v_mean_mps, deflection_beam.sigma_mps
        )
        assert float(q.nodes @ q.weights) == pytest.approx(exact, rel=1e-12)

    def test_variance_good_to_a_percent_at_64_nodes(self, deflection_beam):
        q = velocity_quadrature(deflection_beam, 64)
        mean = float(q.nodes @ q.weights)
        var = float(((q.nodes - mean) ** 2) @ q.weights)
        mu, sig = deflection_beam.v_mean_mps, deflection_beam.sigma_mps
        exact_mean = oracles.truncated_gaussian_mean(mu, sig)
        exact_var = (
            oracles.truncated_gaussian_average(lambda v: v * v, mu, sig) - exact_mean**2
        )
        assert var == pytest.approx(exact_var, rel=0.01)

    @pytest.mark.parametrize("n", [3, 8, 16, 100])
    def test_node_counts(self, deflection_beam, n):
        q = velocity_quadrature(deflection_beam, n)
        assert len(q) == n
        assert np.allclose(q.weights, 1.0 / n)

    def test_random_beams_keep_mean_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            mu = rng.uniform(50.0, 400.0)
            fwhm = rng.uniform(0.05, 1.2) * mu
            beam = BeamSpec(v_mean_mps=mu, v_fwhm_mps=fwhm)
            q = velocity_quadrature(beam, 48)
            exact = oracles.truncated_gaussian_mean(mu, beam.sigma_mps)
            assert float(q.nodes @ q.weights) == pytest.approx(exact, rel=1e-11)

    def test_needs_three_nodes(self, deflection_beam):
        with pytest.raises(ConfigurationError):
            velocity_quadrature(deflection_beam, 2)

    def test_single_velocity(self):
        q = single_velocity_quadrature(146.0)
        assert len(q) == 1
        assert q.nodes[0] == 146.0 and q.weights[0] == 1.0

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            VelocityQuadrature(np.array([2.0, 1.0]), np.array([0.5, 0.5]))
        with pytest.raises(ConfigurationError):
            VelocityQuadrature(np.array([1.0, 2.0]), np.array([0.5, 0.6]))
        with pytest.raises(ConfigurationError):
            VelocityQuadrature(np.array([-1.0, 2.0]), np.array([0.5, 0.5]))


@pytest.mark.xfail(
    strict=True,
    reason=(
        "the averaged visibility integrand has a |J1| derivative kink where the "
        "interferometer length crosses an integer number of Talbot lengths "
        "(v near 143 m/s for this beam, well inside the distribution); the "
        "equal-probability rule converges only ~linearly through it, and "
        "doubling 64 -> 128 nodes still moves the result by 0.15-1.8% "
        "depending on power, never below the 0.1% bound"
    ),
)
def test_doubling_nodes_changes_average_below_tenth_percent(molecule, deflection_beam):
    spec = make_interferometer(power_W=1.0)
    for power in (1.0, 2.0, 4.0, 8.0):
        from dataclasses import replace

        spec_p = replace(spec, g2=replace(spec.g2, laser_power_W=power))
        v64 = abs(
            averaged_first_harmonic(spec_p, molecule, velocity_quadrature(deflection_beam, 64))
        )
        v128 = abs(
            averaged_first_harmonic(spec_p, molecule, velocity_quadrature(deflection_beam, 128))
        )
        assert abs(v128 - v64) / v64 < 1e-3


class TestBeamSpec:
    def test_fwhm_sigma_conversion(self):
        beam = BeamSpec(v_mean_mps=146.0, v_fwhm_mps=31.0)
        assert beam.sigma_mps == pytest.approx(31.0 / (2.0 * math.sqrt(2.0 * math.log(2.0))))
        assert FWHM_TO_SIGMA == pytest.approx(2.3548, abs=1e-4)

    def test_rejects_bad_widths(self):
        with pytest.raises(ConfigurationError):
            BeamSpec(v_mean_mps=146.0, v_fwhm_mps=0.0)
        with pytest.raises(ConfigurationError):
            BeamSpec(v_mean_mps=146.0, v_fwhm_mps=300.0)
        with pytest.raises(ConfigurationError):
            BeamSpec(v_mean_mps=-5.0, v_fwhm_mps=1.0)


class TestMoleculeSpec:
    def test_mass_kg(self):
        mol = MoleculeSpec("test", 1000.0, 60.0, 40.0)
        assert mol.mass_kg == pytest.approx(1000.0 * 1.66053906660e-27, rel=1e-12)

    def test_rejects_negative_properties(self):
        with pytest.raises(DomainError):
            MoleculeSpec("m", -1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            MoleculeSpec("m", 1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            MoleculeSpec("m", 1.0, 1.0, 1.0, sigma_abs_cm2=-1e-18)


def test_de_broglie_wavelength_magnitude():
    # ~2.6 pm for a kilodalton molecule at thermal-beam speed
    lam = de_broglie_wavelength(1034.376, 146.0)
    assert lam == pytest.approx(2.64e-12, rel=5e-3)
    with pytest.raises(DomainError):
        de_broglie_wavelength(0.0, 146.0)
    with pytest.raises(DomainError):
        de_broglie_wavelength(100.0, -1.0)


def test_talbot_length():
    lam = de_broglie_wavelength(1034.376, 146.0)
    lt = talbot_length(266e-9, lam)
    assert lt == pytest.approx((266e-9) ** 2 / lam, rel=1e-14)
    with pytest.raises(DomainError):
        talbot_length(-1.0, lam)
