"""Forward model of the three-grating interferometer with a standing-light-wave
middle grating: grating Fourier coefficients, the eikonal phase imprinted by
the optical dipole potential, quantum and classical Talbot coefficients, and
(velocity-averaged) fringe observables.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .beam import MoleculeSpec, VelocityQuadrature, de_broglie_wavelength, talbot_length
from .constants import C_LIGHT, EPSILON_0, H_PLANCK, HBAR, polarizability_volume_to_si
from .errors import ConfigurationError, DomainError

REGIMES = ("quantum", "classical")

#: harmonic cutoff for full signal synthesis; A_m falls off as 1/m, so orders
#: beyond 5 contribute below 1e-3 for open fractions near 0.28
DEFAULT_HARMONIC_CUTOFF = 5


def wrap_phase(phi):
    """Map a phase in rad into the half-open interval (-pi, pi]."""
    w = math.fmod(phi, 2.0 * math.pi)
    if w > math.pi:
        w -= 2.0 * math.pi
    elif w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class MaterialGrating:
    """Binary transmission mask.

    :param period_m: grating period [m].
    :param open_fraction: slit width / period, in (0, 1).
    """
    period_m: float
    open_fraction: float

    def __post_init__(self):
        if self.period_m <= 0:
            raise ConfigurationError(f"grating period must be positive, got {self.period_m}")
        if not (0.0 < self.open_fraction < 1.0):
            raise ConfigurationError(
                f"open fraction must lie in (0, 1), got {self.open_fraction}"
            )


@dataclass(frozen=True)
class PhaseGrating:
    """Standing-light-wave phase grating (retro-reflected laser).

    :param laser_wavelength_m: laser wavelength [m]; grating period is half of it.
    :param laser_power_W: laser power [W].
    :param waist_y_m: vertical 1/e^2 intensity radius [m].
    :param waist_z_m: 1/e^2 radius along the molecular flight direction [m].
    :param beam_height_m: optional molecular-beam height for vertical averaging
        of the Gaussian profile; 0 disables the correction (molecules cross at
        the beam center).
    """
    laser_wavelength_m: float
    laser_power_W: float
    waist_y_m: float
    waist_z_m: float
    beam_height_m: float = 0.0

    def __post_init__(self):
        if self.laser_wavelength_m <= 0:
            raise ConfigurationError(
                f"laser wavelength must be positive, got {self.laser_wavelength_m}"
            )
        if self.laser_power_W < 0:
            raise ConfigurationError(f"laser power must be non-negative, got {self.laser_power_W}")
        if self.waist_y_m <= 0 or self.waist_z_m <= 0:
            raise ConfigurationError("laser waists must be positive")
        if self.beam_height_m < 0:
            raise ConfigurationError("beam height must be non-negative")

    @property
    def period_m(self) -> float:
        """Phase-grating period: half the laser wavelength [m]."""
        return 0.5 * self.laser_wavelength_m

    @property
    def photon_energy_J(self) -> float:
        return H_PLANCK * C_LIGHT / self.laser_wavelength_m


@dataclass(frozen=True)
class InterferometerSpec:
    """Symmetric three-grating geometry: G1 and G3 are material masks, G2 the
    light grating, with G2 dividing the G1-G3 distance exactly in half.

    :param g1: entrance mask.
    :param g2: standing-light-wave grating.
    :param g3: exit mask.
    :param separation_m: G1->G2 distance (= G2->G3 distance) [m].
    """
    g1: MaterialGrating
    g2: PhaseGrating
    g3: MaterialGrating
    separation_m: float

    def __post_init__(self):
        if self.separation_m <= 0:
            raise ConfigurationError(f"separation must be positive, got {self.separation_m}")

    @property
    def total_length_m(self) -> float:
        """G1 -> G3 distance [m]."""
        return 2.0 * self.separation_m

    def check_period_consistency(self, tolerance=1e-6):
        """All three gratings must share one period within ``tolerance`` (relative)."""
        d = self.g2.period_m
        for label, grating in (("g1", self.g1), ("g3", self.g3)):
            if abs(grating.period_m - d) > tolerance * d:
                raise ConfigurationError(
                    f"{label} period {grating.period_m} differs from the light-grating "
                    f"period {d} by more than {tolerance:g} relative"
                )


@dataclass(frozen=True)
class FringeObservables:
    """First-harmonic observables of the detected fringe pattern.

    :param visibility: sinusoidal visibility V = A/O, in [0, 1].
    :param fringe_phase_rad: fringe phase 2*pi*dx3/d, reported in (-pi, pi].
    :param mean_count_level: mean detected level O (optional, arbitrary units).
    """
    visibility: float
    fringe_phase_rad: float
    mean_count_level: Optional[float] = None

    def __post_init__(self):
        if not (-1e-12 <= self.visibility <= 1.0 + 1e-12):
            raise DomainError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not (-math.pi < self.fringe_phase_rad <= math.pi + 1e-12):
            raise DomainError(
                f"fringe phase must lie in (-pi, pi], got {self.fringe_phase_rad}"
            )


def binary_grating_coefficient(grating: MaterialGrating, order: int) -> float:
    """Fourier coefficient A_m = f*sinc(m*f) of an ideal binary mask.

    :param grating: the mask (only its open fraction enters).
    :param order: harmonic order m (symmetric: A_m = A_{-m}).
    """
    f = grating.open_fraction
    return f * float(np.sinc(order * f))


def eikonal_phase(molecule: MoleculeSpec, grating: PhaseGrating, v: float) -> float:
    """Peak phase phi0 of the periodic profile phi(x) = phi0*cos^2(2*pi*x/lambda_L)
    accumulated along a straight trajectory through the standing wave at speed v.

    phi0 = sqrt(8/pi) * alpha_SI * P / (eps0 * hbar * c * v * w_y), strictly
    linear in laser power and optical polarizability, inverse in speed and
    vertical waist. With a nonzero molecular-beam height the Gaussian vertical
    profile is averaged over the crossing positions.

    :param molecule: carries the optical polarizability volume.
    :param grating: the light grating (power, waists).
    :param v: molecular speed [m/s].
    """
    if v <= 0:
        raise DomainError(f"speed must be positive, got {v}")
    alpha_si = polarizability_volume_to_si(molecule.alpha_opt_A3)
    phi0 = (
        math.sqrt(8.0 / math.pi)
        * alpha_si
        * grating.laser_power_W
        / (EPSILON_0 * HBAR * C_LIGHT * v * grating.waist_y_m)
    )
    h = grating.beam_height_m
    if h > 0.0:
        w = grating.waist_y_m
        # mean of exp(-2 y^2 / w^2) over y uniform in [-h/2, h/2]
        phi0 *= math.sqrt(math.pi / 2.0) * (w / h) * math.erf(h / (math.sqrt(2.0) * w))
    return phi0


def talbot_coefficient(phi0: float, xi: float, order: int, regime: str = "quantum") -> float:
    """Talbot coefficient B_m of the sinusoidal phase grating.

    Quantum: B_m = J_m(phi0 * sin(pi*xi)); classical (geometric-shadow limit,
    sin(pi*xi) -> pi*xi): B_m = J_m(phi0 * pi * xi).

    :param phi0: eikonal phase amplitude [rad].
    :param xi: interferometer length in Talbot units, L/L_T.
    :param order: harmonic order m.
    :param regime: "quantum" or "classical".
    """
    if regime not in REGIMES:
        raise ConfigurationError(f"regime must be one of {REGIMES}, got {regime!r}")
    if regime == "quantum":
        argument = phi0 * math.sin(math.pi * xi)
    else:
        argument = phi0 * math.pi * xi
    return kernels.bessel_j(order, argument)


def _absorbed_photons(sigma_cm2: float, grating: PhaseGrating, v: float) -> float:
    """sigma * fluence with no sign restriction on sigma.

    The fitting layer probes the cross section as an unconstrained parameter
    (clipping to the physical bound afterwards), so this core accepts negative
    trial values; everything physical goes through the public wrapper.
    """
    if v <= 0:
        raise DomainError(f"speed must be positive, got {v}")
    sigma_m2 = sigma_cm2 * 1e-4
    if sigma_m2 == 0.0:
        return 0.0
    fluence = 4.0 * grating.laser_power_W / (
        math.sqrt(2.0 * math.pi) * grating.waist_y_m * v * grating.photon_energy_J
    )
    return sigma_m2 * fluence


def mean_absorbed_photons(molecule: MoleculeSpec, grating: PhaseGrating, v: float) -> float:
    """Mean number of photons absorbed while crossing the light grating.

    n = sigma_abs * (photon fluence along the trajectory)
      = sigma_abs * 4 P / (sqrt(2 pi) * w_y * v * hbar*omega)
    using the x-averaged standing-wave intensity at beam center. This feeds a
    crude attenuation bound exp(-n/2) on the first harmonic — a null-test
    channel, not a full decoherence treatment.
    """
    return _absorbed_photons(molecule.sigma_abs_cm2, grating, v)


def _sinusoid_prefactor(spec: InterferometerSpec) -> float:
    return 2.0 * float(np.sinc(spec.g1.open_fraction)) * float(np.sinc(spec.g3.open_fraction))


def _bessel_argument(spec: InterferometerSpec, molecule: MoleculeSpec, v, regime: str):
    """phi0 * sin(pi*xi) (quantum) or phi0 * pi * xi (classical), vectorized over v."""
    v = np.asarray(v, dtype=float)
    lam = H_PLANCK / (molecule.mass_kg * v)
    xi = spec.separation_m * lam / spec.g2.period_m**2
    alpha_si = polarizability_volume_to_si(molecule.alpha_opt_A3)
    phi0 = (
        math.sqrt(8.0 / math.pi) * alpha_si * spec.g2.laser_power_W
        / (EPSILON_0 * HBAR * C_LIGHT * v * spec.g2.waist_y_m)
    )
    if spec.g2.beam_height_m > 0.0:
        w, h = spec.g2.waist_y_m, spec.g2.beam_height_m
        phi0 = phi0 * (math.sqrt(math.pi / 2.0) * (w / h) * math.erf(h / (math.sqrt(2.0) * w)))
    if regime == "quantum":
        return phi0 * np.sin(math.pi * xi), xi
    return phi0 * math.pi * xi, xi


def fringe_observables(
    spec: InterferometerSpec,
    molecule: MoleculeSpec,
    v: float,
    regime: str = "quantum",
    normalization: float = 1.0,
) -> FringeObservables:
    """Single-velocity fringe observables.

    Visibility V = 2*|sinc(f1)*sinc(f3)*B_1(phi0, xi)| with xi = L/L_T(v),
    attenuated by the absorption bound when the molecule has a nonzero
    absorption cross section; fringe phase is 0 absent external forces; the
    mean level is normalization*f1*f3.

    :param spec: interferometer geometry (periods must be consistent).
    :param molecule: the interfering species.
    :param v: molecular speed [m/s].
    :param regime: "quantum" or "classical".
    :param normalization: scale for the mean count level.
    """
    if regime not in REGIMES:
        raise ConfigurationError(f"regime must be one of {REGIMES}, got {regime!r}")
    if v <= 0:
        raise DomainError(f"speed must be positive, got {v}")
    spec.check_period_consistency()
    # routed through the same vectorized argument arithmetic as the averaged
    # path so that a single-node average reduces to this bit for bit
    args, _ = _bessel_argument(spec, molecule, np.array([v]), regime)
    b1 = kernels.bessel_j(1, float(args[0]))
    atten = math.exp(-0.5 * mean_absorbed_photons(molecule, spec.g2, v))
    visibility = _sinusoid_prefactor(spec) * abs(b1) * atten
    mean_level = normalization * spec.g1.open_fraction * spec.g3.open_fraction
    return FringeObservables(
        visibility=visibility, fringe_phase_rad=0.0, mean_count_level=mean_level
    )


def averaged_first_harmonic(
    spec: InterferometerSpec,
    molecule: MoleculeSpec,
    quadrature: VelocityQuadrature,
    external_phase: Optional[Callable] = None,
    regime: str = "quantum",
    sigma_abs_override_cm2: Optional[float] = None,
):
    """Weighted complex first harmonic H = sum_i w_i V(v_i) exp(i theta(v_i)).

    Returns the complex H. ``external_phase`` maps a speed array to phases in
    rad (typically the deflection phase profile); None means theta = 0.
    ``sigma_abs_override_cm2`` replaces the molecule's absorption cross
    section when given — the hook the two-parameter fit uses to probe the
    cross section without rebuilding the molecule (and to step through
    unphysical trial values en route to the bound).
    """
    if regime not in REGIMES:
        raise ConfigurationError(f"regime must be one of {REGIMES}, got {regime!r}")
    if len(quadrature) == 0:
        raise ConfigurationError("empty velocity quadrature")
    spec.check_period_consistency()
    v = quadrature.nodes
    args, _ = _bessel_argument(spec, molecule, v, regime)
    if external_phase is None:
        theta = np.zeros_like(v)
    else:
        theta = np.asarray(external_phase(v), dtype=float)
    sigma_cm2 = (
        molecule.sigma_abs_cm2 if sigma_abs_override_cm2 is None else sigma_abs_override_cm2
    )
    n_abs = np.array([_absorbed_photons(sigma_cm2, spec.g2, vi) for vi in v])
    atten = np.exp(-0.5 * n_abs)
    re, im = kernels.first_harmonic(
        quadrature.weights, args, theta, atten, _sinusoid_prefactor(spec)
    )
    return complex(re, im)


def velocity_averaged_observables(
    spec: InterferometerSpec,
    molecule: MoleculeSpec,
    quadrature: VelocityQuadrature,
    external_phase: Optional[Callable] = None,
    regime: str = "quantum",
    normalization: float = 1.0,
    sigma_abs_override_cm2: Optional[float] = None,
) -> FringeObservables:
    """Velocity-averaged fringe observables: visibility |H| and phase arg(H).

    Reduces exactly to :func:`fringe_observables` for a single-node quadrature
    with no external phase.
    """
    h = averaged_first_harmonic(
        spec, molecule, quadrature, external_phase, regime, sigma_abs_override_cm2
    )
    mean_level = normalization * spec.g1.open_fraction * spec.g3.open_fraction
    return FringeObservables(
        visibility=abs(h),
        fringe_phase_rad=wrap_phase(math.atan2(h.imag, h.real)),
        mean_count_level=mean_level,
    )


def velocity_averaged_phase_continuous(
    spec: InterferometerSpec,
    molecule: MoleculeSpec,
    quadrature: VelocityQuadrature,
    external_phase: Callable,
    regime: str = "quantum",
) -> float:
    """Unwrapped velocity-averaged fringe phase.

    arg(H) wraps into (-pi, pi]; fitting shift-vs-voltage series needs the
    continuous branch. The visibility-weighted mean node phase theta_bar is
    continuous in the inputs, and the residual arg(H*exp(-i*theta_bar)) stays
    well inside one branch for any realistic dispersion, so their sum is the
    continuous phase.
    """
    v = quadrature.nodes
    args, _ = _bessel_argument(spec, molecule, v, regime)
    theta = np.asarray(external_phase(v), dtype=float)
    n_abs = np.array([mean_absorbed_photons(molecule, spec.g2, vi) for vi in v])
    amp = quadrature.weights * np.abs(kernels.bessel_j_array(1, args)) * np.exp(-0.5 * n_abs)
    total = float(np.sum(amp))
    if total == 0.0:
        return 0.0
    theta_bar = float(np.sum(amp * theta)) / total
    re = float(np.sum(amp * np.cos(theta - theta_bar)))
    im = float(np.sum(amp * np.sin(theta - theta_bar)))
    return theta_bar + math.atan2(im, re)


def signal_profile(
    spec: InterferometerSpec,
    molecule: MoleculeSpec,
    v: float,
    positions_m,
    regime: str = "quantum",
    normalization: float = 1.0,
    shift_m: float = 0.0,
    cutoff: int = DEFAULT_HARMONIC_CUTOFF,
):
    """Full transmitted-signal profile S(x3) with harmonics up to ``cutoff``.

    S(x3) = normalization * sum_{|m| <= cutoff} A_m(g1) A_m(g3) B_m
            * cos(2 pi m (x3 - shift)/d),
    the first harmonic of which is what :func:`fringe_observables` reports.

    :param positions_m: array of x3 detector positions [m].
    :param shift_m: rigid fringe shift dx3 [m].
    """
    if cutoff < 1:
        raise ConfigurationError(f"harmonic cutoff must be >= 1, got {cutoff}")
    spec.check_period_consistency()
    x = np.asarray(positions_m, dtype=float)
    lam = de_broglie_wavelength(molecule.mass_amu, v)
    xi = spec.separation_m / talbot_length(spec.g2.period_m, lam)
    phi0 = eikonal_phase(molecule, spec.g2, v)
    d = spec.g2.period_m
    atten = math.exp(-0.5 * mean_absorbed_photons(molecule, spec.g2, v))
    total = np.full_like(
        x,
        binary_grating_coefficient(spec.g1, 0)
        * binary_grating_coefficient(spec.g3, 0)
        * talbot_coefficient(phi0, xi, 0, regime),
    )
    for m in range(1, cutoff + 1):
        amp = (
            binary_grating_coefficient(spec.g1, m)
            * binary_grating_coefficient(spec.g3, m)
            * talbot_coefficient(phi0, xi, m, regime)
        )
        if m == 1:
            amp *= atten
        total += 2.0 * amp * np.cos(2.0 * math.pi * m * (x - shift_m) / d)
    return normalization * total
