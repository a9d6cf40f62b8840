"""Synthetic interferograms and the estimation layer.

This module owns the two-stage measurement path: position scans are fitted to
the sinusoid S(x3) = O + A*sin(2*pi*(x3 - dx3)/d) per setting, and the
resulting shift-vs-voltage or visibility-vs-power series are inverted for the
static susceptibility chi or the optical polarizability alpha_opt (optionally
with an absorption cross section). Each inversion reports a statistical error
from the fit covariance and a systematic budget assembled from named
single-perturbation refits, combined in quadrature.
"""

import math
from dataclasses import dataclass, field, replace
from os import PathLike
from pathlib import Path

import numpy as np

from . import model
from .beam import BeamSpec, MoleculeSpec, VelocityQuadrature, velocity_quadrature
from .deflection import CalibrationResult, DeflectorSpec, phase_profile_from_constant
from .errors import (
    ConfigurationError,
    DomainError,
    FitError,
    FormatError,
    IngestionError,
)
from .leastsq import LeastSquaresResult, levenberg_fit, weighted_linear_lsq
from .model import FringeObservables, InterferometerSpec

ABSCISSA_KINDS = ("position_x3", "voltage", "power")

# Column headers accepted by ingest_measurement_series, mapped to
# (abscissa kind, field count). Lengths arrive in nm and are stored in m.
_HEADERS = {
    "x3_nm,counts": ("position_x3", 2),
    "voltage_V,shift_nm,err_nm": ("voltage", 3),
    "power_W,visibility,err": ("power", 3),
}

# Internal unit for the absorption cross-section parameter during
# minimization; keeps the fitted number O(1) so the relative
# finite-difference step is meaningful.
_SIGMA_ABS_SCALE_CM2 = 1e-17

_DEFAULT_BEAM_PERTURBATIONS = {"v_mean_rel": 0.01, "v_fwhm_rel": 0.05}


@dataclass(frozen=True)
class ScanData:
    """One measured or synthesized series.

    ``values`` holds counts for position scans, fringe shifts [m] for voltage
    series and visibilities for power series; ``uncertainties`` are 1-sigma
    per point (None when the series carries no error estimate).
    """
    abscissa_kind: str
    abscissa: np.ndarray
    values: np.ndarray
    uncertainties: np.ndarray = None
    integration_time_s: float = None
    seed: int = None

    def __post_init__(self):
        if self.abscissa_kind not in ABSCISSA_KINDS:
            raise ConfigurationError(
                f"abscissa kind must be one of {ABSCISSA_KINDS}, got {self.abscissa_kind!r}"
            )
        x = np.asarray(self.abscissa, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or y.shape != x.shape:
            raise ConfigurationError("abscissa and values must be matching 1-d arrays")
        d = np.diff(x)
        if x.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigurationError("abscissa must be strictly monotone")
        if self.abscissa_kind == "position_x3" and np.any(y < 0):
            raise ConfigurationError("counts must be non-negative")
        sigma = self.uncertainties
        if sigma is not None:
            sigma = np.asarray(sigma, dtype=float)
            if sigma.shape != x.shape:
                raise ConfigurationError("uncertainties must match the abscissa length")
            if np.any(sigma <= 0):
                raise ConfigurationError("uncertainties must be positive where present")
            sigma.setflags(write=False)
        for arr in (x, y):
            arr.setflags(write=False)
        object.__setattr__(self, "abscissa", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "uncertainties", sigma)

    def __len__(self):
        return self.abscissa.size


@dataclass
class FitResult:
    """Fitted parameters with statistical and named systematic errors.

    ``parameters``/``stat_errors`` are keyed by parameter name;
    ``syst_errors[name]`` maps systematic-component labels to 1-sigma
    contributions for that parameter. ``covariance`` covers ``param_order``
    (derived quantities such as V carry errors but no covariance row).
    """
    parameters: dict
    units: dict
    stat_errors: dict
    syst_errors: dict
    chi_squared: float
    dof: int
    covariance: np.ndarray
    param_order: tuple
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if self.dof <= 0:
            raise FitError(f"fit needs more points than parameters (dof={self.dof})")
        for name, err in self.stat_errors.items():
            if err < 0 or not math.isfinite(err):
                raise FitError(f"invalid statistical error for {name}: {err}")
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (len(self.param_order),) * 2:
            raise FitError("covariance shape does not match param_order")
        if not np.allclose(cov, cov.T, rtol=1e-8, atol=0.0):
            raise FitError("covariance must be symmetric")
        eigenvalues = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        if eigenvalues.size and eigenvalues.min() < -1e-8 * max(1.0, eigenvalues.max()):
            raise FitError("covariance must be positive semidefinite")
        self.covariance = 0.5 * (cov + cov.T)

    def total_systematic(self, name: str) -> float:
        """Root-sum-square of the named systematic components for ``name``."""
        components = self.syst_errors.get(name, {})
        return math.sqrt(sum(value**2 for value in components.values()))

    def to_json_dict(self) -> dict:
        """Serializable summary: {parameter: {value, unit, stat_err,
        syst_err (per component), syst_err_total, correlations}} plus
        chi_squared/dof/flags."""
        order = list(self.param_order)
        corr = {}
        diag = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        for i, a in enumerate(order):
            for j, b in enumerate(order):
                if i < j and diag[i] > 0 and diag[j] > 0:
                    corr[f"{a}:{b}"] = float(self.covariance[i, j] / (diag[i] * diag[j]))
        out = {"parameters": {}, "chi_squared": self.chi_squared, "dof": self.dof,
               "flags": list(self.flags)}
        for name, value in self.parameters.items():
            components = dict(self.syst_errors.get(name, {}))
            out["parameters"][name] = {
                "value": value,
                "unit": self.units.get(name, ""),
                "stat_err": self.stat_errors.get(name, 0.0),
                "syst_err": components,
                "syst_err_total": self.total_systematic(name),
            }
        if corr:
            out["correlations"] = corr
        return out


# ---------------------------------------------------------------------------
# Synthesis


def synthesize_position_scan(
    true_observables: FringeObservables,
    period_m: float,
    step_m: float,
    n_points: int,
    counts_per_point: float,
    seed: int,
) -> ScanData:
    """Poisson-count position scan of the fringe pattern.

    The expected signal is O*(1 + V*sin(2*pi*(x3 - dx3)/d)) with O =
    ``counts_per_point``, V and dx3 taken from ``true_observables``; counts
    are drawn independently per point. Deterministic for a fixed seed.
    """
    if counts_per_point <= 0:
        raise ConfigurationError(f"counts_per_point must be positive, got {counts_per_point}")
    if n_points < 8:
        raise ConfigurationError(f"need at least 8 scan points, got {n_points}")
    if period_m <= 0 or step_m <= 0:
        raise DomainError("period and step must be positive")
    v = true_observables.visibility
    if v > 1.0:
        raise DomainError(f"visibility must not exceed 1, got {v}")
    shift_m = true_observables.fringe_phase_rad * period_m / (2.0 * math.pi)
    x = np.arange(n_points, dtype=float) * step_m
    mean = counts_per_point * (1.0 + v * np.sin(2.0 * math.pi * (x - shift_m) / period_m))
    rng = np.random.default_rng(seed)
    counts = rng.poisson(mean).astype(float)
    # Gaussian approximation to Poisson errors, floored at one count.
    sigma = np.sqrt(np.clip(counts, 1.0, None))
    return ScanData(
        abscissa_kind="position_x3",
        abscissa=x,
        values=counts,
        uncertainties=sigma,
        seed=seed,
    )


def _coerce_calibration(calibration) -> CalibrationResult:
    if calibration is None:
        raise ConfigurationError("a deflector calibration is required")
    if isinstance(calibration, CalibrationResult):
        return calibration
    if isinstance(calibration, DeflectorSpec):
        return CalibrationResult(
            combined_constant_per_m=calibration.combined_constant_per_m,
            stderr_per_m=0.0,
            n_points=0,
        )
    raise ConfigurationError(
        f"calibration must be a CalibrationResult or DeflectorSpec, got {type(calibration).__name__}"
    )


def _continuous_shift_model(
    chi_A3: float,
    molecule: MoleculeSpec,
    spec: InterferometerSpec,
    quadrature: VelocityQuadrature,
    combined_constant_per_m: float,
    voltages,
) -> np.ndarray:
    """Velocity-averaged fringe shift [m] at each voltage, continuous branch."""
    d = spec.g1.period_m
    shifts = np.empty(len(voltages))
    for i, u in enumerate(voltages):
        theta = phase_profile_from_constant(
            chi_A3, molecule.mass_amu, u, combined_constant_per_m, d
        )
        phi = model.velocity_averaged_phase_continuous(spec, molecule, quadrature, theta)
        shifts[i] = phi * d / (2.0 * math.pi)
    return shifts


def synthesize_shift_series(
    chi_A3: float,
    molecule: MoleculeSpec,
    spec: InterferometerSpec,
    calibration,
    voltages,
    quadrature: VelocityQuadrature,
    shift_sigma_m: float = 0.0,
    seed: int = None,
) -> ScanData:
    """Shift-vs-voltage series from the forward model (already-fitted stage).

    Adds independent Gaussian noise of width ``shift_sigma_m`` when positive;
    the points then carry that width as their uncertainty.
    """
    voltages = np.asarray(voltages, dtype=float)
    constant = _coerce_calibration(calibration).combined_constant_per_m
    shifts = _continuous_shift_model(chi_A3, molecule, spec, quadrature, constant, voltages)
    sigma = None
    if shift_sigma_m > 0.0:
        rng = np.random.default_rng(seed)
        shifts = shifts + rng.normal(0.0, shift_sigma_m, size=shifts.size)
        sigma = np.full(shifts.size, shift_sigma_m)
    return ScanData(
        abscissa_kind="voltage",
        abscissa=voltages,
        values=shifts,
        uncertainties=sigma,
        seed=seed,
    )


def synthesize_shift_series_end_to_end(
    chi_A3: float,
    molecule: MoleculeSpec,
    spec: InterferometerSpec,
    calibration,
    voltages,
    quadrature: VelocityQuadrature,
    counts_per_point: float = 100.0,
    n_points: int = 40,
    step_m: float = 30e-9,
    seed: int = None,
):
    """Shift series via raw position scans: synthesize one Poisson scan per
    voltage, fit each sinusoid, unwrap the fitted shifts across voltages.

    Returns (ScanData, unwrap flags). Exists to validate the two-stage
    estimation chain against the direct synthesis path.
    """
    voltages = np.asarray(voltages, dtype=float)
    constant = _coerce_calibration(calibration).combined_constant_per_m
    d = spec.g1.period_m
    child_seeds = np.random.SeedSequence(seed).generate_state(voltages.size)
    wrapped = np.empty(voltages.size)
    sigma = np.empty(voltages.size)
    for i, u in enumerate(voltages):
        theta = phase_profile_from_constant(chi_A3, molecule.mass_amu, u, constant, d)
        observables = model.velocity_averaged_observables(
            spec, molecule, quadrature, external_phase=theta
        )
        scan = synthesize_position_scan(
            observables, d, step_m, n_points, counts_per_point, int(child_seeds[i])
        )
        fit = fit_sinusoid(scan, d)
        wrapped[i] = fit.parameters["delta_x3"]
        sigma[i] = fit.stat_errors["delta_x3"]
    unwrapped, flags = unwrap_shift_series(voltages, wrapped, d)
    data = ScanData(
        abscissa_kind="voltage",
        abscissa=voltages,
        values=unwrapped,
        uncertainties=sigma,
        seed=seed,
    )
    return data, flags


# ---------------------------------------------------------------------------
# Sinusoid fit


def fit_sinusoid(scan: ScanData, period_m: float) -> FitResult:
    """Weighted least-squares fit of O + A*sin(2*pi*(x3 - dx3)/d).

    Linear in the sin/cos quadrature components, so the fit is exact (no
    iteration): S = O + a*sin(k x) + b*cos(k x) with A = hypot(a, b) and
    dx3 = atan2(-b, a)/k, reported in (-d/2, d/2]. The derived visibility
    V = A/O carries a propagated error. A scan spanning less than one period
    is fitted but flagged.
    """
    if period_m <= 0:
        raise DomainError(f"period must be positive, got {period_m}")
    if scan.abscissa_kind != "position_x3":
        raise FitError(f"expected a position scan, got abscissa {scan.abscissa_kind!r}")
    n = len(scan)
    if n < 4:
        raise FitError(f"need at least 4 points to fit a sinusoid, got {n}")
    flags = []
    x = scan.abscissa
    y = scan.values
    if scan.uncertainties is not None:
        sigma = scan.uncertainties
    else:
        sigma = np.sqrt(np.clip(y, 1.0, None))
    span = float(x.max() - x.min())
    if span < period_m * (1.0 - 1e-12):
        flags.append("span_below_one_period")

    k = 2.0 * math.pi / period_m
    design = np.column_stack([np.ones(n), np.sin(k * x), np.cos(k * x)])
    beta, cov_lin = weighted_linear_lsq(design, y, sigma)
    offset, a, b = (float(value) for value in beta)
    amplitude = math.hypot(a, b)
    shift = math.atan2(-b, a) / k
    if shift <= -0.5 * period_m:   # fold the open end of atan2's range
        shift += period_m
    residuals = (y - design @ beta) / sigma
    chi2 = float(residuals @ residuals)
    dof = n - 3

    if offset <= 0:
        raise FitError(f"fitted offset must be positive, got {offset}")
    if amplitude > 0:
        # Jacobian of (O, A, dx3) with respect to (O, a, b).
        jac = np.array([
            [1.0, 0.0, 0.0],
            [0.0, a / amplitude, b / amplitude],
            [0.0, b / (k * amplitude**2), -a / (k * amplitude**2)],
        ])
        cov = jac @ cov_lin @ jac.T
        visibility = amplitude / offset
        grad_v = np.array([-amplitude / offset**2, a / (amplitude * offset),
                           b / (amplitude * offset)])
        v_err = math.sqrt(max(0.0, float(grad_v @ cov_lin @ grad_v)))
    else:
        # Degenerate direction: amplitude exactly zero leaves the phase
        # undetermined. Report conservative errors instead of dividing by 0.
        flags.append("zero_amplitude")
        cov = np.diag([
            float(cov_lin[0, 0]),
            0.5 * float(cov_lin[1, 1] + cov_lin[2, 2]),
            (0.25 * period_m) ** 2,
        ])
        visibility = 0.0
        v_err = math.sqrt(0.5 * float(cov_lin[1, 1] + cov_lin[2, 2])) / offset
    stat = {
        "O": math.sqrt(max(0.0, float(cov[0, 0]))),
        "A": math.sqrt(max(0.0, float(cov[1, 1]))),
        "delta_x3": math.sqrt(max(0.0, float(cov[2, 2]))),
        "V": v_err,
    }
    return FitResult(
        parameters={"O": offset, "A": amplitude, "delta_x3": shift, "V": visibility},
        units={"O": "counts", "A": "counts", "delta_x3": "m", "V": ""},
        stat_errors=stat,
        syst_errors={},
        chi_squared=chi2,
        dof=dof,
        covariance=cov,
        param_order=("O", "A", "delta_x3"),
        flags=flags,
    )


def unwrap_shift_series(voltages, wrapped_shifts_m, period_m):
    """Resolve the modular ambiguity of per-scan shifts across a voltage ramp.

    Each fitted dx3 lives in (-d/2, d/2]; assuming adjacent true shifts
    differ by less than d/2, every point is moved by the multiple of d that
    brings it closest to its unwrapped predecessor. Steps that land exactly
    on the ambiguity boundary are flagged, not guessed silently.

    Returns (unwrapped array [m], flags).
    """
    if period_m <= 0:
        raise DomainError(f"period must be positive, got {period_m}")
    voltages = np.asarray(voltages, dtype=float)
    wrapped = np.asarray(wrapped_shifts_m, dtype=float)
    if wrapped.shape != voltages.shape:
        raise ConfigurationError("voltages and shifts must have matching shapes")
    flags = []
    unwrapped = wrapped.copy()
    for i in range(1, wrapped.size):
        jump = unwrapped[i] - unwrapped[i - 1]
        cycles = round(jump / period_m)
        unwrapped[i:] -= cycles * period_m
        residual_jump = abs(unwrapped[i] - unwrapped[i - 1])
        if abs(residual_jump - 0.5 * period_m) < 1e-9 * period_m:
            flags.append(f"unwrap_ambiguous_at_{voltages[i]:g}V")
    return unwrapped, flags


# ---------------------------------------------------------------------------
# Susceptibility fit


def _series_sigma(scan: ScanData, flags: list) -> np.ndarray:
    if scan.uncertainties is not None:
        return scan.uncertainties
    flags.append("unit_weights")
    return np.ones(len(scan))


def fit_susceptibility(
    shift_series: ScanData,
    molecule: MoleculeSpec,
    spec: InterferometerSpec,
    calibration,
    quadrature: VelocityQuadrature,
    beam: BeamSpec = None,
    field_uncertainty_rel: float = 0.01,
    beam_perturbations: dict = None,
) -> FitResult:
    """Invert a shift-vs-voltage series for the static susceptibility volume.

    One-parameter weighted least squares of the velocity-averaged continuous
    shift model. The systematic budget contains: the calibration-constant
    standard error, the field-homogeneity allowance on the combined constant
    (default +/-1%), and — when a beam is given — the configured beam
    perturbations re-quadratured with the same node count. Each component is
    half the spread of a symmetric pair of refits; the total is their
    root-sum-square.
    """
    if shift_series.abscissa_kind != "voltage":
        raise FitError(f"expected a voltage series, got {shift_series.abscissa_kind!r}")
    if len(shift_series) < 3:
        raise FitError(f"need at least 3 voltages, got {len(shift_series)}")
    calib = _coerce_calibration(calibration)
    voltages = shift_series.abscissa
    measured = shift_series.values
    flags = []
    sigma = _series_sigma(shift_series, flags)

    def fitted_chi(constant, quad, start):
        def residual(params):
            model_shifts = _continuous_shift_model(
                params[0], molecule, spec, quad, constant, voltages
            )
            return (model_shifts - measured) / sigma

        return levenberg_fit(residual, np.array([start])), residual

    # The model is linear in chi to excellent approximation: seed the
    # minimizer with the weighted linear estimate at a probe value.
    probe = _continuous_shift_model(100.0, molecule, spec, quadrature,
                                    calib.combined_constant_per_m, voltages)
    slope = probe / 100.0
    w = 1.0 / sigma**2
    denom = float(np.sum(w * slope**2))
    if denom == 0.0:
        raise FitError("shift model is identically zero over the given voltages")
    start = float(np.sum(w * slope * measured)) / denom

    result, _ = fitted_chi(calib.combined_constant_per_m, quadrature, start)
    flags.extend(result.flags)
    if not result.converged:
        flags.append("not_converged")
    chi_hat = float(result.params[0])
    stat = float(result.stderr[0])

    def refit(constant=None, quad=None):
        res, _ = fitted_chi(
            calib.combined_constant_per_m if constant is None else constant,
            quadrature if quad is None else quad,
            chi_hat,
        )
        return float(res.params[0])

    systematics = {}
    g = calib.combined_constant_per_m
    if calib.stderr_per_m > 0:
        lo = refit(constant=g - calib.stderr_per_m)
        hi = refit(constant=g + calib.stderr_per_m)
        systematics["calibration"] = 0.5 * (abs(hi - chi_hat) + abs(lo - chi_hat))
    else:
        systematics["calibration"] = 0.0
    lo = refit(constant=g * (1.0 - field_uncertainty_rel))
    hi = refit(constant=g * (1.0 + field_uncertainty_rel))
    systematics["field_homogeneity"] = 0.5 * (abs(hi - chi_hat) + abs(lo - chi_hat))
    if beam is not None:
        perturbations = (
            _DEFAULT_BEAM_PERTURBATIONS if beam_perturbations is None else beam_perturbations
        )
        n_nodes = len(quadrature)
        for key, rel in perturbations.items():
            if key == "v_mean_rel":
                make = lambda s: replace(beam, v_mean_mps=beam.v_mean_mps * s)
            elif key == "v_fwhm_rel":
                make = lambda s: replace(beam, v_fwhm_mps=beam.v_fwhm_mps * s)
            else:
                raise ConfigurationError(f"unknown beam perturbation {key!r}")
            lo = refit(quad=velocity_quadrature(make(1.0 - rel), n_nodes))
            hi = refit(quad=velocity_quadrature(make(1.0 + rel), n_nodes))
            systematics["beam_" + key.removesuffix("_rel")] = 0.5 * (
                abs(hi - chi_hat) + abs(lo - chi_hat)
            )

    return FitResult(
        parameters={"chi": chi_hat},
        units={"chi": "A^3"},
        stat_errors={"chi": stat},
        syst_errors={"chi": systematics},
        chi_squared=result.chi2,
        dof=len(shift_series) - 1,
        covariance=result.covariance,
        param_order=("chi",),
        flags=flags,
    )


# ---------------------------------------------------------------------------
# Optical-polarizability fit


def _visibility_model(
    alpha_opt_A3: float,
    sigma_abs_cm2,
    molecule: MoleculeSpec,
    spec: InterferometerSpec,
    quadrature: VelocityQuadrature,
    powers,
) -> np.ndarray:
    trial = replace(molecule, alpha_opt_A3=alpha_opt_A3)
    out = np.empty(len(powers))
    for i, p in enumerate(powers):
        spec_p = replace(spec, g2=replace(spec.g2, laser_power_W=float(p)))
        h = model.averaged_first_harmonic(
            spec_p, trial, quadrature, sigma_abs_override_cm2=sigma_abs_cm2
        )
        out[i] = abs(h)
    return out


def fit_optical_polarizability(
    visibility_series: ScanData,
    molecule: MoleculeSpec,
    spec: InterferometerSpec,
    quadrature: VelocityQuadrature,
    include_absorption: bool = False,
    power_uncertainty_rel: float = 0.10,
) -> FitResult:
    """Invert a visibility-vs-power series for the optical polarizability.

    Fits the velocity-averaged quantum V(P); with ``include_absorption`` the
    absorption cross section joins as a second, physically non-negative
    parameter. The minimizer explores it unconstrained; a negative optimum is
    clipped to zero, flagged ``sigma_abs_at_bound``, and the polarizability
    is refitted with the cross section pinned there — the quoted cross-
    section uncertainty stays the unconstrained one so that consistency with
    zero remains testable. The laser-power scale uncertainty (default
    +/-10%) is propagated by refitting with the power axis scaled.
    """
    if visibility_series.abscissa_kind != "power":
        raise FitError(f"expected a power series, got {visibility_series.abscissa_kind!r}")
    n = len(visibility_series)
    if n < 5:
        raise FitError(f"need at least 5 power points, got {n}")
    powers = visibility_series.abscissa
    if np.unique(powers).size < 2:
        raise FitError("power values are all equal")
    measured = visibility_series.values
    flags = []
    sigma = _series_sigma(visibility_series, flags)

    fixed_sigma_abs = molecule.sigma_abs_cm2

    def residual_factory(power_axis):
        def residual(params):
            alpha = float(params[0])
            sigma_abs = (
                float(params[1]) * _SIGMA_ABS_SCALE_CM2
                if include_absorption
                else fixed_sigma_abs
            )
            if alpha < 0:
                return np.full(n, 1e6)
            return (
                _visibility_model(alpha, sigma_abs, molecule, spec, quadrature, power_axis)
                - measured
            ) / sigma

        return residual

    residual = residual_factory(powers)

    # Coarse scan for a starting polarizability: V(P) is strongly nonlinear
    # in alpha, so a grid probe avoids starting in the wrong Bessel lobe.
    grid = np.linspace(10.0, 150.0, 11)
    start_sigma = fixed_sigma_abs / _SIGMA_ABS_SCALE_CM2 if include_absorption else None
    costs = []
    for alpha in grid:
        p = [alpha, start_sigma] if include_absorption else [alpha]
        r = residual(np.asarray(p, dtype=float))
        costs.append(float(r @ r))
    alpha0 = float(grid[int(np.argmin(costs))])

    def run_fit(power_axis, start):
        return levenberg_fit(residual_factory(power_axis), np.asarray(start, dtype=float))

    start = [alpha0, start_sigma] if include_absorption else [alpha0]
    result = run_fit(powers, start)
    flags.extend(result.flags)
    if not result.converged:
        flags.append("not_converged")

    alpha_hat = float(result.params[0])
    alpha_stat = float(result.stderr[0])
    n_free = 2 if include_absorption else 1
    chi2 = result.chi2
    covariance = result.covariance
    param_order = ("alpha_opt",)
    parameters = {"alpha_opt": alpha_hat}
    units = {"alpha_opt": "A^3"}
    stat = {"alpha_opt": alpha_stat}

    sigma_hat_cm2 = None
    if include_absorption:
        sigma_hat_cm2 = float(result.params[1]) * _SIGMA_ABS_SCALE_CM2
        sigma_stat_cm2 = float(result.stderr[1]) * _SIGMA_ABS_SCALE_CM2
        if sigma_hat_cm2 < 0.0:
            flags.append("sigma_abs_at_bound")
            constrained = levenberg_fit(
                lambda p: residual_factory(powers)(np.array([p[0], 0.0])),
                np.array([alpha_hat]),
            )
            alpha_hat = float(constrained.params[0])
            alpha_stat = float(constrained.stderr[0])
            chi2 = constrained.chi2
            sigma_hat_cm2 = 0.0
        parameters = {"alpha_opt": alpha_hat, "sigma_abs": sigma_hat_cm2}
        units = {"alpha_opt": "A^3", "sigma_abs": "cm^2"}
        stat = {"alpha_opt": alpha_stat, "sigma_abs": sigma_stat_cm2}
        param_order = ("alpha_opt", "sigma_abs")
        scale = np.diag([1.0, _SIGMA_ABS_SCALE_CM2])
        covariance = scale @ result.covariance @ scale

    systematics = {"alpha_opt": {}}
    if include_absorption:
        systematics["sigma_abs"] = {}
    shifts = {name: [] for name in systematics}
    for factor in (1.0 - power_uncertainty_rel, 1.0 + power_uncertainty_rel):
        perturbed = run_fit(powers * factor, [alpha_hat] + ([0.0] if include_absorption else []))
        shifts["alpha_opt"].append(abs(float(perturbed.params[0]) - alpha_hat))
        if include_absorption:
            shifts["sigma_abs"].append(
                abs(float(perturbed.params[1]) * _SIGMA_ABS_SCALE_CM2 - sigma_hat_cm2)
            )
    for name, pair in shifts.items():
        systematics[name]["laser_power"] = 0.5 * (pair[0] + pair[1])

    return FitResult(
        parameters=parameters,
        units=units,
        stat_errors=stat,
        syst_errors=systematics,
        chi_squared=chi2,
        dof=n - n_free,
        covariance=covariance,
        param_order=param_order,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# Ingestion


def ingest_measurement_series(source) -> ScanData:
    """Parse a measurement CSV into typed ScanData.

    The first non-comment line must be one of the known headers
    (``x3_nm,counts``, ``voltage_V,shift_nm,err_nm``, ``power_W,visibility,err``);
    it fixes the abscissa kind and the unit conversions (nm -> m). '#' starts
    a comment; blank lines are ignored. The abscissa must be strictly
    monotone — duplicates and reversals are reported with their line number.
    """
    if isinstance(source, (str, PathLike)):
        with Path(source).open("r", encoding="utf-8") as stream:
            return _ingest_series_stream(stream)
    return _ingest_series_stream(source)


def _ingest_series_stream(stream) -> ScanData:
    kind = None
    n_fields = 0
    rows = []
    line_numbers = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind is None:
            header = ",".join(part.strip() for part in line.split(","))
            if header not in _HEADERS:
                raise FormatError(f"unknown header {line!r}")
            kind, n_fields = _HEADERS[header]
            continue
        parts = [part.strip() for part in line.split(",")]
        if len(parts) != n_fields:
            raise IngestionError(
                f"expected {n_fields} fields, got {len(parts)}", line=line_no
            )
        try:
            numbers = [float(part) for part in parts]
        except ValueError as exc:
            raise IngestionError(str(exc), line=line_no) from None
        rows.append(numbers)
        line_numbers.append(line_no)
    if kind is None:
        raise FormatError("no header line found")

    abscissa = [row[0] for row in rows]
    for i in range(1, len(abscissa)):
        if abscissa[i] == abscissa[i - 1]:
            raise IngestionError(
                f"duplicate abscissa value {abscissa[i]:g}", line=line_numbers[i]
            )
    if len(abscissa) > 2:
        direction = math.copysign(1.0, abscissa[1] - abscissa[0])
        for i in range(1, len(abscissa)):
            if math.copysign(1.0, abscissa[i] - abscissa[i - 1]) != direction:
                raise IngestionError("abscissa is not strictly monotone", line=line_numbers[i])

    x = np.array(abscissa, dtype=float)
    if kind == "position_x3":
        values = np.array([row[1] for row in rows])
        if np.any(values < 0):
            bad = line_numbers[int(np.argmin(values))]
            raise IngestionError("counts must be non-negative", line=bad)
        return ScanData(
            abscissa_kind=kind,
            abscissa=x * 1e-9,
            values=values,
            uncertainties=np.sqrt(np.clip(values, 1.0, None)) if values.size else None,
        )
    values = np.array([row[1] for row in rows])
    errors = np.array([row[2] for row in rows])
    if np.any(errors <= 0):
        bad = line_numbers[int(np.argmin(errors))]
        raise IngestionError("uncertainties must be positive", line=bad)
    if kind == "voltage":
        return ScanData(
            abscissa_kind=kind,
            abscissa=x,
            values=values * 1e-9,
            uncertainties=errors * 1e-9,
        )
    return ScanData(
        abscissa_kind=kind,
        abscissa=x,
        values=values,
        uncertainties=errors if errors.size else None,
    )
