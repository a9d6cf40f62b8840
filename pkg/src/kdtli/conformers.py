"""Conformer-ensemble statistics: van Vleck susceptibility with t-test intervals.

Snapshot tables produced by external MD + DFT pipelines (time, static
polarizability, dipole magnitude) are ingested and reduced to the thermally
averaged dipole polarizability and the total electric susceptibility

    chi = alpha_stat + <d^2> / (3 kB T)   (as a polarizability volume)

with Student-t confidence intervals on both terms.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import t as student_t

from .constants import DEBYE, K_BOLTZMANN, polarizability_si_to_volume
from .errors import DomainError, FormatError, IngestionError, StatisticsError

CONFORMER_HEADER = "time_ns,alpha_stat_A3,dipole_D"


@dataclass(frozen=True)
class ConformerSample:
    time_ns: float           # snapshot time [ns]
    alpha_stat_A3: float     # static polarizability volume [Angstrom^3]
    dipole_D: float          # dipole magnitude [debye]

    def __post_init__(self):
        if self.alpha_stat_A3 < 0:
            raise DomainError(f"alpha_stat must be non-negative, got {self.alpha_stat_A3}")
        if self.dipole_D < 0:
            raise DomainError(f"dipole magnitude must be non-negative, got {self.dipole_D}")


@dataclass(frozen=True)
class EnsembleSummary:
    n: int                       # sample count
    mean_alpha_stat_A3: float    # sample mean of alpha_stat [Angstrom^3]
    mean_square_dipole_D2: float  # sample mean of d^2 [debye^2]
    alpha_dip_A3: float          # thermally averaged dipole polarizability [Angstrom^3]
    chi_A3: float                # total susceptibility volume [Angstrom^3]
    ci_alpha_stat_A3: float      # CI half-width on mean alpha_stat [Angstrom^3]
    ci_alpha_dip_A3: float       # CI half-width on alpha_dip [Angstrom^3]
    significance_level: float    # two-sided significance (0.05 for 95% CI)


def dipole_polarizability(mean_square_dipole_D2, temperature_K):
    """Orientation-averaged dipole polarizability volume.

    Parameters
    ----------
    mean_square_dipole_D2 : float
        Thermal average of the squared dipole moment, in debye^2.
    temperature_K : float
        Temperature of the thermal ensemble, in kelvin.

    Returns
    -------
    float
        ``<d^2> / (3 kB T)`` converted to a polarizability volume in
        Angstrom^3. Linear in ``<d^2>``, inversely proportional to T.
    """
    if temperature_K <= 0:
        raise DomainError(f"temperature must be positive, got {temperature_K} K")
    if mean_square_dipole_D2 < 0:
        raise DomainError(f"mean square dipole must be non-negative, got {mean_square_dipole_D2}")
    d2_si = mean_square_dipole_D2 * DEBYE * DEBYE          # [C^2 m^2]
    alpha_si = d2_si / (3.0 * K_BOLTZMANN * temperature_K)  # [C^2 m^2 / J]
    return polarizability_si_to_volume(alpha_si)


def van_vleck_susceptibility(alpha_stat_A3, alpha_dip_A3):
    """Total susceptibility volume: exact sum of the static and dipole terms."""
    if alpha_stat_A3 < 0 or alpha_dip_A3 < 0:
        raise DomainError("susceptibility terms must be non-negative")
    return alpha_stat_A3 + alpha_dip_A3


def t_quantile(degrees_of_freedom, probability):
    """Student-t inverse CDF.

    Parameters
    ----------
    degrees_of_freedom : int
        Must be >= 1.
    probability : float
        Strictly between 0 and 1.
    """
    if degrees_of_freedom < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {degrees_of_freedom}")
    if not (0.0 < probability < 1.0):
        raise DomainError(f"probability must lie strictly in (0, 1), got {probability}")
    return float(student_t.ppf(probability, degrees_of_freedom))


def summarize_ensemble(samples, temperature_K, significance_level=0.05):
    """Reduce a snapshot series to means, susceptibility and t-intervals.

    Parameters
    ----------
    samples : sequence of ConformerSample
        At least two samples with strictly increasing timestamps.
    temperature_K : float
        Temperature used in the van Vleck dipole term.
    significance_level : float
        Two-sided significance; 0.05 gives 95% confidence intervals.

    Returns
    -------
    EnsembleSummary
        The CI on alpha_dip is computed on the transformed per-sample series
        ``d_i^2 / (3 kB T)`` (each expressed as a volume), not by propagating
        an interval on <d^2> through the conversion.

    Notes
    -----
    Sample standard deviations use the n-1 divisor, and snapshots are treated
    as independent (no autocorrelation correction).
    """
    n = len(samples)
    if n < 2:
        raise StatisticsError(f"need at least 2 samples for a summary, got {n}")
    if not (0.0 < significance_level < 1.0):
        raise DomainError(f"significance level must lie in (0, 1), got {significance_level}")
    times = np.array([s.time_ns for s in samples])
    if np.any(np.diff(times) <= 0):
        raise IngestionError("snapshot times must be strictly increasing")

    alpha_stat = np.array([s.alpha_stat_A3 for s in samples])
    d2 = np.array([s.dipole_D**2 for s in samples])
    mean_alpha_stat = float(np.mean(alpha_stat))
    mean_d2 = float(np.mean(d2))
    alpha_dip = dipole_polarizability(mean_d2, temperature_K)
    # per-sample dipole-polarizability series for the transformed-series CI
    alpha_dip_series = np.array(
        [dipole_polarizability(v, temperature_K) for v in d2]
    )
    tq = t_quantile(n - 1, 1.0 - significance_level / 2.0)
    ci_alpha_stat = tq * float(np.std(alpha_stat, ddof=1)) / np.sqrt(n)
    ci_alpha_dip = tq * float(np.std(alpha_dip_series, ddof=1)) / np.sqrt(n)
    return EnsembleSummary(
        n=n,
        mean_alpha_stat_A3=mean_alpha_stat,
        mean_square_dipole_D2=mean_d2,
        alpha_dip_A3=alpha_dip,
        chi_A3=van_vleck_susceptibility(mean_alpha_stat, alpha_dip),
        ci_alpha_stat_A3=ci_alpha_stat,
        ci_alpha_dip_A3=ci_alpha_dip,
        significance_level=significance_level,
    )


def temperature_systematic(samples, temperature_K, temperature_uncertainty_K,
                           significance_level=0.05):
    """Systematic half-range on alpha_dip (and chi) from a temperature offset.

    Re-evaluates the summary at T +/- dT and returns the mean absolute shift
    of alpha_dip, the source-temperature uncertainty being the only systematic
    the ensemble statistics are exposed to.
    """
    if temperature_uncertainty_K < 0:
        raise DomainError("temperature uncertainty must be non-negative")
    if temperature_uncertainty_K == 0:
        return 0.0
    center = summarize_ensemble(samples, temperature_K, significance_level)
    shifts = []
    for sign in (-1.0, +1.0):
        pert = summarize_ensemble(
            samples, temperature_K + sign * temperature_uncertainty_K, significance_level
        )
        shifts.append(abs(pert.alpha_dip_A3 - center.alpha_dip_A3))
    return float(np.mean(shifts))


def ingest_conformer_table(source) -> list[ConformerSample]:
    """Parse a conformer snapshot CSV.

    Parameters
    ----------
    source : path-like or readable text stream
        Table with the exact header ``time_ns,alpha_stat_A3,dipole_D``,
        decimal-point floats, and '#' comment lines.

    Returns
    -------
    list of ConformerSample
        In file order; row count preserved. Timestamps must be strictly
        increasing (checked here with line numbers).
    """
    if hasattr(source, "read"):
        text = source.read()
        label = getattr(source, "name", "<stream>")
    else:
        text = Path(source).read_text()
        label = str(source)
    lines = io.StringIO(text).read().splitlines()

    header_seen = False
    samples: list[ConformerSample] = []
    last_time = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != CONFORMER_HEADER:
                raise FormatError(
                    f"{label}: expected header {CONFORMER_HEADER!r}, got {line!r}"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise IngestionError(f"expected 3 comma-separated fields, got {raw!r}", line=lineno)
        try:
            time_ns, alpha, dip = (float(p) for p in parts)
        except ValueError:
            raise IngestionError(f"malformed number in row {raw!r}", line=lineno) from None
        try:
            sample = ConformerSample(time_ns=time_ns, alpha_stat_A3=alpha, dipole_D=dip)
        except DomainError as exc:
            raise IngestionError(str(exc), line=lineno) from None
        if last_time is not None and time_ns <= last_time:
            raise IngestionError(
                f"snapshot times must be strictly increasing ({time_ns} after {last_time})",
                line=lineno,
            )
        last_time = time_ns
        samples.append(sample)
    if not header_seen:
        raise FormatError(f"{label}: empty table (missing header)")
    return samples
