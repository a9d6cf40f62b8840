"""Command-line front end: simulate curves, fit measurement series, and
summarize conformer ensembles, all driven by one flat config format.

Every file written here starts with a comment block echoing the complete
effective configuration (see :mod:`kdtli.config`); pointing ``--config`` at a
result file replays the run that produced it. Exit codes: 0 success, 2 usage
or configuration problems, 3 malformed input data, 4 fit failure.
"""

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, model
from .config import RunConfig, load_config
from .conformers import ingest_conformer_table, summarize_ensemble
from .constants import CONSTANTS, CONSTANTS_TABLE_VERSION, _FIELDS
from .deflection import phase_profile_from_constant
from .errors import (
    ConfigurationError,
    DomainError,
    FitError,
    FormatError,
    IngestionError,
    KdtliError,
)
from .scanfit import (
    fit_optical_polarizability,
    fit_sinusoid,
    fit_susceptibility,
    ingest_measurement_series,
    synthesize_position_scan,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_FIT = 4

_FIT_INPUT_KIND = {
    "sinusoid": "position_x3",
    "susceptibility": "voltage",
    "optical_polarizability": "power",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdtli",
        description="Near-field interferometry simulation and fitting toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"kdtli {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="config file, or a result file whose echo to replay")
    common.add_argument("--seed", type=int, metavar="N", help="override run.seed")
    common.add_argument("--out", metavar="PATH", help="override the output path")
    common.add_argument("--nodes", type=int, metavar="N",
                        help="override quadrature.n_nodes")
    sub = parser.add_subparsers(dest="command", required=True)
    p_sim = sub.add_parser("simulate", parents=[common],
                           help="write a simulated curve or scan as CSV")
    p_sim.add_argument("kind",
                       choices=("visibility_power", "deflection_voltage", "position_scan"))
    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit a measurement series and write the result")
    p_fit.add_argument("kind",
                       choices=("sinusoid", "susceptibility", "optical_polarizability"))
    p_fit.add_argument("input", metavar="CSV", help="measurement series to fit")
    p_stats = sub.add_parser("stats", parents=[common],
                             help="summarize a conformer snapshot table")
    p_stats.add_argument("table", metavar="CSV", help="conformer table")
    sub.add_parser("constants", parents=[common], help="print the pinned constant table")
    return parser


def _effective_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.override("run.seed", args.seed)
    if args.nodes is not None:
        cfg.override("quadrature.n_nodes", args.nodes)
    if args.out:
        cfg.override("run.out", args.out)
    return cfg


def _write_output(cfg: RunConfig, default_name: str, body_lines) -> Path:
    path = Path(cfg["run.out"] or default_name)
    text = "\n".join(cfg.echo_lines(__version__) + list(body_lines)) + "\n"
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(kind: str, cfg: RunConfig) -> int:
    molecule = cfg.molecule()
    spec = cfg.interferometer()
    quadrature = cfg.quadrature()
    d = spec.g1.period_m
    n_grid = cfg["simulate.n_grid"]
    if n_grid < 2:
        raise ConfigurationError(f"simulate.n_grid must be at least 2, got {n_grid}")

    if kind == "visibility_power":
        powers = np.linspace(0.0, cfg["simulate.power_max_W"], n_grid)
        rows = ["power_W,vis_quantum,vis_classical"]
        for power in powers:
            spec_p = replace(spec, g2=replace(spec.g2, laser_power_W=float(power)))
            vq = abs(model.averaged_first_harmonic(spec_p, molecule, quadrature))
            vc = abs(model.averaged_first_harmonic(spec_p, molecule, quadrature,
                                                   regime="classical"))
            rows.append(f"{float(power)!r},{vq!r},{vc!r}")
        path = _write_output(cfg, "simulate_visibility_power.csv", rows)
    elif kind == "deflection_voltage":
        voltages = np.linspace(0.0, cfg["simulate.voltage_max_V"], n_grid)
        constant = cfg.deflector().combined_constant_per_m
        chi = cfg["simulate.chi_A3"]
        rows = ["voltage_V,shift_nm,visibility"]
        for u in voltages:
            if u == 0.0:
                shift_m = 0.0
                vis = abs(model.averaged_first_harmonic(spec, molecule, quadrature))
            else:
                theta = phase_profile_from_constant(chi, molecule.mass_amu, float(u),
                                                    constant, d)
                phi = model.velocity_averaged_phase_continuous(
                    spec, molecule, quadrature, theta
                )
                shift_m = phi * d / (2.0 * math.pi)
                vis = abs(model.averaged_first_harmonic(spec, molecule, quadrature,
                                                        external_phase=theta))
            rows.append(f"{float(u)!r},{shift_m * 1e9!r},{vis!r}")
        path = _write_output(cfg, "simulate_deflection_voltage.csv", rows)
    else:  # position_scan
        voltage = cfg["simulate.scan_voltage_V"]
        theta = None
        if voltage != 0.0:
            theta = phase_profile_from_constant(
                cfg["simulate.chi_A3"], molecule.mass_amu, voltage,
                cfg.deflector().combined_constant_per_m, d,
            )
        observables = model.velocity_averaged_observables(
            spec, molecule, quadrature, external_phase=theta
        )
        scan = synthesize_position_scan(
            observables,
            d,
            cfg["simulate.scan_step_m"],
            cfg["simulate.scan_points"],
            cfg["simulate.counts_per_point"],
            cfg["run.seed"],
        )
        rows = ["x3_nm,counts"]
        for x, count in zip(scan.abscissa, scan.values):
            rows.append(f"{float(x) * 1e9!r},{int(count)}")
        path = _write_output(cfg, "simulate_position_scan.csv", rows)
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit


def _summarize_fit(result) -> str:
    lines = []
    for name, value in result.parameters.items():
        unit = result.units.get(name, "")
        stat = result.stat_errors.get(name, 0.0)
        syst = result.total_systematic(name)
        suffix = f" {unit}" if unit else ""
        lines.append(f"{name} = {value:.6g} +/- {stat:.3g} (stat) +/- {syst:.3g} (syst){suffix}")
    lines.append(f"chi-squared/dof = {result.chi_squared:.4g}/{result.dof}")
    if result.flags:
        lines.append("flags: " + ", ".join(result.flags))
    return "\n".join(lines)


def cmd_fit(kind: str, input_path: str, cfg: RunConfig) -> int:
    data = ingest_measurement_series(input_path)
    expected = _FIT_INPUT_KIND[kind]
    if data.abscissa_kind != expected:
        raise FormatError(
            f"fit kind {kind!r} needs {expected} data, got {data.abscissa_kind}"
        )
    molecule = cfg.molecule()
    spec = cfg.interferometer()
    if kind == "sinusoid":
        result = fit_sinusoid(data, spec.g1.period_m)
    elif kind == "susceptibility":
        result = fit_susceptibility(
            data,
            molecule,
            spec,
            cfg.deflector(),
            cfg.quadrature(),
            beam=cfg.beam(),
            field_uncertainty_rel=cfg["fit.field_uncertainty_rel"],
        )
    else:
        result = fit_optical_polarizability(
            data,
            molecule,
            spec,
            cfg.quadrature(),
            include_absorption=cfg["fit.include_absorption"],
            power_uncertainty_rel=cfg["fit.power_uncertainty_rel"],
        )
    payload = result.to_json_dict()
    payload["tool_version"] = __version__
    body = json.dumps(payload, indent=2).splitlines()
    path = _write_output(cfg, f"fit_{kind}.json", body)
    print(_summarize_fit(result))
    print(f"wrote {path}")
    if "not_converged" in result.flags:
        return EXIT_FIT
    return EXIT_OK


# ---------------------------------------------------------------------------
# stats


def cmd_stats(table_path: str, cfg: RunConfig) -> int:
    samples = ingest_conformer_table(table_path)
    summary = summarize_ensemble(
        samples,
        temperature_K=cfg["stats.temperature_K"],
        significance_level=cfg["stats.significance"],
    )
    payload = {
        "n": summary.n,
        "mean_alpha_stat_A3": summary.mean_alpha_stat_A3,
        "mean_square_dipole_D2": summary.mean_square_dipole_D2,
        "alpha_dip_A3": summary.alpha_dip_A3,
        "chi_A3": summary.chi_A3,
        "ci_alpha_stat_A3": summary.ci_alpha_stat_A3,
        "ci_alpha_dip_A3": summary.ci_alpha_dip_A3,
        "significance_level": summary.significance_level,
        "temperature_K": cfg["stats.temperature_K"],
        "tool_version": __version__,
    }
    body = json.dumps(payload, indent=2).splitlines()
    path = _write_output(cfg, "stats_summary.json", body)
    print(
        f"chi = alpha_stat + alpha_dip = {summary.mean_alpha_stat_A3:.6g} "
        f"+ {summary.alpha_dip_A3:.6g} = {summary.chi_A3:.6g} A^3"
    )
    print(
        f"CI half-widths (significance {summary.significance_level:g}): "
        f"alpha_stat +/- {summary.ci_alpha_stat_A3:.3g} A^3, "
        f"alpha_dip +/- {summary.ci_alpha_dip_A3:.3g} A^3"
    )
    print(f"temperature: {cfg['stats.temperature_K']:g} K")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_constants() -> int:
    print(f"# constant table version: {CONSTANTS_TABLE_VERSION}")
    for name, unit in _FIELDS.items():
        print(f"{name} = {getattr(CONSTANTS, name)!r}  # {unit}")
    print(f"hbar = {CONSTANTS.hbar!r}  # J s (derived: planck_h / 2 pi)")
    return EXIT_OK


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "constants":
            return cmd_constants()
        cfg = _effective_config(args)
        if args.command == "simulate":
            return cmd_simulate(args.kind, cfg)
        if args.command == "fit":
            return cmd_fit(args.kind, args.input, cfg)
        return cmd_stats(args.table, cfg)
    except (FormatError, IngestionError) as exc:
        print(f"kdtli: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FitError as exc:
        print(f"kdtli: fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ConfigurationError, DomainError, KdtliError) as exc:
        print(f"kdtli: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"kdtli: i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
