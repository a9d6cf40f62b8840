#!/usr/bin/env python3
"""Timing comparison of the compiled kernel extension against the pure
numpy/scipy fallback.

Micro-benchmarks call both implementations side by side in this process;
the end-to-end row times a full susceptibility fit in a subprocess per
backend (the backend is fixed at import, so a fresh interpreter is the
only clean way to switch).

Usage: python3 benchmarks/bench_kernels.py [--nodes N] [--repeats R]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from kdtli.kernels import _reference

try:
    from kdtli import _core
except ImportError:
    _core = None

END_TO_END = r"""
import time
import numpy as np
from kdtli import (BeamSpec, DeflectorSpec, MoleculeSpec, velocity_quadrature,
                   fit_susceptibility, synthesize_shift_series)
from kdtli.kernels import BACKEND
from kdtli.model import InterferometerSpec, MaterialGrating, PhaseGrating

mask = MaterialGrating(period_m=266e-9, open_fraction=75.0 / 266.0)
light = PhaseGrating(laser_wavelength_m=532e-9, laser_power_W=8.0,
                     waist_y_m=900e-6, waist_z_m=20e-6)
spec = InterferometerSpec(g1=mask, g2=light, g3=mask, separation_m=0.105)
molecule = MoleculeSpec(name="bench", mass_amu=1034.376,
                        alpha_stat_A3=68.2, alpha_opt_A3=61.0)
deflector = DeflectorSpec(k_field_per_m3=2.0e6, effective_length_m=0.05,
                          distance_to_g3_m=0.1325)
quadrature = velocity_quadrature(BeamSpec(v_mean_mps=146.0, v_fwhm_mps=31.0), {nodes})
voltages = np.linspace(1000.0, 6000.0, 6)
series = synthesize_shift_series(95.0, molecule, spec, deflector, voltages,
                                 quadrature, shift_sigma_m=7e-9, seed=1)
start = time.perf_counter()
for _ in range({loops}):
    fit_susceptibility(series, molecule, spec, deflector, quadrature)
elapsed = (time.perf_counter() - start) / {loops}
print(f"{{BACKEND}} {{elapsed:.6f}}")
"""


def time_call(func, repeats):
    timer = timeit.Timer(func)
    loops, _ = timer.autorange()
    return min(timer.repeat(repeats, loops)) / loops


def run_fit_benchmark(nodes, loops, pure_python):
    env = dict(os.environ)
    env.pop("KDTLI_PURE_PYTHON", None)
    if pure_python:
        env["KDTLI_PURE_PYTHON"] = "1"
    code = END_TO_END.format(nodes=nodes, loops=loops)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    backend, seconds = out.stdout.split()
    return backend, float(seconds)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=64,
                        help="velocity quadrature nodes (default 64)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timeit repeats per row (default 5)")
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not available; micro-benchmarks skipped")
        backends = []
    else:
        backends = [("compiled", _core), ("reference", _reference)]

    rng = np.random.default_rng(7)
    small = rng.uniform(-6.0, 6.0, size=args.nodes)
    big = rng.uniform(-40.0, 40.0, size=4096)
    weights = np.full(args.nodes, 1.0 / args.nodes)
    phases = rng.uniform(-np.pi, np.pi, size=args.nodes)
    atten = np.exp(rng.uniform(-0.5, 0.0, size=args.nodes))

    rows = []
    for label, maker in [
        (f"bessel_j_array J1, n={args.nodes}",
         lambda impl, x=small: (lambda: impl.bessel_j_array(1, x))),
        ("bessel_j_array J1, n=4096",
         lambda impl, x=big: (lambda: impl.bessel_j_array(1, x))),
        (f"first_harmonic, n={args.nodes}",
         lambda impl, x=small: (lambda: impl.first_harmonic(
             weights, x, phases, atten, 1.2))),
    ]:
        times = {}
        for name, impl in backends:
            times[name] = time_call(maker(impl), args.repeats)
        rows.append((label, times))

    header = f"{'kernel':38s} {'compiled':>12s} {'reference':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, times in rows:
        if "compiled" in times:
            ratio = times["reference"] / times["compiled"]
            print(f"{label:38s} {times['compiled'] * 1e6:10.2f}us "
                  f"{times['reference'] * 1e6:10.2f}us {ratio:7.1f}x")
        else:
            print(f"{label:38s} {'-':>12s} {times['reference'] * 1e6:10.2f}us")

    loops = 20
    fit_times = {}
    for pure in (False, True):
        backend, seconds = run_fit_benchmark(args.nodes, loops, pure)
        fit_times[backend] = seconds
    label = f"susceptibility fit, {args.nodes} nodes"
    if "compiled" in fit_times and "reference" in fit_times:
        ratio = fit_times["reference"] / fit_times["compiled"]
        print(f"{label:38s} {fit_times['compiled'] * 1e3:10.2f}ms "
              f"{fit_times['reference'] * 1e3:10.2f}ms {ratio:7.1f}x")
    else:
        for backend, seconds in fit_times.items():
            print(f"{label:38s} [{backend}] {seconds * 1e3:10.2f}ms")


if __name__ == "__main__":
    main()
