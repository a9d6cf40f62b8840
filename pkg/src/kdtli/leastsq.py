"""Small damped Gauss-Newton (Levenberg-Marquardt) minimizer.

Implemented in-house because the fitting layer pins the exact algorithm —
central-difference Jacobian with relative step 1e-6, multiplicative damping
with accept/reject, convergence on relative parameter change below 1e-10,
at most 200 iterations, covariance from the normal matrix at the solution —
so that fit diagnostics (iteration counts, flags, standard errors) are
reproducible across platforms rather than dependent on a library's internal
heuristics.

The minimizer sees only a residual callable: ``residual_fn(params)`` must
return the weighted residual vector ``(data - model)/sigma``; the sum of its
squares is what gets minimized, and the covariance of the fitted parameters
is ``(J^T J)^{-1}`` in those units.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError

MAX_ITERATIONS = 200
RELATIVE_STEP = 1e-6
RELATIVE_TOLERANCE = 1e-10
LAMBDA_INITIAL = 1e-3
LAMBDA_FLOOR = 1e-12
LAMBDA_CEILING = 1e12


@dataclass
class LeastSquaresResult:
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    n_iterations: int
    converged: bool
    flags: list = field(default_factory=list)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


def _jacobian(residual_fn, params, scales):
    """Central-difference Jacobian of the residual vector."""
    p = np.asarray(params, dtype=float)
    columns = []
    for j in range(p.size):
        h = RELATIVE_STEP * max(abs(p[j]), scales[j])
        up = p.copy()
        dn = p.copy()
        up[j] += h
        dn[j] -= h
        columns.append((np.asarray(residual_fn(up)) - np.asarray(residual_fn(dn))) / (2.0 * h))
    return np.column_stack(columns)


def levenberg_fit(residual_fn, initial_params, scales=None) -> LeastSquaresResult:
    """Minimize the sum of squared residuals by damped Gauss-Newton.

    :param residual_fn: maps a parameter vector to the weighted residuals.
    :param initial_params: starting point (sequence of floats).
    :param scales: per-parameter magnitude floors for the finite-difference
        step and the convergence test; defaults to 1.0 for every parameter.
    """
    p = np.asarray(initial_params, dtype=float).copy()
    if p.ndim != 1 or p.size == 0:
        raise FitError("initial parameter vector must be non-empty and one-dimensional")
    if scales is None:
        scales = np.ones(p.size)
    else:
        scales = np.asarray(scales, dtype=float)
        if scales.shape != p.shape or np.any(scales <= 0):
            raise FitError("scales must be positive and match the parameter count")

    r = np.asarray(residual_fn(p), dtype=float)
    if not np.all(np.isfinite(r)):
        raise FitError("residuals are not finite at the starting point")
    cost = float(r @ r)
    lam = LAMBDA_INITIAL
    flags = []
    converged = False
    n_iter = 0

    for n_iter in range(1, MAX_ITERATIONS + 1):
        jac = _jacobian(residual_fn, p, scales)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        stepped = False
        while lam <= LAMBDA_CEILING:
            damped = jtj + lam * np.diag(np.clip(np.diag(jtj), 1e-300, None))
            try:
                delta = np.linalg.solve(damped, -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + delta
            r_trial = np.asarray(residual_fn(trial), dtype=float)
            if np.all(np.isfinite(r_trial)):
                cost_trial = float(r_trial @ r_trial)
                if cost_trial <= cost:
                    rel_change = max(
                        abs(delta[j]) / max(abs(p[j]), scales[j]) for j in range(p.size)
                    )
                    p, r, cost = trial, r_trial, cost_trial
                    lam = max(lam / 10.0, LAMBDA_FLOOR)
                    stepped = True
                    if rel_change < RELATIVE_TOLERANCE:
                        converged = True
                    break
            lam *= 10.0
        if not stepped:
            flags.append("stalled")
            break
        if converged:
            break
    if not converged and "stalled" not in flags:
        flags.append("max_iterations")

    jac = _jacobian(residual_fn, p, scales)
    jtj = jac.T @ jac
    try:
        covariance = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        covariance = np.linalg.pinv(jtj)
        flags.append("singular_jacobian")
    else:
        # Guard against a numerically indefinite normal matrix.
        if not np.all(np.isfinite(covariance)) or np.any(np.diag(covariance) < 0):
            covariance = np.linalg.pinv(jtj)
            flags.append("singular_jacobian")

    return LeastSquaresResult(
        params=p,
        covariance=covariance,
        chi2=cost,
        n_iterations=n_iter,
        converged=converged,
        flags=flags,
    )


def weighted_linear_lsq(design, y, sigma):
    """Exact weighted linear least squares: y ~ design @ beta.

    Returns (beta, covariance). Used for the sinusoid fit, where the model is
    linear in the sin/cos amplitudes and the offset, so no iteration is
    needed.
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise FitError("uncertainties must be positive")
    w = 1.0 / sigma
    a = design * w[:, None]
    b = y * w
    n_params = design.shape[1]
    if np.linalg.matrix_rank(a) < n_params:
        raise FitError("rank-deficient design matrix in linear least squares")
    beta, *_ = np.linalg.lstsq(a, b, rcond=None)
    covariance = np.linalg.inv(a.T @ a)
    return beta, covariance
