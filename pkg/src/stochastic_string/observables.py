"""Physics outputs: mode correlators, string reconstruction, level spectrum.

The two-point function of a ground-state mode n decays as
(2 alpha'/n) exp(-n dtau) in the Euclidean evolution parameter, and the
transverse-summed correlator is (D-2) * 2 alpha' * sum_n exp(-n dtau)/n.
The zero mode is excluded throughout (infrared divergence).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .core import StringParams, ValidationError
from .sde import Ensemble


class ExcitedStateError(ValidationError):
    """Correlator estimator is only defined for ground-state ensembles."""


class ZeroModeError(ValidationError):
    """Zero mode is excluded from correlators."""


class MissingModeError(ValidationError):
    """Summed correlator requires every (mode, direction) ensemble."""


@dataclass(frozen=True)
class CorrelatorEstimate:
    mode: int
    delta_tau: float
    value: float
    standard_error: float
    sample_count: int


def _require_ground_state(ensemble: Ensemble) -> None:
    if ensemble.mode < 1:
        raise ZeroModeError("zero mode is excluded from correlators")
    if ensemble.state.k != 0:
        raise ExcitedStateError(
            f"correlator contract holds for k = 0, ensemble has k = {ensemble.state.k}"
        )


def mode_correlator(ensemble: Ensemble, t: int, t_prime: int) -> CorrelatorEstimate:
    """Estimate <q(tau_t) q(tau_t')> across trajectories at two recorded indices."""
    _require_ground_state(ensemble)
    if t < t_prime:
        raise ValidationError(f"need t >= t_prime, got {t} < {t_prime}")
    products = ensemble.samples[:, t] * ensemble.samples[:, t_prime]
    m = ensemble.count
    value = float(products.mean())
    se = float(products.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    lag = (t - t_prime) * ensemble.d_tau * ensemble.record_stride
    return CorrelatorEstimate(ensemble.mode, lag, value, se, m)


def correlator_at_lag(ensemble: Ensemble, lag_steps: int) -> CorrelatorEstimate:
    """Stationarity-averaged correlator at a fixed recorded lag.

    Each trajectory contributes the time average of q_t q_{t+lag} over all
    recorded origins; the standard error is taken across trajectories,
    which are independent by construction.
    """
    _require_ground_state(ensemble)
    n_rec = ensemble.samples.shape[1]
    if not 0 <= lag_steps < n_rec:
        raise ValidationError(f"lag {lag_steps} outside recorded range")
    prods = ensemble.samples[:, : n_rec - lag_steps] * ensemble.samples[:, lag_steps:]
    per_traj = prods.mean(axis=1)
    m = ensemble.count
    value = float(per_traj.mean())
    se = float(per_traj.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    lag = lag_steps * ensemble.d_tau * ensemble.record_stride
    return CorrelatorEstimate(ensemble.mode, lag, value, se, m)


def analytic_mode_correlator(params: StringParams, n: int, delta_tau: float) -> float:
    """Per-mode, per-direction stationary correlator (2 alpha'/n) e^{-n dtau}."""
    return 2.0 * params.alpha_prime / n * math.exp(-n * delta_tau)


def analytic_summed_correlator(params: StringParams, delta_tau: float, n_max: int) -> float:
    return (params.dims - 2) * 2.0 * params.alpha_prime * sum(
        math.exp(-n * delta_tau) / n for n in range(1, n_max + 1)
    )


def fit_log_slope(estimates: Sequence[CorrelatorEstimate]) -> float:
    """Least-squares slope of log correlator value against lag."""
    lags = np.array([e.delta_tau for e in estimates])
    values = np.array([e.value for e in estimates])
    if np.any(values <= 0):
        raise ValidationError("correlator values must be positive for a log fit")
    return float(np.polyfit(lags, np.log(values), 1)[0])


def summed_correlator(
    ensembles: Iterable[Ensemble], delta_tau: float
) -> tuple[float, float]:
    """Sum of per-(mode, direction) correlator estimates at one lag.

    Requires a ground-state ensemble for every mode n = 1..mode_cutoff and
    every transverse direction; returns (value, standard_error) with the
    errors of independent ensembles combined in quadrature.
    """
    ensembles = list(ensembles)
    if not ensembles:
        raise MissingModeError("no ensembles supplied")
    params = ensembles[0].params
    seen: dict[tuple[int, int], Ensemble] = {}
    for ens in ensembles:
        _require_ground_state(ens)
        key = (ens.mode, ens.direction)
        if key in seen:
            raise ValidationError(f"duplicate ensemble for (mode, direction) {key}")
        seen[key] = ens
    required = {
        (n, i)
        for n in range(1, params.mode_cutoff + 1)
        for i in range(1, params.transverse_count + 1)
    }
    missing = sorted(required - set(seen))
    if missing:
        raise MissingModeError(f"missing (mode, direction) ensembles: {missing[:8]}")

    total = 0.0
    variance = 0.0
    for ens in seen.values():
        stride_tau = ens.d_tau * ens.record_stride
        lag_steps = round(delta_tau / stride_tau)
        if abs(lag_steps * stride_tau - delta_tau) > 1.0e-9:
            raise ValidationError(
                f"lag {delta_tau} is not a multiple of the recorded spacing {stride_tau}"
            )
        est = correlator_at_lag(ens, lag_steps)
        total += est.value
        variance += est.standard_error**2
    return total, math.sqrt(variance)


def reconstruct_string(amplitudes: Sequence[float], sigma: np.ndarray) -> np.ndarray:
    """Transverse profile x(sigma) = sum_n q_n cos(n sigma) on sigma in [0, pi]."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size and (sigma.min() < -1.0e-12 or sigma.max() > math.pi + 1.0e-12):
        raise ValidationError("sigma grid must lie in [0, pi]")
    out = np.zeros_like(sigma)
    for n, q in enumerate(amplitudes):
        out += q * np.cos(n * sigma)
    return out


def cosine_sample_grid(points: int) -> np.ndarray:
    """Half-integer sigma grid on which the cosine analysis is exact."""
    j = np.arange(points)
    return math.pi * (j + 0.5) / points


def cosine_coefficients(values: np.ndarray, n_modes: int) -> np.ndarray:
    """Recover q_0..q_{n_modes} from samples on :func:`cosine_sample_grid`.

    Discrete cosine orthogonality makes this exact when the profile
    contains no modes beyond n_modes and the grid has > n_modes points.
    """
    values = np.asarray(values, dtype=float)
    m = len(values)
    if m <= n_modes:
        raise ValidationError("need more sample points than modes")
    sigma = cosine_sample_grid(m)
    coeffs = np.empty(n_modes + 1)
    for n in range(n_modes + 1):
        factor = 1.0 if n == 0 else 2.0
        coeffs[n] = factor / m * np.sum(values * np.cos(n * sigma))
    return coeffs


@dataclass(frozen=True)
class SpectrumLevel:
    level: int
    energy_offset: float
    degeneracy: int


def level_spectrum(
    params: StringParams, max_level: int, zeta_intercept: bool = False
) -> list[SpectrumLevel] | tuple[list[SpectrumLevel], float]:
    """Degeneracies of oscillator levels N = 0..max_level.

    Counts occupation patterns {k_{n,i}} with sum of n*k_{n,i} = N over
    D-2 transverse directions; the energy above the ground state is N in
    units where mode n has frequency n. With ``zeta_intercept`` the
    zeta-regularized normal-ordering constant (D-2)/24 is also returned.
    """
    if max_level < 0:
        raise ValidationError("max_level must be >= 0")
    t = params.transverse_count
    # count per mode: putting c quanta of mode n into t directions has
    # C(c + t - 1, t - 1) arrangements; convolve over modes.
    ways = np.zeros(max_level + 1, dtype=object)
    ways[0] = 1
    for n in range(1, max_level + 1):
        updated = ways.copy()
        for total in range(n, max_level + 1):
            acc = updated[total]
            for c in range(1, total // n + 1):
                acc += ways[total - n * c] * comb(c + t - 1, t - 1)
            updated[total] = acc
        ways = updated
    levels = [SpectrumLevel(N, float(N), int(ways[N])) for N in range(max_level + 1)]
    if zeta_intercept:
        return levels, t / 24.0
    return levels


def correlator_report_rows(
    params: StringParams, estimates: Sequence[CorrelatorEstimate]
) -> list[dict]:
    """Machine-readable correlator table with analytic values and z-scores."""
    rows = []
    for est in estimates:
        analytic = analytic_mode_correlator(params, est.mode, est.delta_tau)
        z = (est.value - analytic) / est.standard_error if est.standard_error else 0.0
        rows.append(
            {
                "n": est.mode,
                "delta_tau": est.delta_tau,
                "value": est.value,
                "stderr": est.standard_error,
                "analytic": analytic,
                "z_score": z,
            }
        )
    return rows


def format_report(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    columns = list(rows[0])
    lines = [" ".join(columns)]
    for row in rows:
        lines.append(" ".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def report_json(rows: Sequence[dict]) -> str:
    return json.dumps(rows, indent=2, sort_keys=True)
