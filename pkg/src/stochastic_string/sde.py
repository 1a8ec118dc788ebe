"""Forward-SDE Monte Carlo engine for single mode amplitudes.

Integrates dq = v_plus(q) dtau + dw with Euler-Maruyama, where the noise
increment satisfies <dw> = 0 and <dw dw> = 2 nu_n dtau. Trajectories are
driven by counter-based Philox streams keyed by (seed, trajectory index),
so runs are bit-identical regardless of chunking or execution order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import ModeStateSpec, StringParams, ValidationError
from .drift import StationaryModeState

InitSampler = Callable[[np.random.Generator, int], np.ndarray]

_CHUNK = 4096


class NonFiniteSampleError(RuntimeError):
    """A trajectory produced a non-finite amplitude."""

    def __init__(self, trajectory: int, step: int):
        self.trajectory = trajectory
        self.step = step
        super().__init__(
            f"non-finite sample in trajectory {trajectory} at step {step}"
        )


class InsufficientSamplesError(RuntimeError):
    """A probe bin holds too few samples for a conditional estimate."""


@dataclass(frozen=True)
class Trajectory:
    """One sample path of a single (mode, direction) amplitude."""

    mode: int
    direction: int
    tau_0: float
    d_tau: float
    samples: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.samples) - 1


@dataclass
class Ensemble:
    """Monte Carlo ensemble of trajectories for one (mode, direction).

    ``samples[j, t]`` is trajectory j at recorded index t; recorded indices
    are ``record_stride`` integration steps apart. ``clamp_events`` counts
    drift evaluations limited by the configured cap.
    """

    params: StringParams
    state: StationaryModeState
    mode: int
    direction: int
    seed: int
    tau_0: float
    d_tau: float
    steps: int
    record_stride: int
    samples: np.ndarray
    clamp_events: int = 0

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def recorded_steps(self) -> int:
        return self.samples.shape[1] - 1

    def recorded_taus(self) -> np.ndarray:
        return self.tau_0 + self.d_tau * self.record_stride * np.arange(
            self.samples.shape[1]
        )

    def trajectory(self, index: int) -> Trajectory:
        return Trajectory(
            mode=self.mode,
            direction=self.direction,
            tau_0=self.tau_0,
            d_tau=self.d_tau * self.record_stride,
            samples=self.samples[index],
        )

    def sample_at(self, t: int) -> np.ndarray:
        return self.samples[:, t]


def _trajectory_rng(seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def spawn_seed(seed: int, n: int, i: int) -> int:
    """Derive a per-(mode, direction) sub-seed from a master seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(n, i))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _resolve_state(
    params: StringParams, state: ModeStateSpec, n: int, i: int
) -> StationaryModeState:
    state.validate(params)
    if n == 0:
        return StationaryModeState(params, 0, momentum=state.momentum_component(i))
    return StationaryModeState(params, n, k=state.occupation(n, i))


def simulate(
    params: StringParams,
    state: ModeStateSpec,
    n: int,
    i: int,
    *,
    init: str | float | InitSampler = "stationary",
    d_tau: float = 1.0e-3,
    steps: int = 1000,
    count: int = 1000,
    seed: int = 0,
    record_stride: int = 1,
    drift_cap: float = 1.0e6,
    nu: float | None = None,
) -> Ensemble:
    """Euler-Maruyama ensemble for mode ``n``, transverse direction ``i``.

    ``init`` is either the string ``"stationary"`` (draw q_0 from the
    stationary density of the state), a number (all trajectories start
    there), or a callable ``(rng, size) -> array``. Each trajectory consumes
    its own Philox stream keyed by (seed, trajectory index): the first draws
    initialize q_0, the rest drive the noise, so results do not depend on
    chunk boundaries. ``nu`` overrides the mode's diffusion constant
    (``nu=0`` gives the deterministic Euler limit); statistics helpers
    keep using the physical constant, so this is a diagnostics hook only.
    """
    params.validate()
    if d_tau <= 0:
        raise ValidationError(f"d_tau must be positive, got {d_tau}")
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    if steps % record_stride != 0:
        raise ValidationError("record_stride must divide steps")
    mode_state = _resolve_state(params, state, n, i)
    if nu is None:
        nu = mode_state.nu
    elif nu < 0:
        raise ValidationError(f"nu must be >= 0, got {nu}")

    n_recorded = steps // record_stride + 1
    samples = np.empty((count, n_recorded), dtype=float)
    noise_scale = math.sqrt(2.0 * nu * d_tau)
    clamp_events = 0

    for start in range(0, count, _CHUNK):
        stop = min(start + _CHUNK, count)
        block = stop - start
        noise = np.empty((block, steps))
        q0 = np.empty(block)
        for j in range(block):
            rng = _trajectory_rng(seed, start + j)
            q0[j] = _draw_initial(mode_state, init, rng)
            noise[j] = rng.standard_normal(steps)
        _check_initial_drift(mode_state, q0, start)
        q = q0
        samples[start:stop, 0] = q
        # finiteness is checked explicitly each step; let overflows reach it
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(steps):
                drift, clamped = mode_state.forward_drift_array(q, cap=drift_cap)
                clamp_events += clamped
                q = q + drift * d_tau + noise_scale * noise[:, t]
                bad = ~np.isfinite(q)
                if bad.any():
                    j = int(np.argmax(bad))
                    raise NonFiniteSampleError(start + j, t + 1)
                if (t + 1) % record_stride == 0:
                    samples[start:stop, (t + 1) // record_stride] = q

    return Ensemble(
        params=params,
        state=mode_state,
        mode=n,
        direction=i,
        seed=seed,
        tau_0=0.0,
        d_tau=d_tau,
        steps=steps,
        record_stride=record_stride,
        samples=samples,
        clamp_events=clamp_events,
    )


def _draw_initial(
    mode_state: StationaryModeState, init, rng: np.random.Generator
) -> float:
    if isinstance(init, str):
        if init != "stationary":
            raise ValidationError(f"unknown init mode {init!r}")
        if mode_state.n == 0:
            raise ValidationError(
                "zero mode has no stationary density; give a numeric init"
            )
        return float(mode_state.sample_stationary(rng, 1)[0])
    if callable(init):
        return float(np.asarray(init(rng, 1)).reshape(-1)[0])
    return float(init)


def _check_initial_drift(mode_state, q0: np.ndarray, offset: int) -> None:
    if mode_state.n == 0 or mode_state.k == 0:
        return
    nodes = mode_state.nodes()
    for j, q in enumerate(q0):
        if np.any(nodes == q):
            raise ValidationError(
                f"drift undefined at q_0={q} (density node), trajectory {offset + j}"
            )


def increment_moments(ensemble: Ensemble, t: int) -> tuple[float, float]:
    """Mean and variance of q_{t+1} - q_t across the ensemble.

    As the ensemble grows the mean tends to v_plus * d_tau and the variance
    to 2 nu_n d_tau + O(d_tau^2). Requires full-resolution recording.
    """
    if ensemble.count == 0:
        raise InsufficientSamplesError("empty ensemble")
    if ensemble.record_stride != 1:
        raise ValidationError("increment moments need record_stride == 1")
    if not 0 <= t < ensemble.recorded_steps:
        raise ValidationError(f"step {t} out of range 0..{ensemble.recorded_steps - 1}")
    dq = ensemble.samples[:, t + 1] - ensemble.samples[:, t]
    return float(dq.mean()), float(dq.var(ddof=1))


def default_probe_grid(ensemble: Ensemble, half_width_sigmas: float = 1.5, points: int = 7):
    sigma = ensemble.state.sigma if ensemble.mode >= 1 else 1.0
    w = half_width_sigmas * sigma
    return np.linspace(-w, w, points)


def _as_ensemble_iterable(ensemble):
    if isinstance(ensemble, Ensemble):
        return [ensemble]
    return ensemble


def _conditional_differences(
    ensembles,
    queries: Sequence[tuple[Callable[[np.ndarray], np.ndarray], bool]],
    probe: np.ndarray,
    bin_half_width: float,
    min_occupancy: int,
):
    """Binned transport-rate estimates for several (F, forward) queries.

    Forward: E[(F(q_{t+1}) - F(q_t)) / d_tau | q_t in bin].
    Backward: E[(F(q_t) - F(q_{t-1})) / d_tau | q_t in bin].
    Returns per query (rates, bin means, counts); comparing analytics at
    the empirical bin means removes the first-order binning skew under a
    sloped density. Single pass over an iterable of ensembles, slice by
    slice, so full trajectories never need flattening and ensembles may
    come from a generator.
    """
    n_probe = len(probe)
    edges = np.concatenate((probe - bin_half_width, [probe[-1] + bin_half_width]))
    sums = [np.zeros(n_probe) for _ in queries]
    pos_sums = [np.zeros(n_probe) for _ in queries]
    counts = [np.zeros(n_probe, dtype=np.int64) for _ in queries]
    seen = False
    for ens in ensembles:
        seen = True
        if ens.record_stride != 1:
            raise ValidationError("transport derivatives need record_stride == 1")
        d_tau = ens.d_tau
        for t in range(ens.recorded_steps):
            prev_col = ens.samples[:, t]
            next_col = ens.samples[:, t + 1]
            for qi, (values, forward) in enumerate(queries):
                cond = prev_col if forward else next_col
                rate = (values(next_col) - values(prev_col)) / d_tau
                idx = np.searchsorted(edges, cond, side="right") - 1
                ok = (idx >= 0) & (idx < n_probe) & np.isfinite(rate)
                near = np.abs(cond[ok] - probe[idx[ok]]) <= bin_half_width
                idx_ok = idx[ok][near]
                sums[qi] += np.bincount(idx_ok, weights=rate[ok][near], minlength=n_probe)
                pos_sums[qi] += np.bincount(idx_ok, weights=cond[ok][near], minlength=n_probe)
                counts[qi] += np.bincount(idx_ok, minlength=n_probe)
    if not seen:
        raise InsufficientSamplesError("empty ensemble")
    results = []
    for qi in range(len(queries)):
        if np.any(counts[qi] < min_occupancy):
            lowest = int(counts[qi].min())
            raise InsufficientSamplesError(
                f"probe bin occupancy {lowest} below required {min_occupancy}"
            )
        results.append((sums[qi] / counts[qi], pos_sums[qi] / counts[qi], counts[qi]))
    return results


def transport_derivative_check(
    ensemble: Ensemble | Sequence[Ensemble],
    F: Callable[[np.ndarray], np.ndarray],
    dF: Callable[[np.ndarray], np.ndarray] | None = None,
    d2F: Callable[[np.ndarray], np.ndarray] | None = None,
    probe: np.ndarray | None = None,
    bin_half_width: float | None = None,
    min_occupancy: int = 30,
) -> float:
    """Max deviation of the empirical forward transport derivative.

    Compares the conditional forward difference estimate of D_plus F with
    v_plus F' + nu F'' on a probe grid and returns the largest absolute
    deviation. F' and F'' default to central differences of ``F``.
    Accepts one full-resolution ensemble or an iterable to pool; the
    first ensemble fixes the reference state.
    """
    ensembles = list(_as_ensemble_iterable(ensemble))
    lead = ensembles[0]
    if probe is None:
        probe = default_probe_grid(lead)
    if bin_half_width is None:
        bin_half_width = 0.5 * (probe[1] - probe[0]) if len(probe) > 1 else 0.1
    ((est, at, _),) = _conditional_differences(
        ensembles, [(F, True)], probe, bin_half_width, min_occupancy
    )
    h = 1.0e-5
    dF_vals = dF(at) if dF else (F(at + h) - F(at - h)) / (2 * h)
    d2F_vals = d2F(at) if d2F else (F(at + h) - 2 * F(at) + F(at - h)) / h**2
    drift, _ = lead.state.forward_drift_array(at)
    analytic = drift * dF_vals + lead.state.nu * d2F_vals
    return float(np.max(np.abs(est - analytic)))


def _fit_rate_polynomials(stats, degree: int) -> list[np.polynomial.Polynomial]:
    return [
        np.polynomial.Polynomial.fit(at, rates, degree, w=np.sqrt(counts))
        for rates, at, counts in stats
    ]


def second_law_check(
    ensemble: Ensemble | Sequence[Ensemble],
    probe: np.ndarray | None = None,
    bin_half_width: float | None = None,
    min_occupancy: int = 200,
    fit_degree: int = 3,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Empirical mean stochastic acceleration (D+D- + D-D+)q / 2.

    The forward and backward velocities v_+(x), v_-(x) are estimated from
    conditional increment rates and smoothed by low-order polynomial fits;
    the outer transport derivatives then follow from their defining form
    D_(+/-) G = v_(+/-) G' +/- nu G'' with the engine's known diffusion
    constant. Returns (max relative deviation from -n^2 x, probe grid,
    acceleration estimates). Accepts one ensemble or an iterable to pool
    (a generator keeps only one in memory at a time).
    """
    it = iter(_as_ensemble_iterable(ensemble))
    lead = next(it)
    if lead.mode < 1:
        raise ValidationError("stochastic acceleration check targets n >= 1 modes")
    if probe is None:
        sigma = lead.state.sigma
        probe = np.concatenate((np.linspace(-2, -0.4, 5), np.linspace(0.4, 2, 5))) * sigma
    if bin_half_width is None:
        bin_half_width = 0.15 * lead.state.sigma

    # fit window extends past the probe so every probe point sits in the
    # well-constrained interior of the polynomial fits
    fit_grid = np.linspace(1.2 * probe.min(), 1.2 * probe.max(), 21)
    stats = _conditional_differences(
        itertools.chain([lead], it),
        [(lambda x: x, False), (lambda x: x, True)],
        fit_grid,
        bin_half_width,
        min_occupancy,
    )
    v_minus, v_plus = _fit_rate_polynomials(stats, fit_degree)
    nu = lead.state.nu
    d_plus_of_vminus = v_plus(probe) * v_minus.deriv()(probe) + nu * v_minus.deriv(2)(probe)
    d_minus_of_vplus = v_minus(probe) * v_plus.deriv()(probe) - nu * v_plus.deriv(2)(probe)
    acceleration = 0.5 * (d_plus_of_vminus + d_minus_of_vplus)
    expected = -lead.mode**2 * probe
    deviation = float(np.max(np.abs(acceleration - expected) / np.abs(expected)))
    return deviation, probe, acceleration


def export_ensemble(ensemble: Ensemble, path: str | Path, header_lines: Sequence[str] = ()) -> None:
    """Write the ensemble as columnar text: trajectory_id, step, tau, q."""
    taus = ensemble.recorded_taus()
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("trajectory_id step tau q\n")
        for j in range(ensemble.count):
            row = ensemble.samples[j]
            for t, q in enumerate(row):
                fh.write(f"{j} {t * ensemble.record_stride} {float(taus[t])!r} {float(q)!r}\n")


def ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(a)
    b = np.sort(b)
    both = np.concatenate((a, b))
    cdf_a = np.searchsorted(a, both, side="right") / len(a)
    cdf_b = np.searchsorted(b, both, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_critical_value(n_a: int, n_b: int, alpha: float = 0.01) -> float:
    """Critical two-sample KS distance at significance ``alpha``."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n_a + n_b) / (n_a * n_b))
