"""Stationary per-mode wave data and the drift fields derived from it.

Each non-zero mode n behaves as an independent harmonic oscillator with
effective mass 1/(4*alpha') and frequency n, so the stationary density of
excitation level k is a Gaussian times a squared Hermite polynomial with
ground-state variance 2*alpha'/n. The zero mode is a free momentum
eigenstate: it has no normalizable stationary density and contributes a
constant current velocity 2*alpha'*kappa.

The drift decomposes into an osmotic part u = nu * rho'/rho and a current
part v = 2*nu * S'; the forward drift entering the SDE is v + u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import StringParams, ValidationError


class UnsupportedStateError(ValidationError):
    """Requested quantity is not defined for this state (e.g. zero-mode density)."""


class SingularDriftError(ZeroDivisionError):
    """Drift evaluated exactly at a node of the density."""

    def __init__(self, x: float, node: float):
        self.x = x
        self.node = node
        super().__init__(f"drift is singular at x={x!r} (density node at {node!r})")


def hermite_value_and_derivative(k: int, xi: np.ndarray | float):
    """Physicists' Hermite H_k and H_k' by upward recurrence."""
    h_prev = np.ones_like(np.asarray(xi, dtype=float))
    if k == 0:
        return h_prev, np.zeros_like(h_prev)
    h = 2.0 * np.asarray(xi, dtype=float)
    for j in range(1, k):
        h, h_prev = 2.0 * xi * h - 2.0 * j * h_prev, h
    return h, 2.0 * k * h_prev


@dataclass(frozen=True)
class StationaryModeState:
    """One mode of the string in a stationary state.

    For n >= 1 the state is the k-th oscillator level with energy
    n*(k + 1/2). For n = 0 it is a momentum eigenstate with momentum
    ``momentum`` (occupation is meaningless there and must stay 0).
    """

    params: StringParams
    n: int
    k: int = 0
    momentum: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"mode index must be >= 0, got {self.n}")
        if self.n == 0 and self.k != 0:
            raise ValidationError("zero mode has no occupation number")
        if self.n >= 1 and self.k < 0:
            raise ValidationError(f"occupation must be >= 0, got {self.k}")
        if self.n >= 1 and self.momentum != 0.0:
            raise ValidationError("only the zero mode carries momentum")

    @property
    def nu(self) -> float:
        return self.params.diffusion(self.n)

    def energy(self) -> float:
        if self.n == 0:
            return self.params.alpha_prime * self.momentum**2
        return self.n * (self.k + 0.5)

    @property
    def scale(self) -> float:
        """Inverse oscillator length sqrt(m_eff * omega) = sqrt(n/(4*alpha'))."""
        if self.n == 0:
            raise UnsupportedStateError("zero mode has no oscillator length")
        return math.sqrt(self.n / (4.0 * self.params.alpha_prime))

    @property
    def sigma(self) -> float:
        """Ground-state standard deviation sqrt(2*alpha'/n)."""
        return math.sqrt(2.0 * self.params.alpha_prime / self.n)

    def nodes(self) -> np.ndarray:
        """Zeros of the stationary density, in increasing order."""
        if self.n == 0 or self.k == 0:
            return np.empty(0)
        coeffs = np.zeros(self.k + 1)
        coeffs[-1] = 1.0
        return np.sort(np.polynomial.hermite.hermroots(coeffs)) / self.scale

    def density(self, x):
        """Stationary probability density, normalized to 1 on the line."""
        if self.n == 0:
            raise UnsupportedStateError(
                "zero mode has no normalizable stationary density"
            )
        beta = self.scale
        xi = beta * np.asarray(x, dtype=float)
        h, _ = hermite_value_and_derivative(self.k, xi)
        norm = beta / (math.sqrt(math.pi) * 2.0**self.k * math.factorial(self.k))
        out = norm * h**2 * np.exp(-(xi**2))
        return out if out.ndim else float(out)

    def log_density_gradient(self, x):
        """d(log rho)/dx, evaluated analytically (no density underflow)."""
        if self.n == 0:
            raise UnsupportedStateError("zero mode density is uniform")
        beta = self.scale
        xi = beta * np.asarray(x, dtype=float)
        h, dh = hermite_value_and_derivative(self.k, xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = beta * (2.0 * dh / h - 2.0 * xi)
        return grad if grad.ndim else float(grad)

    def osmotic_velocity(self, x: float) -> float:
        """u(x) = nu * rho'(x)/rho(x); singular at density nodes."""
        if self.n == 0:
            return 0.0
        beta = self.scale
        h, _ = hermite_value_and_derivative(self.k, beta * x)
        if h == 0.0:
            raise SingularDriftError(x, self._nearest_node(x))
        return self.nu * self.log_density_gradient(x)

    def current_velocity(self, x: float) -> float:
        """v(x) = 2*nu * S'(x): zero for real oscillator states, 2*alpha'*kappa for the zero mode."""
        if self.n == 0:
            return 2.0 * self.params.alpha_prime * self.momentum
        return 0.0

    def forward_drift(self, x: float) -> float:
        """Forward drift v_plus = v + u feeding the mode SDE."""
        return self.current_velocity(x) + self.osmotic_velocity(x)

    def forward_drift_array(self, x: np.ndarray, cap: float = 1.0e6):
        """Vectorized clamped forward drift.

        Returns ``(drift, n_clamped)``: values outside [-cap, cap] (including
        the infinities produced exactly at nodes) are clamped and counted.
        Nelson diffusions never cross a node, so the clamp only regularizes
        rare near-node evaluations in a discrete-time integrator.
        """
        x = np.asarray(x, dtype=float)
        if self.n == 0:
            return np.full_like(x, 2.0 * self.params.alpha_prime * self.momentum), 0
        drift = self.nu * self.log_density_gradient(x)
        n_clamped = int(np.count_nonzero(~(np.abs(drift) <= cap)))
        drift = np.nan_to_num(drift, nan=cap, posinf=cap, neginf=-cap)
        return np.clip(drift, -cap, cap), n_clamped

    def _nearest_node(self, x: float) -> float:
        nodes = self.nodes()
        if nodes.size == 0:
            return math.nan
        return float(nodes[np.argmin(np.abs(nodes - x))])

    @cached_property
    def _inverse_cdf_table(self) -> tuple[np.ndarray, np.ndarray]:
        half_width = (math.sqrt(2.0 * self.k + 1.0) + 6.0) / self.scale
        grid = np.linspace(-half_width, half_width, 8193)
        pdf = self.density(grid)
        cdf = np.concatenate(([0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * np.diff(grid))))
        cdf /= cdf[-1]
        # strictly increasing knots only, so interpolation is well posed
        keep = np.concatenate(([True], np.diff(cdf) > 0))
        return cdf[keep], grid[keep]

    def sample_stationary(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` points from the stationary density.

        The ground state samples its exact Gaussian; excited states use
        inverse-CDF interpolation on a fine grid spanning the support.
        """
        if self.n == 0:
            raise UnsupportedStateError(
                "zero mode has no normalizable stationary density"
            )
        if self.k == 0:
            return rng.normal(0.0, self.sigma, size=size)
        cdf, grid = self._inverse_cdf_table
        return np.interp(rng.uniform(0.0, 1.0, size=size), cdf, grid)
