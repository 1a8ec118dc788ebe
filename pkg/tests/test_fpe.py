import numpy as np
import pytest

from stochastic_string.core import ValidationError
from stochastic_string.drift import StationaryModeState
from stochastic_string import fpe
from stochastic_string.fpe import (
    GridField,
    StabilityError,
    continuity_residual,
    eigen_residual,
    evolve_fokker_planck,
    gaussian_field,
    l1_distance_to_samples,
    madelung_residual,
    stationary_field,
)


def test_identity_evolution(params):
    field = gaussian_field(-6, 6, 201, 0.0, 1.0)
    out = evolve_fokker_planck(field, lambda x: -x, nu=1.0, d_tau=0.0, steps=10)
    assert np.array_equal(out.rho, field.rho)
    out2 = evolve_fokker_planck(field, lambda x: -x, nu=1.0, d_tau=1e-4, steps=0)
    assert np.array_equal(out2.rho, field.rho)


def test_ou_relaxes_to_stationary_gaussian(params):
    # oracle: the analytic stationary solution of the OU Fokker-Planck equation
    field = gaussian_field(-6, 6, 401, 1.5, 0.8)
    d_tau = 0.4 * field.h**2
    steps = int(10.0 / d_tau)
    out = evolve_fokker_planck(field, lambda x: -x, nu=1.0, d_tau=d_tau, steps=steps)
    target = np.exp(-0.5 * out.x**2) / np.sqrt(2 * np.pi)
    assert np.abs(out.rho - target).sum() * out.h < 1e-3


def test_free_diffusion_variance_growth():
    field = gaussian_field(-20, 20, 801, 0.0, 1.0)
    d_tau = 0.4 * field.h**2
    steps = int(0.5 / d_tau)
    delta = steps * d_tau
    out = evolve_fokker_planck(field, lambda x: np.zeros_like(x), nu=1.0, d_tau=d_tau, steps=steps)
    var0 = np.sum(field.rho * field.x**2) * field.h
    var1 = np.sum(out.rho * out.x**2) * out.h
    assert var1 - var0 == pytest.approx(2.0 * delta, rel=0.01)


def test_mass_conserved_every_step():
    field = gaussian_field(-6, 6, 201, 1.0, 0.7)
    out = field
    for _ in range(50):
        out = evolve_fokker_planck(out, lambda x: -x, nu=1.0, d_tau=2e-4, steps=1)
        assert out.mass() == pytest.approx(1.0, abs=1e-9)


def test_stability_guard():
    field = gaussian_field(-6, 6, 401, 0.0, 1.0)
    with pytest.raises(StabilityError):
        evolve_fokker_planck(field, lambda x: -x, nu=1.0, d_tau=1e-3, steps=1)


def test_drift_must_be_finite():
    field = gaussian_field(-6, 6, 101, 0.0, 1.0)
    bad = lambda x: np.where(np.abs(x) < 0.1, np.inf, -x)
    with pytest.raises(ValidationError):
        evolve_fokker_planck(field, bad, nu=1.0, d_tau=1e-4, steps=1)


def test_continuity_residual_stationary(params):
    state = StationaryModeState(params, 1, 0)
    field = stationary_field(state, -6, 6, 2001)
    assert continuity_residual(field, params, 1) < 1e-4


def test_continuity_residual_uniform_flux(params):
    x = np.linspace(-6, 6, 1001)
    field = GridField(-6, 6, np.full_like(x, 1 / 12), 3.0 * x)
    assert continuity_residual(field, params, 0) < 1e-10


def test_continuity_residual_detects_perturbation(params):
    # a perturbed zero-mode density with uniform current is not stationary
    x = np.linspace(-6, 6, 1001)
    rho = (1 + 0.1 * np.sin(x)) / 12.0
    field = GridField(-6, 6, rho, 3.0 * x)
    assert continuity_residual(field, params, 0) > 1e-3


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_madelung_residual_stationary_states(params, n, k):
    state = StationaryModeState(params, n, k)
    field = stationary_field(state, -6, 6, 2001)
    assert madelung_residual(field, params, state) < 1e-3


def test_madelung_residual_ground_state_tight(params):
    state = StationaryModeState(params, 1, 0)
    field = stationary_field(state, -6, 6, 2001)
    assert madelung_residual(field, params, state) < 1e-4


def test_madelung_wrong_energy_offset(params):
    state = StationaryModeState(params, 1, 0)
    field = stationary_field(state, -6, 6, 2001)
    residual = madelung_residual(field, params, state, energy=state.energy() + 0.1)
    assert residual == pytest.approx(0.1, abs=1e-3)


def test_madelung_node_window_reported(params):
    state = StationaryModeState(params, 2, 1)
    field = stationary_field(state, -6, 6, 2001)
    detail = madelung_residual(field, params, state, detail=True)
    assert detail.excluded_points > 0
    assert detail.max_residual < 1e-3


def test_madelung_zero_mode_rejected(params):
    state = StationaryModeState(params, 0, momentum=1.0)
    field = stationary_field(state, -6, 6, 101)
    with pytest.raises(ValidationError):
        madelung_residual(field, params, StationaryModeState(params, 0, momentum=1.0))


@pytest.mark.parametrize("n,k", [(1, 0), (1, 1), (2, 0), (2, 2)])
def test_polar_reconstruction_eigen_relation(params, n, k):
    state = StationaryModeState(params, n, k)
    field = stationary_field(state, -6, 6, 2001)
    assert eigen_residual(field, params, state) < 1e-3


def test_eigen_residual_detects_wrong_energy(params):
    state = StationaryModeState(params, 1, 0)
    field = stationary_field(state, -6, 6, 2001)
    assert eigen_residual(field, params, state, energy=1.0) > 0.5


def test_l1_distance_statistics(params):
    rng = np.random.default_rng(0)
    state = StationaryModeState(params, 1, 0)
    field = stationary_field(state, -6, 6, 401)
    samples = rng.normal(0.0, 1.0, 100_000)
    assert l1_distance_to_samples(field, samples) < 0.02
    shifted = rng.normal(0.5, 1.0, 100_000)
    assert l1_distance_to_samples(field, shifted) > 0.1


def test_field_export_import(tmp_path, params):
    state = StationaryModeState(params, 1, 0)
    field = stationary_field(state, -3, 3, 31)
    path = tmp_path / "field.txt"
    fpe.export_field(field, path, header_lines=["note = demo"])
    back = fpe.import_field(path)
    assert back.points == field.points
    np.testing.assert_allclose(back.rho, field.rho)
    np.testing.assert_allclose(back.S, field.S)
    assert back.x_min == field.x_min


def test_negative_density_clip_diagnostic():
    # a sharp initial kink undershoots slightly; clip is counted, mass kept
    x = np.linspace(-1, 1, 201)
    rho = np.where(np.abs(x) < 0.05, 1.0, 0.0)
    rho /= rho.sum() * (x[1] - x[0])
    field = GridField(-1, 1, rho, np.zeros_like(x))
    out, diag = evolve_fokker_planck(
        field, lambda x: np.zeros_like(x), nu=1.0, d_tau=0.4 * field.h**2, steps=200,
        return_diagnostics=True,
    )
    assert out.mass() == pytest.approx(1.0, abs=1e-9)
    assert diag["clipped"] >= 0
