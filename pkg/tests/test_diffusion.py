import math

import numpy as np
import pytest

from ipflab import diffusion
from ipflab.errors import InputError, SimulationDivergedError


def ou_model(theta=1.0, sigma=1.0, x0=0.0, horizon=(0.0, 5.0)):
    return diffusion.DiffusionModel(
        n=1, drift=lambda t, x, u: -theta * x,
        diffusion=lambda t: [[sigma]],
        initial_mean=[x0], initial_cov=[[0.0]], horizon=horizon)


class TestModelValidation:
    def test_asymmetric_cov_rejected(self):
        with pytest.raises(InputError):
            diffusion.DiffusionModel(n=2, drift=lambda t, x, u: -x,
                                     diffusion=lambda t: np.eye(2),
                                     initial_mean=[0, 0],
                                     initial_cov=[[1, 0.5], [0.2, 1]],
                                     horizon=(0, 1))

    def test_negative_cov_rejected(self):
        with pytest.raises(InputError):
            diffusion.DiffusionModel(n=1, drift=lambda t, x, u: -x,
                                     diffusion=lambda t: [[1.0]],
                                     initial_mean=[0], initial_cov=[[-1.0]],
                                     horizon=(0, 1))

    def test_bad_horizon_rejected(self):
        with pytest.raises(InputError):
            ou_model(horizon=(1.0, 1.0))


class TestSimulateEnsemble:
    def test_ou_stationary_covariance(self):
        stats = diffusion.simulate_ensemble(ou_model(), 10000, dt=5e-3, seed=7)
        r_end = stats.r[-1, 0, 0]
        se = math.sqrt(2.0 / 10000) * 0.5
        assert abs(r_end - 0.5) <= 3 * se + 0.5 * 2 * 5e-3

    def test_degenerate_deterministic(self):
        model = diffusion.DiffusionModel(
            n=1, drift=lambda t, x, u: 0.0 * x, diffusion=lambda t: [[0.0]],
            initial_mean=[3.0], initial_cov=[[0.0]], horizon=(0.0, 1.0))
        stats = diffusion.simulate_ensemble(model, 100, dt=0.01, seed=1)
        assert np.allclose(stats.mean, 3.0)
        assert np.allclose(stats.r, 9.0)

    def test_unstable_linear_growth(self):
        model = diffusion.DiffusionModel(
            n=1, drift=lambda t, x, u: x, diffusion=lambda t: [[1.0]],
            initial_mean=[1.0], initial_cov=[[0.0]], horizon=(0.0, 1.0))
        stats = diffusion.simulate_ensemble(model, 20000, dt=1e-3, seed=3)
        target = 1.5 * math.exp(2.0) - 0.5
        se = target * math.sqrt(2.0 / 20000)
        assert abs(stats.r[-1, 0, 0] - target) <= 3 * se + target * 2 * 1e-3

    def test_seed_determinism_bit_identical(self):
        a = diffusion.simulate_ensemble(ou_model(horizon=(0, 1)), 500, dt=0.01, seed=11)
        b = diffusion.simulate_ensemble(ou_model(horizon=(0, 1)), 500, dt=0.01, seed=11)
        assert np.array_equal(a.r, b.r) and np.array_equal(a.mean, b.mean)

    def test_different_seed_differs(self):
        a = diffusion.simulate_ensemble(ou_model(horizon=(0, 1)), 500, dt=0.01, seed=11)
        b = diffusion.simulate_ensemble(ou_model(horizon=(0, 1)), 500, dt=0.01, seed=12)
        assert not np.array_equal(a.r, b.r)

    def test_covariance_symmetry_exact(self):
        model = diffusion.DiffusionModel(
            n=2, drift=lambda t, x, u: -x,
            diffusion=lambda t: [[1.0, 0.3], [0.0, 0.5]],
            initial_mean=[0, 0], initial_cov=np.eye(2), horizon=(0, 1))
        stats = diffusion.simulate_ensemble(model, 2000, dt=0.01, seed=5)
        assert np.all(stats.r == np.transpose(stats.r, (0, 2, 1)))

    def test_divergence_reports_first_bad_time(self):
        model = diffusion.DiffusionModel(
            n=1, drift=lambda t, x, u: 1e4 * x ** 3, diffusion=lambda t: [[1.0]],
            initial_mean=[1.0], initial_cov=[[0.0]], horizon=(0.0, 2.0))
        with pytest.raises(SimulationDivergedError) as exc, \
                np.errstate(over="ignore"):
            diffusion.simulate_ensemble(model, 50, dt=0.05, seed=2)
        assert exc.value.t_bad > 0

    def test_too_few_paths_rejected(self):
        with pytest.raises(InputError):
            diffusion.simulate_ensemble(ou_model(), 1, dt=0.01, seed=0)

    def test_keep_paths_shape(self):
        stats = diffusion.simulate_ensemble(ou_model(horizon=(0, 0.1)), 50,
                                            dt=0.01, seed=0, keep_paths=True)
        assert stats.paths.shape == (50, 11, 1)


class TestCovarianceDerivative:
    def test_linear_ramp(self):
        grid = np.linspace(0, 1, 101)
        stats = diffusion.stats_from_covariance(grid, grid.copy())
        out = diffusion.covariance_derivative(stats)
        assert np.allclose(out.r_dot[:, 0, 0], 1.0, atol=1e-12)

    def test_exponential(self):
        grid = np.arange(0, 1, 1e-3)
        stats = diffusion.stats_from_covariance(grid, np.exp(2 * grid))
        out = diffusion.covariance_derivative(stats)
        inner = out.r_dot[1:-1, 0, 0]
        assert np.allclose(inner, 2 * np.exp(2 * grid[1:-1]), rtol=1e-4)

    def test_constant(self):
        grid = np.linspace(0, 1, 50)
        stats = diffusion.stats_from_covariance(grid, np.full_like(grid, 2.0))
        out = diffusion.covariance_derivative(stats)
        assert np.allclose(out.r_dot, 0.0, atol=1e-12)

    def test_short_grid_rejected(self):
        stats = diffusion.stats_from_covariance([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(InputError):
            diffusion.covariance_derivative(stats)


class TestExport:
    def test_csv_and_json(self):
        import csv as csvmod
        import io
        import json
        stats = diffusion.simulate_ensemble(ou_model(horizon=(0, 0.1)), 100,
                                            dt=0.02, seed=0)
        stats = diffusion.covariance_derivative(stats)
        rows = list(csvmod.reader(io.StringIO(stats.to_csv())))
        assert rows[0] == ["t", "mean_0", "r_00", "rdot_00"]
        assert len(rows) == len(stats.grid) + 1
        doc = json.loads(stats.to_json())
        assert doc["seed"] == 0 and len(doc["grid"]) == len(stats.grid)
