"""Tests for metrics.py."""

import numpy as np
import pytest

from hybridris.errors import ConfigurationError, DimensionError
from hybridris.metrics import TrialRecord, effective_se, mse, se_prefactor, squared_error
from hybridris.setups import SETUPS


class TestMse:
    def test_exact(self):
        assert mse([[0.1, 0.2]], [[0.1, 0.2]]) == 0.0

    def test_constant_offset(self):
        assert mse([[0.2, 0.3]], [[0.1, 0.2]]) == pytest.approx(0.01)

    def test_complex_moment(self, rng):
        s2 = 0.3
        truth = [np.zeros(2) for _ in range(1000)]
        est = [np.sqrt(s2 / 2) * (rng.standard_normal(2) + 1j * rng.standard_normal(2)) for _ in range(1000)]
        assert mse(est, truth) == pytest.approx(s2, rel=0.1)

    def test_permutation_of_trials(self, rng):
        est = [rng.random(2) for _ in range(10)]
        truth = [rng.random(2) for _ in range(10)]
        order = rng.permutation(10)
        assert mse(est, truth) == pytest.approx(mse([est[i] for i in order], [truth[i] for i in order]))

    def test_trial_count_mismatch(self):
        with pytest.raises(DimensionError):
            mse([[0.1]], [[0.1], [0.2]])

    def test_path_count_mismatch(self):
        with pytest.raises(DimensionError):
            squared_error([0.1, 0.2], [0.1])

    def test_sine_comparison(self):
        assert squared_error([np.pi - 0.4], [0.4], sine=True) == pytest.approx(0.0, abs=1e-24)
        assert squared_error([np.pi - 0.4], [0.4]) > 1.0

    def test_empty(self):
        assert np.isnan(mse([], []))


class TestSpectralEfficiency:
    def record(self, gain, error=0j, t_h=40, t_c=500):
        return TrialRecord({"theta_mr": 0.0}, gain, error, t_h, t_c)

    def test_perfect_csi(self):
        sigma2 = 1e-3
        assert effective_se([self.record(sigma2)], sigma2, 500, 40) == pytest.approx(0.92)

    def test_half_coherence(self):
        assert se_prefactor(500, 250) == pytest.approx(0.5)

    def test_overhead_exceeds_coherence(self):
        with pytest.raises(ConfigurationError):
            se_prefactor(500, 500)

    @pytest.mark.parametrize("name, t_h", [("setup1", 40), ("setup2", 40), ("setup3", 56), ("setup4", 56)])
    def test_setup_prefactors(self, name, t_h):
        assert name in SETUPS
        assert se_prefactor(500, t_h) == pytest.approx((500 - t_h) / 500)

    def test_monotone_in_gain(self):
        sigma2 = 1e-3
        values = [effective_se([self.record(g)], sigma2, 500, 40) for g in (1e-4, 1e-3, 1e-2)]
        assert np.all(np.diff(values) > 0)

    def test_error_variance_lowers_se(self, rng):
        sigma2 = 1e-3
        clean = [self.record(1e-2) for _ in range(50)]
        noisy = [self.record(1e-2, complex(e)) for e in 0.05 * rng.standard_normal(50)]
        assert effective_se(noisy, sigma2, 500, 40) < effective_se(clean, sigma2, 500, 40)

    def test_negative_error_rejected(self):
        with pytest.raises(ConfigurationError):
            TrialRecord({"theta_mr": -1.0}, 0.0, 0j, 40, 500)
