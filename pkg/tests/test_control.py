"""Tests for control.py: RIS phase design and beamformers."""

import numpy as np
import pytest

from helpers import crandn
from hybridris.channel import steering
from hybridris.control import (
    build_C,
    design_beamformers,
    design_phases,
    phase_objective,
    random_phase_objectives,
)
from hybridris.errors import DegenerateError, DimensionError
from hybridris.estimation import angle_differences, gain_products


class TestBuildC:
    def test_aligned_pair(self):
        assert np.allclose(build_C([0.0], [1.0], 8), np.ones((8, 1)))

    def test_zero_gain(self):
        assert not np.any(build_C([0.3], [0.0], 8))

    def test_columns(self, rng):
        delta = rng.uniform(-1, 1, 4)
        rho = crandn(rng, 4)
        C = build_C(delta, rho, 16)
        for i in range(4):
            assert np.allclose(C[:, i], rho[i] * steering(16, np.sin(delta[i])))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            build_C([0.1, 0.2], [1.0], 8)


class TestDesignPhases:
    def test_single_pair_reaches_bound(self):
        design = design_phases([0.4], [0.5 - 0.2j], 32)
        assert design.objective == pytest.approx(32**2 * abs(0.5 - 0.2j) ** 2, rel=1e-9)
        assert np.allclose(np.abs(design.omega_star), 1.0)
        assert design.omega_star[0] == pytest.approx(1.0)

    def test_gain_scale_invariance(self, rng):
        delta = rng.uniform(-1, 1, 4)
        rho = crandn(rng, 4)
        a = design_phases(delta, rho, 32)
        b = design_phases(delta, 3.7 * rho, 32)
        assert np.allclose(a.omega_star, b.omega_star)
        assert b.objective == pytest.approx(3.7**2 * a.objective)

    def test_zero_gains(self):
        with pytest.raises(DegenerateError):
            design_phases([0.1, 0.2], [0.0, 0.0], 16)

    def test_beats_random_phases(self, rng):
        for _ in range(20):
            phi = rng.uniform(0, np.pi, 2)
            theta = rng.uniform(0, np.pi, 2)
            delta = angle_differences(phi, theta).ravel()
            rho = gain_products(crandn(rng, 2), crandn(rng, 2))
            design = design_phases(delta, rho, 32)
            assert design.objective >= np.mean(random_phase_objectives(delta, rho, 32, rng))

    def test_objective_matches_design(self, rng):
        delta = rng.uniform(-1, 1, 3)
        rho = crandn(rng, 3)
        design = design_phases(delta, rho, 16)
        assert design.objective == pytest.approx(phase_objective(design.omega_star, delta, rho))

    def test_weak_second_pair(self):
        single = design_phases([0.3], [1.0], 32).omega_star
        perturbed = design_phases([0.3, -0.5], [1.0, 1e-4], 32).omega_star
        assert np.max(np.abs(np.angle(perturbed * single.conj()))) < 1e-3


class TestBeamformers:
    def test_rank_one(self, rng):
        u = crandn(rng, 6)
        v = crandn(rng, 4)
        w, f = design_beamformers(np.outer(u, v.conj()))
        assert abs(np.vdot(w, u)) == pytest.approx(np.linalg.norm(u))
        assert abs(np.vdot(f, v)) == pytest.approx(np.linalg.norm(v))

    def test_diagonal(self):
        w, f = design_beamformers(np.diag([3.0, 1.0, 0.5]))
        assert np.allclose(w, [1, 0, 0])
        assert np.allclose(f, [1, 0, 0])

    def test_maximises_gain(self, rng):
        H = crandn(rng, 8, 5)
        w, f = design_beamformers(H)
        assert np.linalg.norm(w) == pytest.approx(1.0)
        assert np.linalg.norm(f) == pytest.approx(1.0)
        assert abs(w.conj() @ H @ f) == pytest.approx(np.sqrt(np.max(np.linalg.eigvalsh(H.conj().T @ H))), rel=1e-9)

    def test_zero_channel(self):
        with pytest.raises(DegenerateError):
            design_beamformers(np.zeros((4, 4)))
