"""Tests for the ANM solver in anm.py."""

import math

import numpy as np
import pytest

from helpers import crandn, unitary
from hybridris.anm import (
    AnmProblem,
    AnmSolution,
    SolverOptions,
    SolverTrace,
    assemble_certificate,
    regularization_weight,
    solve,
    write_trace,
)
from hybridris.channel import steering_matrix
from hybridris.errors import CertificateError, ConvergenceError, DimensionError
from hybridris.estimation import freqs_from_toeplitz
from hybridris.numerics import min_eigenvalue

TIGHT = SolverOptions(tol_abs=1e-10, tol_rel=1e-8, max_iter=50_000)


def channel(g, f, gains, n1=16, n2=8):
    return (steering_matrix(n1, g) * np.asarray(gains)) @ steering_matrix(n2, f).conj().T


def full_problem(H, scale=1.0, reg=0.0, noise=None):
    """Identity on the left and a unitary on the right, every entry observed."""
    n1, n2 = H.shape
    B = unitary(n2)
    Y = scale * H @ B
    if noise is not None:
        Y = Y + noise
    return AnmProblem(np.eye(n1), B, Y, scale, reg)


class TestRegularization:
    def test_zero_noise(self):
        assert regularization_weight(0.0, 16, 32) == 0.0

    def test_unit_log(self):
        n = math.exp(0.5)
        assert regularization_weight(1.0, n, n) == pytest.approx(math.sqrt(math.e))

    def test_reference_value(self):
        sigma = math.sqrt(5.0119e-13)
        assert regularization_weight(sigma, 32, 16) == pytest.approx(4.001004e-5, rel=1e-4)

    def test_scaling_constant(self):
        assert regularization_weight(0.5, 8, 8, c=3.0) == pytest.approx(3 * regularization_weight(0.5, 8, 8))

    def test_negative_sigma(self):
        with pytest.raises(DimensionError):
            regularization_weight(-1.0, 8, 8)


class TestProblem:
    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionError):
            AnmProblem(np.eye(4), crandn(rng, 3, 5), crandn(rng, 4, 4), 1.0, 0.0)

    def test_dims(self, rng):
        problem = AnmProblem(crandn(rng, 6, 4), crandn(rng, 3, 5), crandn(rng, 6, 5), 1.0, 0.0)
        assert problem.dims == (4, 3)


class TestSolve:
    def test_zero_observations(self):
        problem = AnmProblem(np.eye(16), unitary(8), np.zeros((16, 8)), 1.0, 0.1)
        sol = solve(problem)
        assert not np.any(sol.H_hat)
        assert not np.any(sol.toeplitz_left)
        assert not np.any(sol.toeplitz_right)
        assert sol.residuals.converged

    def test_zero_scale(self, rng):
        problem = AnmProblem(np.eye(4), unitary(4), crandn(rng, 4, 4), 0.0, 0.1)
        assert not np.any(solve(problem).H_hat)

    def test_noiseless_recovery(self):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0 + 0.5j, -0.7 + 0.2j])
        sol = solve(full_problem(H), SolverOptions(reg_floor=1e-6))
        assert sol.residuals.converged
        assert np.linalg.norm(sol.H_hat - H) <= 1e-4 * np.linalg.norm(H)

    def test_large_reg_gives_zero(self):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H)
        strength = np.linalg.norm(problem.sensing_left.conj().T @ problem.observations @ problem.sensing_right.conj().T, 2)
        sol = solve(full_problem(H, reg=1e3 * strength))
        assert np.linalg.norm(sol.H_hat) <= 1e-4 * np.linalg.norm(H)

    def test_certificate_is_psd(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        sol = solve(full_problem(H, reg=0.05, noise=0.01 * crandn(rng, 16, 8)))
        block = sol.block_matrix()
        assert min_eigenvalue(block) >= -1e-8 * np.real(np.trace(block))
        t_left, t_right = assemble_certificate(sol)
        assert t_left.shape == (16, 16)
        assert t_right.shape == (8, 8)

    def test_single_atom_certificates(self):
        H = channel([0.35], [0.6], [0.8 - 0.3j])
        sol = solve(full_problem(H), TIGHT)
        t_left, t_right = assemble_certificate(sol)
        w = np.linalg.eigvalsh(t_right)[::-1]
        assert w[1] / w[0] < 1e-3
        assert freqs_from_toeplitz(t_left, 1).freqs[0] == pytest.approx(0.35, abs=1e-4)
        assert freqs_from_toeplitz(t_right, 1).freqs[0] == pytest.approx(0.6, abs=1e-4)

    def test_two_atom_certificates_have_rank_two(self):
        H = channel([0.2, 0.8], [0.1, 0.9], [1.0 + 0.2j, -0.6 + 0.4j])
        sol = solve(full_problem(H), TIGHT)
        for cert in assemble_certificate(sol):
            w = np.linalg.eigvalsh(cert)[::-1]
            assert w[1] / w[0] > 1e-2
            assert w[2] / w[0] < 1e-3
        assert sorted(freqs_from_toeplitz(assemble_certificate(sol)[0], 2).freqs) == pytest.approx([0.2, 0.8], abs=1e-3)

    def test_rank_deficient_right_sensing_reaches_optimum(self, rng):
        # stage two shape: fewer sounding columns than channel columns
        H = channel([0.25, 0.7], [0.1, 0.55], [1.0 - 0.4j, 0.5 + 0.6j], n1=16, n2=8)
        scale = 1e-4
        gains = np.array([1.0 - 0.4j, 0.5 + 0.6j])
        B = crandn(rng, 8, 4)
        problem = AnmProblem(np.eye(16), B, scale * H @ B, scale, 0.0)
        sol = solve(problem)
        assert sol.residuals.converged
        # the true channel is feasible with zero residual
        assert sol.objective <= sol.reg * scale * np.sum(np.abs(gains)) * (1 + 1e-3)
        assert np.linalg.norm((sol.H_hat - H) @ B) <= 1e-2 * np.linalg.norm(H @ B)

    def test_zero_solution_level_is_exact(self):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H)
        strength = np.linalg.norm(problem.observations @ problem.sensing_right.conj().T, 2)
        above = solve(full_problem(H, reg=1.01 * math.sqrt(16 * 8) * strength))
        assert not np.any(above.H_hat)
        assert above.residuals.iterations == 0
        below = solve(full_problem(H, reg=0.5 * strength))
        assert below.residuals.iterations > 0
        assert np.linalg.norm(below.H_hat) > 0

    def test_continuation_levels(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H, reg=1e-3, noise=1e-4 * crandn(rng, 16, 8))
        sol = solve(problem)
        assert sol.residuals.levels > 1
        again = solve(problem, restart=sol)
        assert again.residuals.levels == 1

    def test_plain_admm_agrees(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H, reg=0.05, noise=0.01 * crandn(rng, 16, 8))
        fast = solve(problem, TIGHT)
        plain = solve(problem, SolverOptions(tol_abs=1e-10, tol_rel=1e-8, max_iter=200_000, relaxation=1.0, continuation=1.0))
        assert plain.residuals.levels == 1
        assert fast.objective == pytest.approx(plain.objective, rel=1e-5)
        assert np.linalg.norm(fast.H_hat - plain.H_hat) <= 1e-3 * np.linalg.norm(plain.H_hat)

    def test_scaling_consistency(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        noise = 0.01 * crandn(rng, 16, 8)
        base = solve(full_problem(H, scale=0.5, reg=0.02, noise=noise))
        scaled = solve(full_problem(H, scale=2.0, reg=0.08, noise=4 * noise))
        assert np.linalg.norm(scaled.H_hat - base.H_hat) <= 1e-8 * np.linalg.norm(base.H_hat)

    def test_restart_from_fixed_point(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H, reg=0.05, noise=0.01 * crandn(rng, 16, 8))
        first = solve(problem)
        again = solve(problem, restart=first)
        assert again.residuals.iterations <= first.residuals.iterations
        assert again.objective == pytest.approx(first.objective, rel=1e-4)

    def test_warm_start(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H, reg=0.05, noise=0.01 * crandn(rng, 16, 8))
        cold = solve(problem)
        warm = solve(problem, warm_start=H)
        assert warm.residuals.converged
        assert np.linalg.norm(warm.H_hat - cold.H_hat) <= 1e-3 * np.linalg.norm(cold.H_hat)

    def test_warm_start_shape(self, rng):
        H = channel([0.2], [0.1], [1.0])
        with pytest.raises(DimensionError):
            solve(full_problem(H), warm_start=np.zeros((8, 16)))

    def test_iteration_cap(self, rng):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        problem = full_problem(H, reg=0.05, noise=0.01 * crandn(rng, 16, 8))
        with pytest.raises(ConvergenceError) as info:
            solve(problem, SolverOptions(max_iter=2))
        assert info.value.iterations == 2
        assert info.value.primal_res > 0

    def test_trace_recorded(self, rng, tmp_path):
        H = channel([0.2, 0.6], [0.1, 0.7], [1.0, 0.5j])
        sol = solve(full_problem(H, reg=0.05, noise=0.01 * crandn(rng, 16, 8)))
        rec = sol.residuals
        assert len(rec.objective) == len(rec.primal_res) == len(rec.dual_res) == rec.iterations
        path = tmp_path / "trace.csv"
        write_trace(sol, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iter,objective,primal_res,dual_res"
        assert len(lines) == rec.iterations + 1


def test_non_psd_certificate_rejected():
    sol = AnmSolution(
        H_hat=np.ones((3, 2), dtype=complex),
        toeplitz_left=np.zeros(3, dtype=complex),
        toeplitz_right=np.zeros(2, dtype=complex),
        objective=0.0,
        scale=1.0,
        reg=0.0,
        residuals=SolverTrace(),
    )
    with pytest.raises(CertificateError):
        assemble_certificate(sol)
