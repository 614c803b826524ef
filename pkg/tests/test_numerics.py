"""Tests for the structured matrix helpers in numerics.py."""

import numpy as np
import pytest

from helpers import crandn
from hybridris.channel import steering
from hybridris.errors import DimensionError, StructureError
from hybridris.numerics import (
    eig_hermitian,
    khatri_rao,
    kron,
    min_eigenvalue,
    pinv,
    project_psd,
    svd,
    toeplitz_from_generator,
    toeplitz_project,
    unvec,
    vec,
)


class TestToeplitz:
    def test_scaled_identity(self):
        assert np.allclose(toeplitz_from_generator([2.0, 0.0, 0.0]), 2 * np.eye(3))

    def test_hermitian(self, rng):
        gen = crandn(rng, 9)
        gen[0] = 3.0
        T = toeplitz_from_generator(gen)
        assert np.max(np.abs(T - T.conj().T)) <= 1e-12
        assert np.allclose(T[0], gen)

    def test_complex_lead_rejected(self):
        with pytest.raises(StructureError):
            toeplitz_from_generator([1.0 + 0.1j, 0.5])

    def test_empty_rejected(self):
        with pytest.raises(StructureError):
            toeplitz_from_generator([])

    def test_rank_one_outer_product(self):
        a = steering(8, 0.3)
        outer = np.outer(a, a.conj())
        assert np.allclose(toeplitz_from_generator(toeplitz_project(outer)), outer, atol=1e-12)

    def test_project_keeps_toeplitz(self, rng):
        gen = crandn(rng, 6)
        gen[0] = 1.5
        assert np.allclose(toeplitz_project(toeplitz_from_generator(gen)), gen)

    def test_project_is_closest(self, rng):
        A = crandn(rng, 5, 5)
        A = A + A.conj().T
        T = toeplitz_from_generator(toeplitz_project(A))
        gen = toeplitz_project(A)
        for _ in range(10):
            other = gen + 0.01 * crandn(rng, 5)
            other[0] = other[0].real
            assert np.linalg.norm(A - T) <= np.linalg.norm(A - toeplitz_from_generator(other)) + 1e-12


class TestProducts:
    def test_kron_identity(self):
        assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_kron_entries(self, rng):
        a = crandn(rng, 2, 3)
        b = crandn(rng, 4, 2)
        k = kron(a, b)
        assert k.shape == (8, 6)
        for i in range(2):
            for j in range(3):
                for p in range(4):
                    for q in range(2):
                        assert k[i * 4 + p, j * 2 + q] == pytest.approx(a[i, j] * b[p, q])

    def test_khatri_rao_columns(self, rng):
        a = crandn(rng, 3, 4)
        b = crandn(rng, 5, 4)
        kr = khatri_rao(a, b)
        assert kr.shape == (15, 4)
        for k in range(4):
            assert np.allclose(kr[:, k], np.kron(a[:, k], b[:, k]))

    def test_khatri_rao_mismatch(self, rng):
        with pytest.raises(DimensionError):
            khatri_rao(crandn(rng, 3, 4), crandn(rng, 3, 3))

    def test_vec_column_major(self):
        assert np.array_equal(vec(np.eye(2)), np.array([1.0, 0.0, 0.0, 1.0]))
        assert np.array_equal(vec(np.array([[1, 2], [3, 4]])), np.array([1, 3, 2, 4]))

    def test_vec_identity(self, rng):
        A = crandn(rng, 3, 4)
        X = crandn(rng, 4, 5)
        B = crandn(rng, 5, 2)
        assert np.allclose(vec(A @ X @ B), kron(B.T, A) @ vec(X))

    def test_unvec(self, rng):
        X = crandn(rng, 3, 4)
        assert np.array_equal(unvec(vec(X), 3, 4), X)


class TestDecompositions:
    def test_pinv_rank_deficient(self):
        assert np.allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_pinv_penrose(self, rng):
        for _ in range(20):
            A = crandn(rng, 6, 3) @ crandn(rng, 3, 5)
            P = pinv(A)
            assert np.allclose(A @ P @ A, A, atol=1e-9)
            assert np.allclose(P @ A @ P, P, atol=1e-9)
            assert np.allclose((A @ P).conj().T, A @ P, atol=1e-9)
            assert np.allclose((P @ A).conj().T, P @ A, atol=1e-9)

    def test_svd_diagonal(self):
        U, s, V = svd(np.diag([3.0, 1.0]))
        assert np.allclose(s, [3.0, 1.0])
        assert np.allclose(np.abs(U), np.eye(2))

    def test_svd_reconstruction_and_phase(self, rng):
        A = crandn(rng, 6, 4)
        U, s, V = svd(A)
        assert np.allclose((U * s) @ V.conj().T, A)
        assert np.all(np.diff(s) <= 0)
        assert np.allclose(U[0].imag, 0.0, atol=1e-12)
        assert np.all(U[0].real > 0)

    def test_eig_hermitian(self, rng):
        A = crandn(rng, 5, 5)
        A = A + A.conj().T
        w, v = eig_hermitian(A)
        assert np.all(np.diff(w) <= 0)
        assert np.allclose(A @ v, v * w)

    def test_eig_rejects_non_hermitian(self):
        with pytest.raises(StructureError):
            eig_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_eig_rejects_rectangular(self):
        with pytest.raises(StructureError):
            eig_hermitian(np.ones((2, 3)))

    def test_project_psd(self, rng):
        A = crandn(rng, 6, 6)
        A = A + A.conj().T
        P = project_psd(A)
        assert min_eigenvalue(P) >= -1e-12
        assert np.allclose(project_psd(P), P)
