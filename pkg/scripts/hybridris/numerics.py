"""
Dense complex linear algebra helpers and the structured matrix constructors used by
the channel, estimation, control and bound modules.

All functions are pure and work on numpy arrays. Vectorisation is column major so that
vec(A X B) = (B^T kron A) vec(X).
"""

from typing import Tuple

import numpy as np
import scipy.linalg as la

from .errors import DimensionError, StructureError

DECOMP_TOL = 1e-9
REAL_LEAD_TOL = 1e-12


def toeplitz_from_generator(gen: np.ndarray) -> np.ndarray:
    """
    Build the Hermitian Toeplitz matrix whose first row is gen.

    Parameters :
        gen : np.ndarray
            complex generator of length N, gen[0] must be real
    Returns :
        N x N Hermitian Toeplitz matrix
    """
    gen = np.asarray(gen, dtype=complex).ravel()
    if gen.size == 0:
        raise StructureError("Toeplitz generator is empty")
    if abs(gen[0].imag) >= REAL_LEAD_TOL:
        raise StructureError(f"Toeplitz generator leading element {gen[0]} is not real")
    gen = gen.copy()
    gen[0] = gen[0].real
    # first column conj(gen), first row gen
    return la.toeplitz(np.conj(gen), gen)


def toeplitz_project(matrix: np.ndarray) -> np.ndarray:
    """
    Generator of the Hermitian Toeplitz matrix closest (Frobenius) to matrix.

    Averages each superdiagonal together with the conjugate of its mirrored subdiagonal.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    gen = np.empty(n, dtype=complex)
    gen[0] = np.real(np.trace(matrix)) / n
    for k in range(1, n):
        upper = np.diagonal(matrix, offset=k)
        lower = np.diagonal(matrix, offset=-k)
        gen[k] = (upper.sum() + np.conj(lower).sum()) / (2 * (n - k))
    return gen


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, shape (ra*rb, ca*cb)."""
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Column wise Kronecker product.

    Parameters :
        a : np.ndarray
            matrix with K columns
        b : np.ndarray
            matrix with K columns
    Returns :
        matrix whose column k is kron(a[:, k], b[:, k])
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"Khatri-Rao needs equal column counts, got {a.shape[1]} and {b.shape[1]}")
    return la.khatri_rao(a, b)


def vec(a: np.ndarray) -> np.ndarray:
    """Column major vectorisation."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of vec."""
    return np.asarray(v).reshape((rows, cols), order="F")


def pinv(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose inverse, rank deficient input allowed."""
    return np.linalg.pinv(np.atleast_2d(a), rcond=DECOMP_TOL)


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Per column unit phase making the first non negligible entry real positive."""
    phases = np.ones(vectors.shape[1], dtype=complex)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        scale = np.linalg.norm(col)
        if scale == 0:
            continue
        idx = np.flatnonzero(np.abs(col) > DECOMP_TOL * scale)
        if idx.size:
            lead = col[idx[0]]
            phases[k] = np.conj(lead) / abs(lead)
    return phases


def svd(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Thin SVD with descending singular values and a deterministic phase convention.

    The first non negligible entry of every left singular vector is real positive; the
    matching right singular vector gets the same phase so that a = U diag(s) V^H.

    Returns :
        (U, s, V) with V holding right singular vectors as columns
    """
    u, s, vh = np.linalg.svd(np.atleast_2d(a), full_matrices=False)
    v = vh.conj().T
    phases = _fix_phase(u)
    return u * phases, s, v * phases


def check_hermitian(a: np.ndarray, tol: float = DECOMP_TOL) -> None:
    """Raise StructureError unless a is square and Hermitian to tol relative to its norm."""
    a = np.atleast_2d(a)
    if a.shape[0] != a.shape[1]:
        raise StructureError(f"expected a square matrix, got {a.shape}")
    scale = max(np.linalg.norm(a), 1.0)
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol * scale:
        raise StructureError("matrix is not Hermitian")


def eig_hermitian(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen decomposition of a Hermitian matrix.

    Parameters :
        a : np.ndarray
            Hermitian matrix, checked to 1e-9
    Returns :
        (eigenvalues descending, eigenvectors as columns, phase fixed)
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    check_hermitian(a)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = w[::-1]
    v = v[:, ::-1]
    return w, v * _fix_phase(v)


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of a."""
    a = np.atleast_2d(a)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])


def project_psd(a: np.ndarray) -> np.ndarray:
    """Frobenius projection of a Hermitian matrix onto the PSD cone."""
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T
