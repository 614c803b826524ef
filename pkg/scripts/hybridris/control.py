"""
Data transmission design from the channel estimates: the RIS reflection vector that
maximises the effective channel power, and the BS / MS beamformers of the cascade.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .channel import steering_matrix
from .errors import DegenerateError, DimensionError
from .numerics import eig_hermitian, svd

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhaseDesign:
    omega_star: np.ndarray
    objective: float


def build_C(delta_vec: np.ndarray, rho_prod: np.ndarray, n_r: int) -> np.ndarray:
    """
    Columns alpha(sin(delta_i)) * rho_i.

    Parameters :
        delta_vec : np.ndarray
            flattened L_RB x L_MR angle differences (row major)
        rho_prod : np.ndarray
            gain products kron(rho_RB, rho_MR), same ordering
        n_r : int
            RIS elements
    Returns :
        N_R x (L_RB L_MR) matrix
    """
    delta_vec = np.atleast_1d(np.asarray(delta_vec, dtype=float)).ravel()
    rho_prod = np.atleast_1d(np.asarray(rho_prod, dtype=complex)).ravel()
    if delta_vec.size != rho_prod.size:
        raise DimensionError(f"{delta_vec.size} angle differences for {rho_prod.size} gain products")
    return steering_matrix(n_r, np.sin(delta_vec)) * rho_prod[None, :]


def phase_objective(omega: np.ndarray, delta_vec: np.ndarray, rho_prod: np.ndarray) -> float:
    """||G(omega)||_F^2 = sum_i |rho_i omega^T alpha(sin delta_i)|^2"""
    omega = np.asarray(omega, dtype=complex).ravel()
    C = build_C(delta_vec, rho_prod, omega.size)
    return float(np.sum(np.abs(omega @ C) ** 2))


def design_phases(delta_vec: np.ndarray, rho_prod: np.ndarray, n_r: int) -> PhaseDesign:
    """
    Unit modulus projection of the dominant eigenvector of C C^H.

    omega* = exp(-j angle(e_1)), rotated so its first entry has phase zero.
    """
    C = build_C(delta_vec, rho_prod, n_r)
    if not np.any(C):
        raise DegenerateError("all gain products are zero, no phase design possible")
    _, vecs = eig_hermitian(C @ C.conj().T)
    omega = np.exp(-1j * np.angle(vecs[:, 0]))
    omega = omega * np.exp(-1j * np.angle(omega[0]))
    objective = phase_objective(omega, delta_vec, rho_prod)
    log.debug(f"phase design objective {objective:.6e} over {C.shape[1]} path pairs")
    return PhaseDesign(omega, objective)


def random_phase_objectives(
    delta_vec: np.ndarray,
    rho_prod: np.ndarray,
    n_r: int,
    rng: np.random.Generator,
    draws: int = 100,
) -> np.ndarray:
    """Objectives of random unit modulus reflection vectors, the design baseline."""
    omegas = np.exp(2j * np.pi * rng.random((draws, n_r)))
    C = build_C(delta_vec, rho_prod, n_r)
    return np.sum(np.abs(omegas @ C) ** 2, axis=1)


def design_beamformers(H_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Leading singular pair of the reconstructed cascade.

    Returns :
        (w, f), the N_B combiner and the N_M precoder, both unit norm
    """
    H_hat = np.atleast_2d(H_hat)
    if not np.any(H_hat):
        raise DegenerateError("cannot design beamformers for a zero channel")
    U, _, V = svd(H_hat)
    return U[:, 0], V[:, 0]
