"""
Fisher information and Cramer-Rao bounds for the two estimation stages.

The real parameter vector of a hop with L paths is ordered
(theta_1..theta_L, phi_1..phi_L, Re rho_1..Re rho_L, Im rho_1..Im rho_L). The mean of the
vectorised observations is

    mu = scale * (B^T kron A) * (conj(A(theta)) khatri-rao A(phi)) * rho

with (A, B) = (W_H, X) for stage one and (W_B^H, U) for stage two.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .channel import PathSet, steering_matrix
from .errors import ConfigurationError
from .numerics import khatri_rao, kron

log = logging.getLogger(__name__)

SINGULAR_COND = 1e12
FD_STEP = 1e-6
EDGE_WIDTH = 3.0


@dataclass(frozen=True)
class FimReport:
    """
    Parameters :
        J : np.ndarray
            real symmetric Fisher information, 4L x 4L
        crlb_diag : np.ndarray
            diagonal of the (pseudo) inverse of J
        param_labels : tuple
            parameter names in J order
        singular : bool
            True when J was inverted with the pseudo inverse
    """

    J: np.ndarray
    crlb_diag: np.ndarray
    param_labels: Tuple[str, ...]
    singular: bool = False

    @property
    def L(self) -> int:
        return self.J.shape[0] // 4


def param_labels(L: int) -> Tuple[str, ...]:
    return tuple(f"{name}_{l}" for name in ("theta", "phi", "re_rho", "im_rho") for l in range(1, L + 1))


def pack_params(paths: PathSet) -> np.ndarray:
    return np.concatenate([paths.aod, paths.aoa, paths.gains.real, paths.gains.imag])


def unpack_params(params: np.ndarray) -> PathSet:
    L = params.size // 4
    return PathSet(params[:L], params[L : 2 * L], params[2 * L : 3 * L] + 1j * params[3 * L :])


def _mean(paths: PathSet, left: np.ndarray, right: np.ndarray, scale: float) -> np.ndarray:
    sensing = kron(right.T, left)
    atoms = khatri_rao(steering_matrix(right.shape[0], paths.f).conj(), steering_matrix(left.shape[1], paths.g))
    return scale * sensing @ atoms @ paths.gains


def _jacobian(paths: PathSet, left: np.ndarray, right: np.ndarray, scale: float) -> np.ndarray:
    n_col = right.shape[0]
    n_row = left.shape[1]
    sensing = scale * kron(right.T, left)
    a_theta = steering_matrix(n_col, paths.f)
    a_phi = steering_matrix(n_row, paths.g)
    d_theta = np.arange(n_col)[:, None] * a_theta
    d_phi = np.arange(n_row)[:, None] * a_phi
    rho = paths.gains
    # d conj(alpha(sin theta)) / d theta = -j pi cos(theta) conj(alpha_tilde)
    col_theta = khatri_rao(d_theta.conj(), a_phi) * (rho * -1j * np.pi * np.cos(paths.aod))
    col_phi = khatri_rao(a_theta.conj(), d_phi) * (rho * 1j * np.pi * np.cos(paths.aoa))
    col_re = khatri_rao(a_theta.conj(), a_phi)
    return sensing @ np.hstack([col_theta, col_phi, col_re, 1j * col_re])


def _fim(jac: np.ndarray, sigma2: float) -> FimReport:
    if sigma2 <= 0:
        raise ConfigurationError(f"Fisher information needs positive noise power, got {sigma2}")
    J = (2.0 / sigma2) * np.real(jac.conj().T @ jac)
    J = 0.5 * (J + J.T)
    singular = not np.isfinite(np.linalg.cond(J)) or np.linalg.cond(J) > SINGULAR_COND
    if singular:
        log.warning("singular Fisher information, using the pseudo inverse")
        inverse = np.linalg.pinv(J)
    else:
        inverse = np.linalg.inv(J)
    return FimReport(J, np.diag(inverse).copy(), param_labels(J.shape[0] // 4), singular)


def mu1(zeta: PathSet, X: np.ndarray, W_H: np.ndarray, scale: float) -> np.ndarray:
    """Mean of vec(Y_H)."""
    return _mean(zeta, W_H, X, scale)


def jacobian_mu1(zeta: PathSet, X: np.ndarray, W_H: np.ndarray, scale: float) -> np.ndarray:
    """Columns d mu1 / d param in the (theta, phi, Re rho, Im rho) order."""
    return _jacobian(zeta, W_H, X, scale)


def fim_stage1(zeta: PathSet, X: np.ndarray, W_H: np.ndarray, scale: float, sigma2: float) -> FimReport:
    """J = (2 / sigma2) Re(Jmu^H Jmu) for the MS-RIS parameters."""
    return _fim(jacobian_mu1(zeta, X, W_H, scale), sigma2)


def mu2(eta: PathSet, U_tilde: np.ndarray, W_B: np.ndarray, scale: float) -> np.ndarray:
    """Mean of vec(Y), U_tilde built from the true MS-RIS channel."""
    return _mean(eta, W_B.conj().T, U_tilde, scale)


def jacobian_mu2(eta: PathSet, U_tilde: np.ndarray, W_B: np.ndarray, scale: float) -> np.ndarray:
    return _jacobian(eta, W_B.conj().T, U_tilde, scale)


def fim_stage2(eta: PathSet, U_tilde: np.ndarray, W_B: np.ndarray, scale: float, sigma2: float) -> FimReport:
    return _fim(jacobian_mu2(eta, U_tilde, W_B, scale), sigma2)


def crlb_angle(report: FimReport, which: str) -> np.ndarray:
    """
    Per path angle bounds.

    Parameters :
        which : str
            "theta" or "phi"
    """
    L = report.L
    slots = {"theta": slice(0, L), "phi": slice(L, 2 * L)}
    if which not in slots:
        raise ConfigurationError(f"unknown angle class {which!r}")
    return report.crlb_diag[slots[which]]


def crlb_gain(report: FimReport) -> np.ndarray:
    """Complex gain bound per path, the Re and Im slot bounds summed."""
    L = report.L
    return report.crlb_diag[2 * L : 3 * L] + report.crlb_diag[3 * L :]


def numerical_jacobian(fn: Callable[[np.ndarray], np.ndarray], params: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of a complex valued function of real parameters."""
    params = np.asarray(params, dtype=float)
    columns = []
    for k in range(params.size):
        offset = np.zeros_like(params)
        offset[k] = step
        columns.append((fn(params + offset) - fn(params - offset)) / (2 * step))
    return np.column_stack(columns)


def verify_jacobian(
    paths: PathSet,
    left: np.ndarray,
    right: np.ndarray,
    scale: float,
    step: float = FD_STEP,
) -> float:
    """
    Relative Frobenius gap between the analytic and the finite difference Jacobian.

    Parameters :
        left : np.ndarray
            sensing applied on the left of the channel (W_H or W_B^H)
        right : np.ndarray
            sensing applied on the right (X or U)
    """
    analytic = _jacobian(paths, left, right, scale)
    numeric = numerical_jacobian(lambda p: _mean(unpack_params(p), left, right, scale), pack_params(paths), step)
    norm = np.linalg.norm(numeric)
    gap = float(np.linalg.norm(analytic - numeric))
    return gap / norm if norm > 0 else gap


def stage_bounds(report: Optional[FimReport]) -> Tuple[float, float, float]:
    """Path averaged (theta, phi, rho) bounds, comparable with the per trial MSEs."""
    if report is None:
        return float("nan"), float("nan"), float("nan")
    return (
        float(np.mean(crlb_angle(report, "theta"))),
        float(np.mean(crlb_angle(report, "phi"))),
        float(np.mean(crlb_gain(report))),
    )


def near_range_edge(report: Optional[FimReport], paths: PathSet, width: float = EDGE_WIDTH) -> bool:
    """
    True when a true angle sits within width bound standard deviations of the edge of the
    estimated sine range [0, 1].

    The bound on theta maps to sin(theta) through |cos(theta)|, near the edges the clipped
    estimator is biased and its MSE is not bounded below by the CRLB. A non finite or negative
    bound counts as near the edge.
    """
    if report is None:
        return False
    for which, angles in (("theta", paths.aod), ("phi", paths.aoa)):
        bound = crlb_angle(report, which)
        if not np.all(np.isfinite(bound)) or np.any(bound < 0):
            return True
        spread = width * np.abs(np.cos(angles)) * np.sqrt(bound)
        sines = np.sin(angles)
        if np.any(spread > np.minimum(sines, 1.0 - sines)):
            return True
    return False
