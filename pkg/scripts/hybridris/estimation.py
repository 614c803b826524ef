"""
The two stage channel estimator. Stage one recovers the MS-RIS channel from the active
RIS elements, stage two the RIS-BS channel from the BS observations given the stage one
estimate. Each stage is an ANM solve followed by ROOTMUSIC on the Toeplitz certificates
and a least squares fit of the path gains.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import anm
from .channel import PathSet, synth_channel
from .errors import DimensionError, EstimationError, IllConditionedError, OrderError
from .numerics import eig_hermitian, kron, khatri_rao, pinv, vec
from .sounding import PhaseSchedule, SoundingConfig, SoundingRecord

log = logging.getLogger(__name__)

COND_LIMIT = 1e10
ASIN_SLACK = 1e-12
EIG_GAP_RATIO = 0.5
ROOT_DISTANCE_LIMIT = 0.1
POLISH_STEPS = 5


@dataclass(frozen=True)
class FrequencyEstimate:
    """ROOTMUSIC output, spatial frequencies ascending plus the health of the certificate."""

    freqs: np.ndarray
    degenerate: bool = False
    eig_ratio: float = 0.0
    root_distance: float = 0.0


@dataclass(frozen=True)
class EstimatorOptions:
    c_tau: float = 1.0
    c_nu: float = 1.0
    solver: anm.SolverOptions = field(default_factory=anm.SolverOptions)


@dataclass
class EstimationResult:
    """
    Everything the two stage estimator produces.

    delta_hat is L_RB x L_MR and rho_prod = kron(rho_RB, rho_MR), so that
    rho_prod[l * L_MR + p] pairs with delta_hat[l, p].
    """

    H_MR_hat: np.ndarray
    H_RB_hat: np.ndarray
    theta_MR: np.ndarray
    phi_MR: np.ndarray
    rho_MR: np.ndarray
    theta_RB: np.ndarray
    phi_RB: np.ndarray
    rho_RB: np.ndarray
    delta_hat: np.ndarray
    rho_prod: np.ndarray
    U_hat: Optional[np.ndarray] = None
    stage1: Optional[anm.AnmSolution] = None
    stage2: Optional[anm.AnmSolution] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def delta_vec(self) -> np.ndarray:
        return self.delta_hat.ravel()

    @property
    def degenerate(self) -> bool:
        return bool(self.warnings)


def _fold(freqs: np.ndarray) -> np.ndarray:
    # root phase pi f is periodic in f with period 2; map to [-0.5, 1.5) then clip
    folded = np.mod(freqs + 0.5, 2.0) - 0.5
    return np.clip(folded, 0.0, 1.0)


def _polish(freq: float, noise_proj: np.ndarray) -> float:
    """Newton steps on the derivative of the null spectrum a(f)^H C a(f)."""
    n = noise_proj.shape[0]
    idx = np.arange(n)
    for _ in range(POLISH_STEPS):
        a = np.exp(1j * np.pi * idx * freq)
        da = 1j * np.pi * idx * a
        d2a = -((np.pi * idx) ** 2) * a
        grad = 2 * np.real(da.conj() @ noise_proj @ a)
        curv = 2 * np.real(d2a.conj() @ noise_proj @ a + da.conj() @ noise_proj @ da)
        if curv <= 0:
            break
        step = grad / curv
        if abs(step) > 0.5 / n:
            break
        freq -= step
        if abs(step) < 1e-15:
            break
    return float(freq)


def freqs_from_toeplitz(T: np.ndarray, L: int) -> FrequencyEstimate:
    """
    ROOTMUSIC on a Hermitian Toeplitz certificate.

    Parameters :
        T : np.ndarray
            N x N PSD Toeplitz matrix
        L : int
            model order, 1 <= L < N
    Returns :
        FrequencyEstimate with L frequencies in [0, 1], ascending
    """
    T = np.atleast_2d(T)
    n = T.shape[0]
    if L < 1 or L >= n:
        raise OrderError(f"model order {L} needs a certificate larger than {n} x {n}")
    if float(np.real(np.trace(T))) <= 0.0:
        log.warning("certificate has zero trace, returning zero frequencies")
        return FrequencyEstimate(np.zeros(L), degenerate=True, eig_ratio=1.0, root_distance=math.inf)

    w, vecs = eig_hermitian(T)
    noise = vecs[:, L:]
    C = noise @ noise.conj().T
    coeffs = np.array([np.trace(C, offset=k) for k in range(n - 1, -n, -1)])
    roots = np.roots(coeffs)
    inside = roots[np.abs(roots) < 1.0]
    if inside.size < L:
        inside = roots
    distance = np.abs(1.0 - np.abs(inside))
    picked = inside[np.argsort(distance)[:L]]
    freqs = np.angle(picked) / np.pi
    freqs = np.array([_polish(f, C) for f in freqs])
    freqs = np.sort(_fold(freqs))

    ratio = float(w[L] / w[L - 1]) if w[L - 1] > 0 else 1.0
    root_distance = float(np.sort(distance)[L - 1])
    degenerate = ratio > EIG_GAP_RATIO or root_distance > ROOT_DISTANCE_LIMIT
    if degenerate:
        log.warning(f"degenerate certificate: eigen gap ratio {ratio:.3g}, root distance {root_distance:.3g}")
    return FrequencyEstimate(freqs, degenerate=degenerate, eig_ratio=ratio, root_distance=root_distance)


def _align(est_freqs: np.ndarray, true_angles: np.ndarray) -> np.ndarray:
    """Angles of the permutation closest to the truth, mirrored to the true half plane."""
    true_freqs = np.sin(true_angles)
    best = min(
        itertools.permutations(range(est_freqs.size)),
        key=lambda perm: float(np.sum(np.abs(est_freqs[list(perm)] - true_freqs))),
    )
    angles = np.arcsin(np.clip(est_freqs[list(best)], 0.0, 1.0))
    mirror = true_angles > np.pi / 2
    angles[mirror] = np.pi - angles[mirror]
    return angles


def pair_and_order(
    est_f: Sequence[float],
    est_g: Sequence[float],
    truth: Optional[PathSet] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Turn estimated spatial frequencies into (theta_hat, phi_hat) angle lists.

    With truth each side is permuted to the minimum total absolute frequency error and
    mirrored into (pi/2, pi) where the matched true angle lies there. Without truth both
    sides are returned in ascending order as asin(f) in [0, pi/2].
    """
    est_f = np.asarray(est_f, dtype=float).ravel()
    est_g = np.asarray(est_g, dtype=float).ravel()
    if est_f.size != est_g.size:
        raise DimensionError(f"frequency lists differ in length: {est_f.size} and {est_g.size}")
    if truth is None:
        return np.arcsin(np.clip(np.sort(est_f), 0.0, 1.0)), np.arcsin(np.clip(np.sort(est_g), 0.0, 1.0))
    if truth.L != est_f.size:
        raise DimensionError(f"{est_f.size} estimates for {truth.L} true paths")
    return _align(est_f, truth.aod), _align(est_g, truth.aoa)


def _regressor(left: np.ndarray, right: np.ndarray, theta: np.ndarray, phi: np.ndarray, scale: float) -> np.ndarray:
    n_row = left.shape[1]
    n_col = right.shape[0]
    a_theta = np.exp(1j * np.pi * np.outer(np.arange(n_col), np.sin(theta)))
    a_phi = np.exp(1j * np.pi * np.outer(np.arange(n_row), np.sin(phi)))
    return scale * kron(right.T, left) @ khatri_rao(a_theta.conj(), a_phi)


def _ls(y: np.ndarray, regressor: np.ndarray) -> np.ndarray:
    if not np.any(y):
        return np.zeros(regressor.shape[1], dtype=complex)
    cond = np.linalg.cond(regressor)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(f"gain regressor condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return pinv(regressor) @ y


def ls_gains_stage1(
    y_H: np.ndarray,
    X: np.ndarray,
    W_H: np.ndarray,
    theta_hat: np.ndarray,
    phi_hat: np.ndarray,
    scale: float,
) -> np.ndarray:
    """rho = pinv(scale (X^T kron W_H) (conj(A(theta)) khatri-rao A(phi))) y_H"""
    return _ls(np.asarray(y_H).ravel(), _regressor(W_H, X, np.atleast_1d(theta_hat), np.atleast_1d(phi_hat), scale))


def ls_gains_stage2(
    y: np.ndarray,
    U_hat: np.ndarray,
    W_B: np.ndarray,
    theta_hat_RB: np.ndarray,
    phi_hat_RB: np.ndarray,
    scale: float,
) -> np.ndarray:
    """Stage two gains with regressor scale (U^T kron W_B^H) (conj(A(theta)) khatri-rao A(phi))."""
    return _ls(
        np.asarray(y).ravel(),
        _regressor(W_B.conj().T, U_hat, np.atleast_1d(theta_hat_RB), np.atleast_1d(phi_hat_RB), scale),
    )


def build_U_hat(schedule: PhaseSchedule, H_MR_hat: np.ndarray, X: np.ndarray) -> np.ndarray:
    """[Omega_1 H X, ..., Omega_K H X]"""
    if H_MR_hat.shape[0] != schedule.N_R or H_MR_hat.shape[1] != X.shape[0]:
        raise DimensionError(f"cannot build U from {H_MR_hat.shape} and pilots {X.shape}")
    hx = H_MR_hat @ X
    return np.hstack([schedule.omegas[k][:, None] * hx for k in range(schedule.K)])


def angle_differences(phi_MR_hat: np.ndarray, theta_RB_hat: np.ndarray) -> np.ndarray:
    """
    delta[l, p] = asin(sin(phi_MR[p]) - sin(theta_RB[l])), L_RB x L_MR radians.

    Arguments drifting outside [-1, 1] by more than 1e-12 are clamped with a warning.
    """
    diff = np.sin(np.atleast_1d(phi_MR_hat))[None, :] - np.sin(np.atleast_1d(theta_RB_hat))[:, None]
    if np.any(np.abs(diff) > 1.0 + ASIN_SLACK):
        log.warning(f"angle difference argument {np.max(np.abs(diff)):.6f} outside [-1, 1], clamping")
    return np.arcsin(np.clip(diff, -1.0, 1.0))


def gain_products(rho_RB_hat: np.ndarray, rho_MR_hat: np.ndarray) -> np.ndarray:
    return np.kron(np.atleast_1d(rho_RB_hat), np.atleast_1d(rho_MR_hat))


def _pair_by_residual(
    y: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    theta: np.ndarray,
    phi: np.ndarray,
    scale: float,
) -> np.ndarray:
    """Permutation of phi whose gain fit leaves the smallest residual."""
    best_phi, best_res = phi, math.inf
    for perm in itertools.permutations(range(phi.size)):
        candidate = phi[list(perm)]
        reg = _regressor(left, right, theta, candidate, scale)
        try:
            rho = _ls(y, reg)
        except IllConditionedError:
            continue
        res = float(np.linalg.norm(y - reg @ rho))
        if res < best_res:
            best_phi, best_res = candidate, res
    return best_phi


def _stage(
    tag: str,
    problem: anm.AnmProblem,
    L: int,
    truth: Optional[PathSet],
    opts: anm.SolverOptions,
    warnings: List[str],
    warm_start: Optional[np.ndarray] = None,
) -> Tuple[anm.AnmSolution, np.ndarray, np.ndarray, np.ndarray]:
    """Solve, extract (theta, phi) from the right and left certificates and fit the gains."""
    sol = anm.solve(problem, opts, warm_start=warm_start)
    t_left, t_right = anm.assemble_certificate(sol)
    est_g = freqs_from_toeplitz(t_left, L)
    est_f = freqs_from_toeplitz(t_right, L)
    for side, est in (("left", est_g), ("right", est_f)):
        if est.degenerate:
            warnings.append(f"{tag}: degenerate {side} certificate (gap {est.eig_ratio:.3g})")
    theta, phi = pair_and_order(est_f.freqs, est_g.freqs, truth)
    y = vec(problem.observations)
    if truth is None and L > 1:
        phi = _pair_by_residual(y, problem.sensing_left, problem.sensing_right, theta, phi, problem.scale)
    rho = _ls(y, _regressor(problem.sensing_left, problem.sensing_right, theta, phi, problem.scale))
    return sol, theta, phi, rho


def two_stage_estimate(
    record: SoundingRecord,
    cfg: SoundingConfig,
    L_MR: int,
    L_RB: int,
    truth: Optional[Tuple[PathSet, PathSet]] = None,
    opts: Optional[EstimatorOptions] = None,
) -> EstimationResult:
    """
    Run both estimation stages on one sounding.

    Parameters :
        record : SoundingRecord
            output of sound_hybrid under cfg
        truth : Tuple[PathSet, PathSet]
            (MS-RIS, RIS-BS) paths for evaluation mode alignment, or None
    Raises :
        EstimationError tagged with the stage that failed
    """
    opts = opts or EstimatorOptions()
    truth_mr, truth_rb = truth if truth is not None else (None, None)
    warnings: List[str] = []
    amp = math.sqrt(cfg.P_T)

    try:
        scale1 = amp * record.beta1
        tau = anm.regularization_weight(cfg.sigma, cfg.N_R, cfg.N_M, opts.c_tau)
        problem1 = anm.AnmProblem(record.W_H, record.X, record.Y_H, scale1, tau)
        sol1, theta_mr, phi_mr, rho_mr = _stage("stage1", problem1, L_MR, truth_mr, opts.solver, warnings)
        H_MR_hat = synth_channel(PathSet(theta_mr, phi_mr, rho_mr), cfg.N_R, cfg.N_M)
    except Exception as e:
        log.error(f"stage one failed: {e}")
        raise EstimationError("stage1", e) from e

    try:
        U_hat = build_U_hat(record.schedule, H_MR_hat, record.X)
        scale2 = amp * record.beta2
        nu = anm.regularization_weight(cfg.sigma, cfg.N_B, cfg.N_R, opts.c_nu)
        left = record.W_B.conj().T
        problem2 = anm.AnmProblem(left, U_hat, record.Y, scale2, nu)
        warm = None
        if scale2 > 0 and np.any(U_hat):
            warm = pinv(left) @ record.Y @ pinv(U_hat) / scale2
        sol2, theta_rb, phi_rb, rho_rb = _stage("stage2", problem2, L_RB, truth_rb, opts.solver, warnings, warm)
        H_RB_hat = synth_channel(PathSet(theta_rb, phi_rb, rho_rb), cfg.N_B, cfg.N_R)
    except Exception as e:
        log.error(f"stage two failed: {e}")
        raise EstimationError("stage2", e) from e

    return EstimationResult(
        H_MR_hat=H_MR_hat,
        H_RB_hat=H_RB_hat,
        theta_MR=theta_mr,
        phi_MR=phi_mr,
        rho_MR=rho_mr,
        theta_RB=theta_rb,
        phi_RB=phi_rb,
        rho_RB=rho_rb,
        delta_hat=angle_differences(phi_mr, theta_rb),
        rho_prod=gain_products(rho_rb, rho_mr),
        U_hat=U_hat,
        stage1=sol1,
        stage2=sol2,
        warnings=warnings,
    )
