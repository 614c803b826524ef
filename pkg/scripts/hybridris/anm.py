"""
Regularised atomic norm minimisation posed as the Toeplitz constrained SDP

    min  reg/(2 N1) Tr T(u) + reg/(2 N2) Tr T(v) + 1/2 || A X B - Y ||_F^2
    s.t. [[T(u), X], [X^H, T(v)]] >= 0

over the received domain channel X = scale * H, solved with ADMM. The same solver covers
both estimation stages: stage one has A = W_H, B = X (pilots), stage two A = W_B^H, B = U.

The iterations run on the problem divided by reg, so the atomic norm term is of order one
and the residual tolerances measure it rather than the (much larger) data fit. reg is
lowered towards its target over a few continuation levels, each warm started from the last.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import CertificateError, ConvergenceError, DimensionError
from .numerics import min_eigenvalue, project_psd, toeplitz_from_generator, toeplitz_project

log = logging.getLogger(__name__)

PSD_TOL = 1e-8
TRACE_HEADER = ("iter", "objective", "primal_res", "dual_res")


@dataclass(frozen=True)
class SolverOptions:
    """
    ADMM settings.

    Parameters :
        rho : float
            initial penalty parameter of the reg scaled problem
        tol_abs, tol_rel : float
            absolute and relative stopping tolerances on the normalised problem
        max_iter : int
            iteration cap over all continuation levels, hitting it raises ConvergenceError
        balance_factor, balance_threshold : float
            residual balancing, rho is multiplied or divided by the factor when one
            residual, measured against its own tolerance, exceeds the other by the threshold
        reg_floor : float
            lower bound on the regularisation relative to ||A^H Y B^H||_2, keeps the
            certificates low rank when the noise (and hence reg) is zero
        relaxation : float
            over-relaxation of the PSD splitting, 1 for plain ADMM
        continuation : float
            reg is divided by this factor per level on the way down to its target, 1 for a
            single level
    """

    rho: float = 1.0
    tol_abs: float = 1e-8
    tol_rel: float = 1e-6
    max_iter: int = 20_000
    balance_factor: float = 2.0
    balance_threshold: float = 10.0
    reg_floor: float = 1e-4
    relaxation: float = 1.6
    continuation: float = 10.0


@dataclass(frozen=True)
class AnmProblem:
    """
    One ANM instance, Y = scale * A H B + noise.

    Parameters :
        sensing_left : np.ndarray
            A, applied on the left of the channel (W_H or W_B^H)
        sensing_right : np.ndarray
            B, applied on the right (X or U_hat)
        observations : np.ndarray
            Y
        scale : float
            sqrt(P_T) * beta of the hop
        reg : float
            atomic norm weight tau (or nu) on scale * H
    """

    sensing_left: np.ndarray
    sensing_right: np.ndarray
    observations: np.ndarray
    scale: float
    reg: float

    def __post_init__(self) -> None:
        left = np.atleast_2d(self.sensing_left)
        right = np.atleast_2d(self.sensing_right)
        obs = np.atleast_2d(self.observations)
        if obs.shape != (left.shape[0], right.shape[1]):
            raise DimensionError(f"observations {obs.shape} do not match sensing {left.shape} and {right.shape}")
        if self.reg < 0 or self.scale < 0:
            raise DimensionError(f"reg and scale must be non negative, got {self.reg}, {self.scale}")
        object.__setattr__(self, "sensing_left", left)
        object.__setattr__(self, "sensing_right", right)
        object.__setattr__(self, "observations", obs)

    @property
    def dims(self) -> Tuple[int, int]:
        """(N_row, N_col) of the unknown channel."""
        return self.sensing_left.shape[1], self.sensing_right.shape[0]


@dataclass
class SolverTrace:
    objective: List[float] = field(default_factory=list)
    primal_res: List[float] = field(default_factory=list)
    dual_res: List[float] = field(default_factory=list)
    converged: bool = False
    levels: int = 0

    @property
    def iterations(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class AdmmState:
    """Normalised iterates needed to restart a solve of the same problem."""

    Z: np.ndarray
    dual: np.ndarray
    rho: float
    normalisation: Tuple[float, float, float]


@dataclass(frozen=True)
class AnmSolution:
    """
    Solver output.

    toeplitz_left and toeplitz_right are the generators of T(u) (N_row) and T(v) (N_col),
    in the received domain units of scale * H. reg is the weight actually used, after the
    floor.
    """

    H_hat: np.ndarray
    toeplitz_left: np.ndarray
    toeplitz_right: np.ndarray
    objective: float
    scale: float
    reg: float
    residuals: SolverTrace
    state: Optional[AdmmState] = None

    def block_matrix(self) -> np.ndarray:
        """[[T(u), scale H], [scale H^H, T(v)]]."""
        signal = self.scale * self.H_hat
        return np.block(
            [
                [toeplitz_from_generator(self.toeplitz_left), signal],
                [signal.conj().T, toeplitz_from_generator(self.toeplitz_right)],
            ]
        )


def regularization_weight(sigma: float, n_a: int, n_b: int, c: float = 1.0) -> float:
    """c * sigma * sqrt(N_a N_b ln(N_a N_b))"""
    if sigma < 0 or c <= 0 or n_a < 1 or n_b < 1:
        raise DimensionError(f"invalid regularisation inputs sigma={sigma}, N=({n_a}, {n_b}), c={c}")
    n = n_a * n_b
    return c * sigma * math.sqrt(n * math.log(n))


def _block(u: np.ndarray, v: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.block([[toeplitz_from_generator(u), g], [g.conj().T, toeplitz_from_generator(v)]])


def _zero_solution(problem: AnmProblem, reg: float) -> AnmSolution:
    n1, n2 = problem.dims
    trace = SolverTrace(converged=True)
    return AnmSolution(
        H_hat=np.zeros((n1, n2), dtype=complex),
        toeplitz_left=np.zeros(n1, dtype=complex),
        toeplitz_right=np.zeros(n2, dtype=complex),
        objective=0.5 * float(np.linalg.norm(problem.observations) ** 2),
        scale=problem.scale,
        reg=reg,
        residuals=trace,
    )


def _levels(reg: float, zero_level: float, factor: float) -> List[float]:
    """Descending reg values ending at reg, starting one factor below the zero solution."""
    levels: List[float] = []
    if factor > 1.0:
        level = zero_level / factor
        while level > reg * factor:
            levels.append(level)
            level /= factor
    levels.append(reg)
    return levels


def solve(
    problem: AnmProblem,
    opts: Optional[SolverOptions] = None,
    warm_start: Optional[np.ndarray] = None,
    restart: Optional[AnmSolution] = None,
) -> AnmSolution:
    """
    Solve the ANM SDP with ADMM on (u, v, X) and a PSD slack Z.

    The problem is normalised first (unit spectral norm sensing, unit Frobenius norm
    observations) so the tolerances are scale free. When reg >= sqrt(N1 N2) ||A^H Y B^H||_2
    the zero channel is optimal and returned without iterating.

    Parameters :
        problem : AnmProblem
            instance to solve
        opts : SolverOptions
            solver options, defaults if None
        warm_start : np.ndarray
            channel estimate H0 used to initialise the slack
        restart : AnmSolution
            earlier solution of the same problem whose ADMM state is resumed at the final level
    Returns :
        AnmSolution with the PSD repaired certificates
    """
    opts = opts or SolverOptions()
    n1, n2 = problem.dims
    if warm_start is not None and np.shape(warm_start) != (n1, n2):
        raise DimensionError(f"warm start {np.shape(warm_start)} does not match the unknown {(n1, n2)}")
    a_norm = float(np.linalg.norm(problem.sensing_left, 2))
    b_norm = float(np.linalg.norm(problem.sensing_right, 2))
    gamma = float(np.linalg.norm(problem.observations))
    if gamma == 0.0 or a_norm == 0.0 or b_norm == 0.0 or problem.scale == 0.0:
        log.debug("ANM problem carries no signal, returning the zero solution")
        return _zero_solution(problem, problem.reg)

    A = problem.sensing_left / a_norm
    B = problem.sensing_right / b_norm
    Y = problem.observations / gamma
    # X = back * G where G is the normalised unknown
    back = gamma / (a_norm * b_norm)
    correlation = A.conj().T @ Y @ B.conj().T
    strength = float(np.linalg.norm(correlation, 2))
    reg = max(problem.reg / (a_norm * b_norm * gamma), opts.reg_floor * strength)
    zero_level = math.sqrt(n1 * n2) * strength
    if reg >= zero_level:
        log.debug(f"reg {reg:.3e} above the zero solution level {zero_level:.3e}")
        return _zero_solution(problem, reg * a_norm * b_norm * gamma)

    da, ea = np.linalg.eigh(A.conj().T @ A)
    db, eb = np.linalg.eigh(B @ B.conj().T)
    denom = np.clip(da, 0.0, None)[:, None] * np.clip(db, 0.0, None)[None, :]
    corr_eig = ea.conj().T @ correlation @ eb

    n = n1 + n2
    normalisation = (a_norm, b_norm, gamma)
    rho = opts.rho
    levels = _levels(reg, zero_level, opts.continuation)
    if restart is not None and restart.state is not None and np.allclose(restart.state.normalisation, normalisation):
        Z = restart.state.Z.copy()
        dual = restart.state.dual.copy()
        rho = restart.state.rho
        levels = [reg]
    elif warm_start is not None:
        g0 = problem.scale * np.asarray(warm_start, dtype=complex) / back
        level = float(np.linalg.norm(g0, 2))
        u0 = np.zeros(n1, dtype=complex)
        v0 = np.zeros(n2, dtype=complex)
        u0[0] = level
        v0[0] = level
        Z = _block(u0, v0, g0)
        dual = np.zeros((n, n), dtype=complex)
    else:
        Z = np.zeros((n, n), dtype=complex)
        dual = np.zeros((n, n), dtype=complex)

    trace = SolverTrace()
    primal = dual_res = math.inf
    u = np.zeros(n1, dtype=complex)
    v = np.zeros(n2, dtype=complex)
    G = np.zeros((n1, n2), dtype=complex)
    alpha = opts.relaxation
    for index, level in enumerate(levels):
        # intermediate levels only need to land near their own solution
        slack = 1.0 if index == len(levels) - 1 else max(opts.continuation, 1.0)
        trace.levels += 1
        done = False
        while trace.iterations < opts.max_iter:
            M = Z - dual / rho
            P = 0.5 * (M[:n1, n1:] + M[n1:, :n1].conj().T)
            weight = 2 * rho * level
            G = ea @ ((corr_eig + weight * (ea.conj().T @ P @ eb)) / (denom + weight)) @ eb.conj().T
            u = toeplitz_project(M[:n1, :n1])
            u[0] -= 1.0 / (2 * rho * n1)
            v = toeplitz_project(M[n1:, n1:])
            v[0] -= 1.0 / (2 * rho * n2)

            theta = _block(u, v, G)
            relaxed = alpha * theta + (1.0 - alpha) * Z
            Z_prev = Z
            Z = project_psd(relaxed + dual / rho)
            dual = dual + rho * (relaxed - Z)

            primal = float(np.linalg.norm(theta - Z))
            dual_res = float(rho * np.linalg.norm(Z - Z_prev))
            objective = 0.5 * level * (u[0].real + v[0].real) + 0.5 * float(np.linalg.norm(A @ G @ B - Y) ** 2)
            trace.objective.append(objective * gamma**2)
            trace.primal_res.append(primal)
            trace.dual_res.append(dual_res)

            eps_primal = n * opts.tol_abs + opts.tol_rel * max(float(np.linalg.norm(theta)), float(np.linalg.norm(Z)))
            eps_dual = n * opts.tol_abs + opts.tol_rel * float(np.linalg.norm(dual))
            if primal <= slack * eps_primal and dual_res <= slack * eps_dual:
                done = True
                break

            primal_ratio = primal / eps_primal
            dual_ratio = dual_res / eps_dual
            if primal_ratio > opts.balance_threshold * dual_ratio:
                rho *= opts.balance_factor
            elif dual_ratio > opts.balance_threshold * primal_ratio:
                rho /= opts.balance_factor
        if not done:
            log.error(f"ADMM stopped after {opts.max_iter} iterations at level {index + 1} of {len(levels)}, primal {primal:.3e} dual {dual_res:.3e}")
            raise ConvergenceError(
                f"ADMM did not reach tolerance in {opts.max_iter} iterations",
                primal_res=primal,
                dual_res=dual_res,
                iterations=opts.max_iter,
            )
    trace.converged = True

    # shift the diagonals so the returned block is PSD
    lam_min = min_eigenvalue(_block(u, v, G))
    if lam_min < 0:
        u[0] -= lam_min
        v[0] -= lam_min
    objective = 0.5 * reg * (u[0].real + v[0].real) + 0.5 * float(np.linalg.norm(A @ G @ B - Y) ** 2)
    log.debug(f"ADMM converged in {trace.iterations} iterations over {trace.levels} levels, rho={rho:.3g}, objective={objective * gamma**2:.6e}")

    X = back * G
    return AnmSolution(
        H_hat=X / problem.scale,
        toeplitz_left=back * u,
        toeplitz_right=back * v,
        objective=objective * gamma**2,
        scale=problem.scale,
        reg=reg * a_norm * b_norm * gamma,
        residuals=trace,
        state=AdmmState(Z=Z, dual=dual, rho=rho, normalisation=normalisation),
    )


def assemble_certificate(sol: AnmSolution) -> Tuple[np.ndarray, np.ndarray]:
    """
    Materialise the two Toeplitz certificates of a solution.

    Returns :
        (T_left, T_right), N_row x N_row and N_col x N_col
    Raises :
        CertificateError when the block matrix has an eigenvalue below -1e-8 * trace
    """
    t_left = toeplitz_from_generator(sol.toeplitz_left)
    t_right = toeplitz_from_generator(sol.toeplitz_right)
    block = sol.block_matrix()
    trace = float(np.real(np.trace(block)))
    lam_min = min_eigenvalue(block)
    if lam_min < -PSD_TOL * max(trace, 0.0):
        log.error(f"certificate has eigenvalue {lam_min:.3e} for trace {trace:.3e}")
        raise CertificateError(f"certificate is not PSD: min eigenvalue {lam_min:.3e}, trace {trace:.3e}")
    return t_left, t_right


def write_trace(sol: AnmSolution, path: str | Path) -> None:
    """Dump the iteration record as iter,objective,primal_res,dual_res rows."""
    with open(path, "w", newline="") as file:
        writer = csv.writer(file)
        writer.writerow(TRACE_HEADER)
        rec = sol.residuals
        for it, row in enumerate(zip(rec.objective, rec.primal_res, rec.dual_res), start=1):
            writer.writerow((it, *(f"{value:.12e}" for value in row)))
