"""
Geometric mmWave channel model for the MS-RIS and RIS-BS hops: ULA steering vectors,
channel synthesis, the cascaded and effective channels, random scenes and path loss.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 3e8
MAX_SCENE_DRAWS = 100_000


@dataclass(frozen=True)
class PathSet:
    """
    Per hop channel parameters.

    Parameters :
        aod : np.ndarray
            L angles of departure theta in radians, in [0, pi)
        aoa : np.ndarray
            L angles of arrival phi in radians, in [0, pi)
        gains : np.ndarray
            L complex path gains rho
    """

    aod: np.ndarray
    aoa: np.ndarray
    gains: np.ndarray

    def __post_init__(self) -> None:
        aod = np.atleast_1d(np.asarray(self.aod, dtype=float))
        aoa = np.atleast_1d(np.asarray(self.aoa, dtype=float))
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        if not (aod.size == aoa.size == gains.size):
            raise DimensionError(f"path lists differ in length: {aod.size}, {aoa.size}, {gains.size}")
        object.__setattr__(self, "aod", aod)
        object.__setattr__(self, "aoa", aoa)
        object.__setattr__(self, "gains", gains)

    @property
    def L(self) -> int:
        return int(self.gains.size)

    @property
    def f(self) -> np.ndarray:
        """Spatial frequencies of the departure side."""
        return np.sin(self.aod)

    @property
    def g(self) -> np.ndarray:
        """Spatial frequencies of the arrival side."""
        return np.sin(self.aoa)


@dataclass(frozen=True)
class Topology:
    """BS at (0,0), RIS at (d_T - d_x, d_y), MS at (d_T, 0); all in meters."""

    d_T: float
    d_x: float
    d_y: float

    def __post_init__(self) -> None:
        if self.d1 <= 0 or self.d2 <= 0:
            raise ConfigurationError(f"degenerate topology {self}: d1={self.d1}, d2={self.d2}")

    @property
    def d1(self) -> float:
        """MS-RIS distance."""
        return float(np.hypot(self.d_x, self.d_y))

    @property
    def d2(self) -> float:
        """RIS-BS distance."""
        return float(np.hypot(self.d_T - self.d_x, self.d_y))


@dataclass(frozen=True)
class PathLossModel:
    d0: float = 1.0
    gamma: float = 3.0
    fc: float = 28e9
    wavelength: float = field(init=False)
    beta0: float = field(init=False)

    def __post_init__(self) -> None:
        if self.d0 <= 0 or self.fc <= 0:
            raise ConfigurationError(f"path loss needs positive d0 and fc, got {self.d0}, {self.fc}")
        wavelength = SPEED_OF_LIGHT / self.fc
        object.__setattr__(self, "wavelength", wavelength)
        object.__setattr__(self, "beta0", (wavelength / (4 * np.pi * self.d0)) ** 2)


def steering(n: int, f: float) -> np.ndarray:
    """
    ULA response with half wavelength spacing.

    Parameters :
        n : int
            number of elements
        f : float
            spatial frequency
    Returns :
        vector with entries exp(j pi (k-1) f), k = 1..n
    """
    if n < 1:
        raise DimensionError(f"steering vector needs at least one element, got {n}")
    return np.exp(1j * np.pi * np.arange(n) * f)


def steering_derivative(n: int, f: float) -> np.ndarray:
    """Entries (k-1) exp(j pi (k-1) f); the j pi cos(angle) chain factor is left to callers."""
    idx = np.arange(n)
    return idx * steering(n, f)


def steering_matrix(n: int, freqs: np.ndarray) -> np.ndarray:
    """Columns steering(n, f) for each f in freqs."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.exp(1j * np.pi * np.outer(np.arange(n), freqs))


def synth_channel(paths: PathSet, n_rx: int, n_tx: int) -> np.ndarray:
    """
    H = A(phi) diag(rho) A^H(theta).

    Parameters :
        paths : PathSet
            hop parameters
        n_rx : int
            receive side elements
        n_tx : int
            transmit side elements
    """
    a_rx = steering_matrix(n_rx, paths.g)
    a_tx = steering_matrix(n_tx, paths.f)
    return (a_rx * paths.gains) @ a_tx.conj().T


def cascade(h_rb: np.ndarray, omega: np.ndarray, h_mr: np.ndarray) -> np.ndarray:
    """End to end channel H_RB Omega H_MR."""
    h_rb = np.atleast_2d(h_rb)
    omega = np.atleast_2d(omega)
    h_mr = np.atleast_2d(h_mr)
    n_r = omega.shape[0]
    if omega.shape != (n_r, n_r) or h_rb.shape[1] != n_r or h_mr.shape[0] != n_r:
        raise DimensionError(f"cannot cascade {h_rb.shape} x {omega.shape} x {h_mr.shape}")
    return h_rb @ omega @ h_mr


def effective_channel(
    rho_rb: np.ndarray,
    theta_rb: np.ndarray,
    omega: np.ndarray,
    phi_mr: np.ndarray,
    rho_mr: np.ndarray,
) -> np.ndarray:
    """
    G = diag(rho_RB) A^H(theta_RB) diag(omega) A(phi_MR) diag(rho_MR), size L_RB x L_MR.

    Parameters :
        omega : np.ndarray
            RIS reflection vector, one entry per element
    """
    omega = np.asarray(omega, dtype=complex).ravel()
    n_r = omega.size
    a_theta = steering_matrix(n_r, np.sin(theta_rb))
    a_phi = steering_matrix(n_r, np.sin(phi_mr))
    inner = a_theta.conj().T @ (omega[:, None] * a_phi)
    return np.asarray(rho_rb, dtype=complex)[:, None] * inner * np.asarray(rho_mr, dtype=complex)[None, :]


def _separated(freqs: np.ndarray, min_sep: float) -> bool:
    if freqs.size < 2:
        return True
    diffs = np.abs(freqs[:, None] - freqs[None, :])
    np.fill_diagonal(diffs, np.inf)
    return bool(diffs.min() >= min_sep)


def _draw_angles(rng: np.random.Generator, count: int, min_sep: float) -> np.ndarray:
    for _ in range(MAX_SCENE_DRAWS):
        angles = rng.uniform(0.0, np.pi, count)
        if _separated(np.sin(angles), min_sep):
            return angles
    raise ConfigurationError(f"could not draw {count} angles with frequency separation {min_sep}")


def sample_scene(
    rng: np.random.Generator,
    L: int,
    n_tx: int,
    n_rx: int,
    min_sep_tx: float | None = None,
    min_sep_rx: float | None = None,
) -> PathSet:
    """
    Random hop with separated spatial frequencies and CN(0,1) gains.

    Angles are drawn uniformly in [0, pi) and rejected until their sines are pairwise at
    least min_sep apart (default 4/N of the addressed array).
    """
    min_sep_tx = 4.0 / n_tx if min_sep_tx is None else min_sep_tx
    min_sep_rx = 4.0 / n_rx if min_sep_rx is None else min_sep_rx
    if L < 1:
        raise ConfigurationError(f"path count must be positive, got {L}")
    for side, sep in (("tx", min_sep_tx), ("rx", min_sep_rx)):
        if L > 1 and L * sep >= 1.0:
            raise ConfigurationError(f"{L} paths cannot be separated by {sep} on the {side} side")
    aod = _draw_angles(rng, L, min_sep_tx)
    aoa = _draw_angles(rng, L, min_sep_rx)
    gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2)
    return PathSet(aod, aoa, gains)


def path_loss(topology: Topology, model: PathLossModel) -> Tuple[float, float]:
    """
    Amplitude factors of the two sounding links.

    beta(d1) = beta0 (d0/d1)^gamma, beta(d1,d2) = beta0 (d0/(d1 d2))^gamma

    Returns :
        (beta1, beta2) = (sqrt(beta(d1)), sqrt(beta(d1, d2)))
    """
    beta_d1 = model.beta0 * (model.d0 / topology.d1) ** model.gamma
    beta_d1d2 = model.beta0 * (model.d0 / (topology.d1 * topology.d2)) ** model.gamma
    log.debug(f"path loss d1={topology.d1:.2f} m d2={topology.d2:.2f} m: {10 * np.log10(beta_d1):.1f} dB, {10 * np.log10(beta_d1d2):.1f} dB")
    return float(np.sqrt(beta_d1)), float(np.sqrt(beta_d1d2))
