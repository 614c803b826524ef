"""
Uplink training for the hybrid (and, for reference, the passive) RIS: pilot and combiner
construction, RIS phase schedules, the received signal synthesis and training overheads.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError

log = logging.getLogger(__name__)

ACTIVE_SET_MODES = ("random", "first", "rotating")


@dataclass(frozen=True)
class SoundingConfig:
    """
    Array sizes, training dimensions and link budget of one hybrid RIS sounding.

    Parameters :
        N_B, N_R, N_M : int
            BS antennas, RIS elements, MS antennas
        M : int
            active RIS elements per block
        K : int
            training blocks
        T : int
            channel uses per block
        N_CB : int
            BS combiner columns
        N_RFB, N_RFR : int
            RF chains at the BS and at the RIS
        P_T : float
            transmit power in watts
        sigma2 : float
            noise power in watts
    """

    N_B: int
    N_R: int
    N_M: int
    M: int
    K: int
    T: int
    N_CB: int
    N_RFB: int
    N_RFR: int
    P_T: float = 0.1
    sigma2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("N_B", "N_R", "N_M", "K", "T", "N_CB", "N_RFB", "N_RFR"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 1 <= self.M <= self.N_R:
            raise ConfigurationError(f"need 1 <= M <= N_R, got M={self.M}, N_R={self.N_R}")
        if self.N_CB > self.N_B:
            raise ConfigurationError(f"N_CB={self.N_CB} exceeds N_B={self.N_B}")
        if self.P_T < 0 or self.sigma2 < 0:
            raise ConfigurationError("power and noise must be non negative")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class PhaseSchedule:
    """
    RIS reflection matrices for the K training blocks.

    Parameters :
        omegas : np.ndarray
            K x N_R diagonals of the Omega_k matrices
        active_sets : Tuple[Tuple[int, ...], ...]
            per block tuple of the active element indices
    """

    omegas: np.ndarray
    active_sets: Tuple[Tuple[int, ...], ...]

    @property
    def K(self) -> int:
        return self.omegas.shape[0]

    @property
    def N_R(self) -> int:
        return self.omegas.shape[1]

    @property
    def active_set(self) -> Tuple[int, ...]:
        """Active set of the first block (the whole schedule for fixed sets)."""
        return self.active_sets[0]

    def omega(self, k: int) -> np.ndarray:
        """Omega_k as a diagonal matrix."""
        return np.diag(self.omegas[k])

    def selection(self, k: int) -> np.ndarray:
        """Row selection W_H,k picking the active rows of I_N_R."""
        return np.eye(self.N_R)[list(self.active_sets[k])]


@dataclass(frozen=True)
class SoundingRecord:
    """Observations of one hybrid sounding plus everything that produced them."""

    Y_H: np.ndarray
    Y: np.ndarray
    W_H: np.ndarray
    W_B: np.ndarray
    X: np.ndarray
    schedule: PhaseSchedule
    beta1: float
    beta2: float


def dbm_to_watts(p_dbm: float) -> float:
    return 10 ** (p_dbm / 10) / 1000


def noise_power(n0_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """
    Thermal noise power over the band.

    Parameters :
        n0_dbm_per_hz : float
            noise power density in dBm/Hz
        bandwidth_hz : float
            bandwidth in Hz
    Returns :
        sigma^2 in watts
    """
    if bandwidth_hz <= 0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth_hz}")
    return dbm_to_watts(n0_dbm_per_hz + 10 * math.log10(bandwidth_hz))


def make_training_matrix(n_m: int, t: int, rng: np.random.Generator) -> np.ndarray:
    """Random phase pilots, every entry of modulus 1/sqrt(N_M) so columns have unit norm."""
    if t < 1:
        raise ConfigurationError(f"training length must be positive, got {t}")
    return np.exp(2j * np.pi * rng.random((n_m, t))) / np.sqrt(n_m)


def make_combiner(n_b: int, n_cb: int, rng: np.random.Generator) -> np.ndarray:
    """Analog combiner with random phases, entries (1/sqrt(N_B)) exp(j psi)."""
    if n_cb < 1:
        raise ConfigurationError(f"combiner needs at least one column, got {n_cb}")
    return np.exp(2j * np.pi * rng.random((n_b, n_cb))) / np.sqrt(n_b)


def make_active_set(n_r: int, m: int, rng: Optional[np.random.Generator] = None, mode: str = "random") -> Tuple[int, ...]:
    """
    Indices of the active RIS elements.

    Parameters :
        mode : str
            "random" draws without replacement, "first" takes 0..M-1
    """
    if m > n_r or m < 0:
        raise ConfigurationError(f"cannot pick {m} active elements out of {n_r}")
    if mode == "first" or rng is None:
        return tuple(range(m))
    return tuple(sorted(int(i) for i in rng.choice(n_r, size=m, replace=False)))


def rotating_active_sets(n_r: int, m: int, k: int) -> Tuple[Tuple[int, ...], ...]:
    """Block k activates elements k*M .. k*M+M-1 (mod N_R), sweeping the whole surface."""
    if m > n_r or m < 1:
        raise ConfigurationError(f"cannot pick {m} active elements out of {n_r}")
    return tuple(tuple(sorted((b * m + i) % n_r for i in range(m))) for b in range(k))


def make_phase_schedule(
    n_r: int,
    k: int,
    active_set: Sequence[int] | Sequence[Sequence[int]],
    rng: np.random.Generator,
) -> PhaseSchedule:
    """
    K independent random reflection diagonals, zeroed on the active elements.

    Parameters :
        active_set : Sequence[int] | Sequence[Sequence[int]]
            one index set for every block, or a sequence of K per block sets
    """
    sets = list(active_set)
    if sets and not np.isscalar(sets[0]):
        if len(sets) != k:
            raise DimensionError(f"{len(sets)} active sets given for {k} blocks")
        per_block = tuple(tuple(int(i) for i in s) for s in sets)
    else:
        per_block = tuple(tuple(int(i) for i in sets) for _ in range(k))
    omegas = np.exp(2j * np.pi * rng.random((k, n_r)))
    for b, block in enumerate(per_block):
        omegas[b, list(block)] = 0.0
    return PhaseSchedule(omegas, per_block)


def _cn_noise(rng: np.random.Generator, shape: Tuple[int, int], sigma2: float) -> np.ndarray:
    return np.sqrt(sigma2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sound_hybrid(
    cfg: SoundingConfig,
    h_mr: np.ndarray,
    h_rb: np.ndarray,
    schedule: PhaseSchedule,
    x: np.ndarray,
    w_b: np.ndarray,
    rng: np.random.Generator,
    beta1: float = 1.0,
    beta2: float = 1.0,
) -> SoundingRecord:
    """
    Received training signals at the RIS active elements and at the BS.

    Y_H,k = sqrt(P_T) beta1 W_H,k H_MR X + W_H,k Z1,k
    Y_k   = sqrt(P_T) beta2 W_B^H H_RB Omega_k H_MR X + W_B^H Z2,k

    Blocks are stacked vertically for Y_H (MK x T) and horizontally for Y (N_CB x TK).
    """
    if h_mr.shape != (cfg.N_R, cfg.N_M) or h_rb.shape != (cfg.N_B, cfg.N_R):
        raise DimensionError(f"channels {h_mr.shape}, {h_rb.shape} do not match the configuration")
    if x.shape != (cfg.N_M, cfg.T) or w_b.shape != (cfg.N_B, cfg.N_CB):
        raise DimensionError(f"pilots {x.shape} or combiner {w_b.shape} do not match the configuration")
    if schedule.K != cfg.K or schedule.N_R != cfg.N_R:
        raise DimensionError(f"schedule has {schedule.K} blocks of {schedule.N_R} elements")
    if any(len(s) != cfg.M for s in schedule.active_sets):
        raise DimensionError(f"every block must activate exactly M={cfg.M} elements")

    amp = math.sqrt(cfg.P_T)
    y_h_blocks: List[np.ndarray] = []
    y_blocks: List[np.ndarray] = []
    w_h_blocks: List[np.ndarray] = []
    hx = h_mr @ x
    for k in range(cfg.K):
        w_h = schedule.selection(k)
        z1 = _cn_noise(rng, (cfg.N_R, cfg.T), cfg.sigma2)
        z2 = _cn_noise(rng, (cfg.N_B, cfg.T), cfg.sigma2)
        y_h_blocks.append(amp * beta1 * w_h @ hx + w_h @ z1)
        y_blocks.append(amp * beta2 * w_b.conj().T @ h_rb @ (schedule.omegas[k][:, None] * hx) + w_b.conj().T @ z2)
        w_h_blocks.append(w_h)
    log.debug(f"sounded {cfg.K} blocks, sigma2={cfg.sigma2:.3e}, P_T={cfg.P_T:.3e}")
    return SoundingRecord(
        Y_H=np.vstack(y_h_blocks),
        Y=np.hstack(y_blocks),
        W_H=np.vstack(w_h_blocks),
        W_B=w_b,
        X=x,
        schedule=schedule,
        beta1=beta1,
        beta2=beta2,
    )


def sound_passive(
    cfg: SoundingConfig,
    h_mr: np.ndarray,
    h_rb: np.ndarray,
    omegas: Sequence[np.ndarray],
    x_blocks: Sequence[np.ndarray],
    w_blocks: Sequence[np.ndarray],
    rng: np.random.Generator,
    beta2: float = 1.0,
) -> List[np.ndarray]:
    """
    Received blocks of the passive RIS sounding.

    Y_P,k = sqrt(P_T) beta2 W_k^H H_RB Omega_k H_MR X_k + W_k^H Z_k

    Parameters :
        omegas : Sequence[np.ndarray]
            K reflection vectors (diagonals), full modulus
    """
    if not (len(omegas) == len(x_blocks) == len(w_blocks)):
        raise DimensionError("passive sounding needs one omega, pilot and combiner per block")
    amp = math.sqrt(cfg.P_T)
    blocks = []
    for omega, x_k, w_k in zip(omegas, x_blocks, w_blocks):
        omega = np.asarray(omega).ravel()
        if omega.size != h_rb.shape[1] or h_mr.shape[0] != omega.size:
            raise DimensionError(f"reflection vector of {omega.size} entries for channels {h_rb.shape}, {h_mr.shape}")
        if w_k.shape[0] != h_rb.shape[0] or x_k.shape[0] != h_mr.shape[1]:
            raise DimensionError(f"combiner {w_k.shape} or pilots {x_k.shape} do not fit the channels")
        z = _cn_noise(rng, (h_rb.shape[0], x_k.shape[1]), cfg.sigma2)
        signal = w_k.conj().T @ h_rb @ (omega[:, None] * (h_mr @ x_k))
        blocks.append(amp * beta2 * signal + w_k.conj().T @ z)
    return blocks


def overhead_hybrid(cfg: SoundingConfig) -> int:
    """T_H = K T ceil(N_CB/N_RFB) ceil(M/N_RFR)."""
    return cfg.K * cfg.T * math.ceil(cfg.N_CB / cfg.N_RFB) * math.ceil(cfg.M / cfg.N_RFR)


def overhead_passive(n0_beams: int, m0: int, t: int, l_mr: int, l_rb: int, n_rfb: int) -> int:
    """T_P = N0 ceil(M0/N_RFB) + T L_MR ceil(L_RB/N_RFB)."""
    if n_rfb < 1:
        raise ConfigurationError(f"RF chain count must be positive, got {n_rfb}")
    return n0_beams * math.ceil(m0 / n_rfb) + t * l_mr * math.ceil(l_rb / n_rfb)
