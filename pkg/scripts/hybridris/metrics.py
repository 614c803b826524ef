"""
MSE and effective spectral efficiency.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class TrialRecord:
    """
    Per trial outcome used by the aggregations.

    Parameters :
        sq_errors : dict
            parameter class -> ||truth - est||^2 / L for that trial
        gain : float
            |w^H H_hat f|^2 in the received domain
        channel_error : complex
            w^H H_e f in the received domain
        T_H, T_c : int
            training overhead and coherence time in channel uses
    """

    sq_errors: dict
    gain: float
    channel_error: complex
    T_H: int
    T_c: int

    def __post_init__(self) -> None:
        if any(value < 0 for value in self.sq_errors.values()):
            raise ConfigurationError("squared errors must be non negative")


def squared_error(est: Sequence, truth: Sequence, sine: bool = False) -> float:
    """
    ||truth - est||^2 / L for one trial.

    Parameters :
        sine : bool
            compare sin() of the angles instead of the radians
    """
    est = np.atleast_1d(np.asarray(est)).ravel()
    truth = np.atleast_1d(np.asarray(truth)).ravel()
    if est.size != truth.size:
        raise DimensionError(f"{est.size} estimates for {truth.size} true values")
    if sine:
        est, truth = np.sin(est), np.sin(truth)
    return float(np.sum(np.abs(truth - est) ** 2) / truth.size)


def mse(est: Sequence[Sequence], truth: Sequence[Sequence], sine: bool = False) -> float:
    """Trial average of squared_error over aligned (est, truth) pairs."""
    if len(est) != len(truth):
        raise DimensionError(f"{len(est)} estimate lists for {len(truth)} truth lists")
    if not len(est):
        return float("nan")
    return float(np.mean([squared_error(e, t, sine) for e, t in zip(est, truth)]))


def se_prefactor(T_c: int, T_H: int) -> float:
    """(T_c - T_H) / T_c"""
    if T_H >= T_c:
        raise ConfigurationError(f"training overhead {T_H} leaves no room in coherence time {T_c}")
    return (T_c - T_H) / T_c


def se_terms(trials: Sequence[TrialRecord], sigma2: float, T_c: int, T_H: int) -> np.ndarray:
    """
    Per trial prefactor * log2(1 + gain / (sigma2 + var)).

    var is the sample variance of w^H H_e f across the supplied trials.
    """
    prefactor = se_prefactor(T_c, T_H)
    gains = np.array([t.gain for t in trials], dtype=float)
    errors = np.array([t.channel_error for t in trials], dtype=complex)
    var = float(np.var(errors)) if errors.size else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        return prefactor * np.log2(1.0 + gains / (sigma2 + var))


def effective_se(trials: Sequence[TrialRecord], sigma2: float, T_c: int, T_H: int) -> float:
    """Average effective SE in bits/s/Hz."""
    if not len(trials):
        return float("nan")
    return float(np.mean(se_terms(trials, sigma2, T_c, T_H)))
