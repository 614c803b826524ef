"""
Experiment configuration. A config file is TOML with one [setup] table; any key left out
falls back to the named setup and then to the shared defaults in setups.py.
"""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import tomlkit
from tomlkit.exceptions import ParseError

from .anm import SolverOptions
from .channel import PathLossModel, Topology
from .errors import ConfigurationError
from .estimation import EstimatorOptions
from .setups import DEFAULTS, DIMENSION_KEYS, DISTANCE_SWEEP, SETUPS
from .sounding import ACTIVE_SET_MODES, SoundingConfig, dbm_to_watts, noise_power, overhead_hybrid

log = logging.getLogger(__name__)

COMBINER_MODES = ("random", "identity")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One Monte Carlo experiment: a hybrid RIS setup, a power and a distance grid and the
    estimator settings. Lists from the file are stored as tuples.
    """

    name: str
    N_B: int
    N_R: int
    N_M: int
    M: int
    K: int
    T: int
    N_CB: int
    N_RFB: int
    N_RFR: int
    L_MR: int
    L_RB: int
    d_T: float
    d_x: Tuple[float, ...]
    d_y: float
    p_t_dbm: Tuple[float, ...]
    distance_p_t_dbm: float
    trials: int
    seed: int
    crlb: bool
    noiseless_oracle: bool
    phase_design_baseline: bool
    output: str
    fc_hz: float
    gamma: float
    d0_m: float
    n0_dbm_hz: float
    bandwidth_hz: float
    coherence_uses: int
    active_set: str
    combiner: str
    c_tau: float
    c_nu: float
    reg_floor: float
    solver_tol: float
    solver_max_iter: int
    workers: int

    def __post_init__(self) -> None:
        if self.name not in SETUPS and self.name != "custom":
            raise ConfigurationError(f"unknown setup {self.name!r}, expected one of {sorted(SETUPS)} or 'custom'")
        if not self.d_x or not self.p_t_dbm:
            raise ConfigurationError("distance and power sweeps must not be empty")
        if self.trials < 1 or self.workers < 1:
            raise ConfigurationError(f"trials and workers must be positive, got {self.trials}, {self.workers}")
        if self.L_MR < 1 or self.L_RB < 1:
            raise ConfigurationError(f"path counts must be positive, got {self.L_MR}, {self.L_RB}")
        if self.active_set not in ACTIVE_SET_MODES:
            raise ConfigurationError(f"active_set must be one of {ACTIVE_SET_MODES}, got {self.active_set!r}")
        if self.combiner not in COMBINER_MODES:
            raise ConfigurationError(f"combiner must be one of {COMBINER_MODES}, got {self.combiner!r}")
        if self.combiner == "identity" and self.N_CB != self.N_B:
            raise ConfigurationError(f"identity combiner needs N_CB = N_B, got {self.N_CB} and {self.N_B}")
        # builds and validates the sounding dimensions
        cfg = self.sounding_config(self.p_t_dbm[0])
        if overhead_hybrid(cfg) >= self.coherence_uses:
            raise ConfigurationError(f"training overhead {overhead_hybrid(cfg)} exceeds the coherence time {self.coherence_uses}")
        for d_x in self.d_x:
            self.topology(d_x)

    @property
    def sigma2(self) -> float:
        return 0.0 if self.noiseless_oracle else noise_power(self.n0_dbm_hz, self.bandwidth_hz)

    def sounding_config(self, p_t_dbm: float) -> SoundingConfig:
        return SoundingConfig(
            N_B=self.N_B,
            N_R=self.N_R,
            N_M=self.N_M,
            M=self.M,
            K=self.K,
            T=self.T,
            N_CB=self.N_CB,
            N_RFB=self.N_RFB,
            N_RFR=self.N_RFR,
            P_T=dbm_to_watts(p_t_dbm),
            sigma2=self.sigma2,
        )

    def topology(self, d_x: float) -> Topology:
        return Topology(self.d_T, d_x, self.d_y)

    def path_loss_model(self) -> PathLossModel:
        return PathLossModel(d0=self.d0_m, gamma=self.gamma, fc=self.fc_hz)

    def estimator_options(self) -> EstimatorOptions:
        solver = SolverOptions(tol_rel=self.solver_tol, max_iter=self.solver_max_iter, reg_floor=self.reg_floor)
        return EstimatorOptions(c_tau=self.c_tau, c_nu=self.c_nu, solver=solver)

    def grid(self, distance: bool = False) -> Tuple[Tuple[float, float], ...]:
        """(p_t_dbm, d_x) grid points, powers outer for a run and distances only for a sweep."""
        if distance:
            return tuple((self.distance_p_t_dbm, d_x) for d_x in self.d_x)
        return tuple((p, d_x) for p in self.p_t_dbm for d_x in self.d_x)

    def replace(self, **changes: Any) -> "ExperimentConfig":
        """Copy with CLI overrides applied, None values are ignored."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def config_from_mapping(values: Mapping[str, Any], distance: bool = False) -> ExperimentConfig:
    """
    Merge defaults, the named setup and values, then build the config.

    Parameters :
        values : Mapping[str, Any]
            contents of the [setup] table
        distance : bool
            start from the distance sweep geometry instead of the setup geometry
    """
    name = str(values.get("name", "setup2"))
    merged: Dict[str, Any] = dict(DEFAULTS)
    merged.update(SETUPS.get(name, {}))
    if distance:
        merged.update(DISTANCE_SWEEP)
    unknown = set(values) - set(merged) - set(DIMENSION_KEYS) - {"name"}
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
    merged.update(values)
    merged["name"] = name
    missing = [key for key in DIMENSION_KEYS if key not in merged]
    if missing:
        raise ConfigurationError(f"setup {name!r} is missing {missing}")
    for key in ("d_x", "p_t_dbm"):
        value = merged[key]
        merged[key] = tuple(float(v) for v in (value if isinstance(value, (list, tuple)) else [value]))
    fields = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    try:
        for key, kind in fields.items():
            if kind in (int, "int"):
                merged[key] = int(merged[key])
            elif kind in (float, "float"):
                merged[key] = float(merged[key])
            elif kind in (bool, "bool"):
                merged[key] = bool(merged[key])
        return ExperimentConfig(**merged)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid configuration value: {e}") from e


def load_config(path: str | Path, distance: bool = False) -> ExperimentConfig:
    """Read a TOML experiment file, see config_from_mapping."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        document = tomlkit.parse(path.read_text()).unwrap()
    except ParseError as e:
        log.error(f"could not parse {path}: {e}")
        raise ConfigurationError(f"{path}: {e}") from e
    if "setup" not in document:
        raise ConfigurationError(f"{path} has no [setup] table")
    log.info(f"Loaded configuration '{document['setup'].get('name', 'setup2')}' from {path}")
    return config_from_mapping(document["setup"], distance)
