"""
hybridris functions module
"""

from .anm import AnmProblem, AnmSolution, SolverOptions, assemble_certificate, regularization_weight, solve, write_trace
from .channel import (
    PathLossModel,
    PathSet,
    Topology,
    cascade,
    effective_channel,
    path_loss,
    sample_scene,
    steering,
    steering_derivative,
    synth_channel,
)
from .config import ExperimentConfig, load_config
from .control import PhaseDesign, build_C, design_beamformers, design_phases
from .crlb import FimReport, crlb_angle, crlb_gain, fim_stage1, fim_stage2, mu1, mu2
from .estimation import (
    EstimationResult,
    angle_differences,
    build_U_hat,
    freqs_from_toeplitz,
    gain_products,
    ls_gains_stage1,
    ls_gains_stage2,
    pair_and_order,
    two_stage_estimate,
)
from .harness import emit_plot_script, run, sweep_distance
from .metrics import TrialRecord, effective_se, mse
from .sounding import (
    PhaseSchedule,
    SoundingConfig,
    SoundingRecord,
    make_active_set,
    make_combiner,
    make_phase_schedule,
    make_training_matrix,
    noise_power,
    overhead_hybrid,
    overhead_passive,
    sound_hybrid,
    sound_passive,
)

__all__ = [
    "AnmProblem",
    "AnmSolution",
    "SolverOptions",
    "assemble_certificate",
    "regularization_weight",
    "solve",
    "write_trace",
    "PathLossModel",
    "PathSet",
    "Topology",
    "cascade",
    "effective_channel",
    "path_loss",
    "sample_scene",
    "steering",
    "steering_derivative",
    "synth_channel",
    "ExperimentConfig",
    "load_config",
    "PhaseDesign",
    "build_C",
    "design_beamformers",
    "design_phases",
    "FimReport",
    "crlb_angle",
    "crlb_gain",
    "fim_stage1",
    "fim_stage2",
    "mu1",
    "mu2",
    "EstimationResult",
    "angle_differences",
    "build_U_hat",
    "freqs_from_toeplitz",
    "gain_products",
    "ls_gains_stage1",
    "ls_gains_stage2",
    "pair_and_order",
    "two_stage_estimate",
    "emit_plot_script",
    "run",
    "sweep_distance",
    "TrialRecord",
    "effective_se",
    "mse",
    "PhaseSchedule",
    "SoundingConfig",
    "SoundingRecord",
    "make_active_set",
    "make_combiner",
    "make_phase_schedule",
    "make_training_matrix",
    "noise_power",
    "overhead_hybrid",
    "overhead_passive",
    "sound_hybrid",
    "sound_passive",
]
