"""
Easy lookup for the hybrid RIS parameter sets and the shared link budget.
"""

"""Link budget and geometry shared by every setup, overridable from the config file."""

DEFAULTS = {
    "N_B": 16,
    "N_M": 16,
    "L_MR": 2,
    "L_RB": 2,
    "d_T": 22.0,
    "d_x": [15.0],
    "d_y": 2.0,
    "p_t_dbm": [0.0, 5.0, 10.0, 15.0, 20.0],
    "distance_p_t_dbm": 10.0,
    "trials": 100,
    "seed": 0,
    "crlb": True,
    "noiseless_oracle": False,
    "phase_design_baseline": False,
    "output": "results",
    "fc_hz": 28e9,
    "gamma": 3.0,
    "d0_m": 1.0,
    "n0_dbm_hz": -173.0,
    "bandwidth_hz": 100e6,
    "coherence_uses": 500,
    "active_set": "random",
    "combiner": "random",
    "c_tau": 1.0,
    "c_nu": 1.0,
    "reg_floor": 1e-4,
    "solver_tol": 1e-6,
    "solver_max_iter": 20_000,
    "workers": 1,
}

"""This dictionary maps setup names to their RIS dimensions (N_RFR = M, N_CB = N_RFB)."""

SETUPS = {
    "setup1": {"N_R": 32, "M": 4, "N_RFR": 4, "K": 5, "T": 8, "N_CB": 8, "N_RFB": 8},
    "setup2": {"N_R": 32, "M": 2, "N_RFR": 2, "K": 5, "T": 8, "N_CB": 8, "N_RFB": 8},
    "setup3": {"N_R": 64, "M": 8, "N_RFR": 8, "K": 7, "T": 8, "N_CB": 8, "N_RFB": 8, "d_T": 50.0, "d_x": [10.0]},
    "setup4": {"N_R": 64, "M": 6, "N_RFR": 6, "K": 7, "T": 8, "N_CB": 8, "N_RFB": 8, "d_T": 50.0, "d_x": [10.0]},
}

"""Keys a custom setup has to provide itself."""

DIMENSION_KEYS = ("N_R", "M", "N_RFR", "K", "T", "N_CB", "N_RFB")

"""Distance sweep of the RIS placement study."""

DISTANCE_SWEEP = {"d_T": 100.0, "d_x": [20.0, 35.0, 50.0, 65.0, 80.0], "distance_p_t_dbm": 10.0}
