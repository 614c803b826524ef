"""
Monte Carlo driver: per trial scene synthesis, sounding, estimation, design and bounds,
aggregated into the results CSV files and optional gnuplot scripts.
"""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from . import anm, crlb
from .channel import cascade, path_loss, sample_scene, synth_channel
from .config import ExperimentConfig
from .control import design_beamformers, design_phases, random_phase_objectives
from .errors import DegenerateError, EstimationError, PlotParseError
from .estimation import angle_differences, build_U_hat, two_stage_estimate
from .metrics import TrialRecord, se_terms, squared_error
from .sounding import (
    make_active_set,
    make_combiner,
    make_phase_schedule,
    make_training_matrix,
    overhead_hybrid,
    rotating_active_sets,
    sound_hybrid,
)

log = logging.getLogger(__name__)

SCHEMA_LINE = "# ris-anm-sim v1"
MSE_KEYS = ("theta_mr", "phi_mr", "rho_mr", "theta_rb", "phi_rb", "rho_rb", "delta")
CRLB_KEYS = ("theta_mr", "phi_mr", "rho_mr", "theta_rb", "phi_rb", "rho_rb")
COLUMNS = (
    ("setup", "p_t_dbm", "d_x_m", "trial")
    + tuple(f"mse_{key}" for key in MSE_KEYS)
    + ("se_bits",)
    + tuple(f"crlb_{key}" for key in CRLB_KEYS)
    + ("status",)
)
FAILURE_COLUMNS = ("setup", "p_t_dbm", "d_x_m", "trial", "stage", "error")
BASELINE_COLUMNS = ("setup", "p_t_dbm", "d_x_m", "trial", "designed", "random_mean")
SUMMARY_COLUMNS = ("d_x_m", "rows") + tuple(f"median_mse_{key}" for key in MSE_KEYS)
BASELINE_DRAWS = 100


@dataclass
class TrialOutcome:
    """What one trial hands back to the driver, failed trials carry stage and error instead of a row."""

    grid: int
    trial: int
    p_t_dbm: float
    d_x: float
    row: Optional[Dict[str, object]] = None
    record: Optional[TrialRecord] = None
    failure: Optional[Tuple[str, str]] = None
    baseline: Optional[Tuple[float, float]] = None


@dataclass
class RunSummary:
    rows: int = 0
    failures: int = 0
    outputs: List[Path] = field(default_factory=list)


class ResultWriter:
    """
    Class to manage a results CSV file, the schema line and header are written on open
    """

    def __init__(self, path: str | Path, columns: Sequence[str], schema: Optional[str] = SCHEMA_LINE):
        """Initialize the writer, the file is only opened by the context manager
        Parameters :
            path : str | Path
                file to write
            columns : Sequence[str]
                header, rows must provide exactly these keys
            schema : str
                comment line written first, None to skip
        """
        self.path = Path(path)
        self.columns = tuple(columns)
        self.schema = schema
        self.file = None
        self.writer = None
        self.count = 0

    def _open(self):
        """Open the file and write the header internal method used with the context manager"""
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.file = open(self.path, "w", newline="")
        except OSError as e:
            log.error(f"Could not open {self.path} for writing: {e}")
            raise
        if self.schema:
            self.file.write(f"{self.schema}\n")
        self.writer = csv.writer(self.file)
        self.writer.writerow(self.columns)

    def _close(self):
        """Close the file internal method used with the context manager"""
        if self.file:
            self.file.close()

    def __enter__(self):
        """Enter the context manager"""
        self._open()
        return self

    def __exit__(self, *exc):
        """Exit the context manager"""
        self._close()

    def add_row(self, row: Dict[str, object]) -> None:
        """Write one row
        Parameters :
            row : dict
                column name -> value, floats are written in a fixed exponent format
        """
        try:
            self.writer.writerow([_format(row[column]) for column in self.columns])
            self.count += 1
        except (KeyError, OSError) as e:
            log.error(f"Failed to write row {self.count + 1} to {self.path}: {e}")
            raise


def _format(value: object) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10e}"
    return str(value)


def _schedule_sets(config: ExperimentConfig, rng: np.random.Generator):
    if config.active_set == "rotating":
        return rotating_active_sets(config.N_R, config.M, config.K)
    return make_active_set(config.N_R, config.M, rng, config.active_set)


def _beamform(H_true: np.ndarray, H_hat: np.ndarray, amp: float) -> Tuple[float, complex]:
    """Received domain |w^H H_hat f|^2 and w^H (H - H_hat) f for the designed beamformers."""
    try:
        w, f = design_beamformers(H_hat)
    except DegenerateError:
        return 0.0, 0j
    gain = float(abs(amp * (w.conj() @ H_hat @ f)) ** 2)
    error = complex(amp * (w.conj() @ (H_true - H_hat) @ f))
    return gain, error


def _status(degenerate: bool, singular: bool, edge: bool) -> str:
    """Row status, the first matching of degenerate, singular_fim and boundary, else ok."""
    if degenerate:
        return "degenerate"
    if singular:
        return "singular_fim"
    if edge:
        return "boundary"
    return "ok"


def run_trial(
    config: ExperimentConfig,
    grid: int,
    trial: int,
    p_t_dbm: float,
    d_x: float,
    crlb_only: bool = False,
    trace_dir: Optional[Path] = None,
) -> TrialOutcome:
    """
    One Monte Carlo trial. The random stream depends only on (seed, grid, trial).
    """
    rng = np.random.default_rng([config.seed, grid, trial])
    outcome = TrialOutcome(grid, trial, p_t_dbm, d_x)
    cfg = config.sounding_config(p_t_dbm)
    beta1, beta2 = path_loss(config.topology(d_x), config.path_loss_model())
    amp = math.sqrt(cfg.P_T)

    truth_mr = sample_scene(rng, config.L_MR, config.N_M, config.N_R)
    truth_rb = sample_scene(rng, config.L_RB, config.N_R, config.N_B)
    H_MR = synth_channel(truth_mr, config.N_R, config.N_M)
    H_RB = synth_channel(truth_rb, config.N_B, config.N_R)
    X = make_training_matrix(config.N_M, config.T, rng)
    W_B = np.eye(config.N_B, dtype=complex) if config.combiner == "identity" else make_combiner(config.N_B, config.N_CB, rng)
    schedule = make_phase_schedule(config.N_R, config.K, _schedule_sets(config, rng), rng)
    record = sound_hybrid(cfg, H_MR, H_RB, schedule, X, W_B, rng, beta1, beta2)

    bounds = {key: float("nan") for key in CRLB_KEYS}
    singular = edge = False
    if config.crlb and cfg.sigma2 > 0:
        fim1 = crlb.fim_stage1(truth_mr, X, record.W_H, amp * beta1, cfg.sigma2)
        fim2 = crlb.fim_stage2(truth_rb, build_U_hat(schedule, H_MR, X), W_B, amp * beta2, cfg.sigma2)
        for stage, report, truth in (("mr", fim1, truth_mr), ("rb", fim2, truth_rb)):
            values = crlb.stage_bounds(report)
            bounds.update(dict(zip((f"theta_{stage}", f"phi_{stage}", f"rho_{stage}"), values)))
            singular |= report.singular
            edge |= crlb.near_range_edge(report, truth)

    row: Dict[str, object] = {"setup": config.name, "p_t_dbm": float(p_t_dbm), "d_x_m": float(d_x), "trial": trial}
    row.update({f"crlb_{key}": value for key, value in bounds.items()})
    if crlb_only:
        row.update({f"mse_{key}": float("nan") for key in MSE_KEYS})
        row.update({"se_bits": float("nan"), "status": "singular_fim" if singular else "crlb_only"})
        outcome.row = row
        return outcome

    try:
        est = two_stage_estimate(record, cfg, config.L_MR, config.L_RB, (truth_mr, truth_rb), config.estimator_options())
    except EstimationError as e:
        log.warning(f"trial {trial} at grid point {grid} failed in {e.stage}: {e}")
        outcome.failure = (e.stage, f"{type(e.cause).__name__}: {e.cause}")
        return outcome

    if trace_dir is not None:
        for stage, sol in (("stage1", est.stage1), ("stage2", est.stage2)):
            anm.write_trace(sol, trace_dir / f"trace_g{grid}_t{trial}_{stage}.csv")

    sq = {
        "theta_mr": squared_error(est.theta_MR, truth_mr.aod),
        "phi_mr": squared_error(est.phi_MR, truth_mr.aoa),
        "rho_mr": squared_error(est.rho_MR, truth_mr.gains),
        "theta_rb": squared_error(est.theta_RB, truth_rb.aod),
        "phi_rb": squared_error(est.phi_RB, truth_rb.aoa),
        "rho_rb": squared_error(est.rho_RB, truth_rb.gains),
        "delta": squared_error(est.delta_hat, angle_differences(truth_mr.aoa, truth_rb.aod)),
    }
    status = _status(bool(est.warnings), singular, edge)
    try:
        design = design_phases(est.delta_vec, est.rho_prod, config.N_R)
        omega = np.diag(design.omega_star)
        if config.phase_design_baseline:
            randoms = random_phase_objectives(est.delta_vec, est.rho_prod, config.N_R, rng, BASELINE_DRAWS)
            outcome.baseline = (design.objective, float(np.mean(randoms)))
    except DegenerateError:
        status = "degenerate"
        omega = np.eye(config.N_R, dtype=complex)
    H_hat = cascade(est.H_RB_hat, omega, est.H_MR_hat)
    gain, error = _beamform(cascade(H_RB, omega, H_MR), H_hat, amp * beta2)

    row.update({f"mse_{key}": value for key, value in sq.items()})
    row["status"] = status
    outcome.row = row
    outcome.record = TrialRecord(sq, gain, error, overhead_hybrid(cfg), config.coherence_uses)
    return outcome


def _execute(config: ExperimentConfig, tasks, crlb_only: bool, trace_dir: Optional[Path]) -> List[TrialOutcome]:
    outcomes: List[TrialOutcome] = []
    progress = tqdm(total=len(tasks), desc=f"{config.name}", unit="trial", disable=None)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_trial, config, *task, crlb_only, trace_dir) for task in tasks]
            for future in as_completed(futures):
                outcomes.append(future.result())
                progress.update()
    else:
        for task in tasks:
            outcomes.append(run_trial(config, *task, crlb_only, trace_dir))
            progress.update()
    progress.close()
    return sorted(outcomes, key=lambda o: (o.grid, o.trial))


def _fill_se(config: ExperimentConfig, outcomes: List[TrialOutcome]) -> None:
    """SE needs the channel error variance over all trials of a grid point."""
    by_grid: Dict[int, List[TrialOutcome]] = {}
    for outcome in outcomes:
        if outcome.record is not None:
            by_grid.setdefault(outcome.grid, []).append(outcome)
    sigma2 = config.sigma2
    for group in by_grid.values():
        records = [o.record for o in group]
        terms = se_terms(records, sigma2, config.coherence_uses, records[0].T_H)
        for outcome, value in zip(group, terms):
            outcome.row["se_bits"] = float(value)


def run(
    config: ExperimentConfig,
    out_dir: str | Path,
    crlb_only: bool = False,
    trace_solver: bool = False,
    emit_plots: bool = False,
    distance: bool = False,
) -> RunSummary:
    """
    Run every (P_T, d_x) grid point for config.trials trials and write the CSV outputs.

    Rows and failures always add up to trials x grid points.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = config.grid(distance)
    tasks = [(g, t, p, d_x) for g, (p, d_x) in enumerate(grid) for t in range(config.trials)]
    trace_dir = out_dir / "traces" if trace_solver else None
    if trace_dir is not None:
        trace_dir.mkdir(exist_ok=True)
    log.info(f"Running {config.name}: {len(grid)} grid points x {config.trials} trials")

    outcomes = _execute(config, tasks, crlb_only, trace_dir)
    _fill_se(config, outcomes)

    stem = f"{config.name}_distance" if distance else config.name
    summary = RunSummary()
    results_path = out_dir / f"{stem}.csv"
    with ResultWriter(results_path, COLUMNS) as writer:
        for outcome in outcomes:
            if outcome.row is not None and outcome.failure is None:
                writer.add_row(outcome.row)
        summary.rows = writer.count
    failures_path = out_dir / "failures.csv"
    with ResultWriter(failures_path, FAILURE_COLUMNS, schema=None) as writer:
        for outcome in outcomes:
            if outcome.failure is not None:
                stage, message = outcome.failure
                writer.add_row(
                    {"setup": config.name, "p_t_dbm": outcome.p_t_dbm, "d_x_m": outcome.d_x, "trial": outcome.trial, "stage": stage, "error": message}
                )
        summary.failures = writer.count
    summary.outputs += [results_path, failures_path]

    if config.phase_design_baseline and not crlb_only:
        baseline_path = out_dir / "phase_baseline.csv"
        with ResultWriter(baseline_path, BASELINE_COLUMNS, schema=None) as writer:
            for outcome in outcomes:
                if outcome.baseline is not None:
                    designed, random_mean = outcome.baseline
                    writer.add_row(
                        {"setup": config.name, "p_t_dbm": outcome.p_t_dbm, "d_x_m": outcome.d_x, "trial": outcome.trial, "designed": designed, "random_mean": random_mean}
                    )
        summary.outputs.append(baseline_path)

    if emit_plots:
        summary.outputs.append(emit_plot_script(results_path))
    if summary.failures:
        log.warning(f"{summary.failures} of {len(tasks)} trials failed, see {failures_path}")
    log.info(f"Wrote {summary.rows} rows to {results_path}")
    return summary


def _trend(values: Sequence[float]) -> str:
    finite = [v for v in values if np.isfinite(v)]
    if len(finite) < 2:
        return "undetermined"
    steps = np.diff(finite)
    if np.all(steps > 0):
        return "increasing"
    if np.all(steps < 0):
        return "decreasing"
    return "non_monotone"


def sweep_distance(
    config: ExperimentConfig,
    out_dir: str | Path,
    crlb_only: bool = False,
    trace_solver: bool = False,
    emit_plots: bool = False,
) -> RunSummary:
    """
    Fixed power, varying RIS-MS offset. Writes the run CSV plus a summary of per d_x
    median MSEs and a final trend row.
    """
    summary = run(config, out_dir, crlb_only, trace_solver, emit_plots, distance=True)
    results_path = summary.outputs[0]
    medians: Dict[float, Dict[str, List[float]]] = {}
    counts: Dict[float, int] = {}
    for record in read_results(results_path):
        d_x = float(record["d_x_m"])
        counts[d_x] = counts.get(d_x, 0) + 1
        medians.setdefault(d_x, {key: [] for key in MSE_KEYS})
        for key in MSE_KEYS:
            medians[d_x][key].append(float(record[f"mse_{key}"]))

    summary_path = Path(out_dir) / f"{config.name}_summary.csv"
    with ResultWriter(summary_path, SUMMARY_COLUMNS) as writer:
        per_key: Dict[str, List[float]] = {key: [] for key in MSE_KEYS}
        for d_x in config.d_x:
            row: Dict[str, object] = {"d_x_m": float(d_x), "rows": counts.get(float(d_x), 0)}
            for key in MSE_KEYS:
                values = medians.get(float(d_x), {}).get(key, [])
                # crlb_only rows carry NaN MSEs
                value = float("nan") if not values or np.all(np.isnan(values)) else float(np.nanmedian(values))
                per_key[key].append(value)
                row[f"median_mse_{key}"] = value
            writer.add_row(row)
        trend: Dict[str, object] = {"d_x_m": "trend", "rows": sum(counts.values())}
        trend.update({f"median_mse_{key}": _trend(per_key[key]) for key in MSE_KEYS})
        writer.add_row(trend)
    summary.outputs.append(summary_path)
    return summary


def read_results(csv_path: str | Path) -> List[Dict[str, str]]:
    """
    Parse a results CSV, skipping comment lines.

    Raises :
        PlotParseError on a wrong header or a malformed row, with its line number
    """
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise PlotParseError(f"results file not found: {csv_path}")
    rows: List[Dict[str, str]] = []
    header: Optional[List[str]] = None
    with open(csv_path, newline="") as file:
        for line_no, fields in enumerate(csv.reader(file), start=1):
            if not fields or fields[0].startswith("#"):
                continue
            if header is None:
                if tuple(fields) != COLUMNS:
                    raise PlotParseError(f"unexpected header {fields}", line_no)
                header = fields
                continue
            if len(fields) != len(COLUMNS):
                raise PlotParseError(f"expected {len(COLUMNS)} fields, got {len(fields)}", line_no)
            try:
                for name in COLUMNS[1:-1]:
                    float(fields[COLUMNS.index(name)])
            except ValueError as e:
                raise PlotParseError(f"non numeric value: {e}", line_no) from e
            rows.append(dict(zip(COLUMNS, fields)))
    if header is None:
        raise PlotParseError("missing header", None)
    return rows


def emit_plot_script(csv_path: str | Path, script_path: Optional[str | Path] = None) -> Path:
    """
    Write a gnuplot script plotting mean MSE(theta_MR) against P_T on a log axis and the
    mean SE against P_T, one labelled curve per setup found in the CSV.
    """
    csv_path = Path(csv_path)
    rows = read_results(csv_path)
    script_path = Path(script_path) if script_path else csv_path.with_suffix(".gp")

    series: Dict[str, Dict[float, Dict[str, List[float]]]] = {}
    for row in rows:
        point = series.setdefault(row["setup"], {}).setdefault(float(row["p_t_dbm"]), {"mse": [], "se": []})
        point["mse"].append(float(row["mse_theta_mr"]))
        point["se"].append(float(row["se_bits"]))

    lines = [
        f"# gnuplot script for {csv_path.name}",
        'set datafile separator " "',
        "set terminal pngcairo size 900,600",
        "set grid",
        'set xlabel "P_T [dBm]"',
    ]
    if not series:
        lines.append(f"# warning: no data rows in {csv_path.name}")
    for setup, points in series.items():
        lines.append(f"${setup} << EOD")
        for p_t in sorted(points):
            mse = np.array(points[p_t]["mse"])
            se = np.array(points[p_t]["se"])
            mse_mean = float(np.mean(mse[np.isfinite(mse)])) if np.any(np.isfinite(mse)) else float("nan")
            se_mean = float(np.mean(se[np.isfinite(se)])) if np.any(np.isfinite(se)) else float("nan")
            lines.append(f"{p_t:g} {mse_mean:.10e} {se_mean:.10e}")
        lines.append("EOD")

    def _plot(column: int) -> str:
        if not series:
            return "plot NaN notitle"
        curves = [f'${setup} using 1:{column} with linespoints title "{setup}"' for setup in series]
        return "plot " + ", ".join(curves)

    lines += [
        f'set output "{csv_path.stem}_mse.png"',
        "set logscale y",
        'set ylabel "MSE theta_{M,R} [rad^2]"',
        _plot(2),
        f'set output "{csv_path.stem}_se.png"',
        "unset logscale y",
        'set ylabel "SE [bits/s/Hz]"',
        _plot(3),
    ]
    script_path.write_text("\n".join(lines) + "\n")
    log.info(f"Plot script written to {script_path}")
    return script_path
