"""
Multi-seed experiment runner.

Implements:
- Seed-deterministic input generation shared by every method of a seed
- One scored run per (regime, method, sweep point, seed)
- Worker-pool dispatch with a single collector
- per_seed / aggregate / curves / diagnostics / overlay / errors CSV output
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from reservoir_ica.analysis.aggregation import aggregate_table
from reservoir_ica.analysis.metrics import evaluate_separation, overlay_frame, running_si_sdr
from reservoir_ica.data.mixing import (
    MixedStream,
    mix_nonlinear,
    mix_static,
    mix_time_varying,
    random_drift_matrix,
    random_mixing_matrix,
)
from reservoir_ica.data.signals import SourceMatrix, generate_sources
from reservoir_ica.errors import ReservoirIcaError
from reservoir_ica.experiments.config import ExperimentSpec
from reservoir_ica.online.pipeline import RunConfig, run_method, steady_state_diagnostics
from reservoir_ica.seeding import derive_seed

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["arch", "N", "eps"]
DIAGNOSTIC_KEYS = ["ier", "sso", "rho_x", "coherence"]

OUTPUT_FILES = {
    "per_seed": "per_seed.csv",
    "aggregate": "aggregate.csv",
    "curves": "curves.csv",
    "diagnostics": "diagnostics.csv",
    "overlay": "overlay.csv",
    "errors": "errors.csv",
}


@dataclass
class RunOutcome:
    """Everything one run contributes to the output tables."""

    key: dict[str, Any]
    per_seed: dict[str, Any] | None = None
    curve: pd.DataFrame | None = None
    diagnostics: pd.DataFrame | None = None
    overlay: pd.DataFrame | None = None
    error: dict[str, Any] | None = None
    elapsed_s: float = 0.0


@dataclass
class ExperimentResult:
    per_seed: pd.DataFrame
    aggregate: pd.DataFrame
    curves: pd.DataFrame
    diagnostics: pd.DataFrame
    overlay: pd.DataFrame
    errors: pd.DataFrame
    paths: dict[str, Path] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return len(self.errors) > 0


def run_seed(master_seed: int, seed: int) -> int:
    """Run-level seed from which every component stream is derived."""
    return derive_seed(master_seed, seed, "run")


def generate_inputs(
    config: RunConfig,
    kinds: list[str],
) -> tuple[SourceMatrix, MixedStream]:
    """
    Sources and observations for one run.

    Streams are derived from config.seed and component tags only, so every
    method at the same (seed, sweep point) sees identical inputs.
    """
    S = generate_sources(kinds, config.T, derive_seed(config.seed, "sources"))
    A0 = random_mixing_matrix(config.n, config.cond_max, derive_seed(config.seed, "mixing"))

    if config.regime == "static":
        return S, mix_static(A0, S)
    if config.regime == "time_varying":
        delta = random_drift_matrix(A0, derive_seed(config.seed, "drift"))
        return S, mix_time_varying(A0, delta, config.epsilon, config.drift_frequency, S)
    X = mix_nonlinear(A0, config.gamma, config.snr_db, S, derive_seed(config.seed, "noise"))
    return S, X


def _sweep_values(config: RunConfig) -> dict[str, Any]:
    return {"arch": config.architecture, "N": config.N, "eps": config.epsilon}


def run_one(
    spec: ExperimentSpec,
    regime: str,
    method: str,
    seed: int,
    point: dict[str, Any],
) -> RunOutcome:
    """
    Generate inputs, run one method and score it.

    Failures inside the library are captured in RunOutcome.error instead of
    propagating, so one bad run never stops the experiment.
    """
    started = time.perf_counter()
    key: dict[str, Any] = {"regime": regime, "method": method, "seed": seed}
    try:
        config = spec.run_config(regime, method, run_seed(spec.master_seed, seed), point)
        key = {"regime": regime, "method": method, **_sweep_values(config), "seed": seed}

        S, X = generate_inputs(config, spec.source_kinds)
        trace = run_method(config, S, X)

        report = evaluate_separation(S.data, trace.Y, window=spec.eval_window, max_lag=spec.max_lag)
        diag = steady_state_diagnostics(trace, window=spec.eval_window)
        per_seed = {
            **key,
            "si_sdr_sc_mean": report.si_sdr_sc_mean,
            **{f"per_source_{i + 1}": v for i, v in enumerate(report.si_sdr_sc)},
            "mean_abs_corr": report.mean_abs_corr,
            **{k: diag[k] for k in DIAGNOSTIC_KEYS},
        }

        curve = running_si_sdr(
            S.data,
            trace.Y,
            window=spec.curve_window,
            stride=spec.curve_stride,
            start=config.warmup,
        )
        curve = curve.assign(**key)

        diagnostics = None
        if trace.diag_trace:
            diagnostics = pd.DataFrame(
                {
                    "refresh_step": trace.refresh_steps,
                    "alpha": trace.alpha_trace,
                    **{k: [getattr(d, k) for d in trace.diag_trace] for k in DIAGNOSTIC_KEYS},
                }
            ).assign(**key)

        overlay = overlay_frame(S.data, trace.Y, length=spec.overlay_length).assign(**key)

    except ReservoirIcaError as exc:
        elapsed = time.perf_counter() - started
        logger.error("Run %s failed: %s: %s", key, type(exc).__name__, exc)
        return RunOutcome(
            key=key,
            error={
                **key,
                "error_type": type(exc).__name__,
                "message": str(exc),
                "step": getattr(exc, "step", None),
            },
            elapsed_s=elapsed,
        )

    elapsed = time.perf_counter() - started
    logger.info(
        "Run %s/%s seed=%d done in %.1fs: SI-SDR_sc %.2f dB",
        regime,
        method,
        seed,
        elapsed,
        report.si_sdr_sc_mean,
    )
    if trace.esp_margin is not None:
        logger.debug("Run %s ESP margin %.4f", key, trace.esp_margin)
    return RunOutcome(
        key=key,
        per_seed=per_seed,
        curve=curve,
        diagnostics=diagnostics,
        overlay=overlay,
        elapsed_s=elapsed,
    )


def _run_task(task: tuple) -> RunOutcome:
    return run_one(*task)


def _tasks(spec: ExperimentSpec) -> list[tuple]:
    return [
        (spec, regime, method, seed, point)
        for regime in spec.regimes
        for point in spec.sweep_points()
        for method in spec.methods
        for seed in spec.seeds
    ]


def _concat(frames: list[pd.DataFrame], columns: list[str]) -> pd.DataFrame:
    frames = [f for f in frames if f is not None and len(f) > 0]
    if not frames:
        return pd.DataFrame(columns=columns)
    combined = pd.concat(frames, ignore_index=True)
    leading = [c for c in columns if c in combined.columns]
    return combined[leading + [c for c in combined.columns if c not in leading]]


def collect(outcomes: list[RunOutcome], reference: str) -> ExperimentResult:
    """Assemble output tables from run outcomes in task order."""
    key_cols = ["regime", "method", *SWEEP_COLUMNS, "seed"]
    per_seed = pd.DataFrame([o.per_seed for o in outcomes if o.per_seed is not None])
    if len(per_seed) == 0:
        per_seed = pd.DataFrame(columns=key_cols)
    curves = _concat([o.curve for o in outcomes], ["regime", "method", "seed", "t"])
    diagnostics = _concat(
        [o.diagnostics for o in outcomes],
        ["regime", "method", "seed", "refresh_step", "alpha", *DIAGNOSTIC_KEYS],
    )
    overlay = _concat(
        [o.overlay for o in outcomes],
        ["regime", "method", "seed", "source", "t", "true", "estimate"],
    )
    errors = pd.DataFrame(
        [o.error for o in outcomes if o.error is not None],
        columns=[*key_cols, "error_type", "message", "step"],
    )
    aggregate = aggregate_table(per_seed, reference=reference)
    return ExperimentResult(
        per_seed=per_seed,
        aggregate=aggregate,
        curves=curves,
        diagnostics=diagnostics,
        overlay=overlay,
        errors=errors,
    )


def write_outputs(result: ExperimentResult, output_dir: Path) -> dict[str, Path]:
    """Write every table as CSV; floats use shortest round-trip text, inf as 'inf'."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, filename in OUTPUT_FILES.items():
        path = output_dir / filename
        getattr(result, name).to_csv(path, index=False)
        paths[name] = path
        logger.info("Wrote %s", path)
    return paths


def run_experiment(spec: ExperimentSpec, write: bool = True) -> ExperimentResult:
    """
    Run the full grid and emit CSVs.

    Args:
        spec: Validated experiment definition
        write: Write CSVs to spec.output_dir

    Returns:
        ExperimentResult; failed runs appear in .errors and nowhere else
    """
    tasks = _tasks(spec)
    logger.info(
        "Starting %d runs (%d regimes x %d methods x %d seeds x %d sweep points), jobs=%d",
        len(tasks),
        len(spec.regimes),
        len(spec.methods),
        len(spec.seeds),
        len(spec.sweep_points()),
        spec.jobs,
    )
    started = time.perf_counter()

    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            outcomes = list(pool.map(_run_task, tasks))
    else:
        outcomes = [_run_task(task) for task in tasks]

    result = collect(outcomes, spec.reference)
    if write:
        result.paths = write_outputs(result, spec.output_dir)

    n_failed = len(result.errors)
    logger.info(
        "Finished %d runs in %.1fs (%d failed)",
        len(tasks),
        time.perf_counter() - started,
        n_failed,
    )
    if n_failed:
        logger.warning("%d runs failed; see %s", n_failed, OUTPUT_FILES["errors"])
    return result


def summarize(aggregate: pd.DataFrame) -> pd.DataFrame:
    """Compact mean +/- SEM view of an aggregate table for console output."""
    if len(aggregate) == 0:
        return aggregate
    view = aggregate[["regime", "arch", "N", "eps", "method", "n_seeds"]].copy()
    view["si_sdr_sc"] = [
        f"{m:.2f} +/- {s:.2f}" if np.isfinite(s) else f"{m:.2f}"
        for m, s in zip(aggregate["si_sdr_sc_mean"], aggregate["si_sdr_sc_sem"], strict=True)
    ]
    view["mean_abs_corr"] = aggregate["mean_abs_corr_mean"].round(3)
    view["wins"] = [
        "" if pd.isna(w) else f"{w}/{p}"
        for w, p in zip(aggregate["win_count"], aggregate["n_paired"], strict=True)
    ]
    return view
