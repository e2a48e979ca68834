"""
RE-OICA pipeline orchestration.

Per sample t (1-based):
1. reservoir step (or memoryless random features) and readout p_t
2. u_t = [x_t; alpha_t p_t] folded into the EMA mean/covariance
3. every refresh_period samples: top-n refresh, RSI diagnostics, alpha update
4. z_t = W_wh (u_t - mu) and a natural-gradient step with the ramped rate

ICA is frozen (output only) during warm-up; whitening and the reservoir run
from the first sample. The vanilla baseline is the same backend on x_t alone.
"""

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from reservoir_ica.data.mixing import REGIMES, MixedStream
from reservoir_ica.data.signals import SourceMatrix
from reservoir_ica.errors import ConfigurationError, DataError, DimensionError, NumericalError
from reservoir_ica.online.ica import DemixingState, natgrad_step
from reservoir_ica.online.reservoir import (
    ARCHITECTURES,
    ReservoirConfig,
    ReservoirParams,
    ReservoirState,
    esn_step,
    esp_margin,
    init_esn,
    readout,
    rf_features,
    spectral_radius,
)
from reservoir_ica.online.rsi import RsiDiagnostics, RsiState, controller_step, diagnostics
from reservoir_ica.online.whitening import (
    WhiteningState,
    ema_update,
    mark_refreshed,
    refresh,
    whiten,
)
from reservoir_ica.seeding import derive_seed

logger = logging.getLogger(__name__)

METHODS: tuple[str, ...] = (
    "reoica_base",
    "reoica_sqrt",
    "reoica_rsi_guarded",
    "reoica_rsi_unguarded",
    "vanilla",
    "fastica",
)
RESERVOIR_METHODS: tuple[str, ...] = METHODS[:4]

# Readout normalization and controller mode per branch
METHOD_READOUT_SCALING = {
    "reoica_base": "inv_n",
    "reoica_sqrt": "inv_sqrt_n",
    "reoica_rsi_guarded": "inv_n",
    "reoica_rsi_unguarded": "inv_sqrt_n",
}
METHOD_CONTROLLER = {
    "reoica_base": "fixed",
    "reoica_sqrt": "fixed",
    "reoica_rsi_guarded": "guarded",
    "reoica_rsi_unguarded": "unguarded",
}


@dataclass
class RunConfig:
    """Everything one run needs; defaults are the published desk-scale protocol."""

    method: str = "reoica_base"
    regime: str = "nonlinear"
    T: int = 15_000
    seed: int = 0

    # Dimensions
    n: int = 3
    N: int = 500
    d: int = 20
    architecture: str = "esn"

    # Reservoir
    density: float = 0.05
    spectral_radius: float = 0.95
    leak_rate: float = 0.1
    input_scaling: float = 0.1
    bias_scale: float = 0.1
    readout_scaling: str | None = None

    # Whitening
    forgetting: float = 0.995
    loading: float = 1e-6
    refresh_period: int = 64
    passthrough_only: bool = False

    # ICA
    eta: float = 5e-3
    ortho_period: int = 50
    warmup: int = 1000
    ramp: int = 2000

    # RSI controller
    ier_target: float = 0.25
    rho_x_target: float = 0.95
    kappa: float = 0.3
    kappa_g: float = 3.0
    alpha_min: float = 0.1
    alpha_max: float = 10.0
    alpha_init: float = 1.0
    fixed_alpha: float | None = None

    # Mixing regime
    epsilon: float = 0.3
    drift_frequency: float = 0.5
    gamma: float = 0.8
    snr_db: float | None = 10.0
    cond_max: float = 5.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"Unknown method '{self.method}'. Expected {METHODS}")
        if self.regime not in REGIMES:
            raise ConfigurationError(f"Unknown regime '{self.regime}'. Expected {REGIMES}")
        if self.architecture not in ARCHITECTURES:
            raise ConfigurationError(
                f"Unknown architecture '{self.architecture}'. Expected {ARCHITECTURES}"
            )
        if self.warmup + self.ramp >= self.T:
            raise ConfigurationError(
                f"warmup + ramp ({self.warmup + self.ramp}) must be below T={self.T}"
            )
        if self.N < self.d:
            raise ConfigurationError(f"N={self.N} must be at least d={self.d}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if not self.uses_reservoir and (self.passthrough_only or self.fixed_alpha is not None):
            raise ConfigurationError(
                f"passthrough_only/fixed_alpha only apply to reservoir methods, not '{self.method}'"
            )

    @property
    def uses_reservoir(self) -> bool:
        return self.method in RESERVOIR_METHODS

    def reservoir_config(self) -> ReservoirConfig:
        scaling = self.readout_scaling or METHOD_READOUT_SCALING.get(self.method, "inv_n")
        return ReservoirConfig(
            density=self.density,
            spectral_radius=self.spectral_radius,
            leak_rate=self.leak_rate,
            input_scaling=self.input_scaling,
            bias_scale=self.bias_scale,
            readout_scaling=scaling,
            mode=self.architecture,
        )

    def rsi_state(self) -> RsiState:
        mode = METHOD_CONTROLLER[self.method]
        alpha = self.alpha_init
        if self.fixed_alpha is not None:
            mode, alpha = "fixed", self.fixed_alpha
        return RsiState.for_mode(
            mode,
            alpha=alpha,
            alpha_min=self.alpha_min,
            alpha_max=self.alpha_max,
            ier_target=self.ier_target,
            rho_target=self.rho_x_target,
            kappa=self.kappa,
            kappa_g=self.kappa_g,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunTrace:
    """Outputs and per-refresh traces of one run."""

    Y: np.ndarray
    alpha_trace: np.ndarray
    diag_trace: list[RsiDiagnostics]
    refresh_steps: np.ndarray
    source_ref: SourceMatrix
    mixed_ref: MixedStream
    method: str = ""
    esp_margin: float | None = None
    spectral_radius: float | None = None
    det_sign_flips: int = 0
    converged: bool | None = None
    elapsed_s: float = 0.0
    extras: dict = field(default_factory=dict)


def lr_schedule(t: int, warmup: int = 1000, ramp: int = 2000, eta_base: float = 5e-3) -> float:
    """
    Learning rate at 1-based step t.

    0 through warm-up, then a linear ramp to eta_base over `ramp` steps.
    """
    if t <= warmup:
        return 0.0
    if ramp > 0 and t <= warmup + ramp:
        return eta_base * (t - warmup) / ramp
    return eta_base


def _check_inputs(config: RunConfig, S: SourceMatrix, X: MixedStream) -> np.ndarray:
    data = np.asarray(X.data, dtype=float)
    if data.shape != (config.n, config.T):
        raise DimensionError(
            f"Observations have shape {data.shape}, expected {(config.n, config.T)}"
        )
    if S.data.shape != data.shape:
        raise DimensionError(f"Sources {S.data.shape} and observations {data.shape} differ")
    if X.regime != config.regime:
        raise ConfigurationError(f"Stream regime '{X.regime}' does not match '{config.regime}'")
    return data


def _run_online(
    config: RunConfig,
    S: SourceMatrix,
    X: MixedStream,
    params: ReservoirParams | None,
) -> RunTrace:
    """Shared streaming backend; params=None gives the vanilla (passthrough-only) run."""
    data = _check_inputs(config, S, X)
    n, T = config.n, config.T
    started = time.perf_counter()

    m = n if params is None else n + params.readout_dim
    wh = WhiteningState.initial(
        m, lam=config.forgetting, eps_load=config.loading, refresh_period=config.refresh_period
    )
    rsi = config.rsi_state() if params is not None else None
    ica = DemixingState.identity(n, eta_base=config.eta, ortho_period=config.ortho_period)
    r_state = ReservoirState.zeros(params) if params is not None else None
    restrict_to = n if config.passthrough_only else None

    Y = np.zeros((n, T))
    vanilla_steps: list[int] = []
    det_sign = np.sign(np.linalg.det(ica.W))
    flips = 0

    for t in range(1, T + 1):
        x = data[:, t - 1]
        try:
            if params is None:
                u = x
            else:
                if params.mode == "esn":
                    r_state = esn_step(params, r_state, x)
                    features = r_state.r
                else:
                    features = rf_features(params, x)
                u = np.concatenate([x, rsi.alpha * readout(params, features)])

            wh = ema_update(wh, u)
            if wh.refresh_due:
                basis = refresh(wh, n, restrict_to=restrict_to)
                if rsi is not None:
                    rsi = controller_step(rsi, diagnostics(wh.C, basis.V_n, n), step=t)
                else:
                    vanilla_steps.append(t)
                wh = mark_refreshed(wh, basis)

            if wh.basis is None:
                continue
            z = whiten(wh.basis, u)

            if t <= config.warmup:
                Y[:, t - 1] = ica.W @ z
                continue
            eta = lr_schedule(t, config.warmup, config.ramp, config.eta)
            ica, y = natgrad_step(ica, z, eta)
            Y[:, t - 1] = y
        except (NumericalError, DataError) as exc:
            raise NumericalError(f"{config.method} run failed: {exc}", step=t) from exc

        new_sign = np.sign(np.linalg.det(ica.W))
        if new_sign != det_sign:
            flips += 1
            if flips == 1:
                logger.warning("det(W) changed sign at step %d (%s)", t, config.method)
            det_sign = new_sign

    if rsi is not None:
        refresh_steps = np.array([step for step, _, _ in rsi.history], dtype=int)
        alpha_trace = rsi.alpha_trace
        diag_trace = [diag for _, _, diag in rsi.history]
    else:
        refresh_steps = np.array(vanilla_steps, dtype=int)
        alpha_trace = np.array([])
        diag_trace = []

    return RunTrace(
        Y=Y,
        alpha_trace=alpha_trace,
        diag_trace=diag_trace,
        refresh_steps=refresh_steps,
        source_ref=S,
        mixed_ref=X,
        method=config.method,
        det_sign_flips=flips,
        elapsed_s=time.perf_counter() - started,
    )


def build_reservoir(config: RunConfig) -> ReservoirParams:
    """Reservoir for a run; its seed depends only on the run seed."""
    return init_esn(
        config.n,
        config.N,
        config.d,
        config.reservoir_config(),
        seed=derive_seed(config.seed, "reservoir"),
    )


def run_reoica(
    config: RunConfig,
    S: SourceMatrix,
    X: MixedStream,
    params: ReservoirParams | None = None,
) -> RunTrace:
    """
    Run RSI-controlled reservoir-expanded online ICA.

    Args:
        config: Run configuration (method must be a reservoir branch)
        S: Ground-truth sources (kept on the trace for scoring)
        X: Observations generated under config.regime
        params: Prebuilt reservoir; built from config.seed when omitted

    Returns:
        RunTrace with per-refresh alpha and diagnostics

    Raises:
        NumericalError: With the failing step index attached
    """
    if not config.uses_reservoir:
        raise ConfigurationError(f"run_reoica needs a reservoir method, got '{config.method}'")
    params = params or build_reservoir(config)
    trace = _run_online(config, S, X, params)
    trace.spectral_radius = spectral_radius(params.W_res)
    trace.esp_margin = esp_margin(params)
    if trace.esp_margin >= 1.0:
        logger.debug(
            "ESP margin %.4f >= 1 (spectral radius %.4f); contraction not certified",
            trace.esp_margin,
            trace.spectral_radius,
        )
    return trace


def run_vanilla(config: RunConfig, S: SourceMatrix, X: MixedStream) -> RunTrace:
    """Same whitening + natural-gradient backend applied directly to x_t."""
    return _run_online(config, S, X, None)


def run_fastica(config: RunConfig, S: SourceMatrix, X: MixedStream) -> RunTrace:
    """Offline FastICA reference wrapped as a trace."""
    from reservoir_ica.analysis.fastica import FastIcaConfig, fastica_batch

    data = _check_inputs(config, S, X)
    started = time.perf_counter()
    result = fastica_batch(data, FastIcaConfig(seed=derive_seed(config.seed, "fastica")))
    return RunTrace(
        Y=result.Y,
        alpha_trace=np.array([]),
        diag_trace=[],
        refresh_steps=np.array([], dtype=int),
        source_ref=S,
        mixed_ref=X,
        method=config.method,
        converged=result.converged,
        elapsed_s=time.perf_counter() - started,
        extras={"iterations": result.iters},
    )


def run_method(config: RunConfig, S: SourceMatrix, X: MixedStream) -> RunTrace:
    """Dispatch to the runner for config.method."""
    if config.uses_reservoir:
        return run_reoica(config, S, X)
    if config.method == "vanilla":
        return run_vanilla(config, S, X)
    return run_fastica(config, S, X)


def steady_state_diagnostics(trace: RunTrace, window: int = 5000) -> dict[str, float]:
    """
    Mean RSI diagnostics over refreshes in the last `window` samples.

    Returns NaN entries for runs without diagnostics (vanilla, FastICA).
    """
    keys = ("ier", "sso", "rho_x", "coherence")
    if not trace.diag_trace:
        return dict.fromkeys(keys, float("nan")) | {"alpha": float("nan")}

    T = trace.Y.shape[1]
    mask = trace.refresh_steps > T - window
    selected = [d for d, keep in zip(trace.diag_trace, mask, strict=True) if keep]
    if not selected:
        selected = trace.diag_trace[-1:]
        mask = np.zeros_like(mask)
        mask[-1] = True

    summary = {key: float(np.mean([getattr(d, key) for d in selected])) for key in keys}
    summary["alpha"] = float(np.mean(trace.alpha_trace[mask]))
    return summary
