"""
Reservoir subspace injection (RSI) diagnostics and injection control.

For u_t = [x_t; alpha p_t] with covariance C and retained top-n basis V_n:

- E_x = tr(V_n^T P_x C P_x V_n), E_p = tr(V_n^T P_p C P_p V_n)
- IER = E_p / (E_x + E_p): retained-energy share of reservoir coordinates
- SSO = ||P_p V_n||_F^2 / n: share of the basis lying on reservoir coordinates
- rho_x = E_x / tr(C_xx): passthrough variance surviving truncation
- coherence = ||C_xp||_F / sqrt(||C_xx||_F ||C_pp||_F) (our operationalization
  of cross-block coherence)

The controller multiplies alpha by exp(delta) at each refresh with
delta = kappa (IER* - IER) - kappa_g [rho_x* - rho_x]_+ / rho_x*, then clips.
"""

import logging
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from reservoir_ica.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

ControllerMode = Literal["fixed", "guarded", "unguarded"]


@dataclass(frozen=True)
class RsiDiagnostics:
    """Subspace-retention diagnostics at one refresh."""

    ier: float
    sso: float
    rho_x: float
    coherence: float
    E_x: float
    E_p: float
    degenerate: bool = False


@dataclass(frozen=True)
class RsiState:
    """Injection scale and controller settings.

    history holds (refresh step, alpha in effect during the elapsed window,
    diagnostics) and is append-only.
    """

    alpha: float = 1.0
    alpha_min: float = 0.1
    alpha_max: float = 10.0
    ier_target: float = 0.25
    rho_target: float = 0.95
    kappa: float = 0.3
    kappa_g: float = 3.0
    guarded: bool = True
    adaptive: bool = True
    history: tuple[tuple[int, float, RsiDiagnostics], ...] = ()

    def __post_init__(self):
        if self.alpha_min > self.alpha_max:
            raise ConfigurationError(
                f"alpha_min={self.alpha_min} exceeds alpha_max={self.alpha_max}"
            )
        if self.adaptive and not self.alpha_min <= self.alpha <= self.alpha_max:
            raise ConfigurationError(
                f"alpha={self.alpha} outside [{self.alpha_min}, {self.alpha_max}]"
            )
        if self.rho_target <= 0:
            raise ConfigurationError(f"rho_target must be positive, got {self.rho_target}")

    @classmethod
    def for_mode(cls, mode: ControllerMode, alpha: float = 1.0, **kwargs) -> "RsiState":
        """Fixed branches hold alpha; guarded/unguarded adapt it."""
        if mode == "fixed":
            return cls(alpha=alpha, adaptive=False, guarded=False, **kwargs)
        if mode == "guarded":
            return cls(alpha=alpha, adaptive=True, guarded=True, **kwargs)
        if mode == "unguarded":
            return cls(alpha=alpha, adaptive=True, guarded=False, **kwargs)
        raise ConfigurationError(f"Unknown controller mode '{mode}'")

    @property
    def alpha_trace(self) -> np.ndarray:
        return np.array([alpha for _, alpha, _ in self.history])


def diagnostics(C: np.ndarray, V_n: np.ndarray, n: int) -> RsiDiagnostics:
    """
    Compute IER, SSO, rho_x and cross-block coherence.

    Args:
        C: (n+d) x (n+d) covariance of u_t = [x_t; alpha p_t]
        V_n: (n+d) x k basis with orthonormal columns
        n: Passthrough dimension (leading coordinates of u_t)

    Returns:
        RsiDiagnostics; degenerate=True when E_x + E_p = 0 (IER set to 0) or
        tr(C_xx) = 0 (rho_x set to 0)
    """
    m = C.shape[0]
    if C.shape != (m, m) or V_n.shape[0] != m:
        raise DimensionError(f"Covariance {C.shape} and basis {V_n.shape} do not agree")
    if not 1 <= n <= m:
        raise DimensionError(f"Passthrough dimension n={n} must be in [1, {m}]")

    Vx = V_n[:n, :]
    Vp = V_n[n:, :]
    C_xx = C[:n, :n]
    C_pp = C[n:, n:]
    C_xp = C[:n, n:]

    E_x = float(np.trace(Vx.T @ C_xx @ Vx))
    E_p = float(np.trace(Vp.T @ C_pp @ Vp))
    degenerate = False

    total = E_x + E_p
    if total > 0:
        ier = E_p / total
    else:
        ier = 0.0
        degenerate = True

    sso = float(np.sum(Vp**2)) / V_n.shape[1]

    trace_xx = float(np.trace(C_xx))
    if trace_xx > 0:
        rho_x = E_x / trace_xx
    else:
        rho_x = 0.0
        degenerate = True

    norm_xx = np.linalg.norm(C_xx, "fro")
    norm_pp = np.linalg.norm(C_pp, "fro")
    denom = np.sqrt(norm_xx * norm_pp)
    coherence = float(np.linalg.norm(C_xp, "fro") / denom) if denom > 0 else 0.0

    return RsiDiagnostics(
        ier=float(np.clip(ier, 0.0, 1.0)),
        sso=float(np.clip(sso, 0.0, 1.0)),
        rho_x=float(rho_x),
        coherence=coherence,
        E_x=E_x,
        E_p=E_p,
        degenerate=degenerate,
    )


def control_signal(state: RsiState, diag: RsiDiagnostics) -> float:
    """Log-step delta; the rho_x penalty is dropped for unguarded control."""
    delta = state.kappa * (state.ier_target - diag.ier)
    if state.guarded:
        shortfall = max(state.rho_target - diag.rho_x, 0.0)
        delta -= state.kappa_g * shortfall / state.rho_target
    return float(delta)


def controller_step(state: RsiState, diag: RsiDiagnostics, step: int = 0) -> RsiState:
    """
    Update the injection scale from the diagnostics of the refresh just taken.

    alpha <- clip(alpha exp(delta), alpha_min, alpha_max). Non-adaptive states keep
    alpha and only record history.

    Args:
        state: Current controller state
        diag: Diagnostics computed with the alpha in effect since the last refresh
        step: Sample index of the refresh (recorded in history)

    Returns:
        New RsiState with history appended
    """
    history = (*state.history, (step, state.alpha, diag))
    if not state.adaptive:
        return replace(state, history=history)

    delta = control_signal(state, diag)
    alpha = float(np.clip(state.alpha * np.exp(delta), state.alpha_min, state.alpha_max))
    logger.debug(
        "RSI step %d: IER=%.4f rho_x=%.4f delta=%.4f alpha %.4f -> %.4f",
        step,
        diag.ier,
        diag.rho_x,
        delta,
        state.alpha,
        alpha,
    )
    return replace(state, alpha=alpha, history=history)


def entry_condition(C_xx: np.ndarray, C_pp: np.ndarray, alpha: float) -> bool:
    """
    Block-diagonal entry certificate: lambda_max(alpha^2 C_pp) > lambda_n(C_xx).

    When it holds and C is block-diagonal, at least one top-n eigenvector has
    reservoir coordinates, so SSO > 0 and rho_x < 1.
    """
    # PSD by precondition; clamp roundoff below zero
    lam_n = max(float(np.linalg.eigvalsh(C_xx)[0]), 0.0)
    lam_max = float(np.linalg.eigvalsh(alpha**2 * C_pp)[-1])
    return lam_max > lam_n
