"""
Natural-gradient online ICA.

W <- W + eta (I - phi(y) y^T) W with y = W z and phi = tanh, plus a symmetric
orthogonalization W <- (W W^T)^{-1/2} W = U V^T every ortho_period updates.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np

from reservoir_ica.errors import ConfigurationError, NumericalError

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12


@dataclass(frozen=True)
class DemixingState:
    """Demixing matrix and its update counters."""

    W: np.ndarray
    eta_base: float = 5e-3
    ortho_period: int = 50
    step_count: int = 0

    @classmethod
    def identity(cls, n: int, eta_base: float = 5e-3, ortho_period: int = 50) -> "DemixingState":
        if ortho_period < 1:
            raise ConfigurationError(f"ortho_period must be >= 1, got {ortho_period}")
        return cls(W=np.eye(n), eta_base=eta_base, ortho_period=ortho_period)


def symmetric_orthogonalize(W: np.ndarray) -> np.ndarray:
    """
    Return (W W^T)^{-1/2} W, the orthogonal matrix closest to W.

    Computed as the polar factor U V^T of W = U S V^T, which stays orthogonal to
    machine precision however ill-conditioned W is.

    Raises:
        NumericalError: If W is rank-deficient
    """
    U, s, Vt = np.linalg.svd(W)
    if s[-1] ** 2 <= EIGEN_FLOOR * max(s[0] ** 2, 1.0):
        raise NumericalError(
            f"Cannot orthogonalize a rank-deficient matrix (singular values {s})"
        )
    return U @ Vt


def natgrad_step(
    state: DemixingState,
    z: np.ndarray,
    eta: float,
    phi: Callable[[np.ndarray], np.ndarray] = np.tanh,
) -> tuple[DemixingState, np.ndarray]:
    """
    One natural-gradient update.

    Args:
        state: Current demixing state
        z: Whitened sample
        eta: Learning rate for this step (>= 0)
        phi: Score nonlinearity

    Returns:
        (new state, output y = W z computed before the update)

    Raises:
        NumericalError: If y or the updated W is non-finite
    """
    if eta < 0:
        raise ConfigurationError(f"Learning rate must be non-negative, got {eta}")

    W = state.W
    y = W @ z
    if not np.all(np.isfinite(y)):
        raise NumericalError("Non-finite ICA output")

    n = W.shape[0]
    W_new = W + eta * (np.eye(n) - np.outer(phi(y), y)) @ W
    step_count = state.step_count + 1
    if step_count % state.ortho_period == 0:
        W_new = symmetric_orthogonalize(W_new)
    if not np.all(np.isfinite(W_new)):
        raise NumericalError("Demixing matrix diverged")

    return replace(state, W=W_new, step_count=step_count), y
