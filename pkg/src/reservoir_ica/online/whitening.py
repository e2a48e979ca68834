"""
Streaming EMA whitening with periodic top-n eigendecomposition.

The running mean and covariance follow

    mu_t = lam mu_{t-1} + (1 - lam) u_t
    C_t  = lam C_{t-1} + (1 - lam) (u_t - mu_t)(u_t - mu_t)^T

and every refresh_period samples the loaded covariance C_t + eps I is
eigendecomposed to give W_wh = D_n^{-1/2} V_n^T. Basis and mean snapshot stay
frozen between refreshes.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from reservoir_ica.errors import (
    ConfigurationError,
    DataError,
    DimensionError,
    NotReadyError,
    NumericalError,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class WhiteningBasis:
    """Top-n eigenbasis and the whitening map built from it."""

    V_n: np.ndarray
    D_n: np.ndarray
    W_wh: np.ndarray
    mu_snapshot: np.ndarray


@dataclass(frozen=True)
class WhiteningState:
    """Running mean/covariance tracker."""

    mu: np.ndarray
    C: np.ndarray
    lam: float = 0.995
    eps_load: float = 1e-6
    refresh_period: int = 64
    steps_since_refresh: int = 0
    basis: WhiteningBasis | None = None

    @classmethod
    def initial(
        cls,
        m: int,
        lam: float = 0.995,
        eps_load: float = 1e-6,
        refresh_period: int = 64,
    ) -> "WhiteningState":
        """Start from mu = 0, C = I."""
        if not 0.0 <= lam < 1.0:
            raise ConfigurationError(f"Forgetting factor must be in [0, 1), got {lam}")
        if refresh_period < 1:
            raise ConfigurationError(f"refresh_period must be >= 1, got {refresh_period}")
        return cls(
            mu=np.zeros(m),
            C=np.eye(m),
            lam=lam,
            eps_load=eps_load,
            refresh_period=refresh_period,
        )

    @property
    def dim(self) -> int:
        return int(self.mu.shape[0])

    @property
    def refresh_due(self) -> bool:
        return self.steps_since_refresh >= self.refresh_period


def ema_update(state: WhiteningState, u: np.ndarray) -> WhiteningState:
    """
    Fold one sample into the running mean and covariance.

    The covariance residual uses the already-updated mean mu_t.

    Raises:
        DimensionError: If u does not have the tracked dimension
        DataError: If u contains NaN or Inf (state is left unchanged)
    """
    if u.shape != (state.dim,):
        raise DimensionError(f"Sample has shape {u.shape}, expected ({state.dim},)")
    if not np.all(np.isfinite(u)):
        raise DataError("Whitening input contains NaN or Inf")

    lam = state.lam
    mu = lam * state.mu + (1.0 - lam) * u
    resid = u - mu
    C = lam * state.C + (1.0 - lam) * np.outer(resid, resid)
    if np.max(np.abs(C - C.T)) > SYMMETRY_TOL:
        C = 0.5 * (C + C.T)

    return replace(state, mu=mu, C=C, steps_since_refresh=state.steps_since_refresh + 1)


def top_eigenbasis(C: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Top-n eigenpairs of a symmetric matrix, descending, with a fixed sign convention.

    Each eigenvector is flipped so that its largest-magnitude entry is positive.

    Returns:
        (eigenvalues of length n, m x n eigenvector matrix)
    """
    m = C.shape[0]
    if not 1 <= n <= m:
        raise ConfigurationError(f"Retained dimension n={n} must be in [1, {m}]")
    try:
        vals, vecs = linalg.eigh(C)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Eigendecomposition failed: {exc}") from exc

    order = np.argsort(vals, kind="stable")[::-1][:n]
    vals = vals[order]
    vecs = vecs[:, order]

    pivots = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivots, np.arange(n)])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


def refresh(state: WhiteningState, n: int, restrict_to: int | None = None) -> WhiteningBasis:
    """
    Recompute the top-n whitening basis from the loaded covariance.

    Args:
        state: Current tracker
        n: Retained dimension
        restrict_to: If given, only the leading `restrict_to` coordinates enter the
            eigendecomposition; the basis is zero on the remaining coordinates

    Returns:
        WhiteningBasis with W_wh = D_n^{-1/2} V_n^T and the current mean

    Raises:
        NumericalError: If the eigensolver fails or returns non-positive values
    """
    m = state.dim
    k = m if restrict_to is None else restrict_to
    C_loaded = state.C[:k, :k] + state.eps_load * np.eye(k)

    vals, vecs = top_eigenbasis(C_loaded, n)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise NumericalError(f"Whitening eigenvalues not strictly positive: {vals}")

    V_n = np.zeros((m, n))
    V_n[:k, :] = vecs
    W_wh = (V_n / np.sqrt(vals)).T

    return WhiteningBasis(V_n=V_n, D_n=vals, W_wh=W_wh, mu_snapshot=state.mu.copy())


def whiten(basis: WhiteningBasis | None, u: np.ndarray) -> np.ndarray:
    """
    Whiten one sample, z = W_wh (u - mu_snapshot).

    Raises:
        NotReadyError: If no basis has been computed yet
    """
    if basis is None:
        raise NotReadyError("No whitening basis yet; refresh() has not run")
    return basis.W_wh @ (u - basis.mu_snapshot)


def mark_refreshed(state: WhiteningState, basis: WhiteningBasis) -> WhiteningState:
    """Publish a new basis and reset the refresh counter."""
    return replace(state, basis=basis, steps_since_refresh=0)
