"""
Batch FastICA baseline.

Parallel fixed-point extraction with symmetric decorrelation on PCA-whitened
data. Nonlinearities follow the usual negentropy contrasts:

- logcosh: g(u) = tanh(a u), g'(u) = a (1 - tanh(a u)^2)
- exp:     g(u) = u exp(-u^2 / 2), g'(u) = (1 - u^2) exp(-u^2 / 2)
- cube:    g(u) = u^3, g'(u) = 3 u^2
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from reservoir_ica.errors import ConfigurationError, DimensionError, NumericalError

logger = logging.getLogger(__name__)

Nonlinearity = Callable[[np.ndarray, float], np.ndarray]
Contrast = tuple[Nonlinearity, Nonlinearity]


def _logcosh(u: np.ndarray, a: float) -> np.ndarray:
    return np.tanh(a * u)


def _logcosh_prime(u: np.ndarray, a: float) -> np.ndarray:
    return a * (1.0 - np.tanh(a * u) ** 2)


def _exp(u: np.ndarray, a: float) -> np.ndarray:
    return u * np.exp(-(a * u**2) / 2.0)


def _exp_prime(u: np.ndarray, a: float) -> np.ndarray:
    return (1.0 - a * u**2) * np.exp(-(a * u**2) / 2.0)


def _cube(u: np.ndarray, a: float) -> np.ndarray:
    return u**3


def _cube_prime(u: np.ndarray, a: float) -> np.ndarray:
    return 3.0 * u**2


NONLINEARITIES: dict[str, Contrast] = {
    "logcosh": (_logcosh, _logcosh_prime),
    "exp": (_exp, _exp_prime),
    "cube": (_cube, _cube_prime),
}
DECORRELATIONS = ("symmetric", "iterative")


@dataclass(frozen=True)
class FastIcaConfig:
    nonlinearity: str = "logcosh"
    max_iter: int = 500
    tol: float = 1e-6
    decorrelation: str = "symmetric"
    seed: int = 0
    alpha: float = 1.0

    def __post_init__(self):
        if self.decorrelation not in DECORRELATIONS:
            raise ConfigurationError(
                f"Unknown decorrelation '{self.decorrelation}', expected one of {DECORRELATIONS}"
            )
        if self.nonlinearity not in NONLINEARITIES:
            raise ConfigurationError(
                f"Unknown nonlinearity '{self.nonlinearity}', "
                f"expected one of {sorted(NONLINEARITIES)}"
            )
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol <= 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")


class FastIcaResult(NamedTuple):
    Y: np.ndarray
    W: np.ndarray
    converged: bool
    iters: int


def symmetric_decorrelation(W: np.ndarray) -> np.ndarray:
    """Minimum-distance unitary mapping (W W^T)^{-1/2} W via SVD."""
    U, D, _ = linalg.svd(W)
    if D[-1] <= 0:
        raise NumericalError("Cannot decorrelate a rank-deficient unmixing matrix")
    return (U / D) @ U.T @ W


def iterative_decorrelation(W: np.ndarray, tol: float = 1e-5, max_iter: int = 1000) -> np.ndarray:
    """Symmetric decorrelation by the inversion-free iteration W <- 1.5 W - 0.5 W W^T W."""
    W = W / np.linalg.norm(W, 2)
    for _ in range(max_iter):
        W1 = 1.5 * W - 0.5 * W @ W.T @ W
        lim = float(np.max(np.abs(np.abs(np.diag(W1 @ W.T)) - 1.0)))
        W = W1
        if lim < tol:
            break
    return W


def pca_whiten(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Center rows and whiten to identity covariance.

    Returns:
        (Z, K) with Z = K (X - mean)
    """
    Xc = X - X.mean(axis=1, keepdims=True)
    cov = Xc @ Xc.T / Xc.shape[1]
    vals, vecs = linalg.eigh(cov)
    if vals[0] <= 1e-12 * max(vals[-1], 1.0):
        raise NumericalError(f"Mixture covariance is singular (eigenvalues {vals})")
    K = (vecs / np.sqrt(vals)).T
    return K @ Xc, K


def fastica_batch(X: np.ndarray, config: FastIcaConfig | None = None) -> FastIcaResult:
    """
    Parallel FastICA on the full mixture.

    Args:
        X: n x T mixture
        config: Solver settings

    Returns:
        FastIcaResult with unit-variance estimates Y (n x T), the unmixing matrix
        acting on whitened data, convergence flag and iteration count

    Raises:
        DimensionError: If X is not 2-D with more samples than channels
    """
    config = config or FastIcaConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] <= X.shape[0]:
        raise DimensionError(f"Expected an n x T mixture with T > n, got {X.shape}")

    g, g_prime = NONLINEARITIES[config.nonlinearity]
    Z, _ = pca_whiten(X)
    n, T = Z.shape

    decorrelate = (
        symmetric_decorrelation if config.decorrelation == "symmetric" else iterative_decorrelation
    )
    rng = np.random.default_rng(config.seed)
    W = decorrelate(rng.standard_normal((n, n)))

    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        wz = W @ Z
        W1 = g(wz, config.alpha) @ Z.T / T - np.diag(g_prime(wz, config.alpha).mean(axis=1)) @ W
        W1 = decorrelate(W1)
        lim = float(np.max(np.abs(np.abs(np.diag(W1 @ W.T)) - 1.0)))
        W = W1
        if lim < config.tol:
            converged = True
            break

    if not converged:
        logger.warning("FastICA did not converge in %d iterations", config.max_iter)
    else:
        logger.debug("FastICA converged in %d iterations", it)

    return FastIcaResult(Y=W @ Z, W=W, converged=converged, iters=it)
