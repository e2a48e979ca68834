"""
Echo-state reservoir encoder and readout projection.

Implements:
- Sparse ESN construction scaled to a target spectral radius
- Leaky state update r' = (1 - a) r + a tanh(W_in x + W_res r + b)
- Memoryless random features tanh(W_in x + b)
- Readout p = c_N W_read r
- Echo-state margin rho_eff = (1 - a) + a ||W_res||_2
"""

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from reservoir_ica.errors import ConfigurationError, DimensionError, ReservoirModeError

logger = logging.getLogger(__name__)

Architecture = Literal["esn", "random_features"]
ARCHITECTURES: tuple[str, ...] = ("esn", "random_features")

ReadoutScaling = Literal["inv_n", "inv_sqrt_n"]
READOUT_SCALINGS: tuple[str, ...] = ("inv_n", "inv_sqrt_n")

# Below this size the spectral radius comes from a dense eigensolver
DENSE_EIGEN_MAX_N = 100


@dataclass(frozen=True)
class ReservoirConfig:
    """Reservoir hyperparameters (defaults follow the published protocol)."""

    density: float = 0.05
    spectral_radius: float = 0.95
    leak_rate: float = 0.1
    input_scaling: float = 0.1
    bias_scale: float = 0.1
    readout_scaling: ReadoutScaling = "inv_n"
    mode: Architecture = "esn"

    def __post_init__(self):
        if not 0.0 < self.density <= 1.0:
            raise ConfigurationError(f"density must be in (0, 1], got {self.density}")
        if self.spectral_radius < 0:
            raise ConfigurationError(
                f"spectral_radius must be non-negative, got {self.spectral_radius}"
            )
        if not 0.0 < self.leak_rate <= 1.0:
            raise ConfigurationError(f"leak_rate must be in (0, 1], got {self.leak_rate}")
        if self.readout_scaling not in READOUT_SCALINGS:
            raise ConfigurationError(
                f"Unknown readout_scaling '{self.readout_scaling}'. Expected {READOUT_SCALINGS}"
            )
        if self.mode not in ARCHITECTURES:
            raise ConfigurationError(f"Unknown mode '{self.mode}'. Expected {ARCHITECTURES}")


@dataclass(frozen=True)
class ReservoirParams:
    """Fixed random reservoir weights. Immutable and safe to share across runs."""

    W_in: np.ndarray
    W_res: sparse.csr_matrix
    b: np.ndarray
    W_read: np.ndarray
    c_N: float
    alpha_r: float
    rho_target: float
    c_in: float
    mode: Architecture = "esn"

    @property
    def size(self) -> int:
        return int(self.W_in.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.W_in.shape[1])

    @property
    def readout_dim(self) -> int:
        return int(self.W_read.shape[0])


@dataclass
class ReservoirState:
    """Current reservoir state r_t."""

    r: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @classmethod
    def zeros(cls, params: ReservoirParams) -> "ReservoirState":
        return cls(r=np.zeros(params.size))


def spectral_radius(W: sparse.spmatrix | np.ndarray, seed: int = 0) -> float:
    """
    Largest eigenvalue modulus of a square matrix.

    Uses implicitly restarted Arnoldi (ARPACK) with a fixed starting vector for
    large matrices and falls back to a dense eigensolver for small ones or when
    ARPACK does not converge.
    """
    n = W.shape[0]
    if sparse.issparse(W) and W.nnz == 0:
        return 0.0
    if n <= DENSE_EIGEN_MAX_N:
        dense = W.toarray() if sparse.issparse(W) else np.asarray(W)
        return float(np.max(np.abs(np.linalg.eigvals(dense))))

    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        vals = eigs(W, k=1, which="LM", v0=v0, tol=1e-10, maxiter=20 * n, return_eigenvectors=False)
        return float(np.abs(vals[0]))
    except ArpackNoConvergence:
        logger.warning("ARPACK did not converge for N=%d; using dense eigensolver", n)
        dense = W.toarray() if sparse.issparse(W) else np.asarray(W)
        return float(np.max(np.abs(np.linalg.eigvals(dense))))


def operator_norm(
    W: sparse.spmatrix | np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> float:
    """
    Induced 2-norm (largest singular value) by power iteration on W^T W.

    W^T W is symmetric PSD, so the Rayleigh quotient converges monotonically to
    its top eigenvalue; iteration stops on the residual ||M x - lam x||.
    """
    n = W.shape[1]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)

    lam = 0.0
    for _ in range(max_iter):
        y = W.T @ (W @ x)
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            return 0.0
        lam = float(x @ y)
        x_new = y / y_norm
        res = np.linalg.norm(W.T @ (W @ x_new) - lam * x_new)
        x = x_new
        if res <= tol * max(lam, 1.0):
            break
    return float(np.sqrt(max(lam, 0.0)))


def _readout_constant(N: int, scaling: ReadoutScaling) -> float:
    return 1.0 / N if scaling == "inv_n" else 1.0 / np.sqrt(N)


def init_esn(
    n: int,
    N: int,
    d: int,
    config: ReservoirConfig | None = None,
    seed: int = 0,
) -> ReservoirParams:
    """
    Build a fixed random reservoir.

    W_res entries are nonzero independently with probability `density`, nonzeros
    standard Gaussian, then the matrix is rescaled to the target spectral radius.
    W_in ~ U[-1, 1] * c_in, b ~ U[-bias_scale, bias_scale], W_read ~ N(0, 1).

    Args:
        n: Input dimension
        N: Reservoir size
        d: Readout dimension (d <= N)
        config: Hyperparameters
        seed: Random seed

    Returns:
        ReservoirParams

    Raises:
        ConfigurationError: If N < d or any dimension is not positive
    """
    config = config or ReservoirConfig()
    if n < 1 or d < 1:
        raise ConfigurationError(f"Dimensions must be positive, got n={n}, d={d}")
    if N < d:
        raise ConfigurationError(f"Reservoir size N={N} must be at least readout dim d={d}")

    rng = np.random.default_rng(seed)
    W_in = rng.uniform(-1.0, 1.0, size=(N, n)) * config.input_scaling
    mask = rng.random((N, N)) < config.density
    values = rng.standard_normal((N, N))
    W_res = sparse.csr_matrix(np.where(mask, values, 0.0))
    b = rng.uniform(-config.bias_scale, config.bias_scale, size=N)
    W_read = rng.standard_normal((d, N))

    if config.spectral_radius == 0.0:
        W_res = sparse.csr_matrix((N, N))
    else:
        radius = spectral_radius(W_res, seed=seed)
        if radius > 0:
            W_res = (W_res * (config.spectral_radius / radius)).tocsr()
        else:
            logger.warning("Reservoir matrix is nilpotent (radius 0); left unscaled")

    params = ReservoirParams(
        W_in=W_in,
        W_res=W_res,
        b=b,
        W_read=W_read,
        c_N=_readout_constant(N, config.readout_scaling),
        alpha_r=config.leak_rate,
        rho_target=config.spectral_radius,
        c_in=config.input_scaling,
        mode=config.mode,
    )
    logger.debug(
        "Built %s reservoir N=%d d=%d density=%.3f c_N=%.4g",
        config.mode,
        N,
        d,
        W_res.nnz / (N * N),
        params.c_N,
    )
    return params


def esn_step(params: ReservoirParams, state: ReservoirState, x: np.ndarray) -> ReservoirState:
    """
    Leaky ESN update.

    r' = (1 - alpha_r) r + alpha_r tanh(W_in x + W_res r + b)
    """
    if x.shape != (params.input_dim,):
        raise DimensionError(f"Input has shape {x.shape}, expected ({params.input_dim},)")
    pre = params.W_in @ x + params.W_res @ state.r + params.b
    r = (1.0 - params.alpha_r) * state.r + params.alpha_r * np.tanh(pre)
    return ReservoirState(r=r)


def rf_features(params: ReservoirParams, x: np.ndarray) -> np.ndarray:
    """
    Memoryless random features tanh(W_in x + b).

    Raises:
        ReservoirModeError: If the reservoir was built in esn mode
    """
    if params.mode != "random_features":
        raise ReservoirModeError(
            f"rf_features requires a random_features reservoir, got mode '{params.mode}'"
        )
    return np.tanh(params.W_in @ x + params.b)


def readout(params: ReservoirParams, r: np.ndarray) -> np.ndarray:
    """Readout projection p = c_N W_read r."""
    return params.c_N * (params.W_read @ r)


def esp_margin(params: ReservoirParams) -> float:
    """
    Contraction factor rho_eff = (1 - alpha_r) + alpha_r ||W_res||_2 (L_sigma = 1).

    Values below 1 certify the echo-state property; larger values are reported,
    never rejected, since the bound is only sufficient.
    """
    return (1.0 - params.alpha_r) + params.alpha_r * operator_norm(params.W_res)
