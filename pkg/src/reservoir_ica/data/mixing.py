"""
Mixing regimes.

Implements:
- Random mixing matrices with constructive condition-number control
- Static mixing: x_t = A s_t
- Time-varying mixing: x_t = (A0 + eps sin(2 pi f t / T) Delta) s_t
- Nonlinear mixing: x_t = tanh(gamma A s_t) + eta_t at a target SNR
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from reservoir_ica.data.signals import SourceMatrix
from reservoir_ica.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

Regime = Literal["static", "time_varying", "nonlinear"]
REGIMES: tuple[str, ...] = ("static", "time_varying", "nonlinear")

# Lower end of the range the target condition number is drawn from
MIN_TARGET_CONDITION = 1.5


@dataclass
class MixedStream:
    """Observations plus the parameters of the regime that produced them."""

    data: np.ndarray
    regime: str
    A0: np.ndarray
    delta: np.ndarray | None = None
    epsilon: float = 0.0
    f: float = 0.0
    gamma: float | None = None
    snr_db: float | None = None
    noise_seed: int | None = None

    @property
    def sample_count(self) -> int:
        return int(self.data.shape[1])


def _random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_mixing_matrix(n: int, cond_max: float, seed: int) -> np.ndarray:
    """
    Draw a mixing matrix whose 2-norm condition number is at most cond_max.

    A = U diag(sigma) V^T with random orthogonal U, V and singular values spread
    log-uniformly between 1 and a target condition number drawn from
    [1.5, cond_max] (or equal to cond_max when that is below 1.5).

    Args:
        n: Matrix dimension (>= 2)
        cond_max: Upper bound on the condition number (> 1)
        seed: Random seed

    Returns:
        n x n mixing matrix
    """
    if n < 2:
        raise ConfigurationError(f"Mixing dimension must be at least 2, got {n}")
    if cond_max <= 1.0:
        raise ConfigurationError(f"cond_max must exceed 1, got {cond_max}")

    rng = np.random.default_rng(seed)
    U = _random_orthogonal(n, rng)
    V = _random_orthogonal(n, rng)

    if cond_max > MIN_TARGET_CONDITION:
        target = rng.uniform(MIN_TARGET_CONDITION, cond_max)
    else:
        target = cond_max

    log_sigma = rng.uniform(0.0, np.log(target), size=n)
    # Pin the extremes so the condition number is exactly the target
    log_sigma[0] = np.log(target)
    log_sigma[-1] = 0.0
    sigma = np.sort(np.exp(log_sigma))[::-1]

    return (U * sigma) @ V.T


def random_drift_matrix(A0: np.ndarray, seed: int) -> np.ndarray:
    """Gaussian drift direction rescaled to the spectral norm of A0."""
    rng = np.random.default_rng(seed)
    delta = rng.standard_normal(A0.shape)
    return delta * (np.linalg.norm(A0, 2) / np.linalg.norm(delta, 2))


def _check_shapes(A: np.ndarray, S: SourceMatrix) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"Mixing matrix must be square, got shape {A.shape}")
    if A.shape[1] != S.n_sources:
        raise DimensionError(
            f"Mixing matrix has {A.shape[1]} columns but there are {S.n_sources} sources"
        )


def mix_static(A: np.ndarray, S: SourceMatrix) -> MixedStream:
    """
    Static mixing, x_t = A s_t.

    Args:
        A: n x n mixing matrix
        S: Sources with n rows

    Returns:
        MixedStream in the static regime
    """
    A = np.asarray(A, dtype=float)
    _check_shapes(A, S)
    return MixedStream(data=A @ S.data, regime="static", A0=A)


def mix_time_varying(
    A0: np.ndarray,
    delta: np.ndarray,
    epsilon: float,
    f: float,
    S: SourceMatrix,
) -> MixedStream:
    """
    Slowly drifting mixing, x_t = (A0 + eps sin(2 pi f t / T) Delta) s_t.

    t counts samples from 0 and T is the sample horizon of S, so f is the number
    of drift cycles over the whole run.

    Args:
        A0: Base mixing matrix
        delta: Drift direction, same shape as A0
        epsilon: Drift amplitude
        f: Drift frequency (cycles per horizon)
        S: Sources

    Returns:
        MixedStream in the time-varying regime
    """
    A0 = np.asarray(A0, dtype=float)
    delta = np.asarray(delta, dtype=float)
    _check_shapes(A0, S)
    if delta.shape != A0.shape:
        raise DimensionError(f"Drift matrix shape {delta.shape} does not match A0 {A0.shape}")

    T = S.sample_count
    t = np.arange(T)
    modulation = epsilon * np.sin(2.0 * np.pi * f * t / T)
    # Column t: A0 s_t + m_t Delta s_t
    data = A0 @ S.data + modulation * (delta @ S.data)

    return MixedStream(
        data=data,
        regime="time_varying",
        A0=A0,
        delta=delta,
        epsilon=float(epsilon),
        f=float(f),
    )


def mix_nonlinear(
    A: np.ndarray,
    gamma: float,
    snr_db: float | None,
    S: SourceMatrix,
    seed: int,
) -> MixedStream:
    """
    Post-nonlinear mixing with additive white Gaussian noise.

    x_t = tanh(gamma A s_t) + eta_t. The noise variance is set from the empirical
    power of the clean signal (mean square over all channels and samples) so that
    clean power / noise power = 10^(snr_db / 10). snr_db=None leaves the output
    noiseless.

    Args:
        A: n x n mixing matrix
        gamma: Nonlinearity gain (> 0)
        snr_db: Target signal-to-noise ratio in dB, or None for no noise
        S: Sources
        seed: Noise seed

    Returns:
        MixedStream in the nonlinear regime
    """
    A = np.asarray(A, dtype=float)
    _check_shapes(A, S)
    if gamma <= 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")

    clean = np.tanh(gamma * (A @ S.data))
    data = clean
    if snr_db is not None:
        signal_power = float(np.mean(clean**2))
        noise_power = signal_power / 10.0 ** (snr_db / 10.0)
        rng = np.random.default_rng(seed)
        data = clean + rng.normal(scale=np.sqrt(noise_power), size=clean.shape)
        logger.debug(
            "Nonlinear mix: gamma=%.3f, snr=%.1f dB, noise power=%.4g", gamma, snr_db, noise_power
        )

    return MixedStream(
        data=data,
        regime="nonlinear",
        A0=A,
        gamma=float(gamma),
        snr_db=None if snr_db is None else float(snr_db),
        noise_seed=seed,
    )


def measured_snr_db(stream: MixedStream, clean: np.ndarray) -> float:
    """Empirical SNR of a stream against its noiseless part."""
    noise = stream.data - clean
    return float(10.0 * np.log10(np.mean(clean**2) / np.mean(noise**2)))
