"""
Benchmark source generation.

Implements:
- Chaotic sources: Lorenz x-component (RK4) and Mackey-Glass (delayed Euler)
- Linear chirp sweeping 0.5-5 Hz every 10 s, tiled to the horizon
- Super-Gaussian / periodic sources: Laplace, square wave, sawtooth
- Row standardization to zero mean and unit (population) variance
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from reservoir_ica.errors import ConfigurationError, DataError, DegenerateSignalError

logger = logging.getLogger(__name__)

SOURCE_KINDS = ("lorenz", "mackey_glass", "chirp", "laplace", "square", "sawtooth")

CHAOTIC_SOURCES = ["lorenz", "mackey_glass", "chirp"]
SUPER_GAUSSIAN_SOURCES = ["laplace", "square", "sawtooth"]

# Continuous-time constructs are sampled at this rate (Hz)
SAMPLE_RATE_HZ = 100.0

LORENZ_SIGMA = 10.0
LORENZ_RHO = 28.0
LORENZ_BETA = 8.0 / 3.0
LORENZ_DT = 0.01
LORENZ_TRANSIENT = 1000

MACKEY_GLASS_BETA = 0.2
MACKEY_GLASS_GAMMA = 0.1
MACKEY_GLASS_EXPONENT = 10.0
MACKEY_GLASS_TAU = 17.0
MACKEY_GLASS_DT = 0.1
MACKEY_GLASS_HISTORY = 1.2
MACKEY_GLASS_TRANSIENT = 1000

CHIRP_F0_HZ = 0.5
CHIRP_F1_HZ = 5.0
CHIRP_SWEEP_S = 10.0

PERIODIC_PERIOD = 200


@dataclass
class SourceMatrix:
    """Standardized ground-truth sources, one row per source."""

    data: np.ndarray
    kinds: list[str] = field(default_factory=list)

    @property
    def sample_count(self) -> int:
        return int(self.data.shape[1])

    @property
    def n_sources(self) -> int:
        return int(self.data.shape[0])


def standardize(series: np.ndarray) -> np.ndarray:
    """
    Shift and scale a series to zero mean and unit population variance.

    Args:
        series: Real-valued 1-D sequence with at least two samples

    Returns:
        Standardized copy of the series

    Raises:
        DataError: If the series is shorter than 2 samples or non-finite
        DegenerateSignalError: If the series has zero variance
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DataError(f"Need a 1-D series with at least 2 samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("Series contains NaN or Inf")

    mean = x.mean()
    std = x.std()
    if std <= np.finfo(float).eps * max(1.0, abs(mean)):
        raise DegenerateSignalError(f"Cannot standardize a constant series (value {mean:g})")

    return (x - mean) / std


def lorenz_x(T: int, rng: np.random.Generator) -> np.ndarray:
    """
    Lorenz x-component integrated with fixed-step RK4.

    The initial condition is jittered around (1, 1, 1) by the generator so that
    different seeds land on different parts of the attractor.
    """

    def deriv(state: np.ndarray) -> np.ndarray:
        x, y, z = state
        return np.array(
            [
                LORENZ_SIGMA * (y - x),
                x * (LORENZ_RHO - z) - y,
                x * y - LORENZ_BETA * z,
            ]
        )

    state = np.ones(3) + rng.normal(scale=0.1, size=3)
    h = LORENZ_DT
    out = np.empty(T)
    for step in range(LORENZ_TRANSIENT + T):
        k1 = deriv(state)
        k2 = deriv(state + 0.5 * h * k1)
        k3 = deriv(state + 0.5 * h * k2)
        k4 = deriv(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step >= LORENZ_TRANSIENT:
            out[step - LORENZ_TRANSIENT] = state[0]
    return out


def mackey_glass(T: int, rng: np.random.Generator) -> np.ndarray:
    """
    Mackey-Glass series (tau = 17) integrated with Euler steps over a delay line.

    One Euler step is one sample. The history is the constant 1.2; the generator
    only chooses how many extra transient samples to discard.

    Raises:
        ConfigurationError: If T does not exceed the delay-line length
    """
    delay = int(round(MACKEY_GLASS_TAU / MACKEY_GLASS_DT))
    if delay >= T:
        raise ConfigurationError(
            f"T={T} too short for the Mackey-Glass delay line ({delay} slots)"
        )

    transient = MACKEY_GLASS_TRANSIENT + int(rng.integers(0, delay))
    total = transient + T
    x = np.empty(delay + total)
    x[: delay + 1] = MACKEY_GLASS_HISTORY
    for i in range(delay, delay + total - 1):
        lagged = x[i - delay]
        dx = (
            MACKEY_GLASS_BETA * lagged / (1.0 + lagged**MACKEY_GLASS_EXPONENT)
            - MACKEY_GLASS_GAMMA * x[i]
        )
        x[i + 1] = x[i] + MACKEY_GLASS_DT * dx
    return x[delay + transient : delay + total]


def chirp(T: int) -> np.ndarray:
    """Linear 0.5-5 Hz chirp over a 10 s sweep, repeated to length T."""
    sweep_len = int(round(CHIRP_SWEEP_S * SAMPLE_RATE_HZ))
    t = np.arange(sweep_len) / SAMPLE_RATE_HZ
    rate = (CHIRP_F1_HZ - CHIRP_F0_HZ) / CHIRP_SWEEP_S
    sweep = np.sin(2.0 * np.pi * (CHIRP_F0_HZ * t + 0.5 * rate * t**2))
    return np.resize(sweep, T)


def square_wave(T: int, rng: np.random.Generator) -> np.ndarray:
    phase = int(rng.integers(0, PERIODIC_PERIOD))
    k = (np.arange(T) + phase) % PERIODIC_PERIOD
    return np.where(k < PERIODIC_PERIOD // 2, 1.0, -1.0)


def sawtooth(T: int, rng: np.random.Generator) -> np.ndarray:
    phase = int(rng.integers(0, PERIODIC_PERIOD))
    k = (np.arange(T) + phase) % PERIODIC_PERIOD
    return 2.0 * k / PERIODIC_PERIOD - 1.0


def _raw_source(kind: str, T: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "lorenz":
        return lorenz_x(T, rng)
    if kind == "mackey_glass":
        return mackey_glass(T, rng)
    if kind == "chirp":
        return chirp(T)
    if kind == "laplace":
        return rng.laplace(loc=0.0, scale=1.0, size=T)
    if kind == "square":
        return square_wave(T, rng)
    if kind == "sawtooth":
        return sawtooth(T, rng)
    raise ConfigurationError(f"Unknown source kind '{kind}'. Expected one of {SOURCE_KINDS}")


def generate_sources(kind_set: list[str], T: int, seed: int) -> SourceMatrix:
    """
    Generate standardized benchmark sources.

    Each row gets its own generator spawned from the seed, so a row only depends
    on (seed, position, kind).

    Args:
        kind_set: Source kinds, one per row (see SOURCE_KINDS)
        T: Number of samples per source
        seed: Seed for all random choices

    Returns:
        SourceMatrix with len(kind_set) standardized rows

    Raises:
        ConfigurationError: If kind_set is empty, a kind is unknown or T is too short
    """
    if not kind_set:
        raise ConfigurationError("kind_set must contain at least one source kind")
    if T < 2:
        raise ConfigurationError(f"T must be at least 2 samples, got {T}")
    unknown = [k for k in kind_set if k not in SOURCE_KINDS]
    if unknown:
        raise ConfigurationError(f"Unknown source kind(s) {unknown}. Expected {SOURCE_KINDS}")

    children = np.random.SeedSequence(seed).spawn(len(kind_set))
    rows = []
    for kind, child in zip(kind_set, children, strict=True):
        rng = np.random.default_rng(child)
        rows.append(standardize(_raw_source(kind, T, rng)))

    logger.debug("Generated sources %s with T=%d, seed=%d", kind_set, T, seed)
    return SourceMatrix(data=np.vstack(rows), kinds=list(kind_set))
