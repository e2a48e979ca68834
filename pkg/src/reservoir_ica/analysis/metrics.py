"""
Separation quality metrics.

Implements:
- Lag-aware correlation matrix rho_ij = max_{|tau| <= L} |corr(s_i, y_j shifted by tau)|
- Hungarian (Kuhn-Munkres) assignment maximizing total score
- SI-SDR and its lag-compensated, sign-corrected variant SI-SDR_sc
- Running (unshifted) SI-SDR over a trailing window

Lag convention: a lag tau pairs s_i[t] with y_j[t + tau]. An output that is the
source delayed by k samples (y[t] = s[t - k]) is therefore found at tau = +k.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from reservoir_ica.errors import DimensionError, MetricError

logger = logging.getLogger(__name__)

# Residual energy below this fraction of the projection is reported as +inf
ZERO_RESIDUAL_RTOL = 1e-20


@dataclass
class LagCorrelation:
    """Lag-scan result for every (source, output) pair."""

    rho: np.ndarray
    lags: np.ndarray
    signs: np.ndarray
    degenerate: np.ndarray


@dataclass
class MatchResult:
    """Source-to-output assignment.

    permutation[i] is the output matched to source i; lags, signs and corrs are
    the per-pair values for those matched pairs.
    """

    permutation: np.ndarray
    lags: np.ndarray
    signs: np.ndarray
    corrs: np.ndarray

    @property
    def total_score(self) -> float:
        return float(np.sum(self.corrs))


@dataclass
class SeparationScore:
    per_source: np.ndarray
    mean: float


@dataclass
class MetricsReport:
    """Steady-state scores for one run."""

    si_sdr_sc: np.ndarray
    si_sdr_sc_mean: float
    mean_abs_corr: float
    match: MatchResult
    running_curve: pd.DataFrame = field(default_factory=pd.DataFrame)


def _shift_pair(s: np.ndarray, y: np.ndarray, lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Overlapping segments pairing s[t] with y[t + lag]."""
    L = s.shape[-1]
    if lag >= 0:
        return s[..., : L - lag], y[..., lag:]
    return s[..., -lag:], y[..., : L + lag]


def _standardize_rows(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centered = a - a.mean(axis=-1, keepdims=True)
    std = centered.std(axis=-1)
    safe = np.where(std > 0, std, 1.0)
    return centered / safe[..., None], std > 0


def lag_corr_matrix(S: np.ndarray, Y: np.ndarray, max_lag: int = 200) -> LagCorrelation:
    """
    Maximum absolute Pearson correlation over integer lags |tau| <= max_lag.

    Correlations use population normalization on the overlap of length L - |tau|.
    A pair whose overlap has zero variance contributes 0 at that lag and is
    flagged degenerate if no lag gave a valid value.

    Args:
        S: n x L sources
        Y: k x L outputs
        max_lag: Largest lag magnitude scanned

    Returns:
        LagCorrelation with n x k rho, lags, signs and degenerate flags
    """
    S = np.asarray(S, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if S.ndim != 2 or Y.ndim != 2 or S.shape[1] != Y.shape[1]:
        raise DimensionError(f"Sources {S.shape} and outputs {Y.shape} must share length")
    L = S.shape[1]
    if L <= 2 * max_lag + 2:
        raise MetricError(f"Window length {L} too short for max_lag={max_lag}")

    n, k = S.shape[0], Y.shape[0]
    best = np.zeros((n, k))
    best_lag = np.zeros((n, k), dtype=int)
    best_sign = np.ones((n, k))
    valid_any = np.zeros((n, k), dtype=bool)

    for lag in range(-max_lag, max_lag + 1):
        s_seg, y_seg = _shift_pair(S, Y, lag)
        s_std, s_ok = _standardize_rows(s_seg)
        y_std, y_ok = _standardize_rows(y_seg)
        corr = (s_std @ y_std.T) / s_seg.shape[1]
        ok = np.outer(s_ok, y_ok)
        corr = np.where(ok, np.clip(corr, -1.0, 1.0), 0.0)
        valid_any |= ok

        improved = np.abs(corr) > best
        best = np.where(improved, np.abs(corr), best)
        best_lag = np.where(improved, lag, best_lag)
        best_sign = np.where(improved, np.where(corr < 0, -1.0, 1.0), best_sign)

    degenerate = ~valid_any
    if degenerate.any():
        logger.warning("Zero-variance overlap for %d source/output pairs", int(degenerate.sum()))
    return LagCorrelation(rho=best, lags=best_lag, signs=best_sign, degenerate=degenerate)


def _hungarian_min(cost: np.ndarray) -> np.ndarray:
    """
    Kuhn-Munkres with row/column potentials for a square cost matrix.

    Returns assignment[i] = column assigned to row i.
    """
    n = cost.shape[0]
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)  # p[j]: row matched to column j (1-based, 0 = free)
    way = np.zeros(n + 1, dtype=int)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        # Augment along the alternating path
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    assignment = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment


def hungarian_match(
    scores: np.ndarray,
    lags: np.ndarray | None = None,
    signs: np.ndarray | None = None,
) -> MatchResult:
    """
    Assignment of sources (rows) to outputs (columns) maximizing total score.

    Args:
        scores: n x n score matrix, e.g. LagCorrelation.rho
        lags: Optional per-pair lags to carry into the result
        signs: Optional per-pair correlation signs

    Returns:
        MatchResult
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1] or scores.shape[0] < 1:
        raise DimensionError(f"Score matrix must be square and non-empty, got {scores.shape}")

    perm = _hungarian_min(-scores)
    rows = np.arange(scores.shape[0])
    return MatchResult(
        permutation=perm,
        lags=np.zeros_like(perm) if lags is None else np.asarray(lags)[rows, perm],
        signs=np.ones(len(perm)) if signs is None else np.asarray(signs)[rows, perm],
        corrs=scores[rows, perm],
    )


def si_sdr(target: np.ndarray, estimate: np.ndarray) -> float:
    """
    Scale-invariant signal-to-distortion ratio in dB.

    alpha = <estimate, target> / ||target||^2;
    SI-SDR = 10 log10(||alpha target||^2 / ||alpha target - estimate||^2).
    Returns +inf when the residual is numerically zero.

    Raises:
        MetricError: If lengths differ, are below 2, or the target is all zeros
    """
    target = np.asarray(target, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if target.shape != estimate.shape or target.ndim != 1 or target.size < 2:
        raise MetricError(
            f"Target {target.shape} and estimate {estimate.shape} must be equal-length 1-D"
        )
    target_energy = float(target @ target)
    if target_energy == 0:
        raise MetricError("SI-SDR is undefined for an all-zero target")

    scale = float(estimate @ target) / target_energy
    projection = scale * target
    residual = projection - estimate
    proj_energy = float(projection @ projection)
    res_energy = float(residual @ residual)

    if proj_energy == 0:
        return float("-inf")
    if res_energy <= ZERO_RESIDUAL_RTOL * proj_energy:
        return float("inf")
    return float(10.0 * np.log10(proj_energy / res_energy))


def si_sdr_sc(S: np.ndarray, Y: np.ndarray, match: MatchResult) -> SeparationScore:
    """
    Lag-compensated, sign-corrected SI-SDR for each matched pair.

    Output pi(i) is shifted by its maximizing lag, sign-corrected, and both
    signals are truncated to the overlap before scoring.
    """
    S = np.asarray(S, dtype=float)
    Y = np.asarray(Y, dtype=float)
    values = np.empty(S.shape[0])
    for i, j in enumerate(match.permutation):
        s_seg, y_seg = _shift_pair(S[i], Y[j], int(match.lags[i]))
        values[i] = si_sdr(s_seg, match.signs[i] * y_seg)
    return SeparationScore(per_source=values, mean=float(np.mean(values)))


def zero_lag_match(S: np.ndarray, Y: np.ndarray) -> MatchResult:
    """Hungarian matching on |corr| at lag 0."""
    s_std, s_ok = _standardize_rows(np.asarray(S, dtype=float))
    y_std, y_ok = _standardize_rows(np.asarray(Y, dtype=float))
    corr = (s_std @ y_std.T) / S.shape[1]
    corr = np.where(np.outer(s_ok, y_ok), np.clip(corr, -1.0, 1.0), 0.0)
    signs = np.where(corr < 0, -1.0, 1.0)
    return hungarian_match(np.abs(corr), signs=signs)


def _unshifted_score(S: np.ndarray, Y: np.ndarray) -> float:
    match = zero_lag_match(S, Y)
    values = [
        si_sdr(S[i], match.signs[i] * Y[j]) if np.any(Y[j]) else float("-inf")
        for i, j in enumerate(match.permutation)
    ]
    return float(np.mean(values))


def running_si_sdr(
    S: np.ndarray,
    Y: np.ndarray,
    window: int = 2000,
    stride: int = 100,
    start: int = 0,
) -> pd.DataFrame:
    """
    Trailing-window unshifted SI-SDR.

    Evaluation points are window ends t = t0, t0 + stride, ... <= T with
    t0 = max(start, window), so start=0 gives floor((T - window) / stride) + 1
    points. At each point outputs are matched to sources by zero-lag |corr| on
    the trailing window and scored without lag compensation.

    Returns:
        DataFrame with columns t (1-based window end) and running_si_sdr
    """
    S = np.asarray(S, dtype=float)
    Y = np.asarray(Y, dtype=float)
    T = S.shape[1]
    if window > T or window < 2:
        raise MetricError(f"Window {window} must be in [2, T={T}]")
    if stride < 1:
        raise MetricError(f"Stride must be >= 1, got {stride}")

    ends = np.arange(max(start, window), T + 1, stride)
    values = [_unshifted_score(S[:, e - window : e], Y[:, e - window : e]) for e in ends]
    return pd.DataFrame({"t": ends, "running_si_sdr": values})


def evaluate_separation(
    S: np.ndarray,
    Y: np.ndarray,
    window: int = 5000,
    max_lag: int = 200,
) -> MetricsReport:
    """
    Steady-state metrics on the last `window` samples.

    Returns:
        MetricsReport with per-source SI-SDR_sc, its mean, and mean |r| of the
        matched pairs
    """
    S_win = np.asarray(S, dtype=float)[:, -window:]
    Y_win = np.asarray(Y, dtype=float)[:, -window:]
    lc = lag_corr_matrix(S_win, Y_win, max_lag=max_lag)
    match = hungarian_match(lc.rho, lags=lc.lags, signs=lc.signs)
    score = si_sdr_sc(S_win, Y_win, match)
    return MetricsReport(
        si_sdr_sc=score.per_source,
        si_sdr_sc_mean=score.mean,
        mean_abs_corr=float(np.mean(match.corrs)),
        match=match,
    )


def overlay_frame(S: np.ndarray, Y: np.ndarray, length: int = 600) -> pd.DataFrame:
    """
    Matched, sign- and scale-aligned outputs next to the true sources.

    Uses zero-lag matching on the last `length` samples; each estimate is the
    least-squares projection onto its source.

    Returns:
        DataFrame with columns source, t, true, estimate, unshifted_si_sdr
    """
    S_win = np.asarray(S, dtype=float)[:, -length:]
    Y_win = np.asarray(Y, dtype=float)[:, -length:]
    T = np.asarray(S).shape[1]
    match = zero_lag_match(S_win, Y_win)
    t = np.arange(T - length + 1, T + 1)

    frames = []
    for i, j in enumerate(match.permutation):
        est = match.signs[i] * Y_win[j]
        energy = float(est @ est)
        gain = float(est @ S_win[i]) / energy if energy > 0 else 0.0
        score = si_sdr(S_win[i], est) if energy > 0 else float("-inf")
        frames.append(
            pd.DataFrame(
                {
                    "source": i + 1,
                    "t": t,
                    "true": S_win[i],
                    "estimate": gain * est,
                    "unshifted_si_sdr": score,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)
