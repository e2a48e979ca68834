"""
Multi-seed aggregation of per-run scores.

Implements:
- Mean, SEM and 95% t-confidence bounds per (regime, sweep point, method)
- Paired per-seed win counts against a reference method
- Exclusion and counting of +inf/-inf sentinels
"""

import logging

import numpy as np
import pandas as pd
import polars as pl
from statsmodels.stats.weightstats import DescrStatsW

from reservoir_ica.errors import AggregationError

logger = logging.getLogger(__name__)

GROUP_KEYS = ["regime", "arch", "N", "eps"]
SCORE_COL = "si_sdr_sc_mean"
DIAGNOSTIC_COLS = ["ier", "sso", "rho_x", "coherence"]

AGGREGATE_COLUMNS = [
    *GROUP_KEYS,
    "method",
    "n_seeds",
    "si_sdr_sc_mean",
    "si_sdr_sc_sem",
    "si_sdr_sc_ci_lower",
    "si_sdr_sc_ci_upper",
    "n_inf",
    "mean_abs_corr_mean",
    "mean_abs_corr_sem",
    *[f"{col}_mean" for col in DIAGNOSTIC_COLS],
    "reference",
    "win_count",
    "n_paired",
]


def describe(values: np.ndarray | pd.Series) -> dict[str, float]:
    """
    Mean, SEM (sample stddev / sqrt(n)) and 95% t-interval of finite values.

    Returns NaN statistics for an empty input; SEM and bounds are NaN for a
    single value.
    """
    x = np.asarray(values, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        return {"mean": np.nan, "sem": np.nan, "ci_lower": np.nan, "ci_upper": np.nan}
    if x.size == 1:
        return {"mean": float(x[0]), "sem": np.nan, "ci_lower": np.nan, "ci_upper": np.nan}

    if np.ptp(x) == 0:
        v = float(x[0])
        return {"mean": v, "sem": 0.0, "ci_lower": v, "ci_upper": v}

    stats = DescrStatsW(x)
    lower, upper = stats.tconfint_mean(alpha=0.05)
    return {
        "mean": float(stats.mean),
        "sem": float(stats.std_mean),
        "ci_lower": float(lower),
        "ci_upper": float(upper),
    }


def win_count(
    rows: pd.DataFrame,
    method: str,
    reference: str,
    value_col: str = SCORE_COL,
) -> tuple[int, int]:
    """
    Seeds on which `method` strictly beats `reference`.

    Returns:
        (wins, number of seeds present for both methods)
    """
    paired = (
        rows[rows["method"].isin([method, reference])]
        .pivot_table(index="seed", columns="method", values=value_col, aggfunc="first")
        .dropna()
    )
    if method not in paired or reference not in paired:
        return 0, 0
    return int((paired[method] > paired[reference]).sum()), len(paired)


def aggregate_seeds(
    rows: pd.DataFrame | pl.DataFrame,
    reference: str = "vanilla",
) -> pd.DataFrame:
    """
    Aggregate per-seed rows sharing one regime and sweep point.

    Args:
        rows: Per-seed rows with columns regime, arch, N, eps, method, seed,
            si_sdr_sc_mean, mean_abs_corr and the RSI diagnostics
        reference: Method the per-seed win counts are taken against

    Returns:
        One row per method, columns AGGREGATE_COLUMNS. win_count and n_paired
        are missing (<NA>) for the reference itself or when it is absent.

    Raises:
        AggregationError: If rows are empty, mix grouping keys, or repeat a
            (method, seed) pair
    """
    # Convert to pandas if polars
    if isinstance(rows, pl.DataFrame):
        rows = rows.to_pandas()

    if len(rows) == 0:
        raise AggregationError("No per-seed rows to aggregate")
    missing = [c for c in [*GROUP_KEYS, "method", "seed", SCORE_COL] if c not in rows.columns]
    if missing:
        raise AggregationError(f"Per-seed rows are missing columns: {missing}")

    keys = rows[GROUP_KEYS].drop_duplicates()
    if len(keys) != 1:
        raise AggregationError(
            f"Rows span {len(keys)} grouping keys {GROUP_KEYS}; aggregate one group at a time"
        )
    duplicated = rows.duplicated(subset=["method", "seed"])
    if duplicated.any():
        pairs = rows.loc[duplicated, ["method", "seed"]].values.tolist()
        raise AggregationError(f"Duplicate (method, seed) rows: {pairs}")

    group = keys.iloc[0].to_dict()
    has_reference = reference in set(rows["method"])
    if not has_reference:
        logger.warning("Reference method '%s' absent from group %s", reference, group)

    records = []
    for method, method_rows in rows.groupby("method", sort=False):
        scores = method_rows[SCORE_COL].to_numpy(dtype=float)
        n_inf = int(np.isinf(scores).sum())
        if n_inf:
            logger.warning(
                "Excluding %d infinite SI-SDR values for %s in %s", n_inf, method, group
            )
        score = describe(scores)
        corr = describe(method_rows["mean_abs_corr"]) if "mean_abs_corr" in method_rows else {}

        record = {
            **group,
            "method": method,
            "n_seeds": len(method_rows),
            "si_sdr_sc_mean": score["mean"],
            "si_sdr_sc_sem": score["sem"],
            "si_sdr_sc_ci_lower": score["ci_lower"],
            "si_sdr_sc_ci_upper": score["ci_upper"],
            "n_inf": n_inf,
            "mean_abs_corr_mean": corr.get("mean", np.nan),
            "mean_abs_corr_sem": corr.get("sem", np.nan),
            "reference": reference,
            "win_count": pd.NA,
            "n_paired": pd.NA,
        }
        for col in DIAGNOSTIC_COLS:
            record[f"{col}_mean"] = (
                float(method_rows[col].astype(float).mean()) if col in method_rows else np.nan
            )
        if has_reference and method != reference:
            record["win_count"], record["n_paired"] = win_count(rows, method, reference)
        records.append(record)

    result = pd.DataFrame.from_records(records, columns=AGGREGATE_COLUMNS)
    result["win_count"] = result["win_count"].astype("Int64")
    result["n_paired"] = result["n_paired"].astype("Int64")
    return result


def aggregate_table(
    per_seed: pd.DataFrame | pl.DataFrame,
    reference: str = "vanilla",
) -> pd.DataFrame:
    """Apply aggregate_seeds to every (regime, sweep point) group."""
    if isinstance(per_seed, pl.DataFrame):
        per_seed = per_seed.to_pandas()
    if len(per_seed) == 0:
        return pd.DataFrame(columns=AGGREGATE_COLUMNS)

    frames = [
        aggregate_seeds(group, reference=reference)
        for _, group in per_seed.groupby(GROUP_KEYS, sort=False)
    ]
    return pd.concat(frames, ignore_index=True)
