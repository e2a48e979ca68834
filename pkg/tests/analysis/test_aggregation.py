"""Tests for multi-seed aggregation."""

import numpy as np
import pandas as pd
import polars as pl
import pytest

from reservoir_ica.analysis.aggregation import (
    AGGREGATE_COLUMNS,
    aggregate_seeds,
    aggregate_table,
    describe,
    win_count,
)
from reservoir_ica.errors import AggregationError


def _rows(method: str, scores, regime: str = "nonlinear", eps: float = 0.3) -> pd.DataFrame:
    scores = list(scores)
    return pd.DataFrame(
        {
            "regime": regime,
            "arch": "esn",
            "N": 500,
            "eps": eps,
            "method": method,
            "seed": range(len(scores)),
            "si_sdr_sc_mean": scores,
            "mean_abs_corr": 0.5,
            "ier": np.nan,
            "sso": np.nan,
            "rho_x": np.nan,
            "coherence": np.nan,
        }
    )


@pytest.fixture
def paired_rows():
    """Ten seeds where the candidate wins on seeds 0-6."""
    reference = np.linspace(-9.0, -8.0, 10)
    candidate = reference + np.array([1, 1, 1, 1, 1, 1, 1, -1, -1, -1], dtype=float)
    return pd.concat([_rows("vanilla", reference), _rows("reoica_base", candidate)])


@pytest.mark.trivial
def test_describe_identical_values():
    """Identical values give zero spread and a degenerate interval."""
    stats = describe(np.full(10, -7.0))
    assert stats == {"mean": -7.0, "sem": 0.0, "ci_lower": -7.0, "ci_upper": -7.0}


@pytest.mark.derived
def test_describe_one_to_ten():
    """SEM uses the sample standard deviation."""
    stats = describe(np.arange(1, 11))

    assert stats["mean"] == pytest.approx(5.5)
    assert stats["sem"] == pytest.approx(0.9574, abs=1e-4)
    assert stats["ci_lower"] == pytest.approx(5.5 - 2.262157 * 0.957427, abs=1e-4)
    assert stats["ci_upper"] == pytest.approx(5.5 + 2.262157 * 0.957427, abs=1e-4)


def test_describe_drops_non_finite():
    stats = describe([1.0, np.inf, 3.0, -np.inf, np.nan])
    assert stats["mean"] == pytest.approx(2.0)


def test_describe_single_and_empty():
    single = describe([4.0])
    assert single["mean"] == 4.0
    assert np.isnan(single["sem"])
    assert np.isnan(describe([])["mean"])


def test_win_count(paired_rows):
    assert win_count(paired_rows, "reoica_base", "vanilla") == (7, 10)


def test_win_count_ignores_unpaired_seeds(paired_rows):
    rows = paired_rows[~((paired_rows["method"] == "vanilla") & (paired_rows["seed"] >= 8))]
    assert win_count(rows, "reoica_base", "vanilla") == (7, 8)


class TestAggregateSeeds:
    def test_columns_and_reference_row(self, paired_rows):
        result = aggregate_seeds(paired_rows, reference="vanilla")

        assert list(result.columns) == AGGREGATE_COLUMNS
        assert set(result["method"]) == {"vanilla", "reoica_base"}
        ref = result.set_index("method").loc["vanilla"]
        assert pd.isna(ref["win_count"])
        assert pd.isna(ref["n_paired"])

    @pytest.mark.derived
    def test_candidate_statistics(self, paired_rows):
        result = aggregate_seeds(paired_rows).set_index("method")
        candidate = paired_rows[paired_rows["method"] == "reoica_base"]["si_sdr_sc_mean"]

        row = result.loc["reoica_base"]
        assert row["si_sdr_sc_mean"] == pytest.approx(candidate.mean())
        assert row["si_sdr_sc_sem"] == pytest.approx(candidate.std(ddof=1) / np.sqrt(10))
        assert row["win_count"] == 7
        assert row["n_paired"] == 10
        assert row["n_seeds"] == 10
        assert row["n_inf"] == 0

    def test_infinite_values_excluded_and_counted(self, caplog):
        rows = _rows("vanilla", [-8.0, np.inf, -9.0, -10.0])
        result = aggregate_seeds(rows).iloc[0]

        assert result["n_inf"] == 1
        assert result["n_seeds"] == 4
        assert result["si_sdr_sc_mean"] == pytest.approx(-9.0)
        assert "infinite" in caplog.text

    def test_polars_input(self, paired_rows):
        from_pandas = aggregate_seeds(paired_rows)
        from_polars = aggregate_seeds(pl.from_pandas(paired_rows))
        pd.testing.assert_frame_equal(from_pandas, from_polars, check_dtype=False)

    def test_missing_reference(self, paired_rows, caplog):
        rows = paired_rows[paired_rows["method"] == "reoica_base"]
        result = aggregate_seeds(rows, reference="vanilla")
        assert pd.isna(result.iloc[0]["win_count"])
        assert "absent" in caplog.text

    def test_mismatched_keys(self, paired_rows):
        other = _rows("vanilla", [-1.0, -2.0], regime="static")
        with pytest.raises(AggregationError, match="grouping keys"):
            aggregate_seeds(pd.concat([paired_rows, other]))

    def test_duplicate_seed(self):
        rows = pd.concat([_rows("vanilla", [-8.0, -9.0]), _rows("vanilla", [-7.0])])
        with pytest.raises(AggregationError, match="Duplicate"):
            aggregate_seeds(rows)

    def test_empty(self):
        with pytest.raises(AggregationError, match="No per-seed rows"):
            aggregate_seeds(_rows("vanilla", []))

    def test_missing_columns(self, paired_rows):
        with pytest.raises(AggregationError, match="missing columns"):
            aggregate_seeds(paired_rows.drop(columns=["eps"]))


class TestAggregateTable:
    def test_one_row_per_group_and_method(self, paired_rows):
        drift = pd.concat(
            [_rows("vanilla", [-5.0, -6.0], eps=0.6), _rows("reoica_base", [-4.0, -7.0], eps=0.6)]
        )
        table = aggregate_table(pd.concat([paired_rows, drift]))

        assert len(table) == 4
        assert sorted(table["eps"].unique()) == [0.3, 0.6]
        drift_row = table[(table["eps"] == 0.6) & (table["method"] == "reoica_base")].iloc[0]
        assert drift_row["win_count"] == 1
        assert drift_row["n_paired"] == 2

    def test_empty_table(self):
        table = aggregate_table(pd.DataFrame(columns=["regime", "method"]))
        assert table.empty
        assert list(table.columns) == AGGREGATE_COLUMNS
