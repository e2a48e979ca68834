"""Tests for lag-aware matching and SI-SDR scoring."""

from itertools import permutations

import numpy as np
import pytest

from reservoir_ica.analysis.metrics import (
    evaluate_separation,
    hungarian_match,
    lag_corr_matrix,
    overlay_frame,
    running_si_sdr,
    si_sdr,
    si_sdr_sc,
    zero_lag_match,
)
from reservoir_ica.errors import DimensionError, MetricError


def _brute_force_best(scores: np.ndarray) -> float:
    n = scores.shape[0]
    return max(sum(scores[i, p[i]] for i in range(n)) for p in permutations(range(n)))


@pytest.fixture
def iid_sources(rng):
    return rng.standard_normal((3, 3000))


class TestLagCorrMatrix:
    @pytest.mark.trivial
    def test_delayed_output_found_at_positive_lag(self, iid_sources):
        Y = np.roll(iid_sources, 50, axis=1)  # y[t] = s[t - 50]
        lc = lag_corr_matrix(iid_sources, Y, max_lag=200)

        np.testing.assert_allclose(np.diag(lc.rho), 1.0, atol=1e-12)
        np.testing.assert_array_equal(np.diag(lc.lags), 50)
        np.testing.assert_array_equal(np.diag(lc.signs), 1.0)

    def test_sign_recorded(self, iid_sources):
        lc = lag_corr_matrix(iid_sources, -iid_sources, max_lag=5)
        np.testing.assert_array_equal(np.diag(lc.signs), -1.0)
        np.testing.assert_array_equal(np.diag(lc.lags), 0)

    def test_independent_pairs_are_weak(self, iid_sources):
        lc = lag_corr_matrix(iid_sources, iid_sources[::-1], max_lag=20)
        assert lc.rho[0, 0] < 0.15
        assert lc.rho[0, 2] == pytest.approx(1.0)

    def test_constant_output_is_degenerate(self, iid_sources):
        Y = iid_sources.copy()
        Y[1] = 2.0
        lc = lag_corr_matrix(iid_sources, Y, max_lag=5)
        assert lc.degenerate[:, 1].all()
        np.testing.assert_array_equal(lc.rho[:, 1], 0.0)

    def test_window_too_short(self):
        with pytest.raises(MetricError, match="too short"):
            lag_corr_matrix(np.zeros((2, 100)), np.zeros((2, 100)), max_lag=50)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            lag_corr_matrix(np.zeros((2, 100)), np.zeros((2, 90)), max_lag=5)


class TestHungarianMatch:
    @pytest.mark.trivial
    def test_identity_scores(self):
        match = hungarian_match(np.eye(4))
        np.testing.assert_array_equal(match.permutation, np.arange(4))
        assert match.total_score == 4.0

    @pytest.mark.trivial
    def test_anti_diagonal(self):
        scores = np.fliplr(np.eye(3))
        np.testing.assert_array_equal(hungarian_match(scores).permutation, [2, 1, 0])

    @pytest.mark.derived
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_matches_brute_force(self, n, rng):
        for _ in range(50):
            scores = rng.uniform(size=(n, n))
            match = hungarian_match(scores)
            assert sorted(match.permutation) == list(range(n))
            assert match.total_score == pytest.approx(_brute_force_best(scores), abs=1e-12)

    def test_carries_lags_and_signs(self):
        scores = np.array([[0.1, 0.9], [0.8, 0.2]])
        lags = np.array([[0, 7], [-3, 0]])
        signs = np.array([[1.0, -1.0], [1.0, 1.0]])
        match = hungarian_match(scores, lags=lags, signs=signs)

        np.testing.assert_array_equal(match.permutation, [1, 0])
        np.testing.assert_array_equal(match.lags, [7, -3])
        np.testing.assert_array_equal(match.signs, [-1.0, 1.0])
        np.testing.assert_allclose(match.corrs, [0.9, 0.8])

    def test_non_square(self):
        with pytest.raises(DimensionError, match="square"):
            hungarian_match(np.ones((2, 3)))


class TestSiSdr:
    @pytest.mark.trivial
    def test_perfect_estimate_is_infinite(self, rng):
        s = rng.normal(size=100)
        assert si_sdr(s, s) == np.inf
        assert si_sdr(s, 2.5 * s) == np.inf

    @pytest.mark.trivial
    def test_orthogonal_estimate(self):
        assert si_sdr(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == -np.inf

    @pytest.mark.trivial
    def test_equal_split_is_zero_db(self):
        assert si_sdr(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(0.0)

    @pytest.mark.derived
    def test_known_noise_level(self, rng):
        s = rng.normal(size=20000)
        noise = rng.normal(size=20000)
        noise -= (noise @ s) / (s @ s) * s  # orthogonal to the target
        noise *= 0.1 * np.linalg.norm(s) / np.linalg.norm(noise)
        assert si_sdr(s, s + noise) == pytest.approx(20.0, abs=1e-9)

    def test_scale_invariant(self, rng):
        s = rng.normal(size=500)
        y = s + 0.3 * rng.normal(size=500)
        assert si_sdr(s, 7.0 * y) == pytest.approx(si_sdr(s, y), abs=1e-9)

    @pytest.mark.parametrize(
        ("target", "estimate"),
        [
            (np.zeros(10), np.ones(10)),
            (np.ones(10), np.ones(9)),
            (np.ones(1), np.ones(1)),
        ],
    )
    def test_undefined(self, target, estimate):
        with pytest.raises(MetricError):
            si_sdr(target, estimate)


class TestSiSdrSc:
    @pytest.mark.derived
    def test_recovers_permuted_flipped_delayed_outputs(self, iid_sources, rng):
        Y = np.empty_like(iid_sources)
        Y[0] = -np.roll(iid_sources[2], 7)
        Y[1] = 3.0 * iid_sources[0]
        Y[2] = np.roll(iid_sources[1], -4)
        Y += 0.01 * rng.normal(size=Y.shape)

        lc = lag_corr_matrix(iid_sources, Y, max_lag=20)
        match = hungarian_match(lc.rho, lags=lc.lags, signs=lc.signs)
        score = si_sdr_sc(iid_sources, Y, match)

        np.testing.assert_array_equal(match.permutation, [1, 2, 0])
        np.testing.assert_array_equal(match.lags, [0, -4, 7])
        np.testing.assert_array_equal(match.signs, [1.0, 1.0, -1.0])
        assert np.all(score.per_source > 30.0)
        assert score.mean == pytest.approx(np.mean(score.per_source))

    def test_sign_error_would_be_negative(self, iid_sources):
        match = zero_lag_match(iid_sources, -iid_sources)
        np.testing.assert_array_equal(match.signs, -1.0)
        assert np.all(si_sdr_sc(iid_sources, -iid_sources, match).per_source == np.inf)


class TestRunningSiSdr:
    @pytest.mark.trivial
    def test_evaluation_point_count(self, rng):
        S = rng.normal(size=(3, 5000))
        curve = running_si_sdr(S, S + 0.01 * rng.normal(size=S.shape), window=2000, stride=100)

        assert len(curve) == (5000 - 2000) // 100 + 1
        assert list(curve.columns) == ["t", "running_si_sdr"]
        assert curve["t"].iloc[0] == 2000
        assert curve["t"].iloc[-1] == 5000

    def test_start_offsets_first_point(self, rng):
        S = rng.normal(size=(3, 5000))
        curve = running_si_sdr(S, S, window=2000, stride=100, start=3000)
        assert curve["t"].iloc[0] == 3000
        assert len(curve) == 21

    @pytest.mark.derived
    def test_drop_after_switch(self, rng):
        S = rng.normal(size=(3, 6000))
        Y = S + 0.01 * rng.normal(size=S.shape)
        Y[:, 3000:] = rng.normal(size=(3, 3000))
        curve = running_si_sdr(S, Y, window=1000, stride=500)

        before = curve.loc[curve["t"] <= 3000, "running_si_sdr"]
        after = curve.loc[curve["t"] >= 4000, "running_si_sdr"]
        assert before.min() > 30.0
        assert after.max() < 0.0

    @pytest.mark.parametrize(("window", "stride"), [(1, 10), (6000, 10), (100, 0)])
    def test_invalid_arguments(self, rng, window, stride):
        S = rng.normal(size=(2, 500))
        with pytest.raises(MetricError):
            running_si_sdr(S, S, window=window, stride=stride)


class TestEvaluateSeparation:
    def test_uses_trailing_window(self, rng):
        S = rng.normal(size=(3, 4000))
        Y = rng.normal(size=(3, 4000))
        Y[:, 2000:] = S[[2, 0, 1], 2000:] + 0.01 * rng.normal(size=(3, 2000))

        report = evaluate_separation(S, Y, window=2000, max_lag=10)
        np.testing.assert_array_equal(report.match.permutation, [1, 2, 0])
        assert report.si_sdr_sc.shape == (3,)
        assert report.si_sdr_sc_mean > 30.0
        assert report.mean_abs_corr > 0.99


class TestOverlayFrame:
    def test_aligned_estimates(self, rng):
        S = rng.normal(size=(3, 1000))
        Y = np.stack([-2.0 * S[1], 0.5 * S[2], S[0]])
        frame = overlay_frame(S, Y, length=200)

        assert list(frame.columns) == ["source", "t", "true", "estimate", "unshifted_si_sdr"]
        assert len(frame) == 600
        assert frame["t"].min() == 801
        assert frame["t"].max() == 1000
        np.testing.assert_allclose(frame["estimate"], frame["true"], atol=1e-10)
        assert (frame["unshifted_si_sdr"] == np.inf).all()
