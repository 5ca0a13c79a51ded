"""Tests for the worst-case matrix family and the W samplers."""
import numpy as np
import pytest
from scipy.stats import ks_2samp

from sketchbound.core.rng import RngStream
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidDims, InvalidParameter, RankDeficient
from sketchbound.worstcase import (
    decompose_test_matrix,
    draw_factors,
    estimate_expected_W,
    l_norm_from_factors,
    limit_residual_check,
    resolve_method,
    sample_worst_case_error,
    trial_seeds,
    w_from_factors,
    worst_case_matrix,
)


def test_worst_case_matrix_diagonal():
    assert worst_case_matrix(5, 2, 10.0).to_list() == [10.0, 10.0, 1.0, 1.0, 1.0]
    assert worst_case_matrix(3, 1, 1.0).to_list() == [1.0, 1.0, 1.0]


@pytest.mark.parametrize("n, k, t", [(5, 5, 2.0), (5, 0, 2.0), (5, 2, 0.5), (5, 2, float("inf"))])
def test_worst_case_matrix_rejects(n, k, t):
    with pytest.raises(InvalidParameter):
        worst_case_matrix(n, k, t)


def test_decomposition_reassembles_g(rng):
    G = rng.standard_normal((12, 5))
    parts = decompose_test_matrix(G, 3)
    assert parts.k == 3 and parts.p == 2
    G1 = parts.U @ np.hstack([np.diag(parts.Sigma.values), np.zeros((3, 2))]) @ parts.V.T
    G2 = np.hstack([parts.X1, parts.X2]) @ parts.V.T
    assert np.allclose(G1, G[:3], atol=1e-12)
    assert np.allclose(G2, G[3:], atol=1e-12)
    assert np.allclose(parts.V.T @ parts.V, np.eye(5), atol=1e-12)


def test_decomposition_with_repeated_rows(rng):
    G = rng.standard_normal((8, 4))
    G[1] = G[0]
    with pytest.raises(RankDeficient):
        decompose_test_matrix(G, 2)


def test_full_oversampling_gives_zero():
    for method in ("auto", "reduced", "dense"):
        assert sample_worst_case_error(10, 4, 6, rng=RngStream(1), method=method) == 0.0


def test_zero_tail_gives_zero():
    tail = Spectrum(np.zeros(8))
    assert sample_worst_case_error(10, 2, 2, tail=tail, rng=RngStream(3)) == 0.0


def test_reduced_matches_dense():
    for seed in range(200):
        reduced = sample_worst_case_error(30, 3, 2, rng=RngStream(seed), method="reduced")
        dense = sample_worst_case_error(30, 3, 2, rng=RngStream(seed), method="dense")
        assert reduced == pytest.approx(dense, rel=1e-8)
        assert reduced >= 1.0


def test_ones_tail_matches_all_ones_sampler():
    tail = Spectrum.ones(37)
    for seed in range(20):
        reduced = sample_worst_case_error(40, 3, 4, rng=RngStream(seed), method="reduced")
        shaped = sample_worst_case_error(40, 3, 4, tail=tail, rng=RngStream(seed))
        assert shaped == pytest.approx(reduced, rel=1e-8)


def test_w_sandwich():
    for seed in range(50):
        X1, X2, sigma = draw_factors(25, 3, 2, RngStream(seed))
        w = w_from_factors(X1, X2, sigma)
        norm_L = l_norm_from_factors(X1, X2, sigma)
        assert norm_L - 1e-9 <= w <= norm_L + 1.0 + 1e-9


def test_limit_identity_at_large_t():
    direct, via_w = limit_residual_check(60, 4, 4, 1e6, seed=7)
    assert direct == pytest.approx(via_w, rel=1e-4)


def test_limit_residual_approaches_w_from_below():
    residuals = []
    for t in (10.0, 100.0, 1e3, 1e4):
        direct, via_w = limit_residual_check(40, 3, 2, t, seed=5)
        residuals.append(direct)
        assert direct <= via_w * (1 + 1e-9)
    assert all(b >= a - 1e-9 for a, b in zip(residuals, residuals[1:]))


def test_limit_check_guards():
    with pytest.raises(InvalidParameter):
        limit_residual_check(40, 3, 2, 1e8, seed=0)
    with pytest.raises(InvalidDims):
        limit_residual_check(10, 6, 6, 1e6, seed=0)


def test_bartlett_and_reduced_share_a_law():
    reduced = [sample_worst_case_error(200, 5, 5, rng=RngStream(seed), method="reduced") for seed in range(400)]
    bartlett = [sample_worst_case_error(200, 5, 5, rng=RngStream(10_000 + seed), method="bartlett") for seed in range(400)]
    assert ks_2samp(reduced, bartlett).pvalue > 1e-3
    assert np.mean(bartlett) == pytest.approx(np.mean(reduced), rel=0.05)


def test_method_resolution():
    assert resolve_method(100, 5, 5) == "reduced"
    assert resolve_method(100_000, 100, 100) == "bartlett"
    assert resolve_method(100, 5, 5, tail=Spectrum.ones(95)) == "implicit"
    with pytest.raises(InvalidParameter):
        resolve_method(100, 5, 5, method="qr")
    with pytest.raises(InvalidParameter):
        resolve_method(100, 5, 5, tail=Spectrum.ones(95), method="reduced")
    with pytest.raises(InvalidParameter):
        resolve_method(12, 5, 5, method="bartlett")


@pytest.mark.parametrize("n, k, p, tail_length", [(10, 10, 0, None), (10, 4, 7, None), (10, 2, 2, 5)])
def test_sampler_rejects_dimensions(n, k, p, tail_length):
    tail = None if tail_length is None else Spectrum.ones(tail_length)
    with pytest.raises(InvalidDims):
        sample_worst_case_error(n, k, p, tail=tail)


def test_estimate_is_deterministic_across_threads():
    serial = estimate_expected_W(80, 4, 4, trials=30, seed=2, threads=1)
    parallel = estimate_expected_W(80, 4, 4, trials=30, seed=2, threads=4)
    assert np.array_equal(serial.draws, parallel.draws)
    assert serial.seeds == trial_seeds(2, 30)
    assert serial.rows()[0][:2] == (0, serial.seeds[0])
    assert serial.summary.trials == 30


def test_point_index_changes_the_streams():
    assert trial_seeds(2, 5, point_index=0) != trial_seeds(2, 5, point_index=1)
    assert trial_seeds(2, 5, point_index=3) == trial_seeds(2, 5, point_index=3)


def test_estimate_needs_two_trials():
    with pytest.raises(InvalidParameter):
        estimate_expected_W(80, 4, 4, trials=1, seed=0)
