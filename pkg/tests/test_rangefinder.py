"""Tests for the range finders and residual reports."""
import math

import numpy as np
import pytest
import scipy.linalg as la

from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import DimensionMismatch, InvalidDims, InvalidParameter, Overflow, RankDeficient
from sketchbound.models import SketchConfig
from sketchbound.rangefinder import (
    power_jensen_gap,
    power_range_finder,
    randomized_svd,
    range_finder,
    reconstruction_errors,
    residual_report,
    run,
    test_matrix as draw_test_matrix,
)
from sketchbound.schemas import ESigmaInvSource
from sketchbound.worstcase import decompose_test_matrix, w_from_factors


def test_exact_rank_two_is_captured():
    result = range_finder(np.diag([5.0, 4.0, 0.0, 0.0]), SketchConfig(k=2, p=0, seed=3))
    assert result.residual_spectral <= 1e-9
    assert result.Q.shape == (4, 2)
    assert result.B is result.Q


def test_zero_matrix_has_zero_residual():
    result = range_finder(np.zeros((5, 5)), SketchConfig(k=2, p=1))
    assert result.residual_spectral == 0.0
    assert any("rank deficient" in note for note in result.notes)


def test_zero_matrix_strict_mode_raises():
    with pytest.raises(RankDeficient):
        range_finder(np.zeros((5, 5)), SketchConfig(k=2, p=1), strict=True)


def test_sketch_wider_than_matrix():
    with pytest.raises(InvalidDims):
        range_finder(np.eye(4), SketchConfig(k=3, p=2))


def test_invalid_sketch_config():
    with pytest.raises(InvalidParameter):
        SketchConfig(k=0, p=1)
    with pytest.raises(InvalidParameter):
        SketchConfig(k=1, p=-1)


def test_identity_residual_matches_w_from_same_g():
    n, cfg = 64, SketchConfig(k=4, p=4, seed=11)
    result = range_finder(Spectrum.ones(n), cfg)
    assert 1 - 1e-9 <= result.residual_spectral

    decomposition = decompose_test_matrix(draw_test_matrix(n, cfg), cfg.k)
    w = w_from_factors(decomposition.X1, decomposition.X2, decomposition.Sigma.values)
    assert result.residual_spectral <= w + 1e-9


def test_residual_bracket_and_determinism(random_matrix):
    A = random_matrix(30, 25) * (0.8 ** np.arange(25))[None, :]
    cfg = SketchConfig(k=3, p=2, seed=5)
    first, second = range_finder(A, cfg), range_finder(A, cfg)
    assert first.residual_spectral == second.residual_spectral
    assert np.array_equal(draw_test_matrix(25, cfg), draw_test_matrix(25, cfg))

    sigma = la.svdvals(A)
    assert sigma[cfg.ell] - 1e-8 * sigma[0] <= first.residual_spectral <= sigma[0] * (1 + 1e-12)
    assert first.sigma_kplus1 == pytest.approx(sigma[cfg.k])
    assert first.sigma_ellplus1 == pytest.approx(sigma[cfg.ell])


def test_implicit_residual_path(random_matrix, settings_env):
    A = random_matrix(40, 30)
    cfg = SketchConfig(k=3, p=3, seed=2)
    dense = range_finder(A, cfg).residual_spectral
    settings_env(dense_limit=10)
    implicit = range_finder(A, cfg)
    assert implicit.residual_spectral == pytest.approx(dense, rel=1e-4)
    assert implicit.spectrum is None
    assert any("not computed" in note for note in implicit.notes)


# Randomized SVD

def test_randomized_svd_reconstructs_exact_low_rank(random_matrix):
    U = la.qr(random_matrix(20, 3), mode="economic")[0]
    V = la.qr(random_matrix(15, 3), mode="economic")[0]
    A = U @ np.diag([3.0, 2.0, 1.0]) @ V.T
    result = randomized_svd(A, SketchConfig(k=3, p=2, seed=1))
    svd = result.svd
    approx = (svd.U * svd.S.values[None, :]) @ svd.V.T
    assert la.norm(A - approx, 2) <= 1e-8 * la.norm(A, 2)
    assert svd.S.values[:3] == pytest.approx([3.0, 2.0, 1.0])


@pytest.mark.parametrize("seed", range(5))
def test_svd_factor_norm_identity(seed, random_matrix):
    A = random_matrix(25, 18)
    result = randomized_svd(A, SketchConfig(k=3, p=3, seed=seed))
    errors = reconstruction_errors(A, result)
    tol = 1e-8 * la.norm(A, 2)
    assert max(errors) - min(errors) <= tol


def test_randomized_svd_interlacing():
    result = randomized_svd(np.diag([2.0, 1.0]), SketchConfig(k=1, p=1))
    assert result.svd.S[0] <= 2.0 + 1e-9


def test_reconstruction_needs_svd(random_matrix):
    A = random_matrix(6, 6)
    with pytest.raises(InvalidParameter):
        reconstruction_errors(A, range_finder(A, SketchConfig(k=2, p=0)))


# Power iteration

def test_power_on_exact_low_rank(random_matrix):
    A = random_matrix(20, 4) @ random_matrix(4, 16)
    for q in (1, 2, 3):
        result = power_range_finder(A, SketchConfig(k=4, p=1, q=q, seed=q))
        assert result.residual_spectral <= 1e-9 * la.norm(A, 2)


def test_power_improves_on_plain_run():
    A = np.zeros((6, 6))
    A[0, 0], A[1, 1] = 1.0, 0.5
    plain = range_finder(A, SketchConfig(k=1, p=1, seed=4))
    powered = power_range_finder(A, SketchConfig(k=1, p=1, q=2, seed=4))
    assert powered.residual_spectral <= plain.residual_spectral + 1e-12


@pytest.mark.parametrize("stabilizer", ["qr", "columns", "none"])
def test_stabilizers_agree_for_small_q(stabilizer, random_matrix):
    A = random_matrix(30, 20) * (0.7 ** np.arange(20))[None, :]
    reference = power_range_finder(A, SketchConfig(k=3, p=2, q=1, seed=8))
    result = power_range_finder(A, SketchConfig(k=3, p=2, q=1, seed=8), stabilizer=stabilizer)
    assert result.residual_spectral == pytest.approx(reference.residual_spectral, rel=1e-6)


def test_unstabilized_power_flags_overflow():
    A = np.diag([1e101, 1.0, 1.0, 1.0])
    result = power_range_finder(A, SketchConfig(k=1, p=1, q=1), stabilizer="none")
    assert any("overflow" in note for note in result.notes)


def test_unstabilized_power_raises_on_nonfinite_product():
    A = np.diag([1e80, 1.0, 1.0, 1.0])
    with pytest.raises(Overflow) as excinfo:
        power_range_finder(A, SketchConfig(k=1, p=1, q=2), stabilizer="none")
    assert excinfo.value.product == 4
    assert excinfo.value.exit_code == 2
    assert "'qr'" in str(excinfo.value)


def test_power_checks_test_matrix_rows():
    with pytest.raises(DimensionMismatch):
        power_range_finder(np.eye(5), SketchConfig(k=1, p=1, q=1), test_matrix_override=np.ones((4, 2)))


def test_randomized_svd_uses_requested_stabilizer(random_matrix):
    A = random_matrix(12, 9)
    result = randomized_svd(A, SketchConfig(k=2, p=2, q=1, seed=3), stabilizer="columns")
    assert any("'columns'" in note for note in result.notes)
    reference = randomized_svd(A, SketchConfig(k=2, p=2, q=1, seed=3))
    assert result.residual_spectral == pytest.approx(reference.residual_spectral, rel=1e-6)


def test_power_requires_q():
    with pytest.raises(InvalidParameter):
        power_range_finder(np.eye(4), SketchConfig(k=1, p=1, q=0))


@pytest.mark.parametrize("q", [1, 2, 3])
def test_power_jensen_inequality(q, random_matrix):
    A = random_matrix(14, 11)
    A /= la.norm(A, 2)
    result = range_finder(A, SketchConfig(k=2, p=2, seed=q))
    assert power_jensen_gap(A, result.Q, q) >= -1e-6


def test_run_dispatch():
    A = np.diag([3.0, 2.0, 1.0, 0.5])
    assert run(A, SketchConfig(k=1, p=1)).algorithm == "range_finder"
    assert run(A, SketchConfig(k=1, p=1, q=1)).algorithm == "power_range_finder"
    assert run(A, SketchConfig(k=1, p=1), "svd").algorithm == "randomized_svd"
    with pytest.raises(InvalidParameter):
        run(A, SketchConfig(k=1, p=1), "lanczos")
    with pytest.raises(InvalidParameter, match="no power iterations"):
        run(A, SketchConfig(k=1, p=1, q=1), "range")


# Reports

def test_report_on_exact_low_rank():
    A = np.diag([5.0, 4.0, 0.0, 0.0])
    result = range_finder(A, SketchConfig(k=2, p=0))
    report = residual_report(A, result, include_bounds=False)
    assert report.ratio == 1.0
    assert report.ratio_convention == "one_by_convention"
    assert report.sigma_k_plus_1 == 0.0


def test_report_tail_arithmetic():
    A = np.diag([2.0, 1.0, 1.0])
    report = residual_report(A, range_finder(A, SketchConfig(k=1, p=1)), include_bounds=False)
    assert report.sigma_k_plus_1 == 1.0
    assert report.frob_tail == pytest.approx(math.sqrt(2))
    assert report.ratio_convention == "finite"


def test_report_carries_bounds_and_mixed_norm():
    n = 60
    A = Spectrum(np.concatenate([np.full(3, 10.0), 0.5 ** np.arange(n - 3)]))
    result = range_finder(A, SketchConfig(k=3, p=3, seed=1))
    report = residual_report(A, result, bound_trials=200)
    assert report.bounds is not None
    assert report.bounds.sharp_upper is not None
    assert report.mixed_norm_bound is not None
    assert report.residual_spectral <= report.bounds.hmt_upper * report.sigma_k_plus_1

    closed = residual_report(A, result, source=ESigmaInvSource.closed_form_upper)
    assert closed.bounds.e_sigma_inv_ci == 0.0
