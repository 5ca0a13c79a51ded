"""Tests for closed-form bounds, Monte Carlo estimators and bound sets."""
import math

import pytest

from sketchbound import bounds
from sketchbound.core.spectrum import Spectrum
from sketchbound.errors import InvalidDims, InvalidOversampling, InvalidParameter
from sketchbound.schemas import ESigmaInvSource
from sketchbound.worstcase import estimate_expected_W


def test_hmt_closed_form():
    assert bounds.bound_hmt(100, 400, 10, 10) == pytest.approx(1 + 4 * math.sqrt(20) / 9 * 10)
    with pytest.raises(InvalidOversampling):
        bounds.bound_hmt(100, 100, 10, 1)


def test_sigma_inv_bracket():
    lower, upper = bounds.sigma_inv_norm_bounds(10, 10)
    assert lower == pytest.approx(1 / math.sqrt(11))
    assert upper == pytest.approx(math.e * math.sqrt(20) / 10)
    with pytest.raises(InvalidOversampling):
        bounds.sigma_inv_norm_bounds(10, 0)


def test_sharp_bounds_closed_form():
    assert bounds.bound_sharp_upper(100, 10, 10, 0.5) == pytest.approx(1 + (math.sqrt(90) + math.sqrt(10)) * 0.5)
    assert bounds.bound_sharp_lower(100, 10, 10, 0.5) == pytest.approx(math.sqrt(78) * 0.5)
    with pytest.raises(InvalidDims):
        bounds.bound_sharp_lower(20, 10, 8, 0.5)
    with pytest.raises(InvalidParameter):
        bounds.bound_sharp_upper(100, 10, 10, 0.0)


def test_proxy_and_power_trick():
    proxy = bounds.error_proxy(10**9, 200, 200)
    assert proxy == pytest.approx(math.sqrt(1e9) / (20 - math.sqrt(200)))
    assert 3.40 <= bounds.power_trick_factor(proxy, 3) <= 3.43
    assert bounds.power_trick_factor(proxy, 0) == proxy
    with pytest.raises(InvalidOversampling):
        bounds.error_proxy(100, 10, 0)


def test_asymptotic_bounds():
    lower, upper = bounds.asymptotic_bounds(100, 10, 10)
    gap = math.sqrt(20) - math.sqrt(10)
    assert lower == pytest.approx(math.sqrt(80) / gap)
    assert upper == pytest.approx((math.sqrt(90) + math.sqrt(10)) / gap)
    with pytest.raises(InvalidDims):
        bounds.asymptotic_bounds(20, 10, 10)


def test_mixed_norm_bound():
    spectrum = Spectrum([4.0, 3.0, 1.0, 1.0])
    value = bounds.mixed_norm_bound(spectrum, 1, 3, 0.5)
    assert value == pytest.approx((1 + math.sqrt(1 / 2)) * 3.0 + 0.5 * math.sqrt(11))
    with pytest.raises(InvalidOversampling):
        bounds.mixed_norm_bound(spectrum, 1, 1, 0.5)


def test_sigma_inv_estimate_inside_bracket():
    estimate = bounds.estimate_sigma_inv_norm(5, 5, trials=500, seed=3)
    lower, upper = bounds.sigma_inv_norm_bounds(5, 5)
    assert lower <= estimate.mean <= upper
    assert estimate.trials == 500
    assert estimate.ci_half_width == pytest.approx(3 * estimate.std / math.sqrt(500))


def test_wishart_trace_identity():
    estimate = bounds.estimate_sigma_inv_frob_sq(3, 9, trials=2000, seed=1)
    assert estimate.contains(3 / 8, widths=1.5)


def test_estimators_reject_bad_parameters():
    with pytest.raises(InvalidOversampling):
        bounds.estimate_sigma_inv_norm(5, 0, trials=200, seed=0)
    with pytest.raises(InvalidOversampling):
        bounds.estimate_sigma_inv_frob_sq(5, 1, trials=200, seed=0)
    with pytest.raises(InvalidParameter):
        bounds.estimate_sigma_inv_norm(5, 5, trials=10, seed=0)
    with pytest.raises(InvalidDims):
        bounds.estimate_extreme_singular_values(10, 10, trials=10, seed=0)


def test_estimates_are_independent_of_thread_count():
    serial = bounds.estimate_sigma_inv_norm(4, 4, trials=200, seed=9, threads=1)
    parallel = bounds.estimate_sigma_inv_norm(4, 4, trials=200, seed=9, threads=4)
    assert serial.mean == parallel.mean
    assert serial.std == parallel.std


def test_extreme_singular_values_within_bracket():
    smallest, largest = bounds.estimate_extreme_singular_values(200, 50, trials=50, seed=2)
    lower, upper = bounds.extreme_singular_value_bracket(200, 50)
    assert smallest.mean + smallest.ci_half_width >= lower
    assert largest.mean - largest.ci_half_width <= upper
    assert smallest.mean < largest.mean


def test_closed_form_source_has_no_ci():
    value, ci = bounds.resolve_e_sigma_inv(10, 10, ESigmaInvSource.closed_form_upper)
    assert value == pytest.approx(math.e * math.sqrt(20) / 10)
    assert ci == 0.0
    value, _ = bounds.resolve_e_sigma_inv(10, 10, "closed_form_lower")
    assert value == pytest.approx(1 / math.sqrt(11))


def test_bound_set_full_record():
    record = bounds.bound_set(200, 100, 10, 10, trials=200, seed=4, power_q=[1, 3])
    assert record.hmt_upper == pytest.approx(bounds.bound_hmt(200, 100, 10, 10))
    assert record.e_sigma_inv is not None and record.e_sigma_inv_ci > 0
    assert record.sharp_lower < record.sharp_upper
    assert record.sharp_upper == pytest.approx(bounds.bound_sharp_upper(100, 10, 10, record.e_sigma_inv))
    assert record.proxy == pytest.approx(bounds.error_proxy(100, 10, 10))
    assert record.asymptotic_lower < record.asymptotic_upper
    assert set(record.power_proxy) == {1, 3}
    assert record.power_proxy[3] == pytest.approx(record.proxy ** (1 / 7))
    assert len(record.csv_row()) == len(record.CSV_HEADER)


def test_bound_set_absent_components():
    single = bounds.bound_set(50, 50, 5, 1, trials=100)
    assert single.hmt_upper is None
    assert single.mixed_norm_flat is None
    assert single.e_sigma_inv is not None
    assert single.sharp_upper is not None

    bare = bounds.bound_set(50, 50, 5, 0, trials=100)
    assert bare.e_sigma_inv is None
    assert bare.sharp_upper is None and bare.sharp_lower is None
    assert bare.proxy is None and bare.asymptotic_upper is None


def test_bound_set_is_deterministic():
    first = bounds.bound_set(80, 80, 4, 4, trials=150, seed=12)
    second = bounds.bound_set(80, 80, 4, 4, trials=150, seed=12)
    assert first == second


@pytest.mark.parametrize(
    "m, n, k, p, expected",
    [(10**5, 10**5, 100, 100, 181.70), (10**4, 10**4, 100, 100, 58.14), (1, 1, 1, 2, 7.928)],
)
def test_hmt_reference_values(m, n, k, p, expected):
    assert bounds.bound_hmt(m, n, k, p) == pytest.approx(expected, abs=0.01)


def test_reference_values_at_desk_scale():
    lower, upper = bounds.sigma_inv_norm_bounds(100, 100)
    assert lower == pytest.approx(0.0995, abs=1e-4)
    assert upper == pytest.approx(0.3845, abs=2e-4)
    assert bounds.sigma_inv_norm_bounds(200, 200)[1] == pytest.approx(0.2718, abs=1e-4)
    assert bounds.bound_sharp_upper(10**5, 100, 100, upper) == pytest.approx(126.4, abs=0.1)
    assert bounds.error_proxy(10**5, 100, 100) == pytest.approx(76.33, abs=0.05)
    assert bounds.error_proxy(10**5, 1000, 1000) == pytest.approx(24.14, abs=0.05)


def test_flat_mixed_norm_matches_explicit_spectrum():
    explicit = bounds.mixed_norm_bound(Spectrum.ones(50), 5, 4, 0.3)
    assert bounds.mixed_norm_flat(50, 5, 4, 0.3) == pytest.approx(explicit)
    assert bounds.bound_set(10**9, 10**9, 200, 200, trials=100).mixed_norm_flat is not None


@pytest.mark.parametrize("source", [ESigmaInvSource.closed_form_upper, ESigmaInvSource.closed_form_lower])
def test_closed_form_sources_pair_bracket_ends(source):
    lower, upper = bounds.sigma_inv_norm_bounds(100, 100)
    record = bounds.bound_set(10**5, 10**5, 100, 100, source=source)
    assert record.e_sigma_inv == (upper if source is ESigmaInvSource.closed_form_upper else lower)
    assert (record.e_sigma_inv_lower, record.e_sigma_inv_upper) == (lower, upper)
    assert record.sharp_upper == pytest.approx(bounds.bound_sharp_upper(10**5, 100, 100, upper))
    assert record.sharp_lower == pytest.approx(bounds.bound_sharp_lower(10**5, 100, 100, lower))
    assert record.sharp_lower < record.proxy < record.sharp_upper


def test_monte_carlo_source_feeds_both_sharp_bounds():
    record = bounds.bound_set(400, 400, 10, 10, trials=100, seed=3)
    assert record.e_sigma_inv_lower == record.e_sigma_inv_upper == record.e_sigma_inv


@pytest.mark.parametrize("source", ["closed_form_upper", "closed_form_lower"])
def test_mean_w_inside_closed_form_sharp_bracket(source):
    n, k, p = 2000, 10, 10
    record = bounds.bound_set(n, n, k, p, source=source)
    summary = estimate_expected_W(n, k, p, trials=200, seed=5).summary
    assert record.sharp_lower <= summary.mean <= record.sharp_upper


ORDERING_GRID = [
    (n, r)
    for n in (10**3, 10**4, 10**5, 10**6)
    for r in (2, 25, n // 100, n // 10)
]


@pytest.mark.parametrize("n, r", ORDERING_GRID)
def test_closed_form_sharp_upper_improves_on_prior_bound(n, r):
    record = bounds.bound_set(n, n, r, r, source="closed_form_upper")
    assert record.sharp_upper <= record.hmt_upper
    assert record.sharp_lower <= record.sharp_upper


@pytest.mark.parametrize(
    "n, k, p",
    [(10**4, 50, 50), (10**5, 100, 100), (10**5, 500, 500), (10**6, 1000, 1000), (10**6, 50, 200), (10**9, 200, 200)],
)
def test_proxy_between_asymptotic_bounds(n, k, p):
    lower, upper = bounds.asymptotic_bounds(n, k, p)
    proxy = bounds.error_proxy(n, k, p)
    assert lower <= proxy <= 1.05 * upper
