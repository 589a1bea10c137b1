"""
Tests for return times of balls, cylinders and Bowen balls
"""
import statistics

import numpy as np
import pytest

from config.map_profiles import CATMAP
from toral.dynamics import TorusPoint, orbit_exact, torus_distance
from toral.exceptions import InsufficientSamplingError, UnsupportedOperationError
from toral.numtheory import enumerate_periodic_points
from toral.recurrence import (
    Ball,
    BowenBallSpec,
    Partition,
    ReturnMethod,
    Word,
    border_lengths,
    cylinder_return_series,
    default_horizon,
    factor_return_times,
    itinerary,
    radius_grid,
    slope_series,
    tau_ball_exact,
    tau_ball_sample,
    tau_bowen_sample,
    tau_word,
)


# ========== balls ==========

@pytest.mark.smoke
def test_fixed_point_returns_at_once(catmap):
    result = tau_ball_exact(catmap, Ball(TorusPoint.of(0.0, 0.0), 0.01))
    assert result.tau == 1
    assert result.method is ReturnMethod.EXACT_LATTICE


@pytest.mark.smoke
def test_doubling_interval_returns_after_two_steps(doubling):
    """
    Test [0.3, 0.35] misses itself under x -> 2x and meets itself under x -> 4x.

    Args:
        doubling: Doubling map fixture.
    """
    ball = Ball(TorusPoint.of(0.325), 0.025)
    exact = tau_ball_exact(doubling, ball)
    assert exact.tau == 2
    assert exact.method is ReturnMethod.INTERVAL_EXACT
    assert tau_ball_sample(doubling, ball, samples=1000, seed=1).tau == 2


def test_ball_radius_must_be_below_a_quarter():
    with pytest.raises(ValueError):
        Ball(TorusPoint.of(0.1, 0.1), 0.25)
    with pytest.raises(ValueError):
        Ball(TorusPoint.of(0.1, 0.1), 0.0)


def test_exact_witness_is_a_genuine_return(catmap, typical_point):
    """
    Test the witness pair lies in the ball and the image is the exact k-th iterate of the start.

    Args:
        catmap: Cat map fixture.
        typical_point: Generic point fixture.
    """
    ball = Ball(typical_point, 1e-3)
    result = tau_ball_exact(catmap, ball)
    assert result.found
    witness = result.witness
    assert orbit_exact(catmap, witness.start, result.tau)[-1] == witness.image
    assert torus_distance(witness.start_point, typical_point) <= ball.radius + 1e-12
    assert torus_distance(witness.image_point, typical_point) <= ball.radius + 1e-12


def test_sampled_witness_is_a_genuine_return(catmap, typical_point):
    result = tau_ball_sample(catmap, Ball(typical_point, 0.02), samples=2000, seed=4)
    assert result.found
    assert orbit_exact(catmap, result.witness.start, result.tau)[-1] == result.witness.image


@pytest.mark.critical
def test_sampled_return_never_undercuts_exact(catmap):
    rng = np.random.default_rng(8)
    for center, radius in zip(rng.random((12, 2)), rng.uniform(0.005, 0.05, 12)):
        ball = Ball(TorusPoint(tuple(center)), float(radius))
        exact = tau_ball_exact(catmap, ball, 40).tau
        sampled = tau_ball_sample(catmap, ball, 40, samples=2000, seed=8).tau
        assert exact is not None
        assert sampled is None or sampled >= exact


def test_center_only_sample_is_an_upper_bound(catmap, typical_point):
    ball = Ball(typical_point, 0.01)
    sampled = tau_ball_sample(catmap, ball, 60, samples=1, seed=0)
    assert sampled.tau is None or sampled.tau >= tau_ball_exact(catmap, ball, 60).tau


@pytest.mark.critical
def test_return_time_is_monotone_under_nesting(catmap, expanding):
    rng = np.random.default_rng(21)
    for system in (catmap, expanding):
        for center in rng.random((6, 2)):
            x = TorusPoint(tuple(center))
            taus = [tau_ball_exact(system, Ball(x, r), 80).tau for r in (0.04, 0.01, 0.0025)]
            assert None not in taus
            assert taus[0] <= taus[1] <= taus[2]


def test_exhausted_budget_censors_the_result(catmap, typical_point):
    result = tau_ball_exact(catmap, Ball(typical_point, 1e-3), budget=1)
    assert result.budget_exhausted
    assert result.tau is None
    assert result.cutoff >= 0


def test_short_horizon_reports_not_found(catmap, typical_point):
    result = tau_ball_exact(catmap, Ball(typical_point, 1e-4), k_max=2)
    assert not result.found
    assert result.cutoff == 2


def test_default_horizon():
    assert default_horizon(1e-3, 0.962424) == 29
    assert default_horizon(0.2, 10.0) == 1


def test_product_returns_no_earlier_than_its_factors(product):
    rng = np.random.default_rng(2)
    for center in rng.random((5, 4)):
        ball = Ball(TorusPoint(tuple(center)), 0.05)
        whole = tau_ball_exact(product, ball, 64).tau
        factors = [f.tau for f in factor_return_times(product, ball, 64)]
        assert whole is None or whole >= max(factors)


def test_product_with_fixed_second_factor_follows_the_first(product, catmap):
    ball = Ball(TorusPoint.of(0.41, 0.77, 0.0, 0.0), 0.01)
    assert tau_ball_exact(product, ball, 64).tau == tau_ball_exact(catmap, ball.factor(0), 64).tau


def test_factor_return_times_need_a_product(catmap, typical_point):
    with pytest.raises(UnsupportedOperationError):
        factor_return_times(catmap, Ball(typical_point, 0.01))


def test_periodic_centers_return_within_their_period(catmap):
    for p in (1, 2, 3):
        for point in enumerate_periodic_points(CATMAP.matrix, p):
            result = tau_ball_exact(catmap, Ball(TorusPoint.from_exact(point), 1e-3), p)
            assert result.tau is not None and result.tau <= p


# ========== words and cylinders ==========

@pytest.mark.smoke
@pytest.mark.parametrize("word, expected", [
    ("00000", 1),
    ("0101", 2),
    ("0011", 4),
    ("0", 1),
    ("010010", 3),
])
def test_word_return_is_least_self_overlap(word, expected):
    assert tau_word(Word.from_string(word)) == expected


def test_border_lengths():
    assert border_lengths([0, 1, 0, 0, 1, 0]) == [0, 0, 1, 1, 2, 3]


def test_random_words_rarely_overlap(scale):
    rng = np.random.default_rng(13)
    ratios = [tau_word(Word(tuple(int(s) for s in rng.integers(0, 2, 128)))) / 128
              for _ in range(scale["words"])]
    assert all(0.0 < r <= 1.0 for r in ratios)
    assert statistics.mean(ratios) >= 0.95


def test_two_sided_word_follows_the_same_rule():
    assert tau_word(Word.from_string("1101"), two_sided=True) == 3


def test_empty_word_is_rejected():
    with pytest.raises(ValueError):
        Word(())
    with pytest.raises(ValueError):
        Word.from_string("012")


@pytest.mark.parametrize("x, n, expected", [
    (0.8, 3, (1, 1, 0)),
    (0.0, 5, (0, 0, 0, 0, 0)),
    (0.25, 3, (0, 1, 0)),
])
def test_doubling_itinerary(doubling, x, n, expected):
    assert itinerary(doubling, TorusPoint.of(x), n, Partition.binary_markov()).symbols == expected


def test_itinerary_records_boundary_hits(doubling):
    word = itinerary(doubling, TorusPoint.of(0.25), 3, Partition.binary_markov())
    assert 1 in word.boundary_hits


def test_binary_partition_needs_the_doubling_map(catmap, typical_point):
    with pytest.raises(UnsupportedOperationError):
        itinerary(catmap, typical_point, 4, Partition.binary_markov())


def test_grid_itinerary_alphabet(catmap, typical_point):
    word = itinerary(catmap, typical_point, 20, Partition.grid(3))
    assert word.alphabet_size == 9
    assert len(word) == 20
    assert word.symbols[0] == 1 + 3 * 1


def test_cylinder_return_ratios(doubling):
    series = cylinder_return_series(doubling, TorusPoint.of(0.337), 64, Partition.binary_markov())
    assert [row[0] for row in series] == list(range(1, 65))
    assert all(0.0 < ratio <= 1.0 for _, _, ratio in series)


# ========== Bowen balls ==========

def test_trivial_bowen_ball_is_a_ball(catmap, typical_point):
    spec = BowenBallSpec(typical_point, 0, 0, 0.05)
    bowen = tau_bowen_sample(catmap, spec, 30, samples=500, seed=3)
    ball = tau_ball_sample(catmap, Ball(typical_point, 0.05), 30, samples=500, seed=3)
    assert bowen.tau == ball.tau


def test_periodic_center_bounds_bowen_return(catmap):
    """
    Test a Bowen ball around a point of period 5 returns within 5 steps.

    Args:
        catmap: Cat map fixture.
    """
    point = next(p for p in enumerate_periodic_points(CATMAP.matrix, 5) if any(p))
    spec = BowenBallSpec(TorusPoint.from_exact(point), 2, 2, 0.05)
    result = tau_bowen_sample(catmap, spec, 10, samples=500, seed=5)
    assert result.tau is not None and result.tau <= 5


def test_backward_depth_needs_an_invertible_map(doubling):
    with pytest.raises(UnsupportedOperationError):
        tau_bowen_sample(doubling, BowenBallSpec(TorusPoint.of(0.3), 1, 1, 0.05), 10)


def test_thin_bowen_ball_is_reported(catmap, typical_point):
    with pytest.raises(InsufficientSamplingError):
        tau_bowen_sample(catmap, BowenBallSpec(typical_point, 15, 15, 0.01), 10, samples=10, seed=1)


# ========== slope series ==========

def test_radius_grid_is_geometric():
    radii = radius_grid(1e-4, 1e-2, 5)
    assert radii[0] == pytest.approx(1e-2)
    assert radii[-1] == pytest.approx(1e-4)
    assert radii[1] / radii[0] == pytest.approx(radii[2] / radii[1])
    with pytest.raises(ValueError):
        radius_grid(1e-2, 1e-4, 5)
    with pytest.raises(ValueError):
        radius_grid(1e-4, 1e-2, 3)


def test_fixed_point_center_is_flagged(catmap):
    series = slope_series(catmap, TorusPoint.of(0.0, 0.0), 1e-4, 1e-2, 6)
    assert all(p.tau == 1 for p in series.points)
    assert any("fixed point" in w for w in series.warnings)


@pytest.mark.statistical
@pytest.mark.slow
def test_catmap_slope_near_corollary_limit(catmap, scale):
    rng = np.random.default_rng(17)
    slopes = [slope_series(catmap, TorusPoint(tuple(c)), 1e-5, 1e-2, 12).summary.slope
              for c in rng.random((scale["points"], 2))]
    assert statistics.median(slopes) == pytest.approx(2.078087, rel=0.25)


@pytest.mark.statistical
@pytest.mark.slow
def test_doubling_slope_near_inverse_log_two(doubling, scale):
    rng = np.random.default_rng(19)
    slopes = [slope_series(doubling, TorusPoint.of(float(c)), 1e-5, 1e-2, 12).summary.slope
              for c in rng.random(scale["points"])]
    assert statistics.median(slopes) == pytest.approx(1.442695, rel=0.25)


@pytest.mark.statistical
@pytest.mark.slow
def test_expanding_slope_inside_the_strict_bracket(expanding, scale):
    """
    Test the expanding map's recurrence slopes sit strictly between 1/lambda_max and
    1/lambda_min at every point, with the median near 2/(lambda_max + lambda_min).

    Args:
        expanding: Expanding map [[6, 3], [3, 3]] fixture.
        scale: Sample sizes selected with --Scale.
    """
    rng = np.random.default_rng(21)
    slopes = [slope_series(expanding, TorusPoint(tuple(c)), 1e-4, 1e-2, 12).summary.slope
              for c in rng.random((scale["points"], 2))]
    assert all(0.485 < s < 7.343 for s in slopes)
    assert statistics.median(slopes) == pytest.approx(0.910239, rel=0.2)
