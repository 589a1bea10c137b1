"""
Tests for empirical measures, pointwise dimensions and the recurrence-dimension spectrum
"""
import math
import os

import numpy as np
import pytest

from config.map_profiles import CATMAP, DISTINCT_PRODUCT, DOUBLING
from config.settings import EVIDENCE_PATH
from toral.dynamics import TorusPoint
from toral.exceptions import InsufficientDataError, UnsupportedOperationError
from toral.lyapunov import ExponentSpectrum, exact_exponents
from toral.recurrence import Ball
from toral.spectrum import (
    EmpiricalMeasure,
    PointwiseProfile,
    ball_mass,
    box_dimension,
    conjecture_check,
    lebesgue_entropy,
    pointwise_dim,
    pointwise_profile,
    spectrum_curve,
    youngs_check,
)
from toral.svg_plot import PlotSpec, Series, emit_svg

PROFILE_GRID = list(np.geomspace(0.06, 0.005, 8))
SPECTRUM_GRID = list(np.geomspace(5e-2, 1e-5, 16))


# ========== measures ==========

@pytest.mark.smoke
def test_bucket_count_equals_brute_force(catmap_measure):
    rng = np.random.default_rng(23)
    for center, radius in zip(rng.random((40, 2)), rng.uniform(1e-3, 0.2, 40)):
        assert catmap_measure.count(center, float(radius)) == catmap_measure.count_brute_force(center, float(radius))


def test_bucket_count_near_the_seam(catmap_measure):
    center = np.array([0.999, 0.001])
    assert catmap_measure.count(center, 0.01) == catmap_measure.count_brute_force(center, 0.01)


@pytest.mark.statistical
def test_typical_orbit_mass_is_lebesgue(catmap_measure):
    """
    Test the visit frequency of a ball is its area within four standard errors.

    Args:
        catmap_measure: 200 000 point cat map orbit measure.
    """
    rng = np.random.default_rng(29)
    n = catmap_measure.size
    for center in rng.random((10, 2)):
        mass = ball_mass(catmap_measure, Ball(TorusPoint(tuple(center)), 0.05))
        area = 0.1 ** 2
        assert abs(mass - area) <= 4.0 * math.sqrt(area * (1.0 - area) / n)


def test_dirac_measure_mass():
    measure = EmpiricalMeasure.dirac(TorusPoint.of(0.0, 0.0))
    assert ball_mass(measure, Ball(TorusPoint.of(0.01, 0.99), 0.02)) == 1.0
    assert ball_mass(measure, Ball(TorusPoint.of(0.5, 0.5), 0.2)) == 0.0


def test_small_measure_is_rejected():
    measure = EmpiricalMeasure.from_points(np.random.default_rng(1).random((999, 2)))
    with pytest.raises(ValueError):
        ball_mass(measure, Ball(TorusPoint.of(0.5, 0.5), 0.1))


def test_measure_from_map_is_deterministic():
    first = EmpiricalMeasure.from_map(DOUBLING, 2000, seed=3)
    second = EmpiricalMeasure.from_map(DOUBLING, 2000, seed=3)
    assert first.size == 2000
    assert np.array_equal(first.points, second.points)


# ========== box dimension and Young's formula ==========

SCALES = [0.2, 0.1, 0.05, 0.04, 0.02]


@pytest.mark.parametrize("spec, expected", [(CATMAP, 2.0), (DOUBLING, 1.0)])
def test_box_dimension_of_typical_orbits(spec, expected):
    measure = EmpiricalMeasure.from_map(spec, 100_000, seed=5)
    assert box_dimension(measure, SCALES) == pytest.approx(expected, rel=0.1)


def test_box_dimension_of_dirac_measure_is_zero():
    assert box_dimension(EmpiricalMeasure.dirac(TorusPoint.of(0.0, 0.0), 10_000), SCALES) == pytest.approx(0.0)


def test_box_dimension_needs_five_scales(catmap_measure):
    with pytest.raises(ValueError):
        box_dimension(catmap_measure, SCALES[:4])


def test_saturated_scales_are_excluded():
    measure = EmpiricalMeasure.from_map(CATMAP, 1000, seed=5)
    with pytest.raises(InsufficientDataError):
        box_dimension(measure, [0.02, 0.01, 0.005, 0.002, 0.001])


def test_youngs_formula():
    spectrum = exact_exponents(CATMAP)
    report = youngs_check(spectrum, lebesgue_entropy(spectrum), 2.0)
    assert report.predicted == pytest.approx(2.0)
    assert report.relative_error == pytest.approx(0.0, abs=1e-9)
    assert youngs_check(spectrum, 0.0, 0.0).predicted == 0.0


def test_youngs_formula_needs_a_surface_spectrum():
    with pytest.raises(UnsupportedOperationError):
        youngs_check(exact_exponents(DISTINCT_PRODUCT), 1.0, 4.0)
    with pytest.raises(UnsupportedOperationError):
        youngs_check(ExponentSpectrum.from_exponents([0.5, 1.0]), 1.0, 2.0)


def test_conjecture_check_is_exploratory():
    spectrum = exact_exponents(CATMAP)
    report = conjecture_check(spectrum, 2.0, lebesgue_entropy(spectrum))
    assert report["exploratory"] is True
    assert report["conjectured_lower"] == pytest.approx(report["theorem_lower"], rel=1e-6)


# ========== pointwise dimensions ==========

def _synthetic_profile(size: int, taus=None) -> PointwiseProfile:
    radii = tuple(math.exp(-j) for j in range(2, 12))
    # masses follow (2r)^2 while the ball holds 20 points, then collapse to the center alone
    masses = tuple((2 * r) ** 2 if (2 * r) ** 2 * size >= 20 else 1.0 / size for r in radii)
    taus = taus or tuple(2 * j for j in range(2, 12))
    return PointwiseProfile(TorusPoint.of(0.3, 0.6), radii, masses, taus, size)


@pytest.mark.smoke
def test_profile_fits_each_term_on_its_own_window():
    profile = _synthetic_profile(10 ** 9, taus=tuple(2 * j for j in range(2, 11)) + (None,))
    assert [r for r, _ in profile.mass_window()] == [math.exp(-j) for j in range(2, 10)]
    assert len(profile.tau_window()) == 9
    assert profile.censored_radii == 1
    assert profile.fit() == pytest.approx((2.0, 2.0))
    assert profile.dimension(-1.0) == pytest.approx(4.0)
    assert profile.fit_r2(-1.0) == pytest.approx(1.0)


def test_constant_return_times_give_a_flat_recurrence_slope():
    profile = _synthetic_profile(10 ** 9, taus=(3,) * 10)
    assert profile.fit()[1] == 0.0
    assert profile.dimension(-1.0) == profile.dimension(0.0)


def test_profile_without_resolved_masses_is_insufficient():
    with pytest.raises(InsufficientDataError):
        _synthetic_profile(1000).fit()


@pytest.mark.statistical
def test_pointwise_dimension_at_q_zero_is_two(catmap, catmap_measure, typical_point):
    assert pointwise_dim(catmap, catmap_measure, typical_point, 0.0, PROFILE_GRID) == pytest.approx(2.0, rel=0.25)


def test_pointwise_dimension_is_non_increasing_in_q(catmap, catmap_measure, typical_point):
    profile = pointwise_profile(catmap, catmap_measure, typical_point, PROFILE_GRID)
    values = [profile.dimension(q) for q in (-1.0, -0.5, 0.0, 0.5)]
    assert values == sorted(values, reverse=True)


def test_pointwise_dimension_off_support_is_insufficient(catmap):
    measure = EmpiricalMeasure.dirac(TorusPoint.of(0.0, 0.0))
    with pytest.raises(InsufficientDataError):
        pointwise_dim(catmap, measure, TorusPoint.of(0.5, 0.5), 0.0, PROFILE_GRID)


# ========== spectrum ==========

def test_spectrum_needs_twenty_points(catmap, catmap_measure):
    with pytest.raises(ValueError):
        spectrum_curve(catmap, catmap_measure, [0.0], 19, PROFILE_GRID)


@pytest.mark.statistical
@pytest.mark.slow
def test_catmap_spectrum_is_affine(catmap, request):
    """
    Test alpha(q) is the line 2 - q (1/lambda^u - 1/lambda^s) on q in [-1, 0]
    and carries its metadata flags. The curve is saved as test evidence.

    Args:
        catmap: Cat map fixture.
        request: pytest request, names the evidence file.
    """
    measure = EmpiricalMeasure.from_map(catmap, 500_000, seed=31, cell_size=2e-3)
    q_list = [-1.0, -0.75, -0.5, -0.25, 0.0]
    curve = spectrum_curve(catmap, measure, q_list, 30, SPECTRUM_GRID, seed=31)
    assert curve.q_values == tuple(q_list)
    assert list(curve.alpha_values) == sorted(curve.alpha_values, reverse=True)
    slope, intercept, r2 = curve.affine_fit()
    assert slope == pytest.approx(-2.078087, rel=0.25)
    assert intercept == pytest.approx(2.0, rel=0.15)
    assert r2 > 0.95
    assert curve.alpha_at(0.0) == pytest.approx(2.0, rel=0.15)
    assert curve.metadata["inf_at_center"] is True
    assert curve.metadata["percentile"] == 90.0
    assert curve.metadata["exploratory"] is False

    emit_svg(PlotSpec([Series("alpha(q)", list(zip(curve.q_values, curve.alpha_values)))],
                      title="Cat map spectrum", x_label="q", y_label="alpha(q)"),
             os.path.join(EVIDENCE_PATH, f"{request.node.name}_spectrum.svg"))
