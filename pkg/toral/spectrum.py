"""
Empirical invariant measures, pointwise dimensions and the recurrence-dimension spectrum.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from config import settings
from toral.dynamics import MapLike, Orbit, TorusPoint, as_map, coordinate_distance, lattice_orbit
from toral.exceptions import InsufficientDataError, UnsupportedOperationError
from toral.lyapunov import ExponentSpectrum, theorem_bounds
from toral.parallel import parallel_map
from toral.recurrence import Ball, tau_ball_exact

logger = logging.getLogger(__name__)

MIN_MEASURE_SIZE = 1000
MIN_USABLE_RADII = 4
# below this many orbit points in a ball, log-mass is counting noise
MIN_BALL_POINTS = 20
MIN_SAMPLE_POINTS = 20
MIN_BOX_SCALES = 5
SATURATION_FRACTION = 0.1
MAX_FAILURE_FRACTION = 0.5
# beyond this many buckets per query a linear scan is cheaper
_MAX_QUERY_CELLS = 4096


@dataclass(frozen=True)
class EmpiricalMeasure:
    """
    Orbit measure mu_N with a uniform-grid bucket index.

    Attributes:
        points (np.ndarray): Orbit points, shape (N, d).
        cell_size (float): Bucket side h.
        cells (int): Buckets per coordinate, floor(1 / h).
        order (np.ndarray): Point indices sorted by bucket id.
        sorted_ids (np.ndarray): Bucket ids in that order.
    """
    points: np.ndarray
    cell_size: float
    cells: int
    order: np.ndarray = field(repr=False)
    sorted_ids: np.ndarray = field(repr=False)

    @classmethod
    def from_orbit(cls, orbit: Orbit, cell_size: float = 1e-2) -> "EmpiricalMeasure":
        """
        Index the points of an orbit segment.

        Args:
            orbit (Orbit): Support orbit.
            cell_size (float): Bucket side, normally the smallest query radius.

        Returns:
            EmpiricalMeasure: Immutable measure, safe for concurrent queries.
        """
        return cls.from_points(orbit.points, cell_size)

    @classmethod
    def from_points(cls, points: np.ndarray, cell_size: float = 1e-2) -> "EmpiricalMeasure":
        if not 0.0 < cell_size <= 1.0:
            raise ValueError(f"cell_size must lie in (0, 1], got {cell_size}")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cells = max(1, int(1.0 / cell_size))
        ids = _bucket_ids(points, cells)
        order = np.argsort(ids, kind="stable")
        return cls(points, cell_size, cells, order, ids[order])

    @classmethod
    def from_map(cls, system: MapLike, n: int, seed: int = settings.DEFAULT_SEED,
                 cell_size: float = 1e-2) -> "EmpiricalMeasure":
        """Lebesgue-typical measure: exact lattice orbit of length n from a seeded random start."""
        torus_map = as_map(system)
        start = TorusPoint(tuple(np.random.default_rng(seed).random(torus_map.dimension)))
        return cls.from_orbit(lattice_orbit(torus_map, start, n - 1), cell_size)

    @classmethod
    def dirac(cls, point: TorusPoint, n: int = MIN_MEASURE_SIZE, cell_size: float = 1e-2) -> "EmpiricalMeasure":
        """Constant orbit at a fixed point."""
        return cls.from_points(np.tile(point.as_array(), (n, 1)), cell_size)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def count_brute_force(self, center: np.ndarray, radius: float) -> int:
        distances = coordinate_distance(self.points, center).max(axis=1)
        return int(np.count_nonzero(distances <= radius))

    def count(self, center: np.ndarray, radius: float) -> int:
        """Exact number of orbit points in the closed max-norm ball."""
        axes = [_cell_span(c, radius, self.cells) for c in center]
        if math.prod(len(a) for a in axes) > _MAX_QUERY_CELLS:
            return self.count_brute_force(center, radius)
        weights = self.cells ** np.arange(self.dimension)
        total = 0
        for combo in itertools.product(*axes):
            cell_id = int(np.dot(combo, weights))
            lo = np.searchsorted(self.sorted_ids, cell_id, side="left")
            hi = np.searchsorted(self.sorted_ids, cell_id, side="right")
            if hi > lo:
                members = self.points[self.order[lo:hi]]
                total += int(np.count_nonzero(coordinate_distance(members, center).max(axis=1) <= radius))
        return total


def _bucket_ids(points: np.ndarray, cells: int) -> np.ndarray:
    indices = np.minimum((points * cells).astype(np.int64), cells - 1)
    weights = cells ** np.arange(points.shape[1], dtype=np.int64)
    return indices @ weights


def _cell_span(coordinate: float, radius: float, cells: int) -> List[int]:
    first = math.floor((coordinate - radius) * cells) - 1
    last = math.floor((coordinate + radius) * cells) + 1
    if last - first + 1 >= cells:
        return list(range(cells))
    return sorted({c % cells for c in range(first, last + 1)})


def ball_mass(measure: EmpiricalMeasure, ball: Ball) -> float:
    """
    mu_N(B): exact visit frequency of the orbit in the ball.

    Args:
        measure (EmpiricalMeasure): Orbit measure with N >= 1000 points.
        ball (Ball): Max-norm ball.

    Returns:
        float: Frequency in [0, 1].
    """
    if measure.size < MIN_MEASURE_SIZE:
        raise ValueError(f"Empirical measure needs N >= {MIN_MEASURE_SIZE}, got {measure.size}")
    if measure.dimension != ball.dimension:
        raise ValueError(f"Measure on T^{measure.dimension}, ball in T^{ball.dimension}")
    return measure.count(ball.center.as_array(), ball.radius) / measure.size


# ========== pointwise dimensions ==========

@dataclass(frozen=True)
class PointwiseProfile:
    """
    Per-radius masses and return times at one point, reused for every q.

    The two terms of d_{mu,q} are regressed on the radii where each is resolved: the mass
    term on balls holding at least MIN_BALL_POINTS orbit points, the return-time term on
    every radius with a found tau. On a common set of radii this is the slope of the sum.

    Attributes:
        center (TorusPoint): Evaluation point (the infimum over the ball is taken at the center).
        radii (Tuple[float, ...]): Radius grid.
        masses (Tuple[float, ...]): mu_N(B(x, r)).
        taus (Tuple[Optional[int], ...]): Exact tau(B(x, r)), None when censored.
        measure_size (int): N, the number of orbit points behind the masses.
    """
    center: TorusPoint
    radii: Tuple[float, ...]
    masses: Tuple[float, ...]
    taus: Tuple[Optional[int], ...]
    measure_size: int

    def mass_window(self) -> List[Tuple[float, float]]:
        """(r, mass) for the balls holding at least MIN_BALL_POINTS orbit points."""
        floor = MIN_BALL_POINTS / self.measure_size
        return [(r, m) for r, m in zip(self.radii, self.masses) if m > 0 and m >= floor]

    def tau_window(self) -> List[Tuple[float, int]]:
        """(r, tau) for the radii with a return inside the horizon."""
        return [(r, t) for r, t in zip(self.radii, self.taus) if t is not None]

    @property
    def censored_radii(self) -> int:
        return sum(t is None for t in self.taus)

    def _fits(self):
        mass, taus = self.mass_window(), self.tau_window()
        if len(mass) < MIN_USABLE_RADII or len(taus) < MIN_USABLE_RADII:
            raise InsufficientDataError(
                f"At {self.center.coords}: {len(mass)} resolved masses and {len(taus)} found returns, "
                f"need {MIN_USABLE_RADII} of each")
        mass_fit = linregress(np.log([r for r, _ in mass]), np.log([m for _, m in mass]))
        tau_fit = linregress(-np.log([r for r, _ in taus]), [t for _, t in taus])
        return mass_fit, tau_fit

    def fit(self) -> Tuple[float, float]:
        """
        Mass and recurrence slopes (D_mu, R_tau).

        tau is non-increasing in r under nesting, so R_tau >= 0 without clipping.

        Raises:
            InsufficientDataError: Fewer than 4 resolved masses or fewer than 4 found returns.
        """
        mass_fit, tau_fit = self._fits()
        return float(mass_fit.slope), float(tau_fit.slope)

    def fit_r2(self, q: float) -> float:
        """R^2 of the weakest regression entering d_{mu,q}."""
        mass_fit, tau_fit = self._fits()
        if q == 0:
            return float(mass_fit.rvalue ** 2)
        return float(min(mass_fit.rvalue ** 2, tau_fit.rvalue ** 2))

    def dimension(self, q: float) -> float:
        mass_slope, tau_slope = self.fit()
        return mass_slope - q * tau_slope


def pointwise_profile(system: MapLike, measure: EmpiricalMeasure, x: TorusPoint, r_grid: Sequence[float],
                      k_max: Optional[int] = None) -> PointwiseProfile:
    """
    Masses and exact return times of the balls B(x, r) over a radius grid.

    Args:
        system (MapLike): Map under study.
        measure (EmpiricalMeasure): Invariant measure estimate.
        x (TorusPoint): Center.
        r_grid (Sequence[float]): Radii, typically geometric.
        k_max (int, optional): Return-time horizon.

    Returns:
        PointwiseProfile: One entry per radius.
    """
    torus_map = as_map(system)
    masses, taus = [], []
    for r in r_grid:
        ball = Ball(x, r)
        masses.append(ball_mass(measure, ball))
        taus.append(tau_ball_exact(torus_map, ball, k_max).tau)
    return PointwiseProfile(x, tuple(r_grid), tuple(masses), tuple(taus), measure.size)


def pointwise_dim(system: MapLike, measure: EmpiricalMeasure, x: TorusPoint, q: float, r_grid: Sequence[float],
                  k_max: Optional[int] = None, seed: int = settings.DEFAULT_SEED) -> float:
    """
    Regression estimate of d_{mu,q}(x), the slope of log mu(B(x,r)) + q tau(B(x,r)) against log r.

    The slope splits as D_mu - q R_tau with D_mu the slope of log mass on log r and R_tau the
    slope of tau on -log r, so the estimate is affine and non-increasing in q. D_mu is fitted on
    the radii whose ball holds at least MIN_BALL_POINTS orbit points; R_tau on every radius with a
    found return, which lets the return-time window reach radii far below the mass resolution.

    Args:
        system (MapLike): Map under study.
        measure (EmpiricalMeasure): Invariant measure estimate.
        x (TorusPoint): Point.
        q (float): Spectrum parameter, q <= 0 preferred.
        r_grid (Sequence[float]): Radius grid; unresolved masses and censored returns are dropped.
        k_max (int, optional): Return-time horizon.
        seed (int): Unused by the exact path, kept for a uniform signature.

    Returns:
        float: d_{mu,q}(x) estimate.

    Raises:
        InsufficientDataError: Fewer than 4 resolved masses or fewer than 4 found returns.
    """
    if q > 0:
        logger.warning(f"q = {q} > 0 carries no guarantee")
    return pointwise_profile(system, measure, x, r_grid, k_max).dimension(q)


# ========== spectrum ==========

@dataclass(frozen=True)
class QDiagnostics:
    r2: Optional[float]
    n_points: int
    failed: int


@dataclass(frozen=True)
class SpectrumCurve:
    """
    alpha(q) at the retained q values.

    Attributes:
        q_values (Tuple[float, ...]): Retained q.
        alpha_values (Tuple[float, ...]): Percentile of d_{mu,q} over sampled points.
        diagnostics (Tuple[QDiagnostics, ...]): Median R^2 of the per-point fits and sample sizes.
        metadata (Dict[str, object]): Approximation flags.
    """
    q_values: Tuple[float, ...]
    alpha_values: Tuple[float, ...]
    diagnostics: Tuple[QDiagnostics, ...]
    metadata: Dict[str, object]

    def affine_fit(self) -> Tuple[float, float, float]:
        """(slope, intercept, R^2) of alpha against q."""
        if len(self.q_values) < 2:
            raise InsufficientDataError("Affine fit needs at least two q values")
        fit = linregress(self.q_values, self.alpha_values)
        return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)

    def alpha_at(self, q: float) -> Optional[float]:
        for value, alpha in zip(self.q_values, self.alpha_values):
            if math.isclose(value, q):
                return alpha
        return None


def spectrum_curve(system: MapLike, measure: EmpiricalMeasure, q_list: Sequence[float], sample_points: int,
                   r_grid: Sequence[float], k_max: Optional[int] = None,
                   seed: int = settings.DEFAULT_SEED) -> SpectrumCurve:
    """
    Recurrence-dimension spectrum alpha(q) = percentile of d_{mu,q} over mu-distributed points.

    Args:
        system (MapLike): Map under study.
        measure (EmpiricalMeasure): Invariant measure estimate; sample points are drawn from its orbit.
        q_list (Sequence[float]): q values.
        sample_points (int): Number of points, at least 20.
        r_grid (Sequence[float]): Radius grid shared by all points.
        k_max (int, optional): Return-time horizon.
        seed (int): Seed of the point selection.

    Returns:
        SpectrumCurve: Retained q values with alpha and diagnostics.
    """
    if sample_points < MIN_SAMPLE_POINTS:
        raise ValueError(f"sample_points must be >= {MIN_SAMPLE_POINTS}, got {sample_points}")
    torus_map = as_map(system)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(measure.size, size=min(sample_points, measure.size), replace=False)
    centers = [TorusPoint(tuple(measure.points[i])) for i in sorted(chosen)]
    profiles = parallel_map(lambda x: pointwise_profile(torus_map, measure, x, r_grid, k_max), centers)

    fitted = []
    for profile in profiles:
        try:
            profile.fit()
            fitted.append(profile)
        except InsufficientDataError as error:
            logger.debug(f"Dropping point: {error}")
    failed = len(profiles) - len(fitted)

    q_values, alphas, diagnostics = [], [], []
    for q in q_list:
        if failed > MAX_FAILURE_FRACTION * len(profiles):
            logger.warning(f"Dropping q = {q}: {failed} of {len(profiles)} points failed")
            continue
        dims = [p.dimension(q) for p in fitted]
        q_values.append(float(q))
        alphas.append(float(np.percentile(dims, settings.ESSSUP_PERCENTILE)))
        diagnostics.append(QDiagnostics(float(np.median([p.fit_r2(q) for p in fitted])), len(fitted), failed))

    exploratory = not torus_map.invertible and any(q < 0 for q in q_values)
    if exploratory:
        logger.warning(f"Spectrum of non-invertible {torus_map.kind} at q < 0 is exploratory")
    metadata = {
        "inf_at_center": True,
        "percentile": settings.ESSSUP_PERCENTILE,
        "censored_radii": sum(p.censored_radii for p in profiles),
        "failed_points": failed,
        "exploratory": exploratory,
    }
    logger.info(f"Spectrum over {len(fitted)} points: {dict(zip(q_values, alphas))}")
    return SpectrumCurve(tuple(q_values), tuple(alphas), tuple(diagnostics), metadata)


# ========== box counting and Young's formula ==========

def box_dimension(measure: EmpiricalMeasure, scales: Sequence[float]) -> float:
    """
    Box-counting dimension of the orbit: slope of log(#occupied boxes) against -log(box side).

    Boxes of side 1/m with m = ceil(1/scale); scales where the count reaches N/10 are saturated
    and excluded.

    Args:
        measure (EmpiricalMeasure): Orbit measure.
        scales (Sequence[float]): At least 5 scales.

    Returns:
        float: Regression slope.
    """
    if len(scales) < MIN_BOX_SCALES:
        raise ValueError(f"box_dimension needs at least {MIN_BOX_SCALES} scales, got {len(scales)}")
    log_inverse_side, log_counts = [], []
    for scale in scales:
        m = math.ceil(1.0 / scale)
        occupied = len(np.unique(_bucket_ids(measure.points, m)))
        if occupied >= SATURATION_FRACTION * measure.size:
            logger.debug(f"Scale {scale} saturated ({occupied} boxes)")
            continue
        log_inverse_side.append(math.log(m))
        log_counts.append(math.log(occupied))
    if len(set(log_inverse_side)) < 2:
        raise InsufficientDataError(f"Only {len(log_inverse_side)} unsaturated scales")
    return float(linregress(log_inverse_side, log_counts).slope)


@dataclass(frozen=True)
class YoungsReport:
    predicted: float
    estimate: float
    relative_error: float


def youngs_check(spec: ExponentSpectrum, entropy: float, dim_est: float) -> YoungsReport:
    """
    Compare a dimension estimate with h (1/lambda^u - 1/lambda^s).

    Args:
        spec (ExponentSpectrum): Two-dimensional hyperbolic spectrum.
        entropy (float): Measure entropy h.
        dim_est (float): Estimated dimension.

    Returns:
        YoungsReport: Predicted, estimate and relative error (absolute when the prediction is 0).

    Raises:
        UnsupportedOperationError: If the spectrum is not that of a hyperbolic surface map.
    """
    if spec.dimension != 2 or spec.lambda_u_min is None or spec.lambda_s_max is None:
        raise UnsupportedOperationError("Young's formula needs one positive and one negative exponent")
    predicted = entropy * (1.0 / spec.lambda_u_min - 1.0 / spec.lambda_s_max)
    error = abs(dim_est - predicted)
    return YoungsReport(predicted, dim_est, error / abs(predicted) if predicted else error)


def lebesgue_entropy(spec: ExponentSpectrum) -> float:
    """Entropy of Lebesgue measure for a linear map: the sum of positive exponents."""
    return spec.positive_sum


def conjecture_check(spec: ExponentSpectrum, dimension: float, entropy: float) -> Dict[str, object]:
    """Conjectured bound dim / h next to the proven lower bound; exploratory numbers only."""
    return {
        "conjectured_lower": dimension / entropy if entropy > 0 else math.inf,
        "theorem_lower": theorem_bounds(spec).lower,
        "exploratory": True,
    }
