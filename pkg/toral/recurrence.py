"""
Poincaré return times of balls, cylinders and Bowen balls.

tau(A) = min{k > 0 : f^k(A) ∩ A is non-empty}. Balls are max-norm torus balls.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Callable, Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress, qmc

from config import settings
from toral.dynamics import (
    MapLike,
    TorusMap,
    TorusPoint,
    as_map,
    fixed_distance,
    fixed_radius,
    fixed_to_fraction,
    matrix_multiply,
    to_fixed,
    torus_distance,
)
from toral.exceptions import InsufficientSamplingError, UnsupportedOperationError
from toral.geometry import (
    ExactPoint,
    LatticeTestResult,
    combine_witnesses,
    interval_return_test,
    square_return_test,
)
from toral.lyapunov import exact_exponents
from toral.parallel import parallel_map

logger = logging.getLogger(__name__)

NOT_FOUND = None
MAX_RADIUS = 0.25
SAMPLE_CHUNK = 4096
MIN_BOWEN_MEMBERS = 10
BOWEN_PROPOSAL_FACTOR = 100


class ReturnMethod(str, Enum):
    EXACT_LATTICE = "exact_lattice"
    INTERVAL_EXACT = "interval_exact"
    MONTE_CARLO = "monte_carlo"
    WORD_OVERLAP = "word_overlap"


# ========== domain types ==========

@dataclass(frozen=True)
class Ball:
    """
    Closed max-norm torus ball.

    Attributes:
        center (TorusPoint): Center x.
        radius (float): Radius r in (0, 1/4), so the ball lifts injectively to the plane.
    """
    center: TorusPoint
    radius: float

    def __post_init__(self) -> None:
        if not 0.0 < self.radius < MAX_RADIUS:
            raise ValueError(f"Ball radius must lie in (0, 1/4), got {self.radius}")

    @property
    def dimension(self) -> int:
        return self.center.dimension

    def contains(self, point: TorusPoint) -> bool:
        return torus_distance(point, self.center) <= self.radius

    def factor(self, index: int) -> "Ball":
        """Ball of the index-th T^2 factor of a ball in T^4."""
        coords = self.center.coords[2 * index:2 * index + 2]
        return Ball(TorusPoint(coords), self.radius)


@dataclass(frozen=True)
class Witness:
    """
    Exact certificate of a return: start y and image f^k(y), both in the set.

    Attributes:
        start (ExactPoint): y.
        image (ExactPoint): f^k(y) reduced mod 1.
    """
    start: ExactPoint
    image: ExactPoint

    @property
    def start_point(self) -> TorusPoint:
        return TorusPoint.from_exact(self.start)

    @property
    def image_point(self) -> TorusPoint:
        return TorusPoint.from_exact(self.image)


@dataclass(frozen=True)
class ReturnTimeResult:
    """
    Return time of a set with its certificate.

    Attributes:
        tau (int, optional): Return time, None (NOT_FOUND) when no return up to cutoff.
        cutoff (int): Search horizon K_max actually decided.
        method (ReturnMethod): How tau was obtained.
        witness (Witness, optional): Returning point pair.
        ambiguous (bool): Exact geometry met the boundary margin band.
        budget_exhausted (bool): The exact scan was abandoned before the cutoff.
    """
    tau: Optional[int]
    cutoff: int
    method: ReturnMethod
    witness: Optional[Witness] = None
    ambiguous: bool = False
    budget_exhausted: bool = False

    @property
    def found(self) -> bool:
        return self.tau is not NOT_FOUND


@dataclass(frozen=True)
class Word:
    """
    Finite word over {0, ..., alphabet_size - 1}.

    Attributes:
        symbols (Tuple[int, ...]): Non-empty symbol sequence.
        alphabet_size (int): Alphabet cardinality m.
        boundary_hits (Tuple[int, ...]): Positions whose orbit point sat on a cell boundary.
    """
    symbols: Tuple[int, ...]
    alphabet_size: int = 2
    boundary_hits: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("Word must be non-empty")
        if any(not 0 <= s < self.alphabet_size for s in self.symbols):
            raise ValueError(f"Symbols must lie in [0, {self.alphabet_size})")

    @classmethod
    def from_string(cls, text: str, alphabet_size: int = 2) -> "Word":
        return cls(tuple(int(c) for c in text), alphabet_size)

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(str(s) for s in self.symbols) if self.alphabet_size <= 10 else str(self.symbols)


@dataclass(frozen=True)
class Partition:
    """
    Partition used for itineraries.

    Attributes:
        kind (str): ``binary_markov`` (cells [0, 1/2), [1/2, 1) of the circle) or ``grid``.
        cells (int): Cells per coordinate.
    """
    kind: Literal["binary_markov", "grid"]
    cells: int = 2

    @classmethod
    def binary_markov(cls) -> "Partition":
        return cls("binary_markov", 2)

    @classmethod
    def grid(cls, m: int) -> "Partition":
        if m < 2:
            raise ValueError(f"Grid partition needs at least 2 cells, got {m}")
        return cls("grid", m)

    def alphabet_size(self, dimension: int) -> int:
        return self.cells ** dimension


@dataclass(frozen=True)
class BowenBallSpec:
    """
    Bowen ball B_m^n(x, eps): points whose orbit stays eps-close to that of x from time -m to n.

    Attributes:
        center (TorusPoint): x.
        m (int): Backward depth.
        n (int): Forward depth.
        eps (float): Closeness, in (0, 1/4).
    """
    center: TorusPoint
    m: int
    n: int
    eps: float

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError("Bowen ball depths must be non-negative")
        if not 0.0 < self.eps < MAX_RADIUS:
            raise ValueError(f"Bowen ball eps must lie in (0, 1/4), got {self.eps}")


@dataclass(frozen=True)
class SlopePoint:
    r: float
    tau: Optional[int]
    ratio: Optional[float]
    method: str
    censored: bool


@dataclass(frozen=True)
class SlopeSummary:
    """
    Summary of a slope series.

    Attributes:
        liminf_est (float, optional): Min of tau/-log r over the smallest-radius half.
        limsup_est (float, optional): Max over the same window.
        slope (float, optional): Least-squares slope of tau against -log r.
        intercept (float, optional): Intercept of that fit.
        r2 (float, optional): Coefficient of determination.
        censored (bool): Some radius had no return within its horizon.
    """
    liminf_est: Optional[float]
    limsup_est: Optional[float]
    slope: Optional[float]
    intercept: Optional[float]
    r2: Optional[float]
    censored: bool


@dataclass(frozen=True)
class SlopeSeries:
    center: TorusPoint
    points: Tuple[SlopePoint, ...]
    summary: SlopeSummary
    warnings: Tuple[str, ...] = field(default=())


# ========== horizons ==========

def default_horizon(r: float, lambda_u: float) -> int:
    """
    Search horizon ceil(4 (-log r) / lambda^u), well beyond the theorem's upper bound.

    Args:
        r (float): Radius.
        lambda_u (float): Smallest positive exponent.

    Returns:
        int: At least 1.
    """
    return max(1, math.ceil(4.0 * -math.log(r) / lambda_u))


def _resolve_horizon(torus_map: TorusMap, r: float, k_max: Optional[int]) -> int:
    if k_max is not None:
        if k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {k_max}")
        return k_max
    return default_horizon(r, exact_exponents(torus_map).lambda_u_min)


# ========== exact ball oracle ==========

class ExactReturnOracle:
    """
    Exact return times of balls for linear maps in dimension <= 2 and their products.
    """

    def __init__(self, torus_map: TorusMap, budget: Optional[int] = None) -> None:
        """
        Args:
            torus_map (TorusMap): Map under study.
            budget (int, optional): Lattice column budget per iterate; defaults to RECUR_LATTICE_BUDGET.
        """
        self.torus_map = torus_map
        self.budget = settings.LATTICE_BUDGET if budget is None else budget
        self.logger = logging.getLogger(self.__class__.__name__)

    def tau(self, ball: Ball, k_max: int) -> ReturnTimeResult:
        self.torus_map.check_dimension(ball.dimension)
        if self.torus_map.kind == "doubling_1d":
            return self._search(ball, k_max, ReturnMethod.INTERVAL_EXACT, self._interval_tests(ball))
        if self.torus_map.kind == "product_4d":
            factors = [ExactReturnOracle(f, self.budget) for f in self.torus_map.factors]
            tests = [oracle._square_tests(ball.factor(i)) for i, oracle in enumerate(factors)]
            return self._search(ball, k_max, ReturnMethod.EXACT_LATTICE, _product_tests(tests))
        return self._search(ball, k_max, ReturnMethod.EXACT_LATTICE, self._square_tests(ball))

    def _search(self, ball: Ball, k_max: int, method: ReturnMethod, tests) -> ReturnTimeResult:
        ambiguous = False
        for k in range(1, k_max + 1):
            outcome: LatticeTestResult = next(tests)()
            ambiguous |= outcome.ambiguous
            if outcome.budget_exhausted:
                self.logger.warning(
                    f"Lattice budget {self.budget} exhausted at k={k} for r={ball.radius}; result censored")
                return ReturnTimeResult(NOT_FOUND, k - 1, method, ambiguous=ambiguous, budget_exhausted=True)
            if outcome.returns:
                witness = Witness(*outcome.witness) if outcome.witness else None
                if ambiguous:
                    self.logger.warning(f"Boundary-ambiguous geometry at k={k}, r={ball.radius}")
                return ReturnTimeResult(k, k_max, method, witness, ambiguous)
        return ReturnTimeResult(NOT_FOUND, k_max, method, ambiguous=ambiguous)

    def _square_tests(self, ball: Ball) -> Iterator[Callable[[], LatticeTestResult]]:
        # yields the k-th test unevaluated; powers advance whether or not it is run
        matrix = self.torus_map.matrix
        det = self.torus_map.determinant
        center = ball.center.exact()
        radius = Fraction(ball.radius)
        power = matrix
        det_power = det
        while True:
            yield partial(square_return_test, power, det_power, center, radius, self.budget,
                          settings.LATTICE_CHUNK, settings.BOUNDARY_MARGIN)
            power = matrix_multiply(power, matrix)
            det_power *= det

    def _interval_tests(self, ball: Ball) -> Iterator[Callable[[], LatticeTestResult]]:
        center = ball.center.exact()[0]
        radius = Fraction(ball.radius)
        k = 1
        while True:
            yield partial(interval_return_test, k, center, radius, settings.BOUNDARY_MARGIN)
            k += 1


def _product_tests(factor_tests) -> Iterator[Callable[[], LatticeTestResult]]:
    # the product ball returns at k iff every factor ball returns at k
    while True:
        pending = [next(tests) for tests in factor_tests]
        yield partial(_run_product_test, pending)


def _run_product_test(pending: Sequence[Callable[[], LatticeTestResult]]) -> LatticeTestResult:
    outcomes = []
    for test in pending:
        outcome = test()
        outcomes.append(outcome)
        if not outcome.returns:
            return LatticeTestResult(False, any(o.ambiguous for o in outcomes), outcome.budget_exhausted)
    witness = combine_witnesses([o.witness for o in outcomes])
    return LatticeTestResult(True, any(o.ambiguous for o in outcomes), witness=witness)


def tau_ball_exact(system: MapLike, ball: Ball, k_max: Optional[int] = None,
                   budget: Optional[int] = None) -> ReturnTimeResult:
    """
    Exact return time of a ball.

    Args:
        system (MapLike): Linear map of T^1 or T^2, or a product of two T^2 automorphisms.
        ball (Ball): Max-norm ball.
        k_max (int, optional): Horizon; defaults to default_horizon(r, lambda^u).
        budget (int, optional): Lattice column budget per iterate.

    Returns:
        ReturnTimeResult: tau with an exact witness, or NOT_FOUND with the cutoff.
    """
    torus_map = as_map(system)
    horizon = _resolve_horizon(torus_map, ball.radius, k_max)
    return ExactReturnOracle(torus_map, budget).tau(ball, horizon)


def factor_return_times(system: MapLike, ball: Ball, k_max: Optional[int] = None) -> Tuple[ReturnTimeResult, ...]:
    """
    Exact return times of the factor balls B(x_i, r) of a product map.

    Raises:
        UnsupportedOperationError: If the map is not a product.
    """
    torus_map = as_map(system)
    if torus_map.kind != "product_4d":
        raise UnsupportedOperationError("factor_return_times needs a product_4d map")
    return tuple(tau_ball_exact(factor, ball.factor(i), k_max)
                 for i, factor in enumerate(torus_map.factors))


# ========== sampled certificates ==========

def ball_samples(ball: Ball, samples: int, seed: int) -> np.ndarray:
    """
    Center plus a scrambled Halton lattice in the ball.

    Args:
        ball (Ball): Target ball.
        samples (int): Total number of points, center included.
        seed (int): Scrambling seed.

    Returns:
        np.ndarray: Array of shape (samples, d), canonical coordinates.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    center = ball.center.as_array()
    if samples == 1:
        return center[None, :]
    unit = qmc.Halton(d=ball.dimension, scramble=True, seed=seed).random(samples - 1)
    offsets = ball.radius * (2.0 * unit - 1.0)
    return np.vstack([center, np.mod(center + offsets, 1.0)])


def _first_hits(torus_map: TorusMap, starts: np.ndarray, center: np.ndarray, radius: np.uint64,
                k_max: int) -> Tuple[Optional[int], Optional[int], Optional[np.ndarray]]:
    points = starts
    for k in range(1, k_max + 1):
        points = torus_map.apply_fixed(points)
        hits = np.nonzero(fixed_distance(points, center) <= radius)[0]
        if hits.size:
            return k, int(hits[0]), points[hits[0]]
    return None, None, None


def tau_ball_sample(system: MapLike, ball: Ball, k_max: Optional[int] = None, samples: int = 1000,
                    seed: int = settings.DEFAULT_SEED) -> ReturnTimeResult:
    """
    Upper-bound certificate for tau(B): least k such that a sampled y in B has f^k(y) in B.

    Sample orbits are computed exactly in 64-bit fixed point, so every witness is a
    genuine return and the result never undercuts the true tau.

    Args:
        system (MapLike): Map description or map object.
        ball (Ball): Target ball.
        k_max (int, optional): Horizon; defaults to default_horizon(r, lambda^u).
        samples (int): Number of sample points, center included.
        seed (int): Scrambling seed.

    Returns:
        ReturnTimeResult: Monte Carlo result with exact witness.
    """
    torus_map = as_map(system)
    torus_map.check_dimension(ball.dimension)
    horizon = _resolve_horizon(torus_map, ball.radius, k_max)
    starts = _inside(to_fixed(ball_samples(ball, samples, seed)), ball)
    return _sampled_return(torus_map, starts, ball, horizon)


def _inside(points: np.ndarray, ball: Ball) -> np.ndarray:
    center = to_fixed(ball.center.as_array())
    return points[fixed_distance(points, center) <= fixed_radius(ball.radius)]


def _sampled_return(torus_map: TorusMap, starts: np.ndarray, ball: Ball, horizon: int) -> ReturnTimeResult:
    center = to_fixed(ball.center.as_array())
    radius = fixed_radius(ball.radius)
    chunks = [starts[i:i + SAMPLE_CHUNK] for i in range(0, len(starts), SAMPLE_CHUNK)]
    results = parallel_map(lambda chunk: _first_hits(torus_map, chunk, center, radius, horizon), chunks)
    best = None
    for chunk_index, (k, index, image) in enumerate(results):
        if k is not None and (best is None or k < best[0]):
            best = (k, chunk_index * SAMPLE_CHUNK + index, image)
    if best is None:
        return ReturnTimeResult(NOT_FOUND, horizon, ReturnMethod.MONTE_CARLO)
    k, index, image = best
    witness = Witness(tuple(fixed_to_fraction(c) for c in starts[index]),
                      tuple(fixed_to_fraction(c) for c in image))
    return ReturnTimeResult(k, horizon, ReturnMethod.MONTE_CARLO, witness)


# ========== words and cylinders ==========

def border_lengths(symbols: Sequence[int]) -> List[int]:
    """Longest proper border of every prefix (Knuth-Morris-Pratt failure function)."""
    borders = [0] * len(symbols)
    length = 0
    for i in range(1, len(symbols)):
        while length and symbols[i] != symbols[length]:
            length = borders[length - 1]
        if symbols[i] == symbols[length]:
            length += 1
        borders[i] = length
    return borders


def tau_word(word: Word, two_sided: bool = False) -> int:
    """
    Return time of the full-shift cylinder of a word: its least self-overlap shift.

    tau = min{k >= 1 : symbols[k:] is a prefix of symbols}, which is n minus the longest
    proper border; n when the word has no proper self-overlap. A two-sided word
    x_{-m} ... x_{n-1} is passed as its full symbol sequence and obeys the same rule.

    Args:
        word (Word): Non-empty word.
        two_sided (bool): The word spans negative and positive indices.

    Returns:
        int: tau in [1, len(word)].
    """
    if two_sided:
        logger.debug(f"Two-sided cylinder of length {len(word)}")
    return len(word) - border_lengths(word.symbols)[-1]


def itinerary(system: MapLike, x: TorusPoint, n: int, partition: Partition) -> Word:
    """
    Symbols of the cells visited by x, f(x), ..., f^{n-1}(x).

    The orbit is computed exactly in fixed point; a point within 1e-12 of a cell boundary
    keeps the symbol of its left-closed cell and is recorded in ``boundary_hits``.

    Args:
        system (MapLike): Map description or map object.
        x (TorusPoint): Start point.
        n (int): Word length.
        partition (Partition): binary_markov (doubling map only) or grid(m).

    Returns:
        Word: Itinerary over the partition's alphabet.
    """
    torus_map = as_map(system)
    torus_map.check_dimension(x.dimension)
    if n < 1:
        raise ValueError(f"Itinerary length must be >= 1, got {n}")
    if partition.kind == "binary_markov" and torus_map.kind != "doubling_1d":
        raise UnsupportedOperationError("binary_markov partition is defined for doubling_1d only")

    cells = partition.cells
    scale = 1 << 64
    point = to_fixed(x.as_array())[None, :]
    symbols, boundary = [], []
    for j in range(n):
        symbol = 0
        for axis, coordinate in enumerate(point[0]):
            scaled = int(coordinate) * cells
            symbol += (scaled >> 64) * cells ** axis
            remainder = scaled % scale
            if min(remainder, scale - remainder) < settings.CELL_BOUNDARY_TOL * cells * scale:
                boundary.append(j)
        symbols.append(symbol)
        point = torus_map.apply_fixed(point)
    hits = tuple(sorted(set(boundary)))
    if hits:
        logger.debug(f"Itinerary of {x} touched cell boundaries at {hits}")
    return Word(tuple(symbols), partition.alphabet_size(x.dimension), hits)


def cylinder_return_series(system: MapLike, x: TorusPoint, n_max: int,
                           partition: Partition) -> List[Tuple[int, int, float]]:
    """
    tau(A_n(x)) / n for n = 1..n_max, from the prefixes of one itinerary.

    Returns:
        List[Tuple[int, int, float]]: (n, tau, tau / n).
    """
    word = itinerary(system, x, n_max, partition)
    borders = border_lengths(word.symbols)
    return [(n, n - borders[n - 1], (n - borders[n - 1]) / n) for n in range(1, n_max + 1)]


# ========== Bowen balls ==========

def _bowen_center_orbit(torus_map: TorusMap, spec: BowenBallSpec) -> dict:
    center = to_fixed(spec.center.as_array())[None, :]
    orbit = {0: center[0]}
    forward = center
    for j in range(1, spec.n + 1):
        forward = torus_map.apply_fixed(forward)
        orbit[j] = forward[0]
    backward = center
    for j in range(1, spec.m + 1):
        backward = torus_map.inverse_apply_fixed(backward)
        orbit[-j] = backward[0]
    return orbit


def _trajectory(torus_map: TorusMap, points: np.ndarray, backward: int, forward: int) -> dict:
    trajectory = {0: points}
    current = points
    for t in range(1, forward + 1):
        current = torus_map.apply_fixed(current)
        trajectory[t] = current
    current = points
    for t in range(1, backward + 1):
        current = torus_map.inverse_apply_fixed(current)
        trajectory[-t] = current
    return trajectory


def _bowen_membership(trajectory: dict, shift: int, center_orbit: dict, spec: BowenBallSpec,
                      eps: np.uint64) -> np.ndarray:
    # f^shift(y) lies in the Bowen ball iff f^(shift+j)(y) is eps-close to f^j(x) for -m <= j <= n
    inside = np.ones(len(trajectory[0]), dtype=bool)
    for j in range(-spec.m, spec.n + 1):
        inside &= fixed_distance(trajectory[shift + j], center_orbit[j]) <= eps
    return inside


def tau_bowen_sample(system: MapLike, spec: BowenBallSpec, k_max: int, samples: int = 1000,
                     seed: int = settings.DEFAULT_SEED) -> ReturnTimeResult:
    """
    Upper-bound certificate for the return time of a Bowen ball.

    Members are rejection-sampled from the eps-ball around the center (membership checked
    by iterating both directions), then tested for returns like tau_ball_sample.

    Args:
        system (MapLike): Map description; invertible when spec.m > 0.
        spec (BowenBallSpec): Bowen ball.
        k_max (int): Horizon.
        samples (int): Members wanted.
        seed (int): Scrambling seed.

    Returns:
        ReturnTimeResult: Monte Carlo result with exact witness.

    Raises:
        InsufficientSamplingError: Fewer than 10 members in 100 * samples proposals.
    """
    torus_map = as_map(system)
    torus_map.check_dimension(spec.center.dimension)
    if spec.m > 0:
        torus_map.require_invertible()
    ball = Ball(spec.center, spec.eps)
    if spec.m == 0 and spec.n == 0:
        return tau_ball_sample(torus_map, ball, k_max, samples, seed)

    eps = fixed_radius(spec.eps)
    center_orbit = _bowen_center_orbit(torus_map, spec)
    proposals = _inside(to_fixed(ball_samples(ball, BOWEN_PROPOSAL_FACTOR * samples, seed)), ball)
    proposal_paths = _trajectory(torus_map, proposals, spec.m, spec.n)
    members = proposals[_bowen_membership(proposal_paths, 0, center_orbit, spec, eps)][:samples]
    if len(members) < MIN_BOWEN_MEMBERS:
        raise InsufficientSamplingError(
            f"Only {len(members)} Bowen ball members in {len(proposals)} proposals "
            f"(m={spec.m}, n={spec.n}, eps={spec.eps})")
    logger.info(f"Sampled {len(members)} Bowen ball members from {len(proposals)} proposals")

    paths = _trajectory(torus_map, members, spec.m, k_max + spec.n)
    for k in range(1, k_max + 1):
        hits = np.nonzero(_bowen_membership(paths, k, center_orbit, spec, eps))[0]
        if hits.size:
            index = int(hits[0])
            witness = Witness(tuple(fixed_to_fraction(c) for c in members[index]),
                              tuple(fixed_to_fraction(c) for c in paths[k][index]))
            return ReturnTimeResult(k, k_max, ReturnMethod.MONTE_CARLO, witness)
    return ReturnTimeResult(NOT_FOUND, k_max, ReturnMethod.MONTE_CARLO)


# ========== recurrence slopes ==========

def radius_grid(r_min: float, r_max: float, grid: int) -> List[float]:
    """Geometric radii r_j = r_max (r_min / r_max)^(j / (grid - 1)), j = 0..grid-1."""
    if not 0.0 < r_min < r_max < MAX_RADIUS:
        raise ValueError(f"Radii must satisfy 0 < r_min < r_max < 1/4, got {r_min}, {r_max}")
    if grid < 4:
        raise ValueError(f"grid must be >= 4, got {grid}")
    return [r_max * (r_min / r_max) ** (j / (grid - 1)) for j in range(grid)]


def slope_series(system: MapLike, x: TorusPoint, r_min: float, r_max: float, grid: int,
                 method: str = "exact", k_max: Optional[int] = None, seed: int = settings.DEFAULT_SEED,
                 samples: int = 1000) -> SlopeSeries:
    """
    Recurrence slope series tau(B(x, r_j)) / -log r_j over a geometric radius grid.

    Args:
        system (MapLike): Map description or map object.
        x (TorusPoint): Ball center.
        r_min (float): Smallest radius.
        r_max (float): Largest radius, below 1/4.
        grid (int): Number of radii, at least 4.
        method (str): ``exact`` or ``sample``.
        k_max (int, optional): Horizon for every radius; defaults per radius.
        seed (int): Sampling seed.
        samples (int): Samples per ball for the sample method.

    Returns:
        SlopeSeries: Points plus liminf/limsup/regression summary.
    """
    torus_map = as_map(system)
    torus_map.check_dimension(x.dimension)
    if method not in ("exact", "sample"):
        raise ValueError(f"method must be 'exact' or 'sample', got {method!r}")
    radii = radius_grid(r_min, r_max, grid)

    def compute(r: float) -> ReturnTimeResult:
        ball = Ball(x, r)
        if method == "exact":
            return tau_ball_exact(torus_map, ball, k_max)
        return tau_ball_sample(torus_map, ball, k_max, samples, seed)

    results = parallel_map(compute, radii)
    points = tuple(
        SlopePoint(r, res.tau, res.tau / -math.log(r) if res.found else None, res.method.value, not res.found)
        for r, res in zip(radii, results))

    warnings = []
    if torus_distance(torus_map.apply(x), x) < r_min:
        warnings.append(f"center {x.coords} is a fixed point; the almost-everywhere limit does not apply")
    summary = summarize_slope(points)
    if summary.censored:
        warnings.append("some radii had no return within the horizon; excluded from the summary")
    for message in warnings:
        logger.warning(message)
    return SlopeSeries(x, points, summary, tuple(warnings))


def summarize_slope(points: Sequence[SlopePoint]) -> SlopeSummary:
    """liminf/limsup over the smallest-radius half and least-squares slope of tau on -log r."""
    usable = [p for p in points if not p.censored]
    window = [p for p in points[len(points) // 2:] if not p.censored]
    ratios = [p.ratio for p in window]
    slope = intercept = r2 = None
    if len(usable) >= 2 and len({p.r for p in usable}) >= 2:
        fit = linregress([-math.log(p.r) for p in usable], [p.tau for p in usable])
        slope, intercept, r2 = float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)
    return SlopeSummary(
        liminf_est=min(ratios) if ratios else None,
        limsup_est=max(ratios) if ratios else None,
        slope=slope,
        intercept=intercept,
        r2=r2,
        censored=any(p.censored for p in points),
    )
