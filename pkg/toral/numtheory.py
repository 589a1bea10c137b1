"""
Arithmetic behind the expanding-map example: continued fractions, rotation-orbit density,
covering-time certificates, periodic-point counts and the Borel-Cantelli frequency check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Generator, List, Literal, NamedTuple, Optional, Tuple

import numpy as np

from config import settings
from toral.dynamics import IntMatrix, MapLike, MapSpec, TorusPoint, as_map, determinant, identity_matrix, matrix_power
from toral.exceptions import RationalInputError, UnsupportedOperationError
from toral.parallel import parallel_map
from toral.recurrence import MAX_RADIUS, Ball, tau_ball_sample

logger = logging.getLogger(__name__)

GOLDEN_THETA = (math.sqrt(5.0) - 1.0) / 2.0
MAX_CONVERGENTS = 40
MAX_PERIOD = 64
MAX_COVERING_RADIUS = 0.05
# a double with at most this many significant binary digits is taken as an exact rational
_RATIONAL_DENOMINATOR_LIMIT = 2 ** 32
# unstable eigenvalues of the expanding example [[6, 3], [3, 3]]
_EXPANDING_LAMBDA_U_MAX = math.log((9.0 + math.sqrt(45.0)) / 2.0)
_EXPANDING_LAMBDA_U_MIN = math.log((9.0 - math.sqrt(45.0)) / 2.0)
_MAX_ENUMERATED_POINTS = 4096


class Convergent(NamedTuple):
    """
    Continued-fraction convergent p / q.

    Attributes:
        p (int): Numerator.
        q (int): Positive denominator, gcd(p, q) = 1.
        index (int): Position i in the expansion.
        quotient (int): Partial quotient a_i that produced it.
    """
    p: int
    q: int
    index: int
    quotient: int


@dataclass(frozen=True)
class CoveringCertificate:
    """
    Covering time of the strip L(r) under the expanding example.

    Attributes:
        r (float): Strip half-width.
        n_formula (int): Closed-form covering time.
        n_observed (int, optional): Least n verified through rotation density, None if not found.
        density_gap (float, optional): Required density minus covering radius at n_observed.
    """
    r: float
    n_formula: int
    n_observed: Optional[int]
    density_gap: Optional[float]

    @property
    def validates(self) -> bool:
        return self.n_observed is not None and self.n_observed <= self.n_formula


# ========== continued fractions ==========

def _exact_theta(theta: float) -> Fraction:
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    exact = Fraction(theta)
    if exact.denominator <= _RATIONAL_DENOMINATOR_LIMIT:
        raise RationalInputError(f"theta = {theta} is an exact rational {exact}")
    return exact


def _quotients(value: Fraction) -> Generator[int, None, None]:
    # Euclidean algorithm on the exact rational value of the double
    while True:
        whole, remainder = divmod(value, 1)
        yield int(whole)
        if remainder == 0:
            return
        value = 1 / remainder


def partial_quotients(theta: float, count: int) -> List[int]:
    """
    First count partial quotients [a_0; a_1, ...] of theta.

    Raises:
        RationalInputError: If the expansion terminates before count terms.
    """
    if not 1 <= count <= MAX_CONVERGENTS:
        raise ValueError(f"count must lie in [1, {MAX_CONVERGENTS}], got {count}")
    quotients = []
    for a in _quotients(_exact_theta(theta)):
        quotients.append(a)
        if len(quotients) == count:
            return quotients
    raise RationalInputError(f"Expansion of {theta} terminated after {len(quotients)} terms")


def convergents(theta: float, count: int) -> List[Convergent]:
    """
    Continued-fraction convergents p_i / q_i of theta.

    Args:
        theta (float): Irrational number in (0, 1).
        count (int): Number of convergents, at most 40.

    Returns:
        List[Convergent]: p_i = a_i p_{i-1} + p_{i-2}, q_i likewise.

    Raises:
        RationalInputError: If theta is detected as rational.

    Example:
        >>> [(c.p, c.q) for c in convergents(GOLDEN_THETA, 5)]
        [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5)]
    """
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    result = []
    for index, a in enumerate(partial_quotients(theta, count)):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        result.append(Convergent(p, q, index, a))
    return result


# ========== rotation orbits ==========

def _rotation_positions(theta: float, k_max: int) -> Tuple[List[int], int]:
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    exact = Fraction(theta)
    numerator, denominator = exact.numerator % exact.denominator, exact.denominator
    return sorted(k * numerator % denominator for k in range(k_max)), denominator


def _gaps(positions: List[int], denominator: int) -> List[int]:
    gaps = [b - a for a, b in zip(positions, positions[1:])]
    gaps.append(denominator - positions[-1] + positions[0])
    return gaps


def rotation_density(theta: float, k_max: int) -> float:
    """
    Covering radius (largest gap / 2) of {k theta mod 1 : 0 <= k < k_max}.

    Positions are exact integers over the denominator of the double theta.

    Args:
        theta (float): Rotation number.
        k_max (int): Number of orbit points, at least 1.

    Returns:
        float: Every point of the circle lies within this distance of the orbit.
    """
    positions, denominator = _rotation_positions(theta, k_max)
    return float(Fraction(max(_gaps(positions, denominator)), 2 * denominator))


def rotation_gaps(theta: float, k_max: int) -> List[float]:
    """Distinct gap lengths of the rotation orbit, ascending (at most three)."""
    positions, denominator = _rotation_positions(theta, k_max)
    return [float(Fraction(g, denominator)) for g in sorted(set(_gaps(positions, denominator)))]


# ========== covering time of the expanding example ==========

def unstable_box_factor() -> float:
    """m = |v^u| + |V^u| for v^u = (1, -(sqrt5 + 1)/2), V^u = (1, (sqrt5 - 1)/2)."""
    golden = (math.sqrt(5.0) + 1.0) / 2.0
    return math.hypot(1.0, golden) + math.hypot(1.0, GOLDEN_THETA)


def covering_constant() -> float:
    return 1.0 / math.sqrt(1.0 + GOLDEN_THETA ** 2)


def covering_formula(r: float) -> int:
    """ceil((-2 log r + log(4c/3)) / (Lambda^u + lambda^u))."""
    exponent_sum = _EXPANDING_LAMBDA_U_MAX + _EXPANDING_LAMBDA_U_MIN
    return math.ceil((-2.0 * math.log(r) + math.log(4.0 * covering_constant() / 3.0)) / exponent_sum)


def covering_time(r: float, n_limit: Optional[int] = None) -> CoveringCertificate:
    """
    Covering-time certificate for the strip L(r) of the expanding map [[6, 3], [3, 3]].

    After n steps the strip wraps N = floor(e^{Lambda^u n} r) times around the torus and its
    fibre intersections form the rotation orbit of theta; the strip covers T^2 once those N
    points are c e^{lambda^u n} r dense.

    Args:
        r (float): Strip half-width in (0, 0.05).
        n_limit (int, optional): Last n tried, defaults to n_formula + 10.

    Returns:
        CoveringCertificate: Formula and observed covering times.
    """
    if not 0.0 < r < MAX_COVERING_RADIUS:
        raise ValueError(f"r must lie in (0, {MAX_COVERING_RADIUS}), got {r}")
    n_formula = covering_formula(r)
    c = covering_constant()
    for n in range(1, (n_limit or n_formula + 10) + 1):
        wraps = math.floor(math.exp(_EXPANDING_LAMBDA_U_MAX * n) * r)
        if wraps < 1:
            continue
        required = c * math.exp(_EXPANDING_LAMBDA_U_MIN * n) * r
        radius = rotation_density(GOLDEN_THETA, wraps)
        logger.debug(f"n={n}: {wraps} wraps, covering radius {radius:.6g}, required {required:.6g}")
        if radius < required:
            return CoveringCertificate(r, n_formula, n, required - radius)
    logger.warning(f"No covering observed for r={r} up to n={n_limit or n_formula + 10}")
    return CoveringCertificate(r, n_formula, None, None)


# ========== periodic points ==========

def _validated(matrix: IntMatrix, kind: Literal["auto", "endo"]) -> MapSpec:
    return MapSpec(kind="toral_auto_2d" if kind == "auto" else "toral_endo_2d", matrix=matrix)


def _shifted_power(matrix: IntMatrix, p: int) -> IntMatrix:
    power = matrix_power(matrix, p)
    identity = identity_matrix(len(matrix))
    return tuple(tuple(a - b for a, b in zip(row, id_row)) for row, id_row in zip(power, identity))


def periodic_points(matrix: IntMatrix, p_max: int, kind: Literal["auto", "endo"] = "auto") -> List[int]:
    """
    Number of points of period dividing p, |det(A^p - I)|, for p = 1..p_max.

    Args:
        matrix (IntMatrix): 2x2 integer matrix.
        p_max (int): Largest period, at most 64.
        kind (str): ``auto`` (hyperbolic automorphism) or ``endo`` (expanding endomorphism).

    Returns:
        List[int]: Exact counts, arbitrary precision.

    Raises:
        pydantic.ValidationError: If the matrix is not of the declared kind.
    """
    if not 1 <= p_max <= MAX_PERIOD:
        raise ValueError(f"p_max must lie in [1, {MAX_PERIOD}], got {p_max}")
    spec = _validated(matrix, kind)
    counts = [abs(determinant(_shifted_power(spec.matrix, p))) for p in range(1, p_max + 1)]
    logger.info(f"Periodic point counts of {spec.matrix} up to p={p_max}: {counts[:6]}...")
    return counts


def periodic_count_from_eigenvalues(matrix: IntMatrix, p: int) -> float:
    """Floating cross-check |prod_j (mu_j^p - 1)|."""
    eigenvalues = np.linalg.eigvals(np.array(matrix, dtype=float))
    return float(abs(np.prod(eigenvalues ** p - 1.0)))


def enumerate_periodic_points(matrix: IntMatrix, p: int) -> List[Tuple[Fraction, Fraction]]:
    """
    Exact rational solutions of A^p x = x on T^2.

    Fix(A^p) is the subgroup of T^2 generated by the columns of (A^p - I)^{-1}.

    Args:
        matrix (IntMatrix): 2x2 integer matrix with A^p - I invertible.
        p (int): Period.

    Returns:
        List[Tuple[Fraction, Fraction]]: Sorted points in [0, 1)^2.
    """
    shifted = _shifted_power(matrix, p)
    det = determinant(shifted)
    size = abs(det)
    if size == 0:
        raise UnsupportedOperationError(f"A^{p} - I is singular")
    if size > _MAX_ENUMERATED_POINTS:
        raise ValueError(f"{size} periodic points exceed the enumeration limit {_MAX_ENUMERATED_POINTS}")
    (a, b), (c, d) = shifted
    # columns of adj(A^p - I) over det
    adjugate = ((d, -b), (-c, a))
    sign = 1 if det > 0 else -1
    generators = [(sign * adjugate[0][col] % size, sign * adjugate[1][col] % size) for col in (0, 1)]
    numerators = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        x, y = frontier.pop()
        for gx, gy in generators:
            neighbour = ((x + gx) % size, (y + gy) % size)
            if neighbour not in numerators:
                numerators.add(neighbour)
                frontier.append(neighbour)
    points = sorted((Fraction(x, size), Fraction(y, size)) for x, y in numerators)
    if len(points) != size:
        raise ArithmeticError(f"Enumerated {len(points)} points, expected {size}")
    return points


def closing_constant(matrix: IntMatrix) -> float:
    """c = 1 - |A^{-1}|, spectral norm."""
    return 1.0 - float(np.linalg.norm(np.linalg.inv(np.array(matrix, dtype=float)), 2))


# ========== Borel-Cantelli frequencies ==========

@dataclass(frozen=True)
class BorelCantelliRow:
    n: int
    empirical_freq: float
    envelope: float
    trivial: bool

    @property
    def within_envelope(self) -> bool:
        return self.empirical_freq <= self.envelope


@dataclass(frozen=True)
class BorelCantelliReport:
    a: float
    trials: int
    rows: Tuple[BorelCantelliRow, ...]

    @property
    def within_envelope(self) -> bool:
        return all(row.within_envelope for row in self.rows)


def borel_cantelli_envelope(det: int, c: float, a: float, n: int) -> float:
    """(1 + 2/c)^2 det/(det - 1) (a^2 det)^n, summable in n when a^2 det < 1."""
    return (1.0 + 2.0 / c) ** 2 * det / (det - 1) * (a * a * det) ** n


def borel_cantelli_lower(system: MapLike, a: float, n_max: int, trials: int,
                         seed: int = settings.DEFAULT_SEED, samples: int = 256) -> BorelCantelliReport:
    """
    Frequency of {x : tau(B(x, a^n)) <= n} against its summable envelope.

    A sampled tau <= n is a genuine return, so the frequencies are conservative.
    Radii a^n >= 1/4 admit no ball and count as frequency 1.

    Args:
        system (MapLike): toral_endo_2d map.
        a (float): Radius base in (0, det^{-1/2}).
        n_max (int): Largest n.
        trials (int): Random centers per n.
        seed (int): Seed of centers and samples.
        samples (int): Sample points per ball.

    Returns:
        BorelCantelliReport: One row per n.
    """
    torus_map = as_map(system)
    if torus_map.kind != "toral_endo_2d":
        raise UnsupportedOperationError("borel_cantelli_lower needs a toral_endo_2d map")
    det = abs(torus_map.determinant)
    if not 0.0 < a < det ** -0.5:
        raise ValueError(f"a must lie in (0, det^(-1/2) = {det ** -0.5:.6f}), got {a}")
    if n_max < 1 or trials < 1:
        raise ValueError("n_max and trials must be >= 1")

    c = closing_constant(torus_map.matrix)
    centers = [TorusPoint(tuple(row)) for row in np.random.default_rng(seed).random((trials, 2))]
    rows = []
    for n in range(1, n_max + 1):
        radius = a ** n
        envelope = borel_cantelli_envelope(det, c, a, n)
        if radius >= MAX_RADIUS:
            rows.append(BorelCantelliRow(n, 1.0, envelope, True))
            continue
        results = parallel_map(
            lambda x: tau_ball_sample(torus_map, Ball(x, radius), n, samples, seed), centers)
        hits = sum(res.found for res in results)
        rows.append(BorelCantelliRow(n, hits / trials, envelope, False))
        logger.info(f"n={n}: frequency {hits / trials:.4f}, envelope {envelope:.4g}")
    return BorelCantelliReport(a, trials, tuple(rows))
