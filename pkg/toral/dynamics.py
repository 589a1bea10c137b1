"""
Torus arithmetic, the map zoo, orbit generation and the tangent cocycle.

Three arithmetic paths coexist:

* double precision (``apply``, ``orbit``, ``tangent_step``), the everyday path;
* exact rationals (``apply_exact``, ``orbit_exact``), the oracle for rational points;
* exact integer grids: 64-bit fixed point for batches of sample points
  (``to_fixed``, ``apply_fixed``) and ``lattice_orbit`` for long single orbits.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from pydantic import BaseModel, ConfigDict, model_validator

from config.settings import DEGENERATE_STRETCH
from toral.exceptions import (
    DimensionMismatchError,
    NumericalDegeneracyError,
    UnsupportedOperationError,
)

IntMatrix = Tuple[Tuple[int, ...], ...]
MapKind = Literal["toral_auto_2d", "toral_endo_2d", "product_4d", "doubling_1d"]

SUPPORTED_DIMENSIONS = (1, 2, 4)
FIXED_MODULUS = 2 ** 64
_FIXED_SCALE = float(2 ** 64)
_FIXED_TO_FLOAT = 2.0 ** -53
# Grid moduli for lattice_orbit; the first one coprime to det A is used.
_LATTICE_MODULI = (2 ** 64, 3 ** 40, 5 ** 27, 7 ** 22)
_UNIT_CIRCLE_TOL = 1e-9

logger = logging.getLogger(__name__)


# ========== torus arithmetic ==========

def canonical(values) -> np.ndarray:
    """
    Reduce coordinates to their canonical representative in [0, 1).

    Args:
        values: Scalar or array of real coordinates.

    Returns:
        np.ndarray: Coordinates in [0, 1).
    """
    reduced = np.mod(np.asarray(values, dtype=float), 1.0)
    # np.mod(-tiny, 1.0) rounds up to 1.0
    return np.where(reduced >= 1.0, 0.0, reduced)


def canonical_fraction(value: Fraction) -> Fraction:
    """
    Reduce an exact rational coordinate to [0, 1).

    Args:
        value (Fraction): Any rational.

    Returns:
        Fraction: value - floor(value).
    """
    return value - math.floor(value)


def coordinate_distance(a, b) -> np.ndarray:
    """Per-coordinate circle distance min(|a-b|, 1-|a-b|)."""
    gap = np.abs(canonical(a) - canonical(b))
    return np.minimum(gap, 1.0 - gap)


def torus_distance(a, b) -> float:
    """
    Max-norm distance on the torus.

    Args:
        a: First point (TorusPoint or coordinate array).
        b: Second point (TorusPoint or coordinate array).

    Returns:
        float: max over coordinates of the circle distance.
    """
    a = a.as_array() if isinstance(a, TorusPoint) else a
    b = b.as_array() if isinstance(b, TorusPoint) else b
    return float(np.max(coordinate_distance(a, b)))


@dataclass(frozen=True)
class TorusPoint:
    """
    A point of the torus T^d, d in {1, 2, 4}, stored canonically.

    Attributes:
        coords (Tuple[float, ...]): Coordinates in [0, 1).
    """
    coords: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coords) not in SUPPORTED_DIMENSIONS:
            raise DimensionMismatchError(
                f"Torus dimension must be one of {SUPPORTED_DIMENSIONS}, got {len(self.coords)}")
        object.__setattr__(self, "coords", tuple(float(c) for c in canonical(self.coords)))

    @classmethod
    def of(cls, *coords: float) -> "TorusPoint":
        return cls(tuple(coords))

    @classmethod
    def from_exact(cls, coords: Sequence[Fraction]) -> "TorusPoint":
        return cls(tuple(float(canonical_fraction(c)) for c in coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def exact(self) -> Tuple[Fraction, ...]:
        """Exact rational value of the stored doubles."""
        return tuple(Fraction(c) for c in self.coords)


# ========== integer matrices ==========

def identity_matrix(d: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def matrix_multiply(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    columns = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in columns) for row in a)


def matrix_power(a: IntMatrix, k: int) -> IntMatrix:
    """
    Exact integer matrix power by repeated squaring.

    Args:
        a (IntMatrix): Square integer matrix.
        k (int): Non-negative exponent.

    Returns:
        IntMatrix: a**k with arbitrary-precision entries.
    """
    if k < 0:
        raise ValueError(f"Exponent must be non-negative, got {k}")
    result = identity_matrix(len(a))
    base = a
    while k:
        if k & 1:
            result = matrix_multiply(result, base)
        base = matrix_multiply(base, base)
        k >>= 1
    return result


def determinant(a: IntMatrix) -> int:
    return int(sympy.Matrix(a).det(method="bareiss"))


def eigenvalue_moduli(a: IntMatrix) -> List[float]:
    """Moduli of the eigenvalues, from the exact characteristic polynomial."""
    coefficients = [float(c) for c in sympy.Matrix(a).charpoly().all_coeffs()]
    return sorted(float(abs(root)) for root in np.roots(coefficients))


def block_diagonal(blocks: Sequence[IntMatrix]) -> IntMatrix:
    size = sum(len(b) for b in blocks)
    rows: List[Tuple[int, ...]] = []
    offset = 0
    for block in blocks:
        for row in block:
            rows.append((0,) * offset + tuple(row) + (0,) * (size - offset - len(row)))
        offset += len(block)
    return tuple(rows)


# ========== declarative map description ==========

class MapSpec(BaseModel):
    """
    Declarative description of a linear dynamical system on a torus.

    Attributes:
        kind (MapKind): toral_auto_2d, toral_endo_2d, product_4d or doubling_1d.
        matrix (IntMatrix, optional): Defining integer matrix (2x2 kinds only).
        factors (Tuple[MapSpec, MapSpec], optional): Factors of a product_4d map.

    Example:
        >>> MapSpec.model_validate_json('{"kind": "toral_auto_2d", "matrix": [[2, 1], [1, 1]]}')
    """
    model_config = ConfigDict(frozen=True)

    kind: MapKind
    matrix: Optional[IntMatrix] = None
    factors: Optional[Tuple["MapSpec", "MapSpec"]] = None

    @model_validator(mode="after")
    def check_kind_invariants(self) -> "MapSpec":
        if self.kind == "doubling_1d":
            if self.matrix is not None or self.factors is not None:
                raise ValueError("doubling_1d takes neither a matrix nor factors")
            return self

        if self.kind == "product_4d":
            if self.matrix is not None:
                raise ValueError("product_4d is defined by its factors, not by a matrix")
            if self.factors is None or any(f.kind != "toral_auto_2d" for f in self.factors):
                raise ValueError("product_4d requires two toral_auto_2d factors")
            return self

        if self.factors is not None:
            raise ValueError(f"{self.kind} does not take factors")
        if self.matrix is None or len(self.matrix) != 2 or any(len(row) != 2 for row in self.matrix):
            raise ValueError(f"{self.kind} requires a 2x2 integer matrix")

        (a, b), (c, d) = self.matrix
        det = a * d - b * c
        if self.kind == "toral_auto_2d":
            if abs(det) != 1:
                raise ValueError(f"toral_auto_2d requires |det| = 1, got det = {det}")
            if abs(a + d) <= 2:
                raise ValueError(f"toral_auto_2d requires |trace| > 2 (hyperbolic), got trace = {a + d}")
        elif min(eigenvalue_moduli(self.matrix)) <= 1.0 + _UNIT_CIRCLE_TOL:
            raise ValueError("toral_endo_2d requires every eigenvalue modulus > 1")
        return self

    @property
    def dimension(self) -> int:
        return {"doubling_1d": 1, "product_4d": 4}.get(self.kind, 2)

    def defining_matrix(self) -> IntMatrix:
        """The integer matrix of the map (block diagonal for products, [2] for doubling)."""
        if self.kind == "doubling_1d":
            return ((2,),)
        if self.kind == "product_4d":
            return block_diagonal([f.defining_matrix() for f in self.factors])
        return self.matrix


MapSpec.model_rebuild()


# ========== orbit and tangent containers ==========

@dataclass(frozen=True)
class Orbit:
    """
    A finite orbit segment.

    Attributes:
        points (np.ndarray): Array of shape (length + 1, d); points[0] is the start.
        start (TorusPoint): Initial point.
        modulus (int, optional): Grid modulus Q when the orbit was computed exactly on (Z/Q)^d.
    """
    points: np.ndarray
    start: TorusPoint
    modulus: Optional[int] = None

    @property
    def length(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True)
class TangentFrame:
    """
    Orthonormal tangent frame with accumulated per-direction log stretch (nats).

    Attributes:
        basis (np.ndarray): d x d matrix whose columns are the tangent vectors.
        log_norms (np.ndarray): Accumulated log stretch per column.
        steps (int): Number of cocycle steps applied.
    """
    basis: np.ndarray
    log_norms: np.ndarray
    steps: int = 0

    @classmethod
    def identity(cls, d: int) -> "TangentFrame":
        return cls(np.eye(d), np.zeros(d))

    @classmethod
    def random(cls, d: int, seed: int) -> "TangentFrame":
        """Random orthonormal frame drawn from a seeded Gaussian matrix."""
        rng = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng.standard_normal((d, d)))
        return cls(q * np.sign(np.diag(r)), np.zeros(d))

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]


# ========== maps ==========

class TorusMap:
    """
    Base class for linear maps of a torus.
    Holds the defining integer matrix and provides every arithmetic path.
    """

    def __init__(self, spec: MapSpec) -> None:
        """
        Initialize the map from its declarative description.

        Args:
            spec (MapSpec): Validated map description.
        """
        self.spec = spec
        self.kind = spec.kind
        self.matrix: IntMatrix = spec.defining_matrix()
        self.dimension = len(self.matrix)
        self.derivative = np.array(self.matrix, dtype=float)
        self.determinant = determinant(self.matrix)
        self._fixed_matrix = np.array(
            [[entry % FIXED_MODULUS for entry in row] for row in self.matrix], dtype=np.uint64)
        self.logger = logging.getLogger(self.__class__.__name__)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.spec.model_dump_json(exclude_none=True)})"

    @property
    def invertible(self) -> bool:
        return self.kind in ("toral_auto_2d", "product_4d")

    def check_dimension(self, dimension: int) -> None:
        if dimension != self.dimension:
            raise DimensionMismatchError(
                f"{self.kind} acts on T^{self.dimension}, got an object of dimension {dimension}")

    def require_invertible(self) -> None:
        if not self.invertible:
            raise UnsupportedOperationError(f"{self.kind} is not invertible")

    # ----- double precision -----

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        return canonical(self.derivative @ x)

    def apply_batch(self, points: np.ndarray) -> np.ndarray:
        """Apply the map to an (N, d) array of points."""
        return canonical(points @ self.derivative.T)

    def apply(self, x: TorusPoint) -> TorusPoint:
        self.check_dimension(x.dimension)
        return TorusPoint(tuple(self.apply_array(x.as_array())))

    def inverse_matrix(self) -> IntMatrix:
        self.require_invertible()
        inverse = sympy.Matrix(self.matrix).inv()
        return tuple(tuple(int(inverse[i, j]) for j in range(self.dimension)) for i in range(self.dimension))

    def inverse_apply_array(self, x: np.ndarray) -> np.ndarray:
        return canonical(np.array(self.inverse_matrix(), dtype=float) @ x)

    def inverse_apply(self, x: TorusPoint) -> TorusPoint:
        """Preimage f^-1(x); raises UnsupportedOperationError on a non-invertible map."""
        self.require_invertible()
        self.check_dimension(x.dimension)
        return TorusPoint(tuple(self.inverse_apply_array(x.as_array())))

    # ----- exact integer matrices and rationals -----

    def matrix_power(self, k: int) -> IntMatrix:
        return matrix_power(self.matrix, k)

    def apply_exact(self, x: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        """Exact image of a rational point, reduced to [0, 1)."""
        self.check_dimension(len(x))
        return tuple(canonical_fraction(sum(a * c for a, c in zip(row, x))) for row in self.matrix)

    # ----- 64-bit fixed point -----

    def apply_fixed(self, points: np.ndarray) -> np.ndarray:
        """
        Exact image of an (N, d) uint64 array of fixed-point coordinates X / 2**64.

        Args:
            points (np.ndarray): uint64 array, shape (N, d).

        Returns:
            np.ndarray: uint64 array of images; integer wraparound is reduction mod 1.
        """
        return _fixed_matmul(self._fixed_matrix, points)

    def inverse_apply_fixed(self, points: np.ndarray) -> np.ndarray:
        inverse = np.array([[e % FIXED_MODULUS for e in row] for row in self.inverse_matrix()], dtype=np.uint64)
        return _fixed_matmul(inverse, points)

    # ----- tangent cocycle -----

    def tangent_step(self, frame: TangentFrame) -> TangentFrame:
        """
        Push a frame through the derivative and re-orthonormalize it.

        Args:
            frame (TangentFrame): Current orthonormal frame.

        Returns:
            TangentFrame: New frame with log stretch accumulated per column.

        Raises:
            NumericalDegeneracyError: If a column stretch drops below 1e-300.
        """
        self.check_dimension(frame.dimension)
        q, r = np.linalg.qr(self.derivative @ frame.basis)
        stretch = np.abs(np.diag(r))
        if np.any(stretch < DEGENERATE_STRETCH):
            raise NumericalDegeneracyError(f"Tangent frame degenerated, stretch factors {stretch}")
        signs = np.sign(np.diag(r))
        return TangentFrame(q * signs, frame.log_norms + np.log(stretch), frame.steps + 1)


class LinearTorusMap(TorusMap):
    """
    Toral automorphism, expanding endomorphism or the doubling map of the circle.
    """


class ProductTorusMap(TorusMap):
    """
    Direct product of two toral automorphisms acting on T^4 = T^2 x T^2.
    Double precision operations delegate to the factors.
    """

    def __init__(self, spec: MapSpec) -> None:
        super().__init__(spec)
        self.factors: Tuple[TorusMap, TorusMap] = tuple(build_map(f) for f in spec.factors)

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return x[..., :2], x[..., 2:]

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        first, second = self.split(x)
        return np.concatenate([self.factors[0].apply_array(first), self.factors[1].apply_array(second)])

    def apply_batch(self, points: np.ndarray) -> np.ndarray:
        first, second = self.split(points)
        return np.concatenate(
            [self.factors[0].apply_batch(first), self.factors[1].apply_batch(second)], axis=1)

    def inverse_apply_array(self, x: np.ndarray) -> np.ndarray:
        first, second = self.split(x)
        return np.concatenate(
            [self.factors[0].inverse_apply_array(first), self.factors[1].inverse_apply_array(second)])


def _fixed_matmul(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.uint64)
    images = np.zeros_like(points)
    for i in range(matrix.shape[0]):
        column = np.zeros(points.shape[0], dtype=np.uint64)
        for j in range(matrix.shape[1]):
            if matrix[i, j]:
                column += points[:, j] * matrix[i, j]
        images[:, i] = column
    return images


@lru_cache(maxsize=64)
def build_map(spec: MapSpec) -> TorusMap:
    """
    Build the map object described by a MapSpec.

    Args:
        spec (MapSpec): Validated description.

    Returns:
        TorusMap: ProductTorusMap for product_4d, LinearTorusMap otherwise.
    """
    if spec.kind == "product_4d":
        return ProductTorusMap(spec)
    return LinearTorusMap(spec)


MapLike = Union[MapSpec, TorusMap]


def as_map(system: MapLike) -> TorusMap:
    return system if isinstance(system, TorusMap) else build_map(system)


# ========== fixed-point helpers ==========

def to_fixed(points) -> np.ndarray:
    """
    Exact fixed-point image X = x * 2**64 of double coordinates in [0, 1).

    Args:
        points: Array of coordinates, shape (N, d) or (d,).

    Returns:
        np.ndarray: uint64 array of the same shape.
    """
    return (canonical(points) * _FIXED_SCALE).astype(np.uint64)


def from_fixed(points: np.ndarray) -> np.ndarray:
    return (np.asarray(points, dtype=np.uint64) >> np.uint64(11)).astype(float) * _FIXED_TO_FLOAT


def fixed_to_fraction(value) -> Fraction:
    return Fraction(int(value), FIXED_MODULUS)


def fixed_radius(r: float) -> np.uint64:
    """Largest fixed-point distance not exceeding r."""
    return np.uint64(math.floor(Fraction(r) * FIXED_MODULUS))


def fixed_distance(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Max-norm torus distance, in fixed-point units, of each row of points to center."""
    forward = points - center
    backward = center - points
    return np.minimum(forward, backward).max(axis=-1)


# ========== module-level operations ==========

def apply(system: MapLike, x: TorusPoint) -> TorusPoint:
    """
    Image of a point: A x mod 1, 2x mod 1, or factorwise for products.

    Args:
        system (MapLike): Map description or map object.
        x (TorusPoint): Point of matching dimension.

    Returns:
        TorusPoint: Canonical image.
    """
    return as_map(system).apply(x)


def inverse_apply(system: MapLike, x: TorusPoint) -> TorusPoint:
    """
    Apply the inverse of an automorphism.

    Args:
        system (MapLike): Invertible map description or map object.
        x (TorusPoint): Point on the torus.

    Returns:
        TorusPoint: f^-1(x), canonical.

    Raises:
        UnsupportedOperationError: If the map is not invertible.
    """
    return as_map(system).inverse_apply(x)


def orbit(system: MapLike, x: TorusPoint, n: int) -> Orbit:
    """
    Double precision orbit segment x, f(x), ..., f^n(x).

    Args:
        system (MapLike): Map description or map object.
        x (TorusPoint): Start point.
        n (int): Number of iterates, n >= 1.

    Returns:
        Orbit: n + 1 points.
    """
    if n < 1:
        raise ValueError(f"Orbit length must be >= 1, got {n}")
    torus_map = as_map(system)
    torus_map.check_dimension(x.dimension)
    points = np.empty((n + 1, x.dimension))
    points[0] = x.as_array()
    for k in range(n):
        points[k + 1] = torus_map.apply_array(points[k])
    return Orbit(points, x)


def apply_exact(system: MapLike, x: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """
    Exact image of a rational point.

    Args:
        system (MapLike): Linear map description or map object.
        x (Sequence[Fraction]): Rational coordinates.

    Returns:
        Tuple[Fraction, ...]: f(x) reduced to [0, 1).
    """
    return as_map(system).apply_exact(x)


def orbit_exact(system: MapLike, x: Sequence[Fraction], n: int) -> List[Tuple[Fraction, ...]]:
    """Exact rational orbit segment of length n + 1."""
    torus_map = as_map(system)
    points = [tuple(canonical_fraction(Fraction(c)) for c in x)]
    for _ in range(n):
        points.append(torus_map.apply_exact(points[-1]))
    return points


def coprime_modulus(det: int) -> int:
    for modulus in _LATTICE_MODULI:
        if math.gcd(modulus, det) == 1:
            return modulus
    raise UnsupportedOperationError(f"No lattice modulus coprime to det = {det}")


def lattice_orbit(system: MapLike, x: TorusPoint, n: int) -> Orbit:
    """
    Long orbit computed exactly on the grid (Z/Q)^d, Q coprime to det A.

    The start is the grid point nearest to x; the map permutes the grid, so the
    orbit neither collapses (doubling map) nor accumulates rounding error.

    Args:
        system (MapLike): Map description or map object.
        x (TorusPoint): Start point, rounded to the grid.
        n (int): Number of iterates.

    Returns:
        Orbit: n + 1 points with the grid modulus recorded.
    """
    torus_map = as_map(system)
    torus_map.check_dimension(x.dimension)
    modulus = coprime_modulus(torus_map.determinant)
    rows = torus_map.matrix
    state = tuple(round(c * modulus) % modulus for c in x.exact())
    points = np.empty((n + 1, x.dimension))
    for k in range(n + 1):
        points[k] = [s / modulus for s in state]
        state = tuple(sum(a * s for a, s in zip(row, state)) % modulus for row in rows)
    start = TorusPoint(tuple(points[0]))
    logger.debug(f"Lattice orbit of {n} steps on modulus {modulus} for {torus_map}")
    return Orbit(canonical(points), start, modulus)


def tangent_step(system: MapLike, frame: TangentFrame) -> TangentFrame:
    return as_map(system).tangent_step(frame)
