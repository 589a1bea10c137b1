"""
Exact geometry behind the ball return-time oracle.

For a linear map A of T^2 and the max-norm ball B(x, r), f^k(B) meets B iff some
lattice translate of c_k = A^k x - x lies in S_k = A^k([-r,r]^2) + [-r,r]^2.
S_k is centrally symmetric with edge normals e1, e2, rot(A^k e1) and rot(A^k e2), so
membership is four absolute-value inequalities. Candidates are screened column by
column in double precision and confirmed in exact rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from toral.dynamics import IntMatrix, canonical_fraction

ExactPoint = Tuple[Fraction, ...]

_SCREEN_TOL = 1e-7


@dataclass(frozen=True)
class LatticeTestResult:
    """
    Outcome of one exact intersection test f^k(B) ∩ B.

    Attributes:
        returns (bool): True if the intersection is non-empty.
        ambiguous (bool): True if a decisive inequality sat within the boundary margin.
        budget_exhausted (bool): True if the scan was abandoned undecided.
        witness (Tuple[ExactPoint, ExactPoint], optional): (y, f^k y), both in B.
        columns (int): Lattice columns scanned.
    """
    returns: bool
    ambiguous: bool = False
    budget_exhausted: bool = False
    witness: Optional[Tuple[ExactPoint, ExactPoint]] = None
    columns: int = 0


def clip_polygon(vertices: List[Tuple[Fraction, Fraction]], normal: Tuple[int, int],
                 bound: Fraction) -> List[Tuple[Fraction, Fraction]]:
    """
    Sutherland-Hodgman clip of a convex polygon to the half-plane <normal, v> <= bound.

    Args:
        vertices (List): Polygon vertices in order, exact coordinates.
        normal (Tuple[int, int]): Outward normal of the half-plane.
        bound (Fraction): Half-plane offset.

    Returns:
        List: Vertices of the clipped polygon (empty if the intersection is empty).
    """
    def level(v):
        return normal[0] * v[0] + normal[1] * v[1] - bound

    clipped = []
    for i, current in enumerate(vertices):
        previous = vertices[i - 1]
        current_level, previous_level = level(current), level(previous)
        if (current_level <= 0) != (previous_level <= 0):
            t = previous_level / (previous_level - current_level)
            clipped.append((previous[0] + t * (current[0] - previous[0]),
                            previous[1] + t * (current[1] - previous[1])))
        if current_level <= 0:
            clipped.append(current)
    return clipped


def _box_witness(power: IntMatrix, center: ExactPoint, q: Tuple[Fraction, Fraction],
                 r: Fraction) -> Optional[Tuple[ExactPoint, ExactPoint]]:
    # u in [-r,r]^2 with A^k u + q in [-r,r]^2; y = x + u, f^k y = x + A^k u + q (mod 1)
    polygon = [(-r, -r), (r, -r), (r, r), (-r, r)]
    for row, offset in zip(power, q):
        polygon = clip_polygon(polygon, (row[0], row[1]), r - offset)
        polygon = clip_polygon(polygon, (-row[0], -row[1]), r + offset)
        if not polygon:
            return None
    u = (sum(v[0] for v in polygon) / len(polygon), sum(v[1] for v in polygon) / len(polygon))
    image_offset = tuple(row[0] * u[0] + row[1] * u[1] + qi for row, qi in zip(power, q))
    start = tuple(canonical_fraction(c + du) for c, du in zip(center, u))
    image = tuple(canonical_fraction(c + dv) for c, dv in zip(center, image_offset))
    return start, image


def square_return_test(power: IntMatrix, det_power: int, center: ExactPoint, radius: Fraction,
                       budget: int, chunk: int, margin: float) -> LatticeTestResult:
    """
    Decide exactly whether A^k(B(x, r)) meets B(x, r) on T^2.

    Args:
        power (IntMatrix): A^k, exact.
        det_power (int): det(A)^k.
        center (ExactPoint): Exact ball center x.
        radius (Fraction): Exact radius r.
        budget (int): Maximum number of lattice columns to scan.
        chunk (int): Columns screened per vectorized pass.
        margin (float): Relative boundary band reported as ambiguous.

    Returns:
        LatticeTestResult: Decision, ambiguity flag and witness.
    """
    (a11, a12), (a21, a22) = power
    x1, x2 = center
    p1 = a11 * x1 + a12 * x2 - x1
    p2 = a21 * x1 + a22 * x2 - x2
    f1, f2 = p1 - math.floor(p1), p2 - math.floor(p2)
    r = radius
    # half-widths along e1, e2 and along the normals (-a21, a11), (-a22, a12)
    w1 = r * (1 + abs(a11) + abs(a12))
    w2 = r * (1 + abs(a21) + abs(a22))
    h1 = r * (abs(det_power) + abs(a11) + abs(a21))
    h2 = r * (abs(det_power) + abs(a12) + abs(a22))
    constraints = ((a21, a11, h1), (a22, a12, h2))

    tolerance = float(w1) * margin + 1e-12
    first = math.ceil(float(f1 - w1) - tolerance)
    last = math.floor(float(f1 + w1) + tolerance)
    columns = last - first + 1
    if columns > budget:
        return LatticeTestResult(False, budget_exhausted=True, columns=0)

    f1_float, f2_float, w2_float = float(f1), float(f2), float(w2)
    ambiguous = False
    for start in range(first, last + 1, chunk):
        n1 = np.arange(start, min(start + chunk, last + 1), dtype=np.float64)
        q1 = f1_float - n1
        lower = np.full(n1.shape, -w2_float)
        upper = np.full(n1.shape, w2_float)
        feasible = np.ones(n1.shape, dtype=bool)
        for c1, c2, h in constraints:
            # |c2 q2 - c1 q1| <= h
            if c2 == 0:
                feasible &= np.abs(float(c1) * q1) <= float(h) * (1 + _SCREEN_TOL)
                continue
            middle = float(Fraction(c1, c2)) * q1
            half = float(h / abs(c2))
            lower = np.maximum(lower, middle - half)
            upper = np.minimum(upper, middle + half)
        slack = _SCREEN_TOL * np.maximum(1.0, np.abs(upper))
        n2_min = np.ceil(f2_float - upper - slack)
        n2_max = np.floor(f2_float - lower + slack)
        counts = np.where(feasible, n2_max - n2_min + 1, 0).clip(min=0).astype(np.int64)
        hits = np.nonzero(counts)[0]
        for index in hits:
            for n2 in range(int(n2_min[index]), int(n2_max[index]) + 1):
                q = (f1 - int(n1[index]), f2 - n2)
                margin_value = _normalized_slack(q, power, ((w1, w2), constraints))
                if abs(margin_value) <= margin:
                    ambiguous = True
                if margin_value < 0:
                    continue
                witness = _box_witness(power, center, q, r)
                if witness is not None:
                    return LatticeTestResult(True, ambiguous, witness=witness, columns=columns)
    return LatticeTestResult(False, ambiguous, columns=columns)


def _normalized_slack(q, power, bounds) -> float:
    (w1, w2), constraints = bounds
    slacks = [(w1 - abs(q[0])) / w1, (w2 - abs(q[1])) / w2]
    for c1, c2, h in constraints:
        slacks.append((h - abs(c2 * q[1] - c1 * q[0])) / h)
    return float(min(slacks))


def interval_return_test(k: int, center: Fraction, radius: Fraction, margin: float) -> LatticeTestResult:
    """
    Decide exactly whether the doubling image 2^k I meets I = [x - r, x + r] on the circle.

    Args:
        k (int): Iterate.
        center (Fraction): Exact center x.
        radius (Fraction): Exact radius r.
        margin (float): Boundary band (circle units) reported as ambiguous.

    Returns:
        LatticeTestResult: Decision with a witness pair (y, 2^k y mod 1).
    """
    scale = 2 ** k
    left, length = center - radius, 2 * radius
    image_left, image_length = scale * left, scale * length
    if image_length >= 1:
        target = center + math.ceil(image_left - center)
        return LatticeTestResult(True, witness=_interval_witness(left, image_left, target, scale))

    start_gap = canonical_fraction(image_left - left)
    end_gap = canonical_fraction(left - image_left)
    if start_gap <= length:
        slack = length - start_gap
        target = image_left
    elif end_gap <= image_length:
        slack = image_length - end_gap
        target = image_left + end_gap
    else:
        slack = -min(start_gap - length, end_gap - image_length)
        return LatticeTestResult(False, ambiguous=abs(slack) <= margin)
    witness = _interval_witness(left, image_left, target, scale)
    return LatticeTestResult(True, ambiguous=slack <= margin, witness=witness)


def _interval_witness(left: Fraction, image_left: Fraction, target: Fraction,
                      scale: int) -> Tuple[ExactPoint, ExactPoint]:
    start = left + (target - image_left) / scale
    return (canonical_fraction(start),), (canonical_fraction(target),)


def combine_witnesses(parts: Sequence[Tuple[ExactPoint, ExactPoint]]) -> Tuple[ExactPoint, ExactPoint]:
    """Concatenate factor witnesses into a product witness."""
    start = tuple(c for part in parts for c in part[0])
    image = tuple(c for part in parts for c in part[1])
    return start, image
