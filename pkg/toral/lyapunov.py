"""
Lyapunov spectra of linear toral maps and the recurrence bounds they imply.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config.settings import ZERO_EXPONENT_TOL
from toral.dynamics import MapLike, TangentFrame, TorusPoint, as_map
from toral.exceptions import UndefinedBoundsError, UnsupportedOperationError

logger = logging.getLogger(__name__)

MIN_ESTIMATION_ITERS = 1000


@dataclass(frozen=True)
class ExponentSpectrum:
    """
    Ordered Lyapunov exponents (nats per iteration) and the four derived constants.

    Attributes:
        exponents (Tuple[float, ...]): lambda_1 <= ... <= lambda_d.
        lambda_u_min (float, optional): Smallest positive exponent.
        lambda_u_max (float, optional): Largest exponent, when positive.
        lambda_s_max (float, optional): Largest negative exponent.
        lambda_s_min (float, optional): Smallest exponent, when negative.
    """
    exponents: Tuple[float, ...]
    lambda_u_min: Optional[float] = None
    lambda_u_max: Optional[float] = None
    lambda_s_max: Optional[float] = None
    lambda_s_min: Optional[float] = None

    @classmethod
    def from_exponents(cls, exponents: Sequence[float]) -> "ExponentSpectrum":
        """
        Sort exponents and derive the four constants from them.

        Args:
            exponents (Sequence[float]): Exponents in any order.

        Returns:
            ExponentSpectrum: Spectrum with every constant recomputed.
        """
        ordered = tuple(sorted(float(e) for e in exponents))
        positive = [e for e in ordered if e > ZERO_EXPONENT_TOL]
        negative = [e for e in ordered if e < -ZERO_EXPONENT_TOL]
        return cls(
            exponents=ordered,
            lambda_u_min=min(positive) if positive else None,
            lambda_u_max=max(positive) if positive else None,
            lambda_s_max=max(negative) if negative else None,
            lambda_s_min=min(negative) if negative else None,
        )

    @property
    def dimension(self) -> int:
        return len(self.exponents)

    @property
    def hyperbolic(self) -> bool:
        return all(abs(e) > ZERO_EXPONENT_TOL for e in self.exponents)

    @property
    def positive_sum(self) -> float:
        return sum(e for e in self.exponents if e > ZERO_EXPONENT_TOL)


class TheoremBounds(NamedTuple):
    """Lower and (hyperbolic case only) upper bound on tau(B(x,r)) / -log r."""
    lower: float
    upper: Optional[float]


def exact_exponents(system: MapLike) -> ExponentSpectrum:
    """
    Closed-form exponents of a linear map: logs of its eigenvalue moduli.

    Args:
        system (MapLike): Map description or map object.

    Returns:
        ExponentSpectrum: Union over factors for products, log 2 for doubling.
    """
    torus_map = as_map(system)
    if torus_map.kind == "product_4d":
        exponents: List[float] = []
        for factor in torus_map.factors:
            exponents.extend(exact_exponents(factor).exponents)
        return ExponentSpectrum.from_exponents(exponents)
    moduli = np.abs(np.linalg.eigvals(torus_map.derivative))
    return ExponentSpectrum.from_exponents(np.log(moduli))


def estimate_exponents(system: MapLike, x: TorusPoint, iters: int, seed: int) -> ExponentSpectrum:
    """
    Cocycle estimate of the spectrum: push a random orthonormal frame along the orbit of x,
    re-orthonormalizing every step.

    Args:
        system (MapLike): Map description or map object.
        x (TorusPoint): Base point of the orbit.
        iters (int): Number of cocycle steps, at least 1000.
        seed (int): Seed of the initial frame.

    Returns:
        ExponentSpectrum: Accumulated log stretch divided by iters.
    """
    if iters < MIN_ESTIMATION_ITERS:
        raise ValueError(f"iters must be >= {MIN_ESTIMATION_ITERS}, got {iters}")
    torus_map = as_map(system)
    torus_map.check_dimension(x.dimension)
    frame = TangentFrame.random(torus_map.dimension, seed)
    # the derivative of a linear map is the same at every point of the orbit
    for _ in range(iters):
        frame = torus_map.tangent_step(frame)
    spectrum = ExponentSpectrum.from_exponents(frame.log_norms / iters)
    logger.info(f"Estimated exponents of {torus_map} over {iters} steps: {spectrum.exponents}")
    return spectrum


def theorem_bounds(spec: ExponentSpectrum) -> TheoremBounds:
    """
    Bounds on the recurrence slope from the exponent constants.

    lower = 1/Lambda^u - 1/Lambda^s, upper = 1/lambda^u - 1/lambda^s (hyperbolic only);
    the stable term is dropped when there is no negative exponent.

    Args:
        spec (ExponentSpectrum): Spectrum with at least one positive exponent.

    Returns:
        TheoremBounds: (lower, upper) with upper None for non-hyperbolic spectra.

    Raises:
        UndefinedBoundsError: If no exponent is positive.
    """
    if spec.lambda_u_max is None:
        raise UndefinedBoundsError(f"No positive exponent in {spec.exponents}")
    lower = 1.0 / spec.lambda_u_max
    if spec.lambda_s_min is not None:
        lower -= 1.0 / spec.lambda_s_min
    upper = None
    if spec.hyperbolic:
        upper = 1.0 / spec.lambda_u_min
        if spec.lambda_s_max is not None:
            upper -= 1.0 / spec.lambda_s_max
    return TheoremBounds(lower, upper)


def corollary_limit(spec: ExponentSpectrum) -> float:
    """
    Common value of the two bounds for a surface map with one exponent of each sign.

    Raises:
        UnsupportedOperationError: If the bounds do not coincide.
    """
    bounds = theorem_bounds(spec)
    if bounds.upper is None or not math.isclose(bounds.lower, bounds.upper, rel_tol=1e-12):
        raise UnsupportedOperationError(f"Bounds {bounds} do not coincide")
    return bounds.lower


def expanding_limit(spec: ExponentSpectrum) -> float:
    """2 / (Lambda^u + lambda^u), the recurrence slope of a two-exponent expanding map."""
    if spec.lambda_s_max is not None or spec.lambda_u_min is None or spec.dimension != 2:
        raise UnsupportedOperationError("expanding_limit needs two positive exponents")
    return 2.0 / (spec.lambda_u_max + spec.lambda_u_min)


def product_limits(first: ExponentSpectrum, second: ExponentSpectrum) -> Dict[str, float]:
    """
    Recurrence slopes of a product of two surface automorphisms.

    Returns:
        Dict[str, float]: ``lebesgue`` (product of positive-entropy measures, 1/lambda^u - 1/lambda^s
        of the product spectrum) and ``dirac`` (Lebesgue on the faster factor times a Dirac mass,
        1/Lambda^u - 1/Lambda^s).
    """
    product = ExponentSpectrum.from_exponents(first.exponents + second.exponents)
    bounds = theorem_bounds(product)
    return {"lebesgue": bounds.upper, "dirac": bounds.lower}


def conjecture_sides(dimension: float, entropy: float, liminf_estimate: float) -> Dict[str, object]:
    """
    Exploratory comparison of a measured liminf with the conjectured bound dim / h.
    Never asserted; reported as numbers only.
    """
    conjectured = dimension / entropy if entropy > 0 else math.inf
    return {
        "conjectured_lower": conjectured,
        "liminf_estimate": liminf_estimate,
        "exploratory": True,
    }


SPECTRUM_CSV_UNITS = "nats/iter"


def spectrum_header(dimension: int) -> List[str]:
    return (["map_id"] + [f"lambda_{i + 1}" for i in range(dimension)]
            + ["Lambda_u", "lambda_u", "lambda_s", "Lambda_s", "lower_bound", "upper_bound"])


def spectrum_row(map_id: str, spec: ExponentSpectrum) -> List[object]:
    """CSV row: map_id, exponents, Lambda^u, lambda^u, lambda^s, Lambda^s, lower, upper."""
    try:
        bounds = theorem_bounds(spec)
    except UndefinedBoundsError:
        bounds = TheoremBounds(None, None)
    return ([map_id] + list(spec.exponents)
            + [spec.lambda_u_max, spec.lambda_u_min, spec.lambda_s_max, spec.lambda_s_min,
               bounds.lower, bounds.upper])
