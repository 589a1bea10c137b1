"""
Acceptance suite behind the ``verify`` subcommand.

Each check turns an asymptotic statement into a finite-scale comparison with a stated
tolerance, or asserts an exact arithmetic fact. Results are deterministic for a given
seed and tier.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Literal

import numpy as np

from config.map_profiles import CATMAP, DISTINCT_PRODUCT, DOUBLING, EXPANDING
from toral.dynamics import MapSpec, TorusPoint
from toral.lyapunov import (
    corollary_limit,
    estimate_exponents,
    exact_exponents,
    expanding_limit,
    product_limits,
    theorem_bounds,
)
from toral.numtheory import (
    GOLDEN_THETA,
    convergents,
    covering_time,
    enumerate_periodic_points,
    periodic_points,
    rotation_density,
)
from toral.parallel import parallel_map
from toral.recurrence import (
    Ball,
    Word,
    slope_series,
    tau_ball_exact,
    tau_ball_sample,
    tau_word,
)
from toral.spectrum import EmpiricalMeasure, box_dimension, lebesgue_entropy, spectrum_curve, youngs_check

Tier = Literal["quick", "full"]

TIER_PARAMETERS: Dict[str, Dict[str, object]] = {
    "quick": {"iters": 20_000, "points": 6, "grid": 12, "r_min": 1e-4, "balls": 40, "words": 2000,
              "period": 3, "orbit": 500_000, "spectrum_points": 30, "spectrum_r": (1e-5, 5e-2),
              "spectrum_grid": 16},
    "full": {"iters": 100_000, "points": 20, "grid": 24, "r_min": 1e-5, "balls": 500, "words": 10_000,
             "period": 4, "orbit": 1_000_000, "spectrum_points": 60, "spectrum_r": (1e-5, 5e-2),
             "spectrum_grid": 20},
}


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of one acceptance check.

    Attributes:
        name (str): Check identifier.
        passed (bool): Whether every assertion held.
        detail (str): Measured values against targets.
    """
    name: str
    passed: bool
    detail: str


def _random_points(seed: int, count: int, dimension: int) -> List[TorusPoint]:
    rng = np.random.default_rng(seed)
    return [TorusPoint(tuple(row)) for row in rng.random((count, dimension))]


def _within(value: float, target: float, tolerance: float) -> bool:
    return abs(value - target) <= tolerance * abs(target)


class AcceptanceSuite:
    """
    Runs the acceptance checks for one tier.
    """

    def __init__(self, tier: Tier = "quick", seed: int = 0) -> None:
        """
        Args:
            tier (str): ``quick`` or ``full``.
            seed (int): Seed shared by every check.
        """
        self.tier = tier
        self.seed = seed
        self.parameters = TIER_PARAMETERS[tier]
        self.logger = logging.getLogger(self.__class__.__name__)

    def checks(self) -> List[Callable[[], CheckResult]]:
        return [
            self.check_exponents,
            self.check_catmap_slope,
            self.check_expanding_slope,
            self.check_doubling_slope,
            self.check_product_inequality,
            self.check_dirac_product,
            self.check_word_returns,
            self.check_periodic_points,
            self.check_covering,
            self.check_spectrum,
            self.check_oracles,
        ]

    def run(self) -> List[CheckResult]:
        results = []
        for check in self.checks():
            started = time.perf_counter()
            try:
                result = check()
            except Exception as error:  # a crashing check is a failed check
                self.logger.exception(f"{check.__name__} raised")
                result = CheckResult(check.__name__.replace("check_", ""), False, f"error: {error}")
            self.logger.info(f"{result.name}: {'PASS' if result.passed else 'FAIL'} "
                             f"({time.perf_counter() - started:.1f}s) {result.detail}")
            results.append(result)
        return results

    # ----- exponents and slopes -----

    def check_exponents(self) -> CheckResult:
        iters = self.parameters["iters"]
        x = TorusPoint.of(0.337, 0.521)
        catmap = estimate_exponents(CATMAP, x, iters, self.seed).exponents
        expanding = estimate_exponents(EXPANDING, x, iters, self.seed).exponents
        passed = (np.allclose(catmap, (-0.962424, 0.962424), atol=1e-3)
                  and np.allclose(expanding, (0.136188, 2.061037), atol=1e-3))
        return CheckResult("exponents", passed, f"catmap={_fmt(catmap)} expanding={_fmt(expanding)}")

    def _slopes(self, spec: MapSpec, dimension: int) -> List:
        points = _random_points(self.seed, self.parameters["points"], dimension)
        return [slope_series(spec, x, self.parameters["r_min"], 1e-2, self.parameters["grid"]) for x in points]

    def check_catmap_slope(self) -> CheckResult:
        target = corollary_limit(exact_exponents(CATMAP))
        lower = theorem_bounds(exact_exponents(CATMAP)).lower
        series = self._slopes(CATMAP, 2)
        median = float(np.median([s.summary.slope for s in series]))
        liminfs = [s.summary.liminf_est for s in series if s.summary.liminf_est is not None]
        passed = _within(median, target, 0.25) and all(v >= 0.75 * lower for v in liminfs)
        return CheckResult("catmap_slope", passed,
                           f"median={median:.4f} target={target:.6f} min_liminf={min(liminfs):.4f}")

    def check_expanding_slope(self) -> CheckResult:
        spectrum = exact_exponents(EXPANDING)
        target = expanding_limit(spectrum)
        low, high = 1.0 / spectrum.lambda_u_max, 1.0 / spectrum.lambda_u_min
        slopes = [s.summary.slope for s in self._slopes(EXPANDING, 2)]
        median = float(np.median(slopes))
        passed = _within(median, target, 0.20) and all(low < v < high for v in slopes)
        return CheckResult("expanding_slope", passed, f"median={median:.4f} target={target:.6f}")

    def check_doubling_slope(self) -> CheckResult:
        target = 1.0 / math.log(2.0)
        median = float(np.median([s.summary.slope for s in self._slopes(DOUBLING, 1)]))
        return CheckResult("doubling_slope", _within(median, target, 0.25), f"median={median:.4f} target={target:.6f}")

    # ----- products -----

    def _product_balls(self, radius: float) -> List[Ball]:
        return [Ball(x, radius) for x in _random_points(self.seed, self.parameters["balls"], 4)]

    def check_product_inequality(self) -> CheckResult:
        balls = self._product_balls(0.05)

        def holds(ball: Ball) -> bool:
            sampled = tau_ball_sample(DISTINCT_PRODUCT, ball, 64, 256, self.seed)
            factors = [tau_ball_exact(f, ball.factor(i), 64).tau for i, f in enumerate(DISTINCT_PRODUCT.factors)]
            return sampled.tau is None or sampled.tau >= max(factors)

        inequality = all(parallel_map(holds, balls))
        limits = product_limits(exact_exponents(CATMAP), exact_exponents(DISTINCT_PRODUCT.factors[1]))
        x = _random_points(self.seed + 1, 1, 4)[0]
        slope = slope_series(DISTINCT_PRODUCT, x, 1e-4, 1e-2, 8).summary.slope
        passed = inequality and _within(slope, limits["lebesgue"], 0.30)
        return CheckResult("product_inequality", passed,
                           f"inequality={inequality} slope={slope:.4f} target={limits['lebesgue']:.6f}")

    def check_dirac_product(self) -> CheckResult:
        # the second factor sits at its fixed point, which returns at every step
        balls = [Ball(TorusPoint(b.center.coords[:2] + (0.0, 0.0)), 0.01) for b in self._product_balls(0.01)]

        def equal(ball: Ball) -> bool:
            product = tau_ball_exact(DISTINCT_PRODUCT, ball, 64).tau
            first = tau_ball_exact(DISTINCT_PRODUCT.factors[0], ball.factor(0), 64).tau
            return product == first

        matches = sum(parallel_map(equal, balls))
        return CheckResult("dirac_product", matches == len(balls), f"equal={matches}/{len(balls)}")

    # ----- symbolic and arithmetic -----

    def check_word_returns(self) -> CheckResult:
        rng = np.random.default_rng(self.seed)
        length = 128
        ratios = np.array([tau_word(Word(tuple(int(s) for s in rng.integers(0, 2, length)))) / length
                           for _ in range(self.parameters["words"])])
        exact = tau_word(Word.from_string("0101")) == 2 and tau_word(Word((0,) * 16)) == 1
        passed = (exact and ratios.mean() >= 0.95 and np.percentile(ratios, 5) >= 0.8
                  and ratios.max() == 1.0)
        return CheckResult("word_returns", passed,
                           f"mean={ratios.mean():.4f} p5={np.percentile(ratios, 5):.4f} max={ratios.max():.4f}")

    def check_periodic_points(self) -> CheckResult:
        counts = periodic_points(CATMAP.matrix, 4, "auto")
        expanding = periodic_points(EXPANDING.matrix, 1, "endo")
        certified = True
        for p in range(1, self.parameters["period"] + 1):
            for point in enumerate_periodic_points(CATMAP.matrix, p):
                ball = Ball(TorusPoint.from_exact(point), 1e-3)
                result = tau_ball_exact(CATMAP, ball, p)
                certified &= result.tau is not None and result.tau <= p
        passed = counts == [1, 5, 16, 45] and expanding == [1] and certified
        return CheckResult("periodic_points", passed, f"counts={counts} expanding={expanding} certified={certified}")

    def check_covering(self) -> CheckResult:
        base = covering_time(0.01)
        others = [covering_time(r) for r in (0.02, 0.005, 0.002)]
        terms = convergents(GOLDEN_THETA, 16)
        density = all(rotation_density(GOLDEN_THETA, terms[i].q) < 1.0 / terms[i - 1].q for i in range(1, 16))
        passed = (base.n_formula == 5 and base.validates and all(c.validates for c in others) and density)
        return CheckResult("covering", passed,
                           f"n_formula={base.n_formula} n_observed={base.n_observed} "
                           f"others={[(c.n_formula, c.n_observed) for c in others]} density={density}")

    # ----- spectrum -----

    def check_spectrum(self) -> CheckResult:
        """
        Cat map spectrum against the affine line 2 - q (1/lambda^u - 1/lambda^s).

        The return-time window runs down to r = 1e-5, well below the radii the orbit
        measure resolves; masses are fitted only where a ball holds enough orbit points.
        """
        r_min, r_max = self.parameters["spectrum_r"]
        measure = EmpiricalMeasure.from_map(CATMAP, self.parameters["orbit"], self.seed, cell_size=r_min)
        grid = list(np.geomspace(r_max, r_min, self.parameters["spectrum_grid"]))
        curve = spectrum_curve(CATMAP, measure, [-1.0, -0.75, -0.5, -0.25, 0.0],
                               self.parameters["spectrum_points"], grid, seed=self.seed)
        slope, intercept, r2 = curve.affine_fit()
        box = box_dimension(measure, [0.2, 0.1, 0.05, 0.02, 0.01])
        spectrum = exact_exponents(CATMAP)
        young = youngs_check(spectrum, lebesgue_entropy(spectrum), box)
        alpha_zero = curve.alpha_at(0.0)
        passed = (_within(intercept, 2.0, 0.15) and _within(abs(slope), 2.078087, 0.25) and r2 > 0.95
                  and alpha_zero is not None and _within(alpha_zero, box, 0.15) and young.relative_error <= 0.10)
        return CheckResult("spectrum", passed,
                           f"slope={slope:.4f} intercept={intercept:.4f} r2={r2:.4f} box={box:.4f} "
                           f"young_error={young.relative_error:.4f}")

    # ----- oracle cross-validation -----

    def check_oracles(self) -> CheckResult:
        """
        Cross-check the sampled and exact cat map oracles.

        Soundness (sampled >= exact) and monotonicity under nesting are asserted on every
        ball. Equality is asserted only for r in [0.02, 0.05]: at the first return the
        returning part of B(x, r) is a strip of relative area about lambda^-tau ~ r^2, so
        10 000 samples cannot hit it once r < 1e-2. Below that the agreement rate is reported.
        """
        count = self.parameters["balls"]
        rng = np.random.default_rng(self.seed)
        centers = _random_points(self.seed, count, 2)
        small = [Ball(x, float(r)) for x, r in zip(centers, 10 ** rng.uniform(-4, -2, count))]
        large = [Ball(x, float(r)) for x, r in zip(centers, rng.uniform(0.02, 0.05, count))]

        def compare(ball: Ball):
            exact = tau_ball_exact(CATMAP, ball, 40).tau
            sampled = tau_ball_sample(CATMAP, ball, 40, 10_000, self.seed).tau
            nested = tau_ball_exact(CATMAP, Ball(ball.center, 2 * ball.radius), 40).tau \
                if 2 * ball.radius < 0.25 else None
            sound = exact is None or sampled is None or sampled >= exact
            monotone = nested is None or exact is None or nested <= exact
            return sound, monotone, sampled == exact

        small_results = parallel_map(compare, small)
        large_results = parallel_map(compare, large)
        everything = small_results + large_results
        sound = all(r[0] for r in everything)
        monotone = all(r[1] for r in everything)
        agreement = sum(r[2] for r in large_results) / len(large_results)
        reported = sum(r[2] for r in small_results) / len(small_results)
        passed = sound and monotone and agreement >= 0.99
        return CheckResult("oracles", passed,
                           f"sound={sound} monotone={monotone} agreement={agreement:.3f} "
                           f"small_radius_agreement={reported:.3f}")


def _fmt(values) -> str:
    return "(" + ", ".join(f"{v:.6f}" for v in values) + ")"


def run_suite(tier: Tier = "quick", seed: int = 0) -> List[CheckResult]:
    """Run every acceptance check of a tier."""
    return AcceptanceSuite(tier, seed).run()
