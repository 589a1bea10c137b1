"""
Command-line front end: ``toral-recurrence <subcommand> [options]``.

Exit status: 0 on success, 2 when results are censored or partial, 1 on errors.
"""
import argparse
import logging
import math
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from config import settings
from config.experiment_config import ExperimentConfig
from config.map_profiles import BUILTIN_MAPS, load_map
from toral.dynamics import TorusPoint
from toral.exceptions import ToralError
from toral.lyapunov import estimate_exponents, exact_exponents, spectrum_header, spectrum_row, theorem_bounds
from toral.numtheory import covering_time, periodic_points
from toral.recurrence import (
    Ball,
    BowenBallSpec,
    ReturnTimeResult,
    Word,
    default_horizon,
    slope_series,
    tau_ball_exact,
    tau_ball_sample,
    tau_bowen_sample,
    tau_word,
)
from toral.reporting import write_csv
from toral.spectrum import EmpiricalMeasure, spectrum_curve
from toral.svg_plot import PlotSpec, ReferenceLine, Series, emit_svg, regression_series
from toral.verification import run_suite

EXIT_OK, EXIT_ERROR, EXIT_CENSORED = 0, 1, 2

logger = logging.getLogger("toral.cli")


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with one subparser per experiment.

    Returns:
        argparse.ArgumentParser: Parser for every subcommand.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", default="catmap",
                        help=f"map JSON file or built-in name ({', '.join(BUILTIN_MAPS)})")
    common.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    common.add_argument("--out", default=settings.DEFAULT_OUTPUT_DIR, help="output directory")
    common.add_argument("--plot", action="store_true", help="also write an SVG figure")
    common.add_argument("--method", choices=("exact", "sample"), default="exact")
    common.add_argument("--threads", type=int, default=None, help="worker threads (0 = one per CPU)")
    common.add_argument("--x", type=_floats, default=None, help="point, comma separated")
    common.add_argument("--kmax", type=int, default=None)
    common.add_argument("--samples", type=int, default=1000)

    parser = argparse.ArgumentParser(prog="toral-recurrence",
                                     description="Return times and recurrence spectra of linear toral maps")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    exponents = sub.add_parser("exponents", parents=[common], help="Lyapunov spectrum and recurrence bounds")
    exponents.add_argument("--iters", type=int, default=100_000)

    return_time = sub.add_parser("return-time", parents=[common], help="return time of one ball")
    return_time.add_argument("--r", type=float, default=1e-3)

    slope = sub.add_parser("slope", parents=[common], help="recurrence slope series")
    slope.add_argument("--rmin", type=float, default=1e-5)
    slope.add_argument("--rmax", type=float, default=1e-2)
    slope.add_argument("--grid", type=int, default=24)

    spectrum = sub.add_parser("spectrum", parents=[common], help="recurrence-dimension spectrum")
    spectrum.add_argument("--q", type=_floats, default=[-1.0, -0.75, -0.5, -0.25, 0.0])
    spectrum.add_argument("--N", dest="orbit_length", type=int, default=500_000, help="orbit length")
    spectrum.add_argument("--points", type=int, default=30)
    spectrum.add_argument("--rmin", type=float, default=1e-5)
    spectrum.add_argument("--rmax", type=float, default=5e-2)
    spectrum.add_argument("--grid", type=int, default=16)

    covering = sub.add_parser("covering", parents=[common], help="covering-time certificates")
    covering.add_argument("--radii", type=_floats, default=[0.02, 0.01, 0.005, 0.002])

    periodic = sub.add_parser("periodic", parents=[common], help="periodic point counts")
    periodic.add_argument("--pmax", type=int, default=10)

    word = sub.add_parser("word-return", parents=[common], help="cylinder return times of words")
    word.add_argument("--word", default=None, help="binary word; random words when omitted")
    word.add_argument("--length", type=int, default=128)
    word.add_argument("--count", type=int, default=10_000)
    word.add_argument("--two-sided", action="store_true")

    bowen = sub.add_parser("bowen", parents=[common], help="return time of a Bowen ball")
    bowen.add_argument("--m", type=int, default=0)
    bowen.add_argument("--n", type=int, default=0)
    bowen.add_argument("--eps", type=float, default=0.05)

    verify = sub.add_parser("verify", parents=[common], help="acceptance suite")
    tier = verify.add_mutually_exclusive_group()
    tier.add_argument("--quick", dest="tier", action="store_const", const="quick")
    tier.add_argument("--full", dest="tier", action="store_const", const="full")
    verify.set_defaults(tier="quick")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Translate parsed arguments into a validated ExperimentConfig."""
    spec = load_map(args.map)
    values = {
        "map": spec,
        "map_name": os.path.splitext(os.path.basename(args.map))[0],
        "seed": args.seed,
        "output_dir": args.out,
        "plot": args.plot,
        "method": args.method,
        "x": args.x,
        "k_max": args.kmax,
        "samples": args.samples,
    }
    optional = {"iters": "iters", "r": "r", "rmin": "r_min", "rmax": "r_max", "grid": "grid", "q": "q_list",
                "orbit_length": "orbit_length", "points": "sample_points", "radii": "radii", "pmax": "p_max",
                "word": "word", "length": "word_length", "count": "word_count", "two_sided": "two_sided",
                "m": "m", "n": "n", "eps": "eps", "tier": "tier"}
    for attribute, field_name in optional.items():
        if hasattr(args, attribute):
            values[field_name] = getattr(args, attribute)
    return ExperimentConfig(**values).validate_for(args.subcommand)


class ExperimentRunner:
    """
    Runs one subcommand from a validated configuration and writes its files.
    """

    def __init__(self, config: ExperimentConfig) -> None:
        self.config = config
        self.logger = logging.getLogger(self.__class__.__name__)

    # ----- helpers -----

    def path(self, subcommand: str, extension: str) -> str:
        return os.path.join(self.config.output_dir, f"{subcommand}.{extension}")

    def write(self, subcommand: str, header: Sequence[str], rows, metadata: Optional[Dict] = None) -> str:
        # output location is not part of the experiment
        config_json = self.config.model_dump_json(exclude={"output_dir"})
        return write_csv(self.path(subcommand, "csv"), header, rows, config_json, metadata)

    def plot(self, subcommand: str, plot: PlotSpec) -> None:
        if self.config.plot:
            emit_svg(plot, self.path(subcommand, "svg"))

    def point(self) -> TorusPoint:
        if self.config.x is not None:
            return TorusPoint(tuple(self.config.x))
        return TorusPoint(tuple(np.random.default_rng(self.config.seed).random(self.config.map.dimension)))

    def run(self, subcommand: str) -> int:
        handlers: Dict[str, Callable[[], int]] = {
            "exponents": self.exponents,
            "return-time": self.return_time,
            "slope": self.slope,
            "spectrum": self.spectrum,
            "covering": self.covering,
            "periodic": self.periodic,
            "word-return": self.word_return,
            "bowen": self.bowen,
            "verify": self.verify,
        }
        self.logger.info(f"Running {subcommand} on {self.config.map_name}")
        return handlers[subcommand]()

    # ----- subcommands -----

    def exponents(self) -> int:
        config = self.config
        exact = exact_exponents(config.map)
        estimated = estimate_exponents(config.map, self.point(), config.iters, config.seed)
        dimension = exact.dimension
        rows = [spectrum_row(config.map_name, exact), spectrum_row(f"{config.map_name}:estimated", estimated)]
        self.write("exponents", spectrum_header(dimension), rows, {"units": "nats/iter"})
        print(f"exponents {config.map_name}: exact {_fmt(exact.exponents)} estimated {_fmt(estimated.exponents)}")
        return EXIT_OK

    def _return_row(self, r: float, result: ReturnTimeResult) -> List[object]:
        witness = result.witness
        return [r, result.tau, result.cutoff, result.method.value, result.ambiguous, result.budget_exhausted,
                _fmt(witness.start_point.coords) if witness else None,
                _fmt(witness.image_point.coords) if witness else None]

    def return_time(self) -> int:
        config = self.config
        ball = Ball(self.point(), config.r)
        if config.method == "exact":
            result = tau_ball_exact(config.map, ball, config.k_max)
        else:
            result = tau_ball_sample(config.map, ball, config.k_max, config.samples, config.seed)
        self.write("return-time", ["r", "tau", "cutoff", "method", "ambiguous", "budget_exhausted",
                                   "witness_start", "witness_image"], [self._return_row(config.r, result)])
        print(f"return-time r={config.r}: tau={result.tau} (cutoff {result.cutoff}, {result.method.value})")
        return EXIT_OK if result.found else EXIT_CENSORED

    def slope(self) -> int:
        config = self.config
        series = slope_series(config.map, self.point(), config.r_min, config.r_max, config.grid,
                              config.method, config.k_max, config.seed, config.samples)
        rows = [[p.r, p.tau, p.ratio, p.method, p.censored] for p in series.points]
        summary = series.summary
        self.write("slope", ["r", "tau", "ratio", "method", "censored"], rows,
                   {"liminf_est": summary.liminf_est, "limsup_est": summary.limsup_est, "slope": summary.slope,
                    "intercept": summary.intercept, "r2": summary.r2, "censored": summary.censored,
                    "warnings": list(series.warnings)})

        usable = [p for p in series.points if not p.censored]
        references = []
        try:
            bounds = theorem_bounds(exact_exponents(config.map))
            references.append(ReferenceLine("lower bound", bounds.lower))
            if bounds.upper is not None and not math.isclose(bounds.upper, bounds.lower):
                references.append(ReferenceLine("upper bound", bounds.upper))
        except ToralError:
            pass
        plot_series = [Series("tau / -log r", [(-math.log(p.r), p.ratio) for p in usable])]
        self.plot("slope", PlotSpec(plot_series, references, f"Recurrence slope, {config.map_name}",
                                    "-log r", "tau / -log r"))
        print(f"slope {config.map_name}: regression slope {summary.slope} (R2 {summary.r2}), "
              f"liminf {summary.liminf_est}, limsup {summary.limsup_est}")
        return EXIT_CENSORED if summary.censored else EXIT_OK

    def spectrum(self) -> int:
        config = self.config
        measure = EmpiricalMeasure.from_map(config.map, config.orbit_length, config.seed, cell_size=config.r_min)
        grid = list(np.geomspace(config.r_max, config.r_min, config.grid))
        curve = spectrum_curve(config.map, measure, config.q_list, config.sample_points, grid, config.k_max,
                               config.seed)
        rows = [[q, alpha, d.r2, d.n_points] for q, alpha, d in zip(curve.q_values, curve.alpha_values,
                                                                   curve.diagnostics)]
        self.write("spectrum", ["q", "alpha", "r2", "n_points"], rows, curve.metadata)
        points = list(zip(curve.q_values, curve.alpha_values))
        plot_series = [Series("alpha(q)", points)] if points else []
        if len(points) >= 2:
            slope, intercept, _ = curve.affine_fit()
            plot_series.append(regression_series("affine fit", curve.q_values, slope, intercept))
        if plot_series:
            self.plot("spectrum", PlotSpec(plot_series, [], f"Recurrence dimension spectrum, {config.map_name}",
                                           "q", "alpha(q)"))
        print(f"spectrum {config.map_name}: " + ", ".join(f"alpha({q:g})={a:.4f}" for q, a in points))
        partial = len(curve.q_values) < len(config.q_list) or curve.metadata["censored_radii"] > 0
        return EXIT_CENSORED if partial else EXIT_OK

    def covering(self) -> int:
        certificates = [covering_time(r) for r in self.config.radii]
        rows = [[c.r, c.n_formula, c.n_observed, c.density_gap] for c in certificates]
        self.write("covering", ["r", "n_formula", "n_observed", "density_gap"], rows)
        self.plot("covering", PlotSpec(
            [Series("n_formula", [(-math.log(c.r), c.n_formula) for c in certificates]),
             Series("n_observed", [(-math.log(c.r), c.n_observed) for c in certificates
                                   if c.n_observed is not None])],
            [], "Covering time", "-log r", "n"))
        print("covering: " + ", ".join(f"r={c.r:g} n_formula={c.n_formula} n_observed={c.n_observed}"
                                       for c in certificates))
        return EXIT_OK if all(c.validates for c in certificates) else EXIT_CENSORED

    def periodic(self) -> int:
        config = self.config
        kind = "auto" if config.map.kind == "toral_auto_2d" else "endo"
        counts = periodic_points(config.map.matrix, config.p_max, kind)
        self.write("periodic", ["p", "count"], [[p, count] for p, count in enumerate(counts, start=1)])
        self.plot("periodic", PlotSpec([Series("log count", [(p, math.log(c)) for p, c in
                                                            enumerate(counts, start=1) if c > 0])],
                                       [], f"Periodic points, {config.map_name}", "p", "log |det(A^p - I)|"))
        print(f"periodic {config.map_name}: {', '.join(str(c) for c in counts)}")
        return EXIT_OK

    def word_return(self) -> int:
        config = self.config
        if config.word is not None:
            words = [Word.from_string(config.word)]
        else:
            rng = np.random.default_rng(config.seed)
            words = [Word(tuple(int(s) for s in rng.integers(0, 2, config.word_length)))
                     for _ in range(config.word_count)]
        taus = [tau_word(w, config.two_sided) for w in words]
        rows = [[i, len(w), t, t / len(w)] for i, (w, t) in enumerate(zip(words, taus))]
        self.write("word-return", ["index", "length", "tau", "ratio"], rows)
        ratios = sorted(t / len(w) for w, t in zip(words, taus))
        self.plot("word-return", PlotSpec([Series("sorted tau / n", list(enumerate(ratios)))], [],
                                          "Cylinder return ratios", "rank", "tau / n"))
        print(f"word-return: {len(words)} words, mean tau/n {float(np.mean(ratios)):.4f}, "
              f"min {ratios[0]:.4f}")
        return EXIT_OK

    def bowen(self) -> int:
        config = self.config
        spec = BowenBallSpec(self.point(), config.m, config.n, config.eps)
        k_max = config.k_max or default_horizon(config.eps, exact_exponents(config.map).lambda_u_min) + config.m + config.n
        result = tau_bowen_sample(config.map, spec, k_max, config.samples, config.seed)
        self.write("bowen", ["m", "n", "eps", "tau", "cutoff", "method"],
                   [[config.m, config.n, config.eps, result.tau, result.cutoff, result.method.value]])
        print(f"bowen m={config.m} n={config.n} eps={config.eps}: tau={result.tau} (cutoff {result.cutoff})")
        return EXIT_OK if result.found else EXIT_CENSORED

    def verify(self) -> int:
        results = run_suite(self.config.tier, self.config.seed)
        self.write("verify", ["check", "passed", "detail"], [[r.name, r.passed, r.detail] for r in results])
        width = max(len(r.name) for r in results)
        for result in results:
            print(f"{result.name:<{width}}  {'PASS' if result.passed else 'FAIL'}  {result.detail}")
        passed = sum(r.passed for r in results)
        print(f"verify --{self.config.tier}: {passed}/{len(results)} checks passed")
        return EXIT_OK if passed == len(results) else EXIT_ERROR


def _fmt(values) -> str:
    return ";".join(format(float(v), ".17g") for v in values)


def configure_logging() -> None:
    logging.basicConfig(level=settings.LOG_LEVEL, format=settings.LOG_FORMAT, datefmt=settings.LOG_DATE_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``toral-recurrence`` console script.

    Args:
        argv (Sequence[str], optional): Arguments, defaults to sys.argv[1:].

    Returns:
        int: Exit status.
    """
    configure_logging()
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        settings.RECUR_THREADS = args.threads
    try:
        config = config_from_args(args)
        return ExperimentRunner(config).run(args.subcommand)
    except (ToralError, ValidationError, ValueError, OSError) as error:
        logger.error(f"{args.subcommand} failed: {error}")
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
