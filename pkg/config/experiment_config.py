"""
Validated experiment configuration shared by every subcommand.
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from config import settings
from config.map_profiles import DEFAULT_MAP
from toral.dynamics import MapSpec
from toral.exceptions import ConfigError

SUBCOMMANDS = ("exponents", "return-time", "slope", "spectrum", "covering", "periodic",
               "word-return", "bowen", "verify")


class ExperimentConfig(BaseModel):
    """
    Everything one run needs. Numeric parameters carry defaults so each subcommand
    reads only the ones it feeds.

    Attributes:
        map (MapSpec): System under study.
        map_name (str): Label written to result rows.
        seed (int): Seed for every random choice.
        output_dir (str): Directory receiving CSV and SVG files.
        plot (bool): Also emit an SVG figure.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    map: MapSpec = DEFAULT_MAP
    map_name: str = "catmap"
    seed: int = settings.DEFAULT_SEED
    output_dir: str = settings.DEFAULT_OUTPUT_DIR
    plot: bool = False

    x: Optional[List[float]] = None
    iters: int = 100_000
    r: float = 1e-3
    r_min: float = 1e-5
    r_max: float = 1e-2
    grid: int = 24
    method: Literal["exact", "sample"] = "exact"
    k_max: Optional[int] = None
    samples: int = 1000

    q_list: List[float] = Field(default_factory=lambda: [-1.0, -0.75, -0.5, -0.25, 0.0])
    orbit_length: int = 500_000
    sample_points: int = 30

    radii: List[float] = Field(default_factory=lambda: [0.02, 0.01, 0.005, 0.002])
    p_max: int = 10

    word: Optional[str] = None
    word_length: int = 128
    word_count: int = 10_000
    two_sided: bool = False

    m: int = 0
    n: int = 0
    eps: float = 0.05

    tier: Literal["quick", "full"] = "quick"

    def _require(self, condition: bool, message: str) -> None:
        if not condition:
            raise ConfigError(message)

    def validate_for(self, subcommand: str) -> "ExperimentConfig":
        """
        Check every parameter the subcommand feeds against its operation's precondition.

        Args:
            subcommand (str): One of SUBCOMMANDS.

        Returns:
            ExperimentConfig: self, for chaining.

        Raises:
            ConfigError: Naming the first violated precondition.
        """
        self._require(subcommand in SUBCOMMANDS, f"unknown subcommand {subcommand!r}")
        if self.x is not None:
            self._require(len(self.x) == self.map.dimension,
                          f"x has {len(self.x)} coordinates, {self.map.kind} acts on T^{self.map.dimension}")
        if self.k_max is not None:
            self._require(self.k_max >= 1, "k_max must be >= 1")
        self._require(self.samples >= 1, "samples must be >= 1")

        if subcommand == "exponents":
            self._require(self.iters >= 1000, "iters must be >= 1000")
        elif subcommand == "return-time":
            self._require(0.0 < self.r < 0.25, "r must lie in (0, 1/4)")
        elif subcommand == "slope":
            self._require(0.0 < self.r_min < self.r_max < 0.25, "radii must satisfy 0 < rmin < rmax < 1/4")
            self._require(self.grid >= 4, "grid must be >= 4")
        elif subcommand == "spectrum":
            self._require(0.0 < self.r_min < self.r_max < 0.25, "radii must satisfy 0 < rmin < rmax < 1/4")
            self._require(self.grid >= 4, "grid must be >= 4")
            self._require(self.orbit_length >= 1000, "orbit length N must be >= 1000")
            self._require(self.sample_points >= 20, "sample_points must be >= 20")
            self._require(len(self.q_list) >= 1, "q_list must not be empty")
            self._require(self.map.kind != "product_4d", "spectrum needs a map of dimension <= 2")
        elif subcommand == "covering":
            self._require(all(0.0 < r < 0.05 for r in self.radii), "covering radii must lie in (0, 0.05)")
        elif subcommand == "periodic":
            self._require(1 <= self.p_max <= 64, "pmax must lie in [1, 64]")
            self._require(self.map.kind in ("toral_auto_2d", "toral_endo_2d"), "periodic needs a 2x2 map")
        elif subcommand == "word-return":
            if self.word is not None:
                self._require(len(self.word) >= 1 and set(self.word) <= {"0", "1"},
                              "word must be a non-empty binary string")
            self._require(self.word_length >= 1 and self.word_count >= 1, "word length and count must be >= 1")
        elif subcommand == "bowen":
            self._require(self.m >= 0 and self.n >= 0, "Bowen depths m, n must be >= 0")
            self._require(0.0 < self.eps < 0.25, "eps must lie in (0, 1/4)")
            self._require(self.m == 0 or self.map.kind in ("toral_auto_2d", "product_4d"),
                          "m > 0 needs an invertible map")
        return self
