"""Pydantic models for serialized records (reports, bound sets, experiment configs)."""
import math
from enum import Enum
from typing import ClassVar, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

# Largest t accepted for the "t -> infinity" experiments
T_CAP = 1e7


class ESigmaInvSource(str, Enum):
    closed_form_upper = "closed_form_upper"
    closed_form_lower = "closed_form_lower"
    monte_carlo = "monte_carlo"


# BoundSet models
class BoundSet(BaseModel):
    """Every closed-form bound for one (m, n, k, p); absent fields failed a precondition."""
    m: int
    n: int
    k: int
    p: int
    hmt_upper: Optional[float] = None
    sharp_upper: Optional[float] = None
    sharp_lower: Optional[float] = None
    proxy: Optional[float] = None
    asymptotic_upper: Optional[float] = None
    asymptotic_lower: Optional[float] = None
    mixed_norm_flat: Optional[float] = None
    e_sigma_inv: Optional[float] = None
    e_sigma_inv_ci: float = 0.0
    # values fed to sharp_lower and sharp_upper; the bracket ends under a closed-form source
    e_sigma_inv_lower: Optional[float] = None
    e_sigma_inv_upper: Optional[float] = None
    e_sigma_inv_source: ESigmaInvSource = ESigmaInvSource.monte_carlo
    trials: int = 0
    seed: int = 0
    # q -> proxy^(1/(2q+1))
    power_proxy: Dict[int, float] = Field(default_factory=dict)
    ci_convention: str = "3 standard errors"

    CSV_HEADER: ClassVar[Tuple[str, ...]] = (
        "m", "n", "k", "p", "hmt", "sharp_lo", "sharp_hi", "proxy", "asym_lo", "asym_hi",
        "e_sigma_inv", "ci", "source", "trials", "seed",
    )

    def csv_row(self) -> list:
        return [
            self.m, self.n, self.k, self.p, self.hmt_upper, self.sharp_lower, self.sharp_upper,
            self.proxy, self.asymptotic_lower, self.asymptotic_upper, self.e_sigma_inv,
            self.e_sigma_inv_ci, self.e_sigma_inv_source.value, self.trials, self.seed,
        ]


# Report models
class ResidualReport(BaseModel):
    residual_spectral: float
    sigma_k_plus_1: Optional[float]
    ratio: Optional[float]
    # "finite", "infinite" (sigma_{k+1} = 0 < residual) or "one_by_convention" (both 0)
    ratio_convention: str
    frob_tail: Optional[float]
    mixed_norm_bound: Optional[float] = None
    bounds: Optional[BoundSet] = None
    config: Dict[str, int]
    seed: int
    algorithm: str
    norm_converged: bool = True
    notes: List[str] = Field(default_factory=list)

    @field_validator("ratio")
    @classmethod
    def _finite_or_inf(cls, value):
        if value is not None and math.isnan(value):
            raise ValueError("ratio cannot be NaN")
        return value


# Experiment models
class RankRule(BaseModel):
    """k or p as a fixed integer or as a fraction of n."""
    kind: Literal["fixed", "ratio"]
    value: float = Field(gt=0)

    def resolve(self, n: int) -> int:
        if self.kind == "fixed":
            return int(self.value)
        return max(1, int(round(self.value * n)))


class ExperimentConfig(BaseModel):
    name: Literal["fig1_fixed_ratio", "fig1_fixed_kp", "fig2_variability", "lemma_suite", "bounds_table"]
    n_grid: List[int] = Field(default_factory=lambda: [1000])
    k_rule: RankRule = RankRule(kind="fixed", value=10)
    p_rule: RankRule = RankRule(kind="fixed", value=10)
    trials_per_point: int = Field(default=20, ge=1)
    seed: int = Field(default=0, ge=0)
    t: float = Field(default=1e6, ge=1.0, le=T_CAP)
    output_dir: str = "results"
    bound_trials: int = Field(default=1000, ge=100)
    e_sigma_inv_source: ESigmaInvSource = ESigmaInvSource.monte_carlo
    histogram_bins: int = Field(default=50, ge=1)
    power_q: List[int] = Field(default_factory=lambda: [3])
    method: Literal["auto", "reduced", "bartlett"] = "auto"
    self_test_negate: bool = False
    # lemma_suite only: subset of checks to run (all when omitted)
    checks: Optional[List[str]] = None
    # config table name; prefixes output file names
    label: Optional[str] = None

    @field_validator("n_grid")
    @classmethod
    def _ascending(cls, grid):
        if not grid:
            raise ValueError("n_grid must be non-empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly ascending")
        if grid[0] < 2:
            raise ValueError("n_grid entries must be >= 2")
        return grid

    @model_validator(mode="after")
    def _single_point_fig2(self):
        if self.name == "fig2_variability" and len(self.n_grid) != 1:
            raise ValueError("fig2_variability takes a single n")
        return self

    @property
    def run_label(self) -> str:
        return self.label or self.name

    def ranks(self, n: int) -> tuple:
        return self.k_rule.resolve(n), self.p_rule.resolve(n)


class ExperimentRow(BaseModel):
    n: int
    k: int
    p: int
    draw_index: int
    seed: int
    value: float = Field(ge=0)
    hmt: Optional[float] = None
    sharp_upper: Optional[float] = None
    sharp_lower: Optional[float] = None
    proxy: Optional[float] = None

    CSV_HEADER: ClassVar[Tuple[str, ...]] = ("n", "k", "p", "draw_index", "seed", "value", "hmt", "sharp_upper", "sharp_lower", "proxy")

    def csv_row(self) -> list:
        return [self.n, self.k, self.p, self.draw_index, self.seed, self.value,
                self.hmt, self.sharp_upper, self.sharp_lower, self.proxy]


# Lemma suite models
class LemmaResult(BaseModel):
    name: str
    instances: int
    failures: int
    # Smallest margin by which the property held (negative = violated)
    worst_slack: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


class LemmaSuiteReport(BaseModel):
    seed: int
    negated: bool = False
    results: List[LemmaResult]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failed_names(self) -> List[str]:
        return [result.name for result in self.results if not result.passed]
