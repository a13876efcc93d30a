"""
Data models for polymerdyn parameters, reports and results.
"""

import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

RHO = 1.0 / 50.0


class DegreeSequence(BaseModel):
    """Degree sequence x with sparsity parameter d."""

    degrees: List[int]
    d: float = Field(default=math.inf, gt=0)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def degree_sum(self) -> int:
        return sum(self.degrees)

    @property
    def m(self) -> float:
        return self.degree_sum / 2

    @property
    def rho(self) -> float:
        return RHO


class DegreeSequenceReport(BaseModel):
    """Membership of a degree sequence in D_{n,d}, condition by condition."""

    degrees: List[int]
    d: float
    n: int
    rho: float = RHO
    max_degree_bound: float
    square_sum: int
    min_degree_ok: bool
    max_degree_ok: bool
    sparsity_ok: bool
    even_sum_ok: bool

    @property
    def in_family(self) -> bool:
        return self.min_degree_ok and self.max_degree_ok and self.sparsity_ok

    @property
    def failures(self) -> List[str]:
        flags = {
            "min_degree": self.min_degree_ok,
            "max_degree": self.max_degree_ok,
            "sparsity": self.sparsity_ok,
            "even_sum": self.even_sum_ok,
        }
        return [name for name, ok in flags.items() if not ok]


class AuditWitness(BaseModel):
    """A vertex set with the quantities an expansion check measured on it."""

    check: str
    vertices: List[int]
    size: int
    total_degree: int
    boundary_edges: int
    tree_excess: int
    ratio: float


class AuditCheck(BaseModel):
    """Outcome of one expansion property over every audited set."""

    name: str
    passed: bool = True
    applicable: int = 0
    violations: int = 0
    worst: Optional[AuditWitness] = None
    witnesses: List[AuditWitness] = Field(default_factory=list)


class AuditReport(BaseModel):
    """Empirical audit of the small-set, tree-excess and total-degree properties."""

    n: int
    alpha: float
    small_size_cap: int
    degree_cap: int
    sets_checked: int
    checks: Dict[str, AuditCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())


class PolymerWitness(BaseModel):
    """A polymer together with the quantities a condition check compared."""

    vertices: List[int]
    spins: List[int]
    total_degree: int
    log_weight: float
    log_bound: float


class SamplingConditionReport(BaseModel):
    """Weight decay w(γ) <= exp(-τ deg(V_γ)) over every enumerated polymer."""

    tau: float
    q: int
    ell_max: int
    threshold: float
    weak_threshold: float
    threshold_met: bool
    holds: bool
    polymers_checked: int
    violations: List[PolymerWitness] = Field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return self.holds and self.threshold_met


class MixingConditionReport(BaseModel):
    """Edge-weighted incompatibility sums against θ |E_γ|."""

    theta: float
    polymers_checked: int
    worst_ratio: float
    worst: Optional[PolymerWitness] = None
    holds: bool


class PottsParams(BaseModel):
    """
    Ferromagnetic Potts parameters.

    ``tau`` and ``r_geo`` are derived: τ = αβ and r_geo = τ - log(12e²(q-1)).
    """

    model_config = ConfigDict(frozen=True)

    q: int = Field(ge=2)
    beta: float = Field(gt=0)
    alpha: float = Field(default=1.0, gt=0)
    colour: int = Field(default=0, ge=0)
    force_out_of_regime: bool = False

    @model_validator(mode="after")
    def _colour_in_range(self) -> Self:
        if self.colour >= self.q:
            raise ValueError(f"colour {self.colour} is not in [0, {self.q})")
        return self

    @property
    def tau(self) -> float:
        return self.alpha * self.beta

    @property
    def r_geo(self) -> float:
        return self.tau - math.log(12 * math.e**2 * (self.q - 1))

    @property
    def beta_threshold(self) -> float:
        return 3.0 / self.alpha * math.log(8 * math.e**3 * (self.q - 1))

    @property
    def truncation_rate(self) -> float:
        """r_geo when positive; τ/2 for runs forced outside the regime."""
        return self.r_geo if self.r_geo > 0 else self.tau / 2

    def regime_issues(self) -> List[str]:
        issues = []
        if self.q < 3:
            issues.append(f"q={self.q} is below 3")
        if self.beta < self.beta_threshold:
            issues.append(f"beta={self.beta:.6g} is below (3/alpha)log(8e^3(q-1))={self.beta_threshold:.6g}")
        if self.r_geo <= 0:
            issues.append(f"r_geo={self.r_geo:.6g} is not positive")
        return issues

    @property
    def in_guaranteed_regime(self) -> bool:
        return not self.regime_issues()

    def with_beta(self, beta: float) -> Self:
        return self.model_copy(update={"beta": float(beta)})

    def with_colour(self, colour: int) -> Self:
        return self.model_copy(update={"colour": int(colour)})


class DynamicsConfig(BaseModel):
    """Constants and mode of the polymer-dynamics sampler."""

    theta: float = Field(default=1.0 / math.e, gt=0, lt=1)
    c1: int = Field(default=64, ge=1)
    c2: int = Field(default=4, ge=1)
    mode: Literal["las_vegas", "strict_budget"] = "las_vegas"
    seed: Optional[int] = None
    truncation_rate: Optional[float] = Field(default=None, gt=0)


class CountingConfig(BaseModel):
    """Knobs of the annealing estimator."""

    sample_constant: float = Field(default=64.0, gt=0)
    samples_per_ratio: Optional[int] = Field(default=None, ge=1)
    median_of_three: bool = False
    threads: int = Field(default=1, ge=1)
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig)


class AnnealingSchedule(BaseModel):
    """Decreasing inverse-temperature grid from ``beta_start`` to ``beta_target``."""

    beta_target: float
    beta_start: float
    step: float
    betas: List[float]
    samples_per_ratio: int

    @property
    def K(self) -> int:
        return len(self.betas) - 1


class ZEstimate(BaseModel):
    """A log partition function estimate with the diagnostics to reproduce it."""

    log_value: float
    log_zhat: Optional[float] = None
    eps: float
    K: int = 0
    samples_per_ratio: int = 0
    beta_start: Optional[float] = None
    ratio_means: List[float] = Field(default_factory=list)
    aborts: List[str] = Field(default_factory=list)
    exact: bool = False
    components: int = 1
    seed: Optional[int] = None


class PottsSample(BaseModel):
    """One colouring drawn by the sampler, with its run statistics."""

    colouring: List[int]
    dominant_colour: int
    mono_edges: int
    updates: int = 0
    work_units: int = 0
    exact: bool = False
    seed: Optional[int] = None


class RunManifest(BaseModel):
    """Everything needed to reproduce a command-line run."""

    schema_version: int = 1
    command: str
    parameters: Dict[str, Any]
    seed: Optional[int] = None
    versions: Dict[str, str]
    wall_time: Optional[float] = None
    outputs_digest: str
    tainted: bool = False
