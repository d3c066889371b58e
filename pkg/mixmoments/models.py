"""
Pydantic records exchanged by the library and the command line.

Numeric payloads with structure (moment cubes, datasets) live in plain classes in
their own modules; everything that is written to or read from JSON is defined here.
"""
from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

WEIGHT_SUM_TOL = 1e-12


# ------------------------------------------------------------------
# Mixture parameters
# ------------------------------------------------------------------
class GaussianComponent(BaseModel):
    """One Gaussian: mean vector and covariance matrix (a bare number in 1-D)."""

    model_config = ConfigDict(frozen=True)

    mean: List[float] = Field(..., min_length=1, description="Mean vector of length n")
    covariance: List[List[float]] = Field(..., description="Symmetric PSD n x n covariance")

    @field_validator("mean", mode="before")
    @classmethod
    def _scalar_mean(cls, value: Any) -> Any:
        if isinstance(value, (int, float)):
            return [float(value)]
        return value

    @field_validator("covariance", mode="before")
    @classmethod
    def _scalar_variance(cls, value: Any) -> Any:
        if isinstance(value, (int, float)):
            return [[float(value)]]
        return value

    @model_validator(mode="after")
    def _check_covariance(self) -> "GaussianComponent":
        n = len(self.mean)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (n, n):
            raise ValueError(f"covariance must be {n}x{n}, got shape {cov.shape}")
        if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(self.mean))):
            raise ValueError("mean and covariance must be finite")
        trace = abs(float(np.trace(cov)))
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(trace, 1.0)):
            raise ValueError("covariance must be symmetric")
        smallest = float(np.linalg.eigvalsh(cov).min())
        if smallest < -1e-12 * trace or (trace == 0.0 and smallest < 0.0):
            raise ValueError(f"covariance is not positive semidefinite (eigenvalue {smallest:.3g})")
        return self

    @classmethod
    def univariate(cls, mean: float, variance: float) -> "GaussianComponent":
        return cls(mean=[float(mean)], covariance=[[float(variance)]])

    @property
    def n(self) -> int:
        return len(self.mean)

    @property
    def variance(self) -> float:
        if self.n != 1:
            raise AttributeError("variance is only defined for univariate components")
        return self.covariance[0][0]

    def mean_array(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=float)

    def covariance_array(self) -> np.ndarray:
        return np.asarray(self.covariance, dtype=float)


class MixtureModel(BaseModel):
    """Finite Gaussian mixture; weights and components are aligned lists."""

    model_config = ConfigDict(frozen=True)

    weights: List[float] = Field(..., min_length=1)
    components: List[GaussianComponent] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_mixture(self) -> "MixtureModel":
        if len(self.weights) != len(self.components):
            raise ValueError(
                f"{len(self.weights)} weights given for {len(self.components)} components"
            )
        if any(not math.isfinite(w) or w < 0.0 for w in self.weights):
            raise ValueError("weights must be finite and non-negative")
        if abs(math.fsum(self.weights) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {math.fsum(self.weights)!r}")
        dims = {c.n for c in self.components}
        if len(dims) != 1:
            raise ValueError(f"components disagree in dimension: {sorted(dims)}")
        return self

    @classmethod
    def univariate(
        cls, lam: float, mu: float, nu: float, sigma2: float, tau2: float
    ) -> "MixtureModel":
        """Two-component 1-D mixture lam*N(mu, sigma2) + (1-lam)*N(nu, tau2)."""
        return cls(
            weights=[float(lam), 1.0 - float(lam)],
            components=[
                GaussianComponent.univariate(mu, sigma2),
                GaussianComponent.univariate(nu, tau2),
            ],
        )

    @classmethod
    def single(cls, mean: float, variance: float) -> "MixtureModel":
        return cls(weights=[1.0], components=[GaussianComponent.univariate(mean, variance)])

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def k(self) -> int:
        return len(self.components)

    def univariate_parameters(self) -> Tuple[float, float, float, float, float]:
        """(lambda, mu, nu, sigma2, tau2) of a 1-D mixture with at most two components."""
        if self.n != 1 or self.k > 2:
            raise ValueError("univariate_parameters needs a 1-D mixture with k <= 2")
        first = self.components[0]
        if self.k == 1:
            return 1.0, first.mean[0], first.mean[0], first.variance, first.variance
        second = self.components[1]
        return self.weights[0], first.mean[0], second.mean[0], first.variance, second.variance


# ------------------------------------------------------------------
# Vector documents
# ------------------------------------------------------------------
class VectorDocument(BaseModel):
    """Wire form of a moment or cumulant vector: values keyed by "i1,...,in"."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Number of variables")
    d: int = Field(..., ge=0, description="Truncation order")
    values: Dict[str, float] = Field(..., description="Multi-index key to value")


# ------------------------------------------------------------------
# Method of moments
# ------------------------------------------------------------------
class RejectReason(str, Enum):
    P_POSITIVE = "p_positive"
    S_NONREAL = "s_nonreal"
    LAMBDA_OUT_OF_RANGE = "lambda_out_of_range"
    VARIANCE_NEGATIVE = "variance_negative"
    DEGENERATE_DENOMINATOR = "degenerate_denominator"


class SelectionRule(str, Enum):
    M6_GAP = "m6_gap"
    LIKELIHOOD = "likelihood"
    SINGLE_GAUSSIAN_FALLBACK = "single_gaussian_fallback"


CandidateBranch = Literal["pearson", "equal_means", "single_gaussian"]


class PearsonCandidate(BaseModel):
    """One real root branch of the two-component moment solver."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    branch: CandidateBranch = "pearson"
    p: float = Field(..., description="Product of the normalized means")
    s: Optional[float] = Field(None, description="Sum of the normalized means")
    R1: Optional[float] = None
    R2: Optional[float] = None
    lam: Optional[float] = Field(None, alias="lambda")
    mu: Optional[float] = None
    nu: Optional[float] = None
    sigma2: Optional[float] = None
    tau2: Optional[float] = None
    valid: bool = False
    reject_reason: Optional[RejectReason] = None
    m6_model: Optional[float] = None
    m6_gap: Optional[float] = None
    log_likelihood: Optional[float] = None

    @model_validator(mode="after")
    def _check_validity(self) -> "PearsonCandidate":
        if self.valid:
            if self.reject_reason is not None:
                raise ValueError("a valid candidate cannot carry a reject reason")
            if None in (self.lam, self.mu, self.nu, self.sigma2, self.tau2):
                raise ValueError("a valid candidate needs all five parameters")
        elif self.reject_reason is None:
            raise ValueError("an invalid candidate needs a reject reason")
        return self

    def to_mixture(self) -> MixtureModel:
        if not self.valid:
            raise ValueError(f"candidate was rejected: {self.reject_reason}")
        if self.branch == "single_gaussian":
            return MixtureModel.single(self.mu, self.sigma2)
        return MixtureModel.univariate(self.lam, self.mu, self.nu, self.sigma2, self.tau2)


class FitReport(BaseModel):
    """Everything a single method-of-moments fit produced."""

    model_config = ConfigDict(frozen=True)

    input_moments: VectorDocument
    cumulants: VectorDocument
    candidates: List[PearsonCandidate] = Field(default_factory=list)
    selected: Optional[int] = None
    selection_rule: SelectionRule = SelectionRule.M6_GAP
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_selection(self) -> "FitReport":
        if self.selected is not None:
            if not 0 <= self.selected < len(self.candidates):
                raise ValueError(f"selected index {self.selected} out of range")
            if not self.candidates[self.selected].valid:
                raise ValueError("the selected candidate must be valid")
        return self

    @property
    def selected_candidate(self) -> Optional[PearsonCandidate]:
        return None if self.selected is None else self.candidates[self.selected]

    @property
    def model(self) -> Optional[MixtureModel]:
        chosen = self.selected_candidate
        return None if chosen is None else chosen.to_mixture()

    @property
    def valid_candidates(self) -> List[PearsonCandidate]:
        return [c for c in self.candidates if c.valid]


# ------------------------------------------------------------------
# Varieties
# ------------------------------------------------------------------
class MembershipVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    test: str = Field(..., description="Name of the membership test")
    residual: float = Field(..., ge=0, description="Scale-normalized residual")
    threshold: float = Field(..., gt=0)
    member: bool
    detail: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_member(self) -> "MembershipVerdict":
        if self.member != (self.residual <= self.threshold):
            raise ValueError("member must equal residual <= threshold")
        return self

    @classmethod
    def from_residual(
        cls, test: str, residual: float, threshold: float, **detail: Any
    ) -> "MembershipVerdict":
        residual = float(residual)
        return cls(
            test=test,
            residual=residual,
            threshold=threshold,
            member=residual <= threshold,
            detail=detail,
        )


# ------------------------------------------------------------------
# EM
# ------------------------------------------------------------------
class EMOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(100000, ge=1)
    loglik_tol: float = Field(1e-10, gt=0)
    variance_floor: float = Field(1e-12, ge=0)
    record_trace: bool = False


class EMResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: MixtureModel
    loglik: float
    iters: int = Field(..., ge=0)
    converged: bool
    trace: Optional[List[float]] = None
    hit_variance_floor: bool = False


# ------------------------------------------------------------------
# Command line
# ------------------------------------------------------------------
class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class CommandConfig(BaseModel):
    """Resolved invocation of one subcommand."""

    subcommand: Literal["fit", "moments", "cumulants", "verify", "density", "simulate"]
    input_path: Optional[Path] = None
    output_path: Optional[Path] = None
    format: OutputFormat = OutputFormat.JSON
    tolerance: Optional[float] = Field(None, gt=0)
    seed: Optional[int] = None
    selection: Optional[SelectionRule] = None
    options: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("input_path")
    @classmethod
    def _readable(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"input path does not exist: {value}")
        return value

    @field_validator("output_path")
    @classmethod
    def _writable(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and value.suffix and not value.parent.exists():
            raise ValueError(f"output directory does not exist: {value.parent}")
        return value


class FitOutput(BaseModel):
    """What `fit` writes for one input."""

    source: str
    mom: Optional[FitReport] = None
    em: Optional[EMResult] = None
    mom_log_likelihood: Optional[float] = None
    exit_code: int = 0
    error: Optional[str] = None
