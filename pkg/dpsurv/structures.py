"""
This module contains classes from the domain layer.

Datasets, fits and simulation records are immutable value objects; numpy
arrays stored on them are flagged read-only so that they can be shared
between workers without copying or locking.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd


# custom types / aliases
Term = str


def _frozen(array, dtype=float) -> np.ndarray:
    result = np.array(array, dtype=dtype)
    result.setflags(write=False)
    return result


class CovariateKind(str, enum.Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class CovariateSpec:
    """A covariate with its value domain.

    Continuous covariates carry clipping bounds derived from observed data.
    Binary covariates take values in {0, 1}; categorical ones take level
    codes 1..k, one per label. A binary covariate may carry two labels, in
    which case its design column is named after the second one (`sexM`).
    """

    name: str
    kind: CovariateKind
    lower: float = math.nan
    upper: float = math.nan
    category_labels: Tuple[str, ...] = ()

    @property
    def range(self) -> float:
        return self.upper - self.lower

    @property
    def k(self) -> int:
        """Number of levels of a discrete covariate."""

        if self.kind is CovariateKind.BINARY:
            return 2

        return len(self.category_labels)

    @property
    def terms(self) -> Tuple[Term, ...]:
        """Names of the design columns this covariate expands to."""

        if self.kind is CovariateKind.CATEGORICAL:
            return tuple(f"{self.name}{label}" for label in self.category_labels[1:])

        if self.kind is CovariateKind.BINARY and self.category_labels:
            return (f"{self.name}{self.category_labels[1]}",)

        return (self.name,)

    def with_bounds(self, lower: float, upper: float) -> "CovariateSpec":
        return replace(self, lower=float(lower), upper=float(upper))


@dataclass(frozen=True, eq=False)
class SurvivalDataset:
    """Right-censored survival data.

    `X` holds one column per covariate: reals for continuous covariates,
    0/1 for binary ones and level codes 1..k for categorical ones. Time
    bounds are the observed min/max of `T`, used to clamp perturbed times.
    """

    name: str
    X: np.ndarray
    T: np.ndarray
    delta: np.ndarray
    specs: Tuple[CovariateSpec, ...]
    time_lower: float = math.nan
    time_upper: float = math.nan

    def __post_init__(self):
        object.__setattr__(self, "X", _frozen(self.X).reshape(len(self.T), -1))
        object.__setattr__(self, "T", _frozen(self.T))
        object.__setattr__(self, "delta", _frozen(self.delta, dtype=np.int64))
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def n(self) -> int:
        return len(self.T)

    @property
    def q(self) -> int:
        return len(self.specs)

    @property
    def events(self) -> int:
        return int(self.delta.sum())

    @property
    def event_rate(self) -> float:
        return self.events / self.n

    @property
    def covariate_names(self) -> Tuple[str, ...]:
        return tuple(spec.name for spec in self.specs)

    @property
    def terms(self) -> Tuple[Term, ...]:
        return tuple(term for spec in self.specs for term in spec.terms)

    @property
    def info(self) -> str:
        """Basic statistics about the dataset."""

        return ", ".join(
            (
                f"{self.name}",
                f"n={self.n}",
                f"events={self.events}",
                f"q={self.q}",
            )
        )


@dataclass(frozen=True)
class CovariateDeclaration:
    """Frozen covariate selection & encoding of a registry dataset."""

    name: str
    kind: CovariateKind
    labels: Tuple[str, ...] = ()


@dataclass(frozen=True)
class DatasetRegistryEntry:
    """Expected characteristics and baseline of a named dataset."""

    name: str
    n: Optional[int]
    events: Optional[int]
    q: int
    event_rate: Optional[float]
    significant: Tuple[Term, ...]
    covariates: Tuple[CovariateDeclaration, ...] = ()
    c_index: Optional[float] = None
    test_c_index: Optional[float] = None
    intervals: Optional[int] = None

    @property
    def expected(self) -> dict:
        """Size checks of the frozen fixture; counts left as None are skipped."""

        values = {"n": self.n, "events": self.events, "q": self.q}
        return {key: value for key, value in values.items() if value is not None}


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 50
    tolerance: float = 1e-9
    ties: str = "efron"
    max_halvings: int = 20

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.ties not in ("efron", "breslow"):
            raise ValueError(f"unknown tie handling: {self.ties}")


@dataclass(frozen=True, eq=False)
class CoxFit:
    """Result of a Cox proportional-hazards fit.

    `dfbeta` is present only for converged fits of clean data.
    """

    terms: Tuple[Term, ...]
    beta: np.ndarray
    covariance: np.ndarray
    se: np.ndarray
    wald_z: np.ndarray
    p_value: np.ndarray
    hr: np.ndarray
    log_partial_likelihood: float
    converged: bool
    iterations: int
    dfbeta: Optional[np.ndarray] = None
    ties: str = "efron"

    def summary(self, alpha: float = 0.05) -> pd.DataFrame:
        """Coefficient table, one row per term."""

        return pd.DataFrame(
            {
                "beta": self.beta,
                "se": self.se,
                "z": self.wald_z,
                "p": self.p_value,
                "hr": self.hr,
                "significant": self.p_value < alpha,
            },
            index=pd.Index(self.terms, name="term"),
        )

    def significant(self, alpha: float = 0.05) -> Tuple[Term, ...]:
        return tuple(t for t, p in zip(self.terms, self.p_value) if p < alpha)


@dataclass(frozen=True, eq=False)
class GlmFit:
    terms: Tuple[Term, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    se: np.ndarray
    p_value: np.ndarray
    deviance: float
    log_likelihood: float
    converged: bool
    separated: bool
    iterations: int

    def coefficient(self, term: Term) -> float:
        return float(self.coefficients[self.terms.index(term)])


class Allocation(str, enum.Enum):
    PER_COVARIATE = "per_covariate"  # eps / q
    ALL_INPUTS = "all_inputs"  # eps / (q + 2): covariates, T and delta
    PER_COEFFICIENT = "per_coefficient"  # eps / q per coefficient noise


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon_total: float
    allocation: Allocation
    q: int

    def __post_init__(self):
        if not self.epsilon_total > 0:
            raise ValueError("epsilon must be positive or infinite")
        if self.q < 1:
            raise ValueError("q must be at least 1")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.epsilon_total)

    @property
    def targets(self) -> int:
        if self.allocation is Allocation.ALL_INPUTS:
            return self.q + 2

        return self.q

    @property
    def share(self) -> float:
        if self.infinite:
            return math.inf

        return self.epsilon_total / self.targets


class MethodTag(str, enum.Enum):
    PHASE1 = "phase1"
    PHASE2 = "phase2"
    PHASE3 = "phase3"
    OUTPUT = "output"


_ALLOCATIONS = {
    MethodTag.PHASE1: Allocation.PER_COVARIATE,
    MethodTag.PHASE2: Allocation.ALL_INPUTS,
    MethodTag.PHASE3: Allocation.ALL_INPUTS,
    MethodTag.OUTPUT: Allocation.PER_COEFFICIENT,
}

_LABELS = {
    MethodTag.PHASE1: "Phase 1",
    MethodTag.PHASE2: "Phase 2",
    MethodTag.PHASE3: "Phase 3",
    MethodTag.OUTPUT: "Output",
}


@dataclass(frozen=True)
class PerturbationMethod:
    """One of the four perturbation strategies.

    Phase 3 carries its interval count K.
    """

    tag: MethodTag
    intervals: Optional[int] = None

    @property
    def allocation(self) -> Allocation:
        return _ALLOCATIONS[self.tag]

    def budget(self, epsilon_total: float, q: int) -> PrivacyBudget:
        return PrivacyBudget(epsilon_total, self.allocation, q)

    @property
    def label(self) -> str:
        return _LABELS[self.tag]

    @property
    def name(self) -> str:
        return self.tag.value


@dataclass(frozen=True, eq=False)
class IntervalGrid:
    """Data-driven partition of (0, max T] into K intervals.

    `boundaries` has K + 1 entries starting at 0; interval k covers
    (boundaries[k - 1], boundaries[k]].
    """

    boundaries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "boundaries", _frozen(self.boundaries))

    @property
    def K(self) -> int:
        return len(self.boundaries) - 1

    def exit_interval(self, times) -> np.ndarray:
        """Map observation times to exit intervals 1..K."""

        cuts = self.boundaries[1:-1]
        return np.searchsorted(cuts, np.asarray(times, dtype=float), side="left") + 1


@dataclass(frozen=True, eq=False)
class StackedDataset:
    """Person-period rows of a discrete-time survival model.

    Subject i contributes rows for intervals 1..exit_interval[i]; the
    response is 0 on all rows but the last, where it equals event[i].
    """

    design: np.ndarray
    response: np.ndarray
    terms: Tuple[Term, ...]
    subject: np.ndarray
    exit_interval: np.ndarray
    event: np.ndarray
    intervals: int

    @property
    def rows(self) -> int:
        return len(self.response)

    @property
    def covariate_terms(self) -> Tuple[Term, ...]:
        return self.terms[self.intervals :]


@dataclass(frozen=True, eq=False)
class PerturbedDataset:
    """Privatized release of a survival dataset.

    For Phase 3 the release is the perturbed (exit interval, event) pair
    instead of (T, delta); `dataset` then keeps the original T and delta,
    which must not be used for fitting.
    """

    dataset: SurvivalDataset
    exit_interval: Optional[np.ndarray] = None
    event: Optional[np.ndarray] = None

    def subset(self, indices) -> "PerturbedDataset":
        from .datasets import subset

        indices = np.asarray(indices)

        def rows(values):
            return None if values is None else values[indices]

        return PerturbedDataset(
            dataset=subset(self.dataset, indices),
            exit_interval=rows(self.exit_interval),
            event=rows(self.event),
        )


@dataclass(frozen=True)
class SeedContext:
    """Coordinates of one random stream.

    The stream is a pure function of these five integers, see
    `dpsurv.simulation.seeding`.
    """

    base_seed: int
    dataset_index: int
    method_index: int
    epsilon_index: int
    iteration: int

    def generator(self) -> np.random.Generator:
        from .simulation.seeding import generator

        return generator(self)


@dataclass(frozen=True)
class SimulationPlan:
    datasets: Tuple[str, ...]
    methods: Tuple[MethodTag, ...]
    epsilons: Tuple[float, ...] = ()
    iterations: int = 1000
    base_seed: int = 42
    train_fraction: float = 0.7

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if any(b <= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ValueError("epsilon grid must be strictly increasing")
        if any(math.isinf(eps) for eps in self.epsilons[:-1]):
            raise ValueError("infinite epsilon must come last")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train fraction must be in (0, 1)")


@dataclass(frozen=True, eq=False)
class SimulationRecord:
    """Outcome of one (dataset, method, epsilon, iteration).

    Non-converged iterations carry NaN p-values, HRs and C-indices.
    """

    dataset: str
    method: str
    epsilon: float
    iteration: int
    terms: Tuple[Term, ...]
    p_value: np.ndarray
    hr: np.ndarray
    converged: bool
    train_c: float = math.nan
    test_c: float = math.nan
    separated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "p_value", _frozen(self.p_value))
        object.__setattr__(self, "hr", _frozen(self.hr))

    @property
    def key(self) -> tuple:
        return (self.dataset, self.method, self.epsilon, self.iteration)


@dataclass(frozen=True)
class MetricsConfig:
    """Baseline the DP metrics are measured against.

    Baseline p-values and HRs are keyed by term. Excluded terms take part
    in neither LSR nor FPR.
    """

    baseline_p: Dict[Term, float]
    baseline_hr: Dict[Term, float]
    alpha: float = 0.05
    exclusions: frozenset = frozenset()

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")

    @property
    def significant(self) -> Tuple[Term, ...]:
        return tuple(
            t
            for t, p in self.baseline_p.items()
            if p < self.alpha and t not in self.exclusions
        )

    @property
    def nonsignificant(self) -> Tuple[Term, ...]:
        return tuple(
            t
            for t, p in self.baseline_p.items()
            if p >= self.alpha and t not in self.exclusions
        )


@dataclass(frozen=True)
class VariableSummary:
    term: Term
    baseline_p: float
    baseline_hr: float
    significant: bool
    excluded: bool
    lsr: float = math.nan
    fpr: float = math.nan
    retained: float = math.nan
    nonconverged: float = math.nan
    signed_bias: float = math.nan
    abs_bias: float = math.nan
    hr_mean: float = math.nan
    hr_sd: float = math.nan


@dataclass(frozen=True)
class MetricSummary:
    """Aggregated metrics of one (dataset, method, epsilon) condition."""

    dataset: str
    method: str
    epsilon: float
    iterations: int
    mean_lsr: float
    mean_fpr: float
    train_c_mean: float
    train_c_sd: float
    test_c_mean: float
    test_c_sd: float
    delta_c: float
    nonconverged_rate: float
    separation_rate: float = 0.0
    variables: Sequence[VariableSummary] = field(default_factory=tuple)

    @property
    def overfitting_gap(self) -> float:
        return self.train_c_mean - self.test_c_mean


@dataclass(frozen=True)
class ThresholdRow:
    """Practical epsilon thresholds of one (dataset, method).

    Each threshold is a formatted grid value, ">1000" when unmet on the
    grid, or "—" when not applicable.
    """

    dataset: str
    method: str
    eps_dc05: str
    eps_lsr50: str
    eps_lsr10: str
    eps_fpr10: str


@dataclass(frozen=True, eq=False)
class Baseline:
    """Clean reference fits of one dataset.

    The discrete-time fit is the epsilon=inf Phase 3 model; its interval
    coefficients come first, followed by the covariate terms of `cox`.
    """

    dataset: str
    cox: CoxFit
    glm: GlmFit
    grid: IntervalGrid
    exclusions: frozenset = frozenset()
    c_index: float = math.nan

    def metrics_config(self, tag: MethodTag, alpha: float = 0.05) -> MetricsConfig:
        if tag is MethodTag.PHASE3:
            terms = self.cox.terms
            index = [self.glm.terms.index(t) for t in terms]
            p = self.glm.p_value[index]
            hr = np.exp(self.glm.coefficients[index])
            exclusions = self.exclusions
        else:
            terms, p, hr = self.cox.terms, self.cox.p_value, self.cox.hr
            exclusions = frozenset()

        return MetricsConfig(
            baseline_p=dict(zip(terms, map(float, p))),
            baseline_hr=dict(zip(terms, map(float, hr))),
            alpha=alpha,
            exclusions=exclusions,
        )
