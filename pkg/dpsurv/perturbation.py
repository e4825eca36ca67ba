"""
The four perturbation strategies.

Phase 1 perturbs covariates, Phase 2 covariates, times and events, Phase 3
covariates, exit intervals and events of a discrete-time model. Output
perturbation adds noise to fitted Cox coefficients. Mechanisms run in a
fixed order, covariates in spec order first, so a stream replays exactly.
"""

import logging
import math
from dataclasses import replace
from typing import Tuple, Union

import numpy as np

from . import settings
from .converters import design_matrix
from .exceptions import NoEvents, NotConverged
from .mechanisms import (
    MechanismSpec,
    binary_rr,
    categorical_rr,
    laplace_bounded,
    laplace_noise,
)
from .models.cox import compute_dfbeta, fit_cox
from .models.glm import fit_logistic
from .structures import (
    CoxFit,
    FitOptions,
    GlmFit,
    IntervalGrid,
    MethodTag,
    PerturbationMethod,
    PerturbedDataset,
    StackedDataset,
    SurvivalDataset,
)
from .utils import wald_test


logger = logging.getLogger(settings.LOGGER_NAME)


def perturb_covariates(
    dataset: SurvivalDataset, eps_share: float, rng: np.random.Generator
) -> SurvivalDataset:
    """Pass every covariate through its mechanism with the given share."""

    if math.isinf(eps_share):
        return dataset

    X = np.array(dataset.X)

    for j, spec in enumerate(dataset.specs):
        X[:, j] = MechanismSpec.for_covariate(spec, eps_share).apply(X[:, j], rng)

    return replace(dataset, X=X)


def phase1(
    dataset: SurvivalDataset, eps_total: float, rng: np.random.Generator
) -> SurvivalDataset:
    """Perturb covariates only; T and delta are returned untouched."""

    budget = PerturbationMethod(MethodTag.PHASE1).budget(eps_total, dataset.q)

    return perturb_covariates(dataset, budget.share, rng)


def phase2(
    dataset: SurvivalDataset, eps_total: float, rng: np.random.Generator
) -> SurvivalDataset:
    """Perturb covariates, observation times and event indicators.

    Times get Laplace noise scaled by the observed time range and are
    clamped to it. Each input takes an eps / (q + 2) share.
    """

    budget = PerturbationMethod(MethodTag.PHASE2).budget(eps_total, dataset.q)

    if budget.infinite:
        return dataset

    result = perturb_covariates(dataset, budget.share, rng)
    T = laplace_bounded(
        dataset.T, dataset.time_lower, dataset.time_upper, budget.share, rng
    )
    delta = binary_rr(dataset.delta, budget.share, rng)

    return replace(result, T=T, delta=delta)


def sturges_intervals(dataset: SurvivalDataset) -> IntervalGrid:
    """Partition (0, max T] into K = min(d, 1 + floor(log2 n)) intervals.

    d is the number of distinct event times. Cut points split the
    distinct event times into K groups of near-equal size; each cut is
    the last event time of its group.
    """

    event_times = np.unique(dataset.T[dataset.delta == 1])
    d = len(event_times)

    if d == 0:
        raise NoEvents(f"{dataset.name}: no event times to discretize.")

    K = min(d, dataset.n.bit_length())
    ends = -(-np.arange(1, K) * d // K)  # ceil(k d / K)
    cuts = event_times[ends - 1]

    return IntervalGrid(np.concatenate(([0.0], cuts, [dataset.T.max()])))


def phase3_release(
    dataset: SurvivalDataset,
    eps_total: float,
    rng: np.random.Generator,
    grid: IntervalGrid,
) -> PerturbedDataset:
    """Perturb covariates, exit intervals and events.

    Exit intervals go through K-ary randomized response and events
    through binary randomized response, one eps / (q + 2) share each.
    """

    budget = PerturbationMethod(MethodTag.PHASE3).budget(eps_total, dataset.q)
    exit_interval = grid.exit_interval(dataset.T)

    if budget.infinite:
        return PerturbedDataset(dataset, exit_interval, np.array(dataset.delta))

    perturbed = perturb_covariates(dataset, budget.share, rng)

    if grid.K > 1:
        exit_interval = categorical_rr(exit_interval, grid.K, budget.share, rng)

    event = binary_rr(dataset.delta, budget.share, rng)

    return PerturbedDataset(perturbed, exit_interval, event)


def stack(
    dataset: SurvivalDataset,
    exit_interval: np.ndarray,
    event: np.ndarray,
    intervals: int,
) -> StackedDataset:
    """Expand subjects to person-period rows.

    Subject i gives rows for intervals 1..exit_interval[i]; the response
    is event[i] on its last row and 0 before. Design columns are K
    interval indicators followed by the covariate columns. The expansion
    is deterministic and draws no random numbers.
    """

    exit_interval = np.asarray(exit_interval, dtype=np.int64)
    event = np.asarray(event, dtype=np.int64)

    subject = np.repeat(np.arange(dataset.n), exit_interval)
    starts = np.cumsum(exit_interval) - exit_interval
    interval = np.arange(len(subject)) - np.repeat(starts, exit_interval) + 1

    dummies = (interval[:, None] == np.arange(1, intervals + 1)).astype(float)
    covariates, terms = design_matrix(dataset.X, dataset.specs)
    last = interval == exit_interval[subject]
    response = (last & (event[subject] == 1)).astype(float)

    return StackedDataset(
        design=np.hstack((dummies, covariates[subject])),
        response=response,
        terms=tuple(f"interval{k}" for k in range(1, intervals + 1)) + terms,
        subject=subject,
        exit_interval=exit_interval,
        event=event,
        intervals=intervals,
    )


def stack_release(release: PerturbedDataset, intervals: int) -> StackedDataset:
    return stack(release.dataset, release.exit_interval, release.event, intervals)


def fit_stacked(stacked: StackedDataset, options: FitOptions = None) -> GlmFit:
    return fit_logistic(stacked.design, stacked.response, options, stacked.terms)


def phase3(
    dataset: SurvivalDataset,
    eps_total: float,
    rng: np.random.Generator,
    grid: IntervalGrid = None,
    options: FitOptions = None,
) -> Tuple[StackedDataset, GlmFit]:
    """Discrete-time survival model of a perturbed release.

    Significance is read from the covariate coefficients of the fit.
    """

    grid = grid if grid is not None else sturges_intervals(dataset)
    release = phase3_release(dataset, eps_total, rng, grid)
    stacked = stack_release(release, grid.K)

    return stacked, fit_stacked(stacked, options)


def output_dfbeta(
    dataset: SurvivalDataset,
    eps_total: float,
    rng: np.random.Generator,
    fit: CoxFit = None,
) -> CoxFit:
    """Add Laplace noise to the coefficients of a clean Cox fit.

    The sensitivity of coefficient j is max_i |dfbeta_ij|; each coefficient
    takes an eps / q share, q being the number of covariates. Standard
    errors stay those of the clean fit, p-values and hazard ratios follow
    the noisy coefficients.
    """

    fit = fit if fit is not None else fit_cox(dataset)

    if not fit.converged:
        raise NotConverged(f"{dataset.name}: clean fit did not converge.")

    budget = PerturbationMethod(MethodTag.OUTPUT).budget(eps_total, dataset.q)

    if budget.infinite:
        return fit

    dfbeta = fit.dfbeta if fit.dfbeta is not None else compute_dfbeta(fit, dataset)
    sensitivity = np.abs(dfbeta).max(axis=0)
    noise = laplace_noise(sensitivity / budget.share, rng, size=len(fit.beta))
    beta = fit.beta + noise
    z, p = wald_test(beta, fit.se)

    with np.errstate(over="ignore"):
        hr = np.exp(beta)

    return replace(fit, beta=beta, wald_z=z, p_value=p, hr=hr, dfbeta=None)


def perturb(
    method: PerturbationMethod,
    dataset: SurvivalDataset,
    eps_total: float,
    rng: np.random.Generator,
    grid: IntervalGrid = None,
) -> Union[PerturbedDataset, CoxFit]:
    """Apply a method: input phases give a release, output gives a fit."""

    if method.tag is MethodTag.PHASE1:
        return PerturbedDataset(phase1(dataset, eps_total, rng))

    if method.tag is MethodTag.PHASE2:
        return PerturbedDataset(phase2(dataset, eps_total, rng))

    if method.tag is MethodTag.PHASE3:
        if grid is None:
            grid = sturges_intervals(dataset)
        if method.intervals is not None and method.intervals != grid.K:
            logger.warning(
                f"{dataset.name}: interval grid has K={grid.K}, "
                f"method declares K={method.intervals}"
            )
        return phase3_release(dataset, eps_total, rng, grid)

    return output_dfbeta(dataset, eps_total, rng)
