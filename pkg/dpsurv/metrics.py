"""
Utility metrics of perturbed fits against a clean baseline.

All functions take the B records of one (dataset, method, epsilon)
condition unless stated otherwise; record order does not matter.
Non-converged iterations count as non-significant.
"""

import math
from collections import defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .exceptions import NoNonsignificantBaseline, NoSignificantBaseline
from .structures import (
    CoxFit,
    GlmFit,
    MetricsConfig,
    MetricSummary,
    SimulationRecord,
    Term,
    VariableSummary,
)


def _columns(
    records: Sequence[SimulationRecord], terms: Sequence[Term], field: str
) -> np.ndarray:
    """B x len(terms) matrix of a per-variable record field."""

    if not records:
        raise ValueError("no records")

    result = np.empty((len(records), len(terms)))

    for b, record in enumerate(records):
        values = getattr(record, field)
        index = {t: i for i, t in enumerate(record.terms)}
        result[b] = [values[index[t]] for t in terms]

    return result


def _converged(records: Sequence[SimulationRecord]) -> np.ndarray:
    return np.array([r.converged for r in records], dtype=bool)


def _significance(records, terms, alpha) -> Tuple[np.ndarray, np.ndarray]:
    """Significant and converged masks, B x len(terms)."""

    converged = _converged(records)[:, None]
    p = _columns(records, terms, "p_value")

    with np.errstate(invalid="ignore"):
        significant = converged & (p < alpha)

    return significant, np.broadcast_to(converged, significant.shape)


def lsr(
    records: Sequence[SimulationRecord], config: MetricsConfig
) -> Tuple[Dict[Term, float], float]:
    """Loss of significance rate per baseline-significant variable.

    LSR_j is the fraction of iterations in which variable j is not
    significant, non-converged iterations included. Returns the rates
    and their mean.
    """

    terms = config.significant
    if not terms:
        raise NoSignificantBaseline()

    significant, _ = _significance(records, terms, config.alpha)
    rates = 1 - significant.mean(axis=0)
    per_variable = dict(zip(terms, map(float, rates)))

    return per_variable, float(rates.mean())


def fpr(
    records: Sequence[SimulationRecord], config: MetricsConfig
) -> Tuple[Dict[Term, float], float]:
    """False positive rate per baseline-nonsignificant variable."""

    terms = config.nonsignificant
    if not terms:
        raise NoNonsignificantBaseline()

    significant, _ = _significance(records, terms, config.alpha)
    rates = significant.mean(axis=0)
    per_variable = dict(zip(terms, map(float, rates)))

    return per_variable, float(rates.mean())


def nonconverged_rate(records: Sequence[SimulationRecord]) -> float:
    return float(1 - _converged(records).mean())


def hr_bias(
    records: Sequence[SimulationRecord], config: MetricsConfig
) -> Dict[Term, Tuple[float, float]]:
    """Relative hazard-ratio bias per variable over converged iterations.

    Returns (signed, absolute) pairs: the mean of (HR - HR0) / HR0 and
    the mean of |HR / HR0 - 1|.
    """

    terms = tuple(config.baseline_hr)
    converged = _converged(records)
    result = {}

    if not converged.any():
        return {t: (math.nan, math.nan) for t in terms}

    hr = _columns([r for r, c in zip(records, converged) if c], terms, "hr")
    baseline = np.array([config.baseline_hr[t] for t in terms])
    relative = hr / baseline - 1

    for j, term in enumerate(terms):
        column = relative[:, j]
        result[term] = (float(column.mean()), float(np.abs(column).mean()))

    return result


def _mean_sd(values: np.ndarray) -> Tuple[float, float]:
    values = values[np.isfinite(values)]

    if len(values) == 0:
        return math.nan, math.nan

    sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0

    return float(values.mean()), sd


def mean_test_c(records: Sequence[SimulationRecord]) -> float:
    return _mean_sd(np.array([r.test_c for r in records]))[0]


def delta_c(records: Sequence[SimulationRecord], baseline_test_c: float) -> float:
    """Test C-index lost against the baseline; positive is a loss."""

    return baseline_test_c - mean_test_c(records)


def phase3_exclusions(
    cox_fit: CoxFit, glm_fit: GlmFit, alpha: float = 0.05
) -> frozenset:
    """Variables classified differently by the Cox and discrete-time fits."""

    excluded = set()

    for term, p in zip(cox_fit.terms, cox_fit.p_value):
        glm_p = glm_fit.p_value[glm_fit.terms.index(term)]

        if (p < alpha) != (glm_p < alpha):
            excluded.add(term)

    return frozenset(excluded)


def _variables(records, config) -> List[VariableSummary]:
    terms = tuple(config.baseline_p)
    significant, converged = _significance(records, terms, config.alpha)
    bias = hr_bias(records, config)
    hr = _columns(records, terms, "hr")
    result = []

    for j, term in enumerate(terms):
        baseline_p = config.baseline_p[term]
        excluded = term in config.exclusions
        is_significant = baseline_p < config.alpha
        retained = float(significant[:, j].mean())
        missing = float(1 - converged[:, j].mean())
        hr_mean, hr_sd = _mean_sd(hr[converged[:, j], j])

        result.append(
            VariableSummary(
                term=term,
                baseline_p=baseline_p,
                baseline_hr=config.baseline_hr[term],
                significant=is_significant,
                excluded=excluded,
                lsr=1 - retained if is_significant and not excluded else math.nan,
                fpr=retained if not is_significant and not excluded else math.nan,
                retained=retained,
                nonconverged=missing,
                signed_bias=bias[term][0],
                abs_bias=bias[term][1],
                hr_mean=hr_mean,
                hr_sd=hr_sd,
            )
        )

    return result


def summarize_condition(
    records: Sequence[SimulationRecord],
    config: MetricsConfig,
    baseline_test_c: float = math.nan,
) -> MetricSummary:
    """Aggregate the records of one (dataset, method, epsilon)."""

    first = records[0]

    try:
        _, mean_lsr = lsr(records, config)
    except NoSignificantBaseline:
        mean_lsr = math.nan

    try:
        _, mean_fpr = fpr(records, config)
    except NoNonsignificantBaseline:
        mean_fpr = math.nan

    train_c = _mean_sd(np.array([r.train_c for r in records]))
    test_c = _mean_sd(np.array([r.test_c for r in records]))

    return MetricSummary(
        dataset=first.dataset,
        method=first.method,
        epsilon=first.epsilon,
        iterations=len(records),
        mean_lsr=mean_lsr,
        mean_fpr=mean_fpr,
        train_c_mean=train_c[0],
        train_c_sd=train_c[1],
        test_c_mean=test_c[0],
        test_c_sd=test_c[1],
        delta_c=baseline_test_c - test_c[0],
        nonconverged_rate=nonconverged_rate(records),
        separation_rate=float(np.mean([r.separated for r in records])),
        variables=tuple(_variables(records, config)),
    )


def summarize(
    records: Iterable[SimulationRecord],
    config: MetricsConfig,
    baseline_test_c: float = None,
) -> List[MetricSummary]:
    """Summaries of the records of one (dataset, method), one per epsilon.

    The baseline test C defaults to the mean test C of the epsilon=inf
    records; without them the C-index loss is NaN.
    """

    conditions = defaultdict(list)
    for record in records:
        conditions[record.epsilon].append(record)

    if baseline_test_c is None:
        if math.inf in conditions:
            baseline_test_c = mean_test_c(conditions[math.inf])
        else:
            baseline_test_c = math.nan

    return [
        summarize_condition(conditions[eps], config, baseline_test_c)
        for eps in sorted(conditions)
    ]
