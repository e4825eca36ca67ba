"""
Practical epsilon thresholds.

For each (dataset, method) the smallest finite grid epsilon at which a
utility criterion is met:

  eps_dc05   C-index loss at most 0.05
  eps_lsr50  mean LSR at most 0.50
  eps_lsr10  mean LSR at most 0.10
  eps_fpr10  mean FPR at most 0.10 there and at every larger finite epsilon

A criterion unmet on the grid reads ">1000" (the largest finite grid
value); one that does not apply reads "—".
"""

import math
from collections import defaultdict
from typing import Callable, Iterable, List, Sequence

from .. import settings
from ..exceptions import IncompleteGrid
from ..structures import MethodTag, MetricSummary, ThresholdRow
from ..utils import format_epsilon


NOT_APPLICABLE = "—"

DC_LIMIT = 0.05
LSR_LIMITS = (0.50, 0.10)
FPR_LIMIT = 0.10


def _finite(summaries: Sequence[MetricSummary]) -> List[MetricSummary]:
    return sorted(
        (s for s in summaries if math.isfinite(s.epsilon)), key=lambda s: s.epsilon
    )


def first_epsilon(
    summaries: Sequence[MetricSummary],
    value: Callable[[MetricSummary], float],
    limit: float,
    unmet: str,
) -> str:
    """Smallest epsilon whose value is at most the limit; NaN never meets it."""

    for summary in _finite(summaries):
        if value(summary) <= limit:
            return format_epsilon(summary.epsilon)

    return unmet


def permanent_epsilon(
    summaries: Sequence[MetricSummary],
    value: Callable[[MetricSummary], float],
    limit: float,
    unmet: str,
) -> str:
    """Smallest epsilon from which the value stays at most the limit."""

    result = unmet

    for summary in reversed(_finite(summaries)):
        if not value(summary) <= limit:
            break
        result = format_epsilon(summary.epsilon)

    return result


def _fpr_threshold(summaries, method, unmet) -> str:
    finite = _finite(summaries)
    fpr = [s.mean_fpr for s in finite]

    if method == MethodTag.OUTPUT.value or all(math.isnan(v) for v in fpr):
        return NOT_APPLICABLE
    if all(v < FPR_LIMIT for v in fpr):
        return NOT_APPLICABLE

    return permanent_epsilon(finite, lambda s: s.mean_fpr, FPR_LIMIT, unmet)


def _lsr_threshold(summaries, limit, unmet) -> str:
    if all(math.isnan(s.mean_lsr) for s in _finite(summaries)):
        return NOT_APPLICABLE

    return first_epsilon(summaries, lambda s: s.mean_lsr, limit, unmet)


def threshold_row(
    dataset: str, method: str, summaries: Sequence[MetricSummary], unmet: str
) -> ThresholdRow:
    return ThresholdRow(
        dataset=dataset,
        method=method,
        eps_dc05=first_epsilon(summaries, lambda s: s.delta_c, DC_LIMIT, unmet),
        eps_lsr50=_lsr_threshold(summaries, LSR_LIMITS[0], unmet),
        eps_lsr10=_lsr_threshold(summaries, LSR_LIMITS[1], unmet),
        eps_fpr10=_fpr_threshold(summaries, method, unmet),
    )


def thresholds(
    summaries: Iterable[MetricSummary],
    epsilons: Sequence[float] = settings.EPSILON_GRID,
) -> List[ThresholdRow]:
    """Threshold rows per (dataset, method), sorted.

    Raises `IncompleteGrid` listing every absent (dataset, method,
    epsilon) condition.
    """

    groups = defaultdict(dict)
    for summary in summaries:
        groups[(summary.dataset, summary.method)][summary.epsilon] = summary

    missing = [
        (dataset, method, format_epsilon(eps))
        for (dataset, method), present in sorted(groups.items())
        for eps in epsilons
        if eps not in present
    ]
    if missing:
        raise IncompleteGrid(missing)

    finite = [eps for eps in epsilons if math.isfinite(eps)]
    unmet = f">{format_epsilon(max(finite))}" if finite else NOT_APPLICABLE
    rows = []

    for (dataset, method), present in sorted(groups.items()):
        grid = [present[eps] for eps in epsilons]
        rows.append(threshold_row(dataset, method, grid, unmet))

    return rows
