import logging
import math

import numpy as np

from .. import settings
from ..exceptions import NumericalError
from ..models.concordance import concordance
from ..structures import SimulationRecord


logger = logging.getLogger(settings.LOGGER_NAME)


# shortcuts for per-iteration work: a numerical failure inside one
# iteration is logged and recorded, data errors propagate
def fit_or_none(func, *args, context: str = "", **kwargs):
    """Call `func` and return its result, or None on a numerical error.

    The error is logged as a warning prefixed with `context`.
    """

    try:
        return func(*args, **kwargs)
    except NumericalError as e:
        logger.warning(f"{context}: {type(e).__name__}: {e}")
        return None


def concordance_or_nan(times, deltas, risk_scores, context: str = "") -> float:
    """Harrell's C, or NaN when it is undefined or the scores are not finite."""

    risk_scores = np.asarray(risk_scores, dtype=float)

    if not np.all(np.isfinite(risk_scores)):
        logger.warning(f"{context}: non-finite risk scores")
        return math.nan

    result = fit_or_none(concordance, times, deltas, risk_scores, context=context)

    return math.nan if result is None else result


def failed_record(key: tuple, terms, **kwargs) -> SimulationRecord:
    """Non-converged record with NaN p-values and hazard ratios."""

    dataset, method, eps, b = key
    missing = np.full(len(terms), np.nan)

    return SimulationRecord(
        dataset=dataset,
        method=method,
        epsilon=eps,
        iteration=b,
        terms=terms,
        p_value=missing,
        hr=missing,
        converged=False,
        **kwargs,
    )
