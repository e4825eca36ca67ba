"""
Harrell's concordance index.
"""

import numpy as np

from ..exceptions import NoComparablePairs


# rows of the pair matrix evaluated at once
BLOCK_SIZE = 512


def concordance(times, deltas, risk_scores) -> float:
    """Harrell's C of risk scores against censored times.

    A pair (i, j) is comparable when T_i < T_j and subject i had an event.
    It is concordant when subject i has the higher risk score; tied
    scores count one half. Pairs with equal times are not comparable.
    """

    times = np.asarray(times, dtype=float)
    deltas = np.asarray(deltas)
    risk = np.asarray(risk_scores, dtype=float)

    if not len(times) == len(deltas) == len(risk):
        raise ValueError("times, deltas and risk scores differ in length")
    if len(times) < 2:
        raise NoComparablePairs("Concordance needs at least two subjects.")

    events = np.flatnonzero(deltas == 1)
    comparable = 0
    score = 0.0

    for start in range(0, len(events), BLOCK_SIZE):
        rows = events[start : start + BLOCK_SIZE]
        pairs = times[rows, None] < times[None, :]
        higher = risk[rows, None] > risk[None, :]
        tied = risk[rows, None] == risk[None, :]

        comparable += np.count_nonzero(pairs)
        score += np.count_nonzero(pairs & higher) + 0.5 * np.count_nonzero(pairs & tied)

    if comparable == 0:
        raise NoComparablePairs()

    return score / comparable
