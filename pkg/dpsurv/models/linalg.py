"""
Cholesky helpers for information matrices.
"""

import numpy as np
from scipy import linalg

from ..exceptions import SingularInformation


# smallest admissible pivot relative to the largest diagonal entry
PIVOT_TOLERANCE = 1e-12


def factorize(information: np.ndarray):
    """Cholesky factor of a symmetric information matrix.

    Raises `SingularInformation` when the matrix is not positive definite
    or a pivot falls below `PIVOT_TOLERANCE` times the largest diagonal.
    """

    information = np.asarray(information, dtype=float)
    diagonal = np.diag(information)

    if not np.all(np.isfinite(information)) or diagonal.max(initial=0.0) <= 0:
        raise SingularInformation()

    try:
        factor = linalg.cho_factor(information, lower=True, check_finite=False)
    except linalg.LinAlgError:
        raise SingularInformation()

    pivots = np.diag(factor[0]) ** 2
    if pivots.min() < PIVOT_TOLERANCE * diagonal.max():
        raise SingularInformation(
            f"Pivot {pivots.min():.3g} below tolerance; design is rank deficient."
        )

    return factor


def solve(factor, rhs: np.ndarray) -> np.ndarray:
    return linalg.cho_solve(factor, rhs, check_finite=False)


def inverse(factor) -> np.ndarray:
    size = factor[0].shape[0]
    result = linalg.cho_solve(factor, np.eye(size), check_finite=False)

    return (result + result.T) / 2
