"""
This module provides custom utility functions.
"""

import hashlib
import math
from pathlib import Path
from typing import Tuple

import numpy as np
from scipy import special

from .exceptions import InvalidSE


INFINITY_SPELLING = "inf"


def wald_p(beta: float, se: float) -> float:
    """Two-sided Wald p-value of a single coefficient.

    Computed as erfc(|z| / sqrt(2)), which equals 2 (1 - Phi(|z|)) without
    the cancellation of the subtraction in the tail.
    """

    if not (math.isfinite(se) and se > 0):
        raise InvalidSE(f"Standard error must be positive and finite, got {se}.")

    z = beta / se

    return float(special.erfc(abs(z) / math.sqrt(2)))


def wald_test(beta: np.ndarray, se: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return Wald z statistics and two-sided p-values of coefficients."""

    beta = np.asarray(beta, dtype=float)
    se = np.asarray(se, dtype=float)

    if not (np.all(np.isfinite(se)) and np.all(se > 0)):
        raise InvalidSE(f"Standard errors must be positive and finite, got {se}.")

    z = beta / se
    p = special.erfc(np.abs(z) / math.sqrt(2))

    return z, p


def format_float(value: float) -> str:
    """Shortest string that reads back as the same float."""

    value = float(value)

    if math.isnan(value):
        return "nan"

    if math.isinf(value):
        return INFINITY_SPELLING if value > 0 else f"-{INFINITY_SPELLING}"

    return repr(value)


def format_epsilon(eps: float) -> str:
    """Spell a grid epsilon the way it appears in files and tables."""

    if math.isinf(eps):
        return INFINITY_SPELLING

    return f"{eps:g}"


def parse_epsilon(text: str) -> float:
    """Parse a command-line epsilon; `inf` stands for no privacy."""

    value = float(text)

    if math.isnan(value) or not value > 0:
        raise ValueError(f"epsilon must be positive or '{INFINITY_SPELLING}': {text}")

    return value


def file_sha256(path: Path) -> str:
    """Hex SHA-256 digest of a file's contents."""

    digest = hashlib.sha256()

    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)

    return digest.hexdigest()
