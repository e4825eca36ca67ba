"""
Differential-privacy mechanisms.

Every mechanism draws from an explicit numpy generator and is an exact
identity at an infinite budget share, in which case it draws nothing.
Draws per call are a fixed function of the input size:

  - Laplace: one uniform per value;
  - binary randomized response: one keep uniform per value;
  - categorical randomized response: a block of keep uniforms for all
    values, then a block of offsets for all values.
"""

import enum
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import special

from .exceptions import DegenerateRange, InvalidLevel
from .structures import Allocation, CovariateKind, CovariateSpec, PrivacyBudget


_MANTISSA = 2**53


def open_uniform(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform draws on the open interval (0, 1).

    Uses 53 random bits per draw, offset by half a step so that neither
    end point nor 1/2 can occur.
    """

    return (rng.integers(0, _MANTISSA, size=size) + 0.5) / _MANTISSA


def laplace_noise(scale: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Laplace(0, scale) draws by inverse CDF of one uniform each.

    L = -scale * sign(u - 1/2) * ln(1 - 2 |u - 1/2|).
    """

    centered = open_uniform(rng, size) - 0.5

    return -scale * np.sign(centered) * np.log1p(-2 * np.abs(centered))


def keep_probability(eps_share: float, k: int = 2) -> float:
    """Probability that randomized response reports the true level."""

    if math.isinf(eps_share):
        return 1.0

    if k == 2:
        return float(special.expit(eps_share))

    return 1 / (1 + (k - 1) * math.exp(-eps_share))


def _check_share(eps_share: float, allow_zero: bool = False) -> None:
    if math.isnan(eps_share) or eps_share < 0 or (eps_share == 0 and not allow_zero):
        raise ValueError(f"invalid budget share: {eps_share}")


def _same_shape(values, result):
    return result if np.ndim(values) else type(values)(result)


def laplace_bounded(values, lower: float, upper: float, eps_share: float, rng):
    """Add Laplace((upper - lower) / eps_share) noise and clamp to bounds."""

    _check_share(eps_share)

    if not upper - lower > 0:
        raise DegenerateRange(f"Bounds ({lower}, {upper}) have no width.")

    if math.isinf(eps_share):
        return values

    array = np.asarray(values, dtype=float)
    noise = laplace_noise((upper - lower) / eps_share, rng, size=array.shape)
    result = np.clip(array + noise, lower, upper)

    return result if array.ndim else float(result)


def laplace_clamped(values, spec: CovariateSpec, eps_share: float, rng):
    """Laplace mechanism with the clipping bounds of a covariate."""

    return laplace_bounded(values, spec.lower, spec.upper, eps_share, rng)


def binary_rr(bits, eps_share: float, rng):
    """Keep each bit with probability e^eps / (1 + e^eps), flip otherwise."""

    _check_share(eps_share, allow_zero=True)

    if math.isinf(eps_share):
        return bits

    array = np.asarray(bits)
    keep = open_uniform(rng, array.shape) < keep_probability(eps_share)
    result = np.where(keep, array, 1 - array)

    return result if array.ndim else _same_shape(bits, result)


def categorical_rr(levels, k: int, eps_share: float, rng):
    """k-ary randomized response over levels 1..k.

    The true level is reported with probability e^eps / (e^eps + k - 1);
    otherwise one of the other k - 1 levels is reported uniformly.
    """

    if k < 2:
        raise InvalidLevel(f"Randomized response needs k >= 2, got {k}.")

    _check_share(eps_share, allow_zero=True)
    array = np.asarray(levels)

    if not np.all(np.isin(array, np.arange(1, k + 1))):
        raise InvalidLevel(f"Levels must be in 1..{k}.")

    if math.isinf(eps_share):
        return levels

    keep = open_uniform(rng, array.shape) < keep_probability(eps_share, k)
    offsets = rng.integers(1, k, size=array.shape)
    others = (array - 1 + offsets) % k + 1
    result = np.where(keep, array, others)

    return result if array.ndim else _same_shape(levels, result)


class MechanismKind(str, enum.Enum):
    LAPLACE = "laplace"
    BINARY_RR = "binary_rr"
    CATEGORICAL_RR = "categorical_rr"


@dataclass(frozen=True)
class MechanismSpec:
    """A mechanism bound to its budget share.

    Laplace carries clipping bounds, whose width is its sensitivity.
    """

    kind: MechanismKind
    eps_share: float
    lower: float = math.nan
    upper: float = math.nan
    k: int = 2

    @classmethod
    def for_covariate(cls, spec: CovariateSpec, eps_share: float) -> "MechanismSpec":
        if spec.kind is CovariateKind.CONTINUOUS:
            return cls(MechanismKind.LAPLACE, eps_share, spec.lower, spec.upper)

        if spec.kind is CovariateKind.BINARY:
            return cls(MechanismKind.BINARY_RR, eps_share)

        return cls(MechanismKind.CATEGORICAL_RR, eps_share, k=spec.k)

    @property
    def sensitivity(self) -> float:
        return self.upper - self.lower

    @property
    def scale(self) -> float:
        """Laplace scale; zero at an infinite share."""

        if math.isinf(self.eps_share):
            return 0.0

        return self.sensitivity / self.eps_share

    @property
    def keep_probability(self) -> float:
        return keep_probability(self.eps_share, self.k)

    def apply(self, values, rng: np.random.Generator):
        if self.kind is MechanismKind.LAPLACE:
            return laplace_bounded(values, self.lower, self.upper, self.eps_share, rng)

        if self.kind is MechanismKind.BINARY_RR:
            return binary_rr(values, self.eps_share, rng)

        return categorical_rr(values, self.k, self.eps_share, rng)


def allocate(
    budget: PrivacyBudget, names: Sequence[str] = None
) -> List[Tuple[str, float]]:
    """Split a budget equally over its targets.

    Targets are the q covariates in order, followed by `time` and
    `status` for the all-inputs rule. Names default to positional labels.
    """

    if names is None:
        names = [f"x{j + 1}" for j in range(budget.q)]
    elif len(names) != budget.q:
        raise ValueError(f"{len(names)} names for {budget.q} targets")

    targets = list(names)
    if budget.allocation is Allocation.ALL_INPUTS:
        targets += ["time", "status"]

    return [(target, budget.share) for target in targets]
