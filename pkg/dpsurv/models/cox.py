"""
Cox proportional-hazards regression.

The Efron log partial likelihood is maximized by Newton-Raphson with step
halving. Covariates are centered internally; this leaves the likelihood,
its derivatives and the coefficients unchanged.
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from .. import settings
from ..converters import design_matrix
from ..exceptions import NoEvents, NotConverged, NumericOverflow, SingularInformation
from ..structures import CoxFit, FitOptions, SurvivalDataset
from ..utils import wald_test
from . import linalg


logger = logging.getLogger(settings.LOGGER_NAME)

# largest linear predictor whose exponent is a finite double
MAX_LINEAR_PREDICTOR = 709.0


def default_options() -> FitOptions:
    return FitOptions(
        max_iterations=settings.MAX_ITERATIONS,
        tolerance=settings.TOLERANCE,
        max_halvings=settings.MAX_HALVINGS,
    )


def _reverse_cumsum(values: np.ndarray) -> np.ndarray:
    return np.cumsum(values[::-1], axis=0)[::-1]


class _RiskSetStructure:
    """Risk sets and tied-event groups of one dataset.

    Event groups are the distinct event times in increasing order. The
    risk set of a group holds every subject with T >= its time.
    """

    def __init__(self, Z: np.ndarray, T: np.ndarray, delta: np.ndarray):
        self.Z = Z
        self.T = T
        self.n, self.p = Z.shape

        self.order = np.argsort(T, kind="stable")
        self.events = np.flatnonzero(delta == 1)
        self.event_times, self.event_group = np.unique(
            T[self.events], return_inverse=True
        )
        self.ties = np.bincount(self.event_group)
        self.risk_start = np.searchsorted(T[self.order], self.event_times, side="left")

        groups = len(self.event_times)
        self.event_z = np.zeros((groups, self.p))
        np.add.at(self.event_z, self.event_group, Z[self.events])

        self.ZZ = np.einsum("ij,ik->ijk", Z, Z)

    def weights(self, beta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        eta = self.Z @ beta

        if not np.all(np.isfinite(eta)):
            raise NumericOverflow()
        if np.abs(eta).max(initial=0.0) > MAX_LINEAR_PREDICTOR:
            raise NumericOverflow()

        return eta, np.exp(eta)

    def _group_sums(self, values: np.ndarray) -> np.ndarray:
        result = np.zeros((len(self.event_times),) + values.shape[1:])
        np.add.at(result, self.event_group, values[self.events])

        return result

    def sums(self, w: np.ndarray, second_order: bool = True):
        """Risk-set and tie sums of w, w z and w z z' per event group."""

        ws = w[self.order]
        s0 = _reverse_cumsum(ws)[self.risk_start]
        s1 = _reverse_cumsum(ws[:, None] * self.Z[self.order])[self.risk_start]
        d0 = self._group_sums(w)
        d1 = self._group_sums(w[:, None] * self.Z)

        if not second_order:
            return s0, s1, None, d0, d1, None

        wzz = w[:, None, None] * self.ZZ
        s2 = _reverse_cumsum(wzz[self.order])[self.risk_start]
        d2 = self._group_sums(wzz)

        return s0, s1, s2, d0, d1, d2

    def steps(self, ties: str):
        """Yield (group mask, fraction) of each Efron sub-step.

        The r-th death of a group of d tied deaths removes the fraction r/d
        of the tied weight from the risk set. Breslow removes nothing.
        """

        for r in range(self.ties.max(initial=0)):
            mask = self.ties > r

            if ties == "efron":
                fraction = r / self.ties[mask]
            else:
                fraction = np.zeros(mask.sum())

            yield mask, fraction

    def evaluate(self, beta: np.ndarray, ties: str):
        eta, w = self.weights(beta)
        s0, s1, s2, d0, d1, d2 = self.sums(w)

        loglik = eta[self.events].sum()
        score = self.event_z.sum(axis=0)
        information = np.zeros((self.p, self.p))

        for mask, f in self.steps(ties):
            denom = s0[mask] - f * d0[mask]
            mean = (s1[mask] - f[:, None] * d1[mask]) / denom[:, None]
            second = (s2[mask] - f[:, None, None] * d2[mask]) / denom[:, None, None]

            loglik -= np.log(denom).sum()
            score -= mean.sum(axis=0)
            information += second.sum(axis=0) - mean.T @ mean

        return float(loglik), score, information

    def residuals(self, beta: np.ndarray, ties: str) -> np.ndarray:
        """Per-subject score contributions, n x p."""

        _, w = self.weights(beta)
        s0, s1, _, d0, d1, _ = self.sums(w, second_order=False)

        groups = len(self.event_times)
        h0, h1 = np.zeros(groups), np.zeros((groups, self.p))
        e0, e1 = np.zeros(groups), np.zeros((groups, self.p))
        mean_of_means = np.zeros((groups, self.p))

        for mask, f in self.steps(ties):
            denom = s0[mask] - f * d0[mask]
            mean = (s1[mask] - f[:, None] * d1[mask]) / denom[:, None]

            h0[mask] += 1 / denom
            h1[mask] += mean / denom[:, None]
            e0[mask] += f / denom
            e1[mask] += f[:, None] * mean / denom[:, None]
            mean_of_means[mask] += mean / self.ties[mask][:, None]

        # hazard accumulated up to each subject's time, full weight
        last = np.searchsorted(self.event_times, self.T, side="right") - 1
        cum_h0 = np.concatenate(([0.0], np.cumsum(h0)))[last + 1]
        cum_h1 = np.vstack((np.zeros(self.p), np.cumsum(h1, axis=0)))[last + 1]

        result = -w[:, None] * (self.Z * cum_h0[:, None] - cum_h1)

        # dying subjects carry weight 1 - r/d in their own group
        g = self.event_group
        ev = self.events
        result[ev] += self.Z[ev] - mean_of_means[g]
        result[ev] += w[ev, None] * (self.Z[ev] * e0[g][:, None] - e1[g])

        return result


def _structure(dataset: SurvivalDataset) -> Tuple[_RiskSetStructure, Tuple[str, ...]]:
    Z, terms = design_matrix(dataset.X, dataset.specs)
    Z = Z - Z.mean(axis=0)

    return _RiskSetStructure(Z, dataset.T, dataset.delta), terms


def partial_loglik_and_derivatives(
    dataset: SurvivalDataset, beta, ties: str = "efron"
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Log partial likelihood, score and information at `beta`.

    Raises `NumericOverflow` when a linear predictor leaves the range of
    `exp`.
    """

    structure, _ = _structure(dataset)

    return structure.evaluate(np.asarray(beta, dtype=float), ties)


def score_residuals(dataset: SurvivalDataset, beta, ties: str = "efron") -> np.ndarray:
    """Score residuals, one row per subject; rows sum to the total score."""

    structure, _ = _structure(dataset)

    return structure.residuals(np.asarray(beta, dtype=float), ties)


def _small_score(score: np.ndarray, loglik: float) -> bool:
    return np.linalg.norm(score) < 1e-6 * (1 + abs(loglik))


def fit_cox(dataset: SurvivalDataset, options: FitOptions = None) -> CoxFit:
    """Fit a Cox model to a dataset.

    Iteration stops when the relative change of the log partial
    likelihood drops below the tolerance. Hitting the iteration cap
    returns a fit with `converged=False`. A rank-deficient design raises
    `SingularInformation`.
    """

    options = options or default_options()

    if dataset.events == 0:
        raise NoEvents(f"{dataset.name}: no events.")

    structure, terms = _structure(dataset)
    beta = np.zeros(structure.p)
    loglik, score, information = structure.evaluate(beta, options.ties)
    converged = False
    iteration = 0

    while iteration < options.max_iterations:
        iteration += 1
        step = linalg.solve(linalg.factorize(information), score)
        accepted = None

        for halving in range(options.max_halvings + 1):
            candidate = beta + step * 0.5**halving

            try:
                result = structure.evaluate(candidate, options.ties)
            except NumericOverflow:
                continue

            if result[0] >= loglik:
                accepted = candidate, result
                break

        if accepted is None:
            # no ascent along the Newton direction
            converged = bool(_small_score(score, loglik))
            break

        previous = loglik
        beta, (loglik, score, information) = accepted

        if abs(loglik - previous) <= options.tolerance * abs(loglik):
            converged = True
            break

    if not converged:
        logger.warning(
            f"{dataset.name}: Cox fit did not converge in {iteration} iterations"
        )

    return _make_fit(
        structure, terms, beta, loglik, information, converged, iteration, options
    )


def _make_fit(
    structure, terms, beta, loglik, information, converged, iterations, options
):
    try:
        covariance = linalg.inverse(linalg.factorize(information))
    except SingularInformation:
        if converged:
            raise
        covariance = np.full_like(information, np.nan)

    se = np.sqrt(np.diag(covariance))

    if converged:
        z, p = wald_test(beta, se)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            z = beta / se
        p = np.full_like(beta, np.nan)

    with np.errstate(over="ignore"):
        hr = np.exp(beta)

    dfbeta = None
    if converged:
        dfbeta = structure.residuals(beta, options.ties) @ covariance

    return CoxFit(
        terms=terms,
        beta=beta,
        covariance=covariance,
        se=se,
        wald_z=z,
        p_value=p,
        hr=hr,
        log_partial_likelihood=loglik,
        converged=converged,
        iterations=iterations,
        dfbeta=dfbeta,
        ties=options.ties,
    )


def compute_dfbeta(fit: CoxFit, dataset: SurvivalDataset) -> np.ndarray:
    """Approximate change of the coefficients from deleting each subject.

    Row i is the score residual of subject i times the covariance, n x p.
    """

    if not fit.converged:
        raise NotConverged()

    return score_residuals(dataset, fit.beta, fit.ties) @ fit.covariance


def linear_predictor(
    fit: CoxFit, data: Union[SurvivalDataset, np.ndarray], terms: Optional[tuple] = None
) -> np.ndarray:
    """Risk scores x' beta; higher means earlier expected event."""

    if isinstance(data, SurvivalDataset):
        matrix, terms = design_matrix(data.X, data.specs)
    else:
        matrix = np.asarray(data, dtype=float)

    if terms is not None and tuple(terms) != tuple(fit.terms):
        raise ValueError(f"terms {terms} do not match the fit's {fit.terms}")

    return matrix @ fit.beta
