"""
Logistic regression by iteratively reweighted least squares.
"""

import logging
from typing import Sequence

import numpy as np
from scipy import special

from .. import settings
from ..exceptions import SingularInformation
from ..structures import FitOptions, GlmFit
from ..utils import wald_test
from . import linalg
from .cox import default_options


logger = logging.getLogger(settings.LOGGER_NAME)

# |eta| beyond this means fitted probabilities numerically 0 or 1
SEPARATION_THRESHOLD = 30.0

# keeps the relative deviance change defined as the deviance goes to 0
DEVIANCE_OFFSET = 0.1


def _deviance(eta: np.ndarray, response: np.ndarray) -> float:
    return float(2 * np.sum(np.logaddexp(0, eta) - response * eta))


def _separated(eta: np.ndarray) -> bool:
    return bool(np.abs(eta).max(initial=0.0) > SEPARATION_THRESHOLD)


def fit_logistic(
    design: np.ndarray,
    response: np.ndarray,
    options: FitOptions = None,
    terms: Sequence[str] = None,
) -> GlmFit:
    """Fit a logistic regression of a 0/1 response on a design matrix.

    No intercept is added; the design carries its own constant or dummy
    columns. Complete or quasi-complete separation is reported as a fit with
    `converged=False` and `separated=True`, never raised.
    """

    options = options or default_options()
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    m, d = design.shape

    if d < 1 or m < d:
        raise ValueError(f"design of shape {design.shape} cannot be fitted")

    terms = tuple(terms) if terms is not None else tuple(f"x{j}" for j in range(d))
    beta = np.zeros(d)
    eta = design @ beta
    deviance = _deviance(eta, response)
    converged = False
    iteration = 0

    while iteration < options.max_iterations:
        iteration += 1
        mu = special.expit(eta)
        score = design.T @ (response - mu)
        information = design.T @ (design * (mu * (1 - mu))[:, None])

        try:
            step = linalg.solve(linalg.factorize(information), score)
        except SingularInformation:
            if _separated(eta):
                break
            raise

        accepted = None

        for halving in range(options.max_halvings + 1):
            candidate = beta + step * 0.5**halving
            candidate_eta = design @ candidate
            candidate_deviance = _deviance(candidate_eta, response)

            if candidate_deviance <= deviance:
                accepted = candidate, candidate_eta, candidate_deviance
                break

        if accepted is None:
            # no descent along the Newton direction
            converged = bool(np.linalg.norm(score) < 1e-6 * (1 + deviance / 2))
            break

        previous = deviance
        beta, eta, deviance = accepted

        change = abs(deviance - previous) / (abs(deviance) + DEVIANCE_OFFSET)
        if change < options.tolerance:
            converged = True
            break

    separated = _separated(eta)
    if separated:
        logger.warning("Logistic fit: separation detected")
        converged = False
    elif not converged:
        logger.warning(f"Logistic fit did not converge in {iteration} iterations")

    return _make_fit(
        design, terms, beta, eta, deviance, converged, separated, iteration
    )


def _make_fit(design, terms, beta, eta, deviance, converged, separated, iterations):
    mu = special.expit(eta)
    information = design.T @ (design * (mu * (1 - mu))[:, None])

    try:
        covariance = linalg.inverse(linalg.factorize(information))
    except SingularInformation:
        if converged:
            raise
        covariance = np.full_like(information, np.nan)

    se = np.sqrt(np.diag(covariance))

    if converged:
        _, p = wald_test(beta, se)
    else:
        p = np.full_like(beta, np.nan)

    return GlmFit(
        terms=terms,
        coefficients=beta,
        covariance=covariance,
        se=se,
        p_value=p,
        deviance=deviance,
        log_likelihood=-deviance / 2,
        converged=converged,
        separated=separated,
        iterations=iterations,
    )


def predict_linear(fit: GlmFit, design: np.ndarray) -> np.ndarray:
    return np.asarray(design, dtype=float) @ fit.coefficients
