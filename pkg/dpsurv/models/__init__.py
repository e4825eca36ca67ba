from .concordance import concordance
from .cox import (
    compute_dfbeta,
    fit_cox,
    linear_predictor,
    partial_loglik_and_derivatives,
    score_residuals,
)
from .glm import fit_logistic, predict_linear
