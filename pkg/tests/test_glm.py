import math
import unittest

import numpy as np
from scipy import special, stats

from dpsurv.models.glm import fit_logistic, predict_linear
from dpsurv.structures import FitOptions


try:
    import statsmodels.api as sm
except ImportError:  # development requirement only
    sm = None


def _two_groups(n0=10, events0=3, n1=10, events1=7):
    x = np.repeat([0.0, 1.0], [n0, n1])
    y = np.concatenate(
        (
            np.repeat([1.0, 0.0], [events0, n0 - events0]),
            np.repeat([1.0, 0.0], [events1, n1 - events1]),
        )
    )
    design = np.column_stack((np.ones_like(x), x))

    return design, y


class TestFitLogistic(unittest.TestCase):
    def test_closed_form(self):
        design, y = _two_groups()
        fit = fit_logistic(design, y, terms=("intercept", "x"))

        p0, p1 = 0.3, 0.7
        self.assertTrue(fit.converged)
        self.assertFalse(fit.separated)
        self.assertAlmostEqual(fit.coefficient("intercept"), special.logit(p0))
        self.assertAlmostEqual(
            fit.coefficient("x"), special.logit(p1) - special.logit(p0)
        )

        se = math.sqrt(1 / (10 * p0 * (1 - p0)) + 1 / (10 * p1 * (1 - p1)))
        self.assertAlmostEqual(fit.se[1], se, places=6)
        self.assertAlmostEqual(
            fit.p_value[1], special.erfc(abs(fit.coefficients[1] / se) / math.sqrt(2))
        )

        loglik = 3 * math.log(p0) + 7 * math.log(1 - p0)
        loglik += 7 * math.log(p1) + 3 * math.log(1 - p1)
        deviance = -2 * loglik
        self.assertAlmostEqual(fit.deviance, deviance, places=8)
        self.assertAlmostEqual(fit.log_likelihood, -deviance / 2, places=8)

    def test_score_vanishes(self):
        rng = np.random.default_rng(0)
        design = np.column_stack((np.ones(300), rng.normal(size=(300, 2))))
        y = (rng.random(300) < special.expit(design @ [-0.5, 1.0, -0.7])).astype(float)

        fit = fit_logistic(design, y)
        score = design.T @ (y - special.expit(predict_linear(fit, design)))

        self.assertTrue(fit.converged)
        self.assertEqual(fit.terms, ("x0", "x1", "x2"))
        self.assertLess(np.abs(score).max(), 1e-6)

    def test_deviance_decreases(self):
        rng = np.random.default_rng(2)
        design = np.column_stack((np.ones(300), rng.normal(size=(300, 2))))
        y = (rng.random(300) < special.expit(design @ [0.4, 1.5, -1.0])).astype(float)
        deviances = [300 * 2 * math.log(2)]

        for iterations in range(1, 13):
            fit = fit_logistic(design, y, FitOptions(max_iterations=iterations))
            deviances.append(fit.deviance)

        self.assertTrue(fit.converged)
        for previous, current in zip(deviances, deviances[1:]):
            self.assertLessEqual(current, previous)
        self.assertLess(deviances[-1], deviances[0])

    def test_null_p_values_uniform(self):
        rng = np.random.default_rng(2024)
        p_values = []

        for _ in range(300):
            design = np.column_stack((np.ones(200), rng.normal(size=200)))
            y = (rng.random(200) < 0.5).astype(float)
            p_values.append(fit_logistic(design, y).p_value[1])

        self.assertGreater(stats.kstest(p_values, "uniform").pvalue, 0.01)

    def test_intercept_only(self):
        y = np.repeat([1.0, 0.0], [25, 75])
        fit = fit_logistic(np.ones((100, 1)), y)

        self.assertAlmostEqual(fit.coefficients[0], math.log(1 / 3), places=8)

    @unittest.skipIf(sm is None, "statsmodels is not installed")
    def test_matches_statsmodels(self):
        rng = np.random.default_rng(1)
        design = np.column_stack((np.ones(400), rng.normal(size=(400, 3))))
        eta = design @ [0.2, 0.8, -0.4, 0.0]
        y = (rng.random(400) < special.expit(eta)).astype(float)

        fit = fit_logistic(design, y)
        reference = sm.GLM(y, design, family=sm.families.Binomial()).fit()

        np.testing.assert_allclose(fit.coefficients, reference.params, rtol=1e-6)
        np.testing.assert_allclose(fit.se, reference.bse, rtol=1e-5)
        self.assertAlmostEqual(fit.deviance, reference.deviance, places=6)

    def test_separation(self):
        x = np.linspace(-1, 1, 20)
        design = np.column_stack((np.ones(20), x))
        y = (x > 0).astype(float)

        with self.assertLogs("dpsurv", level="WARNING"):
            fit = fit_logistic(design, y, FitOptions(max_iterations=50))

        self.assertTrue(fit.separated)
        self.assertFalse(fit.converged)
        self.assertTrue(np.all(np.isnan(fit.p_value)))

    def test_invalid_design(self):
        with self.assertRaises(ValueError):
            fit_logistic(np.ones((1, 2)), np.ones(1))


if __name__ == "__main__":
    unittest.main()
