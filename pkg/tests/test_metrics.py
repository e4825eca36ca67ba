import math
import unittest

import numpy as np

from dpsurv.exceptions import NoNonsignificantBaseline, NoSignificantBaseline
from dpsurv.metrics import (
    delta_c,
    fpr,
    hr_bias,
    lsr,
    nonconverged_rate,
    phase3_exclusions,
    summarize,
    summarize_condition,
)
from dpsurv.structures import CoxFit, GlmFit, MetricsConfig

from .misc import make_record


# a and b significant at the baseline, c not
CONFIG = MetricsConfig(
    baseline_p={"a": 0.001, "b": 0.02, "c": 0.4},
    baseline_hr={"a": 2.0, "b": 0.5, "c": 1.1},
)


def _fit_stub(cls, terms, p_value):
    """Fit object carrying only terms and p-values."""

    n = len(terms)
    fields = dict(terms=terms, covariance=np.eye(n), se=np.ones(n), p_value=p_value)

    if cls is CoxFit:
        return CoxFit(
            beta=np.zeros(n),
            wald_z=np.zeros(n),
            hr=np.ones(n),
            log_partial_likelihood=0.0,
            converged=True,
            iterations=1,
            **fields,
        )

    return GlmFit(
        coefficients=np.zeros(n),
        deviance=0.0,
        log_likelihood=0.0,
        converged=True,
        separated=False,
        iterations=1,
        **fields,
    )


class TestSignificanceRates(unittest.TestCase):
    def test_lsr_all_retained(self):
        records = [make_record([0.01, 0.001, 0.5], iteration=b) for b in range(4)]

        per_variable, mean = lsr(records, CONFIG)

        self.assertEqual(per_variable, {"a": 0.0, "b": 0.0})
        self.assertEqual(mean, 0.0)

    def test_lsr_counts_losses(self):
        records = [
            make_record([0.01, 0.2, 0.5]),
            make_record([0.3, 0.2, 0.5]),
            make_record([0.01, 0.04, 0.5]),
            make_record([0.01, 0.05, 0.5]),
        ]

        per_variable, mean = lsr(records, CONFIG)

        # p = 0.05 is not significant at alpha 0.05
        self.assertEqual(per_variable, {"a": 0.25, "b": 0.75})
        self.assertEqual(mean, 0.5)

    def test_nonconverged_counts_as_loss(self):
        records = [
            make_record([0.01, 0.01, 0.5]),
            make_record([math.nan] * 3, converged=False),
        ]

        per_variable, _ = lsr(records, CONFIG)
        fpr_per_variable, _ = fpr(records, CONFIG)

        self.assertEqual(per_variable, {"a": 0.5, "b": 0.5})
        self.assertEqual(fpr_per_variable, {"c": 0.0})
        self.assertEqual(nonconverged_rate(records), 0.5)

    def test_fpr(self):
        records = [
            make_record([0.01, 0.01, 0.01]),
            make_record([0.01, 0.01, 0.5]),
            make_record([0.01, 0.01, 0.5]),
            make_record([0.01, 0.01, 0.5]),
        ]

        per_variable, mean = fpr(records, CONFIG)

        self.assertEqual(per_variable, {"c": 0.25})
        self.assertEqual(mean, 0.25)

    def test_record_order(self):
        records = [
            make_record([0.01, 0.2, 0.01], iteration=0),
            make_record([0.3, 0.01, 0.5], iteration=1),
            make_record([0.01, 0.04, 0.5], iteration=2),
        ]

        self.assertEqual(lsr(records, CONFIG), lsr(records[::-1], CONFIG))
        self.assertEqual(fpr(records, CONFIG), fpr(records[::-1], CONFIG))

    def test_terms_matched_by_name(self):
        record = make_record([0.5, 0.01, 0.01], terms=("c", "b", "a"))

        per_variable, _ = lsr([record], CONFIG)

        self.assertEqual(per_variable, {"a": 0.0, "b": 0.0})

    def test_empty_baseline_sets(self):
        records = [make_record([0.01, 0.01, 0.01])]
        nothing = MetricsConfig(
            baseline_p={"a": 0.5, "b": 0.5, "c": 0.5},
            baseline_hr={"a": 1.0, "b": 1.0, "c": 1.0},
        )
        everything = MetricsConfig(
            baseline_p={"a": 0.01, "b": 0.01, "c": 0.01},
            baseline_hr={"a": 1.0, "b": 1.0, "c": 1.0},
        )

        with self.assertRaises(NoSignificantBaseline):
            lsr(records, nothing)

        with self.assertRaises(NoNonsignificantBaseline):
            fpr(records, everything)

    def test_exclusions(self):
        config = MetricsConfig(
            baseline_p=CONFIG.baseline_p,
            baseline_hr=CONFIG.baseline_hr,
            exclusions=frozenset({"b"}),
        )
        records = [make_record([0.01, 0.9, 0.5])]

        per_variable, _ = lsr(records, config)

        self.assertEqual(per_variable, {"a": 0.0})
        self.assertEqual(config.nonsignificant, ("c",))


class TestHazardRatioBias(unittest.TestCase):
    def test_unchanged(self):
        records = [make_record([0.01] * 3, hr=[2.0, 0.5, 1.1])]

        bias = hr_bias(records, CONFIG)

        for term in "abc":
            self.assertAlmostEqual(bias[term][0], 0.0)
            self.assertAlmostEqual(bias[term][1], 0.0)

    def test_doubled(self):
        records = [make_record([0.01] * 3, hr=[4.0, 1.0, 2.2])]

        bias = hr_bias(records, CONFIG)

        for term in "abc":
            self.assertAlmostEqual(bias[term][0], 1.0)
            self.assertAlmostEqual(bias[term][1], 1.0)

    def test_signed_and_absolute(self):
        records = [
            make_record([0.01] * 3, hr=[3.0, 0.5, 1.1]),
            make_record([0.01] * 3, hr=[1.0, 0.5, 1.1]),
            make_record([math.nan] * 3, hr=[math.nan] * 3, converged=False),
        ]

        bias = hr_bias(records, CONFIG)

        # +0.5 and -0.5 cancel in the signed mean only
        self.assertAlmostEqual(bias["a"][0], 0.0)
        self.assertAlmostEqual(bias["a"][1], 0.5)

    def test_nothing_converged(self):
        records = [make_record([math.nan] * 3, hr=[math.nan] * 3, converged=False)]

        bias = hr_bias(records, CONFIG)

        self.assertTrue(all(math.isnan(v) for pair in bias.values() for v in pair))


class TestConcordanceLoss(unittest.TestCase):
    def test_delta_c(self):
        records = [
            make_record([0.01] * 3, test_c=0.6),
            make_record([0.01] * 3, test_c=0.5),
            make_record([0.01] * 3, test_c=math.nan),
        ]

        self.assertAlmostEqual(delta_c(records, 0.65), 0.1)

    def test_against_itself(self):
        records = [make_record([0.01] * 3, test_c=c) for c in (0.6, 0.7)]

        self.assertAlmostEqual(delta_c(records, 0.65), 0.0)


class TestSummaries(unittest.TestCase):
    def test_summarize_condition(self):
        records = [
            make_record([0.01, 0.2, 0.01], train_c=0.8, test_c=0.6),
            make_record([0.01, 0.01, 0.5], train_c=0.7, test_c=0.7),
            make_record(
                [math.nan] * 3,
                hr=[math.nan] * 3,
                converged=False,
                train_c=math.nan,
                test_c=math.nan,
                separated=True,
            ),
        ]

        summary = summarize_condition(records, CONFIG, baseline_test_c=0.7)

        self.assertEqual(summary.iterations, 3)
        self.assertAlmostEqual(summary.mean_lsr, (1 / 3 + 2 / 3) / 2)
        self.assertAlmostEqual(summary.mean_fpr, 1 / 3)
        self.assertAlmostEqual(summary.train_c_mean, 0.75)
        self.assertAlmostEqual(summary.test_c_mean, 0.65)
        self.assertAlmostEqual(summary.delta_c, 0.05)
        self.assertAlmostEqual(summary.overfitting_gap, 0.1)
        self.assertAlmostEqual(summary.nonconverged_rate, 1 / 3)
        self.assertAlmostEqual(summary.separation_rate, 1 / 3)

        variables = {v.term: v for v in summary.variables}
        self.assertTrue(math.isnan(variables["a"].fpr))
        self.assertTrue(math.isnan(variables["c"].lsr))
        self.assertAlmostEqual(variables["c"].retained, 1 / 3)
        self.assertAlmostEqual(variables["b"].nonconverged, 1 / 3)

    def test_summarize_per_epsilon(self):
        records = [
            make_record([0.01, 0.01, 0.5], epsilon=math.inf, test_c=0.7),
            make_record([0.01, 0.01, 0.5], epsilon=math.inf, test_c=0.7, iteration=1),
            make_record([0.01, 0.5, 0.5], epsilon=1.0, test_c=0.55),
            make_record([0.5, 0.5, 0.5], epsilon=0.1, test_c=0.5),
        ]

        summaries = summarize(records, CONFIG)

        self.assertEqual([s.epsilon for s in summaries], [0.1, 1.0, math.inf])
        infinite = summaries[-1]
        self.assertEqual(infinite.mean_lsr, 0.0)
        self.assertEqual(infinite.mean_fpr, 0.0)
        self.assertEqual(infinite.delta_c, 0.0)
        self.assertAlmostEqual(summaries[1].delta_c, 0.15)

    def test_summarize_without_infinite_budget(self):
        summaries = summarize([make_record([0.01, 0.01, 0.5])], CONFIG)

        self.assertTrue(math.isnan(summaries[0].delta_c))


class TestExclusions(unittest.TestCase):
    def test_disagreement(self):
        cox = _fit_stub(CoxFit, ("x", "y", "z"), np.array([0.01, 0.2, 0.03]))
        glm = _fit_stub(
            GlmFit,
            ("interval1", "interval2", "x", "y", "z"),
            np.array([0.5, 0.5, 0.02, 0.04, 0.3]),
        )

        self.assertEqual(phase3_exclusions(cox, glm), frozenset({"y", "z"}))
        self.assertEqual(phase3_exclusions(cox, glm, alpha=0.5), frozenset())


if __name__ == "__main__":
    unittest.main()
