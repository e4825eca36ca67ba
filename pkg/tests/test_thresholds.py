import math
import unittest

from dpsurv.exceptions import IncompleteGrid
from dpsurv.simulation.thresholds import (
    NOT_APPLICABLE,
    first_epsilon,
    permanent_epsilon,
    thresholds,
)
from dpsurv.structures import MetricSummary


GRID = (1.0, 10.0, 100.0, math.inf)


def _summary(epsilon, lsr, fpr, dc, method="phase1", dataset="toy"):
    return MetricSummary(
        dataset=dataset,
        method=method,
        epsilon=epsilon,
        iterations=10,
        mean_lsr=lsr,
        mean_fpr=fpr,
        train_c_mean=0.7,
        train_c_sd=0.01,
        test_c_mean=0.65,
        test_c_sd=0.01,
        delta_c=dc,
        nonconverged_rate=0.0,
    )


def _curve(lsr, fpr, dc, **kwargs):
    """Summaries over GRID; the infinite budget is always clean."""

    return [
        _summary(eps, *values, **kwargs)
        for eps, values in zip(GRID, zip(lsr + (0.0,), fpr + (0.0,), dc + (0.0,)))
    ]


class TestSearch(unittest.TestCase):
    def test_first_epsilon(self):
        summaries = _curve((0.9, 0.4, 0.05), (0, 0, 0), (0, 0, 0))

        self.assertEqual(
            first_epsilon(summaries, lambda s: s.mean_lsr, 0.5, ">100"), "10"
        )
        self.assertEqual(
            first_epsilon(summaries, lambda s: s.mean_lsr, 0.01, ">100"), ">100"
        )

    def test_nan_never_meets(self):
        summaries = _curve((math.nan, 0.2, 0.1), (0, 0, 0), (0, 0, 0))

        self.assertEqual(
            first_epsilon(summaries, lambda s: s.mean_lsr, 0.5, ">100"), "10"
        )

    def test_permanent_epsilon(self):
        # dips below the limit at eps=1 but rises again at eps=10
        summaries = _curve((0, 0, 0), (0.05, 0.3, 0.08), (0, 0, 0))

        self.assertEqual(
            permanent_epsilon(summaries, lambda s: s.mean_fpr, 0.1, ">100"), "100"
        )
        self.assertEqual(
            first_epsilon(summaries, lambda s: s.mean_fpr, 0.1, ">100"), "1"
        )


class TestThresholds(unittest.TestCase):
    def test_row(self):
        summaries = _curve((0.95, 0.45, 0.08), (0.05, 0.2, 0.09), (0.2, 0.04, 0.01))

        (row,) = thresholds(summaries, GRID)

        self.assertEqual(row.dataset, "toy")
        self.assertEqual(row.eps_dc05, "10")
        self.assertEqual(row.eps_lsr50, "10")
        self.assertEqual(row.eps_lsr10, "100")
        self.assertEqual(row.eps_fpr10, "100")

    def test_unmet(self):
        summaries = _curve((0.9, 0.8, 0.7), (0.3, 0.3, 0.3), (0.2, 0.2, 0.2))

        (row,) = thresholds(summaries, GRID)

        self.assertEqual(row.eps_dc05, ">100")
        self.assertEqual(row.eps_lsr50, ">100")
        self.assertEqual(row.eps_fpr10, ">100")

    def test_not_applicable(self):
        output = _curve((0.9, 0.5, 0.1), (0.3, 0.2, 0.1), (0, 0, 0), method="output")
        low_fpr = _curve((0.9, 0.5, 0.1), (0.05, 0.02, 0.0), (0, 0, 0))
        no_sets = _curve(
            (math.nan,) * 3, (math.nan,) * 3, (0, 0, 0), dataset="other"
        )

        rows = {
            (r.dataset, r.method): r
            for r in thresholds(output + no_sets, GRID)
        }

        self.assertEqual(rows[("toy", "output")].eps_fpr10, NOT_APPLICABLE)
        self.assertEqual(rows[("other", "phase1")].eps_lsr50, NOT_APPLICABLE)
        self.assertEqual(rows[("other", "phase1")].eps_fpr10, NOT_APPLICABLE)
        self.assertEqual(thresholds(low_fpr, GRID)[0].eps_fpr10, NOT_APPLICABLE)

    def test_rows_sorted(self):
        summaries = (
            _curve((0.1,) * 3, (0.0,) * 3, (0,) * 3, method="phase2", dataset="b")
            + _curve((0.1,) * 3, (0.0,) * 3, (0,) * 3, method="phase1", dataset="b")
            + _curve((0.1,) * 3, (0.0,) * 3, (0,) * 3, method="phase1", dataset="a")
        )

        rows = thresholds(summaries, GRID)

        self.assertEqual(
            [(r.dataset, r.method) for r in rows],
            [("a", "phase1"), ("b", "phase1"), ("b", "phase2")],
        )

    def test_incomplete_grid(self):
        summaries = _curve((0.1,) * 3, (0.0,) * 3, (0,) * 3)
        del summaries[1]

        with self.assertRaises(IncompleteGrid) as cm:
            thresholds(summaries, GRID)

        self.assertEqual(cm.exception.missing, [("toy", "phase1", "10")])
        self.assertEqual(cm.exception.exit_code, 2)
        self.assertIn("toy/phase1: eps=10", str(cm.exception))


if __name__ == "__main__":
    unittest.main()
