import importlib
import unittest
from unittest import mock

import numpy as np

from dpsurv.exceptions import NoComparablePairs
from dpsurv.models import concordance


concordance_module = importlib.import_module("dpsurv.models.concordance")


def brute_force(times, deltas, risk):
    comparable = 0
    score = 0.0

    for i in range(len(times)):
        for j in range(len(times)):
            if deltas[i] == 1 and times[i] < times[j]:
                comparable += 1
                if risk[i] > risk[j]:
                    score += 1
                elif risk[i] == risk[j]:
                    score += 0.5

    return score / comparable


class TestConcordance(unittest.TestCase):
    def test_perfect_and_reversed(self):
        times = np.array([1.0, 2.0, 3.0, 4.0])
        deltas = np.array([1, 1, 1, 0])
        risk = np.array([4.0, 3.0, 2.0, 1.0])

        self.assertEqual(concordance(times, deltas, risk), 1.0)
        self.assertEqual(concordance(times, deltas, -risk), 0.0)
        self.assertEqual(concordance(times, deltas, np.zeros(4)), 0.5)

    def test_brute_force(self):
        rng = np.random.default_rng(0)

        for n in (2, 5, 17, 50):
            # rounded values give tied times and tied scores
            times = np.round(rng.exponential(size=n), 1) + 0.1
            deltas = rng.integers(0, 2, n)
            deltas[0] = 1
            times[0] = times.min() - 0.05
            risk = np.round(rng.normal(size=n), 1)

            self.assertEqual(
                concordance(times, deltas, risk), brute_force(times, deltas, risk)
            )

    def test_blocks(self):
        rng = np.random.default_rng(1)
        times = rng.exponential(size=40)
        deltas = rng.integers(0, 2, 40)
        deltas[np.argmin(times)] = 1
        risk = rng.normal(size=40)

        expected = concordance(times, deltas, risk)

        with mock.patch.object(concordance_module, "BLOCK_SIZE", 3):
            self.assertEqual(concordance(times, deltas, risk), expected)

    def test_tied_times_are_not_comparable(self):
        times = np.array([1.0, 1.0, 2.0])
        deltas = np.array([1, 1, 0])
        risk = np.array([1.0, 0.0, 0.5])

        # only (0, 2) and (1, 2) are comparable
        self.assertEqual(concordance(times, deltas, risk), 0.5)

    def test_no_comparable_pairs(self):
        with self.assertRaises(NoComparablePairs):
            concordance([1.0, 2.0], [0, 0], [0.1, 0.2])

        with self.assertRaises(NoComparablePairs):
            concordance([1.0], [1], [0.1])

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            concordance([1.0, 2.0], [1, 0], [0.1])


if __name__ == "__main__":
    unittest.main()
