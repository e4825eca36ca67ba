import hashlib
import math
import struct
import unittest

import numpy as np

from dpsurv import settings
from dpsurv.simulation.runner import dataset_index, epsilon_index, method_index
from dpsurv.simulation.seeding import (
    STREAM_PREFIX,
    derive_key,
    generator,
    split_context,
)
from dpsurv.structures import MethodTag, SeedContext


class TestStreams(unittest.TestCase):
    def test_key(self):
        context = SeedContext(42, 1, 2, 3, 4)
        digest = hashlib.sha256(
            STREAM_PREFIX + struct.pack("<5q", 42, 1, 2, 3, 4)
        ).digest()

        self.assertEqual(derive_key(context), int.from_bytes(digest[:16], "little"))

    def test_replay(self):
        context = SeedContext(42, 0, 1, 5, 17)

        first = generator(context).random(5)
        second = context.generator().random(5)

        np.testing.assert_array_equal(first, second)

    def test_distinct_streams(self):
        contexts = [
            SeedContext(42, d, m, e, b)
            for d in range(2)
            for m in range(4)
            for e in range(3)
            for b in range(3)
        ]
        keys = {derive_key(c) for c in contexts}
        draws = {c.generator().random() for c in contexts}

        self.assertEqual(len(keys), len(contexts))
        self.assertEqual(len(draws), len(contexts))

    def test_split_stream(self):
        context = split_context(42, 3, 7)

        self.assertEqual(context.method_index, -1)
        self.assertEqual(context.epsilon_index, -1)
        self.assertNotIn(
            derive_key(context),
            {derive_key(SeedContext(42, 3, m, 0, 7)) for m in range(4)},
        )


class TestIndices(unittest.TestCase):
    def test_dataset_index(self):
        self.assertEqual(dataset_index("lung", 5), 0)
        self.assertEqual(dataset_index("flchain", 0), 4)
        self.assertEqual(dataset_index("mine.csv", 2), 7)

    def test_epsilon_index(self):
        self.assertEqual(epsilon_index(settings.EPSILON_GRID[0]), 0)
        self.assertEqual(
            epsilon_index(math.inf), settings.EPSILON_GRID.index(math.inf)
        )
        # off-grid values are keyed by their bits
        self.assertNotEqual(epsilon_index(0.3), epsilon_index(0.30000000000000004))

    def test_method_index(self):
        self.assertEqual([method_index(tag) for tag in MethodTag], [0, 1, 2, 3])


if __name__ == "__main__":
    unittest.main()
