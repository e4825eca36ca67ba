"""
Counter-based random streams.

The stream of a work item is a pure function of five integers, so that
results do not depend on which worker runs an item or when:

  key = SHA-256(b"dpsurv/stream/v1" || int64 LE x 5)[:16]
  generator = numpy Generator(Philox(key=key as a little-endian integer))

The five integers are (base seed, dataset index, method index, epsilon
index, iteration). Distinct tuples give distinct 128-bit Philox keys.
"""

import hashlib
import struct

import numpy as np

from ..structures import SeedContext


STREAM_PREFIX = b"dpsurv/stream/v1"

# method and epsilon index of train/test split streams; splits depend on
# (dataset, iteration) only, so every method and epsilon sees the same B splits
SPLIT_STREAM = -1


def derive_key(context: SeedContext) -> int:
    """128-bit Philox key of a seed context."""

    packed = struct.pack(
        "<5q",
        context.base_seed,
        context.dataset_index,
        context.method_index,
        context.epsilon_index,
        context.iteration,
    )
    digest = hashlib.sha256(STREAM_PREFIX + packed).digest()

    return int.from_bytes(digest[:16], "little")


def generator(context: SeedContext) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_key(context)))


def split_context(base_seed: int, dataset_index: int, iteration: int) -> SeedContext:
    return SeedContext(
        base_seed=base_seed,
        dataset_index=dataset_index,
        method_index=SPLIT_STREAM,
        epsilon_index=SPLIT_STREAM,
        iteration=iteration,
    )
