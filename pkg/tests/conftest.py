"""Shared test helpers: seeded RNG and small-instance factories."""

import random

import pytest

from seqsched import Instance
from seqsched.verify import random_instance

__all__ = ["random_instance"]


@pytest.fixture
def rng() -> random.Random:
    """Deterministic RNG; every test that samples gets the same stream."""
    return random.Random(0xC0FFEE)


@pytest.fixture
def two_by_two() -> Instance:
    """Tiny well-understood instance: opt 1 via the anti-diagonal."""
    return Instance.from_rows([[2, 1], [1, 2]])
