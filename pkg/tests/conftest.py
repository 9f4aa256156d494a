import random
from fractions import Fraction

import pytest

from revlin.arena import Arena


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture
def arena():
    return Arena()


def F(*args):
    return Fraction(*args)
