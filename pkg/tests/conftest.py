from __future__ import annotations

import random

import pytest

from rperm.algebra import Poly, var


@pytest.fixture
def rng():
    return random.Random(1234)


def X(*idx):
    return Poly.variable(var("X", *idx))


def Y(*idx):
    return Poly.variable(var("Y", *idx))
