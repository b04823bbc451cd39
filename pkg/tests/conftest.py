"""Shared fixtures for the lvanish test suite."""

import random
from fractions import Fraction
from pathlib import Path

import pytest

from lvanish.localpoly import HeckeSpec
from lvanish.qforms import GL2Matrix

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"

GENERATORS_9 = [
    GL2Matrix(1, 1, 0, 1),
    GL2Matrix(4, -1, 9, -2),
    GL2Matrix(7, -4, 9, -5),
    GL2Matrix(-1, 0, 0, -1),
]

GENERATORS_25 = [
    GL2Matrix(1, 1, 0, 1),
    GL2Matrix(6, -1, 25, -4),
    GL2Matrix(7, -2, 25, -7),
    GL2Matrix(11, -4, 25, -9),
    GL2Matrix(16, -9, 25, -14),
    GL2Matrix(18, -13, 25, -18),
    GL2Matrix(21, -16, 25, -19),
]

HECKE_25 = HeckeSpec.of([(7, 6), (2, 4)])


def F(s: str) -> Fraction:
    return Fraction(s)


@pytest.fixture
def rng():
    return random.Random(20240517)


@pytest.fixture
def generators_9():
    return list(GENERATORS_9)


@pytest.fixture
def generators_25():
    return list(GENERATORS_25)


def random_rational(rng: random.Random, max_den: int, span: int = 3) -> Fraction:
    v = rng.randint(1, max_den)
    u = rng.randint(-span * v, span * v)
    return Fraction(u, v)
