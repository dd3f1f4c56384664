import cmath
import math
from pathlib import Path

import pytest

from caisson.expsum import ExpSum
from caisson.scalars import ExtScalar, RealBasis
from caisson.support_lattice import LiftRelation, SupportMatrix

DATA = Path(__file__).parent / "data"

NONIC_A = [[1, 1, 1, 1], [0, 3, 4, 9]]
NONIC_B = [[1, 1, 1, 1], [0, 3, 4, 9], [0, 6, 2, 0]]
SEXTIC_A = [[1, 1, 1, 1, 1], [0, 2, 3, 4, 6], [0, 2, 3, 6, 4]]
SEXTIC_B = SEXTIC_A + [[0, 4, 1, 0, 0]]


def polar(mod: float, arg_pi: float) -> complex:
    return cmath.rect(mod, math.pi * arg_pi)


def nonic(c: complex) -> ExpSum:
    """1 + w^3 + c w^4 + w^9"""
    return ExpSum(SupportMatrix.from_rationals(NONIC_A), (1, 1, c, 1))


def sextic(c: complex) -> ExpSum:
    return ExpSum(SupportMatrix.from_rationals(SEXTIC_A), (1, 1, c, 1, 1))


@pytest.fixture
def pi_basis():
    return RealBasis.with_pi()


@pytest.fixture
def irrational_support(pi_basis):
    """[[1, 1, 1], [0, 1, π]]"""
    one = ExtScalar.from_rational(1, pi_basis)
    zero = ExtScalar.zero(pi_basis)
    pi = ExtScalar((0, 1), pi_basis)
    return SupportMatrix(((one, one, one), (zero, one, pi)), pi_basis)


@pytest.fixture
def irrational_lift(pi_basis):
    return SupportMatrix.from_rationals([[1, 1, 1], [0, 1, 0], [0, 0, 1]], pi_basis)


@pytest.fixture
def nonic_lift():
    return LiftRelation.from_pair(
        SupportMatrix.from_rationals(NONIC_A), SupportMatrix.from_rationals(NONIC_B)
    )


@pytest.fixture
def sextic_lift():
    return LiftRelation.from_pair(
        SupportMatrix.from_rationals(SEXTIC_A), SupportMatrix.from_rationals(SEXTIC_B)
    )


@pytest.fixture
def binomial():
    """1 + w"""
    return ExpSum(SupportMatrix.from_rationals([[1, 1], [0, 1]]), (1, 1))


@pytest.fixture
def plane():
    """1 + w1 + w2"""
    return ExpSum(SupportMatrix.from_rationals([[1, 1, 1], [0, 1, 0], [0, 0, 1]]), (1, 1, 1))


@pytest.fixture
def problem_path():
    def path(name: str) -> Path:
        return DATA / "problems" / name

    return path
