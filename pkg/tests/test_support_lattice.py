from fractions import Fraction

import numpy as np
import pytest

from caisson.exceptions import NotALift, NotPseudoHomogeneous, ShapeMismatch, SupportMismatch
from caisson.scalars import ExtScalar
from caisson.support_lattice import (
    LiftRelation,
    SupportMatrix,
    factorize,
    identity_support,
    is_lift,
    lattice_meet_join,
    minimal_rational_lift,
    pivot_row,
    pseudo_homogeneity_form,
    rank_r,
    rank_rho,
    rhat,
    row_space_equal,
    top_support,
)

from .conftest import NONIC_A, NONIC_B


def support(rows):
    return SupportMatrix.from_rationals(rows)


def subspace(rows, basis=None):
    return SupportMatrix.from_rationals(rows, basis, lattice_class=True)


class TestRanks:
    def test_irrational_support(self, irrational_support):
        assert rank_r(irrational_support) == 2
        assert rhat(irrational_support) == 1
        assert rank_rho(irrational_support) == 3

    def test_rational_support(self):
        a = support(NONIC_A)
        assert rank_r(a) == 2
        assert rhat(a) == 2
        assert rank_rho(a) == 2


@pytest.mark.parametrize(
    ["rows", "xi", "pivot"],
    [
        ([[1, 1], [0, 1]], (1, 0), 0),
        ([[2, 2], [0, 1]], (Fraction(1, 2), 0), 0),
        ([[0, 1, 2], [1, 1, 1]], (0, 1), 1),
        ([[1, 2, 3], [0, -1, -2]], (1, 1), 0),
    ],
)
def test_pseudo_homogeneity_form(rows, xi, pivot):
    a = support(rows)
    assert tuple(e.rational_value() for e in pseudo_homogeneity_form(a)) == xi
    assert pivot_row(a) == pivot


def test_not_pseudo_homogeneous():
    with pytest.raises(NotPseudoHomogeneous):
        support([[0, 1], [0, 2]])
    # affine matrices skip the check
    assert SupportMatrix.from_rationals([[0, 1]], affine=True).rows == 1


def test_ragged_rows():
    with pytest.raises(ShapeMismatch):
        support([[1, 1], [0]])


def test_repeated_columns():
    with pytest.raises(SupportMismatch):
        support([[1, 1, 1], [0, 1, 1]])
    assert not subspace([[1, 1, 1], [0, 1, 1]]).has_distinct_columns()
    assert subspace([[1, 1, 1]]) == top_support(3)


class TestLift:
    def test_is_lift(self, irrational_support, irrational_lift):
        assert is_lift(irrational_lift, irrational_support)
        assert not is_lift(irrational_support, irrational_lift)

    def test_factor(self, pi_basis, irrational_support, irrational_lift):
        factor = factorize(irrational_support, irrational_lift)
        one = ExtScalar.from_rational(1, pi_basis)
        zero = ExtScalar.zero(pi_basis)
        assert factor == ((one, zero, zero), (zero, one, ExtScalar((0, 1), pi_basis)))

    def test_factor_not_a_lift(self):
        with pytest.raises(NotALift):
            factorize(support([[1, 1, 1], [0, 1, 2]]), subspace([[1, 1, 1], [0, 0, 1]]))

    def test_relation_checks_factor(self, irrational_support, irrational_lift):
        identity = LiftRelation.identity(irrational_lift).factor
        with pytest.raises(NotALift):
            LiftRelation(base=irrational_support, lift=irrational_lift, factor=identity[:2])

    def test_embed(self, nonic_lift):
        assert nonic_lift.factor_approximation().tolist() == [[1, 0, 0], [0, 1, 0]]
        np.testing.assert_allclose(nonic_lift.embed([2.0, -1.0]), [2.0, -1.0, 0.0])
        with pytest.raises(ShapeMismatch):
            nonic_lift.embed([1.0, 2.0, 3.0])

    def test_identity_lift(self):
        a = support(NONIC_B)
        relation = LiftRelation.identity(a)
        np.testing.assert_allclose(relation.embed([1, 2, 3]), [1, 2, 3])


class TestMinimalRationalLift:
    def test_irrational(self, irrational_support, irrational_lift):
        relation = minimal_rational_lift(irrational_support)
        assert relation.lift.is_rational()
        assert row_space_equal(relation.lift, irrational_lift)

    def test_rational_support_is_its_own_minimal_lift(self):
        a = support(NONIC_A)
        assert row_space_equal(minimal_rational_lift(a).lift, a)

    def test_minimal_among_rational_lifts(self, pi_basis, irrational_support):
        relation = minimal_rational_lift(irrational_support)
        assert is_lift(identity_support(3, pi_basis), relation.lift)


class TestLattice:
    def test_meet_and_join(self):
        first = subspace([[1, 1, 1], [0, 1, 0]])
        second = subspace([[1, 1, 1], [0, 0, 1]])
        meet, join = lattice_meet_join(first, second)
        assert row_space_equal(meet, identity_support(3))
        assert row_space_equal(join, top_support(3))

    def test_comparable_pair(self):
        a = support(NONIC_A)
        b = support(NONIC_B)
        meet, join = lattice_meet_join(a, b)
        assert row_space_equal(meet, b)
        assert row_space_equal(join, a)

    def test_irrational_join(self, irrational_support, irrational_lift):
        meet, join = lattice_meet_join(irrational_support, irrational_lift)
        assert row_space_equal(meet, irrational_lift)
        assert row_space_equal(join, irrational_support)

    @pytest.mark.parametrize("seed", range(5))
    def test_absorption(self, seed):
        rng = np.random.default_rng(seed)
        ones = [1] * 5
        first = subspace([ones, *rng.integers(-3, 4, size=(2, 5)).tolist()])
        second = subspace([ones, *rng.integers(-3, 4, size=(1, 5)).tolist()])
        meet, join = lattice_meet_join(first, second)
        assert is_lift(meet, first) and is_lift(meet, second)
        assert is_lift(first, join) and is_lift(second, join)
        assert row_space_equal(lattice_meet_join(first, meet)[1], first)
        assert row_space_equal(lattice_meet_join(first, join)[0], first)

    def test_bounds(self):
        a = support(NONIC_A)
        assert is_lift(identity_support(4), a)
        assert is_lift(a, top_support(4))


def random_rows(rng, size, count):
    return [[1] * size, *rng.integers(-3, 4, size=(count, size)).tolist()]


@pytest.mark.slow
class TestLatticeLaws:
    @pytest.mark.parametrize("seed", range(500))
    def test_laws(self, seed):
        rng = np.random.default_rng(seed)
        size = int(rng.integers(3, 9))
        low = random_rows(rng, size, int(rng.integers(0, 3)))
        middle = low + rng.integers(-3, 4, size=(1, size)).tolist()
        high = middle + rng.integers(-3, 4, size=(2, size)).tolist()
        # Row(first) ⊆ Row(third) ⊆ Row(fourth)
        first, third, fourth = subspace(low), subspace(middle), subspace(high)
        second = subspace(random_rows(rng, size, int(rng.integers(0, 3))))

        assert rank_r(first) + rhat(first) == size
        assert rank_rho(first) == rank_r(first)
        assert rank_rho(fourth) >= rank_rho(third) >= rank_rho(first)

        meet, join = lattice_meet_join(first, second)
        assert rhat(meet) + rhat(join) == rhat(first) + rhat(second)

        left = lattice_meet_join(lattice_meet_join(first, second)[0], third)[1]
        right = lattice_meet_join(first, lattice_meet_join(second, third)[1])[0]
        assert row_space_equal(left, right)

        assert is_lift(first, first)
        assert is_lift(third, first) and is_lift(fourth, third)
        assert is_lift(fourth, first)
        if is_lift(first, second) and is_lift(second, first):
            assert row_space_equal(first, second)
        scaled = subspace([[2 * e for e in row] for row in reversed(low)])
        assert is_lift(scaled, first) and is_lift(first, scaled)
        assert row_space_equal(scaled, first)


def irrational_pair(rng, basis, size):
    """A rational matrix B and A = T B with T carrying π"""
    lift_rows = random_rows(rng, size, 3)
    rows = [[ExtScalar.from_rational(1, basis)] * size]
    for _ in range(2):
        p = rng.integers(-2, 3, size=4).tolist()
        q = rng.integers(-2, 3, size=4).tolist()
        rows.append(
            [
                ExtScalar(
                    (
                        sum(p[k] * lift_rows[k][j] for k in range(4)),
                        sum(q[k] * lift_rows[k][j] for k in range(4)),
                    ),
                    basis,
                )
                for j in range(size)
            ]
        )
    return SupportMatrix(tuple(tuple(r) for r in rows), basis, lattice_class=True), subspace(
        lift_rows, basis
    )


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_minimal_lift_is_universal(pi_basis, seed):
    rng = np.random.default_rng(seed)
    base, lift = irrational_pair(rng, pi_basis, int(rng.integers(4, 8)))
    assert is_lift(lift, base)
    assert rank_rho(lift) >= rank_rho(base)
    assert rank_rho(base) >= rank_r(base)

    minimal = minimal_rational_lift(base)
    assert minimal.lift.is_rational()
    assert rank_r(minimal.lift) == rank_rho(base)
    assert is_lift(lift, minimal.lift)
    again = minimal_rational_lift(minimal.lift)
    assert row_space_equal(again.lift, minimal.lift)
