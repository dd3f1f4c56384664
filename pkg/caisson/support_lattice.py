"""
Support matrices, their row-space classes and the lattice of lifts.

A class is determined by the row space of a (1+n) x N matrix. B lifts A (written B ⊑ A) when
Row(A) ⊆ Row(B); then A = T B for some factor T.
"""

import functools
import logging
import typing
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import QQ

from . import exact
from .exceptions import (
    BasisMismatch,
    NotALift,
    NotPseudoHomogeneous,
    ProblemFileError,
    ShapeMismatch,
    SupportMismatch,
)
from .scalars import ExtScalar, RealBasis, to_rational

logger = logging.getLogger(__name__)

Grid = typing.Tuple[typing.Tuple[ExtScalar, ...], ...]


@dataclass(frozen=True)
class SupportMatrix:
    """
    Point configuration stored column-wise: column j is the exponent vector of the j-th term.

    Unless `affine` is set, the all-ones vector has to lie in the row span (pseudo-homogeneity),
    which is verified on construction. Affine matrices are the dehomogenized supports.
    Columns have to be distinct, except for matrices that only stand for their row space class
    (`lattice_class`, e.g. meets, joins and the top of the lattice).
    """

    entries: Grid
    basis: RealBasis
    affine: bool = False
    lattice_class: bool = field(default=False, compare=False)

    def __post_init__(self):
        entries = tuple(tuple(row) for row in self.entries)
        if not entries or not entries[0]:
            raise ShapeMismatch("A support matrix needs at least one row and one column")
        if any(len(row) != len(entries[0]) for row in entries):
            raise ShapeMismatch("Rows of a support matrix must have equal lengths")
        for row in entries:
            for value in row:
                if value.basis != self.basis:
                    raise BasisMismatch(
                        f"Entry {value} uses basis {value.basis.labels}, "
                        f"matrix uses {self.basis.labels}"
                    )
        object.__setattr__(self, "entries", entries)
        if not self.lattice_class and not self.has_distinct_columns():
            raise SupportMismatch("Support points must be distinct columns")
        if not self.affine:
            # raises NotPseudoHomogeneous
            pseudo_homogeneity_form(self)

    @classmethod
    def from_rationals(
        cls,
        rows: typing.Sequence[typing.Sequence[typing.Any]],
        basis: typing.Optional[RealBasis] = None,
        affine: bool = False,
        lattice_class: bool = False,
    ) -> "SupportMatrix":
        basis = basis or RealBasis.rational()
        return cls(
            tuple(
                tuple(ExtScalar.from_rational(to_rational(e), basis) for e in row) for row in rows
            ),
            basis,
            affine=affine,
            lattice_class=lattice_class,
        )

    @classmethod
    def from_json(
        cls, data: typing.Sequence[typing.Sequence[typing.Any]], basis: RealBasis, affine=False
    ) -> "SupportMatrix":
        if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
            raise ProblemFileError("A matrix must be a list of rows")
        return cls(
            tuple(tuple(ExtScalar.from_json(e, basis) for e in row) for row in data),
            basis,
            affine=affine,
        )

    def to_json(self) -> typing.List[typing.List[typing.List[str]]]:
        return [[e.to_json() for e in row] for row in self.entries]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def column(self, j: int) -> typing.Tuple[ExtScalar, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> typing.List[typing.Tuple[ExtScalar, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def has_distinct_columns(self) -> bool:
        return len(set(self.columns())) == self.cols

    def is_rational(self) -> bool:
        return all(e.is_rational() for row in self.entries for e in row)

    def rational_entries(self) -> typing.List[typing.List[Fraction]]:
        return [[e.rational_value() for e in row] for row in self.entries]

    def approximate(self) -> np.ndarray:
        return np.array([[e.approximate() for e in row] for row in self.entries], dtype=float)

    def exprs(self) -> exact.ExprGrid:
        return exact.grid_to_exprs(self.entries)

    def with_rows(self, rows: typing.Sequence[typing.Sequence[ExtScalar]], affine=None):
        return SupportMatrix(
            tuple(tuple(r) for r in rows),
            self.basis,
            affine=self.affine if affine is None else affine,
            lattice_class=self.lattice_class,
        )

    def without_row(self, index: int) -> "SupportMatrix":
        return self.with_rows(
            [row for i, row in enumerate(self.entries) if i != index], affine=True
        )

    def homogenized(self) -> "SupportMatrix":
        """Prepends the all-ones row"""
        ones = tuple(ExtScalar.from_rational(1, self.basis) for _ in range(self.cols))
        return self.with_rows((ones, *self.entries), affine=False)

    def __str__(self):
        return "\n".join(" ".join(str(e) for e in row) for row in self.entries)


@dataclass(frozen=True)
class LiftRelation:
    """The factorization A = T B together with the embedding x -> x T"""

    base: SupportMatrix
    lift: SupportMatrix
    factor: Grid

    def __post_init__(self):
        factor = tuple(tuple(row) for row in self.factor)
        object.__setattr__(self, "factor", factor)
        if self.base.cols != self.lift.cols:
            raise ShapeMismatch(
                f"Lift has {self.lift.cols} columns, support has {self.base.cols}"
            )
        if self.base.basis != self.lift.basis:
            raise BasisMismatch("Support and lift are declared over different bases")
        if len(factor) != self.base.rows or any(len(r) != self.lift.rows for r in factor):
            raise ShapeMismatch(
                f"Factor must be {self.base.rows}x{self.lift.rows}, "
                f"got {len(factor)}x{len(factor[0]) if factor else 0}"
            )
        if not exact.matmul_equals(factor, self.lift.entries, self.base.entries):
            raise NotALift("The factor does not satisfy A = T B")

    @classmethod
    def from_pair(cls, base: SupportMatrix, lift: SupportMatrix) -> "LiftRelation":
        return cls(base=base, lift=lift, factor=factorize(base, lift))

    @classmethod
    def identity(cls, support: SupportMatrix) -> "LiftRelation":
        one = ExtScalar.from_rational(1, support.basis)
        zero = ExtScalar.zero(support.basis)
        factor = tuple(
            tuple(one if i == j else zero for j in range(support.rows)) for i in range(support.rows)
        )
        return cls(base=support, lift=support, factor=factor)

    def factor_approximation(self) -> np.ndarray:
        return np.array([[e.approximate() for e in row] for row in self.factor], dtype=float)

    def embed(self, x: typing.Sequence[float]) -> np.ndarray:
        """ι(x) = x T"""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.base.rows:
            raise ShapeMismatch(f"Point has {x.shape[-1]} coordinates, expected {self.base.rows}")
        return x @ self.factor_approximation()

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            "lift": self.lift.to_json(),
            "factor": [[e.to_json() for e in row] for row in self.factor],
        }


def _check_compatible(first: SupportMatrix, second: SupportMatrix):
    if first.basis != second.basis:
        raise BasisMismatch(f"Basis {first.basis.labels} differs from {second.basis.labels}")
    if first.cols != second.cols:
        raise ShapeMismatch(f"Column counts differ: {first.cols} vs {second.cols}")


def pseudo_homogeneity_form(support: SupportMatrix) -> typing.Tuple[ExtScalar, ...]:
    """
    ξ with ξ A = 1; among several solutions the one supported on the greedily independent rows.

    For [[2, 2], [0, 1]] this is (1/2, 0).
    """
    field, _ = exact.field_for(support.basis)
    ones = [[exact.scalar_to_expr(ExtScalar.from_rational(1, support.basis))] * support.cols]
    solution = exact.solve_left(field, support.exprs(), ones, support.cols)
    if solution is None:
        raise NotPseudoHomogeneous("The all-ones vector is not in the row span of the support")
    return tuple(exact.expr_to_scalar(e, support.basis) for e in solution[0])


def pivot_row(support: SupportMatrix) -> int:
    """First row with a nonzero weight in the pseudo-homogeneity form"""
    xi = pseudo_homogeneity_form(support)
    return next(i for i, e in enumerate(xi) if not e.is_zero())


def rank_r(support: SupportMatrix) -> int:
    field, _ = exact.field_for(support.basis)
    return exact.rank(field, support.exprs(), support.cols)


def rhat(support: SupportMatrix) -> int:
    return support.cols - rank_r(support)


def _coordinate_columns(support: SupportMatrix) -> typing.List[typing.List[Fraction]]:
    return [[c for e in column for c in e.coords] for column in support.columns()]


def rank_rho(support: SupportMatrix) -> int:
    """Rank of the group generated by the columns, via their flattened rational coordinates"""
    columns = _coordinate_columns(support)
    return exact.rank(QQ, exact.rational_grid_to_exprs(columns), len(columns[0]))


def row_space_equal(first: SupportMatrix, second: SupportMatrix) -> bool:
    _check_compatible(first, second)
    field, _ = exact.field_for(first.basis)
    r1 = exact.rank(field, first.exprs(), first.cols)
    r2 = exact.rank(field, second.exprs(), second.cols)
    if r1 != r2:
        return False
    return exact.rank(field, first.exprs() + second.exprs(), first.cols) == r1


def is_lift(lift: SupportMatrix, base: SupportMatrix) -> bool:
    """B ⊑ A, i.e. Row(A) ⊆ Row(B)"""
    _check_compatible(lift, base)
    field, _ = exact.field_for(lift.basis)
    return exact.rank(field, base.exprs() + lift.exprs(), base.cols) == exact.rank(
        field, lift.exprs(), lift.cols
    )


def canonical_rows(support: SupportMatrix) -> exact.ExprGrid:
    """Reduced row echelon basis of the row space; equal for equal classes"""
    field, _ = exact.field_for(support.basis)
    return exact.row_basis(field, support.exprs(), support.cols)


def factorize(base: SupportMatrix, lift: SupportMatrix) -> Grid:
    """
    T with A = T B, supported on the greedily independent rows of B.

    Raises NotALift when Row(A) is not contained in Row(B) and NotRepresentable when T cannot be
    written over the declared basis.
    """
    _check_compatible(base, lift)
    field, _ = exact.field_for(base.basis)
    solution = exact.solve_left(field, lift.exprs(), base.exprs(), base.cols)
    if solution is None:
        raise NotALift("Row space of the support is not contained in the row space of the lift")
    return tuple(tuple(exact.expr_to_scalar(e, base.basis) for e in row) for row in solution)


def minimal_rational_lift(support: SupportMatrix) -> LiftRelation:
    """
    Smallest lift with rational entries.

    Every row of A splits as sum_i b_i v_i with rational v_i; the v_i span the row space of the
    minimal rational lift.
    """
    slices = [
        [e.coords[k] for e in row] for k in range(support.basis.dim) for row in support.entries
    ]
    reduced = exact.row_basis(QQ, exact.rational_grid_to_exprs(slices), support.cols)
    lift = SupportMatrix(
        tuple(
            tuple(ExtScalar.from_rational(exact.to_fraction(e), support.basis) for e in row)
            for row in reduced
        ),
        support.basis,
        affine=support.affine,
        lattice_class=support.lattice_class,
    )
    logger.debug("Minimal rational lift has %d rows", lift.rows)
    return LiftRelation.from_pair(support, lift)


def _rows_to_support(
    rows: exact.ExprGrid, basis: RealBasis, affine: bool
) -> SupportMatrix:
    return SupportMatrix(
        tuple(tuple(exact.row_to_scalars(row, basis)) for row in rows),
        basis,
        affine=affine,
        lattice_class=True,
    )


def lattice_meet_join(
    first: SupportMatrix, second: SupportMatrix
) -> typing.Tuple[SupportMatrix, SupportMatrix]:
    """
    Meet (Row sum, the greatest common lift) and join (Row intersection, the least common base)
    """
    _check_compatible(first, second)
    field, _ = exact.field_for(first.basis)
    affine = first.affine or second.affine

    stacked = first.exprs() + second.exprs()
    kept = exact.independent_rows(field, stacked, first.cols)
    all_rows = first.entries + second.entries
    meet = SupportMatrix(
        tuple(all_rows[i] for i in kept), first.basis, affine=affine, lattice_class=True
    )

    intersection = exact.intersect_row_spaces(
        field,
        exact.row_basis(field, first.exprs(), first.cols),
        exact.row_basis(field, second.exprs(), second.cols),
        first.cols,
    )
    if not intersection:
        # only possible for affine inputs, the zero subspace
        zero = ExtScalar.zero(first.basis)
        join = SupportMatrix(
            ((zero,) * first.cols,), first.basis, affine=True, lattice_class=True
        )
    else:
        join = _rows_to_support(intersection, first.basis, affine)
    return meet, join


@functools.lru_cache(maxsize=256)
def identity_support(size: int, basis: typing.Optional[RealBasis] = None) -> SupportMatrix:
    """I_N, the bottom of the lattice"""
    return SupportMatrix.from_rationals(
        [[1 if i == j else 0 for j in range(size)] for i in range(size)], basis
    )


def top_support(size: int, basis: typing.Optional[RealBasis] = None) -> SupportMatrix:
    """The single all-ones row, the top of the lattice"""
    return SupportMatrix.from_rationals([[1] * size], basis, lattice_class=True)
