"""
Exact linear algebra on grids of ExtScalar.

Scalars over a basis {1, b_1, ..., b_k} are mapped into the field QQ(t_1, ..., t_k), i.e. the
non-unit basis elements are treated as algebraically independent indeterminates. All rank and
echelon computations are delegated to sympy's DomainMatrix over that field.
"""

import functools
import math
import typing
from fractions import Fraction

import sympy
from sympy import QQ
from sympy.matrices.normalforms import hermite_normal_form
from sympy.polys.matrices import DomainMatrix

from .exceptions import NotRepresentable
from .scalars import ExtScalar, RealBasis

ExprGrid = typing.List[typing.List[sympy.Expr]]


@functools.lru_cache(maxsize=None)
def field_for(basis: RealBasis) -> typing.Tuple[typing.Any, typing.Tuple[sympy.Symbol, ...]]:
    symbols = tuple(sympy.Symbol(f"t{i}") for i in range(1, basis.dim))
    if not symbols:
        return QQ, ()
    return QQ.frac_field(*symbols), symbols


def _sympy_rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def to_fraction(value: sympy.Expr) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def scalar_to_expr(value: ExtScalar) -> sympy.Expr:
    _, symbols = field_for(value.basis)
    expr = _sympy_rational(value.coords[0])
    for coord, symbol in zip(value.coords[1:], symbols):
        expr += _sympy_rational(coord) * symbol
    return expr


def expr_to_scalar(expr: sympy.Expr, basis: RealBasis) -> ExtScalar:
    """
    Converts a rational function of the basis indeterminates back to an ExtScalar.

    Raises NotRepresentable unless the expression is affine-linear in the indeterminates.
    """
    _, symbols = field_for(basis)
    num, den = sympy.fraction(sympy.cancel(sympy.sympify(expr)))
    if den.free_symbols:
        raise NotRepresentable(f"{expr} is not a Q-linear combination of {basis.labels}")
    if not symbols:
        return ExtScalar.from_rational(to_fraction(num / den), basis)

    poly = sympy.Poly(num, *symbols)
    if poly.total_degree() > 1:
        raise NotRepresentable(f"{expr} is not a Q-linear combination of {basis.labels}")
    coords = [to_fraction(poly.coeff_monomial(1) / den)]
    coords.extend(to_fraction(poly.coeff_monomial(symbol) / den) for symbol in symbols)
    return ExtScalar(tuple(coords), basis)


def row_to_scalars(row: typing.Sequence[sympy.Expr], basis: RealBasis) -> typing.List[ExtScalar]:
    """
    Converts a vector which only matters up to a nonzero real factor (a row spanning a subspace).

    Common denominators and common polynomial factors are cleared first.
    """
    _, symbols = field_for(basis)
    exprs = [sympy.cancel(sympy.sympify(e)) for e in row]
    if symbols:
        denominators = [sympy.fraction(e)[1] for e in exprs]
        multiplier = functools.reduce(sympy.lcm, denominators, sympy.Integer(1))
        exprs = [sympy.cancel(e * multiplier) for e in exprs]
        nonzero = [e for e in exprs if e != 0]
        if nonzero:
            common = functools.reduce(sympy.gcd, nonzero)
            common = sympy.Poly(common, *symbols)
            if common.total_degree() > 0:
                exprs = [sympy.cancel(e / common.as_expr()) for e in exprs]
    return [expr_to_scalar(e, basis) for e in exprs]


def grid_to_exprs(grid: typing.Sequence[typing.Sequence[ExtScalar]]) -> ExprGrid:
    return [[scalar_to_expr(e) for e in row] for row in grid]


def rational_grid_to_exprs(grid: typing.Sequence[typing.Sequence[Fraction]]) -> ExprGrid:
    return [[_sympy_rational(Fraction(e)) for e in row] for row in grid]


def _domain_matrix(field, grid: ExprGrid, ncols: int) -> DomainMatrix:
    rows = [[field.from_sympy(e) for e in row] for row in grid]
    return DomainMatrix(rows, (len(rows), ncols), field)


def rref(field, grid: ExprGrid, ncols: int) -> typing.Tuple[ExprGrid, typing.Tuple[int, ...]]:
    if not grid:
        return [], ()
    reduced, pivots = _domain_matrix(field, grid, ncols).rref()
    return reduced.to_Matrix().tolist(), tuple(pivots)


def rank(field, grid: ExprGrid, ncols: int) -> int:
    if not grid:
        return 0
    return _domain_matrix(field, grid, ncols).rank()


def row_basis(field, grid: ExprGrid, ncols: int) -> ExprGrid:
    """Nonzero rows of the reduced row echelon form, the canonical basis of the row space"""
    reduced, pivots = rref(field, grid, ncols)
    return reduced[: len(pivots)]


def independent_rows(field, grid: ExprGrid, ncols: int) -> typing.Tuple[int, ...]:
    """Indices of the greedily chosen linearly independent rows (first come, first kept)"""
    if not grid:
        return ()
    transposed = [[grid[i][j] for i in range(len(grid))] for j in range(ncols)]
    _, pivots = rref(field, transposed, len(grid))
    return pivots


def solve_left(
    field, lhs: ExprGrid, targets: ExprGrid, ncols: int
) -> typing.Optional[ExprGrid]:
    """
    Finds X with targets = X * lhs.

    Only the greedily independent rows of `lhs` receive nonzero weights, which makes the solution
    unique and of minimal support. Returns None when no solution exists.
    """
    pivots = independent_rows(field, lhs, ncols)
    k = len(pivots)
    augmented = [
        [lhs[p][j] for p in pivots] + [target[j] for target in targets] for j in range(ncols)
    ]
    reduced, aug_pivots = rref(field, augmented, k + len(targets))
    if any(p >= k for p in aug_pivots):
        return None

    solution = [[sympy.Integer(0)] * len(lhs) for _ in targets]
    for a in range(len(targets)):
        for i, p in enumerate(pivots):
            solution[a][p] = reduced[i][k + a]
    return solution


def intersect_row_spaces(field, first: ExprGrid, second: ExprGrid, ncols: int) -> ExprGrid:
    """Zassenhaus: echelonize [[U, U], [W, 0]], rows of the shape (0, v) span Row(U) ∩ Row(W)"""
    zero = sympy.Integer(0)
    stacked = [list(row) + list(row) for row in first]
    stacked += [list(row) + [zero] * ncols for row in second]
    reduced, pivots = rref(field, stacked, 2 * ncols)
    return [reduced[i][ncols:] for i in range(len(pivots)) if pivots[i] >= ncols]


def matmul_equals(
    left: typing.Sequence[typing.Sequence[ExtScalar]],
    right: typing.Sequence[typing.Sequence[ExtScalar]],
    expected: typing.Sequence[typing.Sequence[ExtScalar]],
) -> bool:
    """Exact check of left * right == expected, products of basis elements included"""
    left_e = grid_to_exprs(left)
    right_e = grid_to_exprs(right)
    expected_e = grid_to_exprs(expected)
    inner = len(right_e)
    for i, row in enumerate(expected_e):
        for j, value in enumerate(row):
            product = sum((left_e[i][k] * right_e[k][j] for k in range(inner)), sympy.Integer(0))
            if sympy.expand(product - value) != 0:
                return False
    return True


def common_denominator(values: typing.Iterable[Fraction]) -> int:
    return functools.reduce(math.lcm, (Fraction(v).denominator for v in values), 1)


class IntegerLattice:
    """
    The subgroup of Z^d generated by a set of integer vectors, with a Hermite normal form basis
    """

    def __init__(self, generators: typing.Sequence[typing.Sequence[int]]):
        generators = [tuple(int(e) for e in g) for g in generators]
        if not generators:
            raise ValueError("At least one generator is required")
        self.dim = len(generators[0])

        matrix = sympy.Matrix(self.dim, len(generators), lambda i, j: generators[j][i])
        basis: typing.List[typing.Tuple[int, ...]] = []
        if any(any(g) for g in generators):
            hnf = hermite_normal_form(matrix)
            for k in range(hnf.cols):
                column = tuple(int(e) for e in hnf.col(k))
                if any(column):
                    basis.append(column)
        self.basis = basis
        self.rank = len(basis)

        # square subsystem used to read off coordinates
        self._rows: typing.Tuple[int, ...] = ()
        self._inverse: typing.List[typing.List[Fraction]] = []
        if basis:
            grid = rational_grid_to_exprs(
                [[basis[k][i] for k in range(self.rank)] for i in range(self.dim)]
            )
            self._rows = independent_rows(QQ, grid, self.rank)
            square = sympy.Matrix(
                self.rank, self.rank, lambda i, k: basis[k][self._rows[i]]
            )
            self._inverse = [[to_fraction(e) for e in row] for row in square.inv().tolist()]

    def coordinates(
        self, vector: typing.Sequence[typing.Any]
    ) -> typing.Optional[typing.Tuple[int, ...]]:
        """Integer coordinates with respect to `basis`, None for vectors outside the lattice"""
        vector = [Fraction(e) for e in vector]
        if not self.basis:
            return () if not any(vector) else None
        picked = [vector[i] for i in self._rows]
        coords = [sum(row[i] * picked[i] for i in range(self.rank)) for row in self._inverse]
        if any(c.denominator != 1 for c in coords):
            return None
        for i in range(self.dim):
            if sum(coords[k] * self.basis[k][i] for k in range(self.rank)) != vector[i]:
                return None
        return tuple(int(c) for c in coords)

    def __contains__(self, vector) -> bool:
        return self.coordinates(vector) is not None
