"""
Exponential sums f(z) = sum_a c_a exp(<z, a>) over a support matrix
"""

import cmath
import functools
import logging
import typing
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import config, exact
from .exceptions import (
    NotPseudoHomogeneous,
    NotRepresentable,
    ProblemFileError,
    ShapeMismatch,
    SupportMismatch,
)
from .scalars import ExtScalar
from .support_lattice import LiftRelation, SupportMatrix, pivot_row, pseudo_homogeneity_form
from .utils import parse_complex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpSum:
    """
    Complex coefficients aligned with the columns of the support.

    `exponents` optionally overrides the floating exponent matrix used for evaluation; the
    deformation family uses it to evaluate with exact floating λκ while the support carries a
    rational approximation.
    """

    support: SupportMatrix
    coefficients: typing.Tuple[complex, ...]
    exponents: typing.Optional[typing.Tuple[typing.Tuple[float, ...], ...]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        coefficients = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        if len(coefficients) != self.support.cols:
            raise ShapeMismatch(
                f"{len(coefficients)} coefficients for a support with {self.support.cols} columns"
            )
        if not any(coefficients):
            raise ProblemFileError("At least one coefficient has to be nonzero")
        if not self.support.has_distinct_columns():
            raise SupportMismatch("Support points of an exponential sum must be distinct")
        if self.exponents is not None:
            exponents = tuple(tuple(float(e) for e in row) for row in self.exponents)
            if len(exponents) != self.support.rows or any(
                len(row) != self.support.cols for row in exponents
            ):
                raise ShapeMismatch("Exponent override does not match the support shape")
            object.__setattr__(self, "exponents", exponents)

    @classmethod
    def from_json(cls, support: SupportMatrix, coefficients: typing.Sequence) -> "ExpSum":
        return cls(support, tuple(parse_complex(c) for c in coefficients))

    @property
    def dim(self) -> int:
        """Number of native coordinates"""
        return self.support.rows

    @property
    def size(self) -> int:
        return self.support.cols

    @property
    def affine(self) -> bool:
        return self.support.affine

    def exponent_matrix(self) -> np.ndarray:
        if self.exponents is not None:
            return np.array(self.exponents, dtype=float)
        return _approximate_support(self.support)

    def coefficient_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    def log_moduli(self) -> np.ndarray:
        moduli = np.abs(self.coefficient_array())
        with np.errstate(divide="ignore"):
            return np.log(moduli)

    def with_coefficients(self, coefficients: typing.Sequence[complex]) -> "ExpSum":
        return ExpSum(self.support, tuple(coefficients), self.exponents)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            "support": self.support.to_json(),
            "coefficients": [{"re": c.real, "im": c.imag} for c in self.coefficients],
        }


@functools.lru_cache(maxsize=128)
def _approximate_support(support: SupportMatrix) -> np.ndarray:
    matrix = support.approximate()
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True)
class DeformationFamily:
    """f_λ(z, t) = sum_a c_a exp(<a, z> + λ <κ_a, t>)"""

    base: ExpSum
    kappas: typing.Tuple[typing.Tuple[float, ...], ...]

    def __post_init__(self):
        kappas = tuple(tuple(float(e) for e in k) for k in self.kappas)
        object.__setattr__(self, "kappas", kappas)
        if len(kappas) != self.base.size:
            raise ShapeMismatch(f"{len(kappas)} kappas for {self.base.size} support points")
        if len({len(k) for k in kappas}) > 1:
            raise ShapeMismatch("All kappas must have the same dimension")

    @property
    def k(self) -> int:
        return len(self.kappas[0]) if self.kappas else 0


def phi_transport(f: ExpSum, lift: LiftRelation) -> ExpSum:
    """Φ: the same coefficients over the lifted support"""
    if lift.base != f.support:
        raise SupportMismatch("The lift is not a lift of the support of the exponential sum")
    return ExpSum(lift.lift, f.coefficients)


def dehomogenize(f: ExpSum) -> ExpSum:
    """
    Drops the pivot row p of ξ (ξ A = 1).

    With z' = z M^-1, where M is the identity with row p replaced by ξ, the sum reads
    f(z) = exp(z'_p) g(z'_{-p}) and g has the support A without row p.
    """
    if f.affine:
        raise NotPseudoHomogeneous("The exponential sum is already dehomogenized")
    p = pivot_row(f.support)
    exponents = None
    if f.exponents is not None:
        exponents = tuple(row for i, row in enumerate(f.exponents) if i != p)
    return ExpSum(f.support.without_row(p), f.coefficients, exponents)


def dehomogenize_point(f: ExpSum, z: typing.Sequence[complex]) -> np.ndarray:
    """z'_{-p} = z_{-p} - (z_p / ξ_p) ξ_{-p}, the argument of the dehomogenized sum"""
    xi = np.array([e.approximate() for e in pseudo_homogeneity_form(f.support)])
    p = pivot_row(f.support)
    z = np.asarray(z)
    shifted = z - np.multiply.outer(z[..., p] / xi[p], xi)
    return np.delete(shifted, p, axis=-1)


def homogenize_point(f: ExpSum, x: typing.Sequence[float]) -> np.ndarray:
    """Inverse of dehomogenize_point on the slice z_p = 0"""
    p = pivot_row(f.support)
    x = np.asarray(x, dtype=float)
    return np.insert(x, p, 0.0, axis=-1)


def native_point(f: ExpSum, x: typing.Sequence[float]) -> np.ndarray:
    """
    Native coordinates of a point given in the dehomogenized coordinates of f; extra trailing
    coordinates (the unused axis of a raster over a univariate sum) are dropped
    """
    dim = f.dim if f.affine else f.dim - 1
    x = np.asarray(x, dtype=float)[..., :dim]
    return x if f.affine else homogenize_point(f, x)


def evaluate(f: ExpSum, z: typing.Sequence[complex]) -> complex:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != f.dim:
        raise ShapeMismatch(f"Point has {z.shape[-1]} coordinates, expected {f.dim}")
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(z @ f.exponent_matrix()) @ f.coefficient_array()


@functools.lru_cache(maxsize=128)
def character_coordinates(support: SupportMatrix) -> np.ndarray:
    """
    Integer coordinates u_a of each column in a fixed Z-basis of the group generated by the
    columns, rows aligned with the columns. χ(a) = exp(i <θ, u_a>).
    """
    flattened = [[c for e in column for c in e.coords] for column in support.columns()]
    scale = exact.common_denominator(c for column in flattened for c in column)
    integral = [[int(c * scale) for c in column] for column in flattened]
    lattice = exact.IntegerLattice(integral)
    coordinates = np.zeros((support.cols, lattice.rank), dtype=np.int64)
    for j, column in enumerate(integral):
        coordinates[j] = lattice.coordinates(column)
    coordinates.setflags(write=False)
    return coordinates


def perturb_character(f: ExpSum, phases: typing.Sequence[float]) -> ExpSum:
    coordinates = character_coordinates(f.support)
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (coordinates.shape[1],):
        raise ShapeMismatch(
            f"The character group has rank {coordinates.shape[1]}, got {phases.shape} phases"
        )
    characters = np.exp(1j * (coordinates @ phases))
    return f.with_coefficients(f.coefficient_array() * characters)


def deform(family: DeformationFamily, lam: float) -> ExpSum:
    """
    f_λ in 1+n+k (or n+k for affine bases) variables.

    λκ is rationalized for the support matrix, evaluation uses the floating values.
    """
    base = family.base
    basis = base.support.basis
    scaled = np.array(family.kappas, dtype=float).reshape(base.size, family.k).T * lam
    rational_rows = tuple(
        tuple(
            ExtScalar.from_rational(
                Fraction(value).limit_denominator(config.RATIONALIZE_DENOMINATOR), basis
            )
            for value in row
        )
        for row in scaled
    )
    support = base.support.with_rows(base.support.entries + rational_rows)
    exponents = np.vstack([base.exponent_matrix(), scaled])
    return ExpSum(support, base.coefficients, tuple(map(tuple, exponents)))


@dataclass
class UnivariateSlice:
    """
    Laurent polynomial in s = exp(z_j / scale) obtained by fixing all other coordinates.

    coeffs are in ascending powers after shifting the exponents by `offset`.
    """

    coeffs: np.ndarray
    offset: int
    scale: int

    def log_moduli(self, roots: np.ndarray) -> np.ndarray:
        """Real parts of z_j for the given roots in s"""
        with np.errstate(divide="ignore"):
            return self.scale * np.log(np.abs(roots))


@functools.lru_cache(maxsize=128)
def _integral_row(support: SupportMatrix, j: int) -> typing.Tuple[typing.Tuple[int, ...], int]:
    try:
        row = [e.rational_value() for e in support.entries[j]]
    except NotRepresentable:
        raise NotRepresentable(
            f"Coordinate {j} has irrational exponents; use the minimal rational lift"
        )
    scale = exact.common_denominator(row)
    return tuple(int(e * scale) for e in row), scale


def univariate_slice(f: ExpSum, j: int, z: typing.Sequence[complex]) -> UnivariateSlice:
    """
    The polynomial in coordinate j with the other coordinates of `z` fixed (z_j is ignored)
    """
    powers, scale = _integral_row(f.support, j)
    powers = np.array(powers, dtype=np.int64)
    offset = int(powers.min())

    z = np.asarray(z, dtype=complex)
    exponents = f.exponent_matrix()
    others = [k for k in range(f.dim) if k != j]
    weights = f.coefficient_array().copy()
    if others:
        with np.errstate(over="ignore", invalid="ignore"):
            weights *= np.exp(z[others] @ exponents[others])
    coeffs = np.zeros(int(powers.max()) - offset + 1, dtype=complex)
    np.add.at(coeffs, powers - offset, weights)
    return UnivariateSlice(coeffs=coeffs, offset=offset, scale=scale)


def sample_zeros(f: ExpSum, count: int, seed: int = 0, spread: float = 2.0) -> np.ndarray:
    """
    Points of the zero set: random log-moduli in [-spread, spread] and phases for all but the
    last coordinate, then every root of the slice in the last one.
    """
    from .orders import roots_univariate

    rng = np.random.default_rng(seed)
    j = f.dim - 1
    zeros: typing.List[np.ndarray] = []
    while len(zeros) < count:
        z = np.zeros(f.dim, dtype=complex)
        if f.dim > 1:
            z[:j] = rng.uniform(-spread, spread, j) + 1j * rng.uniform(0, 2 * np.pi, j)
        poly = univariate_slice(f, j, z)
        if np.count_nonzero(poly.coeffs) >= 2:
            for root in roots_univariate(poly.coeffs).roots:
                if root == 0:
                    continue
                point = z.copy()
                point[j] = poly.scale * cmath.log(root)
                zeros.append(point)
                if len(zeros) == count:
                    break
        if f.dim == 1:
            # a univariate sum has finitely many zeros per strip
            break
    logger.debug("Sampled %d zeros with seed %d", len(zeros), seed)
    return np.array(zeros)
