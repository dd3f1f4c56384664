"""
Exact scalars: rationals and Q-linear combinations of a declared basis of reals
"""

import math
import typing
from dataclasses import dataclass
from fractions import Fraction

from .exceptions import BasisMismatch, NotRepresentable, ProblemFileError

Rational = Fraction

KNOWN_CONSTANTS: typing.Dict[str, float] = {
    "1": 1.0,
    "pi": math.pi,
    "π": math.pi,
    "e": math.e,
    "sqrt2": math.sqrt(2.0),
    "sqrt3": math.sqrt(3.0),
    "log2": math.log(2.0),
}

RationalLike = typing.Union[Fraction, int, str]


def to_rational(value: typing.Any) -> Fraction:
    """
    >>> to_rational("3/4")
    Fraction(3, 4)
    >>> to_rational(0.5)
    Fraction(1, 2)
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ProblemFileError(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # decimal reading of the float, not its binary expansion
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ProblemFileError(f"Not a rational number: {value!r}")
    raise ProblemFileError(f"Not a rational number: {value!r}")


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class RealBasis:
    """
    Declared reals b_0 = 1, b_1, ..., b_k.

    The elements are assumed to be Q-linearly independent; this is the caller's contract and is
    never verified. Exact ranks over the reals additionally treat b_1, ..., b_k as algebraically
    independent (see `caisson.exact`).
    """

    labels: typing.Tuple[str, ...]
    approximations: typing.Tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.approximations):
            raise ProblemFileError("Basis labels and approximations differ in length")
        if not self.labels or self.labels[0] != "1" or self.approximations[0] != 1.0:
            raise ProblemFileError("The first basis element must be the constant 1")
        if len(set(self.labels)) != len(self.labels):
            raise ProblemFileError(f"Duplicate basis labels: {self.labels}")

    @classmethod
    def from_labels(
        cls,
        labels: typing.Sequence[str],
        approximations: typing.Optional[typing.Sequence[float]] = None,
    ) -> "RealBasis":
        labels = [str(e) for e in labels]
        if approximations is not None:
            approximations = [float(e) for e in approximations]
        if not labels or labels[0] != "1":
            labels = ["1", *labels]
            if approximations is not None:
                approximations = [1.0, *approximations]
        if approximations is None:
            try:
                approximations = [KNOWN_CONSTANTS[label] for label in labels]
            except KeyError as e:
                raise ProblemFileError(f"No approximation known for basis element {e}")
        return cls(labels=tuple(labels), approximations=tuple(approximations))

    @classmethod
    def rational(cls) -> "RealBasis":
        return cls(labels=("1",), approximations=(1.0,))

    @classmethod
    def with_pi(cls) -> "RealBasis":
        return cls.from_labels(["1", "pi"])

    @property
    def dim(self) -> int:
        return len(self.labels)

    def as_json(self) -> typing.List[typing.Dict[str, typing.Any]]:
        return [{"label": k, "value": v} for k, v in zip(self.labels, self.approximations)]


@dataclass(frozen=True)
class ExtScalar:
    """
    The real number sum(coords[i] * basis[i]), stored exactly.
    """

    coords: typing.Tuple[Fraction, ...]
    basis: RealBasis

    def __post_init__(self):
        coords = tuple(to_rational(e) for e in self.coords)
        if len(coords) != self.basis.dim:
            raise BasisMismatch(
                f"Scalar has {len(coords)} coordinates, basis {self.basis.labels} has "
                f"{self.basis.dim}"
            )
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zero(cls, basis: RealBasis) -> "ExtScalar":
        return cls(coords=(Fraction(0),) * basis.dim, basis=basis)

    @classmethod
    def from_rational(cls, value: RationalLike, basis: RealBasis) -> "ExtScalar":
        return cls(coords=(to_rational(value),) + (Fraction(0),) * (basis.dim - 1), basis=basis)

    @classmethod
    def from_json(cls, data: typing.Any, basis: RealBasis) -> "ExtScalar":
        """A list of "p/q" strings aligned with the basis, or a bare rational"""
        if isinstance(data, (list, tuple)):
            if len(data) > basis.dim:
                raise BasisMismatch(f"Too many coordinates {data} for basis {basis.labels}")
            padded = list(data) + [0] * (basis.dim - len(data))
            return cls(coords=tuple(to_rational(e) for e in padded), basis=basis)
        return cls.from_rational(data, basis)

    def to_json(self) -> typing.List[str]:
        return [format_rational(e) for e in self.coords]

    def _check_basis(self, other: "ExtScalar"):
        if self.basis != other.basis:
            raise BasisMismatch(f"Basis {self.basis.labels} differs from {other.basis.labels}")

    def __add__(self, other: "ExtScalar") -> "ExtScalar":
        if not isinstance(other, ExtScalar):
            return NotImplemented
        self._check_basis(other)
        return ExtScalar(tuple(a + b for a, b in zip(self.coords, other.coords)), self.basis)

    def __sub__(self, other: "ExtScalar") -> "ExtScalar":
        if not isinstance(other, ExtScalar):
            return NotImplemented
        self._check_basis(other)
        return ExtScalar(tuple(a - b for a, b in zip(self.coords, other.coords)), self.basis)

    def __neg__(self) -> "ExtScalar":
        return ExtScalar(tuple(-a for a in self.coords), self.basis)

    def scale(self, factor: RationalLike) -> "ExtScalar":
        factor = to_rational(factor)
        return ExtScalar(tuple(a * factor for a in self.coords), self.basis)

    def __mul__(self, other) -> "ExtScalar":
        if isinstance(other, ExtScalar):
            self._check_basis(other)
            if other.is_rational():
                return self.scale(other.coords[0])
            if self.is_rational():
                return other.scale(self.coords[0])
            raise NotRepresentable(f"Product of irrational scalars {self} and {other}")
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def is_rational(self) -> bool:
        return all(e == 0 for e in self.coords[1:])

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.coords)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise NotRepresentable(f"{self} is not rational")
        return self.coords[0]

    def approximate(self) -> float:
        return math.fsum(float(c) * b for c, b in zip(self.coords, self.basis.approximations))

    def __float__(self) -> float:
        return self.approximate()

    def __str__(self):
        parts = []
        for coord, label in zip(self.coords, self.basis.labels):
            if coord == 0:
                continue
            if label == "1":
                parts.append(format_rational(coord))
            else:
                parts.append(f"{format_rational(coord)}*{label}")
        return " + ".join(parts) if parts else "0"


def arith(a: ExtScalar, b: typing.Union[ExtScalar, RationalLike, None], op: str) -> ExtScalar:
    """
    Exact coordinatewise arithmetic; `op` is one of add, sub, negate, scale.

    >>> basis = RealBasis.with_pi()
    >>> str(arith(ExtScalar((0, 1), basis), Fraction(3, 2), "scale"))
    '3/2*pi'
    """
    if op == "add":
        return a + b
    elif op == "sub":
        return a - b
    elif op == "negate":
        return -a
    elif op == "scale":
        return a.scale(b)
    raise ValueError(f"Unknown operation {op}")


def approximate(a: ExtScalar) -> float:
    return a.approximate()


def is_rational(a: ExtScalar) -> bool:
    return a.is_rational()
