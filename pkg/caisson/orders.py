"""
Roots, the order map of amoeba complement components and Ronkin function estimates
"""

import itertools
import logging
import math
import typing
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy
from scipy.spatial import ConvexHull
from sympy import QQ

from . import config, exact
from .exceptions import (
    CaissonException,
    NotRepresentable,
    OnAmoeba,
    OnAmoebaOrIllConditioned,
    RootFindingError,
    ShapeMismatch,
)
from .expsum import (
    ExpSum,
    character_coordinates,
    dehomogenize,
    dehomogenize_point,
    native_point,
    perturb_character,
    phi_transport,
    univariate_slice,
)
from .membership import Window, components, cover_raster, dominators
from .scalars import ExtScalar, format_rational
from .support_lattice import (
    LiftRelation,
    SupportMatrix,
    minimal_rational_lift,
    pivot_row,
    pseudo_homogeneity_form,
)

logger = logging.getLogger(__name__)

ON_AMOEBA_TOLERANCE = 1e-8
BACKWARD_ERROR_LIMIT = 1e-10

OrderValue = typing.Union[int, Fraction]


@dataclass(eq=False)
class RootList:
    """Roots with multiplicity, ascending by modulus, then by argument"""

    roots: np.ndarray
    backward_errors: np.ndarray
    iterations: int = 0

    @property
    def degree(self) -> int:
        return len(self.roots)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.roots)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


@dataclass(frozen=True)
class OrderVector:
    """
    An order of the base support (image = T β) and the order β in the lift used to find it
    """

    image: typing.Tuple[ExtScalar, ...]
    beta: typing.Tuple[Fraction, ...] = field(default=(), compare=False)

    def approximate(self) -> typing.Tuple[float, ...]:
        return tuple(e.approximate() for e in self.image)

    def rational(self) -> typing.Tuple[OrderValue, ...]:
        return tuple(_order_value(e.rational_value(), 1) for e in self.image)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            "order": [e.to_json() for e in self.image],
            "lift_order": [format_rational(Fraction(b)) for b in self.beta],
        }


@dataclass(frozen=True)
class RonkinEstimate:
    value: float
    stderr: float
    clipped: int = 0


def _backward_errors(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    descending = coeffs[::-1]
    values = np.abs(np.polyval(descending, roots))
    scale = np.polyval(np.abs(descending), np.abs(roots))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(scale > 0, values / scale, values)


def _aberth(coeffs: np.ndarray, max_iterations: int) -> typing.Tuple[np.ndarray, int]:
    degree = len(coeffs) - 1
    descending = coeffs[::-1]
    derivative = np.polyder(descending)

    radius = (abs(coeffs[0]) / abs(coeffs[-1])) ** (1.0 / degree)
    k = np.arange(degree)
    angles = 2 * np.pi * k / degree + 0.4 + 0.1 * np.sin(k + 1.0)
    z = radius * np.exp(1j * angles)

    iteration = 0
    for iteration in range(1, max_iterations + 1):
        p = np.polyval(descending, z)
        dp = np.polyval(derivative, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p == 0, 0, p / dp)
            differences = z[:, None] - z[None, :]
            np.fill_diagonal(differences, 1.0)
            inverse = 1.0 / differences
            np.fill_diagonal(inverse, 0.0)
            step = ratio / (1.0 - ratio * inverse.sum(axis=1))
        step = np.where(np.isfinite(step), step, 0)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * (1 + np.abs(z))):
            break

    # Newton polish, a step is only kept if it lowers |p|
    for _ in range(3):
        p = np.polyval(descending, z)
        dp = np.polyval(derivative, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            candidate = np.where(dp != 0, z - p / dp, z)
        better = np.abs(np.polyval(descending, candidate)) < np.abs(p)
        z = np.where(better, candidate, z)
    return z, iteration


def roots_univariate(
    coeffs: typing.Sequence[complex], max_iterations: int = 500
) -> RootList:
    """
    Roots of sum_k coeffs[k] w^k (ascending powers) by the Aberth-Ehrlich iteration
    """
    coeffs = np.asarray(coeffs, dtype=complex).ravel()
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        raise RootFindingError("The zero polynomial has no well defined roots")
    low, high = int(nonzero[0]), int(nonzero[-1])
    trimmed = coeffs[low : high + 1]

    iterations = 0
    roots = np.zeros(low, dtype=complex)
    if high > low:
        found, iterations = _aberth(trimmed, max_iterations)
        roots = np.concatenate([roots, found])

    order = np.lexsort((np.angle(roots), np.abs(roots)))
    roots = roots[order]
    errors = _backward_errors(coeffs[: high + 1], roots)
    if np.any(~np.isfinite(roots)) or np.any(errors > BACKWARD_ERROR_LIMIT):
        raise RootFindingError(
            f"Root finding did not converge in {iterations} iterations",
            content={"max_backward_error": float(np.nanmax(errors)) if len(errors) else None},
        )
    logger.debug("Found %d roots in %d iterations", len(roots), iterations)
    return RootList(roots=roots, backward_errors=errors, iterations=iterations)


def _order_value(count: typing.Union[int, Fraction], scale: int) -> OrderValue:
    value = Fraction(count) / scale
    return int(value) if value.denominator == 1 else value


def _affine(f: ExpSum) -> ExpSum:
    return f if f.affine else dehomogenize(f)


def order_univariate(f: ExpSum, x: typing.Union[float, typing.Sequence[float]]) -> OrderValue:
    """
    Number of roots with log-modulus below x, shifted by the lowest exponent
    """
    g = _affine(f)
    if g.dim != 1:
        raise ShapeMismatch(f"Expected a univariate sum, got {g.dim} variables")
    x = float(np.ravel(x)[0])
    poly = univariate_slice(g, 0, [0.0])
    roots = roots_univariate(poly.coeffs).roots
    logs = poly.log_moduli(roots)
    close = np.abs(logs - x) < ON_AMOEBA_TOLERANCE
    if np.any(close):
        raise OnAmoeba(f"x = {x} is within {ON_AMOEBA_TOLERANCE} of a root log-modulus")
    return _order_value(int(np.count_nonzero(logs < x)) + poly.offset, poly.scale)


def order_multivariate(
    f: ExpSum,
    x: typing.Sequence[float],
    j: int,
    samples: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
) -> OrderValue:
    """
    j-th coordinate of the order: roots of the slice in w_j with modulus below exp(x_j), for
    random phases of the other variables; every sample has to agree.
    """
    g = _affine(f)
    samples = config.ORDER_SAMPLES if samples is None else samples
    seed = config.SEED if seed is None else seed
    x = np.asarray(x, dtype=float)
    if x.shape != (g.dim,):
        raise ShapeMismatch(f"Point has {x.shape} coordinates, expected {g.dim}")
    rng = np.random.default_rng(seed)
    counts = set()
    scale = 1
    for _ in range(samples):
        z = x + 1j * rng.uniform(0, 2 * np.pi, g.dim)
        poly = univariate_slice(g, j, z)
        scale = poly.scale
        logs = poly.log_moduli(roots_univariate(poly.coeffs).roots)
        if np.any(np.abs(logs - x[j]) < ON_AMOEBA_TOLERANCE):
            raise OnAmoebaOrIllConditioned(f"A slice root lies on the torus of {x.tolist()}")
        counts.add(int(np.count_nonzero(logs < x[j])) + poly.offset)
        if len(counts) > 1:
            raise OnAmoebaOrIllConditioned(
                f"Slices disagree on coordinate {j} at {x.tolist()}",
                content={"counts": sorted(counts)},
            )
    return _order_value(counts.pop(), scale)


def order_vector(
    f: ExpSum,
    x: typing.Sequence[float],
    samples: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
) -> typing.Tuple[OrderValue, ...]:
    g = _affine(f)
    if g.dim == 1:
        return (order_univariate(g, x),)
    return tuple(order_multivariate(g, x, j, samples, seed) for j in range(g.dim))


def homogeneous_order(
    f: ExpSum,
    y: typing.Sequence[float],
    samples: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
) -> typing.Tuple[OrderValue, ...]:
    """
    Order in the native coordinates of f; for homogeneous supports the pivot coordinate follows
    from ξ β = 1.
    """
    if f.affine:
        return order_vector(f, y, samples, seed)
    reduced = order_vector(dehomogenize(f), dehomogenize_point(f, y).real, samples, seed)
    xi = [e.rational_value() for e in pseudo_homogeneity_form(f.support)]
    p = pivot_row(f.support)
    rest = [i for i in range(f.dim) if i != p]
    pivot_value = (1 - sum(xi[i] * Fraction(b) for i, b in zip(rest, reduced))) / xi[p]
    full = list(reduced)
    full.insert(p, _order_value(pivot_value, 1))
    return tuple(full)


def order_pullback(
    factor: typing.Sequence[typing.Sequence[ExtScalar]], beta: typing.Sequence[OrderValue]
) -> typing.Tuple[ExtScalar, ...]:
    """T β"""
    if any(len(row) != len(beta) for row in factor):
        raise ShapeMismatch(f"Factor rows do not match the order of length {len(beta)}")
    basis = factor[0][0].basis
    return tuple(
        sum((value.scale(Fraction(b)) for value, b in zip(row, beta)), ExtScalar.zero(basis))
        for row in factor
    )


def _affine_chart(points: typing.List[typing.List[int]]):
    """
    Coordinates on which the affine hull of the points projects isomorphically, the chosen
    independent difference vectors and the inverse of their restriction to those coordinates
    """
    base = points[0]
    differences = [[p[i] - base[i] for i in range(len(base))] for p in points[1:]]
    if not differences:
        return (), [], []
    grid = exact.rational_grid_to_exprs(differences)
    _, chart = exact.rref(QQ, grid, len(base))
    if not chart:
        return (), [], []
    picked = [differences[i] for i in exact.independent_rows(QQ, grid, len(base))]
    square = sympy.Matrix(len(chart), len(chart), lambda a, b: picked[a][chart[b]])
    inverse = [[exact.to_fraction(e) for e in row] for row in square.inv().tolist()]
    return tuple(chart), picked, inverse


def newton_lattice_points(support: SupportMatrix) -> typing.List[typing.Tuple[OrderValue, ...]]:
    """
    Points of the group generated by the columns lying in their convex hull
    """
    if not support.is_rational():
        raise NotRepresentable("Lattice points need a rational support; use its minimal lift")
    columns = [[e.rational_value() for e in column] for column in support.columns()]
    scale = exact.common_denominator(c for column in columns for c in column)
    points = [[int(c * scale) for c in column] for column in columns]
    lattice = exact.IntegerLattice(points)
    chart, picked, inverse = _affine_chart(points)
    base = points[0]

    if not chart:
        return [tuple(_order_value(c, scale) for c in base)]

    projected = np.array([[p[i] for i in chart] for p in points], dtype=float)
    low = projected.min(axis=0).astype(int)
    high = projected.max(axis=0).astype(int)
    if len(chart) > 1:
        equations = ConvexHull(projected).equations

        def inside(q):
            return np.all(equations[:, :-1] @ q + equations[:, -1] <= 1e-9)

    else:

        def inside(q):
            return low[0] <= q[0] <= high[0]

    found = []
    for q in itertools.product(*(range(a, b + 1) for a, b in zip(low, high))):
        if not inside(np.array(q, dtype=float)):
            continue
        offsets = [Fraction(q[a] - base[chart[a]]) for a in range(len(chart))]
        weights = [
            sum(offsets[a] * inverse[a][b] for a in range(len(chart))) for b in range(len(chart))
        ]
        point = [
            base[i] + sum(weights[b] * picked[b][i] for b in range(len(chart)))
            for i in range(len(base))
        ]
        if point in lattice:
            found.append(tuple(_order_value(c, scale) for c in point))
    return sorted(found)


def omega_candidates(support: SupportMatrix) -> typing.List[typing.Tuple[ExtScalar, ...]]:
    """T (Z[B] ∩ N(B)) for the minimal rational lift, a finite superset of every order set"""
    lift = minimal_rational_lift(support)
    images = []
    for point in newton_lattice_points(lift.lift):
        image = order_pullback(lift.factor, point)
        if image not in images:
            images.append(image)
    return images


def _vertex_indices(f: ExpSum) -> typing.List[int]:
    points = _affine(f).exponent_matrix().T
    differences = points - points[0]
    rank = np.linalg.matrix_rank(differences) if len(points) > 1 else 0
    if rank == 0:
        return [0]
    if rank == 1:
        direction = differences[np.argmax(np.linalg.norm(differences, axis=1))]
        t = differences @ direction
        return sorted({int(np.argmin(t)), int(np.argmax(t))})
    # coordinates in the affine hull
    _, _, vt = np.linalg.svd(differences)
    chart = differences @ vt[:rank].T
    return sorted(int(e) for e in ConvexHull(chart).vertices)


def vertex_orders(f: ExpSum) -> typing.List[typing.Tuple[ExtScalar, ...]]:
    """Vertices of the Newton polytope, orders of the unbounded components"""
    g = _affine(f)
    return [g.support.column(i) for i in _vertex_indices(f)]


def _pullback_dehomogenized(f: ExpSum, image: typing.Tuple[ExtScalar, ...]):
    if f.affine:
        return image
    p = pivot_row(f.support)
    return tuple(e for i, e in enumerate(image) if i != p)


def _discovery_dimension(f: ExpSum) -> int:
    dim = f.dim if f.affine else f.dim - 1
    if dim > 2:
        raise ShapeMismatch(f"Raster based discovery needs at most 2 variables, got {dim}")
    return dim


def order_at(
    f: ExpSum,
    x: typing.Sequence[float],
    lift: typing.Optional[LiftRelation] = None,
    samples: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
) -> OrderVector:
    """
    Order of the component containing x (dehomogenized coordinates of f), computed for Φf at
    ι(x). Without a lift irrational supports use their minimal rational lift.
    """
    if lift is None:
        if f.support.is_rational():
            lift = LiftRelation.identity(f.support)
        else:
            lift = minimal_rational_lift(f.support)
    if not lift.lift.is_rational():
        raise NotRepresentable("Orders can only be computed for rational lifts")
    g = phi_transport(f, lift)
    beta = homogeneous_order(g, lift.embed(native_point(f, x)), samples, seed)
    image = _pullback_dehomogenized(f, order_pullback(lift.factor, beta))
    return OrderVector(image=image, beta=tuple(Fraction(b) for b in beta))


def omega_caisson(
    f: ExpSum,
    lift: LiftRelation,
    window: Window,
    resolution: int,
    samples: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
    threads: int = 1,
) -> typing.List[OrderVector]:
    """
    Orders of the components of the (lopsided) caisson cover at ι(window): computed for Φf at
    ι(x) and pulled back along T. The vertex orders are always included.
    """
    _discovery_dimension(f)
    if not lift.lift.is_rational():
        raise NotRepresentable("Orders can only be computed for rational lifts")
    g = phi_transport(f, lift)
    lifted = lift.lift.rational_entries()
    orders = set()
    for j in _vertex_indices(f):
        beta = tuple(Fraction(row[j]) for row in lifted)
        image = _pullback_dehomogenized(f, order_pullback(lift.factor, beta))
        orders.add(OrderVector(image=image, beta=beta))

    def dominate(points):
        return dominators(g, lift.embed(native_point(f, points)))

    grid = cover_raster(dominate, window, resolution, threads=threads)
    for component in components(grid):
        try:
            order = order_at(f, component.representative, lift, samples, seed)
        except CaissonException as e:
            logger.warning("Skipping component %d: %s", component.label, e)
            continue
        component.order = order.image
        orders.add(order)
    logger.debug("Found %d orders in %s", len(orders), window.as_list())
    return sorted(orders, key=lambda o: o.approximate())


def omega_set(
    f: ExpSum,
    window: Window,
    resolution: int,
    samples: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
    threads: int = 1,
) -> typing.List[OrderVector]:
    """
    Orders discovered in the window: components of the lopsided complement, each refined by the
    slice order map. Irrational supports go through their minimal rational lift.
    """
    _discovery_dimension(f)
    if not f.support.is_rational():
        return omega_caisson(
            f, minimal_rational_lift(f.support), window, resolution, samples, seed, threads
        )
    return omega_caisson(
        f, LiftRelation.identity(f.support), window, resolution, samples, seed, threads
    )


def _korobov_generator(points: int, dim: int) -> np.ndarray:
    """(1, a, a^2, ...) mod points with a near points/φ and coprime to points"""
    a = max(1, round(points * (math.sqrt(5) - 1) / 2))
    while math.gcd(a, points) != 1:
        a += 1
    return np.array([pow(a, k, points) for k in range(dim)], dtype=np.int64)


def ronkin_estimate(
    f: ExpSum,
    x: typing.Sequence[float],
    sample_count: typing.Optional[int] = None,
    seed: typing.Optional[int] = None,
    shifts: int = 8,
) -> RonkinEstimate:
    """
    Average of log|f_χ(x)| over the character torus by a randomly shifted rank-1 lattice rule;
    the standard error comes from the spread between the shifts.
    """
    sample_count = config.RONKIN_SAMPLES if sample_count is None else sample_count
    seed = config.SEED if seed is None else seed
    x = np.asarray(x, dtype=float)
    rho = character_coordinates(f.support).shape[1]

    with np.errstate(divide="ignore"):
        terms = x @ f.exponent_matrix() + f.log_moduli()
    peak = terms.max()
    # the terms of f at x, scaled by exp(-peak)
    scaled = f.with_coefficients(f.coefficient_array() * np.exp(x @ f.exponent_matrix() - peak))

    if rho == 0:
        value = float(peak + np.log(abs(scaled.coefficient_array().sum())))
        return RonkinEstimate(value=value, stderr=0.0)

    per_shift = max(sample_count // shifts, 1)
    generator = _korobov_generator(per_shift, rho)
    lattice = (np.arange(per_shift)[:, None] * generator[None, :] % per_shift) / per_shift
    rng = np.random.default_rng(seed)
    means = []
    clipped = 0
    for _ in range(shifts):
        phases = 2 * np.pi * ((lattice + rng.random(rho)) % 1.0)
        values = np.array(
            [abs(perturb_character(scaled, p).coefficient_array().sum()) for p in phases]
        )
        with np.errstate(divide="ignore"):
            logs = np.log(values)
        low = logs < -745
        clipped += int(np.count_nonzero(low))
        means.append(np.where(low, -745.0, logs).mean())
    if clipped:
        logger.warning("Clipped %d log-singular samples of the Ronkin integrand", clipped)
    means = np.array(means)
    stderr = float(means.std(ddof=1) / math.sqrt(shifts)) if shifts > 1 else 0.0
    return RonkinEstimate(value=float(peak + means.mean()), stderr=stderr, clipped=clipped)
