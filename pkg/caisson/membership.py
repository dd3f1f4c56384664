"""
Membership in lopsided amoebas and caissons, grid rasters and their complement components
"""

import logging
import math
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.optimize import linprog
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from .exceptions import InvalidGrid, RootFindingError, ShapeMismatch, WindowMismatch
from .expsum import ExpSum, dehomogenize, phi_transport, univariate_slice
from .support_lattice import LiftRelation
from .utils import parse_float_list

logger = logging.getLogger(__name__)

# relative slack on strict domination, ties count as non-lopsided
DOMINATION_SLACK = 1e-12


@dataclass(frozen=True)
class Window:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise InvalidGrid(f"Window {self.as_list()} must have positive side lengths")

    @classmethod
    def from_string(cls, text: str) -> "Window":
        return cls(*parse_float_list(text, 4))

    @classmethod
    def centered(cls, center: typing.Sequence[float], half_width: float) -> "Window":
        cx, cy = (list(center) + [0.0, 0.0])[:2]
        return cls(cx - half_width, cx + half_width, cy - half_width, cy + half_width)

    def as_list(self) -> typing.List[float]:
        return [self.x0, self.x1, self.y0, self.y1]

    @property
    def center(self) -> typing.Tuple[float, float]:
        return (self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2


@dataclass(eq=False)
class GridRaster:
    """flags[i, j] is the pixel with centre (xs[j], ys[i])"""

    window: Window
    resolution: int
    flags: np.ndarray

    def __post_init__(self):
        self.flags = np.asarray(self.flags, dtype=bool)
        if self.flags.shape != (self.resolution, self.resolution):
            raise InvalidGrid(
                f"Flags of shape {self.flags.shape} do not match resolution {self.resolution}"
            )

    def centres(self) -> typing.Tuple[np.ndarray, np.ndarray]:
        return pixel_centres(self.window, self.resolution)

    def true_points(self) -> np.ndarray:
        xs, ys = self.centres()
        rows, cols = np.nonzero(self.flags)
        return np.column_stack([xs[cols], ys[rows]])


@dataclass(eq=False)
class ComplementComponent:
    label: int
    pixels: np.ndarray
    representative: typing.Tuple[float, float]
    representative_pixel: typing.Tuple[int, int]
    touches_boundary: bool
    order: typing.Optional[typing.Tuple] = None

    @property
    def size(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class ThresholdResult:
    value: float
    recession: bool
    dropped: typing.Tuple[int, ...] = ()
    minimizer: typing.Optional[typing.Tuple[float, ...]] = None


def pixel_centres(window: Window, resolution: int) -> typing.Tuple[np.ndarray, np.ndarray]:
    steps = (np.arange(resolution) + 0.5) / resolution
    return (
        window.x0 + steps * (window.x1 - window.x0),
        window.y0 + steps * (window.y1 - window.y0),
    )


def dominators(f: ExpSum, points: np.ndarray) -> np.ndarray:
    """Index of the strictly dominating term at each point (row), -1 where there is none"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[-1] != f.dim:
        raise ShapeMismatch(f"Points have {points.shape[-1]} coordinates, expected {f.dim}")
    terms = points @ f.exponent_matrix() + f.log_moduli()
    top = np.argmax(terms, axis=1)
    rows = np.arange(len(points))
    peak = terms[rows, top]
    with np.errstate(under="ignore", invalid="ignore"):
        weights = np.exp(terms - peak[:, None])
    weights[rows, top] = 0.0
    rest = weights.sum(axis=1)
    return np.where(rest * (1 + DOMINATION_SLACK) < 1.0, top, -1)


def lopsided_dominator(f: ExpSum, x: typing.Sequence[float]) -> typing.Optional[int]:
    index = int(dominators(f, np.asarray(x, dtype=float)[None, :])[0])
    return None if index < 0 else index


def in_lopsided_amoeba(f: ExpSum, x: typing.Sequence[float]) -> bool:
    return lopsided_dominator(f, x) is None


def lopsided_flags(f: ExpSum, points: np.ndarray) -> np.ndarray:
    """Vectorized in_lopsided_amoeba"""
    return dominators(f, points) < 0


def caisson_lopsided_member(f: ExpSum, lift: LiftRelation, x: typing.Sequence[float]) -> bool:
    """Lopsided outer approximation of the small caisson, tested at ι(x) for Φf"""
    return in_lopsided_amoeba(phi_transport(f, lift), lift.embed(x))


def slice_member(
    f: ExpSum,
    x: typing.Sequence[float],
    tolerance: float,
    samples: int = 8,
    seed: int = 0,
) -> bool:
    """
    Sampled membership in the amoeba: some zero of f with the sampled phases has its last
    log-coordinate within `tolerance` of x.
    """
    from .orders import roots_univariate

    x = np.asarray(x, dtype=float)
    j = f.dim - 1
    rng = np.random.default_rng(seed)
    for _ in range(samples if f.dim > 1 else 1):
        z = x + 1j * rng.uniform(0, 2 * np.pi, f.dim)
        poly = univariate_slice(f, j, z)
        if np.count_nonzero(poly.coeffs) < 2:
            continue
        try:
            roots = roots_univariate(poly.coeffs).roots
        except RootFindingError as e:
            logger.debug("Skipping slice at %s: %s", x, e)
            continue
        roots = roots[roots != 0]
        if np.any(np.abs(poly.log_moduli(roots) - x[j]) <= tolerance):
            return True
    return False


def caisson_slice_member(
    f: ExpSum,
    lift: LiftRelation,
    x: typing.Sequence[float],
    tolerance: float,
    samples: int = 8,
    seed: int = 0,
) -> bool:
    return slice_member(phi_transport(f, lift), lift.embed(x), tolerance, samples, seed)


def raster(
    predicate: typing.Callable,
    window: Window,
    resolution: int,
    threads: int = 1,
    vectorized: bool = False,
) -> GridRaster:
    """
    Evaluates the predicate at every pixel centre, row by row.

    A vectorized predicate receives all points (x, y) of one row as an array and returns flags.
    """
    if resolution < 1:
        raise InvalidGrid(f"Resolution must be positive, got {resolution}")
    xs, ys = pixel_centres(window, resolution)

    def compute_row(i: int) -> np.ndarray:
        points = np.column_stack([xs, np.full(resolution, ys[i])])
        if vectorized:
            return np.asarray(predicate(points), dtype=bool)
        return np.array([bool(predicate(point)) for point in points], dtype=bool)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(compute_row, range(resolution)))
    else:
        rows = [compute_row(i) for i in range(resolution)]
    return GridRaster(window=window, resolution=resolution, flags=np.vstack(rows))


def cover_raster(
    dominate: typing.Callable[[np.ndarray], np.ndarray],
    window: Window,
    resolution: int,
    threads: int = 1,
) -> GridRaster:
    """
    Flags every pixel that meets the lopsided amoeba, however thin the set is there.

    `dominate` maps an array of points to dominator indices (-1 where none dominates). The points
    dominated by one term form a convex set, so a pixel misses the amoeba exactly when its four
    corners share a dominator. Complement components then never merge across tentacles.
    """
    if resolution < 1:
        raise InvalidGrid(f"Resolution must be positive, got {resolution}")
    xs = np.linspace(window.x0, window.x1, resolution + 1)
    ys = np.linspace(window.y0, window.y1, resolution + 1)

    def corner_row(i: int) -> np.ndarray:
        return np.asarray(dominate(np.column_stack([xs, np.full(resolution + 1, ys[i])])))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(corner_row, range(resolution + 1)))
    else:
        rows = [corner_row(i) for i in range(resolution + 1)]
    corners = np.vstack(rows)
    low_left = corners[:-1, :-1]
    free = (
        (low_left >= 0)
        & (low_left == corners[:-1, 1:])
        & (low_left == corners[1:, :-1])
        & (low_left == corners[1:, 1:])
    )
    return GridRaster(window=window, resolution=resolution, flags=~free)


def components(grid: GridRaster) -> typing.List[ComplementComponent]:
    """4-connected components of the false pixels"""
    free = ~grid.flags
    labels, count = ndimage.label(free)
    xs, ys = grid.centres()
    if grid.flags.any():
        distance = ndimage.distance_transform_cdt(free, metric="chessboard")
    else:
        distance = None
        logger.warning("Raster has no true pixels, representatives fall back to the centre")

    result = []
    for label in range(1, count + 1):
        mask = labels == label
        if distance is not None:
            i, j = np.unravel_index(np.argmax(np.where(mask, distance, -1)), mask.shape)
        else:
            i = j = grid.resolution // 2
        touches = bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())
        result.append(
            ComplementComponent(
                label=label,
                pixels=np.argwhere(mask),
                representative=(float(xs[j]), float(ys[i])),
                representative_pixel=(int(i), int(j)),
                touches_boundary=touches,
            )
        )
    return result


def hausdorff(first: GridRaster, second: GridRaster) -> float:
    """Symmetric Hausdorff distance of the true pixel centres, inf if exactly one is empty"""
    if first.window != second.window or first.resolution != second.resolution:
        raise WindowMismatch("Rasters must share window and resolution")
    a = first.true_points()
    b = second.true_points()
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return math.inf
    forward, _ = cKDTree(b).query(a)
    backward, _ = cKDTree(a).query(b)
    return float(max(forward.max(), backward.max()))


def _recessive_terms(differences: np.ndarray) -> np.ndarray:
    """
    Terms that can be sent to zero simultaneously: maximize sum(s) subject to
    <a - a_i, d> + s_a <= 0, 0 <= s <= 1.
    """
    m, d = differences.shape
    result = linprog(
        c=np.concatenate([np.zeros(d), -np.ones(m)]),
        A_ub=np.hstack([differences, np.eye(m)]),
        b_ub=np.zeros(m),
        bounds=[(None, None)] * d + [(0, 1)] * m,
        method="highs",
    )
    if not result.success:
        logger.debug("Recession LP failed: %s", result.message)
        return np.zeros(m, dtype=bool)
    return result.x[d:] > 0.5


def _minimize_log_sum_exp(
    log_weights: np.ndarray, differences: np.ndarray, tolerance: float = 1e-10
) -> typing.Tuple[float, np.ndarray]:
    """Damped Newton on log sum exp(w_a + <D_a, x>)"""
    x = np.zeros(differences.shape[1])

    def objective(point):
        return logsumexp(log_weights + differences @ point)

    value = objective(x)
    for _ in range(200):
        terms = log_weights + differences @ x
        p = np.exp(terms - terms.max())
        p /= p.sum()
        gradient = differences.T @ p
        if np.linalg.norm(gradient) < tolerance:
            break
        hessian = differences.T @ (p[:, None] * differences) - np.outer(gradient, gradient)
        step = -np.linalg.lstsq(hessian, gradient, rcond=None)[0]
        if gradient @ step >= 0:
            step = -gradient
        t = 1.0
        while t > 1e-12:
            candidate = objective(x + t * step)
            if candidate <= value + 1e-4 * t * (gradient @ step):
                break
            t /= 2
        x = x + t * step
        value = objective(x)
    return value, x


def dominance_threshold(f: ExpSum, index: int) -> ThresholdResult:
    """
    inf_x sum_{a != index} |c_a| exp(<x, a - a_index>), the smallest |c_index| for which the
    index term can dominate somewhere.
    """
    if not f.affine:
        f = dehomogenize(f)
    if not 0 <= index < f.size:
        raise ShapeMismatch(f"Column {index} out of range")
    exponents = f.exponent_matrix()
    moduli = np.abs(f.coefficient_array())
    others = [a for a in range(f.size) if a != index and moduli[a] > 0]
    if not others:
        return ThresholdResult(value=0.0, recession=False)

    differences = (exponents[:, others] - exponents[:, [index]]).T
    log_weights = np.log(moduli[others])
    recessive = _recessive_terms(differences)
    dropped = tuple(others[k] for k in np.flatnonzero(recessive))
    if dropped:
        logger.warning("Terms %s recede from the dominance objective of term %d", dropped, index)
    if recessive.all():
        return ThresholdResult(value=0.0, recession=True, dropped=dropped)

    kept = ~recessive
    value, minimizer = _minimize_log_sum_exp(log_weights[kept], differences[kept])
    logger.debug("Dominance threshold of term %d: %.12g", index, math.exp(value))
    return ThresholdResult(
        value=math.exp(value),
        recession=bool(dropped),
        dropped=dropped,
        minimizer=tuple(float(e) for e in minimizer),
    )
