"""
Barycentric circuits: equilibrium points, the hypocycloid shaped coefficient region and
certificates for components of the amoeba obtained through lifts
"""

import functools
import logging
import math
import time
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from . import config, exact
from .exceptions import (
    CaissonException,
    EquilibriumOffSubspace,
    InvalidGrid,
    NotACircuitLift,
    ProblemFileError,
    RegionInconclusive,
)
from .expsum import ExpSum, dehomogenize, phi_transport
from .orders import order_pullback
from .report import CERTIFIED, CertificateReport, StageResult
from .scalars import ExtScalar
from .support_lattice import LiftRelation, pivot_row

logger = logging.getLogger(__name__)

INSIDE_TOLERANCE = 1e-9
SUBSPACE_TOLERANCE = 1e-9
EQUILIBRIUM_RESIDUAL = 1e-10

Column = typing.Tuple[ExtScalar, ...]


class Verdict(Enum):
    CERTIFIED_OUTSIDE = "CertifiedOutside"
    HEURISTIC_INSIDE = "HeuristicInside"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BarycentricCircuit:
    """
    n + 1 affinely independent vertices and their barycenter γ, read as
    f = sum_j c_j exp(<z, α(j)>) - c_γ exp(<z, γ>)
    """

    vertices: typing.Tuple[Column, ...]
    barycenter: Column
    simplex_coeffs: typing.Tuple[complex, ...]
    barycenter_coeff: complex
    vertex_indices: typing.Tuple[int, ...]
    barycenter_index: int

    @property
    def n(self) -> int:
        return len(self.barycenter)

    def offsets(self) -> np.ndarray:
        """α(j) - γ, one row per vertex"""
        return np.array(
            [[(a - g).approximate() for a, g in zip(v, self.barycenter)] for v in self.vertices],
            dtype=float,
        )

    def vertex_matrix(self) -> np.ndarray:
        return np.array([[e.approximate() for e in v] for v in self.vertices], dtype=float)

    @property
    def radius(self) -> float:
        """(prod_j |c_j|)^(1/(n+1))"""
        return float(np.exp(np.mean(np.log(np.abs(self.simplex_coeffs)))))

    @property
    def phases(self) -> np.ndarray:
        return np.angle(np.array(self.simplex_coeffs, dtype=complex))

    @property
    def outer_bound(self) -> float:
        return 2 * (self.n + 1) * self.radius


@dataclass(frozen=True)
class RegionProbe:
    c: complex
    verdict: Verdict
    margin: float
    witness: typing.Optional[typing.Tuple[float, ...]] = None

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "c": {"re": self.c.real, "im": self.c.imag},
            "verdict": self.verdict.value,
            "margin": self.margin,
            "witness": list(self.witness) if self.witness is not None else None,
        }


def _is_barycenter(columns: typing.List[Column], index: int) -> bool:
    n = len(columns[index])
    others = [c for j, c in enumerate(columns) if j != index]
    for k in range(n):
        total = others[0][k]
        for column in others[1:]:
            total = total + column[k]
        if total != columns[index][k].scale(n + 1):
            return False
    return True


def detect_circuit(f: ExpSum) -> typing.Optional[BarycentricCircuit]:
    """
    The circuit formed by the support of a dehomogenized sum with n + 2 terms, if one column is
    the exact mean of the others
    """
    g = f if f.affine else dehomogenize(f)
    n, size = g.dim, g.size
    if size != n + 2:
        logger.debug("%d terms in %d variables cannot form a barycentric circuit", size, n)
        return None
    columns = g.support.columns()
    field, _ = exact.field_for(g.support.basis)
    for index in range(size):
        if not _is_barycenter(columns, index):
            continue
        vertex_indices = tuple(j for j in range(size) if j != index)
        base = columns[vertex_indices[0]]
        differences = [
            [a - b for a, b in zip(columns[j], base)] for j in vertex_indices[1:]
        ]
        if n and exact.rank(field, exact.grid_to_exprs(differences), n) != n:
            logger.debug("Vertices around column %d are affinely dependent", index)
            continue
        simplex_coeffs = tuple(g.coefficients[j] for j in vertex_indices)
        if any(c == 0 for c in simplex_coeffs):
            logger.debug("Vanishing vertex coefficient around column %d", index)
            continue
        return BarycentricCircuit(
            vertices=tuple(columns[j] for j in vertex_indices),
            barycenter=columns[index],
            simplex_coeffs=simplex_coeffs,
            barycenter_coeff=-g.coefficients[index],
            vertex_indices=vertex_indices,
            barycenter_index=index,
        )
    return None


def equilibrium_point(circuit: BarycentricCircuit) -> np.ndarray:
    """The point where all vertex terms have the same modulus"""
    vertices = circuit.vertex_matrix()
    moduli = np.log(np.abs(np.array(circuit.simplex_coeffs, dtype=complex)))
    matrix = vertices[1:] - vertices[0]
    rhs = moduli[0] - moduli[1:]
    x = lu_solve(lu_factor(matrix), rhs)
    residual = float(np.linalg.norm(matrix @ x - rhs))
    if residual > EQUILIBRIUM_RESIDUAL:
        logger.warning("Equilibrium point solved with residual %g", residual)
    return x


def psi(circuit: BarycentricCircuit, phis: np.ndarray) -> np.ndarray:
    """ψ(φ) = R sum_j exp(i(arg c_j + <α(j) - γ, φ>)) for each row of phis"""
    phis = np.asarray(phis, dtype=float)
    phase = circuit.phases + phis @ circuit.offsets().T
    return circuit.radius * np.exp(1j * phase).sum(axis=-1)


def _psi_jacobian(circuit: BarycentricCircuit, phi: np.ndarray) -> np.ndarray:
    offsets = circuit.offsets()
    terms = 1j * circuit.radius * np.exp(1j * (circuit.phases + offsets @ phi))
    derivative = terms @ offsets
    return np.vstack([derivative.real, derivative.imag])


@dataclass(eq=False)
class RegionSampler:
    """ψ on the uniform torus grid with step h = 2π / grid, kept in a KD-tree"""

    circuit: BarycentricCircuit
    grid: int
    tree: cKDTree
    covering: float

    @classmethod
    def build(cls, circuit: BarycentricCircuit, grid: int) -> "RegionSampler":
        n = circuit.n
        step = 2 * math.pi / grid
        axes = [np.arange(grid) * step] * n
        phis = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        values = psi(circuit, phis)
        tree = cKDTree(np.column_stack([values.real, values.imag]))
        # |ψ(φ) - ψ(φ')| <= R sum_k sum_j |<α(j) - γ, e_k>| |φ_k - φ'_k|
        covering = circuit.radius * (step / 2) * float(np.abs(circuit.offsets()).sum())
        logger.debug("Sampled region on %d^%d points, covering radius %g", grid, n, covering)
        return cls(circuit=circuit, grid=grid, tree=tree, covering=covering)

    def grid_point(self, index: int) -> np.ndarray:
        position = np.unravel_index(index, (self.grid,) * self.circuit.n)
        return np.array(position, dtype=float) * (2 * math.pi / self.grid)


@functools.lru_cache(maxsize=8)
def region_sampler(circuit: BarycentricCircuit, grid: int) -> RegionSampler:
    if grid < 8:
        raise InvalidGrid(f"A torus grid needs at least 8 points per axis, got {grid}")
    return RegionSampler.build(circuit, grid)


def _segment_probe(circuit: BarycentricCircuit, c: complex) -> RegionProbe:
    """For n = 1 the region is the segment R exp(i(a0 + a1)/2) [-2, 2]"""
    a0, a1 = circuit.phases
    d0 = circuit.offsets()[0, 0]
    radius = circuit.radius
    w = c * np.exp(-0.5j * (a0 + a1))
    s = float(np.clip(w.real, -2 * radius, 2 * radius))
    distance = abs(w - s)
    if distance > INSIDE_TOLERANCE:
        return RegionProbe(c=c, verdict=Verdict.CERTIFIED_OUTSIDE, margin=distance)
    u = math.acos(s / (2 * radius))
    phi = ((u - (a0 - a1) / 2) / d0) % (2 * math.pi)
    return RegionProbe(c=c, verdict=Verdict.HEURISTIC_INSIDE, margin=-distance, witness=(phi,))


def region_probe(
    circuit: BarycentricCircuit,
    c: complex,
    grid: typing.Optional[int] = None,
    neighbours: int = 8,
) -> RegionProbe:
    """
    Locates c relative to ψ(𝕋^n). CertifiedOutside is rigorous up to floating point, the
    grid minimum distance exceeds the covering radius. HeuristicInside needs a refined preimage.
    """
    c = complex(c)
    grid = config.torus_grid(circuit.n) if grid is None else grid
    if grid < 8:
        raise InvalidGrid(f"A torus grid needs at least 8 points per axis, got {grid}")
    if circuit.n == 1:
        return _segment_probe(circuit, c)
    # |ψ| <= (n + 1) R on the whole torus
    bound = (circuit.n + 1) * circuit.radius
    if abs(c) > bound:
        return RegionProbe(c=c, verdict=Verdict.CERTIFIED_OUTSIDE, margin=abs(c) - bound)

    sampler = region_sampler(circuit, grid)
    distances, indices = sampler.tree.query([c.real, c.imag], k=neighbours)
    distances, indices = np.atleast_1d(distances), np.atleast_1d(indices)
    margin = float(distances[0] - sampler.covering)
    if margin > 0:
        return RegionProbe(c=c, verdict=Verdict.CERTIFIED_OUTSIDE, margin=margin)

    def residual(phi):
        value = psi(circuit, phi) - c
        return np.array([value.real, value.imag])

    for index in indices:
        result = least_squares(
            residual,
            sampler.grid_point(int(index)),
            jac=lambda phi: _psi_jacobian(circuit, phi),
            method="trf",
            ftol=1e-14,
            xtol=1e-14,
            gtol=1e-14,
            max_nfev=200,
        )
        if math.hypot(*result.fun) < INSIDE_TOLERANCE:
            witness = tuple(float(e) for e in np.mod(result.x, 2 * math.pi))
            return RegionProbe(
                c=c, verdict=Verdict.HEURISTIC_INSIDE, margin=margin, witness=witness
            )
    return RegionProbe(c=c, verdict=Verdict.UNKNOWN, margin=margin)


def hypocycloid_implicit(example: str, r: float, theta: float) -> float:
    """
    Implicit boundary of the region of the two reference circuits with unit vertex
    coefficients, θ = arg(c_γ): "ex1" is the planar triangle, "ex2" the tetrahedron.
    """
    key = example.lower()
    if key == "ex1":
        return -27 + 18 * r**2 + r**4 - 8 * r**3 * math.cos(3 * theta)
    if key == "ex2":
        return -4096 + 768 * r**2 + 6 * r**4 + r**6 - 54 * r**4 * math.cos(4 * theta)
    raise ProblemFileError(f"Unknown reference circuit {example!r}, use ex1 or ex2")


def _inside(circuit: BarycentricCircuit, c: complex, grid: typing.Optional[int]) -> bool:
    return region_probe(circuit, c, grid).verdict is Verdict.HEURISTIC_INSIDE


def boundary_radius(
    circuit: BarycentricCircuit,
    theta: float,
    grid: typing.Optional[int] = None,
    lower: float = 0.0,
    tolerance: float = 1e-7,
) -> float:
    """
    Radius where the ray of argument θ (of c_γ) leaves the region, searched above `lower`.
    Returns `lower` when the ray is already outside there.
    """
    direction = complex(math.cos(theta), math.sin(theta))
    if lower > 0 and not _inside(circuit, lower * direction, grid):
        return lower
    low, high = lower, circuit.outer_bound
    while high - low > tolerance:
        middle = (low + high) / 2
        if _inside(circuit, middle * direction, grid):
            low = middle
        else:
            high = middle
    return (low + high) / 2


def _wrap_pi(value: float) -> float:
    """Radians to units of π in [-1, 1)"""
    return (value / math.pi + 1) % 2 - 1


def safe_argument_intervals(
    circuit: BarycentricCircuit,
    radius: float,
    samples: int = 400,
    grid: typing.Optional[int] = None,
    threads: int = 1,
    refinements: int = 12,
) -> typing.List[typing.Tuple[float, float]]:
    """
    Arguments θ of the raw coefficient c = -c_γ for which every c = r exp(iθ) with r > radius
    lies outside the region. Intervals are in units of π rounded to 0.01; an interval with
    start > end wraps around π.
    """
    if radius <= 0:
        raise ProblemFileError(f"Radius must be positive, got {radius}")

    # the region is star shaped around 0, so the boundary lies below `radius` exactly when the
    # point at `radius` is already outside
    def safe(theta: float) -> bool:
        return not _inside(circuit, -radius * complex(math.cos(theta), math.sin(theta)), grid)

    if circuit.n > 1:
        region_sampler(circuit, config.torus_grid(circuit.n) if grid is None else grid)

    step = 2 * math.pi / samples
    thetas = [-math.pi + k * step for k in range(samples)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            flags = list(pool.map(safe, thetas))
    else:
        flags = [safe(theta) for theta in thetas]

    if all(flags):
        return [(-1.0, 1.0)]
    if not any(flags):
        return []

    transitions = []
    for k in range(samples):
        if flags[k] == flags[(k + 1) % samples]:
            continue
        low, high = thetas[k], thetas[k] + step
        for _ in range(refinements):
            middle = (low + high) / 2
            if safe(middle) == flags[k]:
                low = middle
            else:
                high = middle
        kind = "end" if flags[k] else "start"
        transitions.append((kind, (low + high) / 2))

    while transitions[0][0] != "start":
        transitions.append(transitions.pop(0))
    intervals = []
    for (_, start), (_, end) in zip(transitions[::2], transitions[1::2]):
        intervals.append((round(_wrap_pi(start), 2), round(_wrap_pi(end), 2)))
    logger.debug("Safe intervals at radius %g: %s", radius, intervals)
    return sorted(intervals)


def equilibrium_preimage(
    f: ExpSum, circuit: BarycentricCircuit
) -> typing.Tuple[np.ndarray, float]:
    """
    Least squares point x in the native coordinates of the base support whose image x T meets
    the equilibrium conditions, and the residual of those conditions
    """
    exponents = f.exponent_matrix()
    logs = np.log(np.abs(np.array(circuit.simplex_coeffs, dtype=complex)))
    first, rest = circuit.vertex_indices[0], list(circuit.vertex_indices[1:])
    matrix = (exponents[:, rest] - exponents[:, [first]]).T
    rhs = logs[0] - logs[1:]
    x = np.linalg.lstsq(matrix, rhs, rcond=None)[0]
    return x, float(np.linalg.norm(matrix @ x - rhs))


def certify_component(
    f: ExpSum,
    lift: LiftRelation,
    grid: typing.Optional[int] = None,
    strict: bool = False,
) -> CertificateReport:
    """
    Certifies a nonempty complement component of order T γ when the lifted sum is a
    barycentric circuit whose equilibrium point lies on the image of x -> x T and whose
    barycenter coefficient avoids the region.

    With `strict` the failing stage raises its error instead of being reported.
    """
    report = CertificateReport()

    def fail(stage: StageResult, error: CaissonException) -> CertificateReport:
        stage.passed = False
        stage.detail["error"] = error.to_dict()
        report.verdict = type(error).__name__
        logger.info("Certificate stopped at %s: %s", stage.name, error.text)
        if strict:
            raise error
        return report

    started = time.perf_counter()
    g = phi_transport(f, lift)
    report.add(StageResult("transport", True, time.perf_counter() - started))

    started = time.perf_counter()
    circuit = detect_circuit(g)
    stage = report.add(StageResult("circuit_detection", True, time.perf_counter() - started))
    if circuit is None:
        return fail(stage, NotACircuitLift("The lifted support is not a barycentric circuit"))
    stage.detail.update(
        barycenter_index=circuit.barycenter_index,
        barycenter=[e.to_json() for e in circuit.barycenter],
        barycenter_coeff={"re": circuit.barycenter_coeff.real, "im": circuit.barycenter_coeff.imag},
    )

    started = time.perf_counter()
    point = equilibrium_point(circuit)
    stage = report.add(
        StageResult(
            "equilibrium",
            True,
            time.perf_counter() - started,
            {"point": [float(e) for e in point]},
        )
    )

    started = time.perf_counter()
    native, residual = equilibrium_preimage(f, circuit)
    stage = report.add(StageResult("subspace_check", True, time.perf_counter() - started))
    stage.detail.update(residual=residual, preimage=[float(e) for e in native])
    report.margins["subspace_residual"] = residual
    if residual >= SUBSPACE_TOLERANCE:
        return fail(
            stage,
            EquilibriumOffSubspace(
                f"The equilibrium point is {residual:.3g} away from the lifted subspace"
            ),
        )

    started = time.perf_counter()
    probe = region_probe(circuit, circuit.barycenter_coeff, grid)
    stage = report.add(StageResult("region_probe", True, time.perf_counter() - started))
    stage.detail.update(probe.as_dict())
    report.margins["region"] = probe.margin
    if probe.verdict is not Verdict.CERTIFIED_OUTSIDE:
        return fail(
            stage,
            RegionInconclusive(
                f"The barycenter coefficient is not certified outside the region "
                f"({probe.verdict.value})",
                content=probe.as_dict(),
            ),
        )

    beta = [e.rational_value() for e in lift.lift.column(circuit.barycenter_index)]
    order = order_pullback(lift.factor, beta)
    if not f.affine:
        p = pivot_row(f.support)
        order = tuple(e for i, e in enumerate(order) if i != p)
    report.order = order
    report.verdict = CERTIFIED
    logger.debug("Certified component of order %s", [str(e) for e in order])
    return report
