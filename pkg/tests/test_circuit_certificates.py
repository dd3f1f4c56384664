import cmath
import math

import numpy as np
import pytest

from caisson.circuit_certificates import (
    Verdict,
    boundary_radius,
    certify_component,
    detect_circuit,
    equilibrium_point,
    hypocycloid_implicit,
    psi,
    region_probe,
    region_sampler,
    safe_argument_intervals,
)
from caisson.exceptions import (
    EquilibriumOffSubspace,
    InvalidGrid,
    ProblemFileError,
    RegionInconclusive,
)
from caisson.expsum import ExpSum, phi_transport
from caisson.membership import dominance_threshold
from caisson.orders import roots_univariate
from caisson.report import STAGES
from caisson.support_lattice import LiftRelation, SupportMatrix

from .conftest import NONIC_A, nonic, polar, sextic


def univariate(*coefficients):
    return ExpSum(SupportMatrix.from_rationals([[0, 1, 2]], affine=True), coefficients)


@pytest.fixture
def triangle(nonic_lift):
    """Lifted 1 + w^3 + c w^4 + w^9, vertices (0, 0), (3, 6), (9, 0) around (4, 2)"""
    return detect_circuit(phi_transport(nonic(1.0), nonic_lift))


@pytest.fixture
def tetrahedron(sextic_lift):
    return detect_circuit(phi_transport(sextic(1.0), sextic_lift))


class TestDetect:
    def test_segment(self):
        circuit = detect_circuit(univariate(1, -2, 4))
        assert circuit.barycenter_index == 1
        assert circuit.vertex_indices == (0, 2)
        assert circuit.barycenter_coeff == 2
        assert circuit.n == 1

    def test_lifted(self, triangle, tetrahedron):
        assert triangle.barycenter_index == 2
        assert [e.rational_value() for e in triangle.barycenter] == [4, 2]
        assert triangle.radius == pytest.approx(1.0)
        assert tetrahedron.barycenter_index == 2
        assert tetrahedron.n == 3

    @pytest.mark.parametrize(
        "f",
        [
            nonic(1.0),
            sextic(1.0),
            ExpSum(SupportMatrix.from_rationals([[0, 1, 3]], affine=True), (1, 1, 1)),
        ],
    )
    def test_not_a_circuit(self, f):
        assert detect_circuit(f) is None


def test_equilibrium_point():
    circuit = detect_circuit(univariate(1, 1, 4))
    np.testing.assert_allclose(equilibrium_point(circuit), [-math.log(2)])


def test_equilibrium_point_lifted(triangle):
    np.testing.assert_allclose(equilibrium_point(triangle), [0.0, 0.0], atol=1e-12)


@pytest.mark.parametrize(
    ["example", "r", "theta", "value"],
    [
        ("ex1", 0.0, 0.0, -27.0),
        ("ex1", 3.0, 0.0, 0.0),
        ("ex1", 1.0, math.pi / 3, 0.0),
        ("ex2", 4.0, 0.0, 0.0),
        ("EX2", 0.0, 1.0, -4096.0),
    ],
)
def test_hypocycloid_implicit(example, r, theta, value):
    assert hypocycloid_implicit(example, r, theta) == pytest.approx(value, abs=1e-9)


def test_hypocycloid_unknown():
    with pytest.raises(ProblemFileError):
        hypocycloid_implicit("ex3", 1.0, 0.0)


class TestSegmentProbe:
    def test_inside(self):
        circuit = detect_circuit(univariate(1, -1, 1))
        probe = region_probe(circuit, 1.0)
        assert probe.verdict is Verdict.HEURISTIC_INSIDE
        assert abs(psi(circuit, np.array(probe.witness)) - 1.0) < 1e-9

    @pytest.mark.parametrize(["c", "margin"], [(3.0, 1.0), (1j, 1.0), (-2.5, 0.5)])
    def test_outside(self, c, margin):
        circuit = detect_circuit(univariate(1, -1, 1))
        probe = region_probe(circuit, c)
        assert probe.verdict is Verdict.CERTIFIED_OUTSIDE
        assert probe.margin == pytest.approx(margin)


class TestRegionProbe:
    def test_covering_radius(self, triangle):
        sampler = region_sampler(triangle, 512)
        assert sampler.covering == pytest.approx(18 * math.pi / 512)

    def test_origin_inside(self, triangle):
        probe = region_probe(triangle, 0.0, grid=64)
        assert probe.verdict is Verdict.HEURISTIC_INSIDE
        assert abs(psi(triangle, np.array(probe.witness))) < 1e-9

    def test_inside_near_cusp(self, triangle):
        # h(2, 0) < 0 for the triangle hypocycloid
        assert region_probe(triangle, 2.0, grid=128).verdict is Verdict.HEURISTIC_INSIDE

    def test_outside_between_cusps(self, triangle):
        c = cmath.rect(2.9, math.pi / 3)
        assert hypocycloid_implicit("ex1", 2.9, math.pi / 3) > 0
        probe = region_probe(triangle, c, grid=128)
        assert probe.verdict is Verdict.CERTIFIED_OUTSIDE
        assert probe.margin > 1.0

    def test_small_grid(self, triangle):
        with pytest.raises(InvalidGrid):
            region_probe(triangle, 0.0, grid=4)

    def test_boundary_radius(self, triangle):
        assert boundary_radius(triangle, math.pi / 3, grid=128) == pytest.approx(1.0, abs=0.02)


class TestDominatingCoefficient:
    def test_threshold_is_outer_radius(self, triangle, tetrahedron, nonic_lift, sextic_lift):
        lifted = phi_transport(nonic(1.0), nonic_lift)
        assert dominance_threshold(lifted, 2).value == pytest.approx(3 * triangle.radius)
        lifted = phi_transport(sextic(1.0), sextic_lift)
        assert dominance_threshold(lifted, 2).value == pytest.approx(4 * tetrahedron.radius)

    def test_just_above_threshold(self, triangle):
        probe = region_probe(triangle, polar(3.005, 0.666), grid=64)
        assert probe.verdict is Verdict.CERTIFIED_OUTSIDE
        assert probe.margin == pytest.approx(0.005)

    @pytest.mark.parametrize("seed", range(4))
    def test_dominating_values_are_outside(self, triangle, tetrahedron, seed):
        rng = np.random.default_rng(seed)
        for circuit in (triangle, tetrahedron):
            bound = (circuit.n + 1) * circuit.radius
            moduli = bound * rng.uniform(1.0001, 1.0333, 50)
            for modulus, arg in zip(moduli, rng.uniform(-1, 1, 50)):
                probe = region_probe(circuit, polar(modulus, arg), grid=32)
                assert probe.verdict is Verdict.CERTIFIED_OUTSIDE
                assert probe.margin > 0


class TestCertify:
    def test_line(self, nonic_lift):
        report = certify_component(nonic(polar(2.5, 5 / 6)), nonic_lift)
        assert report.certified
        assert [e.rational_value() for e in report.order] == [4]
        assert [stage.name for stage in report.stages] == list(STAGES)
        assert report.margins["region"] > 0
        assert report.margins["subspace_residual"] == pytest.approx(0.0, abs=1e-12)

    def test_plane(self, sextic_lift):
        report = certify_component(sextic(polar(3.5, 0.63)), sextic_lift)
        assert report.certified
        assert [e.rational_value() for e in report.order] == [3, 3]
        assert report.as_dict()["order"] == [["3"], ["3"]]

    def test_inside_region(self, nonic_lift):
        report = certify_component(nonic(0.1), nonic_lift, grid=64)
        assert not report.certified
        assert report.verdict == "RegionInconclusive"
        assert report.failed_stage == "region_probe"
        assert report.order is None

    def test_strict(self, nonic_lift):
        with pytest.raises(RegionInconclusive):
            certify_component(nonic(0.1), nonic_lift, grid=64, strict=True)

    def test_not_a_circuit(self, plane):
        report = certify_component(plane, LiftRelation.identity(plane.support))
        assert report.verdict == "NotACircuitLift"
        assert report.failed_stage == "circuit_detection"
        assert len(report.stages) == 2

    def test_equilibrium_off_subspace(self, nonic_lift):
        f = ExpSum(SupportMatrix.from_rationals(NONIC_A), (1, 2, 10, 1))
        report = certify_component(f, nonic_lift)
        assert report.verdict == "EquilibriumOffSubspace"
        assert report.margins["subspace_residual"] > 0.1
        with pytest.raises(EquilibriumOffSubspace):
            certify_component(f, nonic_lift, strict=True)

    def test_report_without_timings(self, nonic_lift):
        report = certify_component(nonic(polar(2.5, 5 / 6)), nonic_lift, grid=64)
        data = report.as_dict(with_timings=False)
        assert all("seconds" not in stage for stage in data["stages"])
        assert data["verdict"] == "Certified"


def assert_intervals(found, expected):
    assert len(found) == len(expected)
    for (start, end), (a, b) in zip(found, expected):
        assert start == pytest.approx(a, abs=0.011)
        assert end == pytest.approx(b, abs=0.011)


@pytest.mark.slow
def test_triangle_safe_intervals(triangle):
    found = safe_argument_intervals(triangle, 2.5, grid=128)
    assert_intervals(found, [(-0.99, -0.34), (-0.32, 0.32), (0.34, 0.99)])


@pytest.mark.slow
def test_triangle_safe_intervals_default_grid(triangle):
    found = safe_argument_intervals(triangle, 2.5)
    assert_intervals(found, [(-0.99, -0.34), (-0.32, 0.32), (0.34, 0.99)])
    found = safe_argument_intervals(triangle, 1.5)
    assert_intervals(found, [(-0.91, -0.42), (-0.25, 0.25), (0.42, 0.91)])


@pytest.mark.slow
def test_triangle_safe_intervals_near(triangle):
    found = safe_argument_intervals(triangle, 1.5, grid=128)
    assert_intervals(found, [(-0.91, -0.42), (-0.25, 0.25), (0.42, 0.91)])


@pytest.mark.slow
def test_tetrahedron_safe_intervals(tetrahedron):
    found = safe_argument_intervals(tetrahedron, 2.5, grid=64)
    assert_intervals(
        found, [(-0.92, -0.58), (-0.42, -0.08), (0.08, 0.42), (0.58, 0.92)]
    )


@pytest.mark.slow
def test_tetrahedron_safe_intervals_near_cusps(tetrahedron):
    found = safe_argument_intervals(tetrahedron, 3.5)
    assert_intervals(
        found, [(-0.99, -0.51), (-0.49, -0.01), (0.01, 0.49), (0.51, 0.99)]
    )


@pytest.mark.slow
def test_intervals_agree_with_certificates(triangle, nonic_lift):
    found = safe_argument_intervals(triangle, 2.5, grid=128)
    for arg in np.linspace(-0.95, 0.95, 39):
        if any(abs(arg - end) < 0.03 for interval in found for end in interval):
            continue
        safe = any(start < arg < end for start, end in found)
        report = certify_component(nonic(polar(2.5, arg)), nonic_lift, grid=128)
        assert report.certified == safe, arg


def test_safe_intervals_far_out(triangle):
    assert safe_argument_intervals(triangle, 10.0, samples=16, grid=64) == [(-1.0, 1.0)]


def test_safe_intervals_radius(triangle):
    with pytest.raises(ProblemFileError):
        safe_argument_intervals(triangle, 0.0)


def near_boundary(example, r, theta, step=0.25):
    """Whether the implicit boundary changes sign within `step` radially or along the circle"""
    signs = {
        hypocycloid_implicit(example, r + dr, theta + dt) > 0
        for dr, dt in [(0, 0), (-step, 0), (step, 0), (0, -step / r), (0, step / r)]
    }
    return len(signs) > 1


@pytest.mark.slow
def test_region_matches_implicit_boundary(triangle):
    rng = np.random.default_rng(2024)
    checked = 0
    for r, theta in zip(rng.uniform(0.3, 3.6, 200), rng.uniform(-math.pi, math.pi, 200)):
        if near_boundary("ex1", r, theta):
            continue
        probe = region_probe(triangle, cmath.rect(r, theta))
        if hypocycloid_implicit("ex1", r, theta) > 0:
            assert probe.verdict is Verdict.CERTIFIED_OUTSIDE, (r, theta)
        else:
            assert probe.verdict is Verdict.HEURISTIC_INSIDE, (r, theta)
            assert abs(psi(triangle, np.array(probe.witness)) - cmath.rect(r, theta)) < 1e-8
        checked += 1
    assert checked > 150


@pytest.mark.slow
def test_certified_orders_count_roots(nonic_lift):
    """A certified order k of 1 + w^3 + c w^4 + w^9 at x = 0 means k roots inside |w| = 1"""
    rng = np.random.default_rng(3)
    certified = 0
    for modulus, arg in zip(rng.uniform(1.5, 6.0, 200), rng.uniform(-1, 1, 200)):
        c = polar(modulus, arg)
        report = certify_component(nonic(c), nonic_lift, grid=128)
        if not report.certified:
            continue
        k = int(report.order[0].rational_value())
        moduli = roots_univariate([1, 0, 0, 1, c, 0, 0, 0, 0, 1]).moduli
        assert k == 4
        assert moduli[k - 1] < 1 - 1e-6 and moduli[k] > 1 + 1e-6
        certified += 1
        if certified == 25:
            break
    assert certified == 25
