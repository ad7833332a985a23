import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from geophase.blochgeo import (
    BlochPath,
    BlochPoint,
    PathSegment,
    SegmentKind,
    absorber_polar_angle,
    attach_oracle,
    build_path,
    cyclic_closed_form,
    geodesic_arc,
    geometric_phase_geometric,
    latitude_arc,
    signed_solid_angle,
    state_to_bloch,
)
from geophase.errors import AmbiguousGeodesic, InvalidState, OpenPath, Undersampled
from geophase.pancharatnam import geometric_phase_interferometric, sweep
from geophase.qstate import TwoLevelState

THETA_EIGHTH = 0.679673818908243874  # 2 atan(sqrt(1/8))


def triangle_solid_angle(a, b, c):
    """Van Oosterom-Strackee formula for the oriented spherical triangle a->b->c."""
    num = a @ np.cross(b, c)
    den = 1 + a @ b + b @ c + c @ a
    return 2 * math.atan2(num, den)


def geodesic_polygon(vertices, n=2048):
    pts = [BlochPoint.from_vector(v) for v in vertices]
    return BlochPath(tuple(geodesic_arc(p, q, n) for p, q in zip(pts, pts[1:] + pts[:1])))


def tilted_circle(axis_theta, radius, n):
    """Closed sampled circle of angular radius ``radius`` around a tilted axis."""
    axis = BlochPoint(axis_theta, 0.3).vector
    u = np.cross(axis, [0.0, 0.0, 1.0])
    if np.linalg.norm(u) < 1e-12:
        u = np.array([1.0, 0.0, 0.0])
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    t = np.linspace(0, 2 * np.pi, n)
    pts = (math.cos(radius) * axis + math.sin(radius) * (np.outer(np.cos(t), u) + np.outer(np.sin(t), w)))
    pts[-1] = pts[0]
    return BlochPath((PathSegment.from_vectors(pts),))


class TestBlochPoint:
    def test_unit_vector(self):
        rng = np.random.default_rng(3)
        for theta, az in zip(rng.uniform(0, np.pi, 200), rng.uniform(-10, 10, 200)):
            p = BlochPoint(theta, az)
            assert abs(np.linalg.norm(p.vector) - 1) < 1e-14
            assert 0 <= p.azimuth < 2 * np.pi

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            BlochPoint(4.0, 0)


class TestStateToBloch:
    def test_north_pole(self):
        assert state_to_bloch(TwoLevelState(1, 0)).theta == 0

    def test_equator(self):
        r = math.sqrt(0.5)
        p = state_to_bloch(TwoLevelState(r, r))
        assert p.theta == pytest.approx(math.pi / 2)
        assert p.azimuth == pytest.approx(0)

    def test_absorbed_phased(self):
        r = math.sqrt(0.5)
        p = state_to_bloch(TwoLevelState(r, r * math.sqrt(1 / 8) * cmath.exp(1j * math.pi / 3)))
        assert p.theta == pytest.approx(THETA_EIGHTH, abs=1e-14)
        assert p.azimuth == pytest.approx(math.pi / 3, abs=1e-14)

    def test_south_pole(self):
        assert state_to_bloch(TwoLevelState(0, 1j)).theta == pytest.approx(math.pi)

    def test_zero(self):
        with pytest.raises(InvalidState):
            state_to_bloch(TwoLevelState(0, 0))

    @given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1),
           st.floats(-10, 10), st.floats(1e-3, 1e3))
    def test_global_phase_and_scale(self, a, b, alpha, scale):
        psi = TwoLevelState(a, b)
        p = state_to_bloch(psi)
        q = state_to_bloch(psi.scaled(scale * cmath.exp(1j * alpha)))
        assert np.linalg.norm(p.vector - q.vector) < 1e-12


class TestAbsorberAngle:
    def test_values(self):
        assert absorber_polar_angle(1.0) == pytest.approx(math.pi / 2)
        assert absorber_polar_angle(0.0) == 0.0
        assert absorber_polar_angle(0.125) == pytest.approx(THETA_EIGHTH, abs=1e-15)

    def test_cos_theta(self):
        assert math.cos(absorber_polar_angle(0.125)) == pytest.approx(7 / 9, abs=1e-15)


class TestGeodesicArc:
    def test_constant(self):
        p = BlochPoint(1.0, 2.0)
        seg = geodesic_arc(p, p, 5)
        assert np.allclose(seg.points, p.vector)

    def test_meridian_midpoint(self):
        seg = geodesic_arc(BlochPoint(0, 0), BlochPoint(math.pi / 2, 0), 3)
        mid = seg.samples[1]
        assert mid.theta == pytest.approx(math.pi / 4)
        assert mid.azimuth == pytest.approx(0)

    def test_equator_midpoint(self):
        seg = geodesic_arc(BlochPoint(math.pi / 2, 0), BlochPoint(math.pi / 2, math.pi / 2), 3)
        mid = seg.samples[1]
        assert mid.theta == pytest.approx(math.pi / 2)
        assert mid.azimuth == pytest.approx(math.pi / 4)

    def test_uniform_arc_length(self):
        seg = geodesic_arc(BlochPoint(0.3, 0.1), BlochPoint(1.4, 2.5), 50)
        pts = seg.points
        steps = np.arccos(np.clip(np.einsum("ij,ij->i", pts[1:], pts[:-1]), -1, 1))
        assert np.ptp(steps) < 1e-10

    def test_antipodal(self):
        with pytest.raises(AmbiguousGeodesic):
            geodesic_arc(BlochPoint(math.pi / 2, 0), BlochPoint(math.pi / 2, math.pi))

    def test_endpoints_exact(self):
        a, b = BlochPoint(0.2, 5.0), BlochPoint(1.3, 0.4)
        seg = geodesic_arc(a, b, 17)
        assert np.allclose(seg.points[0], a.vector, atol=1e-15)
        assert np.allclose(seg.points[-1], b.vector, atol=1e-15)


class TestSolidAngle:
    def test_equator_loop(self):
        path = BlochPath((latitude_arc(math.pi / 2, 0, 2 * math.pi, 64),))
        assert signed_solid_angle(path) == pytest.approx(2 * math.pi, abs=1e-14)

    def test_cyclic_eighth(self):
        omega = signed_solid_angle(build_path(0.125, 2 * math.pi))
        assert omega == pytest.approx(4 * math.pi / 9, abs=1e-10)

    @pytest.mark.parametrize("T", [0.01, 0.125, 0.7, 1.0])
    def test_degenerate(self, T):
        assert signed_solid_angle(build_path(T, 0.0)) == pytest.approx(0, abs=1e-15)

    def test_octant_triangle(self):
        path = geodesic_polygon(np.eye(3))
        assert signed_solid_angle(path) == pytest.approx(math.pi / 2, abs=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.05, 1.5), st.floats(0, 2 * math.pi)), min_size=3, max_size=3))
    def test_triangles_vs_closed_formula(self, verts):
        vecs = [BlochPoint(t, a).vector for t, a in verts]
        for p, q in zip(vecs, vecs[1:] + vecs[:1]):
            assume(p @ q > -0.9 and np.linalg.norm(p - q) > 1e-3)
        exact = triangle_solid_angle(*vecs)
        got = signed_solid_angle(geodesic_polygon(vecs))
        # the two may differ by 4 pi for triangles around the north pole
        assert abs(math.remainder(got - exact, 4 * math.pi)) < 1e-5

    def test_reversal_negates(self):
        path = build_path(0.3, 4.2)
        assert signed_solid_angle(path.reversed()) == pytest.approx(-signed_solid_angle(path), abs=1e-12)

    def test_figure_eight_cancels(self):
        # two geodesic lobes crossing at their shared vertex, traversed oppositely
        a = BlochPoint(0.5, 0.0).vector
        b, c = BlochPoint(1.0, 0.4).vector, BlochPoint(1.0, -0.4).vector
        d, e = BlochPoint(0.2, 2.9).vector, BlochPoint(0.2, 3.5).vector
        lobe1 = triangle_solid_angle(a, b, c)
        lobe2 = triangle_solid_angle(a, d, e)
        both = geodesic_polygon([a, b, c, a, d, e])
        assert signed_solid_angle(both) == pytest.approx(lobe1 + lobe2, abs=1e-6)
        assert lobe1 * lobe2 < 0

    def test_literal_path_same_area(self):
        short = signed_solid_angle(build_path(0.2, 3.9))
        literal = signed_solid_angle(build_path(0.2, 3.9, literal=True))
        assert literal == pytest.approx(short, abs=1e-14)

    def test_open_path(self):
        with pytest.raises(OpenPath):
            signed_solid_angle(BlochPath((latitude_arc(1.0, 0, 1.0, 10),)))

    def test_broken_chain(self):
        segs = build_path(0.3, 1.0).segments
        with pytest.raises(OpenPath):
            signed_solid_angle(BlochPath((segs[0], segs[2], segs[1])))

    def test_undersampled(self):
        a, b = BlochPoint(1.0, 0.0).vector, BlochPoint(1.0, 2.5).vector
        seg = PathSegment.from_vectors(np.array([a, b, a]))
        with pytest.raises(Undersampled):
            signed_solid_angle(BlochPath((seg,)))

    def test_tilted_circle_second_order(self):
        radius = 0.4
        exact = 2 * math.pi * (1 - math.cos(radius))
        errors = []
        for n in (65, 129, 257, 513):
            errors.append(abs(signed_solid_angle(tilted_circle(0.9, radius, n)) - exact))
        ratios = [e0 / e1 for e0, e1 in zip(errors, errors[1:])]
        assert all(r >= 3.9 for r in ratios), ratios
        assert errors[-1] < 1e-4

    def test_noncyclic_convergence_factor_four(self):
        exact = geometric_phase_interferometric(0.3, 2.5)
        errors = [abs(geometric_phase_geometric(0.3, 2.5, n) - exact) for n in (64, 128, 256, 512)]
        ratios = [e0 / e1 for e0, e1 in zip(errors, errors[1:])]
        assert all(r >= 4.0 for r in ratios), ratios


class TestBuildPath:
    def test_structure(self):
        path = build_path(0.125, 1.0, 128)
        kinds = [s.kind for s in path.segments]
        assert kinds == [SegmentKind.MERIDIAN, SegmentKind.LATITUDE, SegmentKind.GEODESIC]
        assert path.is_closed
        assert max(path.gaps()) <= 1e-12
        assert path.segments[0].start.theta == pytest.approx(math.pi / 2)
        assert path.segments[1].theta[0] == pytest.approx(THETA_EIGHTH, abs=1e-15)

    def test_samples_spacing(self):
        for seg in build_path(0.9, 3.0, 16).segments:
            pts = seg.points
            sep = np.arccos(np.clip(np.einsum("ij,ij->i", pts[1:], pts[:-1]), -1, 1))
            assert np.all(sep < math.pi / 2)

    def test_antipodal_closure(self):
        with pytest.raises(AmbiguousGeodesic):
            build_path(1.0, math.pi)

    def test_cyclic_closure_is_retrace(self):
        closure = build_path(0.125, 2 * math.pi, 64).segments[2]
        assert np.ptp(np.mod(closure.azimuth + 1e-9, 2 * np.pi)) < 1e-8


class TestGeometricPhase:
    def test_zero(self):
        assert geometric_phase_geometric(0.4, 0.0) == 0.0

    def test_cyclic(self):
        assert geometric_phase_geometric(0.125, 2 * math.pi) == pytest.approx(-2 * math.pi / 9, abs=1e-10)

    def test_quarter_turn(self):
        assert geometric_phase_geometric(0.125, math.pi / 2) == pytest.approx(
            0.165303984254688979, abs=1e-6
        )

    @pytest.mark.parametrize("T", [0.01, 0.2, 0.6, 0.95])
    def test_matches_interferometric_on_fine_grid(self, T):
        for dphi in np.linspace(0, 2 * np.pi, 23):
            geo = geometric_phase_geometric(T, dphi)
            assert geo == pytest.approx(geometric_phase_interferometric(T, dphi), abs=1e-6)

    @pytest.mark.parametrize("dphi", [0.4, 1.7, 2.9, 4.4])
    def test_odd_in_dphi(self, dphi):
        assert geometric_phase_geometric(0.3, -dphi) == pytest.approx(
            -geometric_phase_geometric(0.3, dphi), abs=1e-10
        )

    def test_rise_then_fall(self):
        dphi = np.linspace(0, 2 * np.pi, 64)
        phase = np.array([geometric_phase_geometric(0.125, d) for d in dphi])
        slope = np.diff(phase)
        mid = 0.5 * (dphi[1:] + dphi[:-1])
        assert np.all(slope[mid < math.pi / 2 - 0.1] > 0)
        assert np.all(slope[(mid > math.pi / 2 + 0.1) & (mid < 1.5 * math.pi - 0.1)] < 0)
        # heading back up to the cyclic value -2 pi / 9
        assert np.all(slope[mid > 1.5 * math.pi + 0.1] > 0)

    @pytest.mark.parametrize("T", [0.05, 0.125, 0.5, 0.9])
    def test_turning_points_at_quarter_turns(self, T):
        # d(phi_g)/d(dphi) is proportional to cos(dphi), whatever T is
        h = 1e-3
        for turn, sign in ((math.pi / 2, -1), (1.5 * math.pi, 1)):
            left = geometric_phase_geometric(T, turn - h) - geometric_phase_geometric(T, turn - 2 * h)
            right = geometric_phase_geometric(T, turn + 2 * h) - geometric_phase_geometric(T, turn + h)
            assert sign * left < 0 < sign * right


class TestCyclicClosedForm:
    def test_values(self):
        assert cyclic_closed_form(0.0) == 0.0
        assert cyclic_closed_form(math.pi / 2) == pytest.approx(-math.pi)
        assert cyclic_closed_form(THETA_EIGHTH) == pytest.approx(-2 * math.pi / 9, abs=1e-15)

    def test_matches_quadrature(self):
        for theta in np.linspace(0, np.pi / 2, 50):
            T = math.tan(theta / 2) ** 2
            omega = signed_solid_angle(build_path(T, 2 * math.pi))
            assert omega == pytest.approx(2 * math.pi * (1 - math.cos(theta)), abs=1e-8)


def test_attach_oracle_balanced():
    res = attach_oracle(sweep(1.0, 65), 1.0)
    assert len(res.skipped) == 1
    assert res.skipped[0].reasons == ("UndefinedPhase", "AmbiguousGeodesic")
    assert res.max_deviation < 1e-6


def test_path_sample_export():
    rows = list(build_path(0.3, 1.0, 8).samples())
    assert len(rows) == 24
    for _, theta, az, x, y, z in rows:
        assert 0 <= az < 2 * math.pi
        assert math.isclose(math.cos(theta), z, abs_tol=1e-14)
        assert math.isclose(x * x + y * y + z * z, 1.0, abs_tol=1e-14)
