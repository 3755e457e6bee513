import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conecam.errors import OutOfChart
from conecam.geometry import (CurveDetector, DirectionChart, PlaneDetector,
                              SphereDetector, beta_from_angles, cone_frame,
                              direction_jacobian, surface_point)

unit_vectors = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).filter(lambda v: 0.1 < np.linalg.norm(v)).map(
    lambda v: np.asarray(v) / np.linalg.norm(v))


def test_cone_frame_axis_aligned():
    e1, e2 = cone_frame(np.array([0.0, 0.0, 1.0]))
    assert np.allclose(e1, [1.0, 0.0, 0.0])
    assert np.allclose(e2, [0.0, 1.0, 0.0])


def test_cone_frame_x_axis():
    beta = np.array([1.0, 0.0, 0.0])
    e1, e2 = cone_frame(beta)
    assert abs(e1 @ beta) < 1e-15 and abs(e2 @ beta) < 1e-15
    assert abs(np.cross(e1, e2) @ beta) == pytest.approx(1.0)


@given(unit_vectors)
@settings(max_examples=100, deadline=None)
def test_cone_frame_gram_identity(beta):
    e1, e2 = cone_frame(beta)
    basis = np.stack([beta, e1, e2])
    assert np.max(np.abs(basis @ basis.T - np.eye(3))) < 1e-14


def test_surface_point_direct():
    z = surface_point(np.zeros(3), np.array([0.0, 0.0, 1.0]),
                      np.pi / 4, 1.0, 0.0)
    assert np.allclose(z, [np.sqrt(2) / 2, 0.0, np.sqrt(2) / 2])


def test_surface_point_phase_residual(rng):
    for _ in range(200):
        u = rng.standard_normal(3)
        beta = rng.standard_normal(3)
        beta /= np.linalg.norm(beta)
        phi = rng.uniform(0.1, np.pi / 2 - 0.1)
        r = rng.uniform(0.1, 5.0)
        alpha = rng.uniform(0, 2 * np.pi)
        z = surface_point(u, beta, phi, r, alpha)
        d = z - u
        assert abs(d @ beta - np.linalg.norm(d) * np.cos(phi)) < 1e-13
        assert np.linalg.norm(d) == pytest.approx(r, abs=1e-13)


def test_surface_point_alpha_sweep_constant_radius():
    u = np.array([0.3, -0.2, 1.0])
    beta = np.array([1.0, 2.0, -1.0]) / np.sqrt(6.0)
    alphas = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    z = surface_point(u, beta, np.full(64, 0.7), np.full(64, 1.3), alphas)
    assert np.allclose(np.linalg.norm(z - u, axis=-1), 1.3, atol=1e-13)


def test_direction_chart_standard_values():
    ch = DirectionChart.from_angles(np.pi / 2, 0.0)
    assert np.allclose(ch.beta, [1.0, 0.0, 0.0])
    assert np.allclose(ch.beta1, [0.0, 0.0, -1.0])
    assert np.allclose(ch.beta2, [0.0, 1.0, 0.0])


@given(unit_vectors)
@settings(max_examples=100, deadline=None)
def test_direction_frame_orthonormal(beta):
    ch = DirectionChart.from_beta(beta)
    basis = np.stack([ch.beta, ch.beta1, ch.beta2])
    assert np.max(np.abs(basis @ basis.T - np.eye(3))) < 1e-13


def test_direction_jacobian_kills_beta(rng):
    for _ in range(100):
        b = rng.standard_normal(3)
        b /= np.linalg.norm(b)
        ch = DirectionChart.from_beta(b)
        J2 = direction_jacobian(ch)
        assert np.max(np.abs(J2.T @ ch.beta)) < 1e-13


def test_direction_jacobian_finite_difference():
    h = 1e-6
    for theta, psi in [(0.8, 1.1), (2.2, 4.0), (1.5707, 0.0)]:
        ch = DirectionChart.from_angles(theta, psi)
        J2 = direction_jacobian(ch)
        fd_t = (beta_from_angles(theta + h, psi)
                - beta_from_angles(theta - h, psi)) / (2 * h)
        fd_p = (beta_from_angles(theta, psi + h)
                - beta_from_angles(theta, psi - h)) / (2 * h)
        assert np.linalg.norm(J2[:, 0] - fd_t) < 1e-7
        assert np.linalg.norm(J2[:, 1] - fd_p) < 1e-7


def test_plane_chart_identity_jacobian():
    det = PlaneDetector((0, 0, 0), (0, 0, 1))
    J = det.chart_jacobian(np.array(0.3), np.array(-0.4))
    # in-plane frame of the z-normal is the (x, y) chart
    assert np.allclose(J, [[1, 0], [0, 1], [0, 0]])


def test_sphere_axis_chart_matches_paper_parameterization():
    det = SphereDetector((0, 0, 0), 1.0)
    # chart u = (v1, sqrt(1 - v1^2 - v3^2), v3): +y graph chart
    u = det.chart_point(np.array(0.0), np.array(0.0), chart=4)
    assert np.allclose(u, [0.0, 1.0, 0.0])
    J = det.chart_jacobian(np.array(0.0), np.array(0.0), chart=4)
    assert np.allclose(J[:, 0], [1.0, 0.0, 0.0])
    assert np.allclose(J[:, 1], [0.0, 0.0, 1.0])


@pytest.mark.parametrize("chart", [0, 1, 2, 3, 4, 5, 6, 7])
def test_sphere_chart_jacobian_finite_difference(chart):
    det = SphereDetector((0.2, -0.1, 0.4), 1.7)
    v1, v2 = (1.1, 0.8) if chart in (0, 1) else (0.4, -0.3)
    h = 1e-6
    J = det.chart_jacobian(np.array(v1), np.array(v2), chart=chart)
    fd1 = (det.chart_point(np.array(v1 + h), np.array(v2), chart=chart)
           - det.chart_point(np.array(v1 - h), np.array(v2), chart=chart)) \
        / (2 * h)
    fd2 = (det.chart_point(np.array(v1), np.array(v2 + h), chart=chart)
           - det.chart_point(np.array(v1), np.array(v2 - h), chart=chart)) \
        / (2 * h)
    assert np.linalg.norm(J[:, 0] - fd1) / np.linalg.norm(fd1) < 1e-7
    assert np.linalg.norm(J[:, 1] - fd2) / np.linalg.norm(fd2) < 1e-7


def test_sphere_chart_transition_consistency(rng):
    det = SphereDetector((0, 0, 0), 2.0)
    for _ in range(100):
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        if abs(w[2]) > 0.85:    # stay in the overlap of both charts
            continue
        u = det.center + det.radius * w
        pts = []
        for chart in (0, 1):
            v1, v2, c = det.chart_params(u, chart=chart)
            pts.append(det.chart_point(np.array(v1), np.array(v2), chart=c))
        assert np.linalg.norm(pts[0] - pts[1]) < 1e-12


def test_sphere_chart_rank_two(rng):
    det = SphereDetector((0, 0, 0), 2.0)
    for _ in range(50):
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        u = det.center + det.radius * w
        v1, v2, chart = det.chart_params(u)
        J = det.chart_jacobian(np.array(v1), np.array(v2), chart=chart)
        s = np.linalg.svd(J, compute_uv=False)
        assert s[1] > 1e-6


def test_disk_chart_rejects_outside():
    det = PlaneDetector((0, 0, 0), (0, 0, 1), radius=1.0)
    with pytest.raises(OutOfChart):
        det.chart_point(np.array(0.9), np.array(0.9))


def test_detector_outside_volume_enforced():
    det = SphereDetector((0, 0, 0), 0.5)
    with pytest.raises(ValueError):
        det.assert_outside(np.array([-1.0] * 3), np.array([1.0] * 3))
    far = SphereDetector((0, 0, 0), 3.0)
    far.assert_outside(np.array([-1.0] * 3), np.array([1.0] * 3))


def test_curve_tangent_matches_finite_difference():
    det = CurveDetector((0.1, 0.0, -0.2), 1.8, (0.0, 1.0, 1.0))
    h = 1e-6
    for t in np.linspace(0, 2 * np.pi, 7):
        fd = (det.point(t + h) - det.point(t - h)) / (2 * h)
        assert np.linalg.norm(det.tangent(t) - fd) < 1e-6


def test_curve_from_points_roundtrip():
    circle = CurveDetector((0, 0, 0), 2.0)
    samples = circle.point(np.linspace(0, 2 * np.pi, 48, endpoint=False))
    spline = CurveDetector.from_points(samples)
    t = np.linspace(0.1, 6.0, 11)
    assert np.allclose(np.linalg.norm(spline.point(t), axis=-1), 2.0,
                       atol=1e-4)
