"""Detector surfaces, direction charts, cone frames and their Jacobians.

Everything here is pure and immutable.  Vertices ``u`` live on a detector
surface with local charts ``u(v1, v2)`` (or ``u(t)`` for curves), axes
``beta`` live on the unit sphere with two rotated spherical charts, and a
circular cone is the triple ``(u, beta, phi)`` with opening angle
``phi in (eps, pi/2 - eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfChart, PoleDegenerate

# |cos(theta)| above which the rotated direction chart takes over.
POLE_SWITCH = 0.9

# Cyclic permutation used by the rotated charts: P x = (x2, x3, x1).
_PERM = np.array([1, 2, 0])
_PERM_INV = np.array([2, 0, 1])


def cone_frame(beta):
    """Orthonormal completion (e1, e2) of the axis ``beta``.

    Deterministic pivot rule: the seed axis is the coordinate direction of
    the smallest ``|beta_i|`` (lowest index on ties), so repeated runs are
    bit-identical.  Accepts a single vector or an (..., 3) stack.
    """
    b = np.asarray(beta, dtype=float)
    single = b.ndim == 1
    b = np.atleast_2d(b)
    pivot = np.argmin(np.abs(b), axis=-1)
    seed = np.zeros_like(b)
    seed[np.arange(b.shape[0]), pivot] = 1.0
    e1 = seed - (np.sum(seed * b, axis=-1, keepdims=True)) * b
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(b, e1)
    if single:
        return e1[0], e2[0]
    return e1, e2


def surface_point(u, beta, phi, r, alpha):
    """Point on the lateral cone surface at slant distance ``r``, azimuth
    ``alpha``:  ``z = u + r (cos(phi) beta + sin(phi)(cos(alpha) e1 +
    sin(alpha) e2))``.  Broadcasts over all arguments."""
    u = np.asarray(u, dtype=float)
    beta = np.asarray(beta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    r = np.asarray(r, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    e1, e2 = cone_frame(beta)
    d = (np.cos(phi)[..., None] * beta
         + np.sin(phi)[..., None] * (np.cos(alpha)[..., None] * e1
                                     + np.sin(alpha)[..., None] * e2))
    return u + r[..., None] * d


def beta_from_angles(theta, psi):
    """Unit axis in the standard spherical chart."""
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(psi), st * np.sin(psi), np.cos(theta)],
                    axis=-1)


def _spherical_frame(theta, psi):
    """(beta, beta1, beta2) of the standard chart; beta1 = d(beta)/d(theta),
    beta2 = (1/sin theta) d(beta)/d(psi)."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(psi), np.cos(psi)
    beta = np.stack([st * cp, st * sp, ct], axis=-1)
    beta1 = np.stack([ct * cp, ct * sp, -st], axis=-1)
    beta2 = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return beta, beta1, beta2


@dataclass(frozen=True)
class DirectionChart:
    """A unit axis in one of the two rotated spherical charts.

    chart 0 is the standard parameterization; chart 1 permutes coordinates
    cyclically so its poles sit on the x-axis.  Selection is deterministic:
    chart 1 whenever |beta_3| > POLE_SWITCH.
    """

    theta: float
    psi: float
    chart: int
    beta: np.ndarray = field(repr=False)
    beta1: np.ndarray = field(repr=False)
    beta2: np.ndarray = field(repr=False)

    @staticmethod
    def from_beta(beta, chart=None):
        b = np.asarray(beta, dtype=float)
        b = b / np.linalg.norm(b)
        if chart is None:
            chart = 1 if abs(b[2]) > POLE_SWITCH else 0
        bc = b[_PERM] if chart == 1 else b
        theta = float(np.arccos(np.clip(bc[2], -1.0, 1.0)))
        psi = float(np.mod(np.arctan2(bc[1], bc[0]), 2.0 * np.pi))
        if np.sin(theta) < 1e-8:
            raise PoleDegenerate("axis at the pole of the requested chart")
        _, b1, b2 = _spherical_frame(theta, psi)
        if chart == 1:
            b1, b2 = b1[_PERM_INV], b2[_PERM_INV]
        return DirectionChart(theta=theta, psi=psi, chart=chart,
                              beta=b, beta1=b1, beta2=b2)

    @staticmethod
    def from_angles(theta, psi, chart=0):
        beta, b1, b2 = _spherical_frame(theta, psi)
        if np.sin(theta) < 1e-8:
            raise PoleDegenerate("theta at the chart pole")
        if chart == 1:
            beta, b1, b2 = beta[_PERM_INV], b1[_PERM_INV], b2[_PERM_INV]
        return DirectionChart(theta=float(theta), psi=float(psi),
                              chart=chart, beta=beta, beta1=b1, beta2=b2)


def direction_jacobian(chart: DirectionChart):
    """3x2 Jacobian d(beta)/d(theta, psi) = (beta1, sin(theta) beta2)."""
    st = np.sin(chart.theta)
    if st < 1e-8:
        raise PoleDegenerate("sin(theta) below chart threshold")
    return np.stack([chart.beta1, st * chart.beta2], axis=-1)


@dataclass(frozen=True)
class Cone:
    """Circular cone: vertex on the detector, unit axis, opening angle."""

    u: np.ndarray
    beta: np.ndarray
    phi: float

    def __post_init__(self):
        if not (0.0 < self.phi < np.pi / 2):
            raise ValueError("opening angle must lie in (0, pi/2)")
        n = np.linalg.norm(self.beta)
        if abs(n - 1.0) > 1e-12:
            raise ValueError("cone axis must be a unit vector")


class DetectorSurface:
    """Base interface for detector surfaces carrying the cone vertices."""

    kind = "abstract"

    def chart_point(self, v1, v2, chart=0):
        raise NotImplementedError

    def chart_jacobian(self, v1, v2, chart=0):
        raise NotImplementedError

    def chart_params(self, u, chart=None):
        raise NotImplementedError

    def area_axis_weights(self, v1_nodes, dv1, v2_nodes, dv2):
        """Per-axis quadrature weight vectors whose outer product is the
        surface area element times the node spacings."""
        raise NotImplementedError

    def is_accessible(self, z, zeta):
        """Vectorized predicate: does the plane conormal to (z, zeta) meet
        the surface non-tangentially?  z, zeta broadcast as (..., 3)."""
        raise NotImplementedError

    def conormal_samples(self, z, zeta, n_u):
        """Sample points of the vertex set S \\cap {x: (x-z).zeta = 0}.

        Returns (points (..., n_u, 3), valid mask (...)).  Invalid rows
        contain unspecified values.
        """
        raise NotImplementedError

    def assert_outside(self, box_lo, box_hi, margin=0.0):
        """Raise if any probe point of the surface lies inside the box."""
        pts = self._probe_points()
        inside = np.all((pts > np.asarray(box_lo) - margin)
                        & (pts < np.asarray(box_hi) + margin), axis=-1)
        if np.any(inside):
            raise ValueError("detector surface intersects the volume box")

    def _probe_points(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class PlaneDetector(DetectorSurface):
    """Plane or open disk detector.

    The chart is ``u(v1, v2) = center + v1 a1 + v2 a2`` with (a1, a2) the
    deterministic in-plane frame of the normal; a finite ``radius`` turns
    the plane into the open disk ``v1^2 + v2^2 < R^2``.
    """

    kind = "plane"

    def __init__(self, center, normal, radius=np.inf):
        self.center = np.asarray(center, dtype=float)
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.linalg.norm(n)
        self.radius = float(radius)
        self.a1, self.a2 = cone_frame(self.normal)

    def chart_point(self, v1, v2, chart=0):
        v1 = np.asarray(v1, dtype=float)
        v2 = np.asarray(v2, dtype=float)
        if np.isfinite(self.radius):
            if np.any(v1 * v1 + v2 * v2 >= self.radius ** 2):
                raise OutOfChart("parameters outside the open disk")
        return (self.center + v1[..., None] * self.a1
                + v2[..., None] * self.a2)

    def chart_jacobian(self, v1, v2, chart=0):
        v1 = np.asarray(v1, dtype=float)
        shape = v1.shape + (3, 2)
        J = np.empty(shape)
        J[..., :, 0] = self.a1
        J[..., :, 1] = self.a2
        return J

    def chart_params(self, u, chart=None):
        d = np.asarray(u, dtype=float) - self.center
        return float(d @ self.a1), float(d @ self.a2), 0

    def area_axis_weights(self, v1_nodes, dv1, v2_nodes, dv2):
        return (np.full_like(v1_nodes, dv1), np.full_like(v2_nodes, dv2))

    def _local(self, z, zeta):
        z = np.asarray(z, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        dz = z - self.center
        zl = np.stack([dz @ self.a1, dz @ self.a2, dz @ self.normal], axis=-1)
        zt = np.stack([zeta @ self.a1, zeta @ self.a2, zeta @ self.normal],
                      axis=-1)
        return zl, zt

    def accessibility_margin(self, z, zeta):
        """Signed quantity whose sign classifies accessibility.

        For a finite disk this is ``(zeta1^2 + zeta2^2) R^2 - (z.zeta)^2``
        in detector-local coordinates; for the full plane it is the squared
        tangential component of zeta.
        """
        zl, zt = self._local(z, zeta)
        tang = zt[..., 0] ** 2 + zt[..., 1] ** 2
        if not np.isfinite(self.radius):
            return tang
        dot = np.sum(zl * zt, axis=-1)
        return tang * self.radius ** 2 - dot ** 2

    def is_accessible(self, z, zeta):
        return self.accessibility_margin(z, zeta) > 0

    def conormal_samples(self, z, zeta, n_u):
        zl, zt = self._local(z, zeta)
        q = zt[..., :2]
        qq = np.sum(q * q, axis=-1)
        valid = qq > 0
        qq_safe = np.where(valid, qq, 1.0)
        s = np.sum(zl * zt, axis=-1)
        v0 = (s / qq_safe)[..., None] * q
        perp = np.stack([-q[..., 1], q[..., 0]], axis=-1)
        perp = perp / np.sqrt(qq_safe)[..., None]
        if np.isfinite(self.radius):
            half2 = self.radius ** 2 - np.sum(v0 * v0, axis=-1)
            valid = valid & (half2 > 0)
            half = np.sqrt(np.clip(half2, 0.0, None))
        else:
            half = np.full(qq.shape, 4.0 * (1.0 + np.linalg.norm(self.center)))
        # midpoint nodes strictly inside the chord
        t = (np.arange(n_u) + 0.5) / n_u * 2.0 - 1.0
        v = (v0[..., None, :]
             + (half[..., None] * t)[..., None] * perp[..., None, :])
        pts = (self.center + v[..., 0:1] * self.a1 + v[..., 1:2] * self.a2)
        return pts, valid

    def _probe_points(self):
        r = self.radius if np.isfinite(self.radius) else 4.0
        t = np.linspace(0, 2 * np.pi, 33)
        g = np.linspace(-0.999 * r, 0.999 * r, 9)
        v1, v2 = np.meshgrid(g, g, indexing="ij")
        keep = v1 ** 2 + v2 ** 2 < r ** 2
        return (self.center + v1[keep][:, None] * self.a1
                + v2[keep][:, None] * self.a2)

    def to_dict(self):
        return {"kind": "plane", "center": self.center.tolist(),
                "normal": self.normal.tolist(),
                "radius": "inf" if not np.isfinite(self.radius)
                else self.radius}


class SphereDetector(DetectorSurface):
    """Spherical detector; satisfies Tuy's condition for interior volumes.

    Charts 0/1 are the two rotated latitude-longitude charts used for the
    canonical relation.  Charts 2..7 are the six axis-aligned graph charts
    ``u = (v1, +-sqrt(rho^2 - v1^2 - v3^2), v3)`` etc., kept for
    cross-checks; data grids always use chart 0.
    """

    kind = "sphere"

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def chart_point(self, v1, v2, chart=0):
        v1 = np.asarray(v1, dtype=float)
        v2 = np.asarray(v2, dtype=float)
        if chart in (0, 1):
            w = beta_from_angles(v1, v2)
            if chart == 1:
                w = w[..., _PERM_INV]
            return self.center + self.radius * w
        return self.center + self._axis_chart_point(v1, v2, chart)

    def _axis_chart_point(self, v1, v3, chart):
        # chart = 2 + 2*axis + (0 positive, 1 negative)
        axis, sign = divmod(chart - 2, 2)
        h2 = self.radius ** 2 - v1 ** 2 - v3 ** 2
        if np.any(h2 <= 0):
            raise OutOfChart("axis-chart parameters leave the hemisphere")
        h = np.sqrt(h2) * (1.0 if sign == 0 else -1.0)
        comps = [None, None, None]
        others = [i for i in range(3) if i != axis]
        comps[others[0]] = v1
        comps[others[1]] = v3
        comps[axis] = h
        return np.stack(np.broadcast_arrays(*comps), axis=-1)

    def chart_jacobian(self, v1, v2, chart=0):
        v1 = np.asarray(v1, dtype=float)
        v2 = np.asarray(v2, dtype=float)
        if chart in (0, 1):
            _, b1, b2 = _spherical_frame(v1, v2)
            J = np.stack([self.radius * b1,
                          self.radius * np.sin(v1)[..., None] * b2], axis=-1)
            if chart == 1:
                J = J[..., _PERM_INV, :]
            return J
        axis, sign = divmod(chart - 2, 2)
        h2 = self.radius ** 2 - v1 ** 2 - v2 ** 2
        if np.any(h2 <= 0):
            raise OutOfChart("axis-chart parameters leave the hemisphere")
        h = np.sqrt(h2) * (1.0 if sign == 0 else -1.0)
        others = [i for i in range(3) if i != axis]
        J = np.zeros(np.shape(v1) + (3, 2))
        J[..., others[0], 0] = 1.0
        J[..., others[1], 1] = 1.0
        J[..., axis, 0] = -v1 / h
        J[..., axis, 1] = -v2 / h
        return J

    def chart_params(self, u, chart=None):
        w = (np.asarray(u, dtype=float) - self.center) / self.radius
        if chart is None:
            chart = 1 if abs(w[2]) > POLE_SWITCH else 0
        wc = w[_PERM] if chart == 1 else w
        v1 = float(np.arccos(np.clip(wc[2], -1.0, 1.0)))
        v2 = float(np.mod(np.arctan2(wc[1], wc[0]), 2.0 * np.pi))
        return v1, v2, chart

    def area_axis_weights(self, v1_nodes, dv1, v2_nodes, dv2):
        w1 = self.radius ** 2 * np.sin(v1_nodes) * dv1
        return (w1, np.full_like(v2_nodes, dv2))

    def is_accessible(self, z, zeta):
        z = np.asarray(z, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        nz = np.linalg.norm(zeta, axis=-1)
        d = np.abs(np.sum((self.center - z) * zeta, axis=-1)) / np.where(
            nz > 0, nz, 1.0)
        return (nz > 0) & (d < self.radius)

    def conormal_samples(self, z, zeta, n_u):
        z = np.asarray(z, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        nz = np.linalg.norm(zeta, axis=-1, keepdims=True)
        zh = zeta / np.where(nz > 0, nz, 1.0)
        d = np.sum((self.center - z) * zh, axis=-1)
        valid = np.abs(d) < self.radius
        foot = self.center - d[..., None] * zh
        rc = np.sqrt(np.clip(self.radius ** 2 - d ** 2, 0.0, None))
        p1, p2 = cone_frame(zh.reshape(-1, 3))
        p1 = p1.reshape(zh.shape)
        p2 = p2.reshape(zh.shape)
        s = (np.arange(n_u) + 0.5) / n_u * 2.0 * np.pi
        pts = (foot[..., None, :]
               + rc[..., None, None] * (np.cos(s)[:, None] * p1[..., None, :]
                                        + np.sin(s)[:, None] * p2[..., None, :]))
        return pts, valid & (nz[..., 0] > 0)

    def _probe_points(self):
        th = np.linspace(0.1, np.pi - 0.1, 9)
        ps = np.linspace(0, 2 * np.pi, 17)
        T, P = np.meshgrid(th, ps, indexing="ij")
        return self.chart_point(T.ravel(), P.ravel(), chart=0)

    def to_dict(self):
        return {"kind": "sphere", "center": self.center.tolist(),
                "radius": self.radius}


class CurveDetector(DetectorSurface):
    """Smooth closed vertex curve for the restricted transform.

    Defaults to a planar circle; arbitrary closed curves can be supplied
    as periodic cubic splines through sample points.
    """

    kind = "curve"

    def __init__(self, center, radius, normal=(0.0, 0.0, 1.0)):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        n = np.asarray(normal, dtype=float)
        self.normal = n / np.linalg.norm(n)
        self.a1, self.a2 = cone_frame(self.normal)
        self._spline = None
        self.t_range = (0.0, 2.0 * np.pi)

    @classmethod
    def from_points(cls, points):
        from scipy.interpolate import CubicSpline
        points = np.asarray(points, dtype=float)
        t = np.linspace(0.0, 2.0 * np.pi, len(points) + 1)
        closed = np.vstack([points, points[:1]])
        obj = cls(points.mean(axis=0), 1.0)
        obj._spline = CubicSpline(t, closed, bc_type="periodic")
        return obj

    def point(self, t):
        t = np.asarray(t, dtype=float)
        if self._spline is not None:
            return self._spline(np.mod(t, 2.0 * np.pi))
        return (self.center
                + self.radius * (np.cos(t)[..., None] * self.a1
                                 + np.sin(t)[..., None] * self.a2))

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        if self._spline is not None:
            return self._spline(np.mod(t, 2.0 * np.pi), 1)
        return self.radius * (-np.sin(t)[..., None] * self.a1
                              + np.cos(t)[..., None] * self.a2)

    def chart_point(self, v1, v2=None, chart=0):
        return self.point(v1)

    def chart_jacobian(self, v1, v2=None, chart=0):
        return self.tangent(v1)[..., None]

    def chart_params(self, u, chart=None):
        d = np.asarray(u, dtype=float) - self.center
        return float(np.mod(np.arctan2(d @ self.a2, d @ self.a1),
                            2.0 * np.pi)), 0.0, 0

    def line_weights(self, t_nodes, dt):
        return np.linalg.norm(self.tangent(t_nodes), axis=-1) * dt

    def _conormal_roots(self, z, zeta, n_scan=256):
        """Roots of g(t) = (z - u(t)).zeta via sign-change scan + bisection."""
        t = np.linspace(self.t_range[0], self.t_range[1], n_scan + 1)
        g = np.sum((z - self.point(t)) * zeta, axis=-1)
        roots = []
        for i in range(n_scan):
            a, b = t[i], t[i + 1]
            ga, gb = g[i], g[i + 1]
            if ga == 0.0:
                roots.append(a)
                continue
            if ga * gb < 0:
                for _ in range(60):
                    m = 0.5 * (a + b)
                    gm = float(np.sum((z - self.point(m)) * zeta))
                    if ga * gm <= 0:
                        b = m
                    else:
                        a, ga = m, gm
                roots.append(0.5 * (a + b))
        return roots

    def is_accessible(self, z, zeta):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
        out = np.zeros(len(z), dtype=bool)
        for i in range(len(z)):
            for t0 in self._conormal_roots(z[i], zeta[i]):
                if abs(float(self.tangent(t0) @ zeta[i])) > 1e-10 * (
                        np.linalg.norm(self.tangent(t0))
                        * np.linalg.norm(zeta[i])):
                    out[i] = True
                    break
        return out if out.size > 1 else out.reshape(np.shape(z)[:-1])

    def conormal_samples(self, z, zeta, n_u):
        z = np.asarray(z, dtype=float)
        roots = self._conormal_roots(z, zeta)
        if not roots:
            return np.zeros((n_u, 3)), False
        ts = np.array([roots[i % len(roots)] for i in range(n_u)])
        return self.point(ts), True

    def _probe_points(self):
        return self.point(np.linspace(0, 2 * np.pi, 64))

    def to_dict(self):
        return {"kind": "curve", "center": self.center.tolist(),
                "radius": self.radius, "normal": self.normal.tolist()}


def detector_from_dict(d):
    kind = d["kind"]
    if kind == "plane":
        radius = d.get("radius", "inf")
        radius = np.inf if radius in ("inf", None) else float(radius)
        return PlaneDetector(d["center"], d["normal"], radius)
    if kind == "sphere":
        return SphereDetector(d["center"], d["radius"])
    if kind == "curve":
        return CurveDetector(d["center"], d["radius"],
                             d.get("normal", (0.0, 0.0, 1.0)))
    raise ValueError(f"unknown detector kind {kind!r}")
