"""Accessibility predicates, the cone/covector canonical correspondence,
and per-voxel visibility maps.

A covector (z, zeta) is accessible when the plane through z conormal to
zeta meets the detector non-tangentially; each such intersection point u
together with an opening angle phi determines a unique cone conormal to
(z, zeta), with axis ``beta = cos(phi) m - sin(phi) zeta/|zeta|`` for
``m = (z - u)/|z - u|`` and scale ``lambda = |zeta| / sin(phi)``.  The
cone-side momenta are ``u_hat = J1^T zeta``, ``beta_hat = lambda J2^T
(z - u)`` and ``phi_hat = lambda |z - u| sin(phi)``; the inverse map
recovers (z, zeta) uniquely from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyConeSet, InaccessibleInput, NotAccessible
from .geometry import (CurveDetector, DetectorSurface, DirectionChart,
                       PlaneDetector, direction_jacobian)
from .grids import VolumeGrid
from .weights import WeightSpec, eval_weight


@dataclass(frozen=True)
class Covector:
    """Phase-space point (z, zeta) with zeta != 0."""

    z: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        object.__setattr__(self, "zeta", np.asarray(self.zeta, dtype=float))
        if np.linalg.norm(self.zeta) == 0:
            raise ValueError("zeta must be nonzero")


@dataclass(frozen=True)
class CanonicalPoint:
    """One point of the canonical correspondence, with both sides."""

    u: np.ndarray
    beta: np.ndarray
    phi: float
    u_hat: np.ndarray
    beta_hat: np.ndarray
    phi_hat: float
    z: np.ndarray
    zeta: np.ndarray
    lam: float
    vertex_chart: int
    direction_chart: int

    def phase_residual(self):
        d = self.z - self.u
        return float(d @ self.beta - np.linalg.norm(d) * np.cos(self.phi))

    def conormality_residual(self):
        return float((self.z - self.u) @ self.zeta)


def is_accessible(surface: DetectorSurface, cv: Covector) -> bool:
    """Does some cone with vertex on the surface see the singularity?"""
    return bool(np.atleast_1d(surface.is_accessible(cv.z, cv.zeta))[0])


def disk_invisible(z, zeta, R) -> float:
    """Signed classifier for the open disk {x3 = 0, |x| < R}:
    Q = (zeta1^2 + zeta2^2) R^2 - (z . zeta)^2.
    Q < 0 marks an unrecoverable singularity, Q > 0 an accessible one."""
    z = np.asarray(z, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    return float((zeta[0] ** 2 + zeta[1] ** 2) * R ** 2 - (z @ zeta) ** 2)


def fibonacci_hemisphere(n):
    """Deterministic near-uniform directions on the upper hemisphere."""
    i = np.arange(n)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    zc = (i + 0.5) / n              # cos(theta) in (0, 1)
    phi = 2.0 * np.pi * np.mod(i / golden, 1.0)
    s = np.sqrt(1.0 - zc ** 2)
    return np.stack([s * np.cos(phi), s * np.sin(phi), zc], axis=-1)


@dataclass
class TuyReport:
    fraction: float
    n_checked: int
    worst: list


def tuy_check(surface: DetectorSurface, box_lo, box_hi, n_z=8,
              n_dir=32) -> TuyReport:
    """Sample the box x hemisphere of directions and report the accessible
    fraction; fraction 1.0 certifies Tuy's condition on the sample."""
    box_lo = np.asarray(box_lo, dtype=float)
    box_hi = np.asarray(box_hi, dtype=float)
    ax = [np.linspace(box_lo[i], box_hi[i], n_z) for i in range(3)]
    X, Y, Z = np.meshgrid(*ax, indexing="ij")
    zs = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
    dirs = fibonacci_hemisphere(n_dir)
    n_ok = 0
    worst = []
    for d in dirs:
        acc = np.asarray(surface.is_accessible(zs, np.broadcast_to(d, zs.shape)))
        n_ok += int(np.sum(acc))
        for z_bad in zs[~acc][:2]:
            if len(worst) < 10:
                worst.append(Covector(z_bad, d.copy()))
    n_total = len(zs) * len(dirs)
    return TuyReport(fraction=n_ok / n_total, n_checked=n_total, worst=worst)


def _build_point(surface, u, z, zeta, phi):
    d = z - u
    dist = np.linalg.norm(d)
    m = d / dist
    nz = np.linalg.norm(zeta)
    beta = np.cos(phi) * m - np.sin(phi) * zeta / nz
    lam = nz / np.sin(phi)
    v1, v2, vchart = surface.chart_params(u)
    J1 = surface.chart_jacobian(np.asarray(v1), np.asarray(v2), chart=vchart)
    u_hat = J1.T @ zeta
    dchart = DirectionChart.from_beta(beta)
    J2 = direction_jacobian(dchart)
    beta_hat = lam * (J2.T @ d)
    phi_hat = lam * dist * np.sin(phi)
    return CanonicalPoint(u=u, beta=beta, phi=float(phi), u_hat=u_hat,
                          beta_hat=beta_hat, phi_hat=float(phi_hat),
                          z=z.copy(), zeta=zeta.copy(), lam=float(lam),
                          vertex_chart=vchart, direction_chart=dchart.chart)


def canonical_sample(surface: DetectorSurface, cv: Covector, n_u=8,
                     n_phi=4, eps=np.deg2rad(2.0)):
    """Sample the cones conormal to (z, zeta): vertices on the intersection
    of the surface with the conormal plane, opening angles across
    (eps, pi/2 - eps).  Every returned point satisfies the defining
    identities of the canonical correspondence."""
    if not is_accessible(surface, cv):
        raise NotAccessible("covector is not accessible on this surface")
    pts, valid = surface.conormal_samples(cv.z, cv.zeta, n_u)
    if not np.atleast_1d(valid).all():
        raise EmptyConeSet("no conormal vertices found")
    pts = np.asarray(pts).reshape(-1, 3)
    phis, dphi = np.linspace(eps, np.pi / 2 - eps, n_phi + 2,
                             retstep=True)
    phis = phis[1:-1]
    out = []
    for u in pts:
        for phi in phis:
            out.append(_build_point(surface, u, cv.z, cv.zeta, phi))
    return out


def recover_covector(surface: DetectorSurface, u, beta, phi, u_hat,
                     beta_hat, phi_hat, vertex_chart=0,
                     direction_chart=None):
    """Unique (z, zeta, lambda) from the cone-side components.

    Solves the four defining equations: m is rebuilt from the projections
    of (z - u)/|z - u| onto the axis frame, lambda from |u_hat|, then
    ``z = u + (phi_hat / (lambda sin(phi))) m`` and
    ``zeta = -lambda (beta - cos(phi) m)``.
    """
    u = np.asarray(u, dtype=float)
    beta = np.asarray(beta, dtype=float)
    u_hat = np.asarray(u_hat, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    if np.linalg.norm(u_hat) == 0:
        raise InaccessibleInput("u_hat = 0 violates accessibility")
    if phi_hat == 0:
        raise InaccessibleInput("phi_hat must be nonzero")
    dchart = DirectionChart.from_beta(beta, chart=direction_chart)
    st = np.sin(dchart.theta)
    m = (np.cos(phi) * beta
         + (np.sin(phi) / phi_hat) * (beta_hat[0] * dchart.beta1
                                      + beta_hat[1] / st * dchart.beta2))
    v1, v2, vchart = surface.chart_params(u, chart=vertex_chart)
    J1 = surface.chart_jacobian(np.asarray(v1), np.asarray(v2), chart=vchart)
    w = beta - m * np.cos(phi)
    denom = np.linalg.norm(J1.T @ w)
    if denom == 0:
        raise InaccessibleInput("zeta normal to the surface at u")
    lam = np.linalg.norm(u_hat) * np.sign(phi_hat) / denom
    z = u + (phi_hat / (lam * np.sin(phi))) * m
    zeta = -lam * w
    return Covector(z=z, zeta=zeta), float(lam)


def restricted_sample(curve: CurveDetector, cv: Covector, phi0, n_u=4):
    """Canonical points of the fixed-angle transform on a vertex curve."""
    pts, valid = curve.conormal_samples(cv.z, cv.zeta, n_u)
    if not valid:
        raise NotAccessible("covector not accessible from the curve")
    out = []
    for u in np.asarray(pts).reshape(-1, 3):
        t, _, _ = curve.chart_params(u)
        d = cv.z - u
        dist = np.linalg.norm(d)
        m = d / dist
        nz = np.linalg.norm(cv.zeta)
        beta = np.cos(phi0) * m - np.sin(phi0) * cv.zeta / nz
        lam = nz / np.sin(phi0)
        u_hat = float(curve.tangent(t) @ cv.zeta)
        dchart = DirectionChart.from_beta(beta)
        J2 = direction_jacobian(dchart)
        beta_hat = lam * (J2.T @ d)
        out.append((t, beta, u_hat, beta_hat, dchart.chart, lam))
    return out


def restricted_recover(curve: CurveDetector, t, beta, u_hat, beta_hat,
                       phi0, direction_chart=None):
    """Unique (z, zeta, lambda) for the restricted transform.

    Uses ``lambda |z - u| = |(beta_hat_1, beta_hat_2 / sin(theta))| /
    sin(phi0)`` and ``lambda = -u_hat / (u'(t) . (beta - m cos(phi0)))``.
    """
    if u_hat == 0:
        raise InaccessibleInput("u_hat = 0 violates accessibility")
    beta = np.asarray(beta, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    dchart = DirectionChart.from_beta(beta, chart=direction_chart)
    st = np.sin(dchart.theta)
    p = np.hypot(beta_hat[0], beta_hat[1] / st)
    if p == 0:
        raise InaccessibleInput("beta_hat = 0 leaves z undetermined")
    m = (np.cos(phi0) * beta
         + (np.sin(phi0) / p) * (beta_hat[0] * dchart.beta1
                                 + beta_hat[1] / st * dchart.beta2))
    u = curve.point(np.asarray(t))
    du = curve.tangent(np.asarray(t))
    denom = float(du @ (beta - m * np.cos(phi0)))
    if denom == 0:
        raise InaccessibleInput("tangential covector on the curve")
    lam = -u_hat / denom
    z = u + (p / (lam * np.sin(phi0))) * m
    zeta = -lam * (beta - np.cos(phi0) * m)
    return Covector(z=z, zeta=zeta), float(lam)


def visibility_map(surface: DetectorSurface, volume: VolumeGrid,
                   w: WeightSpec, n_dir=64, n_u=8, n_phi=4,
                   threshold=1e-9, eps=np.deg2rad(2.0)) -> VolumeGrid:
    """Per-voxel fraction of hemisphere directions that are accessible with
    a nonvanishing weight on at least one sampled conormal cone."""
    zs = volume.meshpoints().reshape(-1, 3)
    dirs = fibonacci_hemisphere(n_dir)
    phis = np.linspace(eps, np.pi / 2 - eps, n_phi + 2)[1:-1]
    count = np.zeros(len(zs))
    floor = threshold * abs(w.amplitude)
    for d in dirs:
        zeta = np.broadcast_to(d, zs.shape)
        acc = np.asarray(surface.is_accessible(zs, zeta))
        if not np.any(acc):
            continue
        za = zs[acc]
        pts, valid = surface.conormal_samples(za, za * 0 + d, n_u)
        pts = np.asarray(pts)                       # (Na, n_u, 3)
        dvec = za[:, None, :] - pts
        dist = np.linalg.norm(dvec, axis=-1)
        m = dvec / dist[..., None]
        vis = np.zeros(len(za), dtype=bool)
        for phi in phis:
            beta = np.cos(phi) * m - np.sin(phi) * d
            kappa = eval_weight(w, pts, beta, np.full(dist.shape, phi),
                                za[:, None, :])
            vis |= np.any(kappa > floor, axis=-1)
        upd = np.zeros(len(zs))
        vmask = np.broadcast_to(np.asarray(valid), vis.shape)
        upd[acc] = np.where(vmask, vis, False)
        count += upd
    return volume.like((count / n_dir).reshape(volume.dims))
