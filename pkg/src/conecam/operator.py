"""Discrete weighted cone transform: forward projector and its exact
algebraic transpose.

The forward value at a data sample (u, beta, phi) is the midpoint-rule
quadrature of kappa * f over the lateral cone surface,

    sum_{r, alpha} kappa(u, beta, phi, z) f~(z) r sin(phi) dr dalpha,

with f~ the trilinear interpolant of the volume (zero outside the box) and
z = u + r(cos(phi) beta + sin(phi)(cos(alpha) e1 + sin(alpha) e2)).
The adjoint scatter-adds through the same interpolation weights, so the
pair is an exact transpose with respect to the weighted inner products of
the two grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentGrids
from .geometry import cone_frame
from .grids import ConeDataGrid, VolumeGrid
from .weights import WeightSpec, eval_weight

_CHUNK_POINTS = 4_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    """Cone-surface quadrature: midpoint nodes in slant radius and azimuth.

    ``r_min`` > 0 restricts the radial band when the integrand support is
    known (a speed knob; the default 0 covers the whole cone)."""

    n_alpha: int
    n_r: int
    r_max: float
    r_min: float = 0.0

    def __post_init__(self):
        if self.n_alpha < 8 or self.n_r < 8:
            raise ValueError("need at least 8 nodes per quadrature axis")
        if not (0.0 <= self.r_min < self.r_max):
            raise ValueError("need 0 <= r_min < r_max")

    def nodes(self):
        dr = (self.r_max - self.r_min) / self.n_r
        r = self.r_min + (np.arange(self.n_r) + 0.5) * dr
        da = 2.0 * np.pi / self.n_alpha
        alpha = (np.arange(self.n_alpha) + 0.5) * da
        return r, dr, alpha, da


def default_r_max(detector, volume: VolumeGrid, pad=2.0):
    """Slant range covering the whole box from every vertex."""
    lo, hi = volume.box
    corners = np.array([(x, y, z) for x in (lo[0], hi[0])
                        for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    pts = detector._probe_points()
    d = np.linalg.norm(pts[:, None, :] - corners[None, :, :], axis=-1)
    return float(d.max() + pad * volume.spacing)


def _trilinear_gather(vol: VolumeGrid, pts):
    """Trilinear interpolation with zero extension; pts (..., 3)."""
    n1, n2, n3 = vol.dims
    t = (pts - vol.origin) / vol.spacing
    i0 = np.floor(t).astype(np.int64)
    f = t - i0
    out = np.zeros(pts.shape[:-1])
    flat = vol.values.ravel()
    for a in (0, 1):
        wx = f[..., 0] if a else 1.0 - f[..., 0]
        ix = i0[..., 0] + a
        okx = (ix >= 0) & (ix < n1)
        for b in (0, 1):
            wy = f[..., 1] if b else 1.0 - f[..., 1]
            iy = i0[..., 1] + b
            oky = (iy >= 0) & (iy < n2)
            for c in (0, 1):
                wz = f[..., 2] if c else 1.0 - f[..., 2]
                iz = i0[..., 2] + c
                ok = okx & oky & (iz >= 0) & (iz < n3)
                idx = ((np.where(ok, ix, 0) * n2 + np.where(ok, iy, 0)) * n3
                       + np.where(ok, iz, 0))
                out += np.where(ok, wx * wy * wz * flat[idx], 0.0)
    return out


def _trilinear_scatter(acc_flat, dims, origin, spacing, pts, contrib):
    """Scatter contributions into the 8 voxels surrounding each point.

    Accumulation uses bincount per corner so the result is deterministic.
    """
    n1, n2, n3 = dims
    t = (pts - origin) / spacing
    i0 = np.floor(t).astype(np.int64)
    f = t - i0
    for a in (0, 1):
        wx = f[..., 0] if a else 1.0 - f[..., 0]
        ix = i0[..., 0] + a
        okx = (ix >= 0) & (ix < n1)
        for b in (0, 1):
            wy = f[..., 1] if b else 1.0 - f[..., 1]
            iy = i0[..., 1] + b
            oky = (iy >= 0) & (iy < n2)
            for c in (0, 1):
                wz = f[..., 2] if c else 1.0 - f[..., 2]
                iz = i0[..., 2] + c
                ok = okx & oky & (iz >= 0) & (iz < n3)
                if not np.any(ok):
                    continue
                idx = ((ix[ok] * n2 + iy[ok]) * n3 + iz[ok])
                vals = (wx * wy * wz * contrib)[ok]
                acc_flat += np.bincount(idx.ravel(), weights=vals.ravel(),
                                        minlength=acc_flat.size)


def _sample_geometry(grid: ConeDataGrid):
    """Per-sample lookup tables: vertices, directions, frames, phis."""
    U = grid.vertices()
    B = grid.directions()
    E1, E2 = cone_frame(B)
    PH = grid.phis()
    return U, B, E1, E2, PH


def _iter_chunks(n_total, points_per_sample):
    step = max(1, _CHUNK_POINTS // max(points_per_sample, 1))
    for start in range(0, n_total, step):
        yield np.arange(start, min(start + step, n_total))


def _unravel(idx, n_dir, n_phi):
    iphi = idx % n_phi
    rest = idx // n_phi
    idir = rest % n_dir
    return rest // n_dir, idir, iphi


def _cone_points(u, beta, e1, e2, phi, r, alpha):
    """Quadrature points z (C, n_r, n_alpha, 3) for a chunk of cones."""
    cphi = np.cos(phi)[:, None, None]
    sphi = np.sin(phi)[:, None, None]
    d = (cphi * beta[:, None, :]
         + sphi * (np.cos(alpha)[None, :, None] * e1[:, None, :]
                   + np.sin(alpha)[None, :, None] * e2[:, None, :]))
    return u[:, None, None, :] + r[None, :, None, None] * d[:, None, :, :]


def forward(f: VolumeGrid, grid: ConeDataGrid, w: WeightSpec,
            q: QuadratureSpec) -> ConeDataGrid:
    """Apply the discrete weighted cone transform to a volume."""
    f.check_finite()
    U, B, E1, E2, PH = _sample_geometry(grid)
    n_dir = len(B)
    n_phi = len(PH)
    r, dr, alpha, da = q.nodes()
    out = np.zeros(grid.n_samples)
    for idx in _iter_chunks(grid.n_samples, q.n_r * q.n_alpha):
        iv, idir, iphi = _unravel(idx, n_dir, n_phi)
        u, beta, phi = U[iv], B[idir], PH[iphi]
        z = _cone_points(u, beta, E1[idir], E2[idir], phi, r, alpha)
        kappa = eval_weight(w, u[:, None, None, :], beta[:, None, None, :],
                            phi[:, None, None], z)
        vals = _trilinear_gather(f, z)
        measure = (r[None, :, None] * dr * da) * np.sin(phi)[:, None, None]
        out[idx] = np.sum(kappa * vals * measure, axis=(1, 2))
    return grid.like(out.reshape(grid.shape))


def adjoint(g: ConeDataGrid, f_shape: VolumeGrid, w: WeightSpec,
            q: QuadratureSpec) -> VolumeGrid:
    """Exact transpose of :func:`forward` w.r.t. the grid inner products."""
    g.check_finite()
    U, B, E1, E2, PH = _sample_geometry(g)
    n_dir = len(B)
    n_phi = len(PH)
    r, dr, alpha, da = q.nodes()
    gflat = g.values.ravel()
    wdata = g.w_data().ravel()
    acc = np.zeros(int(np.prod(f_shape.dims)))
    scale = 1.0 / f_shape.cell_volume
    for idx in _iter_chunks(g.n_samples, q.n_r * q.n_alpha):
        iv, idir, iphi = _unravel(idx, n_dir, n_phi)
        u, beta, phi = U[iv], B[idir], PH[iphi]
        z = _cone_points(u, beta, E1[idir], E2[idir], phi, r, alpha)
        kappa = eval_weight(w, u[:, None, None, :], beta[:, None, None, :],
                            phi[:, None, None], z)
        measure = (r[None, :, None] * dr * da) * np.sin(phi)[:, None, None]
        contrib = (gflat[idx] * wdata[idx] * scale)[:, None, None] \
            * kappa * measure
        _trilinear_scatter(acc, f_shape.dims, f_shape.origin,
                           f_shape.spacing, z, contrib)
    return f_shape.like(acc.reshape(f_shape.dims))


def restricted_forward(f: VolumeGrid, curvegrid: ConeDataGrid,
                       w: WeightSpec, q: QuadratureSpec) -> ConeDataGrid:
    """Cone transform with vertices on a curve and the opening angle fixed."""
    if not curvegrid.is_restricted:
        raise InconsistentGrids("restricted transform needs a curve grid "
                                "with fixed opening angle")
    return forward(f, curvegrid, w, q)
