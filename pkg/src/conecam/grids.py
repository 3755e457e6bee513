"""Dense grids: the reconstruction volume and the cone-data manifold."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InconsistentGrids, NonfiniteInput
from .geometry import CurveDetector, DetectorSurface, beta_from_angles


def midpoint_axis(lo, hi, n):
    """Uniform midpoint nodes of [lo, hi] and the spacing."""
    d = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * d, d


@dataclass
class VolumeGrid:
    """Isotropic 3-D grid of point values f(origin + i * spacing)."""

    origin: np.ndarray
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise ValueError("volume values must be 3-D")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @classmethod
    def zeros(cls, origin, spacing, dims):
        return cls(np.asarray(origin, dtype=float), float(spacing),
                   np.zeros(tuple(dims)))

    @property
    def dims(self):
        return self.values.shape

    @property
    def box(self):
        hi = self.origin + (np.array(self.dims) - 1) * self.spacing
        return self.origin.copy(), hi

    @property
    def cell_volume(self):
        return self.spacing ** 3

    def axes(self):
        return tuple(self.origin[i] + self.spacing * np.arange(self.dims[i])
                     for i in range(3))

    def meshpoints(self):
        ax = self.axes()
        X, Y, Z = np.meshgrid(*ax, indexing="ij")
        return np.stack([X, Y, Z], axis=-1)

    def like(self, values):
        return VolumeGrid(self.origin.copy(), self.spacing,
                          np.asarray(values, dtype=float))

    def inner(self, other):
        """Weighted L2 inner product sum(f h) dz^3."""
        return float(np.sum(self.values * other.values) * self.cell_volume)

    def norm(self):
        return float(np.sqrt(np.sum(self.values ** 2) * self.cell_volume))

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise NonfiniteInput("volume contains non-finite values")


@dataclass
class ConeDataGrid:
    """Dense grid over the cone manifold S x S^2 x (eps, pi/2 - eps).

    For a surface detector the axes are (v1, v2, theta, psi, phi); for a
    curve detector (t, theta, psi) with a fixed opening angle ``phi0``.
    ``axis_weights`` hold per-axis quadrature weights whose outer product
    is the data measure w_data (surface area x sin(theta) dtheta dpsi x
    dphi; curve case dt |u'| x sin(theta) dtheta dpsi).
    """

    detector: DetectorSurface
    axes: tuple
    axis_weights: tuple
    values: np.ndarray
    phi0: float = None

    def __post_init__(self):
        shape = tuple(len(a) for a in self.axes)
        if self.values is None:
            self.values = np.zeros(shape)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != shape:
            raise InconsistentGrids(
                f"values shape {self.values.shape} != axes shape {shape}")
        if any(np.any(w <= 0) for w in self.axis_weights):
            raise InconsistentGrids("data quadrature weights must be positive")

    @classmethod
    def for_surface(cls, detector, v1, v2, theta, psi, phi, values=None):
        """Build from (lo, hi, n) triples per axis (midpoint nodes)."""
        v1n, dv1 = midpoint_axis(*v1)
        v2n, dv2 = midpoint_axis(*v2)
        thn, dth = midpoint_axis(*theta)
        psn, dps = midpoint_axis(*psi)
        phn, dph = midpoint_axis(*phi)
        w1, w2 = detector.area_axis_weights(v1n, dv1, v2n, dv2)
        wth = np.sin(thn) * dth
        wps = np.full_like(psn, dps)
        wph = np.full_like(phn, dph)
        return cls(detector, (v1n, v2n, thn, psn, phn),
                   (w1, w2, wth, wps, wph), values)

    @classmethod
    def for_curve(cls, detector: CurveDetector, t, theta, psi, phi0,
                  values=None):
        tn, dt = midpoint_axis(*t)
        thn, dth = midpoint_axis(*theta)
        psn, dps = midpoint_axis(*psi)
        wt = detector.line_weights(tn, dt)
        wth = np.sin(thn) * dth
        wps = np.full_like(psn, dps)
        return cls(detector, (tn, thn, psn), (wt, wth, wps), values,
                   phi0=float(phi0))

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_samples(self):
        return self.values.size

    @property
    def is_restricted(self):
        return self.phi0 is not None

    def w_data(self):
        """Per-sample quadrature measure, as a dense array of self.shape."""
        w = self.axis_weights[0]
        for wi in self.axis_weights[1:]:
            w = np.multiply.outer(w, wi)
        return w

    def vertices(self):
        """Vertex points for every vertex-grid node, flattened (Nv, 3)."""
        if self.is_restricted:
            return self.detector.point(self.axes[0])
        V1, V2 = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        return self.detector.chart_point(V1.ravel(), V2.ravel(),
                                         chart=0).reshape(-1, 3)

    def directions(self):
        """Axis unit vectors for every (theta, psi) node, flattened (Nd, 3)."""
        i = 1 if self.is_restricted else 2
        T, P = np.meshgrid(self.axes[i], self.axes[i + 1], indexing="ij")
        return beta_from_angles(T.ravel(), P.ravel())

    def phis(self):
        if self.is_restricted:
            return np.array([self.phi0])
        return self.axes[4]

    def like(self, values):
        return replace(self, values=np.asarray(values, dtype=float))

    def zeros_like(self):
        return self.like(np.zeros(self.shape))

    def inner(self, other):
        return float(np.sum(self.values * other.values * self.w_data()))

    def norm(self):
        return float(np.sqrt(np.sum(self.values ** 2 * self.w_data())))

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise NonfiniteInput("cone data contains non-finite values")

    def compatible_with(self, other: "ConeDataGrid"):
        if self.shape != other.shape or self.is_restricted != other.is_restricted:
            raise InconsistentGrids("cone data grids differ in shape")
        for a, b in zip(self.axes, other.axes):
            if not np.allclose(a, b):
                raise InconsistentGrids("cone data grids differ in axes")
