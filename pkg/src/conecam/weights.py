"""Smooth weights on cones: physical base factor, angular window, cutoffs.

The weight evaluated on a cone ``(u, beta, phi)`` at a point ``z`` is

    kappa = a * base(|z - u|) * window(phi) * chi1(z) * chi2(u, phi)

with a quintic-smoothstep taper on every edge so kappa is C^2 and has
compact support in all variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyConeSet, VertexInVolume


def smoothstep5(x):
    """Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C^2 at both ends."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


@dataclass(frozen=True)
class AngularWindow:
    """C^2 window in the opening angle: 1 on [lo, hi], tapering to 0 over a
    band of width ``taper`` on each side."""

    lo: float
    hi: float
    taper: float

    def __post_init__(self):
        if not (self.lo < self.hi and self.taper > 0):
            raise ValueError("window needs lo < hi and positive taper")

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        rise = smoothstep5((phi - (self.lo - self.taper)) / self.taper)
        fall = smoothstep5(((self.hi + self.taper) - phi) / self.taper)
        return rise * fall


@dataclass(frozen=True)
class BallBump:
    """Radial bump: 1 inside ``inner``, 0 outside ``outer``, quintic taper."""

    center: tuple
    inner: float
    outer: float

    def __post_init__(self):
        if not (0.0 <= self.inner < self.outer):
            raise ValueError("need 0 <= inner < outer")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        r = np.linalg.norm(z - np.asarray(self.center), axis=-1)
        return smoothstep5((self.outer - r) / (self.outer - self.inner))


@dataclass(frozen=True)
class BoxBump:
    """Separable box bump: 1 on the inner box [lo+margin, hi-margin], 0
    outside [lo, hi]."""

    lo: tuple
    hi: tuple
    margin: float

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        up = smoothstep5((z - lo) / self.margin)
        down = smoothstep5((hi - z) / self.margin)
        return np.prod(up * down, axis=-1)


@dataclass(frozen=True)
class ConeCutoff:
    """Cutoff chi2(u, phi): spatial bump on the vertex times a phi window."""

    vertex_bump: object = None     # callable on points, or None for 1
    phi_window: AngularWindow = None

    def __call__(self, u, phi):
        out = np.ones(np.broadcast(np.asarray(u)[..., 0],
                                   np.asarray(phi)).shape)
        if self.vertex_bump is not None:
            out = out * self.vertex_bump(u)
        if self.phi_window is not None:
            out = out * self.phi_window(phi)
        return out


# Compton-camera angular range cited for 511 keV: 5 to 75 degrees.
DEFAULT_WINDOW = AngularWindow(lo=np.deg2rad(5.0), hi=np.deg2rad(75.0),
                               taper=np.deg2rad(2.0))


@dataclass(frozen=True)
class WeightSpec:
    """Full weight specification.

    base is "constant" (kappa base = a) or "inverse-distance"
    (a / |z - u|, the line-superposition factor of the cone integral).
    ``window``, ``chi1`` and ``chi2`` may each be None, meaning 1.
    """

    base: str = "constant"
    amplitude: float = 1.0
    window: AngularWindow = None
    chi1: object = None
    chi2: ConeCutoff = None
    min_separation: float = 1e-9

    def __post_init__(self):
        if self.base not in ("constant", "inverse-distance"):
            raise ValueError(f"unknown base kind {self.base!r}")


def eval_weight(spec: WeightSpec, u, beta, phi, z):
    """Evaluate kappa(u, beta, phi, z); broadcasts over all arguments."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dist = np.linalg.norm(z - u, axis=-1)
    if np.any(dist < spec.min_separation):
        raise VertexInVolume("evaluation point too close to a cone vertex")
    out = np.full(dist.shape, spec.amplitude)
    if spec.base == "inverse-distance":
        out = out / dist
    if spec.window is not None:
        out = out * spec.window(phi)
    if spec.chi1 is not None:
        out = out * spec.chi1(z)
    if spec.chi2 is not None:
        out = out * spec.chi2(u, phi)
    return out


def weight_nonvanishing_on(spec: WeightSpec, cone_samples, z,
                           threshold=1e-9):
    """True iff the weight exceeds ``threshold * amplitude`` at at least one
    sampled cone of the conormal set of (z, zeta).

    ``cone_samples`` is a sequence of (u, beta, phi) triples, e.g. taken
    from the canonical-relation sampler.
    """
    if len(cone_samples) == 0:
        raise EmptyConeSet("no cones sampled for this covector")
    floor = threshold * abs(spec.amplitude)
    for u, beta, phi in cone_samples:
        if float(eval_weight(spec, u, beta, phi, z)) > floor:
            return True
    return False
