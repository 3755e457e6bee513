"""Deterministic phantom rasterization onto volume grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfBox
from .grids import VolumeGrid
from .weights import BallBump


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float
    amplitude: float = 1.0


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple
    amplitude: float = 1.0


@dataclass(frozen=True)
class SmoothBump:
    center: tuple
    inner: float
    outer: float
    amplitude: float = 1.0


@dataclass(frozen=True)
class OscillatoryProbe:
    center: tuple
    radius: float
    direction: tuple
    frequency: float
    amplitude: float = 1.0


@dataclass(frozen=True)
class Composite:
    parts: tuple


def _check_inside(lo_p, hi_p, grid: VolumeGrid):
    lo, hi = grid.box
    if np.any(np.asarray(lo_p) < lo - 1e-12) or \
            np.any(np.asarray(hi_p) > hi + 1e-12):
        raise OutOfBox("phantom support exceeds the volume box")


def make_phantom(spec, origin, spacing, dims) -> VolumeGrid:
    """Rasterize a phantom spec onto a fresh grid.

    Balls are antialiased with 8 subvoxel samples; smooth shapes are
    sampled pointwise.
    """
    grid = VolumeGrid.zeros(origin, spacing, dims)
    _add(spec, grid)
    return grid


def _add(spec, grid: VolumeGrid):
    pts = grid.meshpoints()
    if isinstance(spec, Composite):
        for part in spec.parts:
            _add(part, grid)
        return
    if isinstance(spec, Ball):
        c = np.asarray(spec.center)
        _check_inside(c - spec.radius, c + spec.radius, grid)
        # 2x2x2 subvoxel antialiasing of the indicator
        acc = np.zeros(grid.dims)
        for dx in (-0.25, 0.25):
            for dy in (-0.25, 0.25):
                for dz in (-0.25, 0.25):
                    off = np.array([dx, dy, dz]) * grid.spacing
                    r = np.linalg.norm(pts + off - c, axis=-1)
                    acc += (r <= spec.radius)
        grid.values += spec.amplitude * acc / 8.0
        return
    if isinstance(spec, Box):
        _check_inside(spec.lo, spec.hi, grid)
        inside = np.all((pts >= np.asarray(spec.lo))
                        & (pts <= np.asarray(spec.hi)), axis=-1)
        grid.values += spec.amplitude * inside
        return
    if isinstance(spec, SmoothBump):
        c = np.asarray(spec.center)
        _check_inside(c - spec.outer, c + spec.outer, grid)
        grid.values += spec.amplitude * BallBump(tuple(spec.center),
                                                 spec.inner,
                                                 spec.outer)(pts)
        return
    if isinstance(spec, OscillatoryProbe):
        c = np.asarray(spec.center)
        _check_inside(c - spec.radius, c + spec.radius, grid)
        zhat = np.asarray(spec.direction, dtype=float)
        zhat = zhat / np.linalg.norm(zhat)
        chi = BallBump(tuple(spec.center), 0.5 * spec.radius,
                       spec.radius)(pts)
        phase = 2.0 * np.pi * spec.frequency * ((pts - c) @ zhat)
        grid.values += spec.amplitude * chi * np.cos(phase)
        return
    raise TypeError(f"unknown phantom spec {type(spec).__name__}")
