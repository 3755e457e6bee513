"""Experiment configuration: flat INI-style sections of key = value pairs.

Angles carrying a ``_deg`` suffix are degrees; all other angles are
radians.  Every loaded config is hashed so runs are self-documenting.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass

import numpy as np

from .geometry import (CurveDetector, DetectorSurface, PlaneDetector,
                       SphereDetector)
from .grids import ConeDataGrid, VolumeGrid
from .operator import QuadratureSpec, default_r_max
from .reconstruct import SolverConfig
from .weights import AngularWindow, BallBump, ConeCutoff, WeightSpec


class ConfigError(ValueError):
    pass


def _floats(s):
    return [float(x) for x in s.split()]


def _axis(s):
    lo, hi, n = s.split()
    return (float(lo), float(hi), int(n))


@dataclass
class ExperimentConfig:
    detector: DetectorSurface
    volume: VolumeGrid
    data_grid: ConeDataGrid
    weight: WeightSpec
    quadrature: QuadratureSpec
    solver: SolverConfig
    seed: int
    config_hash: str
    text: str


DEFAULT_CONFIG = """\
[experiment]
seed = 1234

[detector]
kind = sphere
center = 0 0 0
radius = 2.0

[volume]
origin = -1 -1 -1
spacing = 0.133333333333333333
dims = 16 16 16

[weight]
base = constant
amplitude = 1.0
window_lo_deg = 5
window_hi_deg = 75
window_taper_deg = 2

[data]
v1 = 0.2 2.9 8
v2 = 0.0 6.283185307179586 8
theta = 0.2 2.9 12
psi = 0.0 6.283185307179586 24
phi = 0.12 1.35 6

[quadrature]
n_alpha = 12
n_r = 16
r_max = auto

[solver]
max_iters = 50
rel_tol = 1e-6
preconditioner = riesz
"""


def build_detector(sec) -> DetectorSurface:
    kind = sec.get("kind", "sphere")
    center = _floats(sec.get("center", "0 0 0"))
    if kind == "sphere":
        return SphereDetector(center, float(sec["radius"]))
    if kind == "plane":
        radius = sec.get("radius", "inf")
        radius = np.inf if radius == "inf" else float(radius)
        return PlaneDetector(center, _floats(sec.get("normal", "0 0 1")),
                             radius)
    if kind == "curve":
        return CurveDetector(center, float(sec["radius"]),
                             _floats(sec.get("normal", "0 0 1")))
    raise ConfigError(f"unknown detector kind {kind!r}")


def build_weight(sec) -> WeightSpec:
    window = None
    if "window_lo_deg" in sec:
        window = AngularWindow(
            lo=np.deg2rad(float(sec["window_lo_deg"])),
            hi=np.deg2rad(float(sec["window_hi_deg"])),
            taper=np.deg2rad(float(sec.get("window_taper_deg", "2"))))
    chi1 = None
    if "chi1_ball" in sec:
        cx, cy, cz, inner, outer = _floats(sec["chi1_ball"])
        chi1 = BallBump((cx, cy, cz), inner, outer)
    chi2 = None
    if "chi2_vertex_ball" in sec:
        cx, cy, cz, inner, outer = _floats(sec["chi2_vertex_ball"])
        chi2 = ConeCutoff(vertex_bump=BallBump((cx, cy, cz), inner, outer))
    return WeightSpec(base=sec.get("base", "constant"),
                      amplitude=float(sec.get("amplitude", "1")),
                      window=window, chi1=chi1, chi2=chi2)


def build_volume(sec) -> VolumeGrid:
    dims = [int(x) for x in sec["dims"].split()]
    return VolumeGrid.zeros(_floats(sec["origin"]),
                            float(sec["spacing"]), dims)


def build_data_grid(sec, detector) -> ConeDataGrid:
    if detector.kind == "curve":
        grid = ConeDataGrid.for_curve(detector, _axis(sec["t"]),
                                      _axis(sec["theta"]),
                                      _axis(sec["psi"]),
                                      float(sec["phi0"]))
    else:
        grid = ConeDataGrid.for_surface(detector, _axis(sec["v1"]),
                                        _axis(sec["v2"]),
                                        _axis(sec["theta"]),
                                        _axis(sec["psi"]),
                                        _axis(sec["phi"]))
    phis = grid.phis()
    if np.any(phis <= 0) or np.any(phis >= np.pi / 2):
        raise ConfigError("opening angles must lie inside (0, pi/2)")
    return grid


def build_quadrature(sec, detector, volume) -> QuadratureSpec:
    r_max = sec.get("r_max", "auto")
    if r_max == "auto":
        r_max = default_r_max(detector, volume)
    return QuadratureSpec(n_alpha=int(sec.get("n_alpha", "16")),
                          n_r=int(sec.get("n_r", "16")),
                          r_max=float(r_max),
                          r_min=float(sec.get("r_min", "0")))


def build_solver(sec) -> SolverConfig:
    return SolverConfig(max_iters=int(sec.get("max_iters", "100")),
                        rel_tol=float(sec.get("rel_tol", "1e-6")),
                        preconditioner=sec.get("preconditioner", "none"))


def load_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
        detector = build_detector(parser["detector"])
        volume = build_volume(parser["volume"])
        detector.assert_outside(*volume.box)
        data_grid = build_data_grid(parser["data"], detector)
        weight = build_weight(parser["weight"]
                              if parser.has_section("weight") else {})
        quadrature = build_quadrature(
            parser["quadrature"] if parser.has_section("quadrature") else {},
            detector, volume)
        solver = build_solver(parser["solver"]
                              if parser.has_section("solver") else {})
        seed = int(parser.get("experiment", "seed", fallback="0"))
    except ConfigError:
        raise
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ConfigError(str(exc)) from exc
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    return ExperimentConfig(detector=detector, volume=volume,
                            data_grid=data_grid, weight=weight,
                            quadrature=quadrature, solver=solver,
                            seed=seed, config_hash=digest, text=text)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config_text(fh.read())
