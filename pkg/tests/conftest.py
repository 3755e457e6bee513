import numpy as np
import pytest

from conecam.geometry import (CurveDetector, PlaneDetector, SphereDetector)
from conecam.grids import ConeDataGrid, VolumeGrid
from conecam.operator import QuadratureSpec, default_r_max
from conecam.weights import WeightSpec

TWO_PI = 2.0 * np.pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def volume16():
    return VolumeGrid.zeros((-1, -1, -1), 2.0 / 15, (16, 16, 16))


@pytest.fixture
def sphere_detector():
    return SphereDetector((0.0, 0.0, 0.0), 2.0)


@pytest.fixture
def plane_detector():
    return PlaneDetector((0.0, 0.0, -1.6), (0.0, 0.0, 1.0))


@pytest.fixture
def disk_detector():
    return PlaneDetector((0.0, 0.0, -1.6), (0.0, 0.0, 1.0), radius=2.5)


@pytest.fixture
def circle_detector():
    return CurveDetector((0.0, 0.0, 0.0), 2.0, (0.0, 0.0, 1.0))


def small_data_grid(detector, n_v=6, n_dir=(8, 12), n_phi=4):
    """Compact data grid sized for fast unit tests."""
    if detector.kind == "sphere":
        v1 = (0.25, 2.9, n_v)
        v2 = (0.0, TWO_PI, n_v)
    else:
        half = 1.6 if not np.isfinite(getattr(detector, "radius", np.inf)) \
            else detector.radius / np.sqrt(2.0) * 0.95
        v1 = (-half, half, n_v)
        v2 = (-half, half, n_v)
    return ConeDataGrid.for_surface(detector, v1, v2,
                                    (0.25, 2.9, n_dir[0]),
                                    (0.0, TWO_PI, n_dir[1]),
                                    (0.15, 1.3, n_phi))


@pytest.fixture
def weight_plain():
    return WeightSpec()


def quad_for(detector, volume, n_alpha=12, n_r=12):
    return QuadratureSpec(n_alpha, n_r, default_r_max(detector, volume))
