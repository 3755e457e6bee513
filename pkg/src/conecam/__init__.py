"""Weighted cone (Compton camera) transform toolbox.

Forward/adjoint projector pair over cone surfaces with vertices on a
detector, microlocal accessibility and visibility analysis, and
Sobolev-preconditioned iterative reconstruction.
"""

from .geometry import (Cone, CurveDetector, DirectionChart, PlaneDetector,
                       SphereDetector, cone_frame, surface_point)
from .grids import ConeDataGrid, VolumeGrid
from .microlocal import (CanonicalPoint, Covector, canonical_sample,
                         disk_invisible, is_accessible, recover_covector,
                         restricted_recover, tuy_check, visibility_map)
from .operator import QuadratureSpec, adjoint, forward, restricted_forward
from .reconstruct import (ConeBeamReconstructor, SolverConfig,
                          SymbolProbeConfig, apply_normal,
                          riesz_precondition, solve, symbol_order_probe)
from .sobolev import data_sobolev_norm, sobolev_norm
from .weights import AngularWindow, BallBump, BoxBump, WeightSpec, \
    eval_weight, weight_nonvanishing_on

__version__ = "0.1.0"
