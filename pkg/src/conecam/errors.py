"""Exception types shared across the package."""


class ConecamError(Exception):
    """Base class for all package-specific errors."""


class OutOfChart(ConecamError):
    """Chart parameters left the valid domain of the chart."""


class PoleDegenerate(ConecamError):
    """Direction chart is degenerate (sin(theta) too small); switch chart."""


class VertexInVolume(ConecamError):
    """A cone vertex is closer to an evaluation point than the configured
    minimum separation; the detector must not intersect the volume."""


class NotAccessible(ConecamError):
    """The covector has no cone conormal to it on the detector."""


class InaccessibleInput(ConecamError):
    """Cone-side data violates the accessibility hypothesis (u_hat = 0)."""


class EmptyConeSet(ConecamError):
    """No cones could be sampled for the requested covector."""


class ChartSeam(ConecamError):
    """Continuation along the vertex set failed at a chart boundary."""


class InconsistentGrids(ConecamError):
    """Volume and data grids do not describe a matching experiment."""


class NonfiniteInput(ConecamError):
    """Input array contains NaN or infinity."""


class LadderOutOfBand(ConecamError):
    """Frequency ladder violates the resolvable band of the grid."""


class Divergence(ConecamError):
    """Iterative solver residual increased beyond tolerance; usually an
    adjoint-mismatch symptom."""


class MaxIters(ConecamError):
    """Iteration limit reached before the tolerance."""


class OutOfBox(ConecamError):
    """Phantom support exceeds the volume box."""
