"""Exception types raised across the pipeline."""


class MeshFormatError(ValueError):
    """OBJ input could not be parsed."""


class DegenerateMeshError(ValueError):
    """Mesh has no usable geometry (zero faces or zero extent)."""


class InvalidLightError(ValueError):
    """Light parameters outside their valid domain (e.g. sigma2 <= 0)."""


class InvalidDirectionError(ValueError):
    """Light direction at or below the horizon."""


class GeometryMismatchError(ValueError):
    """Image/grid dimensions of two operands do not agree."""


class BasisFormatError(ValueError):
    """A basis file failed header or payload validation."""


class UndefinedMetricError(ValueError):
    """Metric undefined for this input (e.g. zero-variance image)."""


class DomainMismatchError(ValueError):
    """Shadow maps tagged with different domains were paired."""


class BoundsError(IndexError):
    """Pixel coordinate outside the image."""
