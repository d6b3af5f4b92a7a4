"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes, so new error conditions should
reuse an existing class where the meaning fits.
"""


class BiphasicError(Exception):
    """Base class for all package errors."""


class ConfigError(BiphasicError):
    """Invalid configuration value, missing key, or inconsistent scenario."""


class MeshError(BiphasicError):
    """Invalid mesh data (connectivity, volumes, facet sets)."""


class MeshParseError(MeshError):
    """Malformed mesh file. Carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GeometryError(BiphasicError):
    """Degenerate geometry (zero-volume tetrahedron, coplanar points)."""


class QueryError(BiphasicError):
    """A mesh query (e.g. reference-line lookup) returned nothing usable."""


class InvertedElementError(BiphasicError):
    """Negative Jacobian / J <= 0 at a quadrature point during assembly."""

    def __init__(self, element_id, quad_point=None):
        self.element_id = element_id
        self.quad_point = quad_point
        where = f"element {element_id}"
        if quad_point is not None:
            where += f", quadrature point {quad_point}"
        super().__init__(f"inverted element at {where}")


class StepFailureError(BiphasicError):
    """Newton iteration failed to converge after all step halvings.

    ``history`` holds one list of residual norms per attempted solve.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class ExtractionError(BiphasicError):
    """Field extraction requested on nodes lacking the needed dofs."""


class MetricError(BiphasicError):
    """Oscillation metric undefined for the given profile."""


class OracleSizeError(BiphasicError):
    """A brute-force oracle refused an input above its size guard."""
