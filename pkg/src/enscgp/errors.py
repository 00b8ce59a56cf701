"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotPsdError(ValueError):
    """A matrix that must be positive semidefinite has a significantly
    negative eigenvalue (below minus the effective rank threshold)."""


class NotSpdError(ValueError):
    """A matrix that must be symmetric positive definite is not."""


class DegenerateModelError(RuntimeError):
    """A reduced system that is SPD by construction failed to factor;
    almost always a rank-tolerance misconfiguration."""


class InfeasiblePointError(ValueError):
    """Evaluation point lies outside the admissible range subspace."""


class MatrixParseError(ValueError):
    """Matrix file is malformed; the message carries line/column context."""
