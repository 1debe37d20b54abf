"""Exception taxonomy shared across the package."""


class ConfigurationError(ValueError):
    """Invalid construction parameters (grid size, catalog names, ...)."""


class ResolutionError(ValueError):
    """Requested scale cannot be represented on the current grid."""


class DomainError(ValueError):
    """Input function violates a support/placement precondition."""


class RangeError(ArithmeticError):
    """A computed quantity left the representable floating-point range."""


class SetupError(RuntimeError):
    """Experiment geometry is degenerate; reconfigure and rerun."""


class SparseDecompositionError(RuntimeError):
    """No sparse family satisfying the output contract was found."""
