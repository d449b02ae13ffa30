"""Exception hierarchy shared across the package."""


class QCloseError(Exception):
    """Base class for package errors."""


class StructuralError(QCloseError, ValueError):
    """Shapes, register names or dimensions do not line up."""


class ParameterError(QCloseError, ValueError):
    """A user-supplied parameter is out of its valid range."""


class CapacityError(QCloseError, RuntimeError):
    """The requested computation exceeds the dense-simulation budget."""
