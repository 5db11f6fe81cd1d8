"""Exception hierarchy shared by every module."""


class PfaffGeomError(Exception):
    """Base class for all library errors."""


class ConfigError(PfaffGeomError, ValueError):
    """Invalid configuration or input. ``path`` names the offending field."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalError(PfaffGeomError, ArithmeticError):
    """A numerical failure at a specific point or sample."""

    def __init__(self, message, point=None, trajectory=None, sample=None):
        super().__init__(message)
        self.point = point
        self.trajectory = trajectory
        self.sample = sample


class ZeroForm(NumericalError):
    pass


class NullNormal(NumericalError):
    pass


class DegreeError(PfaffGeomError, ValueError):
    pass


class DegenerateTangentMetric(NumericalError):
    pass


class SingularMetric(NumericalError):
    pass


class NumericalBlowup(NumericalError):
    pass


class DegenerateCurve(NumericalError):
    pass


class EigenvalueCollision(NumericalError):
    pass


class ConstraintViolation(PfaffGeomError, ValueError):
    pass


class SampleMismatch(PfaffGeomError, ValueError):
    pass
