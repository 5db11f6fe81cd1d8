"""Numerical differential geometry of Pfaff equations."""

from .errors import (
    ConfigError,
    ConstraintViolation,
    DegenerateCurve,
    DegenerateTangentMetric,
    DegreeError,
    EigenvalueCollision,
    NullNormal,
    NumericalBlowup,
    NumericalError,
    PfaffGeomError,
    SampleMismatch,
    SingularMetric,
    ZeroForm,
)
from .forms import AltTensor, CovectorFieldSpec, MetricSpec, PointGeometry, differential_split, wedge_product

__version__ = "0.1.0"

__all__ = [
    "AltTensor",
    "ConfigError",
    "ConstraintViolation",
    "CovectorFieldSpec",
    "DegenerateCurve",
    "DegenerateTangentMetric",
    "DegreeError",
    "EigenvalueCollision",
    "MetricSpec",
    "NullNormal",
    "NumericalBlowup",
    "NumericalError",
    "PfaffGeomError",
    "PointGeometry",
    "SampleMismatch",
    "SingularMetric",
    "ZeroForm",
    "differential_split",
    "wedge_product",
]
