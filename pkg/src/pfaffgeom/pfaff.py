"""Integrability classification of the Pfaff equation ``N = 0``.

The degree of integrability is read off the Darboux sub-sequence
``N, N^dN, N^(dN)^2, ...``: if ``k`` is the largest power of ``dN`` for which
``N ^ (dN)^k`` does not vanish, the form is locally ``dphi + sum mu_i dnu_i``
with ``k`` pairs and its integral manifolds have dimension ``dim - 1 - k``.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegreeError, NumericalError
from .forms import AltTensor, differential_split, wedge_product

DEFAULT_TOL = 1e-9
MAX_GRID_POINTS = 10**6
THREADS_ENV = "PFAFFGEOM_THREADS"


def frobenius_three_form(geom, raw=False):
    """``N ^ d^N`` with components ``N_i W_jk + N_j W_ki + N_k W_ij``.

    With ``raw=True`` the result is rescaled by ``norm**2`` to the value for
    the unnormalized field; ``N ^ dN`` is homogeneous of degree two in the
    scale of ``N``, so this is exact.
    """
    if geom.dim < 3:
        raise DegreeError("the Frobenius 3-form needs dimension >= 3")
    t = wedge_product(AltTensor.from_covector(geom.N_cov), AltTensor.from_matrix(geom.W))
    return t * geom.norm**2 if raw else t


def vanishing_threshold(degree, dN_max, tol):
    return tol * max(1.0, dN_max) ** math.ceil(degree / 2)


def wedge_sequence(geom):
    """``[("dN", .), ("N^dN", .), ("dN^2", .), ...]`` up to degree ``dim``."""
    N = AltTensor.from_covector(geom.N_cov)
    dN = AltTensor.from_matrix(geom.W)
    seq = []
    power = dN
    m = 1
    while power.degree <= geom.dim:
        seq.append((f"dN^{m}" if m > 1 else "dN", power))
        if power.degree + 1 <= geom.dim:
            seq.append((f"N^dN^{m}" if m > 1 else "N^dN", wedge_product(N, power)))
        if power.degree + 2 > geom.dim:
            break
        power = wedge_product(power, dN)
        m += 1
    return seq


@dataclass
class IntegrabilityReport:
    point: list
    sequence_norms: list
    pair_count: int
    degree_of_integrability: int
    completely_integrable: bool
    vanishing: list = field(default_factory=list)

    def to_dict(self):
        return {
            "point": [float(v) for v in self.point],
            "sequence_norms": [[label, float(v)] for label, v in self.sequence_norms],
            "vanishing": list(self.vanishing),
            "pair_count": self.pair_count,
            "degree_of_integrability": self.degree_of_integrability,
            "completely_integrable": self.completely_integrable,
        }


def classify_geometry(geom, tol=DEFAULT_TOL):
    seq = wedge_sequence(geom)
    dN_max = seq[0][1].max_abs()
    vanish = [t.max_abs() < vanishing_threshold(t.degree, dN_max, tol) for _, t in seq]
    pair_count = 0
    for (label, t), v in zip(seq, vanish):
        if label.startswith("N^"):
            if v:
                break
            pair_count += 1
    degree = geom.dim - 1 - pair_count
    return IntegrabilityReport(
        point=[float(v) for v in geom.x],
        sequence_norms=[(label, t.norm()) for label, t in seq],
        pair_count=pair_count,
        degree_of_integrability=degree,
        completely_integrable=pair_count == 0,
        vanishing=vanish,
    )


def integrability_class_at_point(spec, metric, x, tol=DEFAULT_TOL, mode="analytic"):
    """Classify the Pfaff equation at ``x``. Raises ``NullNormal``/``ZeroForm``."""
    return classify_geometry(differential_split(spec, metric, x, mode), tol)


@dataclass(frozen=True)
class Grid:
    center: tuple
    half_width: tuple
    samples_per_axis: int

    @classmethod
    def make(cls, center, half_width, samples_per_axis):
        center = tuple(float(c) for c in center)
        if np.ndim(half_width) == 0:
            half_width = (float(half_width),) * len(center)
        half_width = tuple(float(w) for w in half_width)
        if len(half_width) != len(center):
            raise ConfigError("half_width length must match center", "grid.half_width")
        if int(samples_per_axis) < 1:
            raise ConfigError("samples_per_axis must be >= 1", "grid.samples_per_axis")
        if int(samples_per_axis) ** len(center) > MAX_GRID_POINTS:
            raise ConfigError(f"grid exceeds {MAX_GRID_POINTS} points", "grid.samples_per_axis")
        return cls(center, half_width, int(samples_per_axis))

    def axes(self):
        if self.samples_per_axis == 1:
            return [np.array([c]) for c in self.center]
        return [np.linspace(c - w, c + w, self.samples_per_axis)
                for c, w in zip(self.center, self.half_width)]

    def points(self):
        for p in itertools.product(*self.axes()):
            yield np.array(p)

    def __len__(self):
        return self.samples_per_axis ** len(self.center)


def _threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def map_points(fn, points):
    """Ordered map over grid points, threaded when the env var asks for it."""
    n = _threads()
    if n == 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, points))


@dataclass
class RegionReport:
    n_points: int
    histogram: dict
    majority_degree: int | None
    min_sequence_norms: dict
    max_sequence_norms: dict
    exceptional_points: list
    reports: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "n_points": self.n_points,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "majority_degree": self.majority_degree,
            "min_sequence_norms": self.min_sequence_norms,
            "max_sequence_norms": self.max_sequence_norms,
            "exceptional_points": self.exceptional_points,
        }


def classify_region(spec, metric, grid, tol=DEFAULT_TOL):
    """Per-point classification reduced to a degree histogram.

    NullNormal/ZeroForm points are collected as exceptional, never raised.
    """

    def one(p):
        try:
            return integrability_class_at_point(spec, metric, p, tol)
        except NumericalError as exc:
            return {"point": [float(v) for v in p], "error": type(exc).__name__, "message": str(exc)}

    results = map_points(one, list(grid.points()))
    reports = [r for r in results if isinstance(r, IntegrabilityReport)]
    exceptional = [r for r in results if isinstance(r, dict)]
    hist = Counter(r.degree_of_integrability for r in reports)
    majority = None
    if hist:
        top = max(hist.values())
        majority = min(d for d, c in hist.items() if c == top)
    lo, hi = {}, {}
    for r in reports:
        for label, v in r.sequence_norms:
            lo[label] = min(lo.get(label, math.inf), v)
            hi[label] = max(hi.get(label, -math.inf), v)
    return RegionReport(len(results), dict(hist), majority, lo, hi, exceptional, reports)
