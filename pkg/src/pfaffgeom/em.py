"""Charged particle in an electromagnetic field as a constrained geodesic.

The Pfaffian form lives on R^4 x R (base coordinates ``(t, x, y, z)`` plus a
fiber coordinate ``phi``, the circle modeled by its universal cover)::

    Abar = A_mu(x) dx^mu + dphi

with metric ``diag(+1, -1, -1, -1, +1)``. Its exterior derivative is the
field strength ``F_mu nu = d_mu A_nu - d_nu A_mu``; horizontal curves
with the constant multiplier ``lambda = -q / (m c)`` obey
``x'' = (q/m) eta^{mu nu} F_{nu rho} x'^rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import IntegratorSettings, Trajectory, _Recorder, rk4_step
from .errors import (ConfigError, ConstraintViolation, NullNormal, NumericalBlowup,
                     NumericalError, SampleMismatch)
from .forms import AltTensor, CovectorFieldSpec, MetricSpec, Polynomial, wedge_product
from .pfaff import DEFAULT_TOL, Grid, integrability_class_at_point, map_points, vanishing_threshold

KINDS = ("uniform_B", "crossed_EB", "pure_gauge", "custom")
ETA = np.array([1.0, -1.0, -1.0, -1.0])
BLOWUP = 1e12


@dataclass(frozen=True)
class FourPotentialSpec:
    kind: str
    params: dict = field(default_factory=dict, compare=False)
    q: float = 1.0
    m: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown potential kind {self.kind!r}", "form.em.kind")
        if not self.m > 0:
            raise ConfigError("mass must be > 0", "form.em.m")
        if not self.c > 0:
            raise ConfigError("c must be > 0", "form.em.c")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", None)
        q = float(d.pop("q", 1.0))
        m = float(d.pop("m", 1.0))
        c = float(d.pop("c", 1.0))
        return cls(kind, d, q, m, c)

    def to_dict(self):
        return {"kind": self.kind, **self.params, "q": self.q, "m": self.m, "c": self.c}

    @property
    def multiplier(self):
        """The constant Lagrange multiplier ``-q / (m c)``."""
        return -self.q / (self.m * self.c)

    def potential(self):
        """Covariant components ``A_mu`` as four polynomials on the base."""
        P = lambda c, e: Polynomial(4, [c], [e])
        zero = Polynomial(4)
        if self.kind == "uniform_B":
            B = float(self.params.get("B", 1.0))
            return (zero, P(-B / 2, [0, 0, 1, 0]), P(B / 2, [0, 1, 0, 0]), zero)
        if self.kind == "crossed_EB":
            E = float(self.params.get("E", 1.0))
            B = float(self.params.get("B", 1.0))
            # F_01 = E, F_23 = B
            return (P(-E, [0, 1, 0, 0]), zero, P(-B / 2, [0, 0, 0, 1]), P(B / 2, [0, 0, 1, 0]))
        if self.kind == "pure_gauge":
            chi = Polynomial.from_terms(4, self.params.get("phi", [{"coeff": 1.0, "exponents": [1, 0, 0, 0]}]))
            return tuple(-chi.deriv(mu) for mu in range(4))
        comps = self.params.get("A")
        if comps is None or len(comps) != 4:
            raise ConfigError("custom potential needs 4 component tables", "form.em.A")
        return tuple(Polynomial.from_terms(4, t) for t in comps)


def build_bundle_form(pot):
    """The 5-d Pfaffian form ``(A_0, A_1, A_2, A_3, 1)`` over ``(x^0..x^3, phi)``."""
    comps = tuple(p.lift(5) for p in pot.potential()) + (Polynomial.constant(5, 1.0),)
    return CovectorFieldSpec(5, comps, "em", pot.to_dict())


def bundle_metric():
    return MetricSpec.preset("bundle5", 5)


class _Field:
    """Fast evaluation of ``A(x)`` and ``F(x)`` on the base."""

    def __init__(self, pot):
        self.spec = CovectorFieldSpec(4, pot.potential(), "em-base")

    def A(self, x):
        return self.spec.evaluate(x)

    def F(self, x):
        J = self.spec.raw_jacobian(x)
        return J - J.T


def field_strength(pot, x):
    """``F[mu, nu] = d_mu A_nu - d_nu A_mu`` at a base point."""
    return _Field(pot).F(np.asarray(x, dtype=float)[:4])


# ---------------------------------------------------------------------------
# integrability


@dataclass
class EMReport:
    F: object
    wedge_norms: dict
    degree: int
    pfaff_degree: int
    gauge_flag: bool
    agrees_with_pfaff: bool
    n_points: int
    degrees: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "wedge_norms": {k: float(v) for k, v in self.wedge_norms.items()},
            "degree": self.degree,
            "pfaff_degree": self.pfaff_degree,
            "gauge_flag": self.gauge_flag,
            "agrees_with_pfaff": self.agrees_with_pfaff,
            "n_points": self.n_points,
        }


def _em_degree_at(fld, x4, tol):
    """Degree from the field strength alone: 4 if F = 0, 3 if F^F = 0, else 2."""
    A5 = np.append(fld.A(x4), 0.0)
    F4 = fld.F(x4)
    F5 = np.zeros((5, 5))
    F5[:4, :4] = F4
    F = AltTensor.from_matrix(F5)
    A = AltTensor.from_covector(A5)
    dphi = AltTensor.from_covector(np.eye(5)[4])
    FF = wedge_product(F, F)
    norms = {
        "F": F.norm(),
        "A^F": wedge_product(A, F).norm(),
        "F^F": FF.norm(),
        "dphi^F^F": wedge_product(dphi, FF).norm(),
    }
    fmax = F.max_abs()
    if fmax < vanishing_threshold(2, fmax, tol):
        degree = 4
    elif FF.max_abs() < vanishing_threshold(4, fmax, tol):
        degree = 3
    else:
        degree = 2
    return degree, norms


def em_integrability_report(pot, grid, tol=DEFAULT_TOL):
    """Classify ``Abar = 0`` over a base grid by two routes.

    The field-strength route reads the degree off ``F`` and ``F ^ F``;
    the generic route runs the Darboux classification on the assembled
    5-d form. ``agrees_with_pfaff`` records whether they match everywhere.
    """
    fld = _Field(pot)
    spec = build_bundle_form(pot)
    metric = bundle_metric()

    def one(p4):
        deg, norms = _em_degree_at(fld, p4, tol)
        rep = integrability_class_at_point(spec, metric, np.append(p4, 0.0), tol)
        return deg, rep.degree_of_integrability, norms

    results = map_points(one, list(grid.points()))
    wedge_norms = {k: max(r[2][k] for r in results) for k in results[0][2]}
    em_degrees = [r[0] for r in results]
    pf_degrees = [r[1] for r in results]
    gauge = all(d == 4 for d in em_degrees)
    degree = min(em_degrees)
    return EMReport(lambda x: field_strength(pot, x), wedge_norms, degree, min(pf_degrees), gauge,
                    em_degrees == pf_degrees, len(results), em_degrees)


# ---------------------------------------------------------------------------
# dynamics


def _check_initial(pot, x0, v0):
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if x0.shape != (4,):
        raise ConfigError("x0 must be a 4-point", "integrate.x0")
    if v0.shape != (4,):
        raise ConfigError("v0 must be a 4-velocity", "integrate.v0")
    vv = float(v0 @ (ETA * v0))
    if abs(vv - pot.c**2) > 1e-9 * max(1.0, pot.c**2):
        raise ConstraintViolation(f"eta(v0, v0) = {vv!r} but c^2 = {pot.c**2!r}")
    return x0, v0


def four_velocity(speed, direction=(1.0, 0.0, 0.0), c=1.0):
    """``gamma (c, v)`` for a 3-velocity of magnitude ``speed`` along ``direction``."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    gamma = 1.0 / math.sqrt(1.0 - (speed / c) ** 2)
    return np.concatenate([[gamma * c], gamma * speed * d])


def lorentz_integrate(pot, x0, v0, settings):
    """RK4 in proper time on ``x'' = (q/m) eta^{mu nu} F_{nu rho} x'^rho``.

    The ``drift`` column holds ``|eta(x', x') - c^2|``; ``extras["eta_vv"]``
    the raw value.
    """
    x0, v0 = _check_initial(pot, x0, v0)
    fld = _Field(pot)
    qm = pot.q / pot.m

    def f(y):
        x, v = y[:4], y[4:]
        return np.concatenate([v, qm * (ETA * (fld.F(x) @ v))])

    return _run(f, np.concatenate([x0, v0]), settings, pot, "lorentz",
                lambda y: (y[:4], y[4:], abs(float(y[4:] @ (ETA * y[4:])) - pot.c**2)))


def constrained_geodesic_em(pot, x0, v0, settings):
    """Horizontal geodesic of ``Abar = 0`` with constant multiplier ``-q/(m c)``.

    The base acceleration is ``-c lam gbar^{-1} W v`` with ``W`` the raw
    exterior derivative of the 5-d form; the fiber velocity is slaved to the
    constraint, ``phi' = -A(x')``. The returned trajectory is 5-dimensional
    (use ``.restrict(slice(0, 4))`` for the base shadow); ``drift`` is
    ``|Abar(vbar)|``.
    """
    x0, v0 = _check_initial(pot, x0, v0)
    spec = build_bundle_form(pot)
    metric = bundle_metric()
    ginv = metric.ginv
    lam = pot.multiplier
    c = pot.c

    def check_null(xb):
        Ab = spec.evaluate(xb)
        q = float(Ab @ (ginv * Ab))
        if abs(q) < 1e-12 * float(Ab @ Ab):
            raise NullNormal(f"gbar(Abar, Abar) = {q:.3e} vanishes at {list(map(float, xb))}",
                             point=[float(v) for v in xb])
        return Ab

    def f(y):
        xb, v = y[:5], y[5:]
        J = spec.raw_jacobian(xb)
        W = J - J.T
        vb = np.append(v, -float(spec.evaluate(xb)[:4] @ v))
        a = -c * lam * (ginv * (W @ vb))
        return np.concatenate([vb, a[:4]])

    def observe(y):
        xb, v = y[:5], y[5:]
        Ab = check_null(xb)
        vb = np.append(v, -float(Ab[:4] @ v))
        return xb, vb, abs(float(Ab @ vb))

    y0 = np.concatenate([x0, [0.0], v0])
    return _run(f, y0, settings, pot, "em_geodesic", observe)


def _run(f, y0, settings, pot, kind, observe):
    meta = {"kind": kind, "method": settings.method, "step": settings.step, "steps": settings.steps,
            "q": pot.q, "m": pot.m, "c": pot.c, "lambda": pot.multiplier}
    rec = _Recorder(kind, meta)
    eta_vv = []

    def record(n, y):
        x, v, drift = observe(y)
        vv = float(v[:4] @ (ETA * v[:4]))
        eta_vv.append(vv)
        rec.add(n * settings.step, x, v, pot.multiplier, drift, math.sqrt(abs(vv)))

    y = np.array(y0, dtype=float)
    n = 0
    try:
        record(0, y)
        for n in range(1, settings.steps + 1):
            y = rk4_step(f, y, settings.step)
            if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP:
                raise NumericalBlowup(f"state exceeded {BLOWUP:g} at step {n}", sample=n)
            record(n, y)
    except NumericalError as exc:
        exc.trajectory = rec.build(status=type(exc).__name__, extras={"eta_vv": np.array(eta_vv)})
        exc.sample = n
        raise
    return rec.build(extras={"eta_vv": np.array(eta_vv)})


# ---------------------------------------------------------------------------
# comparison


def trajectory_compare(a, b, coords=None):
    """Max and RMS Euclidean distance between matching samples.

    ``coords`` selects the compared block (default: the shared leading
    coordinates, e.g. the 4-d base when a 5-d bundle trajectory is compared
    with a base trajectory).
    """
    if len(a) != len(b) or not np.allclose(a.s, b.s, rtol=1e-12, atol=0):
        raise SampleMismatch(f"sample counts/parameters differ ({len(a)} vs {len(b)})")
    if coords is None:
        coords = slice(0, min(a.dim, b.dim))
    d = np.linalg.norm(a.x[:, coords] - b.x[:, coords], axis=1)
    return {"max_pointwise_distance": float(np.max(d)),
            "rms_distance": float(math.sqrt(float(np.mean(d**2))))}


def orbit_radius(traj, plane=(1, 2)):
    """Least-squares circle fit to the projection on a coordinate plane."""
    p = traj.x[:, list(plane)]
    A = np.column_stack([2 * p, np.ones(len(p))])
    b = np.sum(p**2, axis=1)
    (cx, cy, k), *_ = np.linalg.lstsq(A, b, rcond=None)
    return math.sqrt(k + cx * cx + cy * cy)


def cyclotron_radius(pot, speed):
    """``gamma m v_perp / (q B)`` for the uniform-B potential."""
    B = float(pot.params.get("B", 1.0))
    gamma = 1.0 / math.sqrt(1.0 - (speed / pot.c) ** 2)
    return gamma * pot.m * speed / abs(pot.q * B)
