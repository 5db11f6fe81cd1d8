"""Normal curves, constrained geodesics, lines of curvature and kinematics.

All integrators are fixed-step RK4. Curves carry the state ``(x, v, lambda)``
where ``lambda`` is the Lagrange multiplier of the velocity constraint
``N(v) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigError, ConstraintViolation, DegenerateCurve, EigenvalueCollision,
                     NumericalBlowup, NumericalError)
from .forms import differential_split, unit_split
from .geometry import adapted_frame, omega_decompose, second_fundamental_restricted

BLOWUP = 1e12
MAX_SPAN = 1e4
INITIAL_DRIFT_TOL = 1e-10


@dataclass(frozen=True)
class TrajectoryState:
    s: float
    x: np.ndarray
    v: np.ndarray
    lam: float
    drift: float
    speed: float


@dataclass(frozen=True)
class IntegratorSettings:
    step: float
    steps: int
    method: str = "rk4"
    velocity_projection: bool = False
    renormalize_speed: bool = True
    max_span: float = MAX_SPAN

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError("step must be > 0", "integrate.step")
        if int(self.steps) < 1:
            raise ConfigError("steps must be >= 1", "integrate.steps")
        if self.method != "rk4":
            raise ConfigError(f"unsupported method {self.method!r}", "integrate.method")
        if self.step * self.steps > self.max_span:
            raise ConfigError(f"step * steps exceeds the ceiling {self.max_span}", "integrate.steps")


@dataclass
class Trajectory:
    """Sampled integration output, one row per sample."""

    s: np.ndarray
    x: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    drift: np.ndarray
    speed: np.ndarray
    kind: str = ""
    meta: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    status: str = "ok"

    def __len__(self):
        return len(self.s)

    @property
    def dim(self):
        return self.x.shape[1]

    def state(self, i):
        return TrajectoryState(float(self.s[i]), self.x[i], self.v[i], float(self.lam[i]),
                               float(self.drift[i]), float(self.speed[i]))

    def restrict(self, coords):
        """Same samples restricted to a coordinate block (e.g. the 4-d base)."""
        return Trajectory(self.s, self.x[:, coords], self.v[:, coords], self.lam, self.drift,
                          self.speed, self.kind, dict(self.meta), dict(self.extras), self.status)


class _Recorder:
    def __init__(self, kind, meta):
        self.rows = []
        self.kind = kind
        self.meta = meta

    def add(self, s, x, v, lam, drift, speed):
        self.rows.append((s, np.array(x, dtype=float), np.array(v, dtype=float), lam, drift, speed))

    def build(self, status="ok", extras=None):
        d = len(self.rows[0][1]) if self.rows else 0
        col = lambda k: np.array([r[k] for r in self.rows], dtype=float)
        x = np.array([r[1] for r in self.rows]).reshape(len(self.rows), d)
        v = np.array([r[2] for r in self.rows]).reshape(len(self.rows), d)
        return Trajectory(col(0), x, v, col(3), col(4), col(5), self.kind, self.meta,
                          extras or {}, status)


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def speed_of(metric, v):
    return math.sqrt(abs(float(v @ (metric.g * v))))


def normal_curve_rhs(spec, metric, x, v):
    """``a^i = -eps N^i H_jk v^j v^k`` (``eps = g(N, N)``, +1 for Euclidean)."""
    N_cov, N_vec, J, _, eps = unit_split(spec, metric, np.asarray(x, dtype=float))
    v = np.asarray(v, dtype=float)
    return -eps * float(v @ J @ v) * N_vec


def constrained_geodesic_rhs(spec, metric, x, v, lam):
    """Geodesic equation with the multiplier closed by constraint consistency.

    ``a^i = -(dlam/ds) N^i - lam g^ij W_jk v^k`` and
    ``dlam/ds = eps (H(v, v) - lam W(N, v))``. With ``W = 0`` this is
    ``dlam/ds = H(v, v)`` and the curve is a normal curve.

    Returns ``(a, dlam)``.
    """
    N_cov, N_vec, J, _, eps = unit_split(spec, metric, np.asarray(x, dtype=float))
    v = np.asarray(v, dtype=float)
    W = J - J.T
    Wv = W @ v
    dlam = eps * (float(v @ J @ v) - lam * float(N_vec @ Wv))
    a = -dlam * N_vec - lam * (metric.ginv * Wv)
    return a, dlam


def _drift(spec, metric, x, v):
    N_cov = unit_split(spec, metric, x)[0]
    return abs(float(N_cov @ v))


def _project(spec, metric, x, v, target_speed):
    N_cov, N_vec, _, _, eps = unit_split(spec, metric, x)
    vt = v - eps * float(N_cov @ v) * N_vec
    sp = speed_of(metric, vt)
    if sp > 0 and target_speed > 0:
        vt = vt * (target_speed / sp)
    return vt


def integrate(spec, metric, kind, state0, settings):
    """Integrate a normal curve or constrained geodesic from ``state0``.

    ``state0`` is a ``TrajectoryState`` or a mapping with keys ``x``, ``v`` and
    optionally ``lam``. Raises ``NumericalBlowup`` or ``NullNormal`` with the
    partial trajectory attached as ``exc.trajectory``.
    """
    if kind not in ("normal_curve", "geodesic"):
        raise ConfigError(f"unknown curve kind {kind!r}", "integrate.kind")
    if isinstance(state0, TrajectoryState):
        x0, v0, lam0 = state0.x, state0.v, state0.lam
    else:
        x0, v0, lam0 = state0["x"], state0["v"], state0.get("lam", 0.0)
    d = spec.dim
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    if x.shape != (d,):
        raise ConfigError(f"x0 must have {d} components", "integrate.x0")
    if v.shape != (d,):
        raise ConfigError(f"v0 must have {d} components", "integrate.v0")
    lam = float(lam0)
    if settings.velocity_projection:
        v = _project(spec, metric, x, v, speed_of(metric, v))
    drift0 = _drift(spec, metric, x, v)
    if drift0 >= INITIAL_DRIFT_TOL:
        raise ConstraintViolation(f"initial velocity violates N(v) = 0 (drift {drift0:.3e})")
    if settings.renormalize_speed:
        sp = speed_of(metric, v)
        if sp == 0:
            raise ConstraintViolation("initial velocity is null")
        v = v / sp
    target = speed_of(metric, v)

    if kind == "normal_curve":
        def f(y):
            xx, vv = y[:d], y[d:2 * d]
            return np.concatenate([vv, normal_curve_rhs(spec, metric, xx, vv), [0.0]])
    else:
        def f(y):
            xx, vv = y[:d], y[d:2 * d]
            a, dl = constrained_geodesic_rhs(spec, metric, xx, vv, y[2 * d])
            return np.concatenate([vv, a, [dl]])

    meta = {"kind": kind, "method": settings.method, "step": settings.step, "steps": settings.steps,
            "velocity_projection": settings.velocity_projection,
            "renormalize_speed": settings.renormalize_speed}
    rec = _Recorder(kind, meta)
    y = np.concatenate([x, v, [lam]])
    rec.add(0.0, x, v, lam, _drift(spec, metric, x, v), speed_of(metric, v))
    h = settings.step
    for n in range(1, settings.steps + 1):
        try:
            y = rk4_step(f, y, h)
            if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP:
                raise NumericalBlowup(f"state exceeded {BLOWUP:g} at step {n}", sample=n)
            if settings.velocity_projection:
                y[d:2 * d] = _project(spec, metric, y[:d], y[d:2 * d], target)
            drift = _drift(spec, metric, y[:d], y[d:2 * d])
        except NumericalError as exc:
            exc.trajectory = rec.build(status=type(exc).__name__)
            exc.sample = n
            raise
        rec.add(n * h, y[:d], y[d:2 * d], float(y[2 * d]), drift, speed_of(metric, y[d:2 * d]))
    return rec.build()


# ---------------------------------------------------------------------------
# lines of curvature


def _principal_direction(spec, metric, x, index, prev, gap_tol):
    geom = differential_split(spec, metric, x)
    frame = adapted_frame(geom)
    Hb = second_fundamental_restricted(geom, frame)
    sig = frame.signature
    if np.all(sig > 0):
        k, vecs = np.linalg.eigh(Hb)
    else:
        k, vecs = np.linalg.eig(Hb * sig[:, None])
        if np.max(np.abs(k.imag)) > 0:
            raise EigenvalueCollision("complex principal curvatures", point=list(x))
        order = np.argsort(k.real)
        k, vecs = k.real[order], vecs.real[:, order]
    if not 0 <= index < len(k):
        raise ConfigError(f"eigen_index must be in [0, {len(k) - 1}]", "integrate.eigen_index")
    scale = max(1.0, float(np.max(np.abs(k))))
    others = np.delete(k, index)
    gap = float(np.min(np.abs(others - k[index]))) if others.size else math.inf
    if gap < gap_tol * scale:
        raise EigenvalueCollision(f"principal curvature {index} is not simple (gap {gap:.3e})",
                                  point=[float(v) for v in x])
    e = frame.tangent_basis.T @ vecs[:, index]
    e = e / speed_of(metric, e)
    if prev is None:
        if e[int(np.argmax(np.abs(e)))] < 0:
            e = -e
    elif float(e @ prev) < 0:
        e = -e
    return e, float(k[index])


def line_of_curvature_integrate(spec, metric, x0, eigen_index, settings, gap_tol=1e-6):
    """Follow the unit principal direction ``eigen_index`` (ascending order).

    The ``lam`` column holds the followed principal curvature. At an
    umbilic or near-collision ``EigenvalueCollision`` is raised with the
    partial trajectory attached.
    """
    x = np.array(x0, dtype=float)
    meta = {"kind": "line_of_curvature", "method": settings.method, "step": settings.step,
            "steps": settings.steps, "eigen_index": int(eigen_index)}
    rec = _Recorder("line_of_curvature", meta)
    try:
        e, kappa = _principal_direction(spec, metric, x, eigen_index, None, gap_tol)
    except EigenvalueCollision as exc:
        rec.add(0.0, x, np.zeros_like(x), math.nan, 0.0, 0.0)
        exc.trajectory = rec.build(status="EigenvalueCollision")
        exc.sample = 0
        raise
    rec.add(0.0, x, e, kappa, _drift(spec, metric, x, e), speed_of(metric, e))
    h = settings.step
    for n in range(1, settings.steps + 1):
        try:
            prev = e
            k1, _ = _principal_direction(spec, metric, x, eigen_index, prev, gap_tol)
            k2, _ = _principal_direction(spec, metric, x + 0.5 * h * k1, eigen_index, k1, gap_tol)
            k3, _ = _principal_direction(spec, metric, x + 0.5 * h * k2, eigen_index, k2, gap_tol)
            k4, _ = _principal_direction(spec, metric, x + h * k3, eigen_index, k3, gap_tol)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if np.max(np.abs(x)) > BLOWUP:
                raise NumericalBlowup(f"state exceeded {BLOWUP:g} at step {n}", sample=n)
            e, kappa = _principal_direction(spec, metric, x, eigen_index, prev, gap_tol)
        except NumericalError as exc:
            exc.trajectory = rec.build(status=type(exc).__name__)
            exc.sample = n
            raise
        rec.add(n * h, x, e, kappa, _drift(spec, metric, x, e), speed_of(metric, e))
    return rec.build()


# ---------------------------------------------------------------------------
# kinematics


def _second_derivative(x, h):
    m = len(x)
    a = np.empty_like(x)
    a[1:-1] = (x[2:] - 2 * x[1:-1] + x[:-2]) / (h * h)
    if m >= 4:
        a[0] = (2 * x[0] - 5 * x[1] + 4 * x[2] - x[3]) / (h * h)
        a[-1] = (2 * x[-1] - 5 * x[-2] + 4 * x[-3] - x[-4]) / (h * h)
    else:
        a[0] = a[1]
        a[-1] = a[-2]
    return a


@dataclass
class Kinematics:
    speed: np.ndarray
    vdot: np.ndarray
    kappa: np.ndarray
    a_tangential: np.ndarray
    a_centripetal: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature_vector: np.ndarray
    residual: np.ndarray


def kinematics_decompose(traj, kappa_tol=1e-9, require_normal=True):
    """Split the sampled acceleration into ``vdot t + kappa v^2 n``.

    Velocity and acceleration come from centered differences of the sampled
    positions (second-order one-sided stencils at the ends); ``kappa`` is
    ``|dt/ds|`` from differencing the unit tangent, so the reported residual
    ``|a - vdot t - kappa v^2 n|`` measures the consistency of the two.
    """
    if len(traj) < 3:
        raise ValueError("kinematics needs at least 3 samples")
    s = np.asarray(traj.s, dtype=float)
    x = np.asarray(traj.x, dtype=float)
    ds = np.diff(s)
    uniform = np.allclose(ds, ds[0], rtol=1e-9, atol=0)
    vel = np.gradient(x, s, axis=0, edge_order=2)
    acc = _second_derivative(x, ds[0]) if uniform else np.gradient(vel, s, axis=0, edge_order=2)
    speed = np.linalg.norm(vel, axis=1)
    vdot = np.gradient(speed, s, edge_order=2)
    t = vel / speed[:, None]
    dt_ds = np.gradient(t, s, axis=0, edge_order=2) / speed[:, None]
    kappa = np.linalg.norm(dt_ds, axis=1)
    degenerate = kappa < kappa_tol
    if require_normal and np.any(degenerate):
        i = int(np.argmax(degenerate))
        raise DegenerateCurve(f"curvature vanishes at sample {i}; principal normal undefined", sample=i)
    with np.errstate(invalid="ignore", divide="ignore"):
        n = np.where(degenerate[:, None], 0.0, dt_ds / kappa[:, None])
    resid = np.linalg.norm(acc - vdot[:, None] * t - (kappa * speed**2)[:, None] * n, axis=1)
    return Kinematics(speed, vdot, kappa, vdot.copy(), -kappa * speed**2, t, n,
                      acc / (speed**2)[:, None], resid)


# ---------------------------------------------------------------------------
# normality


@dataclass
class NormalityResult:
    passed: np.ndarray
    residual: np.ndarray
    vdot: np.ndarray

    @property
    def is_normal(self):
        return bool(np.all(self.passed))


def normality_check(spec, metric, traj, tol=1e-6):
    """Per sample: ``|i_v varpi|`` in the adapted frame, and the speed derivative.

    A sample passes when both are below ``tol``; the trajectory is normal
    when every sample passes.
    """
    res = np.empty(len(traj))
    for i in range(len(traj)):
        geom = differential_split(spec, metric, traj.x[i])
        frame = adapted_frame(geom)
        varpi, _ = omega_decompose(geom, frame)
        t = frame.components(traj.v[i])
        res[i] = float(np.linalg.norm(t @ varpi))
    if len(traj) >= 3:
        vdot = np.gradient(np.asarray(traj.speed, dtype=float), traj.s, edge_order=2)
    else:
        vdot = np.zeros(len(traj))
    passed = (res < tol) & (np.abs(vdot) < tol)
    return NormalityResult(passed, res, vdot)
