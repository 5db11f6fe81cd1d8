"""Adapted frames, projectors, restricted fundamental forms and curvature spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateTangentMetric, SingularMetric
from .forms import FD_STEP, unit_covector

FRAME_TOL = 1e-12
EIGEN_ZERO = 1e-8

LABELS = ("elliptic", "hyperbolic", "parabolic", "umbilic", "flat", "indefinite-metric")


def tangent_projectors(geom):
    """Return ``(P_t, P_n)`` with ``[P_n]^i_j = eps N^i N_j`` and ``P_t = I - P_n``.

    ``eps = g(N, N)``; for a spacelike/Euclidean normal it is +1 and the
    normal projector is plain ``N (x) N``.
    """
    P_n = geom.eps * np.outer(geom.N_vec, geom.N_cov)
    return np.eye(geom.dim) - P_n, P_n


@dataclass(frozen=True)
class AdaptedFrame:
    x: np.ndarray
    tangent_basis: np.ndarray  # (n, dim): rows are e_a
    normal: np.ndarray
    coframe: np.ndarray  # (n, dim): rows are theta^a
    signature: np.ndarray  # g(e_a, e_a) = +-1
    pivots: tuple

    @property
    def n(self):
        return len(self.tangent_basis)

    def restricted_metric(self):
        return np.diag(self.signature)

    def components(self, v):
        """Frame coordinates ``theta^a(v)`` of a vector."""
        return self.coframe @ np.asarray(v, dtype=float)


def adapted_frame(geom, metric=None, order=None, tol=FRAME_TOL):
    """Orthonormal basis of the hyperplane ``N = 0`` by pivoted Gram-Schmidt.

    The candidates are the projected coordinate vectors ``P_t(d_i)``. At each
    step the remaining candidate with the largest ``|g(r, r)|`` after removing
    the already chosen directions is taken (ties to the lowest index). Passing
    ``order`` disables pivoting and takes candidates in that order instead,
    skipping any that are numerically dependent.
    """
    metric = geom.metric if metric is None else metric
    g = metric.g
    P_t, _ = tangent_projectors(geom)
    cand = [P_t[:, i].copy() for i in range(geom.dim)]
    n = geom.dim - 1
    scale = max(1.0, max(float(c @ c) for c in cand))
    basis, sig, pivots = [], [], []
    remaining = list(range(geom.dim)) if order is None else list(order)
    while len(basis) < n:
        resid = {}
        for i in remaining:
            r = cand[i].copy()
            for e, s in zip(basis, sig):
                r -= s * float(r @ (g * e)) * e
            resid[i] = r
        if order is None:
            pick = max(remaining, key=lambda i: (abs(float(resid[i] @ (g * resid[i]))), -i))
        else:
            pick = next((i for i in remaining
                         if abs(float(resid[i] @ (g * resid[i]))) >= tol * scale), remaining[0])
        r = resid[pick]
        q = float(r @ (g * r))
        if abs(q) < tol * scale:
            raise DegenerateTangentMetric(
                f"restricted metric is degenerate at pivot {len(basis)} (|g(v,v)| = {abs(q):.3e})",
                point=[float(v) for v in geom.x])
        basis.append(r / math.sqrt(abs(q)))
        sig.append(1.0 if q > 0 else -1.0)
        pivots.append(pick)
        remaining.remove(pick)
    E = np.array(basis)
    S = np.array(sig)
    coframe = S[:, None] * (E * g)
    return AdaptedFrame(geom.x, E, geom.N_vec, coframe, S, tuple(pivots))


def second_fundamental_restricted(geom, frame):
    """``Hbar_ab = H(e_a, e_b)``."""
    E = frame.tangent_basis
    Hb = E @ geom.H @ E.T
    return 0.5 * (Hb + Hb.T)


@dataclass
class CurvatureReport:
    x: list
    principal_curvatures: np.ndarray
    classification: str
    mean_curvature: float
    gaussian_curvature: float
    radii: list
    complex_spectrum: bool = False

    def to_dict(self):
        k = self.principal_curvatures
        if self.complex_spectrum:
            kappas = [[float(z.real), float(z.imag)] for z in k]
        else:
            kappas = [float(z) for z in np.real(k)]
        return {
            "x": [float(v) for v in self.x] if self.x is not None else None,
            "principal_curvatures": kappas,
            "complex_spectrum": self.complex_spectrum,
            "classification": self.classification,
            "mean_curvature": float(self.mean_curvature),
            "gaussian_curvature": float(self.gaussian_curvature),
            "radii": [float(r) for r in self.radii],
        }


def classify_spectrum(kappas, tol=EIGEN_ZERO):
    k = np.asarray(kappas, dtype=float)
    zero_tol = tol * max(1.0, float(np.max(np.abs(k))) if k.size else 0.0)
    zero = np.abs(k) < zero_tol
    if np.all(zero):
        return "flat"
    if k.size > 1 and float(np.max(k) - np.min(k)) < zero_tol:
        return "umbilic"
    if np.any(zero):
        return "parabolic"
    if np.all(k > 0) or np.all(k < 0):
        return "elliptic"
    return "hyperbolic"


def curvature_report(Hbar, restricted_metric, tol=EIGEN_ZERO, x=None):
    """Principal curvatures as eigenvalues of ``g^ac Hbar_cb``.

    Definite restricted metrics give a symmetric-definite pencil with a real
    spectrum. Indefinite ones may produce complex pairs, which are reported
    under the label ``"indefinite-metric"``.
    """
    Hbar = np.asarray(Hbar, dtype=float)
    g = np.asarray(restricted_metric, dtype=float)
    if g.ndim == 1:
        g = np.diag(g)
    try:
        cond = np.linalg.cond(g)
    except np.linalg.LinAlgError:
        cond = math.inf
    if not math.isfinite(cond) or cond > 1e14:
        raise SingularMetric("restricted metric is not invertible")
    w = np.linalg.eigvalsh(g)
    complex_spec = False
    if np.all(w > 0):
        k = scipy.linalg.eigh(Hbar, g, eigvals_only=True)
    elif np.all(w < 0):
        k = scipy.linalg.eigh(-Hbar, -g, eigvals_only=True)
    else:
        k = np.linalg.eigvals(np.linalg.solve(g, Hbar))
        rho = max(1.0, float(np.max(np.abs(k))))
        if np.max(np.abs(k.imag)) > tol * rho:
            complex_spec = True
            k = np.sort_complex(k)
        else:
            k = np.sort(k.real)
    if complex_spec:
        label = "indefinite-metric"
        mean = float(np.sum(k).real) / len(k)
        gauss = float(np.prod(k).real)
        radii = []
    else:
        k = np.asarray(k, dtype=float)
        label = classify_spectrum(k, tol)
        mean = float(np.sum(k)) / len(k)
        gauss = float(np.prod(k))
        zero_tol = tol * max(1.0, float(np.max(np.abs(k))))
        radii = [1.0 / v for v in k if abs(v) >= zero_tol]
    return CurvatureReport(None if x is None else list(x), k, label, mean, gauss, radii, complex_spec)


def point_curvature(geom, tol=EIGEN_ZERO, order=None):
    frame = adapted_frame(geom, order=order)
    Hb = second_fundamental_restricted(geom, frame)
    return curvature_report(Hb, frame.restricted_metric(), tol, x=geom.x)


@dataclass(frozen=True)
class NormalCurvature:
    value: float
    asymptotic: bool


def normal_curvature_of_direction(Hbar, t, tol=1e-12):
    """``kappa_n = -Hbar(t, t)``; ``t`` is asymptotic when ``Hbar(t, t)`` vanishes."""
    t = np.asarray(t, dtype=float)
    q = float(t @ np.asarray(Hbar) @ t)
    return NormalCurvature(-q, abs(q) < tol)


def asymptotic_directions(Hbar, tol=EIGEN_ZERO):
    """Unit null directions of a 2x2 indefinite quadratic form (orthonormal frame)."""
    Hbar = np.asarray(Hbar, dtype=float)
    if Hbar.shape != (2, 2):
        raise ValueError("closed-form asymptotic directions only for n = 2")
    a, b, c = Hbar[0, 0], Hbar[0, 1], Hbar[1, 1]
    disc = b * b - a * c
    scale = max(1.0, abs(a), abs(b), abs(c))
    if disc <= tol * scale * scale:
        return []
    # roots of a u^2 + 2 b u w + c w^2 = 0
    roots = ((-b + math.sqrt(disc)), (-b - math.sqrt(disc)))
    if a == 0 and c == 0:
        vecs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    elif abs(a) >= abs(c):
        vecs = [np.array([r / a, 1.0]) for r in roots]
    else:
        vecs = [np.array([1.0, r / c]) for r in roots]
    return [v / np.linalg.norm(v) for v in vecs]


def omega_decompose(geom, frame):
    """Split ``W`` into tangential ``varpi_ab`` and mixed ``eta_a``.

    ``varpi_ab = W(e_a, e_b)`` and ``eta_a = eps * W(e_a, N_vec)``, fixed so
    that ``W(u, v) = varpi(u_t, v_t) + eta(u_t) N(v) - eta(v_t) N(u)``.
    """
    E = frame.tangent_basis
    varpi = E @ geom.W @ E.T
    eta = geom.eps * (E @ geom.W @ geom.N_vec)
    return varpi, eta


def reconstruct_two_form(geom, frame, varpi, eta, u, v):
    """Evaluate ``W(u, v)`` from the decomposition (used to check it)."""
    ut, vt = frame.components(u), frame.components(v)
    Nu, Nv = float(geom.N_cov @ u), float(geom.N_cov @ v)
    return float(ut @ varpi @ vt + (eta @ ut) * Nv - (eta @ vt) * Nu)


def unit_divergence(spec, metric, x):
    """``div N = d_i N^i`` of the unit vector field, by central differences."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for i in range(spec.dim):
        h = FD_STEP * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        up = metric.ginv[i] * unit_covector(spec, metric, xp)[i]
        um = metric.ginv[i] * unit_covector(spec, metric, xm)[i]
        total += (up - um) / (xp[i] - xm[i])
    return total
