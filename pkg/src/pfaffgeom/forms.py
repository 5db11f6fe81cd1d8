"""Covector fields, metric duality and exterior algebra on R^(n+1).

Conventions used throughout the package:

* ``J[i, j] = d_i N_j`` is the Jacobian of the *unit-normalized* covector field.
* A 2-form is stored as the antisymmetric matrix ``W`` with
  ``form = 1/2 W_ij dx^i ^ dx^j``, so ``W_ij = d_i N_j - d_j N_i``.
  The half-convention coefficient of ``d^N`` is ``W / 2``.
* ``H = (J + J^T) / 2`` is the symmetric part of ``dN``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DegreeError, NullNormal, ZeroForm

MAX_DIM = 6
FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)
NULL_TOL = 1e-12


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class MetricSpec:
    """Constant diagonal metric with its exact inverse."""

    dim: int
    diag: tuple
    inverse_diag: tuple
    name: str = "custom"

    def __post_init__(self):
        if not 2 <= self.dim <= MAX_DIM:
            raise ConfigError(f"dimension must be in [2, {MAX_DIM}], got {self.dim}", "space.dimension")
        if len(self.diag) != self.dim or len(self.inverse_diag) != self.dim:
            raise ConfigError("metric diagonal length must equal dimension", "space.metric")
        for d, di in zip(self.diag, self.inverse_diag):
            if d == 0 or not math.isfinite(d):
                raise ConfigError("metric diagonal entries must be nonzero and finite", "space.metric")
            if d * di != 1.0:
                raise ConfigError(f"diagonal entry {d!r} has no exact floating-point inverse", "space.metric")

    @classmethod
    def from_diag(cls, diag, name="custom"):
        diag = tuple(float(d) for d in diag)
        for d in diag:
            if d == 0:
                raise ConfigError("metric diagonal entries must be nonzero", "space.metric")
        return cls(len(diag), diag, tuple(1.0 / d for d in diag), name)

    @classmethod
    def preset(cls, name, dim):
        if name == "euclidean":
            return cls.from_diag([1.0] * dim, name)
        if name == "minkowski":
            if dim != 4:
                raise ConfigError("preset 'minkowski' requires dimension 4", "space.metric")
            return cls.from_diag([1.0, -1.0, -1.0, -1.0], name)
        if name == "bundle5":
            if dim != 5:
                raise ConfigError("preset 'bundle5' requires dimension 5", "space.metric")
            return cls.from_diag([1.0, -1.0, -1.0, -1.0, 1.0], name)
        raise ConfigError(f"unknown metric preset {name!r}", "space.metric")

    @property
    def g(self):
        return np.asarray(self.diag, dtype=float)

    @property
    def ginv(self):
        return np.asarray(self.inverse_diag, dtype=float)

    def inner(self, u, v):
        return float(np.dot(np.asarray(u) * self.g, v))

    def raise_index(self, covector):
        return self.ginv * np.asarray(covector, dtype=float)

    def lower_index(self, vector):
        return self.g * np.asarray(vector, dtype=float)


# ---------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Sparse real polynomial in ``dim`` variables.

    Terms are stored as a coefficient vector and an integer exponent matrix.
    Duplicate monomials are merged and zero coefficients dropped, so two
    equal polynomials have equal term tables.
    """

    __slots__ = ("dim", "coeffs", "exponents")

    def __init__(self, dim, coeffs=(), exponents=()):
        merged = {}
        for c, e in zip(coeffs, exponents):
            e = tuple(int(k) for k in e)
            if len(e) != dim:
                raise ConfigError(f"exponent multi-index {list(e)} does not have length {dim}")
            if any(k < 0 for k in e):
                raise ConfigError(f"negative exponent in {list(e)}")
            merged[e] = merged.get(e, 0.0) + float(c)
        items = sorted((e, c) for e, c in merged.items() if c != 0.0)
        self.dim = dim
        self.coeffs = np.array([c for _, c in items], dtype=float)
        self.exponents = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), dim)

    @classmethod
    def from_terms(cls, dim, terms):
        """Build from ``[{"coeff": c, "exponents": [...]}, ...]``."""
        coeffs, exps = [], []
        for t in terms:
            coeffs.append(t["coeff"])
            exps.append(t["exponents"])
        return cls(dim, coeffs, exps)

    @classmethod
    def constant(cls, dim, c):
        return cls(dim, [c], [[0] * dim])

    @classmethod
    def variable(cls, dim, i, c=1.0):
        e = [0] * dim
        e[i] = 1
        return cls(dim, [c], [e])

    def terms(self):
        return [{"coeff": float(c), "exponents": [int(k) for k in e]}
                for c, e in zip(self.coeffs, self.exponents)]

    def __call__(self, x):
        if len(self.coeffs) == 0:
            return 0.0
        x = np.asarray(x, dtype=float)
        return float(self.coeffs @ np.prod(np.power(x, self.exponents), axis=1))

    def deriv(self, i):
        mask = self.exponents[:, i] > 0
        exps = self.exponents[mask].copy()
        coeffs = self.coeffs[mask] * exps[:, i]
        exps[:, i] -= 1
        return Polynomial(self.dim, coeffs, exps)

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.dim, other)
        return Polynomial(self.dim, np.concatenate([self.coeffs, other.coeffs]),
                          np.concatenate([self.exponents, other.exponents]))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dim, -self.coeffs, self.exponents)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(self.dim, self.coeffs * float(other), self.exponents)
        coeffs, exps = [], []
        for c1, e1 in zip(self.coeffs, self.exponents):
            for c2, e2 in zip(other.coeffs, other.exponents):
                coeffs.append(c1 * c2)
                exps.append(e1 + e2)
        return Polynomial(self.dim, coeffs, exps)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and self.dim == other.dim
                and np.array_equal(self.coeffs, other.coeffs)
                and np.array_equal(self.exponents, other.exponents))

    def __hash__(self):
        return hash((self.dim, self.coeffs.tobytes(), self.exponents.tobytes()))

    def lift(self, new_dim):
        """Same polynomial viewed in ``new_dim >= dim`` variables (extra ones unused)."""
        pad = np.zeros((len(self.coeffs), new_dim - self.dim), dtype=np.int64)
        return Polynomial(new_dim, self.coeffs, np.hstack([self.exponents, pad]))

    def __repr__(self):
        return f"Polynomial(dim={self.dim}, terms={self.terms()})"


# ---------------------------------------------------------------------------
# covector fields

CATALOG = ("exact_sphere", "linear", "integrating_factor", "contact", "darboux_k", "em")


class _Compiled:
    """Monomial tables for evaluating all components and first derivatives at once."""

    def __init__(self, components):
        dim = len(components)
        derivs = [[components[j].deriv(i) for j in range(dim)] for i in range(dim)]
        rows = {}
        for p in list(components) + [q for row in derivs for q in row]:
            for e in p.exponents:
                rows.setdefault(tuple(e), len(rows))
        if not rows:
            rows[(0,) * dim] = 0
        self.exps = np.array(list(rows), dtype=np.int64).reshape(len(rows), dim)
        self.values = np.zeros((dim, len(rows)))
        self.derivs = np.zeros((dim, dim, len(rows)))
        for j, p in enumerate(components):
            for c, e in zip(p.coeffs, p.exponents):
                self.values[j, rows[tuple(e)]] += c
        for i in range(dim):
            for j in range(dim):
                for c, e in zip(derivs[i][j].coeffs, derivs[i][j].exponents):
                    self.derivs[i, j, rows[tuple(e)]] += c

    def monomials(self, x):
        return np.prod(np.power(x, self.exps), axis=1)


@dataclass(frozen=True)
class CovectorFieldSpec:
    """Declarative Pfaffian form ``N = N_i(x) dx^i`` with polynomial components.

    Catalog entries are expanded to polynomial tables at construction, so
    every field has closed-form derivatives. ``name`` and ``params`` record
    where the tables came from.
    """

    dim: int
    components: tuple
    name: str = "polynomial"
    params: dict = field(default_factory=dict, compare=False)
    _compiled: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 2 <= self.dim <= MAX_DIM:
            raise ConfigError(f"dimension must be in [2, {MAX_DIM}], got {self.dim}", "space.dimension")
        if len(self.components) != self.dim:
            raise ConfigError(f"expected {self.dim} components, got {len(self.components)}", "form")
        for p in self.components:
            if p.dim != self.dim:
                raise ConfigError("component polynomial dimension mismatch", "form")
        object.__setattr__(self, "_compiled", _Compiled(self.components))

    @classmethod
    def polynomial(cls, tables, dim=None):
        """From per-component term tables (list of lists of ``{coeff, exponents}``)."""
        dim = len(tables) if dim is None else dim
        if len(tables) != dim:
            raise ConfigError(f"expected {dim} component tables, got {len(tables)}", "form.polynomial")
        comps = tuple(Polynomial.from_terms(dim, t) for t in tables)
        return cls(dim, comps, "polynomial")

    @classmethod
    def catalog(cls, name, dim=None, **params):
        if name == "exact_sphere":
            dim = 3 if dim is None else dim
            comps = tuple(Polynomial.variable(dim, i) for i in range(dim))
        elif name == "linear":
            dim = 3 if dim is None else dim
            comps = tuple(Polynomial.constant(dim, 1.0 if i == dim - 1 else 0.0) for i in range(dim))
        elif name == "contact":
            if dim not in (None, 3):
                raise ConfigError("catalog form 'contact' requires dimension 3", "space.dimension")
            dim = 3
            comps = (Polynomial.variable(3, 1, -1.0), Polynomial(3), Polynomial.constant(3, 1.0))
        elif name == "darboux_k":
            k = int(params.get("k", 1))
            dim = 2 * k + 1 if dim is None else dim
            if k < 1 or dim < 2 * k + 1:
                raise ConfigError(f"darboux_k with k={k} needs dimension >= {2 * k + 1}", "form.params.k")
            comps = [Polynomial(dim) for _ in range(dim)]
            comps[0] = Polynomial.constant(dim, 1.0)
            for i in range(1, k + 1):
                # x^(2i) dx^(2i+1) in 1-based coordinates
                comps[2 * i] = Polynomial.variable(dim, 2 * i - 1)
            comps = tuple(comps)
            params = {"k": k}
        elif name == "integrating_factor":
            dim = 3 if dim is None else dim
            lam_terms = params.get("lambda")
            phi_terms = params.get("phi")
            lam = (Polynomial.from_terms(dim, lam_terms) if lam_terms is not None
                   else Polynomial.constant(dim, 1.0) + Polynomial(dim, [1.0], [[2] + [0] * (dim - 1)]))
            phi = (Polynomial.from_terms(dim, phi_terms) if phi_terms is not None
                   else Polynomial.variable(dim, dim - 1))
            comps = tuple(lam * phi.deriv(i) for i in range(dim))
            params = {"lambda": lam.terms(), "phi": phi.terms()}
        elif name == "em":
            from .em import FourPotentialSpec, build_bundle_form

            if dim not in (None, 5):
                raise ConfigError("catalog form 'em' requires dimension 5", "space.dimension")
            return build_bundle_form(FourPotentialSpec.from_dict(params))
        else:
            raise ConfigError(f"unknown catalog form {name!r}", "form.catalog")
        return cls(dim, comps, name, dict(params))

    def scaled(self, factor):
        return CovectorFieldSpec(self.dim, tuple(p * factor for p in self.components),
                                 self.name, dict(self.params))

    def tables(self):
        return [p.terms() for p in self.components]

    def evaluate(self, x):
        return self._compiled.values @ self._compiled.monomials(x)

    def raw_jacobian(self, x):
        """``Jraw[i, j] = d_i N_j`` of the unnormalized field."""
        return self._compiled.derivs @ self._compiled.monomials(x)

    def evaluate_with_jacobian(self, x):
        m = self._compiled.monomials(x)
        return self._compiled.values @ m, self._compiled.derivs @ m


def _check_point(spec, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ConfigError(f"point has {x.size} components, form has dimension {spec.dim}")
    return x


def eval_covector(spec, x):
    """Raw (unnormalized) components ``N_i(x)``."""
    return spec.evaluate(_check_point(spec, x))


def metric_dual_unit(N_raw, metric, tol=NULL_TOL):
    """Normalize a covector and raise its index.

    Returns ``(N_cov, N_vec, norm)`` with ``norm = sqrt(|g^ij N_i N_j|)``.
    Raises ``NullNormal`` when ``|g^ij N_i N_j|`` is below ``tol`` times the
    Euclidean square norm, and ``ZeroForm`` for the zero covector.
    """
    N_raw = np.asarray(N_raw, dtype=float)
    e2 = float(N_raw @ N_raw)
    if e2 == 0.0 or not math.isfinite(e2):
        raise ZeroForm("covector vanishes")
    q = float(N_raw @ (metric.ginv * N_raw))
    if abs(q) < tol * e2:
        raise NullNormal(f"g(N, N) = {q:.3e} is null")
    norm = math.sqrt(abs(q))
    N_cov = N_raw / norm
    return N_cov, metric.ginv * N_cov, norm


# ---------------------------------------------------------------------------
# point geometry


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointGeometry:
    """Unit normal and the polarized differential of the unit field at ``x``.

    ``eps`` is ``g(N_vec, N_vec)`` (+1 or -1); ``norm`` is the length of the
    raw covector before normalization.
    """

    x: np.ndarray
    N_cov: np.ndarray
    N_vec: np.ndarray
    J: np.ndarray
    H: np.ndarray
    W: np.ndarray
    norm: float
    eps: float
    metric: MetricSpec

    @property
    def dim(self):
        return len(self.x)


def unit_split(spec, metric, x, tol=NULL_TOL):
    """Fast path: ``(N_cov, N_vec, J, norm, eps)`` of the unit field, analytic derivatives.

    The quotient rule is applied to the polynomial derivatives::

        d_i n_j = d_i N_j / r - N_j d_i r / r^2,   d_i r = sgn(q) g^kl N_k d_i N_l / r
    """
    N, Jraw = spec.evaluate_with_jacobian(x)
    N_cov, N_vec, r = metric_dual_unit(N, metric, tol)
    eps = 1.0 if float(N @ (metric.ginv * N)) > 0 else -1.0
    dr = eps * (Jraw @ (metric.ginv * N)) / r
    J = Jraw / r - np.outer(dr, N) / (r * r)
    return N_cov, N_vec, J, r, eps


def unit_covector(spec, metric, x, tol=NULL_TOL):
    N = spec.evaluate(x)
    return metric_dual_unit(N, metric, tol)[0]


def fd_jacobian(spec, metric, x, tol=NULL_TOL):
    """Central differences of the normalized field, step cbrt(eps) * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    J = np.empty((spec.dim, spec.dim))
    for i in range(spec.dim):
        h = FD_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        J[i] = (unit_covector(spec, metric, xp, tol) - unit_covector(spec, metric, xm, tol)) / (xp[i] - xm[i])
    return J


def differential_split(spec, metric, x, mode="analytic", tol=NULL_TOL):
    """Polarize ``dN`` of the unit field into symmetric ``H`` and antisymmetric ``W``.

    Parameters
    ----------
    spec : CovectorFieldSpec
    metric : MetricSpec
    x : array_like
        Evaluation point.
    mode : {"analytic", "finite_diff"}
        Derivative route. Both differentiate the unit-normalized field.

    Returns
    -------
    PointGeometry
    """
    x = _check_point(spec, x)
    if metric.dim != spec.dim:
        raise ConfigError(f"metric dimension {metric.dim} != form dimension {spec.dim}")
    N_cov, N_vec, J, r, eps = unit_split(spec, metric, x, tol)
    if mode == "finite_diff":
        J = fd_jacobian(spec, metric, x, tol)
    elif mode != "analytic":
        raise ConfigError(f"unknown differentiation mode {mode!r}")
    H = 0.5 * (J + J.T)
    W = J - J.T
    return PointGeometry(_frozen(x), _frozen(N_cov), _frozen(N_vec), _frozen(J),
                         _frozen(H), _frozen(W), float(r), eps, metric)


# ---------------------------------------------------------------------------
# alternating tensors


@lru_cache(maxsize=None)
def _index(dim, k):
    tuples = list(itertools.combinations(range(dim), k))
    return tuples, {t: n for n, t in enumerate(tuples)}


def _perm_sign(seq):
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(dim, p, q):
    out_tuples, _ = _index(dim, p + q)
    _, a_pos = _index(dim, p)
    _, b_pos = _index(dim, q)
    out_idx, a_idx, b_idx, signs = [], [], [], []
    for n, t in enumerate(out_tuples):
        for pick in itertools.combinations(range(p + q), p):
            a_t = tuple(t[i] for i in pick)
            b_t = tuple(t[i] for i in range(p + q) if i not in pick)
            out_idx.append(n)
            a_idx.append(a_pos[a_t])
            b_idx.append(b_pos[b_t])
            signs.append(_perm_sign(a_t + b_t))
    return (np.array(out_idx, dtype=np.int64), np.array(a_idx, dtype=np.int64),
            np.array(b_idx, dtype=np.int64), np.array(signs, dtype=float))


@dataclass(frozen=True)
class AltTensor:
    """Alternating k-form stored on canonical increasing index tuples."""

    dim: int
    degree: int
    components: np.ndarray

    def __post_init__(self):
        if not 1 <= self.degree <= self.dim:
            raise DegreeError(f"degree {self.degree} outside [1, {self.dim}]")
        comps = _frozen(self.components)
        if comps.shape != (math.comb(self.dim, self.degree),):
            raise DegreeError(f"expected {math.comb(self.dim, self.degree)} components, got {comps.shape}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, dim, degree):
        return cls(dim, degree, np.zeros(math.comb(dim, degree)))

    @classmethod
    def from_covector(cls, n):
        n = np.asarray(n, dtype=float)
        return cls(len(n), 1, n)

    @classmethod
    def from_matrix(cls, W):
        """2-form ``1/2 W_ij dx^i ^ dx^j`` from an antisymmetric matrix."""
        W = np.asarray(W, dtype=float)
        tuples, _ = _index(len(W), 2)
        return cls(len(W), 2, np.array([W[i, j] for i, j in tuples]))

    @property
    def tuples(self):
        return _index(self.dim, self.degree)[0]

    def component(self, idx):
        """Component on any index tuple, carrying the permutation sign."""
        if len(set(idx)) < len(idx):
            return 0.0
        canon = tuple(sorted(idx))
        return _perm_sign(idx) * float(self.components[_index(self.dim, self.degree)[1][canon]])

    def to_dense(self):
        out = np.zeros((self.dim,) * self.degree)
        for t, c in zip(self.tuples, self.components):
            for perm in itertools.permutations(range(self.degree)):
                out[tuple(t[i] for i in perm)] = _perm_sign(perm) * c
        return out

    def max_abs(self):
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0

    def norm(self):
        return float(np.linalg.norm(self.components))

    def __add__(self, other):
        return AltTensor(self.dim, self.degree, self.components + other.components)

    def __mul__(self, c):
        return AltTensor(self.dim, self.degree, self.components * float(c))

    __rmul__ = __mul__


def wedge_product(a, b):
    """Exterior product with ``dx^i ^ dx^j`` having component +1 on ``(i, j)``.

    If the total degree exceeds the dimension the result is the zero tensor
    of degree ``dim``.
    """
    if a.dim != b.dim:
        raise DegreeError(f"dimension mismatch {a.dim} vs {b.dim}")
    p, q = a.degree, b.degree
    if p + q > a.dim:
        return AltTensor.zero(a.dim, a.dim)
    out_idx, a_idx, b_idx, signs = _wedge_table(a.dim, p, q)
    out = np.zeros(math.comb(a.dim, p + q))
    np.add.at(out, out_idx, signs * a.components[a_idx] * b.components[b_idx])
    return AltTensor(a.dim, p + q, out)
