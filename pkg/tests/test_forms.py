import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfaffgeom.errors import ConfigError, DegreeError, NullNormal, ZeroForm
from pfaffgeom.forms import (
    AltTensor,
    CovectorFieldSpec,
    MetricSpec,
    Polynomial,
    differential_split,
    fd_jacobian,
    metric_dual_unit,
    wedge_product,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def vec(n):
    return st.lists(finite, min_size=n, max_size=n).map(np.array)


def form(dim, degree):
    return st.lists(finite, min_size=math.comb(dim, degree), max_size=math.comb(dim, degree)).map(
        lambda c: AltTensor(dim, degree, np.array(c)))


# --- metrics ---------------------------------------------------------------

def test_metric_presets():
    m = MetricSpec.preset("minkowski", 4)
    assert list(m.g) == [1.0, -1.0, -1.0, -1.0]
    assert MetricSpec.preset("bundle5", 5).dim == 5
    with pytest.raises(ConfigError):
        MetricSpec.preset("minkowski", 3)


def test_metric_rejects_zero_entry():
    with pytest.raises(ConfigError):
        MetricSpec.from_diag([1.0, 0.0, 1.0])


def test_raise_lower_roundtrip():
    m = MetricSpec.from_diag([1.0, -2.0, 0.5])
    v = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(m.raise_index(m.lower_index(v)), v)


# --- polynomials -----------------------------------------------------------

def test_polynomial_eval_and_derivative():
    p = Polynomial.from_terms(2, [{"coeff": 3.0, "exponents": [2, 1]}, {"coeff": -1.0, "exponents": [0, 0]}])
    assert p([2.0, 5.0]) == pytest.approx(59.0)
    assert p.deriv(0)([2.0, 5.0]) == pytest.approx(60.0)
    assert p.deriv(1)([2.0, 5.0]) == pytest.approx(12.0)


def test_polynomial_algebra():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    p = (x + y) * (x - y)
    assert p([3.0, 2.0]) == pytest.approx(5.0)
    assert p.lift(3)([3.0, 2.0, 7.0]) == pytest.approx(5.0)


# --- covector fields -------------------------------------------------------

def test_catalog_contact_components(contact):
    np.testing.assert_allclose(contact.evaluate(np.array([0.0, 0.7, 0.0])), [-0.7, 0.0, 1.0])


def test_catalog_unknown_name():
    with pytest.raises(ConfigError) as err:
        CovectorFieldSpec.catalog("nope")
    assert err.value.path == "form.catalog"


def test_darboux_needs_room():
    with pytest.raises(ConfigError):
        CovectorFieldSpec.catalog("darboux_k", 4, k=2)


def test_zero_form_raises(sphere, e3):
    with pytest.raises(ZeroForm):
        differential_split(sphere, e3, [0.0, 0.0, 0.0])


def test_null_normal_raises():
    mink = MetricSpec.preset("minkowski", 4)
    spec = CovectorFieldSpec.polynomial([[{"coeff": 1.0, "exponents": [0, 0, 0, 0]}],
                                         [{"coeff": 1.0, "exponents": [0, 0, 0, 0]}], [], []])
    with pytest.raises(NullNormal):
        differential_split(spec, mink, [0.0, 0.0, 0.0, 0.0])
    with pytest.raises(NullNormal):
        metric_dual_unit(np.array([1.0, 1.0, 0.0, 0.0]), mink)


def test_split_contact_origin(contact, e3):
    geom = differential_split(contact, e3, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(geom.N_cov, [0.0, 0.0, 1.0])
    assert geom.J[1, 0] == pytest.approx(-1.0)
    assert geom.H[0, 1] == pytest.approx(-0.5)
    assert geom.W[0, 1] == pytest.approx(1.0)


def test_split_arrays_are_read_only(sphere, e3):
    geom = differential_split(sphere, e3, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        geom.H[0, 0] = 1.0


def test_split_reconstruction(sphere, e3, rng):
    for x in rng.uniform(-2, 2, size=(20, 3)):
        g = differential_split(sphere, e3, x)
        # H + W/2 == J up to rounding of the averaging
        np.testing.assert_allclose(g.H + 0.5 * g.W, g.J, rtol=0, atol=4 * np.finfo(float).eps * max(1, np.abs(g.J).max()))
        np.testing.assert_array_equal(g.H, g.H.T)
        np.testing.assert_array_equal(g.W, -g.W.T)


def test_unit_normalization(contact, e3, rng):
    for x in rng.uniform(-2, 2, size=(10, 3)):
        g = differential_split(contact, e3, x)
        assert e3.inner(g.N_vec, g.N_vec) == pytest.approx(1.0, abs=1e-14)
        # J N^ = 0 for a unit field
        np.testing.assert_allclose(g.J @ g.N_vec, 0.0, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(vec(3), st.floats(0.1, 10.0))
def test_scaling_invariance(x, c):
    e3 = MetricSpec.preset("euclidean", 3)
    spec = CovectorFieldSpec.catalog("contact")
    a = differential_split(spec, e3, x)
    b = differential_split(spec.scaled(c), e3, x)
    np.testing.assert_allclose(a.N_cov, b.N_cov, atol=1e-13)
    np.testing.assert_allclose(a.J, b.J, atol=1e-12)


def test_fd_matches_analytic(rng):
    e5 = MetricSpec.preset("euclidean", 5)
    spec = CovectorFieldSpec.catalog("darboux_k", 5, k=2)
    for x in rng.uniform(-1, 1, size=(10, 5)):
        Ja = differential_split(spec, e5, x).J
        np.testing.assert_allclose(fd_jacobian(spec, e5, x), Ja, atol=1e-8)


# --- alternating tensors ---------------------------------------------------

def test_alt_tensor_component_sign():
    t = AltTensor.from_matrix(np.array([[0, 2.0, 0], [-2.0, 0, 0], [0, 0, 0]]))
    assert t.component((0, 1)) == 2.0
    assert t.component((1, 0)) == -2.0
    assert t.component((1, 1)) == 0.0


def test_alt_tensor_bad_degree():
    with pytest.raises(DegreeError):
        AltTensor.zero(3, 4)


def test_dx_wedge_dy():
    e = np.eye(3)
    t = wedge_product(AltTensor.from_covector(e[0]), AltTensor.from_covector(e[1]))
    assert t.component((0, 1)) == 1.0


def test_self_wedge_of_two_form_in_4d():
    F = np.zeros((4, 4))
    vals = {(0, 1): 1.0, (0, 2): 2.0, (0, 3): 3.0, (1, 2): 4.0, (1, 3): 5.0, (2, 3): 6.0}
    for (i, j), v in vals.items():
        F[i, j], F[j, i] = v, -v
    ff = wedge_product(AltTensor.from_matrix(F), AltTensor.from_matrix(F))
    assert ff.component((0, 1, 2, 3)) == pytest.approx(2 * (1 * 6 - 2 * 5 + 3 * 4))


def test_wedge_overflow_is_zero():
    a = AltTensor.from_covector(np.ones(3))
    b = AltTensor.zero(3, 3)
    out = wedge_product(a, b)
    assert out.degree == 3 and out.max_abs() == 0.0


@settings(max_examples=40, deadline=None)
@given(form(4, 1), form(4, 1), form(4, 2), finite)
def test_wedge_bilinear(a, b, c, s):
    lhs = wedge_product(a * s + b, c)
    rhs = wedge_product(a, c) * s + wedge_product(b, c)
    np.testing.assert_allclose(lhs.components, rhs.components, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(form(5, 1), form(5, 2), form(5, 1))
def test_wedge_graded_commutative(a, b, c):
    # a^b = (-1)^(pq) b^a
    np.testing.assert_allclose(wedge_product(a, b).components, wedge_product(b, a).components, atol=1e-9)
    np.testing.assert_allclose(wedge_product(a, c).components, -wedge_product(c, a).components, atol=1e-9)
    assert wedge_product(a, a).max_abs() == 0.0


@settings(max_examples=30, deadline=None)
@given(form(5, 1), form(5, 2), form(5, 1))
def test_wedge_associative(a, b, c):
    lhs = wedge_product(wedge_product(a, b), c)
    rhs = wedge_product(a, wedge_product(b, c))
    np.testing.assert_allclose(lhs.components, rhs.components, atol=1e-8)


def test_dense_roundtrip():
    W = np.array([[0, 1.0, -2.0], [-1.0, 0, 3.0], [2.0, -3.0, 0]])
    np.testing.assert_array_equal(AltTensor.from_matrix(W).to_dense(), W)
