import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfaffgeom.errors import SingularMetric
from pfaffgeom.forms import CovectorFieldSpec, MetricSpec, differential_split
from pfaffgeom.geometry import (
    adapted_frame,
    asymptotic_directions,
    classify_spectrum,
    curvature_report,
    normal_curvature_of_direction,
    omega_decompose,
    point_curvature,
    reconstruct_two_form,
    second_fundamental_restricted,
    tangent_projectors,
    unit_divergence,
)

coord = st.floats(-2, 2, allow_nan=False)
point3 = st.lists(coord, min_size=3, max_size=3).map(np.array)


def test_sphere_frame_at_pole(sphere, e3):
    geom = differential_split(sphere, e3, [0.0, 0.0, 2.0])
    frame = adapted_frame(geom)
    np.testing.assert_allclose(np.abs(frame.tangent_basis), [[1, 0, 0], [0, 1, 0]], atol=1e-15)
    rep = point_curvature(geom)
    np.testing.assert_allclose(rep.principal_curvatures, [0.5, 0.5], atol=1e-14)
    assert rep.classification == "umbilic"
    assert rep.gaussian_curvature == pytest.approx(0.25)
    np.testing.assert_allclose(rep.radii, [2.0, 2.0])


@settings(max_examples=40, deadline=None)
@given(point3)
def test_projector_algebra(x):
    e3 = MetricSpec.preset("euclidean", 3)
    spec = CovectorFieldSpec.catalog("contact")
    geom = differential_split(spec, e3, x)
    Pt, Pn = tangent_projectors(geom)
    np.testing.assert_allclose(Pt @ Pt, Pt, atol=1e-12)
    np.testing.assert_allclose(Pn @ Pn, Pn, atol=1e-12)
    np.testing.assert_allclose(Pt @ Pn, 0.0, atol=1e-12)
    np.testing.assert_allclose(Pt + Pn, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(geom.N_cov @ Pt, 0.0, atol=1e-12)


def test_projector_with_indefinite_metric():
    mink = MetricSpec.preset("minkowski", 4)
    spec = CovectorFieldSpec.polynomial([[{"coeff": 1.0, "exponents": [0, 0, 0, 0]}],
                                         [{"coeff": 0.3, "exponents": [0, 0, 0, 0]}], [], []])
    geom = differential_split(spec, mink, [0.0, 0.0, 0.0, 0.0])
    assert geom.eps == 1.0
    Pt, Pn = tangent_projectors(geom)
    np.testing.assert_allclose(Pn @ Pn, Pn, atol=1e-14)
    frame = adapted_frame(geom)
    assert sorted(frame.signature) == [-1.0, -1.0, -1.0]


@settings(max_examples=40, deadline=None)
@given(point3)
def test_frame_is_orthonormal_and_tangent(x):
    e3 = MetricSpec.preset("euclidean", 3)
    geom = differential_split(CovectorFieldSpec.catalog("contact"), e3, x)
    fr = adapted_frame(geom)
    E = fr.tangent_basis
    np.testing.assert_allclose(E @ E.T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(E @ geom.N_cov, 0.0, atol=1e-12)
    np.testing.assert_allclose(fr.coframe @ E.T, np.eye(2), atol=1e-12)


def test_frame_order_override(sphere, e3):
    geom = differential_split(sphere, e3, [1.0, 1.0, 1.0])
    assert adapted_frame(geom, order=[2, 1, 0]).pivots == (2, 1)


def test_nearly_null_normal_still_gives_frame():
    metric = MetricSpec.from_diag([1.0, -1.0])
    spec = CovectorFieldSpec.polynomial([[{"coeff": 1.0, "exponents": [0, 0]}],
                                         [{"coeff": 1.0 + 1e-9, "exponents": [0, 0]}]])
    geom = differential_split(spec, metric, [0.0, 0.0])
    frame = adapted_frame(geom)
    t = frame.tangent_basis[0]
    assert abs(geom.N_cov @ t) < 1e-9 * np.abs(geom.N_cov).max() * np.abs(t).max()
    assert metric.inner(t, t) == pytest.approx(1.0, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(point3, st.lists(coord, min_size=3, max_size=3), st.lists(coord, min_size=3, max_size=3))
def test_two_form_reconstruction(x, u, v):
    e3 = MetricSpec.preset("euclidean", 3)
    geom = differential_split(CovectorFieldSpec.catalog("contact"), e3, x)
    frame = adapted_frame(geom)
    varpi, eta = omega_decompose(geom, frame)
    u, v = np.array(u), np.array(v)
    assert reconstruct_two_form(geom, frame, varpi, eta, u, v) == pytest.approx(u @ geom.W @ v, abs=1e-10)


def test_two_form_reconstruction_darboux(rng):
    e5 = MetricSpec.preset("euclidean", 5)
    spec = CovectorFieldSpec.catalog("darboux_k", 5, k=2)
    for x in rng.uniform(-1, 1, size=(5, 5)):
        geom = differential_split(spec, e5, x)
        frame = adapted_frame(geom)
        varpi, eta = omega_decompose(geom, frame)
        u, v = rng.normal(size=5), rng.normal(size=5)
        assert reconstruct_two_form(geom, frame, varpi, eta, u, v) == pytest.approx(u @ geom.W @ v, abs=1e-12)


def test_darboux_one_has_axis_of_rotation(rng):
    e4 = MetricSpec.preset("euclidean", 4)
    spec = CovectorFieldSpec.catalog("darboux_k", 4, k=1)
    geom = differential_split(spec, e4, rng.uniform(-1, 1, 4))
    varpi, _ = omega_decompose(geom, adapted_frame(geom))
    s = np.linalg.svd(varpi, compute_uv=False)
    assert s[-1] < 1e-12 and s[0] > 0.1


def test_darboux_two_in_dim5_has_no_axis(rng):
    e5 = MetricSpec.preset("euclidean", 5)
    spec = CovectorFieldSpec.catalog("darboux_k", 5, k=2)
    geom = differential_split(spec, e5, rng.uniform(-1, 1, 5))
    varpi, _ = omega_decompose(geom, adapted_frame(geom))
    assert np.linalg.svd(varpi, compute_uv=False)[-1] > 1e-3


@pytest.mark.parametrize("k,label", [
    ([0.0, 0.0], "flat"),
    ([0.5, 0.5], "umbilic"),
    ([0.0, 1.0], "parabolic"),
    ([1.0, 2.0], "elliptic"),
    ([-1.0, -2.0], "elliptic"),
    ([-1.0, 2.0], "hyperbolic"),
    ([3.0], "elliptic"),
])
def test_classify_spectrum(k, label):
    assert classify_spectrum(k) == label


def test_curvature_report_singular_metric():
    with pytest.raises(SingularMetric):
        curvature_report(np.eye(2), np.diag([1.0, 0.0]))


def test_curvature_report_complex_spectrum():
    rep = curvature_report(np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0]))
    assert rep.classification == "indefinite-metric"
    assert rep.complex_spectrum
    assert rep.to_dict()["principal_curvatures"][0][1] != 0.0


def test_saddle_asymptotic_directions():
    Hb = np.diag([1.0, -1.0])
    dirs = asymptotic_directions(Hb)
    assert len(dirs) == 2
    for t in dirs:
        assert normal_curvature_of_direction(Hb, t).asymptotic
    assert asymptotic_directions(np.eye(2)) == []
    assert len(asymptotic_directions(np.array([[0.0, 1.0], [1.0, 0.0]]))) == 2


def test_normal_curvature_sign():
    assert normal_curvature_of_direction(np.eye(2), [1.0, 0.0]).value == -1.0


def test_divergence_matches_mean_curvature(sphere, e3, rng):
    for x in rng.uniform(-2, 2, size=(5, 3)):
        rep = point_curvature(differential_split(sphere, e3, x))
        assert 2 * rep.mean_curvature == pytest.approx(unit_divergence(sphere, e3, x), abs=1e-6)
        np.testing.assert_allclose(rep.principal_curvatures, 1 / np.linalg.norm(x), rtol=1e-12)


def test_restricted_form_is_symmetric(contact, e3):
    geom = differential_split(contact, e3, [0.2, -0.4, 1.0])
    Hb = second_fundamental_restricted(geom, adapted_frame(geom))
    np.testing.assert_array_equal(Hb, Hb.T)
