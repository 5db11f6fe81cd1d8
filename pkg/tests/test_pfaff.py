import numpy as np
import pytest

from pfaffgeom.errors import ConfigError, DegreeError
from pfaffgeom.forms import CovectorFieldSpec, MetricSpec, differential_split
from pfaffgeom.pfaff import (
    Grid,
    classify_region,
    frobenius_three_form,
    integrability_class_at_point,
    map_points,
    wedge_sequence,
)


def test_contact_frobenius_is_one_everywhere(contact, e3, rng):
    for x in rng.uniform(-3, 3, size=(20, 3)):
        g = differential_split(contact, e3, x)
        raw = frobenius_three_form(g, raw=True)
        assert raw.component((0, 1, 2)) == pytest.approx(1.0, abs=1e-12)
        unit = frobenius_three_form(g)
        assert unit.component((0, 1, 2)) == pytest.approx(1.0 / (1.0 + x[1] ** 2), abs=1e-12)


@pytest.mark.parametrize("name", ["exact_sphere", "linear", "integrating_factor"])
def test_integrable_forms_vanish(name, e3, rng):
    spec = CovectorFieldSpec.catalog(name)
    for x in rng.uniform(0.2, 2, size=(20, 3)):
        assert frobenius_three_form(differential_split(spec, e3, x)).norm() < 1e-12


def test_frobenius_needs_dim3():
    spec = CovectorFieldSpec.catalog("linear", 2)
    with pytest.raises(DegreeError):
        frobenius_three_form(differential_split(spec, MetricSpec.preset("euclidean", 2), [0.0, 1.0]))


def test_sequence_labels(e3, contact):
    labels = [label for label, _ in wedge_sequence(differential_split(contact, e3, [0.1, 0.2, 0.3]))]
    assert labels == ["dN", "N^dN"]
    e5 = MetricSpec.preset("euclidean", 5)
    spec = CovectorFieldSpec.catalog("darboux_k", 5, k=2)
    labels = [label for label, _ in wedge_sequence(differential_split(spec, e5, np.full(5, 0.1)))]
    assert labels == ["dN", "N^dN", "dN^2", "N^dN^2"]


@pytest.mark.parametrize("dim,k", [(3, 1), (4, 1), (5, 1), (5, 2)])
def test_darboux_degrees(dim, k, rng):
    metric = MetricSpec.preset("euclidean", dim)
    spec = CovectorFieldSpec.catalog("darboux_k", dim, k=k)
    for x in rng.uniform(-1, 1, size=(5, dim)):
        rep = integrability_class_at_point(spec, metric, x)
        assert rep.pair_count == k
        assert rep.degree_of_integrability == dim - 1 - k
        assert not rep.completely_integrable


def test_exact_is_completely_integrable(sphere, e3):
    rep = integrability_class_at_point(sphere, e3, [1.0, 2.0, 3.0])
    assert rep.completely_integrable and rep.degree_of_integrability == 2
    assert rep.to_dict()["pair_count"] == 0


def test_scaling_does_not_change_class(contact, e3):
    for c in (1e-3, 1.0, 1e3):
        assert integrability_class_at_point(contact.scaled(c), e3, [0.3, 0.4, 0.5]).pair_count == 1


def test_grid_order_and_limits():
    g = Grid.make([0.0, 0.0], 1.0, 3)
    pts = list(g.points())
    assert len(g) == 9
    np.testing.assert_allclose(pts[0], [-1.0, -1.0])
    np.testing.assert_allclose(pts[1], [-1.0, 0.0])
    with pytest.raises(ConfigError):
        Grid.make([0.0] * 6, 1.0, 11)


def test_region_histogram(contact, e3):
    rep = classify_region(contact, e3, Grid.make([0, 0, 0], 1.0, 3))
    assert rep.n_points == 27
    assert rep.to_dict()["histogram"] == {"1": 27}
    assert rep.majority_degree == 1
    assert rep.exceptional_points == []


def test_region_reports_singular_points(sphere, e3):
    rep = classify_region(sphere, e3, Grid.make([0, 0, 0], 1.0, 3))
    assert rep.n_points == 27
    assert len(rep.exceptional_points) == 1


def test_threaded_map_matches_serial(monkeypatch):
    pts = np.arange(20.0).reshape(10, 2)
    serial = map_points(lambda p: float(p.sum()), pts)
    monkeypatch.setenv("PFAFFGEOM_THREADS", "4")
    assert map_points(lambda p: float(p.sum()), pts) == serial
