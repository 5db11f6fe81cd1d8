"""Built-in acceptance suite, shared by ``pfaffgeom --task verify`` and the tests.

Each criterion returns a JSON-serializable dict with its measured values,
the tolerance it was held to, and a ``passed`` flag. Nothing here depends on
wall-clock time, so the report is reproducible byte for byte.
"""

from __future__ import annotations

import json
import math
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from . import curves, em, geometry, pfaff
from .forms import CovectorFieldSpec, MetricSpec, differential_split, fd_jacobian

E3 = MetricSpec.preset("euclidean", 3)


def _result(cid, name, passed, **measured):
    return {"id": cid, "name": name, "passed": bool(passed), "measured": measured}


def scenario_names():
    root = resources.files("pfaffgeom") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(name):
    root = resources.files("pfaffgeom") / "scenarios"
    return json.loads((root / name).read_text())


def _grid125(center):
    return pfaff.Grid.make(center, 0.5, 5)


def criterion_1():
    """Frobenius 3-form vanishes for exact/integrable forms, equals 1 for contact."""
    worst = {}
    for name, center in (("exact_sphere", (1.0, 1.0, 1.0)), ("linear", (0.0, 0.0, 0.0)),
                         ("integrating_factor", (0.0, 0.0, 0.0))):
        spec = CovectorFieldSpec.catalog(name, 3)
        worst[name] = max(pfaff.frobenius_three_form(differential_split(spec, E3, p)).norm()
                          for p in _grid125(center).points())
    contact = CovectorFieldSpec.catalog("contact")
    comps = [pfaff.frobenius_three_form(differential_split(contact, E3, p), raw=True).components[0]
             for p in _grid125((0.0, 0.0, 0.0)).points()]
    dev = max(abs(c - 1.0) for c in comps)
    ok = all(v < 1e-10 for v in worst.values()) and dev <= 1e-10 and len(comps) == 125
    return _result(1, "Frobenius classification", ok, max_norm=worst, contact_max_deviation=dev,
                   tolerance=1e-10)


def criterion_2():
    """Sphere of radius 2: umbilic with curvatures 1/2, and n * mean = div N."""
    spec = CovectorFieldSpec.catalog("exact_sphere")
    pts = [np.array([0.0, 0.0, 2.0]), 2.0 * np.array([1.0, -2.0, 2.0]) / 3.0]
    err_a = err_fd = err_div = 0.0
    labels = []
    for p in pts:
        for mode in ("analytic", "finite_diff"):
            rep = geometry.point_curvature(differential_split(spec, E3, p, mode))
            err = float(np.max(np.abs(rep.principal_curvatures - 0.5)))
            if mode == "analytic":
                err_a = max(err_a, err)
                labels.append(rep.classification)
                div = geometry.unit_divergence(spec, E3, p)
                err_div = max(err_div, abs(2 * rep.mean_curvature - div))
            else:
                err_fd = max(err_fd, err)
    ok = err_a < 1e-8 and err_fd < 1e-5 and all(l == "umbilic" for l in labels) and err_div < 1e-6
    return _result(2, "Sphere curvature oracle", ok, analytic_error=err_a, fd_error=err_fd,
                   labels=labels, divergence_error=err_div,
                   tolerance={"analytic": 1e-8, "finite_diff": 1e-5, "divergence": 1e-6})


def criterion_3():
    """Level sets of a linear function are minimal; spheres are not."""
    lin = CovectorFieldSpec.catalog(
        "integrating_factor", 3, **{"lambda": [{"coeff": 1.0, "exponents": [0, 0, 0]}],
                                    "phi": [{"coeff": 1.0, "exponents": [1, 0, 0]},
                                            {"coeff": 2.0, "exponents": [0, 1, 0]},
                                            {"coeff": -0.5, "exponents": [0, 0, 1]}]})
    rng = np.random.default_rng(3)
    lin_mean = max(abs(geometry.point_curvature(differential_split(lin, E3, p)).mean_curvature)
                   for p in rng.uniform(-2, 2, size=(10, 3)))
    sphere = CovectorFieldSpec.catalog("exact_sphere")
    sph_mean = geometry.point_curvature(differential_split(sphere, E3, [0.0, 2.0, 0.0])).mean_curvature
    ok = lin_mean < 1e-10 and abs(sph_mean - 0.5) < 1e-6
    return _result(3, "Minimal iff harmonic", ok, linear_max_abs_mean=lin_mean, sphere_mean=sph_mean,
                   tolerance={"linear": 1e-10, "sphere": 1e-6})


def criterion_4():
    """On the sphere, constrained geodesics and normal curves coincide."""
    spec = CovectorFieldSpec.catalog("exact_sphere")
    start = {"x": [1.0, 0.0, 0.0], "v": [0.0, 1.0, 0.0], "lam": 0.0}
    quarter = curves.IntegratorSettings(1e-3, 1571)
    a = curves.integrate(spec, E3, "normal_curve", start, quarter)
    b = curves.integrate(spec, E3, "geodesic", start, quarter)
    dist = em.trajectory_compare(a, b)["max_pointwise_distance"]
    half = curves.integrate(spec, E3, "normal_curve", start, curves.IntegratorSettings(math.pi / 3142, 3142))
    end_err = float(np.linalg.norm(half.x[-1] - np.array([-1.0, 0.0, 0.0])))
    ok = dist < 1e-6 and end_err < 1e-5
    return _result(4, "Geodesic equals normal curve (integrable case)", ok, max_distance=dist,
                   half_circle_endpoint_error=end_err, tolerance={"distance": 1e-6, "endpoint": 1e-5})


def criterion_5():
    """Contact-form geodesics stay in the distribution but are not normal curves."""
    cfg = load_scenario("contact_geodesic.json")
    it = cfg["integrate"]
    spec = CovectorFieldSpec.catalog("contact")
    traj = curves.integrate(spec, E3, "geodesic", {"x": it["x0"], "v": it["v0"]},
                            curves.IntegratorSettings(it["step"], it["steps"]))
    nc = curves.normality_check(spec, E3, traj)
    res = float(np.max(nc.residual))
    drift = float(np.max(traj.drift))
    ok = res > 0.1 and drift < 1e-7 and not nc.is_normal
    return _result(5, "Non-integrable geodesics are not normal", ok, max_rotation_residual=res,
                   max_drift=drift, tolerance={"residual_min": 0.1, "drift": 1e-7})


def _scenario_form(raw):
    from .cli import parse_config

    return parse_config(raw)


def criterion_6():
    """Constraint drift on every shipped integration scenario."""
    rows = {}
    ok = True
    for name in scenario_names():
        raw = load_scenario(name)
        if raw.get("task") != "integrate":
            continue
        cfg = _scenario_form(raw)
        ic = cfg.integrate
        if ic.kind == "lorentz":
            continue  # no Pfaffian constraint in the direct Lorentz integrator
        if ic.steps > 10**4 or ic.step > 1e-3 + 1e-15:
            rows[name] = {"error": "scenario outside the drift budget"}
            ok = False
            continue
        try:
            if ic.kind == "em_geodesic":
                traj = em.constrained_geodesic_em(cfg.potential, ic.x0, ic.v0, ic.settings())
                d = float(np.max(traj.drift))
                rows[name] = {"unprojected": d, "projected": d}
            elif ic.kind == "line_of_curvature":
                traj = curves.line_of_curvature_integrate(cfg.form, cfg.metric, ic.x0, ic.eigen_index,
                                                          ic.settings())
                d = float(np.max(traj.drift))
                rows[name] = {"unprojected": d, "projected": d}
            else:
                out = {}
                for proj in (False, True):
                    st = curves.IntegratorSettings(ic.step, ic.steps, velocity_projection=proj)
                    traj = curves.integrate(cfg.form, cfg.metric, ic.kind,
                                            {"x": ic.x0, "v": ic.v0, "lam": ic.lambda0}, st)
                    out["projected" if proj else "unprojected"] = float(np.max(traj.drift))
                rows[name] = out
        except Exception as exc:  # numerical failure in a shipped scenario is a failed criterion
            rows[name] = {"error": f"{type(exc).__name__}: {exc}"}
            ok = False
            continue
        ok = ok and rows[name]["unprojected"] < 1e-7 and rows[name]["projected"] < 1e-12
    return _result(6, "Constraint preservation", ok, scenarios=rows,
                   tolerance={"unprojected": 1e-7, "projected": 1e-12})


def criterion_7():
    """Constrained geodesics of the bundle form reproduce the Lorentz force."""
    pot = em.FourPotentialSpec("uniform_B", {"B": 1.0}, q=1.0, m=1.0, c=1.0)
    v0 = em.four_velocity(0.01)
    st = curves.IntegratorSettings(1e-3, 10**4)
    lor = em.lorentz_integrate(pot, [0.0, 0.0, 0.0, 0.0], v0, st)
    geo = em.constrained_geodesic_em(pot, [0.0, 0.0, 0.0, 0.0], v0, st)
    dev = em.trajectory_compare(lor, geo.restrict(slice(0, 4)))["max_pointwise_distance"]
    radius = em.orbit_radius(lor)
    expected = em.cyclotron_radius(pot, 0.01)
    rel = abs(radius - expected) / expected
    eta_drift = max(float(np.max(np.abs(lor.extras["eta_vv"] - 1.0))),
                    float(np.max(np.abs(geo.extras["eta_vv"] - 1.0))))
    ok = dev < 1e-8 and rel < 1e-3 and eta_drift < 1e-9
    return _result(7, "Lorentz equivalence", ok, max_deviation=dev, orbit_radius=radius,
                   expected_radius=expected, radius_rel_error=rel, eta_drift=eta_drift,
                   tolerance={"deviation": 1e-8, "radius": 1e-3, "eta": 1e-9})


def criterion_8():
    """Integrability degrees of the bundle form."""
    grid = pfaff.Grid.make([0.1, 0.2, -0.1, 0.3], 0.4, 3)
    expected = {"pure_gauge": 4, "uniform_B": 3, "crossed_EB": 2}
    got = {}
    ok = True
    for kind, params in (("pure_gauge", {}), ("uniform_B", {"B": 1.0}), ("crossed_EB", {"E": 1.0, "B": 1.0})):
        rep = em.em_integrability_report(em.FourPotentialSpec(kind, params), grid)
        got[kind] = {"degree": rep.degree, "pfaff_degree": rep.pfaff_degree,
                     "agree": rep.agrees_with_pfaff, "gauge_flag": rep.gauge_flag}
        ok = ok and rep.degree == expected[kind] and rep.agrees_with_pfaff and \
            all(d == expected[kind] for d in rep.degrees) and rep.gauge_flag == (kind == "pure_gauge")
    return _result(8, "EM integrability degrees", ok, degrees=got, expected=expected)


def catalog_forms():
    """(label, spec, metric) for every catalog form."""
    return [
        ("exact_sphere", CovectorFieldSpec.catalog("exact_sphere"), E3),
        ("linear", CovectorFieldSpec.catalog("linear"), E3),
        ("integrating_factor", CovectorFieldSpec.catalog("integrating_factor"), E3),
        ("contact", CovectorFieldSpec.catalog("contact"), E3),
        ("darboux_2", CovectorFieldSpec.catalog("darboux_k", 5, k=2), MetricSpec.preset("euclidean", 5)),
        ("em_crossed_EB", em.build_bundle_form(em.FourPotentialSpec("crossed_EB", {"E": 1.0, "B": 1.0})),
         em.bundle_metric()),
    ]


def jacobian_agreement(spec, metric, points):
    worst = 0.0
    for p in points:
        Ja = differential_split(spec, metric, p).J
        Jf = fd_jacobian(spec, metric, p)
        worst = max(worst, float(np.max(np.abs(Ja - Jf) / np.maximum(1.0, np.abs(Ja)))))
    return worst


def sphere_endpoint_error(steps):
    spec = CovectorFieldSpec.catalog("exact_sphere")
    tr = curves.integrate(spec, E3, "normal_curve", {"x": [1.0, 0.0, 0.0], "v": [0.0, 1.0, 0.0]},
                          curves.IntegratorSettings(math.pi / steps, steps))
    return float(np.linalg.norm(tr.x[-1] - np.array([-1.0, 0.0, 0.0])))


def criterion_9():
    """Analytic vs finite-difference Jacobians; fourth-order RK4 convergence."""
    worst = {}
    for label, spec, metric in catalog_forms():
        pts = np.random.default_rng(9).uniform(-1.0, 1.0, size=(100, spec.dim))
        worst[label] = jacobian_agreement(spec, metric, pts)
    e1, e2 = sphere_endpoint_error(50), sphere_endpoint_error(100)
    ratio = e1 / e2
    ok = all(v < 1e-6 for v in worst.values()) and 12 <= ratio <= 20
    return _result(9, "Numerics hygiene", ok, jacobian_rel_error=worst, endpoint_errors=[e1, e2],
                   convergence_ratio=ratio, tolerance={"jacobian": 1e-6, "ratio": [12, 20]})


def criterion_10():
    """Identical configs give byte-identical artifacts."""
    from .cli import parse_config, run_task

    blobs = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            files = {}
            for name in ("contact_classify.json", "sphere_curvature.json", "sphere_normal_curve.json"):
                cfg = parse_config(load_scenario(name), name)
                run_task(cfg, tmp)
            for p in sorted(Path(tmp).iterdir()):
                files[p.name] = p.read_bytes()
            files["criteria"] = json.dumps([criterion_1(), criterion_8()], sort_keys=True).encode()
            blobs.append(files)
    same = blobs[0] == blobs[1]
    return _result(10, "Determinism", same and len(blobs[0]) >= 4, artifacts=sorted(blobs[0]))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10]


def run_all():
    return [c() for c in CRITERIA]
