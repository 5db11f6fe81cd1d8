"""JSON-configured command line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical or I/O failure
(diagnostic JSON on stderr), 3 verify-suite failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import curves, em, geometry, pfaff
from .errors import ConfigError, ConstraintViolation, NumericalError, PfaffGeomError
from .forms import CovectorFieldSpec, MetricSpec, differential_split

TASKS = ("classify", "curvature", "integrate", "verify")
CURVE_KINDS = ("normal_curve", "geodesic", "line_of_curvature")
EM_KINDS = ("lorentz", "em_geodesic")
DEFAULT_TOLERANCES = {"zero_form": 1e-9, "eigen_zero": 1e-8, "drift": 1e-7}


@dataclass
class IntegrateConfig:
    kind: str
    x0: list
    v0: list
    lambda0: float = 0.0
    step: float = 1e-3
    steps: int = 1000
    velocity_projection: bool = False
    renormalize_speed: bool = True
    eigen_index: int = 0
    max_span: float = curves.MAX_SPAN

    def settings(self):
        return curves.IntegratorSettings(self.step, self.steps, "rk4", self.velocity_projection,
                                         self.renormalize_speed, self.max_span)


@dataclass
class ScenarioConfig:
    dimension: int
    metric: MetricSpec | None
    task: str
    form: CovectorFieldSpec | None = None
    potential: em.FourPotentialSpec | None = None
    grid: pfaff.Grid | None = None
    integrate: IntegrateConfig | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output: dict = field(default_factory=dict)
    name: str = "scenario"


# ---------------------------------------------------------------------------
# loading


def _get(d, key, path, kind=None, required=True, default=None):
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path.rsplit(".", 1)[0] if "." in path else path)
    if key not in d:
        if required:
            raise ConfigError("missing required field", path)
        return default
    val = d[key]
    if kind is not None and not _is(val, kind):
        raise ConfigError(f"expected {kind}", path)
    return val


def _is(val, kind):
    if kind == "number":
        return isinstance(val, (int, float)) and not isinstance(val, bool) and math.isfinite(val)
    if kind == "integer":
        return isinstance(val, int) and not isinstance(val, bool)
    if kind == "string":
        return isinstance(val, str)
    if kind == "bool":
        return isinstance(val, bool)
    if kind == "object":
        return isinstance(val, dict)
    if kind == "list":
        return isinstance(val, list)
    raise AssertionError(kind)


def _vector(d, key, path, length):
    val = _get(d, key, path, "list")
    if len(val) != length:
        raise ConfigError(f"expected {length} components, got {len(val)}", path)
    for i, v in enumerate(val):
        if not _is(v, "number"):
            raise ConfigError("expected a number", f"{path}[{i}]")
    return [float(v) for v in val]


def _terms(tables, path, dim):
    if not isinstance(tables, list):
        raise ConfigError("expected a list of term tables", path)
    for i, table in enumerate(tables):
        if not isinstance(table, list):
            raise ConfigError("expected a list of terms", f"{path}[{i}]")
        for j, term in enumerate(table):
            tp = f"{path}[{i}][{j}]"
            _get(term, "coeff", f"{tp}.coeff", "number")
            exps = _get(term, "exponents", f"{tp}.exponents", "list")
            if len(exps) != dim or not all(_is(e, "integer") and e >= 0 for e in exps):
                raise ConfigError(f"exponents must be {dim} non-negative integers", f"{tp}.exponents")
    return tables


def parse_config(raw, name="scenario"):
    """Validate a decoded JSON scenario and apply defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", "$")
    task = _get(raw, "task", "task", "string")
    if task not in TASKS:
        raise ConfigError(f"must be one of {list(TASKS)}", "task")
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in _get(raw, "tolerances", "tolerances", "object", False, {}).items():
        if k not in tol:
            raise ConfigError("unknown tolerance", f"tolerances.{k}")
        if not _is(v, "number") or v <= 0:
            raise ConfigError("expected a positive number", f"tolerances.{k}")
        tol[k] = float(v)
    output = _get(raw, "output", "output", "object", False, {})
    for k in output:
        if k not in ("trajectory_csv", "report_json"):
            raise ConfigError("unknown output key", f"output.{k}")
        if not _is(output[k], "string"):
            raise ConfigError("expected a path string", f"output.{k}")
    if task == "verify" and "space" not in raw:
        return ScenarioConfig(0, None, task, tolerances=tol, output=output, name=name)

    space = _get(raw, "space", "space", "object")
    dim = _get(space, "dimension", "space.dimension", "integer")
    metric_raw = _get(space, "metric", "space.metric", required=False, default="euclidean")
    if isinstance(metric_raw, str):
        metric = MetricSpec.preset(metric_raw, dim)
    elif isinstance(metric_raw, dict):
        diag = _vector(metric_raw, "diag", "space.metric.diag", dim)
        metric = MetricSpec.from_diag(diag)
    else:
        raise ConfigError("expected a preset name or {diag: [...]}", "space.metric")

    form_raw = _get(raw, "form", "form", "object")
    keys = [k for k in ("catalog", "polynomial", "em") if k in form_raw]
    if len(keys) != 1:
        raise ConfigError("give exactly one of 'catalog', 'polynomial', 'em'", "form")
    form = potential = None
    if keys[0] == "catalog":
        cname = _get(form_raw, "catalog", "form.catalog", "string")
        params = _get(form_raw, "params", "form.params", "object", False, {})
        if cname == "em":
            potential = _potential(params, "form.params")
            form = em.build_bundle_form(potential)
        else:
            for key in ("lambda", "phi"):
                if key in params:
                    _terms([params[key]], f"form.params.{key}", dim)
            form = CovectorFieldSpec.catalog(cname, dim, **params)
    elif keys[0] == "polynomial":
        tables = _terms(form_raw["polynomial"], "form.polynomial", dim)
        form = CovectorFieldSpec.polynomial(tables, dim)
    else:
        potential = _potential(form_raw["em"], "form.em")
        form = em.build_bundle_form(potential)
    if form.dim != dim:
        raise ConfigError(f"form has dimension {form.dim}, space has {dim}", "space.dimension")

    cfg = ScenarioConfig(dim, metric, task, form, potential, tolerances=tol, output=output, name=name)
    base_dim = 4 if potential is not None else dim

    if task in ("classify", "curvature"):
        g = _get(raw, "grid", "grid", "object")
        center = _vector(g, "center", "grid.center", base_dim)
        hw = _get(g, "half_width", "grid.half_width")
        if isinstance(hw, list):
            hw = _vector(g, "half_width", "grid.half_width", base_dim)
        elif not _is(hw, "number") or hw < 0:
            raise ConfigError("expected a non-negative number or list", "grid.half_width")
        spa = _get(g, "samples_per_axis", "grid.samples_per_axis", "integer")
        cfg.grid = pfaff.Grid.make(center, hw, spa)

    if task == "integrate":
        it = _get(raw, "integrate", "integrate", "object")
        kind = _get(it, "kind", "integrate.kind", "string")
        if kind not in CURVE_KINDS + EM_KINDS:
            raise ConfigError(f"must be one of {list(CURVE_KINDS + EM_KINDS)}", "integrate.kind")
        if kind in EM_KINDS and potential is None:
            raise ConfigError(f"kind {kind!r} requires an 'em' form", "integrate.kind")
        n = 4 if kind in EM_KINDS else dim
        x0 = _vector(it, "x0", "integrate.x0", n)
        v0 = [] if kind == "line_of_curvature" else _vector(it, "v0", "integrate.v0", n)
        ic = IntegrateConfig(kind, x0, v0)
        for key, typ in (("lambda0", "number"), ("step", "number"), ("steps", "integer"),
                         ("velocity_projection", "bool"), ("renormalize_speed", "bool"),
                         ("eigen_index", "integer"), ("max_span", "number")):
            if key in it:
                setattr(ic, key, _get(it, key, f"integrate.{key}", typ))
        if ic.step <= 0:
            raise ConfigError("must be > 0", "integrate.step")
        if ic.steps < 1:
            raise ConfigError("must be >= 1", "integrate.steps")
        ic.settings()
        cfg.integrate = ic
    return cfg


def _potential(d, path):
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    kind = _get(d, "kind", f"{path}.kind", "string")
    if kind not in em.KINDS:
        raise ConfigError(f"must be one of {list(em.KINDS)}", f"{path}.kind")
    for key in ("q", "m", "c", "B", "E"):
        if key in d and not _is(d[key], "number"):
            raise ConfigError("expected a number", f"{path}.{key}")
    if kind == "pure_gauge" and "phi" in d:
        _terms([d["phi"]], f"{path}.phi", 4)
    if kind == "custom":
        _terms(_get(d, "A", f"{path}.A", "list"), f"{path}.A", 4)
        if len(d["A"]) != 4:
            raise ConfigError("expected 4 component tables", f"{path}.A")
    return em.FourPotentialSpec.from_dict(d)


def load_config(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", "$") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "$") from None
    return parse_config(raw, path.stem)


# ---------------------------------------------------------------------------
# outputs


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_json(obj):
    return json.dumps(_clean(obj), indent=2) + "\n"


def trajectory_csv(traj):
    d = traj.dim
    header = ["s"] + [f"x{i}" for i in range(d)] + [f"v{i}" for i in range(d)] + ["lambda", "drift", "speed"]
    lines = [",".join(header)]
    for i in range(len(traj)):
        row = [traj.s[i], *traj.x[i], *traj.v[i], traj.lam[i], traj.drift[i], traj.speed[i]]
        lines.append(",".join(format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(results, cfg, out_dir="."):
    """Write the report JSON and, if present, the trajectory CSV. Returns written paths."""
    out_dir = Path(out_dir)
    written = []
    if results.get("trajectory") is not None:
        p = out_dir / cfg.output.get("trajectory_csv", "trajectory.csv")
        atomic_write(p, trajectory_csv(results["trajectory"]))
        written.append(p)
    p = out_dir / cfg.output.get("report_json", "report.json")
    atomic_write(p, dumps_json(results["report"]))
    written.append(p)
    return written


# ---------------------------------------------------------------------------
# tasks


def _lift(cfg, p):
    return np.append(p, 0.0) if cfg.potential is not None else np.asarray(p)


def _classify(cfg):
    tol = cfg.tolerances["zero_form"]
    if cfg.potential is not None:
        rep = em.em_integrability_report(cfg.potential, cfg.grid, tol)
        region = pfaff.classify_region(cfg.form, cfg.metric, _BaseGrid(cfg.grid), tol)
        return {"task": "classify", "em": rep.to_dict(), "region": region.to_dict()}
    region = pfaff.classify_region(cfg.form, cfg.metric, cfg.grid, tol)
    return {"task": "classify", "region": region.to_dict()}


class _BaseGrid:
    """A base-space grid whose points are lifted to the fiber section phi = 0."""

    def __init__(self, grid):
        self.grid = grid

    def points(self):
        for p in self.grid.points():
            yield np.append(p, 0.0)

    def __len__(self):
        return len(self.grid)


def _curvature(cfg):
    out = []
    for p in cfg.grid.points():
        geom = differential_split(cfg.form, cfg.metric, _lift(cfg, p))
        rep = geometry.point_curvature(geom, cfg.tolerances["eigen_zero"])
        out.append(rep.to_dict())
    return out


def _integrate(cfg):
    ic = cfg.integrate
    st = ic.settings()
    if ic.kind == "lorentz":
        traj = em.lorentz_integrate(cfg.potential, ic.x0, ic.v0, st)
    elif ic.kind == "em_geodesic":
        traj = em.constrained_geodesic_em(cfg.potential, ic.x0, ic.v0, st)
    elif ic.kind == "line_of_curvature":
        traj = curves.line_of_curvature_integrate(cfg.form, cfg.metric, ic.x0, ic.eigen_index, st)
    else:
        traj = curves.integrate(cfg.form, cfg.metric, ic.kind,
                                {"x": ic.x0, "v": ic.v0, "lam": ic.lambda0}, st)
    summary = {
        "task": "integrate",
        "kind": ic.kind,
        "samples": len(traj),
        "endpoint": {"s": traj.s[-1], "x": traj.x[-1], "v": traj.v[-1], "lambda": traj.lam[-1]},
        "max_drift": float(np.max(traj.drift)),
        "drift_ok": bool(np.max(traj.drift) < cfg.tolerances["drift"]),
        "speed": {"min": float(np.min(traj.speed)), "max": float(np.max(traj.speed)),
                  "mean": float(np.mean(traj.speed))},
        "settings": traj.meta,
    }
    if ic.kind in ("normal_curve", "geodesic"):
        nc = curves.normality_check(cfg.form, cfg.metric, traj)
        summary["normality"] = {"is_normal": nc.is_normal,
                                "max_residual": float(np.max(nc.residual)),
                                "passing_samples": int(np.sum(nc.passed))}
    if "eta_vv" in traj.extras:
        eta = traj.extras["eta_vv"]
        summary["eta_vv"] = {"min": float(np.min(eta)), "max": float(np.max(eta))}
    return traj, summary


def run_task(cfg, out_dir="."):
    """Run the configured task and write its artifacts. Returns the exit code."""
    traj = None
    if cfg.task == "verify":
        from .acceptance import run_all

        results = run_all()
        report = {"task": "verify", "criteria": results,
                  "passed": all(r["passed"] for r in results)}
        write_outputs({"report": report}, cfg, out_dir)
        for r in results:
            print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['id']:>2} {r['name']}")
        if not report["passed"]:
            _diagnose("VerifyFailure", "acceptance criteria failed",
                      failed=[r["id"] for r in results if not r["passed"]], code=3)
            return 3
        return 0
    try:
        if cfg.task == "classify":
            report = _classify(cfg)
        elif cfg.task == "curvature":
            report = _curvature(cfg)
        else:
            traj, report = _integrate(cfg)
    except NumericalError as exc:
        partial = getattr(exc, "trajectory", None)
        if partial is not None and len(partial):
            try:
                write_outputs({"report": {"error": type(exc).__name__}, "trajectory": partial}, cfg, out_dir)
            except OSError:
                pass
        _diagnose(type(exc).__name__, str(exc), point=exc.point, sample=exc.sample, code=2)
        return 2
    except ConstraintViolation as exc:
        _diagnose(type(exc).__name__, str(exc), code=1)
        return 1
    try:
        write_outputs({"report": report, "trajectory": traj}, cfg, out_dir)
    except OSError as exc:
        _diagnose("IoError", str(exc), code=2)
        return 2
    return 0


def _diagnose(error, message, code, **extra):
    payload = {"error": error, "message": message, "exit_code": code}
    payload.update({k: v for k, v in extra.items() if v is not None})
    sys.stderr.write(json.dumps(_clean(payload), sort_keys=True) + "\n")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="pfaffgeom", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="scenario JSON file")
    parser.add_argument("--task", choices=TASKS, help="override the task in the config")
    parser.add_argument("--out-dir", default=".", help="directory for relative output paths")
    args = parser.parse_args(argv)
    try:
        if args.config:
            raw = json.loads(Path(args.config).read_text())
            if args.task:
                raw["task"] = args.task
            cfg = parse_config(raw, Path(args.config).stem)
        elif args.task == "verify":
            cfg = parse_config({"task": "verify"})
        else:
            raise ConfigError("--config is required (except for --task verify)", "--config")
    except FileNotFoundError:
        _diagnose("ConfigError", f"config file not found: {args.config}", path="--config", code=1)
        return 1
    except json.JSONDecodeError as exc:
        _diagnose("ConfigError", f"invalid JSON: {exc}", path="$", code=1)
        return 1
    except ConfigError as exc:
        _diagnose("ConfigError", str(exc), path=exc.path, code=1)
        return 1
    except PfaffGeomError as exc:
        _diagnose(type(exc).__name__, str(exc), code=1)
        return 1
    return run_task(cfg, args.out_dir)


if __name__ == "__main__":
    sys.exit(main())
