"""Command line: scenario configuration, task dispatch, deterministic output.

Usage:  weylflow <task> --config <path> [--out <dir>]
        weylflow verify [--out <dir>]

Tasks: simulate, lyapunov, curvature-scan, billiard, orbit-stability, verify.
Configs are strict JSON: unknown keys are rejected and every validation error
is reported, not just the first.  Outputs are CSV/JSON with fixed float
formatting (17 significant digits) so identical configs produce byte-identical
files; the manifest records a digest of everything written.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import acceptance, billiards, flows, geometry, presets, tangent
from .errors import ConfigError, WeylflowError
from .fields import (
    ClosedOneFormField,
    ConstantField,
    FourierComponentsField,
    FourierField,
    GradientField,
    SolLeftInvariantField,
    ZeroField,
)
from .metrics import ConformalTorus, ConstantCurvatureChart, FlatTorus, SolGroup
from .scenario import WeylScenario, product_scenario

__version__ = "0.1.0"

TASKS = ("simulate", "lyapunov", "curvature-scan", "billiard",
         "orbit-stability", "verify")

NUMERIC_DEFAULTS = {
    "dt": 1e-3, "T": 100.0, "renorm_every": 10, "seed": 0,
    "n_collisions": 1000, "n_points": 100, "n_planes": 100, "burn_in": 0.0,
}


@dataclass
class RunConfig:
    task: str
    preset: str
    scenario: object
    table: object
    initial: dict
    numerics: dict
    output: dict
    echo: dict


def fmt(x):
    """Fixed 17-significant-digit float formatting for reproducible CSV."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


# ---------------------------------------------------------------------------
# strict parsing
# ---------------------------------------------------------------------------

def _check_keys(obj, allowed, path, errors):
    for key in obj:
        if key not in allowed:
            errors.append(f"{path}: unknown key {key!r}")


def _number(obj, key, path, errors, default=None, positive=False, integer=False,
            nonnegative=False):
    if key not in obj:
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(f"{path}.{key}: expected a number, got {val!r}")
        return default
    if integer and not float(val).is_integer():
        errors.append(f"{path}.{key}: expected an integer, got {val!r}")
        return default
    if positive and val <= 0:
        errors.append(f"{path}.{key}: must be positive, got {val!r}")
        return default
    if nonnegative and val < 0:
        errors.append(f"{path}.{key}: must be >= 0, got {val!r}")
        return default
    return int(val) if integer else float(val)


def _vector(obj, key, path, errors, required=False):
    if key not in obj:
        if required:
            errors.append(f"{path}.{key}: missing")
        return None
    val = obj[key]
    if (not isinstance(val, list) or not val
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val)):
        errors.append(f"{path}.{key}: expected a list of numbers")
        return None
    return [float(x) for x in val]


def _parse_fourier(doc, path, errors):
    if not isinstance(doc, dict):
        errors.append(f"{path}: expected an object")
        return None
    _check_keys(doc, {"dim", "terms", "periods"}, path, errors)
    dim = _number(doc, "dim", path, errors, positive=True, integer=True)
    if dim is None:
        errors.append(f"{path}.dim: missing")
        return None
    terms = []
    for i, term in enumerate(doc.get("terms", [])):
        tpath = f"{path}.terms[{i}]"
        if not isinstance(term, dict):
            errors.append(f"{tpath}: expected an object")
            continue
        _check_keys(term, {"k", "cos", "sin"}, tpath, errors)
        k = _vector(term, "k", tpath, errors, required=True)
        if k is None or len(k) != dim:
            errors.append(f"{tpath}.k: expected {dim} integers")
            continue
        terms.append((tuple(int(x) for x in k),
                      float(term.get("cos", 0.0)), float(term.get("sin", 0.0))))
    periods = _vector(doc, "periods", path, errors)
    if errors:
        return None
    return FourierField(dim, terms, periods=periods)


def _parse_field(doc, dim, path, errors):
    if doc is None:
        return ZeroField(dim)
    if not isinstance(doc, dict):
        errors.append(f"{path}: expected an object")
        return None
    exclusive = {"components", "potential", "covector", "coefficients"}
    present = sorted(exclusive & set(doc))
    if len(present) > 1:
        errors.append(f"{path}: mutually exclusive field data {present}; give exactly one")
        return None
    ftype = doc.get("type")
    if ftype == "zero":
        _check_keys(doc, {"type"}, path, errors)
        return ZeroField(dim)
    if ftype == "constant":
        _check_keys(doc, {"type", "components"}, path, errors)
        comp = _vector(doc, "components", path, errors, required=True)
        if comp is not None and len(comp) != dim:
            errors.append(f"{path}.components: expected length {dim}")
            return None
        return None if comp is None else ConstantField(comp)
    if ftype == "gradient_of_potential":
        _check_keys(doc, {"type", "potential"}, path, errors)
        if "potential" not in doc:
            errors.append(f"{path}.potential: missing")
            return None
        U = _parse_fourier(doc["potential"], f"{path}.potential", errors)
        return None if U is None else GradientField(U)
    if ftype == "fourier":
        _check_keys(doc, {"type", "components"}, path, errors)
        comps = doc.get("components")
        if not isinstance(comps, list) or len(comps) != dim:
            errors.append(f"{path}.components: expected {dim} fourier objects")
            return None
        fields = [_parse_fourier(c, f"{path}.components[{i}]", errors)
                  for i, c in enumerate(comps)]
        if any(f is None for f in fields):
            return None
        return FourierComponentsField(fields)
    if ftype == "closed_one_form":
        _check_keys(doc, {"type", "covector"}, path, errors)
        cov = _vector(doc, "covector", path, errors, required=True)
        if cov is not None and len(cov) != dim:
            errors.append(f"{path}.covector: expected length {dim}")
            return None
        return None if cov is None else ClosedOneFormField(cov)
    if ftype == "sol_left_invariant":
        _check_keys(doc, {"type", "coefficients"}, path, errors)
        c = _vector(doc, "coefficients", path, errors, required=True)
        if c is not None and len(c) != 3:
            errors.append(f"{path}.coefficients: expected length 3")
            return None
        return None if c is None else SolLeftInvariantField(*c)
    errors.append(f"{path}.type: unknown field type {ftype!r}")
    return None


def _parse_scenario(doc, path, errors):
    if not isinstance(doc, dict):
        errors.append(f"{path}: expected an object")
        return None
    _check_keys(doc, {"metric", "field"}, path, errors)
    metric_doc = doc.get("metric")
    if not isinstance(metric_doc, dict):
        errors.append(f"{path}.metric: missing or not an object")
        return None
    family = metric_doc.get("family")
    mpath = f"{path}.metric"
    fam = None
    if family == "flat_torus":
        _check_keys(metric_doc, {"family", "periods"}, mpath, errors)
        periods = _vector(metric_doc, "periods", mpath, errors) or [1.0, 1.0]
        fam = FlatTorus(periods)
    elif family == "constant_curvature_chart":
        _check_keys(metric_doc, {"family", "curvature", "dim"}, mpath, errors)
        K = _number(metric_doc, "curvature", mpath, errors)
        n = _number(metric_doc, "dim", mpath, errors, positive=True, integer=True) or 2
        if K is None:
            errors.append(f"{mpath}.curvature: missing")
        else:
            fam = ConstantCurvatureChart(K, n)
    elif family == "sol_group":
        _check_keys(metric_doc, {"family"}, mpath, errors)
        fam = SolGroup()
    elif family == "conformal_torus":
        _check_keys(metric_doc, {"family", "sigma", "periods"}, mpath, errors)
        if "sigma" not in metric_doc:
            errors.append(f"{mpath}.sigma: missing")
        else:
            sigma = _parse_fourier(metric_doc["sigma"], f"{mpath}.sigma", errors)
            if sigma is not None:
                fam = ConformalTorus(sigma, _vector(metric_doc, "periods", mpath, errors))
    elif family == "product":
        _check_keys(metric_doc, {"family", "factors"}, mpath, errors)
        factors = metric_doc.get("factors")
        if not isinstance(factors, list) or len(factors) != 2:
            errors.append(f"{mpath}.factors: expected two scenario objects")
        else:
            s1 = _parse_scenario(factors[0], f"{mpath}.factors[0]", errors)
            s2 = _parse_scenario(factors[1], f"{mpath}.factors[1]", errors)
            if s1 is not None and s2 is not None:
                return product_scenario(s1, s2)
        return None
    else:
        errors.append(f"{mpath}.family: unknown metric family {family!r}")
    if fam is None:
        return None
    field = _parse_field(doc.get("field"), fam.dim, f"{path}.field", errors)
    if field is None and doc.get("field") is not None:
        return None
    try:
        return WeylScenario(fam, field)
    except WeylflowError as exc:
        errors.append(f"{path}: {exc}")
        return None


def _parse_table(doc, path, errors):
    if not isinstance(doc, dict):
        errors.append(f"{path}: expected an object")
        return None
    _check_keys(doc, {"periods", "scatterers", "field_magnitude", "field_angle"},
                path, errors)
    periods = _vector(doc, "periods", path, errors) or [1.0, 1.0]
    mag = _number(doc, "field_magnitude", path, errors, nonnegative=True, default=0.0)
    angle = _number(doc, "field_angle", path, errors, default=0.0)
    scats = []
    for i, s in enumerate(doc.get("scatterers", [])):
        spath = f"{path}.scatterers[{i}]"
        if not isinstance(s, dict):
            errors.append(f"{spath}: expected an object")
            continue
        _check_keys(s, {"center", "radius"}, spath, errors)
        center = _vector(s, "center", spath, errors, required=True)
        radius = _number(s, "radius", spath, errors, positive=True)
        if center is not None and radius is not None:
            scats.append((center, radius))
    if errors:
        return None
    try:
        return billiards.BilliardTable(periods, scats, mag, angle)
    except (WeylflowError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None


def parse_config(document):
    """Validate a JSON config document (text or dict); returns a RunConfig.

    Raises ConfigError carrying the full list of validation errors.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    else:
        doc = document
    errors = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level: expected a JSON object"])
    _check_keys(doc, {"task", "preset", "scenario", "billiard", "initial",
                      "numerics", "output"}, "top level", errors)

    task = doc.get("task")
    if task not in TASKS:
        errors.append(f"task: expected one of {TASKS}, got {task!r}")

    numerics = dict(NUMERIC_DEFAULTS)
    ndoc = doc.get("numerics", {})
    if not isinstance(ndoc, dict):
        errors.append("numerics: expected an object")
        ndoc = {}
    _check_keys(ndoc, set(NUMERIC_DEFAULTS), "numerics", errors)
    numerics["dt"] = _number(ndoc, "dt", "numerics", errors,
                             default=numerics["dt"], positive=True)
    numerics["T"] = _number(ndoc, "T", "numerics", errors,
                            default=numerics["T"], positive=True)
    numerics["renorm_every"] = _number(ndoc, "renorm_every", "numerics", errors,
                                       default=numerics["renorm_every"],
                                       positive=True, integer=True)
    numerics["seed"] = _number(ndoc, "seed", "numerics", errors,
                               default=numerics["seed"], integer=True, nonnegative=True)
    numerics["n_collisions"] = _number(ndoc, "n_collisions", "numerics", errors,
                                       default=numerics["n_collisions"],
                                       positive=True, integer=True)
    numerics["n_points"] = _number(ndoc, "n_points", "numerics", errors,
                                   default=numerics["n_points"], positive=True, integer=True)
    numerics["n_planes"] = _number(ndoc, "n_planes", "numerics", errors,
                                   default=numerics["n_planes"], positive=True, integer=True)
    numerics["burn_in"] = _number(ndoc, "burn_in", "numerics", errors,
                                  default=numerics["burn_in"], nonnegative=True)

    output = {"directory": ".", "formats": ["csv", "json"]}
    odoc = doc.get("output", {})
    if not isinstance(odoc, dict):
        errors.append("output: expected an object")
        odoc = {}
    _check_keys(odoc, {"directory", "formats"}, "output", errors)
    if "directory" in odoc:
        if not isinstance(odoc["directory"], str):
            errors.append("output.directory: expected a string")
        else:
            output["directory"] = odoc["directory"]
    if "formats" in odoc:
        if (not isinstance(odoc["formats"], list)
                or not set(odoc["formats"]) <= {"csv", "json"}):
            errors.append("output.formats: expected a sublist of ['csv', 'json']")
        else:
            output["formats"] = list(odoc["formats"])

    preset = doc.get("preset")
    scenario = None
    table = None
    if preset is not None and "scenario" in doc:
        errors.append("preset and scenario are mutually exclusive")
    if preset is not None:
        if preset in presets.GEOMETRY_PRESETS:
            scenario = presets.scenario_preset(preset)
        elif preset in presets.BILLIARD_PRESETS:
            table = presets.billiard_preset(preset)
        else:
            errors.append(f"preset: unknown preset {preset!r}")
    if "scenario" in doc:
        scenario = _parse_scenario(doc["scenario"], "scenario", errors)
    if "billiard" in doc:
        table = _parse_table(doc["billiard"], "billiard", errors)

    initial = {}
    idoc = doc.get("initial", {})
    if not isinstance(idoc, dict):
        errors.append("initial: expected an object")
        idoc = {}
    _check_keys(idoc, {"q", "v"}, "initial", errors)
    if "q" in idoc:
        initial["q"] = _vector(idoc, "q", "initial", errors, required=True)
    if "v" in idoc:
        initial["v"] = _vector(idoc, "v", "initial", errors, required=True)

    if task in ("simulate", "lyapunov", "curvature-scan") and scenario is None and not errors:
        errors.append(f"{task}: needs a scenario or a geometry preset")
    if task in ("billiard", "orbit-stability") and table is None and not errors:
        errors.append(f"{task}: needs a billiard table or billiard preset")

    if errors:
        raise ConfigError(errors)
    return RunConfig(task=task, preset=preset, scenario=scenario, table=table,
                     initial=initial, numerics=numerics, output=output, echo=doc)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _write_text(path, text):
    path.write_text(text, encoding="utf-8", newline="")
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return {"name": path.name, "sha256": digest, "bytes": path.stat().st_size}


def _csv(rows, header):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) if isinstance(x, (int, float, np.floating, np.integer, bool))
                              else str(x) for x in row))
    return "\n".join(lines) + "\n"


def _json_text(obj):
    return json.dumps(obj, sort_keys=True, indent=2,
                      default=acceptance._json_default) + "\n"


def _initial_state(cfg):
    sc = cfg.scenario
    if "q" in cfg.initial and "v" in cfg.initial:
        q = np.asarray(cfg.initial["q"], dtype=float)
        v = np.asarray(cfg.initial["v"], dtype=float)
        v = v / sc.norm(q, v)
        return flows.PhaseState(q, v)
    q, v = presets.default_initial_state(sc, seed=cfg.numerics["seed"])
    return flows.PhaseState(q, v)


# ---------------------------------------------------------------------------
# task runners
# ---------------------------------------------------------------------------

def _task_simulate(cfg, outdir):
    state = _initial_state(cfg)
    traj = flows.integrate(cfg.scenario, state, T=cfg.numerics["T"],
                           dt=cfg.numerics["dt"])
    n = cfg.scenario.dim
    header = (["t"] + [f"q{i}" for i in range(n)] + [f"v{i}" for i in range(n)]
              + ["speed_residual", "energy_residual", "int_phi"])
    rows = [
        [traj.times[i], *traj.q[i], *traj.v[i], traj.speed_residual[i],
         traj.energy_residual[i], traj.int_phi[i]]
        for i in range(len(traj.times))
    ]
    files = [_write_text(outdir / "trajectory.csv", _csv(rows, header))]
    summary = {
        "samples": len(traj.times),
        "final_q": traj.q[-1].tolist(),
        "final_v": traj.v[-1].tolist(),
        "max_speed_residual": float(np.abs(traj.speed_residual).max()),
        "int_phi_final": float(traj.int_phi[-1]),
    }
    return files, summary


def _task_lyapunov(cfg, outdir):
    state = _initial_state(cfg)
    rep = tangent.lyapunov_spectrum(cfg.scenario, state, T=cfg.numerics["T"],
                                    dt=cfg.numerics["dt"],
                                    renorm_every=cfg.numerics["renorm_every"],
                                    seed=cfg.numerics["seed"],
                                    burn_in=cfg.numerics["burn_in"])
    k = len(rep.exponents)
    lines = [f"# weylflow lyapunov run: T={fmt(rep.T)} dt={fmt(rep.dt)} "
             f"renorm_every={rep.renorm_every} seed={rep.seed} "
             f"finite_time={'yes' if rep.finite_time else 'no'}"]
    header = ["t"] + [f"lambda{i + 1}" for i in range(k)] + ["sbar_running", "jsep_margin"]
    rows = [
        [rep.window_times[i], *rep.window_exponents[i], rep.window_sbar[i],
         rep.window_jsep[i]]
        for i in range(len(rep.window_times))
    ]
    csv_text = lines[0] + "\n" + _csv(rows, header)
    report = {
        "exponents": rep.exponents.tolist(),
        "sbar": rep.sbar,
        "pairing_residual": rep.pairing_residual,
        "trace_residual": rep.trace_residual,
        "mean_jsep_margin": rep.mean_jsep_margin,
        "volume_growth": rep.volume_growth,
        "volume_decay": rep.volume_decay,
        "T": rep.T, "dt": rep.dt, "renorm_every": rep.renorm_every,
        "seed": rep.seed, "finite_time": rep.finite_time,
    }
    files = [_write_text(outdir / "lyapunov.csv", csv_text),
             _write_text(outdir / "lyapunov.json", _json_text(report))]
    return files, report


def _task_curvature_scan(cfg, outdir):
    census = geometry.curvature_sign_scan(
        cfg.scenario, n_points=cfg.numerics["n_points"],
        n_planes=cfg.numerics["n_planes"], seed=cfg.numerics["seed"],
        include_field_planes=True)
    n = cfg.scenario.dim
    header = ([f"q{i}" for i in range(n)] + [f"X{i}" for i in range(n)]
              + [f"Y{i}" for i in range(n)]
              + ["K", "Khat_tensor", "Khat_formula", "margin"])
    rows = [[*s.q, *s.X, *s.Y, s.K, s.Khat_tensor, s.Khat, s.margin]
            for s in census.samples]
    summary = {
        "min": census.min, "max": census.max,
        "count_negative": census.count_negative,
        "count_zero": census.count_zero,
        "count_positive": census.count_positive,
        "samples": len(census.samples),
    }
    files = [_write_text(outdir / "curvature_scan.csv", _csv(rows, header)),
             _write_text(outdir / "census.json", _json_text(summary))]
    return files, summary


def _task_billiard(cfg, outdir):
    rng = np.random.default_rng(np.random.Philox(cfg.numerics["seed"]))
    table = cfg.table
    if "q" in cfg.initial:
        q0 = np.asarray(cfg.initial["q"], dtype=float)
    else:
        while True:
            q0 = rng.uniform(0, table.periods)
            if table.outside(q0, tol=1e-9):
                break
    if "v" in cfg.initial:
        v0 = np.asarray(cfg.initial["v"], dtype=float)
    else:
        th = rng.uniform(0, 2 * np.pi)
        v0 = np.array([np.cos(th), np.sin(th)])
    run = billiards.run_billiard(table, q0, v0, cfg.numerics["n_collisions"],
                                 with_tangent=True)
    header = ["index", "t", "scatterer", "impact_x", "impact_y",
              "angle_in", "angle_out"]
    rows = []
    for i, ev in enumerate(run.events):
        p = table.wrap(ev.point)
        rows.append([i, run.collision_times[i], ev.scatterer, p[0], p[1],
                     float(np.arctan2(ev.v_in[1], ev.v_in[0])),
                     float(np.arctan2(ev.v_out[1], ev.v_out[0]))])
    conv = billiards.weyl_convexity(table)
    summary = {
        "collisions": len(run.events),
        "total_time": run.total_time,
        "lambda1": run.lambda1,
        "grazing_count": run.grazing_count,
        "open_flights": run.open_count,
        "convexity_margin": conv.margin,
        "horizon_finite": table.horizon_finite,
    }
    files = [_write_text(outdir / "collisions.csv", _csv(rows, header)),
             _write_text(outdir / "billiard.json", _json_text(summary))]
    return files, summary


def _task_orbit_stability(cfg, outdir):
    table = cfg.table
    st = billiards.periodic_orbit_stability(table)
    report = {
        "trace": st.trace,
        "eigenvalues_real": [float(np.real(e)) for e in st.eigenvalues],
        "eigenvalues_imag": [float(np.imag(e)) for e in st.eigenvalues],
        "classification": st.classification,
        "period": st.period,
        "re_product": st.re_product,
    }
    radius = min(s.radius for s in table.scatterers)
    gap = st.period / 2.0
    rows = []
    for re_val in np.linspace(0.0, 2.0, 21):
        tb = presets.two_disk_orbit(re_val, radius=radius, gap=gap)
        s = billiards.periodic_orbit_stability(tb)
        lam1 = float(np.log(np.abs(s.eigenvalues)).max() / s.period)
        rows.append([re_val, lam1, 0, 1 if s.classification == "elliptic" else 0])
    header = ["parameter", "lambda1", "grazing_count", "elliptic_flag"]
    files = [_write_text(outdir / "orbit.json", _json_text(report)),
             _write_text(outdir / "orbit_sweep.csv", _csv(rows, header))]
    return files, report


def _task_verify(cfg, outdir):
    results = acceptance.run_all()
    header = ["criterion", "name", "passed", "detail"]
    rows = [[r.criterion, r.name, "PASS" if r.passed else "FAIL",
             '"' + r.detail.replace('"', "'") + '"'] for r in results]
    report = [r.as_row() for r in results]
    files = [_write_text(outdir / "criteria.csv", _csv(rows, header)),
             _write_text(outdir / "results.json", _json_text(report))]
    summary = {
        "passed": sum(r.passed for r in results),
        "failed": sum(not r.passed for r in results),
        "criteria": {str(r.criterion): ("PASS" if r.passed else "FAIL")
                     for r in results},
    }
    for r in results:
        print(f"criterion {r.criterion:2d} [{'PASS' if r.passed else 'FAIL'}] "
              f"{r.name}: {r.detail}")
    return files, summary


RUNNERS = {
    "simulate": _task_simulate,
    "lyapunov": _task_lyapunov,
    "curvature-scan": _task_curvature_scan,
    "billiard": _task_billiard,
    "orbit-stability": _task_orbit_stability,
    "verify": _task_verify,
}


def dispatch(cfg, out_override=None):
    """Run the configured task, write outputs and the manifest; returns the
    manifest dict (failures are serialized into it before re-raising)."""
    outdir = Path(out_override or cfg.output["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    manifest = {
        "artifact_version": __version__,
        "task": cfg.task,
        "config": cfg.echo,
    }
    try:
        files, summary = RUNNERS[cfg.task](cfg, outdir)
    except WeylflowError as exc:
        manifest["error"] = {"class": type(exc).__name__, "message": str(exc)}
        manifest["wall_time_s"] = time.perf_counter() - start
        (outdir / "manifest.json").write_text(_json_text(manifest), encoding="utf-8")
        raise
    manifest["files"] = files
    manifest["summary"] = summary
    manifest["wall_time_s"] = time.perf_counter() - start
    (outdir / "manifest.json").write_text(_json_text(manifest), encoding="utf-8")
    return manifest


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="weylflow",
        description="Thermostatted flows, Weyl curvature diagnostics and the "
                    "thermostatted Lorentz gas.")
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", help="path to a JSON config document")
    parser.add_argument("--out", help="output directory (overrides config)")
    args = parser.parse_args(argv)

    if args.config is None:
        if args.task != "verify":
            print(f"error: task {args.task} requires --config", file=sys.stderr)
            return 2
        doc = {"task": "verify"}
    else:
        try:
            doc = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2

    try:
        cfg = parse_config(doc)
    except ConfigError as exc:
        print("configuration invalid:", file=sys.stderr)
        for err in exc.errors:
            print(f"  - {err}", file=sys.stderr)
        return 2
    if args.task != cfg.task:
        print(f"error: config task {cfg.task!r} does not match command {args.task!r}",
              file=sys.stderr)
        return 2

    try:
        manifest = dispatch(cfg, out_override=args.out)
    except WeylflowError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    if cfg.task == "verify" and manifest["summary"]["failed"] > 0:
        print(f"{manifest['summary']['failed']} criterion(s) FAILED", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
