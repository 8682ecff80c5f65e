"""Command-line front end.

Exit codes: 0 pass, 2 config error, 3 solver error, 4 hypothesis violation,
5 criterion failure. Every output file is rendered in memory and written in
one pass at the end through a temp-file rename.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import jsonschema
import numpy as np

from . import gallery as gallery_mod
from .chains import (
    chain_becker_pommerenke,
    chain_criteria_report,
    chain_exponential,
    chain_schwarzian,
    chain_starlike_infinity,
    chain_translation,
)
from .core import UNIT_DISK, DiskGrid, Grid, HyperbolicDisk, jsonable
from .criteria import (
    ab_check,
    becker_pommerenke_k,
    derivative_disk_k,
    necessary_bound_check,
    nehari_qc_k,
    psi_prime_k,
    qc2_check,
    zf_over_f_check,
)
from .errors import ArgumentError, EvaluationError, HypothesisError, LoewnerQCError, SolverError
from .evolution import EvolutionFamily
from .expr import holomap_from_expr
from .herglotz import field_from_expr, validate
from .plots import curves_svg, grid_image_svg, heatmap_svg
from .qcext import (
    dilatation_report,
    extend_chain,
    extend_evolution,
    extend_halfplane_linear,
    extend_log_lift,
    extend_schwarzian,
    injectivity_check,
    seam_check,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_HYPOTHESIS, EXIT_CRITERION = 0, 2, 3, 4, 5
COMMANDS = ("evolve", "extend", "criteria", "gallery", "alpha", "chain")

TRAJECTORY_HEADER = ("t", "re", "im", "re_dz", "im_dz")
ALPHA_HEADER = ("t", "alpha")
SEAM_HEADER = ("seam", "eps", "residual")
CRITERIA_HEADER = ("criterion", "k_min", "value", "margin", "target", "passed")
GALLERY_HEADER = ("case", "expectation", "value", "expected", "error", "tol", "provenance", "passed")
CHAIN_HEADER = ("t", "min_ratio")


class ConfigError(LoewnerQCError):
    pass


# ---------------------------------------------------------------- schema

_NUM = {"type": "number"}
_COMPLEX = {"oneOf": [
    {"type": "number"},
    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    {"type": "object", "properties": {"re": _NUM, "im": _NUM}, "additionalProperties": False},
]}
_GRID = {"type": "object", "properties": {
    "xmin": _NUM, "xmax": _NUM, "ymin": _NUM, "ymax": _NUM,
    "nx": {"type": "integer", "minimum": 2}, "ny": {"type": "integer", "minimum": 2},
    "logx": {"type": "boolean"}}, "required": ["xmin", "xmax", "ymin", "ymax", "nx", "ny"],
    "additionalProperties": False}
_DISKGRID = {"type": "object", "properties": {
    "rmin": _NUM, "rmax": _NUM, "nr": {"type": "integer", "minimum": 2},
    "ntheta": {"type": "integer", "minimum": 3}}, "required": ["rmin", "rmax", "nr", "ntheta"],
    "additionalProperties": False}
_TIMES = {"oneOf": [
    {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    {"type": "object", "properties": {"start": {"type": "number", "minimum": 0}, "stop": _NUM,
                                      "num": {"type": "integer", "minimum": 1}},
     "required": ["start", "stop", "num"], "additionalProperties": False},
]}
_PARAMS = {"type": "object", "additionalProperties": _COMPLEX}
_SOLVER = {"type": "object", "properties": {"rtol": {"type": "number", "exclusiveMinimum": 0},
                                            "atol": {"type": "number", "exclusiveMinimum": 0},
                                            "max_step": {"type": "number", "exclusiveMinimum": 0}},
           "additionalProperties": False}
_HDISK = {"type": "object", "properties": {"center": _COMPLEX, "radius": {"type": "number", "minimum": 0}},
          "required": ["center", "radius"], "additionalProperties": False}
_FIELD = {"type": "object", "properties": {"expr": {"type": "string"},
                                           "breakpoints": {"type": "array", "items": _NUM}},
          "required": ["expr"], "additionalProperties": False}


def _cmd(name, props, required=()):
    base = {"command": {"const": name}, "params": _PARAMS, "description": {"type": "string"}}
    return {"type": "object", "properties": {**base, **props}, "required": ["command", *required],
            "additionalProperties": False}


SCHEMAS = {
    "evolve": _cmd("evolve", {"field": _FIELD, "z": _COMPLEX, "s": {"type": "number", "minimum": 0},
                              "times": _TIMES, "solver": _SOLVER}, ("field", "z", "times")),
    "alpha": _cmd("alpha", {"field": _FIELD, "times": _TIMES, "solver": _SOLVER}, ("field", "times")),
    "extend": _cmd("extend", {
        "construction": {"enum": ["becker-pommerenke", "schwarzian-chain", "schwarzian", "translation",
                                  "exponential", "starlike-infinity", "evolution", "halfplane-linear",
                                  "log-lift"]},
        "h": {"type": "string"}, "f": {"type": "string"}, "field": _FIELD,
        "t": {"type": "number", "minimum": 0}, "s": {"type": "number", "minimum": 0},
        "rho": {"type": "number", "minimum": 0}, "eps": {"type": "number", "exclusiveMinimum": 0},
        "omega": _COMPLEX, "disk": _HDISK, "k_target": {"type": "number", "minimum": 0, "maximum": 1},
        "tol": {"type": "number", "minimum": 0}, "step": {"type": "number", "exclusiveMinimum": 0},
        "grid": _GRID, "check_grid": _GRID, "image_grid": _GRID, "seam_y": {"type": "array", "items": _NUM},
        "K_bound": {"type": "number", "minimum": 1}, "solver": _SOLVER,
    }, ("construction", "k_target")),
    "criteria": _cmd("criteria", {
        "h": {"type": "string"}, "grid": _GRID, "disk_grid": _DISKGRID,
        "criteria": {"type": "array", "minItems": 1, "items": {"type": "object", "properties": {
            "name": {"enum": ["becker-pommerenke", "nehari-qc", "derivative-disk", "zf-over-f", "qc2", "ab",
                              "psi-prime", "necessary-bound"]},
            "target": {"type": "number", "minimum": 0}, "k": {"type": "number", "minimum": 0},
            "K": {"type": "number", "minimum": 1}, "a": _COMPLEX, "disk": _HDISK,
            "f": {"type": "string"}, "psi": {"type": "string"}},
            "required": ["name"], "additionalProperties": False}},
    }, ("criteria",)),
    "gallery": _cmd("gallery", {
        "cases": {"oneOf": [{"const": "all"}, {"type": "array", "minItems": 1, "items": {
            "type": "object", "properties": {"id": {"enum": [c for c, _ in gallery_mod.list_cases()]},
                                             "params": {"type": "object"}},
            "required": ["id"], "additionalProperties": False}}]},
    }, ("cases",)),
    "chain": _cmd("chain", {
        "construction": {"enum": ["becker-pommerenke", "schwarzian", "translation", "exponential",
                                  "starlike-infinity"]},
        "h": {"type": "string"}, "f": {"type": "string"}, "omega": _COMPLEX,
        "k": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}, "disk": _HDISK,
        "C1": {"type": "number", "exclusiveMinimum": 0}, "C2": {"type": "number", "exclusiveMinimum": 0},
        "a": {"type": "number"}, "horizon": {"type": "number", "exclusiveMinimum": 0},
        "times": _TIMES, "grid": _GRID, "check_grid": _GRID,
        "ratio_floor": {"type": "number", "exclusiveMinimum": 0},
    }, ("construction", "h")),
}


def _complex(v) -> complex:
    if isinstance(v, dict):
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def _params(cfg):
    out = {}
    for k, v in cfg.get("params", {}).items():
        c = _complex(v)
        out[k] = c.real if c.imag == 0 else c
    return out


def _times(spec):
    if isinstance(spec, list):
        ts = [float(x) for x in spec]
    else:
        ts = list(np.linspace(spec["start"], spec["stop"], spec["num"]))
    if any(b < a for a, b in zip(ts[:-1], ts[1:])):
        raise ConfigError("times must be increasing")
    return ts


def _grid(spec, default=None):
    if spec is None:
        return default
    return Grid(spec["xmin"], spec["xmax"], spec["ymin"], spec["ymax"], spec["nx"], spec["ny"],
                logx=spec.get("logx", False))


def _hdisk(spec):
    return HyperbolicDisk(_complex(spec["center"]), float(spec["radius"]))


def _field(cfg):
    fs = cfg["field"]
    return field_from_expr(fs["expr"], _params(cfg), breakpoints=fs.get("breakpoints", ()))


_CHECK_GRID = Grid(1e-3, 1e3, -50.0, 50.0, 21, 21, logx=True)


def _family(cfg, args=None, times=()):
    """Evolution family for the configured field; Re p >= 0 is sampled first."""
    sv = cfg.get("solver", {})
    p = _field(cfg)
    rep = validate(p, _CHECK_GRID, sorted(set([0.0, *times])))
    if not (rep.hf3_passed and rep.nonfinite == 0) and not (args is not None and args.force):
        raise HypothesisError(f"field is not Herglotz on the samples: min Re p = {rep.min_re:.6g}, "
                              f"non-finite values: {rep.nonfinite}")
    return EvolutionFamily(p, rtol=sv.get("rtol", 1e-9), atol=sv.get("atol", 1e-12),
                           max_step=sv.get("max_step", math.inf))


def _holo(cfg, key, domain=None):
    if key not in cfg:
        raise ConfigError(f"missing '{key}' expression")
    kw = {"domain": domain} if domain is not None else {}
    return holomap_from_expr(cfg[key], _params(cfg), **kw)


def load_config(path, command):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    cfg.setdefault("command", command)
    if cfg["command"] != command:
        raise ConfigError(f"config is for '{cfg['command']}', not '{command}'")
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {exc.message}") from exc
    return cfg


# ---------------------------------------------------------------- output


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def write_outputs(out_dir, files: dict):
    os.makedirs(out_dir, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, os.path.join(out_dir, name)))
        for tmp, dst in staged:
            os.replace(tmp, dst)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _results(command, passed, payload):
    doc = {"command": command, "passed": bool(passed), **payload}
    return json.dumps(jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------- commands


def cmd_evolve(cfg, args):
    ts = _times(cfg["times"])
    E = _family(cfg, args, ts)
    z = _complex(cfg["z"])
    s = float(cfg.get("s", 0.0))
    if ts[0] < s:
        raise ConfigError("times must start at or after s")
    rows = E.trajectory(s, ts, z)
    table = [(t, w.real, w.imag, d.real, d.imag) for t, w, d in rows]
    files = {
        "trajectory.csv": _csv(TRAJECTORY_HEADER, table),
        "trajectory.svg": curves_svg([[w for _, w, _ in rows]]),
        "results.json": _results("evolve", True, {"field": E.field.name, "z": z, "s": s,
                                                  "final": {"t": ts[-1], "w": rows[-1][1], "dw": rows[-1][2]}}),
    }
    return EXIT_OK, files, f"phi_{{{s:g},{ts[-1]:g}}}({z:g}) = {rows[-1][1]:.12g}"


def cmd_alpha(cfg, args):
    ts = _times(cfg["times"])
    E = _family(cfg, args, ts)
    al = E.alpha_schedule(ts)
    files = {
        "alpha.csv": _csv(ALPHA_HEADER, list(zip(ts, al))),
        "alpha.svg": curves_svg([np.array(ts) + 1j * np.array(al)]),
        "results.json": _results("alpha", True, {"field": E.field.name, "times": ts, "alpha": al,
                                                 "min_alpha": min(al)}),
    }
    return EXIT_OK, files, f"alpha({ts[-1]:g}) = {al[-1]:.12g}, min = {min(al):.12g}"


_DEFAULT_EXT_GRID = {"xmin": -3.0, "xmax": 3.0, "ymin": -3.0, "ymax": 3.0, "nx": 60, "ny": 60}


def _chain(cfg, construction):
    h = _holo(cfg, "h")
    if construction == "becker-pommerenke":
        return chain_becker_pommerenke(h)
    if construction in ("schwarzian", "schwarzian-chain"):
        return chain_schwarzian(h)
    if construction == "translation":
        return chain_translation(h, _complex(cfg.get("omega", 1.0)), cfg.get("k"))
    if construction == "exponential":
        return chain_exponential(h, _hdisk(cfg["disk"]) if "disk" in cfg else None,
                                 _grid(cfg.get("check_grid") or cfg.get("grid")))
    if construction == "starlike-infinity":
        return chain_starlike_infinity(h, _holo(cfg, "f"))
    raise ConfigError(f"unknown chain construction {construction}")


_BP_GRID = Grid(1e-3, 1e2, -50.0, 50.0, 41, 41, logx=True)


def _bp_hypothesis(h, cfg):
    rep = becker_pommerenke_k(h, _grid(cfg.get("check_grid"), _BP_GRID))
    return rep.value < 1.0, f"sampled 2 Re z |h''/h'| reaches {rep.value:.6g}"


def cmd_extend(cfg, args):
    kind = cfg["construction"]
    k = float(cfg["k_target"])
    eps = float(cfg.get("eps", 1e-4))
    gspec = cfg.get("grid", _DEFAULT_EXT_GRID)
    rect = (gspec["xmin"] - 1.0, gspec["xmax"] + 1.0, gspec["ymin"] - 1.0, gspec["ymax"] + 1.0)
    grid = _grid(gspec)
    t = float(cfg.get("t", 0.0))
    rho = float(cfg.get("rho", 0.0))
    hyp = {"checked": True, "forced": bool(args.force)}

    def hypothesis(ok, why):
        hyp.update(ok=bool(ok), detail=why)
        if not ok and not args.force:
            raise HypothesisError(why)

    if kind == "evolution":
        F = extend_evolution(_family(cfg, args, (float(cfg.get("s", 0.0)), t)), float(cfg.get("s", 0.0)), t,
                             rho, eps, rect)
        hyp.update(ok=True, detail="field validity is checked along trajectories")
    elif kind == "schwarzian":
        h = _holo(cfg, "h")
        F = extend_schwarzian(h, eps, rect, _grid(cfg.get("check_grid")), k)
        hypothesis(F.flags["hypothesis_ok"] and F.flags["tends_to_infinity"],
                   f"sampled 2(Re z)^2|Sh| = {F.flags['k_sampled']:.6g}, h -> inf: {F.flags['tends_to_infinity']}")
    elif kind == "halfplane-linear":
        h = _holo(cfg, "h")
        try:
            F = extend_halfplane_linear(h, eps=eps, rect=rect, grid=_grid(cfg.get("check_grid")))
            hyp.update(ok=True, detail=f"derivative disk margin {F.flags['membership_margin']}")
        except HypothesisError as exc:
            hypothesis(False, str(exc))
            F = extend_halfplane_linear(h, eps=eps, rect=rect, grid=_grid(cfg.get("check_grid")), check=False)
    elif kind == "log-lift":
        f = _holo(cfg, "f", UNIT_DISK)
        F = extend_log_lift(f, K_bound=cfg.get("K_bound", math.inf), eps=eps, rect=rect)
        hyp.update(ok=True, detail=f"K = {F.flags['K']:.6g}")
    else:
        c = _chain(cfg, kind)
        if kind == "becker-pommerenke":
            hypothesis(*_bp_hypothesis(_holo(cfg, "h"), cfg))
        elif kind == "exponential" and "membership_ok" in c.flags:
            hypothesis(c.flags["membership_ok"], f"membership margin {c.flags['membership_margin']:.3g}")
        F = extend_chain(c, t, rho, eps, rect)

    rep = dilatation_report(F, grid, k, cfg.get("step"), cfg.get("tol", 1e-3), threads=args.threads)
    ys = cfg.get("seam_y", list(np.linspace(gspec["ymin"], gspec["ymax"], 13)))
    seams = [seam_check(F, ys, seam=s) for s in F.seams]
    ig = _grid(cfg.get("image_grid"), Grid(gspec["xmin"], gspec["xmax"], gspec["ymin"], gspec["ymax"], 13, 13))
    inj = injectivity_check(F, ig)
    buf = io.StringIO()
    rep.write_csv(buf)
    seam_rows = [(s, e, r) for s, sr in zip(F.seams, seams) for e, r in zip(sr.details["eps"], sr.details["residuals"])]
    mu_full = np.full(grid.points().shape, np.nan)
    keep = {complex(p): abs(m) for p, m in zip(rep.points, rep.mu)}
    for i, p in enumerate(grid.points()):
        mu_full[i] = keep.get(complex(p), np.nan)
    passed = rep.passed and all(s.passed for s in seams) and inj.passed
    files = {
        "dilatation.csv": buf.getvalue(),
        "seam.csv": _csv(SEAM_HEADER, seam_rows),
        "grid_image.svg": grid_image_svg(F.eval, ig),
        "mu_heatmap.svg": heatmap_svg(grid, mu_full, vmax=max(k, 1e-12) if k > 0 else None),
        "results.json": _results("extend", passed, {
            "construction": kind, "k_target": k, "hypothesis": hyp, "dilatation": rep.to_dict(),
            "seams": [s.to_dict() for s in seams], "injectivity": inj.to_dict(),
            "flags": {kk: v for kk, v in F.flags.items() if kk != "disk"}}),
    }
    code = EXIT_OK if passed else EXIT_CRITERION
    return code, files, f"sup|mu| = {rep.sup_abs_mu:.6g} (target {k:g}); seams ok: {all(s.passed for s in seams)}"


def cmd_criteria(cfg, args):
    grid = _grid(cfg.get("grid"))
    dg = cfg.get("disk_grid")
    dgrid = DiskGrid(dg["rmin"], dg["rmax"], dg["nr"], dg["ntheta"]) if dg else None
    reports = []
    h = None
    for item in cfg["criteria"]:
        name = item["name"]
        target = item.get("target")
        if name in ("becker-pommerenke", "nehari-qc", "derivative-disk", "qc2", "ab", "necessary-bound"):
            h = h or _holo(cfg, "h")
        if name == "becker-pommerenke":
            r = becker_pommerenke_k(h, grid, target)
        elif name == "nehari-qc":
            r = nehari_qc_k(h, grid, target)
        elif name == "derivative-disk":
            r = derivative_disk_k(h, grid, target)
        elif name == "zf-over-f":
            r = zf_over_f_check(holomap_from_expr(item["f"], _params(cfg), UNIT_DISK), item.get("K"), dgrid)
        elif name == "qc2":
            r = qc2_check(h, _complex(item.get("a", 0.0)), _hdisk(item["disk"]), grid, target)
        elif name == "ab":
            r = ab_check(h, holomap_from_expr(item["f"], _params(cfg)), _hdisk(item["disk"]), grid, target)
        elif name == "psi-prime":
            r = psi_prime_k(holomap_from_expr(item["psi"], _params(cfg), UNIT_DISK), dgrid, target)
        else:
            r = necessary_bound_check(h, item.get("k"), grid)
        demanded = target is not None or (name == "necessary-bound" and item.get("k") is not None) or \
            (name == "zf-over-f" and item.get("K") is not None)
        if name == "necessary-bound":
            ok = not r.extra.get("excludes_k", False) and r.admissible
        elif name == "zf-over-f" and item.get("K") is not None:
            ok = r.admissible and r.value <= item["K"] * (1 + 1e-9)
        elif name in ("qc2", "ab") and target is None:
            ok = r.admissible and r.margin <= 1e-10
        else:
            ok = r.passed
        reports.append((name, r, demanded, ok))
    failed = [n for n, _, d, ok in reports if d and not ok]
    rows = [(n, r.k_min, r.value, r.margin if r.margin is not None else "", r.target if r.target is not None else "",
             ok) for n, r, _, ok in reports]
    files = {
        "criteria.csv": _csv(CRITERIA_HEADER, rows),
        "results.json": _results("criteria", not failed, {
            "criteria": [{**{k: v for k, v in r.to_dict().items() if k != "extra"},
                          "extra": {k: v for k, v in r.extra.items() if k != "B"},
                          "demanded": d, "ok": ok} for _, r, d, ok in reports],
            "failed": failed}),
    }
    summary = "; ".join(f"{n}: k_min={r.k_min:.6g}" for n, r, _, _ in reports)
    return (EXIT_CRITERION if failed else EXIT_OK), files, summary


def cmd_gallery(cfg, args):
    cases = cfg["cases"]
    if cases == "all":
        cases = [{"id": c} for c, _ in gallery_mod.list_cases()]
    reports = []
    for item in cases:
        try:
            case = gallery_mod.build(item["id"], item.get("params", {}))
        except ArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        reports.append((case, gallery_mod.run(case, threads=args.threads)))
    rows = []
    for case, rep in reports:
        for e in rep.details["expectations"]:
            rows.append((case.id, e["name"], e.get("value", ""), e.get("expected", ""), e.get("error", ""),
                         e.get("tol", ""), e["provenance"], e["passed"]))
    passed = all(r.passed for _, r in reports)
    files = {
        "gallery.csv": _csv(GALLERY_HEADER, rows),
        "results.json": _results("gallery", passed, {"cases": [r.to_dict() for _, r in reports]}),
    }
    summary = ", ".join(f"{c.id}: {'pass' if r.passed else 'FAIL'}" for c, r in reports)
    return (EXIT_OK if passed else EXIT_CRITERION), files, summary


def cmd_chain(cfg, args):
    c = _chain(cfg, cfg["construction"])
    times = _times(cfg["times"]) if "times" in cfg else None
    rep = chain_criteria_report(c, cfg.get("C1"), cfg.get("C2"), cfg.get("a", 0.0), cfg.get("horizon", 10.0),
                                _grid(cfg.get("grid")), times, cfg.get("ratio_floor", 0.05))
    u = rep.details["univalence"]
    files = {
        "chain.csv": _csv(CHAIN_HEADER, list(zip(u["times"], u["min_ratio"]))),
        "results.json": _results("chain", rep.passed, {"construction": c.provenance, "report": rep.to_dict()}),
    }
    return (EXIT_OK if rep.passed else EXIT_CRITERION), files, f"chain criteria: {'pass' if rep.passed else 'FAIL'}"


DISPATCH = {"evolve": cmd_evolve, "extend": cmd_extend, "criteria": cmd_criteria, "gallery": cmd_gallery,
            "alpha": cmd_alpha, "chain": cmd_chain}


def build_parser():
    ap = argparse.ArgumentParser(prog="loewner-qc", description="Loewner chains and quasiconformal extensions")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON config document")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--force", action="store_true", help="build extensions even when a hypothesis check fails")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sampling scans")
    return ap


def run(argv=None):
    """Run the CLI; returns the exit code instead of exiting."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.command)
        code, files, summary = DISPATCH[args.command](cfg, args)
    except (ConfigError, ArgumentError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc} (use --force to override)", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (SolverError, EvaluationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except LoewnerQCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_outputs(args.out, files)
    print(summary)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
