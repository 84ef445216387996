"""Command-line entry point.

Every subcommand is turned into a config object ``{"operation", "space",
"params", "output"}`` which is schema-checked and then dispatched by
:func:`run`. ``--config file.json`` overrides values given as flags. The JSON
report always embeds the resolved config.

Exit codes: 0 ok, 1 computation error, 2 usage / schema error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import jsonschema
import numpy as np

from ._pool import ENV_WORKERS

OPERATIONS = {
    "model-tau",
    "model-diameter",
    "curve-tau-length",
    "frechet",
    "geodesic-shoot",
    "geodesic-bvp",
    "conjugate-classify",
    "cutlocus",
    "compare-triangle",
    "compare-rauch",
    "experiment-cartan-hadamard",
    "experiment-injectivity",
}

_vec = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_pos = {"type": "number", "exclusiveMinimum": 0}

SPACE_SCHEMA = {
    "type": "object",
    "required": ["space"],
    "properties": {
        "space": {"enum": ["minkowski", "model_k", "product"]},
        "K": {"type": "number"},
        "dim": {"type": "integer", "minimum": 2},
        "fiber": {"enum": ["flat", "sphere", "ellipsoid"]},
        "radius": _pos,
        "a": _pos,
        "b": _pos,
    },
}

PARAM_SCHEMA = {
    "type": "object",
    "properties": {
        "x": _vec,
        "y": _vec,
        "point": _vec,
        "velocity": _vec,
        "p": _vec,
        "q": _vec,
        "t_max": _pos,
        "seeds": {"type": "integer", "minimum": 0},
        "rings": {"type": "integer", "minimum": 1},
        "eps0": _pos,
        "kappa": _pos,
        "scheme": {"enum": ["rings", "neighbor"]},
        "tol": _pos,
        "gap": _pos,
        "dgamma": {"type": "boolean"},
        "samples": {"type": "integer", "minimum": 2},
        "curve": {"type": "string"},
        "curve_a": {"type": "string"},
        "curve_b": {"type": "string"},
        "geodesic": {"type": "string"},
        "params": {"type": "array", "items": _pos, "minItems": 1},
        "radii": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "points": {"type": "array", "items": _vec, "minItems": 1},
        "directions": {"type": "integer", "minimum": 1},
        "sides": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 3, "maxItems": 3},
        "lengths": {"type": "array", "items": _pos, "minItems": 1},
        "margin": _pos,
        "K": {"type": "number"},
        "radius": _pos,
        "per_axis": {"type": "integer", "minimum": 2},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["operation"],
    "properties": {
        "operation": {"enum": sorted(OPERATIONS)},
        "space": SPACE_SCHEMA,
        "params": PARAM_SCHEMA,
        "workers": {"type": "integer", "minimum": 1},
        "output": {
            "type": "object",
            "properties": {"json": {"type": "string"}, "csv": {"type": "string"}},
        },
    },
}


class ConfigError(ValueError):
    """Config does not match the schema; carries the offending path."""

    def __init__(self, message, path):
        super().__init__(message)
        self.path = path


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/" + "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(exc.message, path) from None
    needs_space = cfg["operation"] not in {"frechet", "compare-triangle", "compare-rauch", "model-diameter"}
    if needs_space and "space" not in cfg:
        raise ConfigError("'space' is required for this operation", "/space")


# -- JSON helpers ---------------------------------------------------------


def _clean(obj):
    """Make obj strictly JSON-serializable; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


# -- operations -------------------------------------------------------------


def _space(cfg):
    from .space import space_from_descriptor

    return space_from_descriptor(cfg["space"])


def _need(params, *keys):
    for k in keys:
        if k not in params:
            raise ConfigError(f"missing parameter {k!r}", f"/params/{k}")


def _read_geodesic(path):
    with open(path) as fh:
        d = json.load(fh)
    point = d.get("point", d.get("initial_point"))
    vel = d.get("velocity", d.get("initial_velocity"))
    if point is None or vel is None:
        raise ConfigError("geodesic file needs point and velocity", "/params/geodesic")
    return np.asarray(point, float), np.asarray(vel, float), float(d.get("t_max", 1.0))


def _op_model_tau(cfg, P):
    from .model import ModelSpace

    _need(P, "x", "y")
    st = _space(cfg)
    if not isinstance(st, ModelSpace):
        raise ConfigError("model-tau needs a minkowski or model_k space", "/space/space")
    return {"tau": st.time_sep(P["x"], P["y"]), "causal": st.causal_query(P["x"], P["y"])}, None


def _op_model_diameter(cfg, P):
    from .model import timelike_diameter

    K = P.get("K", cfg.get("space", {}).get("K", 0.0))
    return {"K": K, "timelike_diameter": timelike_diameter(K)}, None


def _op_curve_tau_length(cfg, P):
    from .curves import classify_character, l_g_length, read_curve_csv, tau_length

    _need(P, "curve")
    st = _space(cfg)
    c = read_curve_csv(P["curve"], space=st)
    tl = tau_length(c)
    out = {
        "tau_length": tl.value,
        "refinement_gap": tl.gap,
        "character": classify_character(c),
        "lipschitz_constant": c.lipschitz_constant(),
    }
    if hasattr(st, "metric"):
        out["l_g_length"] = l_g_length(c, st)
    return out, None


def _op_frechet(cfg, P):
    from .curves import read_curve_csv, tau_length
    from .frechet import frechet_refine

    _need(P, "curve_a", "curve_b")
    st = _space(cfg) if "space" in cfg else None
    a = read_curve_csv(P["curve_a"], space=st)
    b = read_curve_csv(P["curve_b"], space=st)
    res = frechet_refine(a, b, target_gap=P.get("gap", 1e-4))
    out = res.to_dict()
    if P.get("dgamma"):
        if st is None:
            raise ConfigError("d_Gamma needs a space", "/space")
        out["length_difference"] = abs(tau_length(a).value - tau_length(b).value)
        out["d_gamma"] = out["value"] + out["length_difference"]
    return out, None


def _op_geodesic_shoot(cfg, P):
    from .geodesic import integrate_geodesic

    _need(P, "point", "velocity")
    st = _space(cfg)
    sol = integrate_geodesic(st, P["point"], P["velocity"], P.get("t_max", 1.0))
    m = P.get("samples", 65)
    pts = sol.sample(m)
    ts = np.linspace(0.0, sol.t_max, m)
    rows = [[t, *x] for t, x in zip(ts, pts)]
    header = ["s"] + [f"x{i}" for i in range(st.dim)]
    return sol.to_dict(), _csv_text(header, rows)


def _op_geodesic_bvp(cfg, P):
    from .geodesic import solve_bvp

    _need(P, "p", "q")
    st = _space(cfg)
    sols = solve_bvp(st, P["p"], P["q"], seeds=P.get("seeds", 8))
    out = {"count": len(sols), "solutions": [s.to_dict() for s in sols]}
    if hasattr(st, "time_sep"):
        out["time_sep"] = st.time_sep(P["p"], P["q"])
    return out, None


def _op_conjugate_classify(cfg, P):
    from .conjugate import classify
    from .geodesic import integrate_geodesic

    st = _space(cfg)
    if "geodesic" in P:
        p, v, t = _read_geodesic(P["geodesic"])
    else:
        _need(P, "point", "velocity")
        p, v, t = np.asarray(P["point"], float), np.asarray(P["velocity"], float), P.get("t_max", 1.0)
    sol = integrate_geodesic(st, p, v, t)
    keys = ("rings", "eps0", "kappa", "seeds", "scheme")
    rep = classify(st, sol, {k: P[k] for k in keys if k in P})
    out = rep.to_dict()
    out["geodesic"] = sol.to_dict()
    return out, None


def _op_cutlocus(cfg, P):
    from .conjugate import cut_scan, unit_directions

    _need(P, "point", "params")
    st = _space(cfg)
    p = np.asarray(P["point"], float)
    dirs = unit_directions(st, p, count=P.get("directions", 5))
    scan = cut_scan(st, p, P["params"], directions=dirs, seeds=P.get("seeds", 8))
    rows = [[k, s, *np.asarray(x).tolist(), c] for k, s, x, c in scan.targets]
    header = ["direction", "param"] + [f"x{i}" for i in range(st.dim)] + ["maximizers"]
    return scan.to_dict(), _csv_text(header, rows)


def _op_compare_triangle(cfg, P):
    from .comparison import realize_triangle

    _need(P, "sides")
    K = P.get("K", cfg.get("space", {}).get("K", 0.0))
    tri = realize_triangle(P["sides"], K)
    rows = [[lab, *np.asarray(c).tolist()] for lab, c in zip("xyz", tri.coords)]
    return tri.to_dict(), _csv_text(["vertex", "t", "x"], rows)


def _op_compare_rauch(cfg, P):
    from .comparison import rauch_experiment
    from .model import ModelSpace

    _need(P, "lengths")
    K = P.get("K", cfg.get("space", {}).get("K", -1.0))
    st = ModelSpace(K, 2) if "space" not in cfg else _space(cfg)
    res = rauch_experiment(st, K, P["lengths"], rings=P.get("rings", 6), eps0=P.get("eps0", 0.1), margin=P.get("margin", 0.05))
    rows = [[r["L"], int(r["symmetric"]), r["rings_checked"]] for r in res["rows"]]
    return res, _csv_text(["L", "symmetric", "rings_checked"], rows)


def _op_cartan_hadamard(cfg, P):
    from .comparison import cartan_hadamard_experiment
    from .geodesic import integrate_geodesic

    _need(P, "point", "velocity")
    st = _space(cfg)
    sol = integrate_geodesic(st, P["point"], P["velocity"], P.get("t_max", 1.0))
    spec = {k: P[k] for k in ("radius", "per_axis", "rings") if k in P}
    return cartan_hadamard_experiment(st, sol, spec, tol=P.get("tol")), None


def _op_injectivity(cfg, P):
    from .conjugate import injectivity_radii, unit_directions

    _need(P, "points", "params", "radii")
    st = _space(cfg)
    pts = [np.asarray(x, float) for x in P["points"]]
    dirs = None
    if "directions" in P:
        dirs = unit_directions(st, pts[0], count=P["directions"])
    return injectivity_radii(st, pts, P["params"], P["radii"], directions=dirs, seeds=P.get("seeds", 8)), None


_DISPATCH = {
    "model-tau": _op_model_tau,
    "model-diameter": _op_model_diameter,
    "curve-tau-length": _op_curve_tau_length,
    "frechet": _op_frechet,
    "geodesic-shoot": _op_geodesic_shoot,
    "geodesic-bvp": _op_geodesic_bvp,
    "conjugate-classify": _op_conjugate_classify,
    "cutlocus": _op_cutlocus,
    "compare-triangle": _op_compare_triangle,
    "compare-rauch": _op_compare_rauch,
    "experiment-cartan-hadamard": _op_cartan_hadamard,
    "experiment-injectivity": _op_injectivity,
}


def run(cfg):
    """Validate and execute a config. Returns (report dict, csv text or None).

    Raises ConfigError on schema problems; computation errors propagate.
    """
    validate_config(cfg)
    if "workers" in cfg:
        os.environ[ENV_WORKERS] = str(cfg["workers"])
    P = dict(cfg.get("params", {}))
    result, table = _DISPATCH[cfg["operation"]](cfg, P)
    report = {"config": cfg, "result": result}
    if "space" in cfg and cfg["operation"] != "compare-triangle":
        report["distance"] = "euclidean chart metric"
    return report, table


# -- argument parsing -----------------------------------------------------------


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _points(text):
    return [_floats(chunk) for chunk in text.split(";") if chunk.strip()]


def _descriptor(text):
    if os.path.isfile(text):
        with open(text) as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"space must be a JSON descriptor or a file: {text!r}") from None


def _add_space(p):
    p.add_argument("--space", type=_descriptor, default=None, help="JSON space descriptor or file")


def _add_schedule(p):
    p.add_argument("--rings", type=int)
    p.add_argument("--eps0", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--seeds", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="lorentzconj", description="Synthetic Lorentzian geometry toolkit")
    ap.add_argument("--config", help="JSON config file; its values override flags")
    ap.add_argument("--workers", type=int, help=f"worker pool size (default: ${ENV_WORKERS} or CPU count)")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--csv", help="write tabular data here (operations that produce tables)")
    ap.add_argument("--format", choices=["json", "csv"], default="json", help="stdout format (csv: the table only)")
    sub = ap.add_subparsers(dest="command")

    m = sub.add_parser("model", help="model space closed forms")
    msub = m.add_subparsers(dest="action", required=True)
    mt = msub.add_parser("tau")
    mt.add_argument("--K", type=float, default=0.0)
    mt.add_argument("--dim", type=int, default=2)
    mt.add_argument("--x", type=_floats, required=True)
    mt.add_argument("--y", type=_floats, required=True)
    md = msub.add_parser("diameter")
    md.add_argument("--K", type=float, required=True)

    c = sub.add_parser("curve", help="curve lengths")
    csub = c.add_subparsers(dest="action", required=True)
    ct = csub.add_parser("tau-length")
    ct.add_argument("file")
    _add_space(ct)

    f = sub.add_parser("frechet", help="Frechet distance between two curve files")
    f.add_argument("curve_a")
    f.add_argument("curve_b")
    f.add_argument("--dgamma", action="store_true")
    f.add_argument("--gap", type=float)
    _add_space(f)

    g = sub.add_parser("geodesic", help="geodesic integration and shooting")
    gsub = g.add_subparsers(dest="action", required=True)
    gs = gsub.add_parser("shoot")
    _add_space(gs)
    gs.add_argument("--point", type=_floats)
    gs.add_argument("--velocity", type=_floats)
    gs.add_argument("--t-max", type=float, dest="t_max")
    gs.add_argument("--samples", type=int)
    gb = gsub.add_parser("bvp")
    _add_space(gb)
    gb.add_argument("--p", type=_floats)
    gb.add_argument("--q", type=_floats)
    gb.add_argument("--seeds", type=int)

    cj = sub.add_parser("conjugate", help="conjugate point detectors")
    cjsub = cj.add_subparsers(dest="action", required=True)
    cc = cjsub.add_parser("classify")
    _add_space(cc)
    cc.add_argument("--geodesic", help="JSON file with point, velocity (and t_max)")
    cc.add_argument("--point", type=_floats)
    cc.add_argument("--velocity", type=_floats)
    cc.add_argument("--t-max", type=float, dest="t_max")
    cc.add_argument("--scheme", choices=["rings", "neighbor"])
    _add_schedule(cc)

    cl = sub.add_parser("cutlocus", help="cut points along geodesics from a point (CSV)")
    _add_space(cl)
    cl.add_argument("--point", type=_floats)
    cl.add_argument("--params", type=_floats, help="proper times to probe")
    cl.add_argument("--directions", type=int)
    cl.add_argument("--seeds", type=int)

    cp = sub.add_parser("compare", help="triangle comparison in model spaces (CSV)")
    cpsub = cp.add_subparsers(dest="action", required=True)
    tr = cpsub.add_parser("triangle")
    tr.add_argument("--K", type=float, default=0.0)
    tr.add_argument("--sides", type=_floats, required=True)
    ra = cpsub.add_parser("rauch")
    ra.add_argument("--K", type=float, required=True)
    ra.add_argument("--lengths", type=_floats, required=True)
    ra.add_argument("--margin", type=float)
    _add_schedule(ra)

    ex = sub.add_parser("experiment", help="experiment drivers")
    exsub = ex.add_subparsers(dest="action", required=True)
    ch = exsub.add_parser("cartan-hadamard")
    _add_space(ch)
    ch.add_argument("--point", type=_floats)
    ch.add_argument("--velocity", type=_floats)
    ch.add_argument("--t-max", type=float, dest="t_max")
    ch.add_argument("--radius", type=float)
    ch.add_argument("--per-axis", type=int, dest="per_axis")
    ch.add_argument("--rings", type=int)
    inj = exsub.add_parser("injectivity")
    _add_space(inj)
    inj.add_argument("--points", type=_points, help="semicolon-separated points, e.g. '0,0;0.3,0.2'")
    inj.add_argument("--params", type=_floats)
    inj.add_argument("--radii", type=_floats)
    inj.add_argument("--directions", type=int)
    inj.add_argument("--seeds", type=int)

    r = sub.add_parser("run", help="run a config file")
    r.add_argument("config_file")
    return ap


_OPNAMES = {
    ("model", "tau"): "model-tau",
    ("model", "diameter"): "model-diameter",
    ("curve", "tau-length"): "curve-tau-length",
    ("frechet", None): "frechet",
    ("geodesic", "shoot"): "geodesic-shoot",
    ("geodesic", "bvp"): "geodesic-bvp",
    ("conjugate", "classify"): "conjugate-classify",
    ("cutlocus", None): "cutlocus",
    ("compare", "triangle"): "compare-triangle",
    ("compare", "rauch"): "compare-rauch",
    ("experiment", "cartan-hadamard"): "experiment-cartan-hadamard",
    ("experiment", "injectivity"): "experiment-injectivity",
}

_GLOBAL = {"command", "action", "config", "workers", "out", "csv", "format", "space", "config_file"}


def config_from_args(ns):
    """Resolved config from parsed flags, overridden by --config file values."""
    if ns.command == "run":
        with open(ns.config_file) as fh:
            cfg = json.load(fh)
    else:
        op = _OPNAMES[(ns.command, getattr(ns, "action", None))]
        params = {k: v for k, v in vars(ns).items() if k not in _GLOBAL and v is not None}
        if op == "model-tau":
            space = {"space": "minkowski", "dim": params.pop("dim")} if params["K"] == 0 else {
                "space": "model_k",
                "K": params["K"],
                "dim": params.pop("dim"),
            }
            params.pop("K")
            cfg = {"operation": op, "space": space, "params": params}
        else:
            for src, dst in (("file", "curve"),):
                if src in params:
                    params[dst] = params.pop(src)
            cfg = {"operation": op, "params": params}
            if getattr(ns, "space", None) is not None:
                cfg["space"] = ns.space
        if ns.config:
            with open(ns.config) as fh:
                over = json.load(fh)
            for k, v in over.items():
                if k == "params" and isinstance(v, dict):
                    cfg.setdefault("params", {}).update(v)
                else:
                    cfg[k] = v
    if ns.workers is not None:
        cfg["workers"] = ns.workers
    out = dict(cfg.get("output", {}))
    if ns.out:
        out["json"] = ns.out
    if ns.csv:
        out["csv"] = ns.csv
    if out:
        cfg["output"] = out
    return cfg


def main(argv=None):
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.command is None:
        ap.print_help(sys.stderr)
        return 2
    try:
        cfg = config_from_args(ns)
        report, table = run(cfg)
    except ConfigError as exc:
        print(f"lorentzconj: config error at {exc.path}: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"lorentzconj: cannot read input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failures are reported, not raised
        print(f"lorentzconj: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = dumps(report) + "\n"
    out = cfg.get("output", {})
    if ns.format == "csv":
        if table is None:
            print(f"lorentzconj: {cfg['operation']} produces no table", file=sys.stderr)
            return 2
        sys.stdout.write(table)
        if "json" in out:
            with open(out["json"], "w") as fh:
                fh.write(text)
        return 0
    if "json" in out:
        with open(out["json"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if table is not None:
        if "csv" in out:
            with open(out["csv"], "w") as fh:
                fh.write(table)
        elif "json" in out:
            sys.stdout.write(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
