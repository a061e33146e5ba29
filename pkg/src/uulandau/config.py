"""Strict JSON run configuration.

One file drives every subcommand; unknown keys anywhere are rejected and all
values are validated against the module preconditions before any compute
starts.  Error messages carry the full key path.
"""

import json
import math

from .errors import DataError
from .fields import SmoothField
from .grid import NormSpec, VelocityGrid
from .kernel import AngularQuadrature
from .operators import CollisionQuadrature
from .potential import Potential

_ALLOWED = {
    "": {"potential", "kernel", "grid", "quadrature", "evolve", "norm",
         "limit", "initial", "output"},
    "potential": {"kind", "amplitude", "width", "table_path"},
    "kernel": {"statistics", "eps", "eps_list"},
    "grid": {"n", "L"},
    "quadrature": {"n_r", "n_phi", "vstar_mode", "rel_cut", "interpolation"},
    "evolve": {"dt", "t_final", "clamp", "conservation_projection",
               "snapshot_stride"},
    "norm": {"N", "l", "p"},
    "limit": {"theta", "norm"},
    "initial": {"kind", "rho", "temperature", "beta", "shift", "amplitude",
                "center", "width"},
    "output": {"directory"},
}

DEFAULTS = {
    "potential": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0},
    "kernel": {"statistics": "fermi", "eps": 0.5},
    "grid": {"n": 16, "L": 5.0},
    "quadrature": {"n_r": 8, "n_phi": 8, "vstar_mode": "thresholded",
                   "rel_cut": 1e-8, "interpolation": "tricubic"},
    "evolve": {"dt": None, "t_final": 0.1, "clamp": True,
               "conservation_projection": False, "snapshot_stride": 1},
    "norm": {"N": 0, "l": 2.0, "p": 2},
    "limit": {"theta": 1.0},
    "initial": {"kind": "maxwellian", "rho": 1.0, "temperature": 1.0},
    "output": {"directory": "./out"},
}


class ConfigError(DataError):
    """Configuration validation failure (CLI exit code 2)."""


def _fail(path, msg):
    raise ConfigError(f"config key '{path}': {msg}")


def _expect(cond, path, msg):
    if not cond:
        _fail(path, msg)


def _check_keys(obj, section):
    allowed = _ALLOWED[section]
    for k in obj:
        if k not in allowed:
            _fail(f"{section}.{k}" if section else k, "unknown key")


def _number(v, path, lo=None, hi=None, integer=False):
    _expect(isinstance(v, (int, float)) and not isinstance(v, bool), path,
            f"expected a number, got {v!r}")
    _expect(math.isfinite(v), path, "must be finite")
    if integer:
        _expect(float(v).is_integer(), path, "must be an integer")
    if lo is not None:
        _expect(v >= lo, path, f"must be >= {lo}")
    if hi is not None:
        _expect(v <= hi, path, f"must be <= {hi}")
    return int(v) if integer else float(v)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return validate(raw)


def validate(raw):
    """Merge with defaults and validate; returns the resolved plain dict."""
    _expect(isinstance(raw, dict), "", "top level must be an object")
    _check_keys(raw, "")
    cfg = {}
    for section, defaults in DEFAULTS.items():
        given = raw.get(section, {})
        _expect(isinstance(given, dict), section, "must be an object")
        _check_keys(given, section)
        merged = {**defaults, **given}
        cfg[section] = merged

    p = cfg["potential"]
    _expect(p["kind"] in ("gaussian", "bump", "tabulated", "zero"),
            "potential.kind", f"unknown kind {p['kind']!r}")
    if p["kind"] == "tabulated":
        _expect("table_path" in p and isinstance(p["table_path"], str),
                "potential.table_path", "required for tabulated potentials")
    if "amplitude" in p:
        _number(p["amplitude"], "potential.amplitude")
    if "width" in p:
        _number(p["width"], "potential.width", lo=1e-12)

    k = cfg["kernel"]
    _expect(k["statistics"] in ("bose", "fermi"), "kernel.statistics",
            "must be 'bose' or 'fermi'")
    if k.get("eps") is not None:
        e = _number(k["eps"], "kernel.eps")
        _expect(0.0 < e <= 1.0, "kernel.eps", "must lie in (0, 1]")
    if "eps_list" in k and k["eps_list"] is not None:
        _expect(isinstance(k["eps_list"], list) and k["eps_list"],
                "kernel.eps_list", "must be a nonempty list")
        for i, e in enumerate(k["eps_list"]):
            e = _number(e, f"kernel.eps_list[{i}]")
            _expect(0.0 < e <= 1.0, f"kernel.eps_list[{i}]", "must lie in (0, 1]")

    g = cfg["grid"]
    n = _number(g["n"], "grid.n", lo=8, integer=True)
    _expect(n % 2 == 0, "grid.n", "must be even")
    _number(g["L"], "grid.L", lo=1e-12)

    q = cfg["quadrature"]
    _number(q["n_r"], "quadrature.n_r", lo=4, integer=True)
    _number(q["n_phi"], "quadrature.n_phi", lo=4, integer=True)
    _expect(q["vstar_mode"] in ("full", "thresholded"), "quadrature.vstar_mode",
            "must be 'full' or 'thresholded'")
    rc = _number(q["rel_cut"], "quadrature.rel_cut", lo=0.0)
    _expect(rc <= 1e-8, "quadrature.rel_cut", "must be <= 1e-8")
    _expect(q["interpolation"] in ("tricubic", "trilinear"),
            "quadrature.interpolation", "must be 'tricubic' or 'trilinear'")

    ev = cfg["evolve"]
    if ev["dt"] is not None:
        _number(ev["dt"], "evolve.dt", lo=1e-300)
    _number(ev["t_final"], "evolve.t_final", lo=1e-300)
    _expect(isinstance(ev["clamp"], bool), "evolve.clamp", "must be a bool")
    _expect(isinstance(ev["conservation_projection"], bool),
            "evolve.conservation_projection", "must be a bool")
    _number(ev["snapshot_stride"], "evolve.snapshot_stride", lo=0, integer=True)

    nm = cfg["norm"]
    _number(nm["N"], "norm.N", lo=0, integer=True)
    _number(nm["l"], "norm.l", lo=0.0)
    _expect(nm["p"] in (1, 2, "inf"), "norm.p", "must be 1, 2 or 'inf'")

    lm = cfg["limit"]
    th = _number(lm["theta"], "limit.theta")
    _expect(0.0 < th <= 1.0, "limit.theta", "must lie in (0, 1]")
    if "norm" in lm and lm["norm"] is not None:
        _expect(isinstance(lm["norm"], dict), "limit.norm", "must be an object")
        for kk in lm["norm"]:
            _expect(kk in ("N", "l", "p"), f"limit.norm.{kk}", "unknown key")

    ini = cfg["initial"]
    _expect(ini["kind"] in ("maxwellian", "perturbed_maxwellian",
                            "fd_equilibrium", "zero"),
            "initial.kind", f"unknown kind {ini['kind']!r}")

    out = cfg["output"]
    _expect(isinstance(out["directory"], str), "output.directory",
            "must be a string")
    return cfg


# -- builders ------------------------------------------------------------------

def build_potential(cfg):
    p = cfg["potential"]
    if p["kind"] == "gaussian":
        return Potential.gaussian(p.get("amplitude", 1.0), p.get("width", 1.0))
    if p["kind"] == "bump":
        return Potential.bump(p.get("amplitude", 1.0))
    if p["kind"] == "zero":
        return Potential.zero()
    return Potential.from_csv(p["table_path"])


def build_grid(cfg):
    return VelocityGrid(cfg["grid"]["n"], cfg["grid"]["L"])


def build_quadrature(cfg):
    q = cfg["quadrature"]
    ang = AngularQuadrature(q["n_r"], q["n_phi"])
    mode = ("full",) if q["vstar_mode"] == "full" else ("thresholded", q["rel_cut"])
    return CollisionQuadrature(angular=ang, vstar_mode=mode,
                               interpolation=q["interpolation"])


def build_norm(cfg, override=None):
    nm = dict(cfg["norm"])
    if override:
        nm.update(override)
    p = math.inf if nm["p"] == "inf" else nm["p"]
    return NormSpec(nm["N"], nm["l"], p)


def build_initial(cfg, eps=None):
    ini = cfg["initial"]
    kind = ini["kind"]
    if kind == "zero":
        return SmoothField.gaussian(0.0, (0, 0, 0), 1.0)
    if kind == "maxwellian":
        shift = ini.get("shift", (0.0, 0.0, 0.0))
        return SmoothField.maxwellian(ini.get("rho", 1.0),
                                      ini.get("temperature", 1.0), shift)
    if kind == "perturbed_maxwellian":
        return SmoothField.perturbed_maxwellian(
            ini.get("rho", 1.0), ini.get("temperature", 1.0),
            ini.get("amplitude", 0.3), ini.get("center", (0.8, 0.0, 0.0)),
            ini.get("width", 1.2))
    if eps is None:
        eps = cfg["kernel"].get("eps") or 0.5
    return SmoothField.fd_equilibrium(eps, ini.get("beta", 1.0), 0.0)
