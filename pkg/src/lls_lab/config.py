"""Run configuration: YAML schema, validation, defaults.

Validation is exhaustive: every problem found is reported, each prefixed
with the dotted key path, instead of stopping at the first.
"""

import math
import os
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError

KINDS = (
    "simulate-lls",
    "simulate-gl",
    "picard",
    "check-equivalence",
    "norms",
    "verify",
    "sweep",
)
VERIFY_KINDS = ("strichartz", "linear", "nonlinear", "contraction")
V_KINDS = ("zero", "constant", "file")
INITIAL_KINDS = ("file", "single_mode", "shell_random", "sphere_perturbation")
SCHEMES_LLS = ("rk4_renorm", "heun_renorm")
SCHEMES_GL = ("etd1", "etd_rk2")
CONVENTIONS = ("section4", "section1", "geometric")

DEFAULTS = {
    "seed": 0,
    "eps": 0.1,
    "grid": {"dim": 3, "points_per_axis": 16, "period": 2.0 * math.pi},
    "time": {"dt": 1e-3, "t_end": 0.01, "store_every": 1},
    "v": {"kind": "zero"},
    "initial": {"kind": "single_mode", "mode": None, "amplitude": 1e-3, "shells": None, "max_mode": 2},
    "solver": {
        "scheme": None,  # per-kind default
        "c_stab": 0.2,
        "pole_guard": 1e-3,
        "blowup_cap": 10.0,
        "convention": "section4",
    },
    "picard": {"max_iters": 12, "tol": 1e-12},
    "norms": ["besov"],
    "verify": {
        "which": "strichartz",
        "k_range": [-1, 4],
        "eps_list": [0.01, 0.1, 0.5],
        "samples": 10,
        "amplitudes": [1e-3, 1e-2],
        "window": None,
    },
    "sweep": {
        "eps_list": [0.05, 0.1, 0.5],
        "amplitudes": [1e-4, 1e-3, 1e-2, 1e-1, 1.0],
        "v_amps": [0.0],
        "window": 0.25,
        "num_slices": 33,
    },
}


@dataclass
class RunConfig:
    kind: str
    data: dict
    path: str = ""
    overrides: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.data[key]

    def get(self, *keys, default=None):
        node = self.data
        for key in keys:
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    def resolved(self):
        return {"kind": self.kind, **self.data}


def _deep_merge(base, extra):
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def apply_override(data, dotted, raw_value):
    """Set a dotted key path to a YAML-parsed scalar/sequence value."""
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError([f"{dotted}: cannot descend into non-mapping key"])
    node[keys[-1]] = yaml.safe_load(raw_value)


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _validate(kind, data, base_dir, problems):
    eps = data.get("eps")
    if not _is_num(eps) or not (0.0 < eps <= 1.0):
        problems.append(f"eps: must be a number in (0, 1], got {eps!r}")
    seed = data.get("seed")
    if not isinstance(seed, int):
        problems.append(f"seed: must be an integer, got {seed!r}")

    grid = data.get("grid", {})
    dim = grid.get("dim")
    if dim not in (1, 2, 3):
        problems.append(f"grid.dim: must be 1, 2 or 3, got {dim!r}")
    n = grid.get("points_per_axis")
    if not isinstance(n, int) or n < 2 or (n & (n - 1)) != 0:
        problems.append(f"grid.points_per_axis: must be a power of two >= 2, got {n!r}")
    period = grid.get("period")
    if not _is_num(period) or period <= 0:
        problems.append(f"grid.period: must be positive, got {period!r}")

    time = data.get("time", {})
    if not _is_num(time.get("dt")) or time.get("dt") <= 0:
        problems.append(f"time.dt: must be positive, got {time.get('dt')!r}")
    if not _is_num(time.get("t_end")) or time.get("t_end") < 0:
        problems.append(f"time.t_end: must be nonnegative, got {time.get('t_end')!r}")
    if not isinstance(time.get("store_every"), int) or time.get("store_every") < 1:
        problems.append(f"time.store_every: must be a positive integer")

    v = data.get("v", {})
    if v.get("kind") not in V_KINDS:
        problems.append(f"v.kind: must be one of {V_KINDS}, got {v.get('kind')!r}")
    elif v["kind"] == "constant":
        vec = v.get("value")
        if not isinstance(vec, list) or not all(_is_num(x) for x in vec):
            problems.append("v.value: constant current needs a numeric vector")
        elif dim in (1, 2, 3) and len(vec) != dim:
            problems.append(f"v.value: needs {dim} components, got {len(vec)}")
    elif v["kind"] == "file":
        path = v.get("path")
        if not isinstance(path, str):
            problems.append("v.path: required for v.kind = file")
        elif not os.path.exists(os.path.join(base_dir, path)):
            problems.append(f"v.path: file not found: {path}")

    init = data.get("initial", {})
    ikind = init.get("kind")
    if ikind not in INITIAL_KINDS:
        problems.append(f"initial.kind: must be one of {INITIAL_KINDS}, got {ikind!r}")
    elif ikind == "file":
        path = init.get("path")
        if not isinstance(path, str):
            problems.append("initial.path: required for initial.kind = file")
        elif not os.path.exists(os.path.join(base_dir, path)):
            problems.append(f"initial.path: file not found: {path}")
    amp = init.get("amplitude", 0.0)
    if not _is_num(amp) or amp < 0:
        problems.append(f"initial.amplitude: must be >= 0, got {amp!r}")
    if ikind == "single_mode" and init.get("mode") is not None:
        mode = init["mode"]
        if not isinstance(mode, list) or not all(isinstance(x, int) for x in mode):
            problems.append("initial.mode: must be a list of integers")
        elif dim in (1, 2, 3) and len(mode) != dim:
            problems.append(f"initial.mode: needs {dim} components, got {len(mode)}")

    solver = data.get("solver", {})
    if kind == "simulate-lls" and solver.get("scheme") not in SCHEMES_LLS:
        problems.append(f"solver.scheme: must be one of {SCHEMES_LLS} for simulate-lls")
    if kind == "simulate-gl" and solver.get("scheme") not in SCHEMES_GL:
        problems.append(f"solver.scheme: must be one of {SCHEMES_GL} for simulate-gl")
    if solver.get("convention") not in CONVENTIONS:
        problems.append(f"solver.convention: must be one of {CONVENTIONS}")
    for key in ("c_stab", "pole_guard", "blowup_cap"):
        if not _is_num(solver.get(key)) or solver.get(key) <= 0:
            problems.append(f"solver.{key}: must be positive")

    if kind == "verify":
        ver = data.get("verify", {})
        if ver.get("which") not in VERIFY_KINDS:
            problems.append(f"verify.which: must be one of {VERIFY_KINDS}")
        kr = ver.get("k_range")
        if (
            not isinstance(kr, list)
            or len(kr) != 2
            or not all(isinstance(x, int) for x in kr)
            or kr[0] > kr[1]
        ):
            problems.append("verify.k_range: must be [k_lo, k_hi] with k_lo <= k_hi")
        if not isinstance(ver.get("samples"), int) or ver.get("samples") < 1:
            problems.append("verify.samples: must be a positive integer")
        if not all(_is_num(e) and 0 <= e <= 1 for e in ver.get("eps_list", [])):
            problems.append("verify.eps_list: entries must lie in [0, 1]")

    if kind == "sweep":
        sw = data.get("sweep", {})
        for key in ("eps_list", "amplitudes", "v_amps"):
            seq = sw.get(key)
            if not isinstance(seq, list) or not all(_is_num(x) for x in seq):
                problems.append(f"sweep.{key}: must be a numeric list")
        if not all(0 < e <= 1 for e in sw.get("eps_list", []) if _is_num(e)):
            problems.append("sweep.eps_list: entries must lie in (0, 1]")
        if not isinstance(sw.get("num_slices"), int) or sw.get("num_slices") < 8:
            problems.append("sweep.num_slices: must be an integer >= 8")

    if kind == "norms":
        names = data.get("norms")
        if not isinstance(names, list) or not names or not all(isinstance(s, str) for s in names):
            problems.append("norms: must be a nonempty list of norm names")


def load_config(path, overrides=None, kind=None):
    """Load and validate a YAML run configuration.

    Raises ConfigError carrying the complete list of validation problems.
    """
    problems = []
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"])
    except yaml.YAMLError as exc:
        raise ConfigError([f"config parse error: {exc}"])
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a mapping"])

    data = _deep_merge(DEFAULTS, raw)
    for dotted, value in overrides or []:
        apply_override(data, dotted, value)

    cfg_kind = kind or data.get("kind")
    if cfg_kind not in KINDS:
        problems.append(f"kind: must be one of {KINDS}, got {cfg_kind!r}")
        raise ConfigError(problems)
    data.pop("kind", None)

    # per-kind scheme defaults
    solver = data.setdefault("solver", {})
    if solver.get("scheme") is None:
        solver["scheme"] = "rk4_renorm" if cfg_kind == "simulate-lls" else "etd_rk2"
    init = data.setdefault("initial", {})
    if init.get("kind") == "single_mode" and init.get("mode") is None:
        init["mode"] = [1] + [0] * (data.get("grid", {}).get("dim", 3) - 1)

    _validate(cfg_kind, data, os.path.dirname(os.path.abspath(path)), problems)
    if problems:
        raise ConfigError(problems)
    return RunConfig(kind=cfg_kind, data=data, path=os.path.abspath(path))
