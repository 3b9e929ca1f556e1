"""Run configuration in TOML.

Every section and key is optional except ``[preset] name`` for the
``simulate`` and ``check`` subcommands. Parsing fills in all defaults, so
:meth:`RunConfig.to_toml` writes a complete file that parses back to an
equal :class:`RunConfig`.

Schema (defaults in parentheses)::

    subcommand = "simulate"        # simulate | check | scan-reaction | tensor-tests | ode-oracle
    seed = 0
    output = "pinchflow-out"

    [ambient]
    kind = <from preset>           # euclidean | sphere | hyperbolic
    curvature = <0, 1 or -1>

    [preset]
    name = "round-sphere-r4"
    params = { r = 1.0 }           # merged with the preset defaults

    [grid]
    n_u = <32 lat-long, 64 torus>
    n_v = 64

    [pinching]
    k = 0.7
    sigma = 0.05
    monitors = []                  # extra k values tracked during a run

    [flow]                         # see pinchflow.flow.FlowConfig
    c_cfl = 0.2
    cap = 0.1
    max_steps = 200000
    max_time = inf
    h_stop = 0.0                   # 0 selects the automatic threshold
    eps_round = 0.01
    stationary_tol = 1e-4
    stationary_window = 50
    cadence = 10
    lp = [2.0]
    polar_filter = true
    filter_floor = 1
    tangential = 0.0
    snapshot_every = 0             # 0 disables surface snapshots

    [scan]
    ks = [<pinching.k>]
    kbars = [<ambient curvature>]
    samples = 1000000
    scales = [0.1, 1.0, 10.0]
    convention = "StandardAB"
    tolerance = 1e-10

    [tensor]
    samples = 1000000
    trace_samples = 100000
    refine = 100

    [ode]
    rho0 = <preset radius>
    horizon = 0.0                  # 0 means up to extinction
    n = 101
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib
import tomli_w

from .errors import ConfigError, DomainError
from .flow import FlowConfig
from .pinching import PinchingParams, check_k
from .presets import PRESETS, default_dims, default_model, preset_names
from .reaction import Convention
from .spaceform import AmbientModel, ModelKind

__all__ = ["RunConfig", "parse_config", "load_config", "SUBCOMMANDS"]

SUBCOMMANDS = ("simulate", "check", "scan-reaction", "tensor-tests", "ode-oracle")

_FLOW_KEYS = {
    "c_cfl": float, "cap": float, "max_steps": int, "max_time": float, "h_stop": float,
    "eps_round": float, "stationary_tol": float, "stationary_window": int, "cadence": int,
    "lp": "floats", "polar_filter": bool, "filter_floor": int, "tangential": float,
    "snapshot_every": int,
}

_SCHEMA = {
    "": {"subcommand": str, "seed": int, "output": str},
    "ambient": {"kind": str, "curvature": float},
    "preset": {"name": str, "params": dict},
    "grid": {"n_u": int, "n_v": int},
    "pinching": {"k": float, "sigma": float, "monitors": "floats"},
    "flow": _FLOW_KEYS,
    "scan": {"ks": "floats", "kbars": "floats", "samples": int, "scales": "floats",
             "convention": str, "tolerance": float},
    "tensor": {"samples": int, "trace_samples": int, "refine": int},
    "ode": {"rho0": float, "horizon": float, "n": int},
}


def _coerce(value, kind, where):
    if kind == "floats":
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list of numbers, got {type(value).__name__}")
        return [_coerce(v, float, f"{where}[{i}]") for i, v in enumerate(value)]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {type(value).__name__}")
        return int(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {type(value).__name__}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {type(value).__name__}")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a table, got {type(value).__name__}")
        return dict(value)
    raise AssertionError(kind)  # pragma: no cover


@dataclass
class RunConfig:
    """Fully resolved run configuration."""

    subcommand: str = "simulate"
    seed: int = 0
    output: str = "pinchflow-out"
    ambient: dict = field(default_factory=dict)
    preset: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    pinching: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    tensor: dict = field(default_factory=dict)
    ode: dict = field(default_factory=dict)

    # ---- derived objects -------------------------------------------------
    @property
    def model(self) -> AmbientModel:
        return AmbientModel(ModelKind(self.ambient["kind"]), self.ambient["curvature"])

    @property
    def dims(self) -> tuple[int, int]:
        return (self.grid["n_u"], self.grid["n_v"])

    def pinching_params(self) -> PinchingParams:
        return PinchingParams(self.pinching["k"], self.ambient["curvature"], self.pinching["sigma"])

    def flow_config(self) -> FlowConfig:
        f = dict(self.flow)
        f.pop("snapshot_every", None)
        h = f.pop("h_stop")
        return FlowConfig(
            h_stop=None if h == 0 else h, params=self.pinching_params(),
            monitors=tuple(self.pinching["monitors"]), lp=tuple(f.pop("lp")), **f,
        )

    def surface(self):
        from .presets import preset_surface

        return preset_surface(self.preset["name"], self.preset["params"], self.dims, self.model)

    # ---- serialisation ---------------------------------------------------
    def to_dict(self) -> dict:
        out = {"subcommand": self.subcommand, "seed": self.seed, "output": self.output}
        for sec in ("ambient", "preset", "grid", "pinching", "flow", "scan", "tensor", "ode"):
            val = copy.deepcopy(getattr(self, sec))
            if val:
                out[sec] = val
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


def parse_config(text: str, subcommand: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Parse, validate and resolve a TOML configuration.

    Parameters
    ----------
    text : str
        TOML document.
    subcommand : str, optional
        Overrides the file's ``subcommand`` key.
    overrides : dict, optional
        Nested mapping merged over the parsed document before validation
        (used for command-line flags).

    Raises
    ------
    ConfigError
        Syntax errors, unknown keys, type mismatches (with their location) and
        out-of-range values.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    for key, val in (overrides or {}).items():
        if isinstance(val, dict):
            raw.setdefault(key, {})
            if not isinstance(raw[key], dict):
                raise ConfigError(f"{key}: expected a table")
            raw[key].update(val)
        else:
            raw[key] = val

    parsed: dict = {sec: {} for sec in _SCHEMA}
    for key, val in raw.items():
        if isinstance(val, dict) and key in _SCHEMA and key != "":
            for sub, sval in val.items():
                kinds = _SCHEMA[key]
                if sub not in kinds:
                    raise ConfigError(f"unknown key {key}.{sub}")
                parsed[key][sub] = _coerce(sval, kinds[sub], f"{key}.{sub}")
        elif key in _SCHEMA[""]:
            parsed[""][key] = _coerce(val, _SCHEMA[""][key], key)
        else:
            raise ConfigError(f"unknown key {key}")
    try:
        return _resolve(parsed, subcommand)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, subcommand=None, overrides=None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    return parse_config(text, subcommand, overrides)


def _resolve(p: dict, subcommand) -> RunConfig:
    top = p[""]
    sub = subcommand or top.get("subcommand", "simulate")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r}")
    seed = top.get("seed", 0)
    if seed < 0:
        raise ConfigError("seed must be nonnegative")
    output = top.get("output", "pinchflow-out")

    pre = p["preset"]
    name = pre.get("name")
    if name is None and sub in ("simulate", "check"):
        raise ConfigError("missing preset name ([preset] name)")
    if name is None and sub == "ode-oracle":
        name = "round-sphere-r4" if p["ambient"].get("kind", "euclidean") == "euclidean" else (
            "geodesic-sphere-s4" if p["ambient"]["kind"] == "sphere" else "geodesic-sphere-h4")
    preset = {}
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}")
        params = dict(PRESETS[name].defaults)
        for k, v in pre.get("params", {}).items():
            if k not in params:
                raise ConfigError(f"unknown key preset.params.{k}")
            if k == "axes":
                v = _coerce(v, "floats", "preset.params.axes")
            else:
                v = _coerce(v, float, f"preset.params.{k}")
            params[k] = v
        params = {k: (list(map(float, v)) if isinstance(v, (list, tuple)) else float(v)) for k, v in params.items()}
        preset = {"name": name, "params": params}

    amb = p["ambient"]
    if "kind" in amb:
        try:
            kind = ModelKind(amb["kind"])
        except ValueError:
            raise ConfigError(f"ambient.kind must be one of euclidean, sphere, hyperbolic; got {amb['kind']!r}") from None
    else:
        kind = default_model(name).kind if name else ModelKind.EUCLIDEAN
    curv = amb.get("curvature", {ModelKind.EUCLIDEAN: 0.0, ModelKind.SPHERE: 1.0, ModelKind.HYPERBOLIC: -1.0}[kind])
    try:
        AmbientModel(kind, curv)
    except DomainError as exc:
        raise ConfigError(f"ambient: {exc}") from None
    ambient = {"kind": kind.value, "curvature": float(curv)}

    grid = {}
    if name is not None:
        du, dv = default_dims(name)
        grid = {"n_u": p["grid"].get("n_u", du), "n_v": p["grid"].get("n_v", dv)}
        if grid["n_u"] < 8 or grid["n_v"] < 8:
            raise ConfigError("grid.n_u and grid.n_v must be at least 8")

    pin = p["pinching"]
    k = pin.get("k", 0.7)
    try:
        check_k(k)
        for m in pin.get("monitors", []):
            check_k(m)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    sigma = pin.get("sigma", 0.05)
    if not 0 <= sigma <= 1:
        raise ConfigError("pinching.sigma must lie in [0, 1]")
    pinching = {"k": k, "sigma": sigma, "monitors": list(pin.get("monitors", []))}

    defaults = FlowConfig()
    flow = {key: getattr(defaults, key) for key in _FLOW_KEYS if hasattr(defaults, key)}
    flow["h_stop"] = 0.0
    flow["lp"] = list(defaults.lp)
    flow["snapshot_every"] = 0
    flow.update(p["flow"])
    if flow["h_stop"] < 0 or flow["snapshot_every"] < 0:
        raise ConfigError("flow.h_stop and flow.snapshot_every must be nonnegative")
    if any(not x >= 1 for x in flow["lp"]):
        raise ConfigError("flow.lp exponents must be at least 1")
    rc = RunConfig(subcommand=sub, seed=seed, output=output, ambient=ambient, preset=preset, grid=grid,
                   pinching=pinching, flow=flow)
    try:
        rc.flow_config()
    except TypeError as exc:  # pragma: no cover - schema and dataclass disagree
        raise ConfigError(str(exc)) from None

    sc = p["scan"]
    scan = {
        "ks": sc.get("ks", [k]), "kbars": sc.get("kbars", [ambient["curvature"]]),
        "samples": sc.get("samples", 1_000_000), "scales": sc.get("scales", [0.1, 1.0, 10.0]),
        "convention": sc.get("convention", Convention.STANDARD.value), "tolerance": sc.get("tolerance", 1e-10),
    }
    try:
        for kk in scan["ks"]:
            check_k(kk)
    except DomainError as exc:
        raise ConfigError(f"scan.ks: {exc}") from None
    if scan["convention"] not in [c.value for c in Convention]:
        raise ConfigError(f"scan.convention must be StandardAB or PaperPrinted, got {scan['convention']!r}")
    if scan["samples"] < 1 or not scan["scales"] or any(s <= 0 for s in scan["scales"]) or scan["tolerance"] < 0:
        raise ConfigError("scan: samples >= 1, positive scales and a nonnegative tolerance are required")
    if not scan["ks"] or not scan["kbars"]:
        raise ConfigError("scan.ks and scan.kbars must not be empty")
    rc.scan = scan

    te = p["tensor"]
    tensor = {"samples": te.get("samples", 1_000_000), "trace_samples": te.get("trace_samples", 100_000),
              "refine": te.get("refine", 100)}
    if tensor["samples"] < 1 or tensor["trace_samples"] < 1 or tensor["refine"] < 0:
        raise ConfigError("tensor: sample counts must be positive and refine nonnegative")
    rc.tensor = tensor

    od = p["ode"]
    rho_default = 1.0
    if preset:
        rho_default = preset["params"].get("rho", preset["params"].get("r", 1.0))
    ode = {"rho0": od.get("rho0", float(rho_default)), "horizon": od.get("horizon", 0.0), "n": od.get("n", 101)}
    if not ode["rho0"] > 0 or ode["horizon"] < 0 or ode["n"] < 2:
        raise ConfigError("ode: rho0 > 0, horizon >= 0 and n >= 2 are required")
    if kind is ModelKind.SPHERE and not ode["rho0"] < 0.5 * math.pi * AmbientModel(kind, curv).radius:
        raise ConfigError("ode.rho0 must be below pi R / 2 on the sphere")
    rc.ode = ode
    return rc
