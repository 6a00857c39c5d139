"""Run configuration: JSON ingestion, validation, defaults, and provenance.

A configuration file is a JSON object whose keys mirror :data:`DEFAULT_CONFIG`;
every omitted key takes its default, unknown keys are rejected, and every
validation failure names the offending field path.  :func:`emit` serializes a
fully resolved configuration back to the same shape, so provenance sidecars
always carry concrete values, never implied defaults.

All physical quantities are SI; frequencies, detunings and couplings are
angular rates in rad/s.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coupling import DistanceModel
from .dynamics import METHOD_RK4, METHOD_RK45, PROTOCOLS, IntegratorConfig
from .errors import ConfigError
from .model import CoilPair
from .schedules import (
    LANDAU_ZENER,
    PHI_DOT_MODES,
    PHI_DOT_OFF,
    SAMPLED,
    DriveSchedule,
    make_lz_schedule,
    make_sampled_schedule,
)

SWEEP_PARAMETERS = ("kappa0", "delta", "beta", "t0", "gamma_s", "gamma_d", "gamma_w", "d")

DEFAULT_CONFIG = {
    "protocol": "adiabatic",
    "schedule": {
        "kind": LANDAU_ZENER,
        "kappa0": 4e4,
        "delta_offset": 2e5,
        "beta": 3e9,
        "t0": 1e-4,
        "times": None,
        "kappa_table": None,
        "delta_table": None,
    },
    "coils": {
        "gamma_s": 4e3,
        "gamma_d": 4e3,
        "gamma_w": 0.0,
        "omega_s0": 0.0,
        "omega_d0": 0.0,
        "l_s": 0.0,
        "l_d": 0.0,
    },
    "integrator": {
        "method": METHOD_RK45,
        "rel_tol": 1e-9,
        "abs_tol": 1e-12,
        "max_step_fraction": 1e-3,
        "sample_count": 2000,
    },
    "distance": {
        "kappa_ref": 3.6e4,
        "d_ref": 1.0,
        "exponent": 3.0,
        "form": "saturating",
        "grid": {"min": 0.1, "max": 2.5, "count": 13},
    },
    "figure2": {
        "gamma_s": 4e3,
        "gamma_d": 4e3,
        "delta_offset": 2e5,
        "kappa0_adiabatic": 4e4,
        "kappa0_tqd": 4e2,
    },
    "figure4": {
        "kappa0": 4e4,
        "gamma_w": 1e4,
        "ratios": [10.0, 50.0, 100.0],
        "delta_grid": {"min": 0.0, "max": 1e6, "count": 21},
    },
    "figure5": {
        "gamma_s": 4e3,
        "gamma_d": 4e3,
        "gamma_w": 1e4,
    },
    "figure6": {
        "kappa0_grid": {"min": 2e3, "max": 2e4, "count": 25},
        "gamma_grid": {"min": 1e3, "max": 1e4, "count": 25},
        "gamma_w": 1e4,
    },
    "sweep": {
        "axes": [
            {"name": "kappa0", "min": 1e4, "max": 8e4, "count": 9, "scale": "linear"},
        ],
        "protocols": ["adiabatic", "tqd"],
        "outputs": ["eta", "fidelity"],
        "dump_trajectories": False,
    },
    "output_dir": "out",
    "phi_dot_mode": PHI_DOT_OFF,
    "kappa_a_ramp_fraction": 0.0,
    "threads": 1,
}


@dataclass(frozen=True)
class GridSpec:
    minimum: float
    maximum: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.count)


@dataclass(frozen=True)
class SweepAxis:
    name: str
    minimum: float
    maximum: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.minimum, self.maximum, self.count)
        return np.linspace(self.minimum, self.maximum, self.count)


@dataclass(frozen=True)
class SweepConfig:
    axes: tuple[SweepAxis, ...]
    protocols: tuple[str, ...]
    outputs: tuple[str, ...]
    dump_trajectories: bool


@dataclass(frozen=True)
class Figure2Config:
    gamma_s: float
    gamma_d: float
    delta_offset: float
    kappa0_adiabatic: float
    kappa0_tqd: float


@dataclass(frozen=True)
class Figure4Config:
    kappa0: float
    gamma_w: float
    ratios: tuple[float, ...]
    delta_grid: GridSpec


@dataclass(frozen=True)
class Figure5Config:
    gamma_s: float
    gamma_d: float
    gamma_w: float


@dataclass(frozen=True)
class Figure6Config:
    kappa0_grid: GridSpec
    gamma_grid: GridSpec
    gamma_w: float


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    schedule: DriveSchedule
    coils: CoilPair
    integrator: IntegratorConfig
    distance: DistanceModel
    distance_grid: GridSpec
    figure2: Figure2Config
    figure4: Figure4Config
    figure5: Figure5Config
    figure6: Figure6Config
    sweep: SweepConfig
    output_dir: str
    phi_dot_mode: str
    kappa_a_ramp_fraction: float
    threads: int


def _merge(defaults, supplied, path):
    """Deep-merge ``supplied`` over ``defaults``, rejecting unknown keys."""
    if not isinstance(supplied, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object, got {type(supplied).__name__}")
    merged = copy.deepcopy(defaults)
    for key, value in supplied.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"{here}: unknown key")
        if isinstance(defaults[key], dict) and not (key == "axes"):
            merged[key] = _merge(defaults[key], value, here)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _number(raw, path, *, positive=False, nonnegative=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {raw!r}")
    value = float(raw)
    if positive and not value > 0:
        raise ConfigError(f"{path}: must be positive, got {value}")
    if nonnegative and value < 0:
        raise ConfigError(f"{path}: must be nonnegative, got {value}")
    return value


def _integer(raw, path, *, minimum=None):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{path}: expected an integer, got {raw!r}")
    if minimum is not None and raw < minimum:
        raise ConfigError(f"{path}: must be at least {minimum}, got {raw}")
    return raw


def _choice(raw, path, options):
    if raw not in options:
        raise ConfigError(f"{path}: must be one of {sorted(options)}, got {raw!r}")
    return raw


def _grid(block, path, *, positive_min=False) -> GridSpec:
    lo = _number(block["min"], f"{path}.min", positive=positive_min)
    hi = _number(block["max"], f"{path}.max")
    count = _integer(block["count"], f"{path}.count", minimum=2)
    if not hi > lo:
        raise ConfigError(f"{path}: max must exceed min")
    return GridSpec(lo, hi, count)


def _build_schedule(block) -> DriveSchedule:
    kind = _choice(block["kind"], "schedule.kind", (LANDAU_ZENER, SAMPLED))
    if kind == LANDAU_ZENER:
        kappa0 = _number(block["kappa0"], "schedule.kappa0", positive=True)
        t0 = _number(block["t0"], "schedule.t0", positive=True)
        delta = _number(block["delta_offset"], "schedule.delta_offset")
        beta = _number(block["beta"], "schedule.beta")
        return make_lz_schedule(kappa0, delta, beta, t0)
    for key in ("times", "kappa_table", "delta_table"):
        if block[key] is None:
            raise ConfigError(f"schedule.{key}: required for the sampled kind")
    try:
        return make_sampled_schedule(block["times"], block["kappa_table"], block["delta_table"])
    except Exception as exc:
        raise ConfigError(f"schedule: {exc}") from exc


def _build_sweep(block) -> SweepConfig:
    axes_raw = block["axes"]
    if not isinstance(axes_raw, list) or not 1 <= len(axes_raw) <= 2:
        raise ConfigError("sweep.axes: expected a list of one or two axes")
    axes = []
    axis_defaults = {"name": None, "min": None, "max": None, "count": None, "scale": "linear"}
    for i, axis in enumerate(axes_raw):
        path = f"sweep.axes[{i}]"
        if not isinstance(axis, dict):
            raise ConfigError(f"{path}: expected an object")
        for key in axis:
            if key not in axis_defaults:
                raise ConfigError(f"{path}.{key}: unknown key")
        for key in ("name", "min", "max", "count"):
            if key not in axis:
                raise ConfigError(f"{path}.{key}: required")
        name = _choice(axis["name"], f"{path}.name", SWEEP_PARAMETERS)
        scale = _choice(axis.get("scale", "linear"), f"{path}.scale", ("linear", "log"))
        lo = _number(axis["min"], f"{path}.min")
        hi = _number(axis["max"], f"{path}.max")
        count = _integer(axis["count"], f"{path}.count", minimum=2)
        if not hi > lo:
            raise ConfigError(f"{path}: max must exceed min")
        if scale == "log" and lo <= 0:
            raise ConfigError(f"{path}: log scale requires min > 0")
        axes.append(SweepAxis(name, lo, hi, count, scale))
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ConfigError("sweep.axes: axis names must be distinct")
    protocols = block["protocols"]
    if not isinstance(protocols, list) or not protocols:
        raise ConfigError("sweep.protocols: expected a nonempty list")
    for i, proto in enumerate(protocols):
        _choice(proto, f"sweep.protocols[{i}]", PROTOCOLS)
    outputs = block["outputs"]
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("sweep.outputs: expected a nonempty list")
    for i, out in enumerate(outputs):
        _choice(out, f"sweep.outputs[{i}]", ("eta", "fidelity"))
    dump = block["dump_trajectories"]
    if not isinstance(dump, bool):
        raise ConfigError("sweep.dump_trajectories: expected a boolean")
    return SweepConfig(tuple(axes), tuple(protocols), tuple(outputs), dump)


def parse_config(source=None, overrides=()) -> RunConfig:
    """Parse a configuration from a file path, JSON text, or dict.

    ``source`` may be None (pure defaults), a mapping, a path to a JSON file,
    or a JSON string.  ``overrides`` are ``KEY=VALUE`` strings with dotted
    paths (e.g. ``schedule.beta=3e10``) applied after the file, before
    validation; values are parsed as JSON scalars.
    """
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = copy.deepcopy(source)
    else:
        text = Path(source).read_text() if _looks_like_path(source) else str(source)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    for item in overrides:
        _apply_override(raw, item)
    merged = _merge(DEFAULT_CONFIG, raw, "")
    return _validate(merged)


def _looks_like_path(source) -> bool:
    if isinstance(source, Path):
        return True
    text = str(source).lstrip()
    return not text.startswith("{")


def _apply_override(raw: dict, item: str):
    if "=" not in item:
        raise ConfigError(f"override {item!r}: expected KEY=VALUE")
    key, _, value_text = item.partition("=")
    key = key.strip()
    try:
        value = json.loads(value_text)
    except json.JSONDecodeError:
        value = value_text  # bare strings pass through
    node = raw
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {key!r}: {part} is not an object")
    node[parts[-1]] = value


def _validate(merged: dict) -> RunConfig:
    protocol = _choice(merged["protocol"], "protocol", PROTOCOLS)
    schedule = _build_schedule(merged["schedule"])

    coils_block = merged["coils"]
    coils = CoilPair(
        gamma_s=_number(coils_block["gamma_s"], "coils.gamma_s", nonnegative=True),
        gamma_d=_number(coils_block["gamma_d"], "coils.gamma_d", nonnegative=True),
        gamma_w=_number(coils_block["gamma_w"], "coils.gamma_w", nonnegative=True),
        omega_s0=_number(coils_block["omega_s0"], "coils.omega_s0", nonnegative=True),
        omega_d0=_number(coils_block["omega_d0"], "coils.omega_d0", nonnegative=True),
        l_s=_number(coils_block["l_s"], "coils.l_s", nonnegative=True),
        l_d=_number(coils_block["l_d"], "coils.l_d", nonnegative=True),
    )

    integ_block = merged["integrator"]
    method = _choice(integ_block["method"], "integrator.method", (METHOD_RK45, METHOD_RK4))
    integrator = IntegratorConfig(
        method=method,
        rel_tol=_number(integ_block["rel_tol"], "integrator.rel_tol", positive=True),
        abs_tol=_number(integ_block["abs_tol"], "integrator.abs_tol", positive=True),
        max_step_fraction=_number(integ_block["max_step_fraction"],
                                  "integrator.max_step_fraction", positive=True),
        sample_count=_integer(integ_block["sample_count"], "integrator.sample_count", minimum=2),
    )

    dist_block = merged["distance"]
    distance = DistanceModel(
        kappa_ref=_number(dist_block["kappa_ref"], "distance.kappa_ref", positive=True),
        d_ref=_number(dist_block["d_ref"], "distance.d_ref", positive=True),
        exponent=_number(dist_block["exponent"], "distance.exponent", positive=True),
        form=_choice(dist_block["form"], "distance.form", ("saturating", "power-law")),
    )
    distance_grid = _grid(dist_block["grid"], "distance.grid", positive_min=True)

    f2 = merged["figure2"]
    figure2 = Figure2Config(
        gamma_s=_number(f2["gamma_s"], "figure2.gamma_s", nonnegative=True),
        gamma_d=_number(f2["gamma_d"], "figure2.gamma_d", nonnegative=True),
        delta_offset=_number(f2["delta_offset"], "figure2.delta_offset"),
        kappa0_adiabatic=_number(f2["kappa0_adiabatic"], "figure2.kappa0_adiabatic", positive=True),
        kappa0_tqd=_number(f2["kappa0_tqd"], "figure2.kappa0_tqd", positive=True),
    )

    f4 = merged["figure4"]
    ratios_raw = f4["ratios"]
    if not isinstance(ratios_raw, list) or not ratios_raw:
        raise ConfigError("figure4.ratios: expected a nonempty list")
    ratios = tuple(_number(r, f"figure4.ratios[{i}]", positive=True)
                   for i, r in enumerate(ratios_raw))
    figure4 = Figure4Config(
        kappa0=_number(f4["kappa0"], "figure4.kappa0", positive=True),
        gamma_w=_number(f4["gamma_w"], "figure4.gamma_w", nonnegative=True),
        ratios=ratios,
        delta_grid=_grid(f4["delta_grid"], "figure4.delta_grid"),
    )

    f5 = merged["figure5"]
    figure5 = Figure5Config(
        gamma_s=_number(f5["gamma_s"], "figure5.gamma_s", nonnegative=True),
        gamma_d=_number(f5["gamma_d"], "figure5.gamma_d", nonnegative=True),
        gamma_w=_number(f5["gamma_w"], "figure5.gamma_w", nonnegative=True),
    )

    f6 = merged["figure6"]
    figure6 = Figure6Config(
        kappa0_grid=_grid(f6["kappa0_grid"], "figure6.kappa0_grid", positive_min=True),
        gamma_grid=_grid(f6["gamma_grid"], "figure6.gamma_grid"),
        gamma_w=_number(f6["gamma_w"], "figure6.gamma_w", nonnegative=True),
    )

    sweep = _build_sweep(merged["sweep"])

    output_dir = merged["output_dir"]
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError("output_dir: expected a nonempty string")
    phi_dot_mode = _choice(merged["phi_dot_mode"], "phi_dot_mode", PHI_DOT_MODES)
    ramp = _number(merged["kappa_a_ramp_fraction"], "kappa_a_ramp_fraction", nonnegative=True)
    if ramp >= 0.5:
        raise ConfigError("kappa_a_ramp_fraction: must be below 0.5 (ramps meet mid-window)")
    threads = _integer(merged["threads"], "threads", minimum=1)

    return RunConfig(
        protocol=protocol, schedule=schedule, coils=coils, integrator=integrator,
        distance=distance, distance_grid=distance_grid, figure2=figure2,
        figure4=figure4, figure5=figure5, figure6=figure6, sweep=sweep,
        output_dir=output_dir, phi_dot_mode=phi_dot_mode,
        kappa_a_ramp_fraction=ramp, threads=threads)


def emit(config: RunConfig) -> dict:
    """Serialize a RunConfig back to the JSON shape with every value resolved."""
    sched = config.schedule
    return {
        "protocol": config.protocol,
        "schedule": {
            "kind": sched.kind,
            "kappa0": sched.kappa0,
            "delta_offset": sched.delta_offset,
            "beta": sched.beta,
            "t0": sched.t0,
            "times": None if sched.times is None else [float(x) for x in sched.times],
            "kappa_table": None if sched.kappa_table is None else [float(x) for x in sched.kappa_table],
            "delta_table": None if sched.delta_table is None else [float(x) for x in sched.delta_table],
        },
        "coils": {
            "gamma_s": config.coils.gamma_s,
            "gamma_d": config.coils.gamma_d,
            "gamma_w": config.coils.gamma_w,
            "omega_s0": config.coils.omega_s0,
            "omega_d0": config.coils.omega_d0,
            "l_s": config.coils.l_s,
            "l_d": config.coils.l_d,
        },
        "integrator": {
            "method": config.integrator.method,
            "rel_tol": config.integrator.rel_tol,
            "abs_tol": config.integrator.abs_tol,
            "max_step_fraction": config.integrator.max_step_fraction,
            "sample_count": config.integrator.sample_count,
        },
        "distance": {
            "kappa_ref": config.distance.kappa_ref,
            "d_ref": config.distance.d_ref,
            "exponent": config.distance.exponent,
            "form": config.distance.form,
            "grid": _emit_grid(config.distance_grid),
        },
        "figure2": {
            "gamma_s": config.figure2.gamma_s,
            "gamma_d": config.figure2.gamma_d,
            "delta_offset": config.figure2.delta_offset,
            "kappa0_adiabatic": config.figure2.kappa0_adiabatic,
            "kappa0_tqd": config.figure2.kappa0_tqd,
        },
        "figure4": {
            "kappa0": config.figure4.kappa0,
            "gamma_w": config.figure4.gamma_w,
            "ratios": list(config.figure4.ratios),
            "delta_grid": _emit_grid(config.figure4.delta_grid),
        },
        "figure5": {
            "gamma_s": config.figure5.gamma_s,
            "gamma_d": config.figure5.gamma_d,
            "gamma_w": config.figure5.gamma_w,
        },
        "figure6": {
            "kappa0_grid": _emit_grid(config.figure6.kappa0_grid),
            "gamma_grid": _emit_grid(config.figure6.gamma_grid),
            "gamma_w": config.figure6.gamma_w,
        },
        "sweep": {
            "axes": [
                {"name": a.name, "min": a.minimum, "max": a.maximum,
                 "count": a.count, "scale": a.scale}
                for a in config.sweep.axes
            ],
            "protocols": list(config.sweep.protocols),
            "outputs": list(config.sweep.outputs),
            "dump_trajectories": config.sweep.dump_trajectories,
        },
        "output_dir": config.output_dir,
        "phi_dot_mode": config.phi_dot_mode,
        "kappa_a_ramp_fraction": config.kappa_a_ramp_fraction,
        "threads": config.threads,
    }


def _emit_grid(grid: GridSpec) -> dict:
    return {"min": grid.minimum, "max": grid.maximum, "count": grid.count}


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON serialization of the resolved config."""
    text = json.dumps(emit(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
