"""Declarative scenario runners: the four figure studies and generic sweeps.

Every runner is a pure function of its (resolved) configuration: identical
configs with the fixed-step integrator produce byte-identical CSV.  Grid
points are independent; when ``threads > 1`` the integrations run on a thread
pool (the compiled kernel releases the GIL) and results are assembled by
index, so output never depends on completion order.

CSV column orders are fixed:

* trajectories: t_s, frac_s, frac_d, re_rho_sd, im_rho_sd, kappa_rad_s,
  delta_rad_s, kappa_a_rad_s
* sweeps/contours: axis1, axis2, eta_adiabatic, eta_tqd, fidelity_adiabatic,
  fidelity_tqd (masked points render as nan)
* distance study: d_m, kappa_rad_s, kappa_a_peak_rad_s, kappa_eff_peak_rad_s,
  eta_adiabatic, eta_tqd

Each CSV gets a JSON sidecar with the fully resolved config and a provenance
block (config hash, integrator statistics, wall time).
"""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, SweepAxis, SweepConfig, config_hash, emit, parse_config
from .coupling import distance_study, kappa_of_distance
from .dynamics import (
    PROTOCOL_ADIABATIC,
    PROTOCOL_TQD,
    IntegratorConfig,
    Trajectory,
    evolve_master,
)
from .errors import CoilsweepError, InvalidParameterError
from .metrics import efficiency, transfer_fidelity
from .model import CoilPair
from .schedules import NonCrossingSweepWarning, make_lz_schedule

FIGURE2_VARIANTS = {
    # variant -> (protocol, beta in rad/s^2, t0 in s); couplings come from config
    "a": (PROTOCOL_ADIABATIC, 3e9, 1e-4),
    "b": (PROTOCOL_TQD, 3e9, 1e-4),
    "c": (PROTOCOL_TQD, 3e10, 1e-5),
    "d": (PROTOCOL_TQD, 3e11, 1e-6),
}

FIGURE4_WINDOWS = {
    "200us": (3e9, 1e-4),
    "2us": (3e11, 1e-6),
}

FIGURE6_WINDOWS = (1e-4, 1e-5, 1e-6)
FIGURE6_BETA_T0 = 3e5  # rad/s; keeps the swept detuning range window-invariant


@dataclass
class SweepResult:
    """Gridded sweep output with per-point error isolation."""

    axes: tuple[SweepAxis, ...]
    coords: tuple[np.ndarray, ...]
    values: dict           # e.g. "eta_adiabatic" -> ndarray of shape (n1, n2) or (n1,)
    error_mask: np.ndarray # True where the point failed; values there are nan
    errors: dict           # flat index -> message
    provenance: dict


@dataclass
class Figure4Result:
    window: str
    deltas: np.ndarray
    ratios: tuple[float, ...]
    eta: dict       # protocol -> (n_ratios, n_deltas)
    fidelity: dict  # protocol -> (n_ratios, n_deltas)


def _pool_map(fn, items, threads):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_figure2(variant: str, config: RunConfig | None = None) -> Trajectory:
    """Energy-evolution scenario for one panel of the transfer-comparison study.

    Variant "a" is the adiabatic sweep at strong coupling; "b", "c", "d" are
    counterdiabatic drives at hundredfold weaker coupling over windows
    shrinking tenfold each.  No work extraction in any panel.
    """
    config = config or parse_config()
    if variant not in FIGURE2_VARIANTS:
        raise InvalidParameterError(f"figure2 variant must be one of 'abcd', got {variant!r}")
    protocol, beta, t0 = FIGURE2_VARIANTS[variant]
    f2 = config.figure2
    kappa0 = f2.kappa0_adiabatic if protocol == PROTOCOL_ADIABATIC else f2.kappa0_tqd
    schedule = make_lz_schedule(kappa0, f2.delta_offset, beta, t0)
    coils = CoilPair(gamma_s=f2.gamma_s, gamma_d=f2.gamma_d, gamma_w=0.0)
    return evolve_master(protocol, schedule, coils, cfg=config.integrator,
                         phi_dot_mode=config.phi_dot_mode,
                         ramp_fraction=config.kappa_a_ramp_fraction)


def run_figure4(window: str, config: RunConfig | None = None) -> Figure4Result:
    """Efficiency versus frequency offset for three coupling-to-loss ratios."""
    config = config or parse_config()
    if window not in FIGURE4_WINDOWS:
        raise InvalidParameterError(f"figure4 window must be one of {sorted(FIGURE4_WINDOWS)}")
    beta, t0 = FIGURE4_WINDOWS[window]
    f4 = config.figure4
    deltas = f4.delta_grid.values()
    jobs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCrossingSweepWarning)
        for ratio in f4.ratios:
            gamma = f4.kappa0 / ratio
            coils = CoilPair(gamma_s=gamma, gamma_d=gamma, gamma_w=f4.gamma_w)
            for delta in deltas:
                schedule = make_lz_schedule(f4.kappa0, float(delta), beta, t0)
                for protocol in (PROTOCOL_ADIABATIC, PROTOCOL_TQD):
                    jobs.append((protocol, schedule, coils))

    def one(job):
        protocol, schedule, coils = job
        traj = evolve_master(protocol, schedule, coils, cfg=config.integrator,
                             phi_dot_mode=config.phi_dot_mode,
                             ramp_fraction=config.kappa_a_ramp_fraction)
        return efficiency(traj, coils).eta, transfer_fidelity(traj)

    results = _pool_map(one, jobs, config.threads)
    shape = (len(f4.ratios), len(deltas))
    eta = {p: np.empty(shape) for p in (PROTOCOL_ADIABATIC, PROTOCOL_TQD)}
    fid = {p: np.empty(shape) for p in (PROTOCOL_ADIABATIC, PROTOCOL_TQD)}
    idx = 0
    for i in range(len(f4.ratios)):
        for j in range(len(deltas)):
            for protocol in (PROTOCOL_ADIABATIC, PROTOCOL_TQD):
                eta[protocol][i, j], fid[protocol][i, j] = results[idx]
                idx += 1
    return Figure4Result(window=window, deltas=deltas, ratios=f4.ratios, eta=eta, fidelity=fid)


def run_figure5(d_grid=None, config: RunConfig | None = None) -> list[dict]:
    """Distance study: delegates to :func:`coilsweep.coupling.distance_study`."""
    config = config or parse_config()
    if d_grid is None:
        d_grid = config.distance_grid.values()
    f5 = config.figure5
    coils = CoilPair(gamma_s=f5.gamma_s, gamma_d=f5.gamma_d, gamma_w=f5.gamma_w)
    sched = config.schedule
    if sched.kind != "landau-zener":
        raise InvalidParameterError("the distance study needs a Landau-Zener schedule template")
    return distance_study(config.distance, sched, coils, d_grid,
                          cfg=config.integrator, phi_dot_mode=config.phi_dot_mode,
                          ramp_fraction=config.kappa_a_ramp_fraction)


def run_figure6(t0: float, config: RunConfig | None = None) -> SweepResult:
    """Efficiency contours over coupling and equal intrinsic losses.

    The sweep slope scales as beta = 3e5 / t0 so the detuning range is the
    same for every window choice.
    """
    config = config or parse_config()
    if not any(np.isclose(t0, w) for w in FIGURE6_WINDOWS):
        raise InvalidParameterError(f"figure6 t0 must be one of {FIGURE6_WINDOWS}")
    f6 = config.figure6
    beta = FIGURE6_BETA_T0 / t0
    kappas = f6.kappa0_grid.values()
    gammas = f6.gamma_grid.values()
    delta_offset = config.figure2.delta_offset

    jobs = []
    for kappa0 in kappas:
        schedule = make_lz_schedule(float(kappa0), delta_offset, beta, t0)
        for gamma in gammas:
            coils = CoilPair(gamma_s=float(gamma), gamma_d=float(gamma), gamma_w=f6.gamma_w)
            for protocol in (PROTOCOL_ADIABATIC, PROTOCOL_TQD):
                jobs.append((protocol, schedule, coils))

    def one(job):
        protocol, schedule, coils = job
        traj = evolve_master(protocol, schedule, coils, cfg=config.integrator,
                             phi_dot_mode=config.phi_dot_mode,
                             ramp_fraction=config.kappa_a_ramp_fraction)
        return efficiency(traj, coils).eta, transfer_fidelity(traj)

    results = _pool_map(one, jobs, config.threads)
    shape = (len(kappas), len(gammas))
    values = {}
    for key in ("eta_adiabatic", "eta_tqd", "fidelity_adiabatic", "fidelity_tqd"):
        values[key] = np.empty(shape)
    idx = 0
    for i in range(len(kappas)):
        for j in range(len(gammas)):
            for protocol in (PROTOCOL_ADIABATIC, PROTOCOL_TQD):
                values[f"eta_{protocol}"][i, j], values[f"fidelity_{protocol}"][i, j] = results[idx]
                idx += 1
    axes = (SweepAxis("kappa0", float(kappas[0]), float(kappas[-1]), len(kappas)),
            SweepAxis("gamma_sd", float(gammas[0]), float(gammas[-1]), len(gammas)))
    return SweepResult(axes=axes, coords=(kappas, gammas), values=values,
                       error_mask=np.zeros(shape, dtype=bool), errors={},
                       provenance=_provenance(config, extra={"t0": t0, "beta": beta}))


def _apply_parameter(schedule, coils, distance_model, name: str, value: float):
    """Substitute one named parameter, re-validating the schedule."""
    if name in ("kappa0", "delta", "beta", "t0"):
        fields = {
            "kappa0": schedule.kappa0, "delta": schedule.delta_offset,
            "beta": schedule.beta, "t0": schedule.t0,
        }
        fields[name] = value
        schedule = make_lz_schedule(fields["kappa0"], fields["delta"],
                                    fields["beta"], fields["t0"])
    elif name in ("gamma_s", "gamma_d", "gamma_w"):
        coils = replace(coils, **{name: value})
    elif name == "d":
        if distance_model is None:
            raise InvalidParameterError("sweeping 'd' requires a distance model")
        kappa = kappa_of_distance(distance_model, value)
        schedule = make_lz_schedule(kappa, schedule.delta_offset, schedule.beta, schedule.t0)
    else:
        raise InvalidParameterError(f"unrecognized sweep parameter {name!r}")
    return schedule, coils


def run_sweep(spec: SweepConfig, config: RunConfig | None = None,
              out_dir: str | Path | None = None) -> SweepResult:
    """Evaluate the requested outputs on a 1- or 2-axis parameter grid.

    Per-point failures are recorded in the error mask (values become nan)
    and never abort the sweep.  A degenerate one-point axis is rejected at
    parse time; a one-axis spec produces 1-D value arrays.
    """
    config = config or parse_config()
    base_schedule = config.schedule
    if base_schedule.kind != "landau-zener":
        raise InvalidParameterError("sweeps vary Landau-Zener parameters; use that schedule kind")
    base_coils = config.coils
    coords = tuple(axis.values() for axis in spec.axes)
    shape = tuple(len(c) for c in coords)
    n_points = int(np.prod(shape))

    # build the per-point physics on the main thread: construction errors are
    # part of the mask, and warning filters are process-global
    points = []
    errors = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCrossingSweepWarning)
        for flat in range(n_points):
            idx = np.unravel_index(flat, shape)
            schedule, coils = base_schedule, base_coils
            try:
                for axis, axis_values, i in zip(spec.axes, coords, idx):
                    schedule, coils = _apply_parameter(
                        schedule, coils, config.distance, axis.name, float(axis_values[i]))
                points.append((flat, schedule, coils))
            except CoilsweepError as exc:
                errors[flat] = str(exc)

    def one(point):
        flat, schedule, coils = point
        out = {}
        trajs = {}
        try:
            for protocol in spec.protocols:
                traj = evolve_master(protocol, schedule, coils, cfg=config.integrator,
                                     phi_dot_mode=config.phi_dot_mode,
                                     ramp_fraction=config.kappa_a_ramp_fraction)
                trajs[protocol] = traj
                if "eta" in spec.outputs:
                    out[f"eta_{protocol}"] = efficiency(traj, coils).eta
                if "fidelity" in spec.outputs:
                    out[f"fidelity_{protocol}"] = transfer_fidelity(traj)
        except CoilsweepError as exc:
            return flat, None, str(exc), {}
        return flat, out, None, trajs

    results = _pool_map(one, points, config.threads)

    keys = [f"{output}_{protocol}" for output in spec.outputs for protocol in spec.protocols]
    values = {key: np.full(shape, np.nan) for key in keys}
    mask = np.zeros(shape, dtype=bool)
    for flat in errors:
        mask[np.unravel_index(flat, shape)] = True
    dump_dir = None
    if spec.dump_trajectories and out_dir is not None:
        dump_dir = Path(out_dir) / "trajectories"
        dump_dir.mkdir(parents=True, exist_ok=True)
    for flat, out, err, trajs in results:
        idx = np.unravel_index(flat, shape)
        if err is not None:
            mask[idx] = True
            errors[flat] = err
            continue
        for key, val in out.items():
            values[key][idx] = val
        if dump_dir is not None:
            for protocol, traj in trajs.items():
                tag = "_".join(str(i) for i in idx)
                write_trajectory_csv(traj, dump_dir / f"point_{tag}_{protocol}.csv")

    return SweepResult(axes=spec.axes, coords=coords, values=values,
                       error_mask=mask, errors=errors,
                       provenance=_provenance(config))


def _provenance(config: RunConfig, extra: dict | None = None) -> dict:
    prov = {
        "package_version": __version__,
        "config_sha256": config_hash(config),
    }
    if extra:
        prov.update(extra)
    return prov


# ---------------------------------------------------------------------------
# writers


def _fmt(x) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(x))


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    path = Path(path)
    lines = ["t_s,frac_s,frac_d,re_rho_sd,im_rho_sd,kappa_rad_s,delta_rad_s,kappa_a_rad_s"]
    for i in range(len(traj.t)):
        lines.append(",".join([
            _fmt(traj.t[i]), _fmt(traj.frac_s[i]), _fmt(traj.frac_d[i]),
            _fmt(traj.rho[i, 0, 1].real), _fmt(traj.rho[i, 0, 1].imag),
            _fmt(traj.kappa[i]), _fmt(traj.delta[i]), _fmt(traj.kappa_a[i]),
        ]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sweep_csv(result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    keys = ("eta_adiabatic", "eta_tqd", "fidelity_adiabatic", "fidelity_tqd")
    present = [k for k in keys if k in result.values]
    if len(result.axes) == 2:
        header = [f"{result.axes[0].name}", f"{result.axes[1].name}"] + present
        lines = [",".join(header)]
        n1, n2 = (len(c) for c in result.coords)
        for i in range(n1):
            for j in range(n2):
                row = [_fmt(result.coords[0][i]), _fmt(result.coords[1][j])]
                row += [_fmt(result.values[k][i, j]) for k in present]
                lines.append(",".join(row))
    else:
        header = [f"{result.axes[0].name}"] + present
        lines = [",".join(header)]
        for i in range(len(result.coords[0])):
            row = [_fmt(result.coords[0][i])]
            row += [_fmt(result.values[k][i]) for k in present]
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_figure4_csv(result: Figure4Result, path: str | Path) -> Path:
    path = Path(path)
    lines = ["delta_rad_s,ratio,eta_adiabatic,eta_tqd,fidelity_adiabatic,fidelity_tqd"]
    for i, ratio in enumerate(result.ratios):
        for j, delta in enumerate(result.deltas):
            lines.append(",".join([
                _fmt(delta), _fmt(ratio),
                _fmt(result.eta[PROTOCOL_ADIABATIC][i, j]), _fmt(result.eta[PROTOCOL_TQD][i, j]),
                _fmt(result.fidelity[PROTOCOL_ADIABATIC][i, j]),
                _fmt(result.fidelity[PROTOCOL_TQD][i, j]),
            ]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_distance_csv(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    lines = ["d_m,kappa_rad_s,kappa_a_peak_rad_s,kappa_eff_peak_rad_s,eta_adiabatic,eta_tqd"]
    for row in rows:
        lines.append(",".join([
            _fmt(row["d"]), _fmt(row["kappa"]), _fmt(row["kappa_a_peak"]),
            _fmt(row["kappa_eff_peak"]), _fmt(row["eta_adiabatic"]), _fmt(row["eta_tqd"]),
        ]))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sidecar(config: RunConfig, path: str | Path, command: str,
                  wall_time_s: float, stats: dict | None = None,
                  extra: dict | None = None) -> Path:
    """JSON sidecar with the fully resolved config and the provenance block."""
    path = Path(path)
    payload = {
        "config": emit(config),
        "provenance": {
            "command": command,
            "package_version": __version__,
            "config_sha256": config_hash(config),
            "wall_time_s": wall_time_s,
            "integrator_stats": stats or {},
        },
    }
    if extra:
        payload["provenance"].update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
