"""Command-line front end: config ingestion, subcommand dispatch, report files.

Every scenario writes a CSV data table, a JSON sidecar with the resolved
config and provenance, and (unless --no-plot) a rendered PNG, all inside the
configured output directory.  A one-line summary goes to standard output.

Exit codes: 0 success (including sweeps with isolated point failures),
1 scenario error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .dynamics import PROTOCOL_ADIABATIC, PROTOCOL_TQD, evolve_master
from .errors import CoilsweepError, ConfigError
from .experiments import (
    FIGURE6_WINDOWS,
    run_figure2,
    run_figure4,
    run_figure5,
    run_figure6,
    run_sweep,
    write_distance_csv,
    write_figure4_csv,
    write_sidecar,
    write_sweep_csv,
    write_trajectory_csv,
)
from .metrics import doublecheck_integrals, efficiency, transfer_fidelity
from . import selftest as selftest_mod


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coilsweep",
        description="Simulate wireless power transfer between two lossy, detuned LC coils "
                    "under frequency-sweep and counterdiabatic drive protocols.")
    parser.add_argument("--config", metavar="PATH", help="JSON configuration file")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    parser.add_argument("--override", metavar="KEY=VALUE", action="append", default=[],
                        help="dotted-path config override, repeatable (e.g. schedule.beta=3e10)")
    parser.add_argument("--fixed-step", action="store_true",
                        help="use the deterministic fixed-step RK4 integrator")
    parser.add_argument("--threads", type=int, metavar="N",
                        help="worker threads for sweep grids")
    parser.add_argument("--phi-dot-mode", choices=("verbatim", "off"),
                        help="phase-rotation-rate handling in the counterdiabatic drive")
    parser.add_argument("--no-plot", action="store_true",
                        help="skip PNG rendering, write CSV/JSON only")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", help="run one trajectory per the config")
    p2 = sub.add_parser("figure2", help="energy-evolution panels")
    p2.add_argument("variant", choices=("a", "b", "c", "d"))
    p4 = sub.add_parser("figure4", help="efficiency vs frequency offset")
    p4.add_argument("window", choices=("200us", "2us"))
    sub.add_parser("figure5", help="efficiency vs coil separation")
    p6 = sub.add_parser("figure6", help="efficiency contours over coupling and loss")
    p6.add_argument("t0", choices=("1e-4", "1e-5", "1e-6"))
    sub.add_parser("sweep", help="generic parameter sweep per the config")
    sub.add_parser("selftest", help="run the analytic invariant suite")
    return parser


def _resolve_config(args) -> RunConfig:
    overrides = list(args.override)
    if args.fixed_step:
        overrides.append("integrator.method=rk4")
    if args.threads is not None:
        overrides.append(f"threads={args.threads}")
    if args.phi_dot_mode is not None:
        overrides.append(f"phi_dot_mode={args.phi_dot_mode}")
    if args.out is not None:
        overrides.append(f"output_dir={args.out}")
    return parse_config(args.config, overrides=overrides)


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args, config: RunConfig) -> str:
    started = time.time()
    traj = evolve_master(config.protocol, config.schedule, config.coils,
                         cfg=config.integrator, phi_dot_mode=config.phi_dot_mode,
                         ramp_fraction=config.kappa_a_ramp_fraction)
    out = _out_dir(config)
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_sidecar(config, out / "trajectory.json", "simulate", time.time() - started,
                  stats=traj.stats,
                  extra={"energy_balance_residual": doublecheck_integrals(traj, config.coils)})
    if not args.no_plot:
        from .plots import plot_trajectory
        plot_trajectory(traj, out / "trajectory.png", title=f"{config.protocol} protocol")
    if config.coils.gamma_w > 0:
        return f"eta={efficiency(traj, config.coils).eta:.4f}"
    return f"frac_d(T)={transfer_fidelity(traj):.4f}"


def _cmd_figure2(args, config: RunConfig) -> str:
    started = time.time()
    traj = run_figure2(args.variant, config)
    out = _out_dir(config)
    stem = f"fig2{args.variant}"
    write_trajectory_csv(traj, out / f"{stem}.csv")
    write_sidecar(config, out / f"{stem}.json", f"figure2 {args.variant}",
                  time.time() - started, stats=traj.stats)
    if not args.no_plot:
        from .plots import plot_trajectory
        plot_trajectory(traj, out / f"{stem}.png",
                        title=f"variant {args.variant} ({traj.protocol})")
    return f"frac_d(T)={transfer_fidelity(traj):.4f}"


def _cmd_figure4(args, config: RunConfig) -> str:
    started = time.time()
    result = run_figure4(args.window, config)
    out = _out_dir(config)
    stem = f"fig4_{args.window}"
    write_figure4_csv(result, out / f"{stem}.csv")
    write_sidecar(config, out / f"{stem}.json", f"figure4 {args.window}",
                  time.time() - started)
    if not args.no_plot:
        from .plots import plot_figure4
        plot_figure4(result, out / f"{stem}.png")
    ad = result.eta[PROTOCOL_ADIABATIC]
    tq = result.eta[PROTOCOL_TQD]
    return (f"eta_adiabatic in [{ad.min():.4f}, {ad.max():.4f}], "
            f"eta_tqd in [{tq.min():.4f}, {tq.max():.4f}]")


def _cmd_figure5(args, config: RunConfig) -> str:
    started = time.time()
    rows = run_figure5(config=config)
    out = _out_dir(config)
    write_distance_csv(rows, out / "fig5.csv")
    write_sidecar(config, out / "fig5.json", "figure5", time.time() - started)
    if not args.no_plot:
        from .plots import plot_figure5
        plot_figure5(rows, out / "fig5.png")
    return (f"eta_adiabatic(d_max)={rows[-1]['eta_adiabatic']:.4f}, "
            f"eta_tqd(d_max)={rows[-1]['eta_tqd']:.4f}")


def _cmd_figure6(args, config: RunConfig) -> str:
    started = time.time()
    t0 = float(args.t0)
    result = run_figure6(t0, config)
    out = _out_dir(config)
    stem = f"fig6_{args.t0}"
    write_sweep_csv(result, out / f"{stem}.csv")
    write_sidecar(config, out / f"{stem}.json", f"figure6 {args.t0}",
                  time.time() - started, extra={"t0": t0})
    if not args.no_plot:
        from .plots import plot_sweep
        plot_sweep(result, out / f"{stem}.png", title=f"t0 = {args.t0} s")
    return (f"median eta_adiabatic={np.median(result.values['eta_adiabatic']):.4f}, "
            f"median eta_tqd={np.median(result.values['eta_tqd']):.4f}")


def _cmd_sweep(args, config: RunConfig) -> str:
    started = time.time()
    out = _out_dir(config)
    result = run_sweep(config.sweep, config, out_dir=out)
    write_sweep_csv(result, out / "sweep.csv")
    n_failed = int(result.error_mask.sum())
    write_sidecar(config, out / "sweep.json", "sweep", time.time() - started,
                  extra={"points_failed": n_failed,
                         "errors": {str(k): v for k, v in result.errors.items()}})
    if not args.no_plot:
        from .plots import plot_sweep
        plot_sweep(result, out / "sweep.png")
    n_total = int(result.error_mask.size)
    summary = f"{n_total} points"
    if n_failed:
        print(f"warning: {n_failed} of {n_total} sweep points failed "
              f"(error mask preserved in sweep.json)", file=sys.stderr)
        summary += f" ({n_failed} failed)"
    key = next(iter(result.values))
    summary += f", median {key}={np.nanmedian(result.values[key]):.4f}"
    return summary


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "selftest":
        return selftest_mod.run_selftest(config)
    handlers = {
        "simulate": _cmd_simulate,
        "figure2": _cmd_figure2,
        "figure4": _cmd_figure4,
        "figure5": _cmd_figure5,
        "figure6": _cmd_figure6,
        "sweep": _cmd_sweep,
    }
    try:
        summary = handlers[args.command](args, config)
    except CoilsweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
