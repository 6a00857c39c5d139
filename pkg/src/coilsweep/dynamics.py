"""Time evolution of the dissipative two-coil system.

Three integrators over the same sampled-trajectory contract:

* :func:`evolve_master` solves d rho/dt = -j [H, rho] - (1/2) {G, rho} with a
  Hermitian protocol Hamiltonian and the diagonal decay-rate matrix
  G = diag(2 Gamma_s, 2 (Gamma_d + Gamma_w)).  Coil energies rho_ss, rho_dd
  therefore decay at twice the amplitude rates, matching the coupled-mode
  amplitude equations below (an isolated lossy coil obeys |a|^2 ~ e^{-2 Gamma t}).
* :func:`evolve_amplitudes_rotating` solves the non-Hermitian amplitude
  equation db/dt = (-j H - diag(Gamma_s, Gamma_d + Gamma_w)) b.  For pure
  initial states its outer product b b^H solves the master equation exactly,
  which makes it an independent oracle for :func:`evolve_master`.
* :func:`evolve_amplitudes_lab` integrates the lab-frame amplitudes at
  constant resonance frequencies and coupling; populations must match the
  rotating frame with delta = omega_d - omega_s.

Density matrices are plain 2x2 complex ndarrays.  The integrator carries only
the independent components (two real populations and one complex coherence),
so Hermiticity is exact at every step by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel
from .errors import AccuracyError, InvalidParameterError, InvalidStateError, StiffnessError
from .model import CoilPair, dissipation_matrix
from .schedules import PHI_DOT_MODES, PHI_DOT_VERBATIM, DriveSchedule, LANDAU_ZENER

PROTOCOL_ADIABATIC = "adiabatic"
PROTOCOL_TQD = "tqd"
PROTOCOLS = (PROTOCOL_ADIABATIC, PROTOCOL_TQD)

METHOD_RK45 = "rk45"
METHOD_RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control and output sampling for all evolution routines."""

    method: str = METHOD_RK45           # "rk45" adaptive or "rk4" fixed-step
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step_fraction: float = 1e-3     # cap on the step as a fraction of the window
    sample_count: int = 2000

    def __post_init__(self):
        if self.method not in (METHOD_RK45, METHOD_RK4):
            raise InvalidParameterError(f"method must be 'rk45' or 'rk4', got {self.method!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise InvalidParameterError("tolerances must be positive")
        if not (0 < self.max_step_fraction <= 1):
            raise InvalidParameterError("max_step_fraction must lie in (0, 1]")
        if self.sample_count < 2:
            raise InvalidParameterError("sample_count must be at least 2")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled evolution with its schedule observables and provenance."""

    t: np.ndarray                 # (n,) sample times, s
    rho: np.ndarray               # (n, 2, 2) complex density matrices
    kappa: np.ndarray             # (n,) coupling at the samples, rad/s
    delta: np.ndarray             # (n,) detuning at the samples, rad/s
    kappa_a: np.ndarray           # (n,) counterdiabatic coupling magnitude, rad/s
    frac_s: np.ndarray            # (n,) source energy / initial total energy
    frac_d: np.ndarray            # (n,) drain energy / initial total energy
    protocol: str
    schedule: DriveSchedule | None
    coils: CoilPair
    stats: dict = field(repr=False)

    @property
    def trace(self) -> np.ndarray:
        return np.real(self.rho[:, 0, 0] + self.rho[:, 1, 1])

    @property
    def window(self) -> float:
        return float(self.t[-1] - self.t[0])


def canonical_initial_state() -> np.ndarray:
    """All energy in the source coil: rho(0) = diag(1, 0)."""
    return np.diag([1.0, 0.0]).astype(complex)


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check Hermiticity and positivity; returns rho as a complex ndarray."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidStateError(f"expected a 2x2 density matrix, got shape {rho.shape}")
    scale = max(float(np.max(np.abs(rho))), 1.0)
    if np.max(np.abs(rho - rho.conj().T)) > tol * scale:
        raise InvalidStateError("density matrix is not Hermitian")
    p, q = rho[0, 0].real, rho[1, 1].real
    if p < -tol or q < -tol or p * q - abs(rho[0, 1]) ** 2 < -tol * scale * scale:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return rho


def _kernel_params(schedule: DriveSchedule | None, protocol: str, coils: CoilPair,
                   eq_kind: int, phi_dot_mode: str, ramp_fraction: float,
                   omega_s: float = 0.0, omega_d: float = 0.0, kappa_const: float = 0.0):
    g = dissipation_matrix(coils)
    p = np.zeros(15)
    if schedule is not None:
        p[0] = 0.0 if schedule.kind == LANDAU_ZENER else 1.0
        p[1] = schedule.kappa0
        p[2] = schedule.delta_offset
        p[3] = schedule.beta
        p[4] = schedule.t0
        p[8] = schedule.window
        if schedule.kind != LANDAU_ZENER:
            tables = (schedule.times, schedule.kappa_table, schedule.delta_table)
        else:
            tables = (np.empty(0), np.empty(0), np.empty(0))
    else:
        tables = (np.empty(0), np.empty(0), np.empty(0))
    p[5] = 0.0 if protocol == PROTOCOL_ADIABATIC else 1.0
    p[6] = 1.0 if phi_dot_mode == PHI_DOT_VERBATIM else 0.0
    p[7] = ramp_fraction
    p[9] = float(eq_kind)
    p[10] = g.g11
    p[11] = g.g22
    p[12] = omega_s
    p[13] = omega_d
    p[14] = kappa_const
    return p, tables


def _check_protocol(protocol: str, phi_dot_mode: str):
    if protocol not in PROTOCOLS:
        raise InvalidParameterError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if phi_dot_mode not in PHI_DOT_MODES:
        raise InvalidParameterError(f"phi_dot_mode must be one of {PHI_DOT_MODES}, got {phi_dot_mode!r}")


def _run_kernel(y0, t_samples, p, tables, cfg: IntegratorConfig):
    window = float(t_samples[-1] - t_samples[0])
    method = _kernel.METHOD_RK4 if cfg.method == METHOD_RK4 else _kernel.METHOD_RK45
    ys, stats, status, t_fail = _kernel.integrate(
        y0, t_samples, p, tables[0], tables[1], tables[2],
        cfg.rel_tol, cfg.abs_tol, cfg.max_step_fraction * window, method)
    if status == _kernel.STATUS_STIFF:
        raise StiffnessError(t_fail)
    stats_dict = {
        "method": cfg.method,
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "steps_accepted": int(stats[0]),
        "steps_rejected": int(stats[1]),
        "rhs_evaluations": int(stats[2]),
    }
    return ys, stats_dict


def _schedule_observables(schedule: DriveSchedule | None, ts, protocol: str,
                          phi_dot_mode: str, ramp_fraction: float):
    if schedule is None:
        z = np.zeros_like(ts)
        return z, z, z
    kap = np.asarray(schedule.kappa(ts), dtype=float)
    dlt = np.asarray(schedule.delta(ts), dtype=float)
    kdot = np.asarray(schedule.kappa_dot(ts), dtype=float)
    ddot = np.asarray(schedule.delta_dot(ts), dtype=float)
    gap2 = dlt * dlt + 4.0 * kap * kap
    with np.errstate(divide="ignore", invalid="ignore"):
        ka = np.abs(kdot * dlt - kap * ddot) / gap2
    ka = np.where(gap2 > 0, ka, 0.0)
    if ramp_fraction > 0:
        w = np.ones_like(ts)
        ramp = ramp_fraction * schedule.window
        lead = ts < ramp
        tail = ts > schedule.window - ramp
        w[lead] = np.sin(0.5 * np.pi * ts[lead] / ramp) ** 2
        w[tail] = np.sin(0.5 * np.pi * (schedule.window - ts[tail]) / ramp) ** 2
        ka = ka * w
    if protocol == PROTOCOL_ADIABATIC:
        ka = np.zeros_like(ka)
    return kap, dlt, ka


def _build_trajectory(ts, rho, schedule, coils, protocol, phi_dot_mode,
                      ramp_fraction, stats) -> Trajectory:
    kap, dlt, ka = _schedule_observables(schedule, ts, protocol, phi_dot_mode, ramp_fraction)
    total0 = float(np.real(rho[0, 0, 0] + rho[0, 1, 1]))
    norm = total0 if total0 > 0 else 1.0
    return Trajectory(
        t=ts, rho=rho, kappa=kap, delta=dlt, kappa_a=ka,
        frac_s=np.real(rho[:, 0, 0]) / norm,
        frac_d=np.real(rho[:, 1, 1]) / norm,
        protocol=protocol, schedule=schedule, coils=coils, stats=stats)


def _postcheck(rho: np.ndarray, coils: CoilPair, tol: float = 1e-6):
    """Integration-accuracy audit: trace bounded by its initial value, state positive."""
    trace = np.real(rho[:, 0, 0] + rho[:, 1, 1])
    if trace[1:].max(initial=-np.inf) > trace[0] + tol:
        raise AccuracyError(f"trace grew by {trace.max() - trace[0]:.3e} despite nonnegative losses")
    # closed-form eigenvalues of each 2x2 Hermitian sample
    mean = 0.5 * trace
    dev = np.sqrt(0.25 * np.real(rho[:, 0, 0] - rho[:, 1, 1]) ** 2 + np.abs(rho[:, 0, 1]) ** 2)
    if (mean - dev).min() < -tol:
        raise AccuracyError(f"negative eigenvalue {float((mean - dev).min()):.3e} in the state")


def evolve_master(protocol: str, schedule: DriveSchedule, coils: CoilPair,
                  rho0: np.ndarray | None = None,
                  cfg: IntegratorConfig | None = None,
                  phi_dot_mode: str = PHI_DOT_VERBATIM,
                  ramp_fraction: float = 0.0) -> Trajectory:
    """Integrate the dissipative master equation under the chosen protocol.

    Parameters
    ----------
    protocol : {"adiabatic", "tqd"}
        Selects the rotating-frame Hamiltonian or its counterdiabatically
        corrected form.
    schedule : DriveSchedule
    coils : CoilPair
    rho0 : ndarray, optional
        Initial 2x2 density matrix; defaults to all energy in the source.
    cfg : IntegratorConfig, optional
    phi_dot_mode, ramp_fraction :
        Forwarded to the counterdiabatic terms (TQD protocol only).
    """
    _check_protocol(protocol, phi_dot_mode)
    cfg = cfg or IntegratorConfig()
    rho0 = canonical_initial_state() if rho0 is None else validate_density_matrix(rho0)
    y0 = np.array([rho0[0, 0].real, rho0[0, 1].real, rho0[0, 1].imag, rho0[1, 1].real])
    ts = np.linspace(0.0, schedule.window, cfg.sample_count)
    p, tables = _kernel_params(schedule, protocol, coils, 0, phi_dot_mode, ramp_fraction)
    ys, stats = _run_kernel(y0, ts, p, tables, cfg)
    rho = np.empty((len(ts), 2, 2), dtype=complex)
    rho[:, 0, 0] = ys[:, 0]
    rho[:, 0, 1] = ys[:, 1] + 1j * ys[:, 2]
    rho[:, 1, 0] = ys[:, 1] - 1j * ys[:, 2]
    rho[:, 1, 1] = ys[:, 3]
    _postcheck(rho, coils)
    return _build_trajectory(ts, rho, schedule, coils, protocol, phi_dot_mode,
                             ramp_fraction, stats)


def _amplitude_trajectory(ts, ys):
    b = np.empty((len(ts), 2), dtype=complex)
    b[:, 0] = ys[:, 0] + 1j * ys[:, 1]
    b[:, 1] = ys[:, 2] + 1j * ys[:, 3]
    return np.einsum("ni,nj->nij", b, b.conj())


def evolve_amplitudes_rotating(protocol: str, schedule: DriveSchedule, coils: CoilPair,
                               b0: tuple[complex, complex] = (1.0 + 0j, 0.0 + 0j),
                               cfg: IntegratorConfig | None = None,
                               phi_dot_mode: str = PHI_DOT_VERBATIM,
                               ramp_fraction: float = 0.0) -> Trajectory:
    """Integrate db/dt = (-j H - diag(Gamma_s, Gamma_d + Gamma_w)) b.

    The reported trajectory carries rho(t) = b(t) b(t)^H, directly comparable
    to :func:`evolve_master` for pure initial states.
    """
    _check_protocol(protocol, phi_dot_mode)
    cfg = cfg or IntegratorConfig()
    y0 = np.array([np.real(b0[0]), np.imag(b0[0]), np.real(b0[1]), np.imag(b0[1])])
    ts = np.linspace(0.0, schedule.window, cfg.sample_count)
    p, tables = _kernel_params(schedule, protocol, coils, 1, phi_dot_mode, ramp_fraction)
    ys, stats = _run_kernel(y0, ts, p, tables, cfg)
    rho = _amplitude_trajectory(ts, ys)
    return _build_trajectory(ts, rho, schedule, coils, protocol, phi_dot_mode,
                             ramp_fraction, stats)


def evolve_amplitudes_lab(coils: CoilPair, kappa: float,
                          a0: tuple[complex, complex] = (1.0 + 0j, 0.0 + 0j),
                          t_span: float = 0.0,
                          cfg: IntegratorConfig | None = None) -> Trajectory:
    """Lab-frame oracle at constant frequencies and coupling.

    Integrates da_s/dt = (j omega_s - Gamma_s) a_s + j kappa a_d and
    da_d/dt = (j omega_d - Gamma_d - Gamma_w) a_d + j kappa a_s.  After
    removing the common rotation exp(-j (omega_s + omega_d) t / 2) the
    populations equal the rotating frame's with delta = omega_d - omega_s;
    populations are phase-insensitive so the trajectory reports a a^H as is.
    """
    if coils.omega_s0 <= 0 or coils.omega_d0 <= 0:
        raise InvalidParameterError("lab-frame oracle needs positive omega_s0 and omega_d0")
    if t_span <= 0:
        raise InvalidParameterError("t_span must be positive")
    cfg = cfg or IntegratorConfig()
    y0 = np.array([np.real(a0[0]), np.imag(a0[0]), np.real(a0[1]), np.imag(a0[1])])
    ts = np.linspace(0.0, t_span, cfg.sample_count)
    p, tables = _kernel_params(None, PROTOCOL_ADIABATIC, coils, 2, PHI_DOT_VERBATIM, 0.0,
                               omega_s=coils.omega_s0, omega_d=coils.omega_d0,
                               kappa_const=float(kappa))
    ys, stats = _run_kernel(y0, ts, p, tables, cfg)
    rho = _amplitude_trajectory(ts, ys)
    traj = _build_trajectory(ts, rho, None, coils, PROTOCOL_ADIABATIC,
                             PHI_DOT_VERBATIM, 0.0, stats)
    # constant schedule observables for the lab oracle
    return replace(traj, kappa=np.full_like(ts, float(kappa)),
                   delta=np.full_like(ts, coils.omega_d0 - coils.omega_s0))
