"""Scalar figures of merit computed from sampled trajectories.

The work efficiency over a window T is

    eta = Gamma_w I_d / (Gamma_s I_s + (Gamma_d + Gamma_w) I_d),

with I_s = int_0^T rho_ss dt and I_d = int_0^T rho_dd dt by composite
trapezoid on the uniform sample grid.  Any common time-averaging factor
cancels between numerator and denominator, and so does the overall
energy-decay rate convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .errors import UndefinedEfficiencyError
from .model import CoilPair


@dataclass(frozen=True)
class EfficiencyReport:
    eta: float              # extracted-work fraction of total dissipated-plus-extracted energy
    integral_source: float  # int rho_ss dt, s
    integral_drain: float   # int rho_dd dt, s
    window: float           # s
    protocol: str


def efficiency(traj: Trajectory, coils: CoilPair) -> EfficiencyReport:
    """Work efficiency of a trajectory given the coil rates.

    Raises :class:`UndefinedEfficiencyError` when the denominator vanishes
    (all rates zero, or the state never carries energy).
    """
    pop_s = np.real(traj.rho[:, 0, 0])
    pop_d = np.real(traj.rho[:, 1, 1])
    integral_s = float(np.trapezoid(pop_s, traj.t))
    integral_d = float(np.trapezoid(pop_d, traj.t))
    denom = coils.gamma_s * integral_s + (coils.gamma_d + coils.gamma_w) * integral_d
    if denom <= 0.0:
        raise UndefinedEfficiencyError(
            "total dissipated-plus-extracted energy is zero; eta undefined")
    return EfficiencyReport(
        eta=coils.gamma_w * integral_d / denom,
        integral_source=integral_s,
        integral_drain=integral_d,
        window=traj.window,
        protocol=traj.protocol,
    )


def transfer_fidelity(traj: Trajectory) -> float:
    """Final fractional drain energy frac_d(T)."""
    return float(traj.frac_d[-1])


def doublecheck_integrals(traj: Trajectory, coils: CoilPair) -> float:
    """Energy-balance audit residual.

    Under the master equation the trace decays as d(tr rho)/dt =
    -(2 Gamma_s rho_ss + 2 (Gamma_d + Gamma_w) rho_dd), so

        tr rho(0) - tr rho(T) = int_0^T (2 Gamma_s rho_ss
                                         + 2 (Gamma_d + Gamma_w) rho_dd) dt

    must hold to quadrature accuracy.  Returns the absolute residual of that
    balance; anything above ~1e-5 flags an integration or sampling problem.
    """
    pop_s = np.real(traj.rho[:, 0, 0])
    pop_d = np.real(traj.rho[:, 1, 1])
    dissipated = float(np.trapezoid(
        2.0 * coils.gamma_s * pop_s + 2.0 * (coils.gamma_d + coils.gamma_w) * pop_d,
        traj.t))
    trace = traj.trace
    return abs(float(trace[0] - trace[-1]) - dissipated)
