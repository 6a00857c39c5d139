"""Two-coil Hamiltonians, the dissipation matrix, and adiabatic-basis transforms.

All Hamiltonians here are Hermitian and carry no loss terms; dissipation lives
exclusively in :class:`DissipationMatrix` and enters the dynamics through the
master equation's anticommutator.  States evolve as db/dt = -j H b.

Rate convention: CoilPair rates are amplitude decay rates, i.e. a bare lossy
coil obeys da/dt = (j omega - Gamma) a so its energy |a|^2 decays at 2 Gamma.
The master equation in :mod:`coilsweep.dynamics` uses the same convention.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidStateError
from .schedules import (
    PHI_DOT_VERBATIM,
    DriveSchedule,
    counterdiabatic_terms,
    mixing_angle,
)

FRAME_ROTATING = "rotating"
FRAME_TQD = "tqd"
FRAME_LAB = "lab"


@dataclass(frozen=True)
class CoilPair:
    """Physical parameters of the source/drain coil pair.

    gamma_* are amplitude decay rates in 1/s (see the module docstring for
    the energy-decay convention).  The resonance frequencies are only needed
    by the lab-frame oracle and the inductances only by the coupling model,
    so they default to zero and are validated at the point of use.
    """

    gamma_s: float = 0.0     # source intrinsic loss rate, 1/s
    gamma_d: float = 0.0     # drain intrinsic loss rate, 1/s
    gamma_w: float = 0.0     # work-extraction rate from the drain, 1/s
    omega_s0: float = 0.0    # source resonance frequency, rad/s (lab oracle only)
    omega_d0: float = 0.0    # drain resonance frequency, rad/s (lab oracle only)
    l_s: float = 0.0         # source inductance, H (coupling model only)
    l_d: float = 0.0         # drain inductance, H (coupling model only)

    def __post_init__(self):
        for name in ("gamma_s", "gamma_d", "gamma_w"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be nonnegative, got {getattr(self, name)}")


@dataclass(frozen=True)
class Hamiltonian2:
    """2x2 Hermitian Hamiltonian; h11 and h22 are real, h21 = conj(h12)."""

    h11: float
    h12: complex
    frame: str

    @property
    def h21(self) -> complex:
        return self.h12.conjugate()

    @property
    def h22(self) -> float:
        return -self.h11

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]], dtype=complex)

    def eigenvalues(self) -> tuple[float, float]:
        """(E_plus, E_minus) = +/- sqrt(h11^2 + |h12|^2)."""
        e = math.hypot(self.h11, abs(self.h12))
        return e, -e


@dataclass(frozen=True)
class DissipationMatrix:
    """Diagonal dissipation matrix diag(Gamma_s, Gamma_d + Gamma_w)."""

    g11: float
    g22: float

    def __post_init__(self):
        if self.g11 < 0 or self.g22 < 0:
            raise InvalidParameterError("dissipation entries must be nonnegative")

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([self.g11, self.g22]).astype(float)


def rotating_hamiltonian(schedule: DriveSchedule, t: float) -> Hamiltonian2:
    """Rotating-frame interaction Hamiltonian [[delta/2, -kappa], [-kappa, -delta/2]]."""
    return Hamiltonian2(h11=0.5 * float(schedule.delta(t)),
                        h12=complex(-float(schedule.kappa(t))),
                        frame=FRAME_ROTATING)


def tqd_hamiltonian(schedule: DriveSchedule, t: float,
                    phi_dot_mode: str = PHI_DOT_VERBATIM,
                    ramp_fraction: float = 0.0) -> Hamiltonian2:
    """Counterdiabatically corrected Hamiltonian for transitionless driving.

    Returns [[ (delta - phi_dot)/2,  -kappa + j*cd_rate ],
             [ -kappa - j*cd_rate,  -(delta - phi_dot)/2 ]]

    where cd_rate is the signed nonadiabatic rotation rate whose magnitude is
    kappa_a.  The imaginary off-diagonal part is exactly the correction that
    cancels transitions between the instantaneous eigenstates of the rotating
    Hamiltonian; the off-diagonal magnitude is kappa_eff = sqrt(kappa^2 +
    kappa_a^2).  The real part keeps the -kappa sign of the rotating frame so
    the correction vanishes continuously as the sweep slope goes to zero.

    With phi_dot_mode="off" the diagonal is +/- delta/2 and the drive is
    transitionless at any sweep rate; "verbatim" (default) subtracts the
    printed phase-rotation rate from the detuning, which perturbs the exact
    following (measurably so for sweeps near the adiabaticity boundary) and
    exists to make that term's effect observable.
    """
    terms = counterdiabatic_terms(schedule, t, phi_dot_mode, ramp_fraction)
    return Hamiltonian2(h11=0.5 * terms.delta_eff,
                        h12=complex(-float(schedule.kappa(t)), terms.cd_rate),
                        frame=FRAME_TQD)


def dissipation_matrix(coils: CoilPair) -> DissipationMatrix:
    """diag(Gamma_s, Gamma_d + Gamma_w); only the drain-rate sum enters the dynamics."""
    return DissipationMatrix(g11=coils.gamma_s, g22=coils.gamma_d + coils.gamma_w)


def adiabatic_basis(kappa: float, delta: float) -> np.ndarray:
    """Orthogonal change of basis U(Theta) from bare coils to adiabatic states.

    Columns are the eigenvectors B_plus = (cos(Theta/2), -sin(Theta/2)) and
    B_minus = (sin(Theta/2), cos(Theta/2)) of the rotating Hamiltonian, with
    Theta = atan2(2 kappa, delta).  B_plus carries the +sqrt(delta^2/4 +
    kappa^2) eigenvalue.
    """
    theta = mixing_angle(kappa, delta)
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    return np.array([[c, s], [-s, c]])


def adiabatic_populations(rho: np.ndarray, kappa: float, delta: float) -> tuple[float, float]:
    """Populations (p_plus, p_minus) of ``rho`` in the adiabatic basis at (kappa, delta).

    ``rho`` must be Hermitian to 1e-9 relative; p_plus + p_minus = trace(rho).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidStateError(f"expected a 2x2 density matrix, got shape {rho.shape}")
    scale = max(float(np.max(np.abs(rho))), 1e-300)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-9 * scale:
        raise InvalidStateError("density matrix is not Hermitian")
    u = adiabatic_basis(kappa, delta)
    p_plus = float(np.real(u[:, 0] @ rho @ u[:, 0]))
    p_minus = float(np.real(u[:, 1] @ rho @ u[:, 1]))
    return p_plus, p_minus
