"""Drive protocols: Landau-Zener sweeps and their counterdiabatic augmentation.

A drive schedule is the pair of control functions kappa(t) (coupling) and
delta(t) (detuning) over a window [0, T].  The Landau-Zener family keeps the
coupling constant and ramps the detuning linearly through resonance,

    kappa(t) = kappa0,    delta(t) = delta_offset + beta * (t - t0),

with T = 2 * t0.  A sampled schedule carries arbitrary tabulated controls.

From any schedule the counterdiabatic quantities are derived pointwise:

    kappa_a(t) = |ddelta/dt * kappa - dkappa/dt * delta| / (delta^2 + 4 kappa^2)

is the magnitude of the nonadiabatic coupling between the instantaneous
eigenstates (it equals |dTheta/dt| / 2 for the mixing angle Theta), and
kappa_eff = sqrt(kappa^2 + kappa_a^2) is the coupling strength of the
counterdiabatically corrected drive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, SingularScheduleError, UndefinedAngleError

LANDAU_ZENER = "landau-zener"
SAMPLED = "sampled"

PHI_DOT_VERBATIM = "verbatim"
PHI_DOT_OFF = "off"
PHI_DOT_MODES = (PHI_DOT_VERBATIM, PHI_DOT_OFF)


class NonCrossingSweepWarning(UserWarning):
    """The detuning does not change sign over the window, so resonance is never crossed."""


@dataclass(frozen=True)
class DriveSchedule:
    """Immutable drive protocol over the window [0, T].

    For the Landau-Zener kind only the four scalars are meaningful; for the
    sampled kind the tabulated arrays define piecewise-linear controls and
    ``t0`` is half the table span.  Instances are safe to share across threads.
    """

    kind: str
    kappa0: float = 0.0          # coupling amplitude, rad/s
    delta_offset: float = 0.0    # detuning at t = t0, rad/s
    beta: float = 0.0            # sweep slope, rad/s^2
    t0: float = 0.0              # half-window, s
    times: np.ndarray = field(default=None, repr=False)
    kappa_table: np.ndarray = field(default=None, repr=False)
    delta_table: np.ndarray = field(default=None, repr=False)

    def __eq__(self, other):
        if not isinstance(other, DriveSchedule):
            return NotImplemented
        scalars = ("kind", "kappa0", "delta_offset", "beta", "t0")
        if any(getattr(self, f) != getattr(other, f) for f in scalars):
            return False
        for f in ("times", "kappa_table", "delta_table"):
            a, b = getattr(self, f), getattr(other, f)
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b):
                return False
        return True

    @property
    def window(self) -> float:
        """Total drive duration T in seconds."""
        return 2.0 * self.t0

    def kappa(self, t):
        """Coupling kappa(t) in rad/s; accepts scalars or arrays."""
        if self.kind == LANDAU_ZENER:
            return np.broadcast_to(self.kappa0, np.shape(t)).copy() if np.ndim(t) else self.kappa0
        return np.interp(t, self.times, self.kappa_table)

    def delta(self, t):
        """Detuning delta(t) in rad/s; accepts scalars or arrays."""
        if self.kind == LANDAU_ZENER:
            return self.delta_offset + self.beta * (np.asarray(t) - self.t0) if np.ndim(t) \
                else self.delta_offset + self.beta * (t - self.t0)
        return np.interp(t, self.times, self.delta_table)

    def kappa_dot(self, t):
        """dkappa/dt in rad/s^2 (exactly zero for the Landau-Zener kind)."""
        if self.kind == LANDAU_ZENER:
            return np.zeros(np.shape(t)) if np.ndim(t) else 0.0
        return _table_slope(t, self.times, self.kappa_table)

    def delta_dot(self, t):
        """ddelta/dt in rad/s^2 (exactly beta for the Landau-Zener kind)."""
        if self.kind == LANDAU_ZENER:
            return np.full(np.shape(t), self.beta) if np.ndim(t) else self.beta
        return _table_slope(t, self.times, self.delta_table)


def _table_slope(t, times, values):
    """Segment slope of a piecewise-linear table, clamped at the ends."""
    idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2)
    dt = times[idx + 1] - times[idx]
    slope = (values[idx + 1] - values[idx]) / dt
    return slope if np.ndim(t) else float(slope)


@dataclass(frozen=True)
class CDTerms:
    """Counterdiabatic quantities at one time instant.

    ``cd_rate`` is the signed rotation rate of the mixing angle divided by
    two, (dkappa/dt * delta - kappa * ddelta/dt) / (delta^2 + 4 kappa^2);
    its magnitude is ``kappa_a``.  The sign is what the counterdiabatic
    Hamiltonian needs, the magnitude is what the paper-facing reports quote.
    """

    kappa_a: float      # counterdiabatic coupling magnitude, rad/s
    phi_dot: float      # phase-rotation rate per the active mode, rad/s
    kappa_eff: float    # sqrt(kappa^2 + kappa_a^2), rad/s
    delta_eff: float    # delta - phi_dot, rad/s
    cd_rate: float      # signed nonadiabatic rotation rate, rad/s


def make_lz_schedule(kappa0: float, delta_offset: float, beta: float, t0: float) -> DriveSchedule:
    """Build a Landau-Zener schedule kappa(t) = kappa0, delta(t) = delta_offset + beta (t - t0).

    Parameters
    ----------
    kappa0 : float
        Constant coupling amplitude, rad/s.  Must be positive.
    delta_offset : float
        Detuning offset at the window midpoint t0, rad/s.
    beta : float
        Sweep slope, rad/s^2.  Either sign; the sign sets the sweep direction.
    t0 : float
        Half-window, s.  The schedule is defined on [0, 2 * t0].

    Warns with :class:`NonCrossingSweepWarning` when delta(0) and delta(T)
    have the same sign, i.e. the sweep never crosses resonance.
    """
    if not (kappa0 > 0):
        raise InvalidParameterError(f"kappa0 must be positive, got {kappa0}")
    if not (t0 > 0):
        raise InvalidParameterError(f"t0 must be positive, got {t0}")
    sched = DriveSchedule(kind=LANDAU_ZENER, kappa0=float(kappa0),
                          delta_offset=float(delta_offset), beta=float(beta), t0=float(t0))
    if sched.delta(0.0) * sched.delta(sched.window) > 0:
        warnings.warn(
            "detuning does not change sign over [0, T]; the sweep never crosses resonance",
            NonCrossingSweepWarning, stacklevel=2)
    return sched


def make_sampled_schedule(times, kappa_table, delta_table) -> DriveSchedule:
    """Build a schedule from tabulated controls, interpolated piecewise-linearly.

    ``times`` must start at 0 and increase strictly; the window is times[-1].
    """
    times = np.asarray(times, dtype=float)
    kappa_table = np.asarray(kappa_table, dtype=float)
    delta_table = np.asarray(delta_table, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise InvalidParameterError("times must be a 1-D array with at least two samples")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise InvalidParameterError("times must start at 0 and increase strictly")
    if kappa_table.shape != times.shape or delta_table.shape != times.shape:
        raise InvalidParameterError("kappa_table and delta_table must match times in shape")
    return DriveSchedule(kind=SAMPLED, t0=float(times[-1]) / 2.0, times=times,
                         kappa_table=kappa_table, delta_table=delta_table)


def mixing_angle(kappa: float, delta: float) -> float:
    """Mixing angle Theta = atan2(2 * kappa, delta) in [0, pi] for kappa >= 0.

    Theta parameterizes the rotation from the bare source/drain basis to the
    instantaneous eigenbasis; the eigenvectors use Theta / 2.  Theta -> 0 for
    strong positive detuning, pi/2 at resonance and pi for strong negative
    detuning, so a resonance-crossing sweep walks Theta from pi to 0.
    """
    if kappa == 0.0 and delta == 0.0:
        raise UndefinedAngleError("mixing angle undefined at kappa = delta = 0")
    return math.atan2(2.0 * kappa, delta)


def counterdiabatic_terms(schedule: DriveSchedule, t: float,
                          phi_dot_mode: str = PHI_DOT_VERBATIM,
                          ramp_fraction: float = 0.0) -> CDTerms:
    """Counterdiabatic quantities of ``schedule`` at time ``t``.

    Parameters
    ----------
    schedule : DriveSchedule
    t : float
        Time in [0, T].
    phi_dot_mode : {"verbatim", "off"}
        "verbatim" evaluates phi_dot = 2 delta ddelta^2 / (delta^2 + 4 kappa^2
        + ddelta^2) exactly as printed in the source material (the expression
        mixes rad^2/s^2 and rad^2/s^4 terms, so its value depends on the unit
        system; see the README); "off" forces phi_dot = 0.
    ramp_fraction : float
        When positive, kappa_a (and cd_rate) are multiplied by a smooth
        sine^2 on/off ramp of this duration (as a fraction of T) at both
        window ends, enforcing kappa_a(0) = kappa_a(T) = 0.

    Raises
    ------
    SingularScheduleError
        If delta^2 + 4 kappa^2 = 0 at ``t``.
    """
    if phi_dot_mode not in PHI_DOT_MODES:
        raise InvalidParameterError(f"phi_dot_mode must be one of {PHI_DOT_MODES}, got {phi_dot_mode!r}")
    k = float(schedule.kappa(t))
    d = float(schedule.delta(t))
    kdot = float(schedule.kappa_dot(t))
    ddot = float(schedule.delta_dot(t))
    gap2 = d * d + 4.0 * k * k
    if gap2 == 0.0:
        raise SingularScheduleError(f"delta^2 + 4 kappa^2 vanishes at t = {t:.6e} s")
    rate = (kdot * d - k * ddot) / gap2
    if ramp_fraction > 0.0:
        rate *= _ramp_weight(t, schedule.window, ramp_fraction)
    kappa_a = abs(rate)
    phi_dot = 0.0
    if phi_dot_mode == PHI_DOT_VERBATIM:
        phi_dot = 2.0 * d * ddot * ddot / (gap2 + ddot * ddot)
    kappa_eff = math.hypot(k, kappa_a)
    return CDTerms(kappa_a=kappa_a, phi_dot=phi_dot, kappa_eff=kappa_eff,
                   delta_eff=d - phi_dot, cd_rate=rate)


def _ramp_weight(t: float, window: float, fraction: float) -> float:
    """sin^2 ramp: 0 -> 1 over the first fraction*T, 1 -> 0 over the last."""
    ramp = fraction * window
    if t < ramp:
        return math.sin(0.5 * math.pi * t / ramp) ** 2
    if t > window - ramp:
        return math.sin(0.5 * math.pi * (window - t) / ramp) ** 2
    return 1.0


def adiabaticity_margin(schedule: DriveSchedule, t: float) -> float:
    """Ratio kappa_a / sqrt(4 kappa^2 + delta^2) at time ``t``.

    The nonadiabatic coupling between instantaneous eigenstates equals
    kappa_a, and the eigenvalue gap is sqrt(4 kappa^2 + delta^2); the drive
    is adiabatic at ``t`` when this ratio is much smaller than one.
    """
    terms = counterdiabatic_terms(schedule, t, phi_dot_mode=PHI_DOT_OFF)
    k = float(schedule.kappa(t))
    d = float(schedule.delta(t))
    return terms.kappa_a / math.sqrt(4.0 * k * k + d * d)


def lz_probability(kappa0: float, beta: float) -> float:
    """Diabatic transition probability exp(-2 pi kappa0^2 / |beta|) of a full sweep.

    |beta| handles downward sweeps; beta = 0 (no sweep) is rejected.
    """
    if beta == 0.0:
        raise InvalidParameterError("beta must be nonzero for a Landau-Zener sweep")
    return math.exp(-2.0 * math.pi * kappa0 * kappa0 / abs(beta))


def cd_boundary_report(schedule: DriveSchedule, phi_dot_mode: str = PHI_DOT_VERBATIM,
                       ramp_fraction: float = 0.0) -> dict:
    """Diagnostic ratios kappa_a / kappa_eff at the window ends.

    The counterdiabatic construction assumes the correction vanishes at the
    boundaries; a Landau-Zener schedule only satisfies that asymptotically.
    The returned ratios quantify the residual (0 means exactly satisfied).
    """
    start = counterdiabatic_terms(schedule, 0.0, phi_dot_mode, ramp_fraction)
    end = counterdiabatic_terms(schedule, schedule.window, phi_dot_mode, ramp_fraction)
    return {
        "kappa_a_over_kappa_eff_start": start.kappa_a / start.kappa_eff,
        "kappa_a_over_kappa_eff_end": end.kappa_a / end.kappa_eff,
    }
