"""Built-in analytic invariant suite behind the ``selftest`` subcommand.

Each property has an independent expectation (closed form, asymptotic
formula, or cross-integrator comparison) evaluated at reference parameters;
one PASS/FAIL line is printed per property.  Returns a nonzero exit code if
any property fails.
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import (
    IntegratorConfig,
    evolve_amplitudes_lab,
    evolve_amplitudes_rotating,
    evolve_master,
)
from .metrics import doublecheck_integrals
from .model import CoilPair, adiabatic_basis, adiabatic_populations, rotating_hamiltonian, tqd_hamiltonian
from .schedules import counterdiabatic_terms, lz_probability, make_lz_schedule, mixing_angle


def _norm_conservation():
    coils = CoilPair()
    worst = 0.0
    for kappa0, beta, t0, protocol in [
        (4e4, 3e9, 1e-4, "adiabatic"),
        (4e2, 3e11, 1e-6, "tqd"),
    ]:
        sched = make_lz_schedule(kappa0, 2e5, beta, t0)
        traj = evolve_master(protocol, sched, coils, phi_dot_mode="off")
        worst = max(worst, abs(traj.trace[-1] - 1.0))
    return worst < 1e-6, f"max |trace - 1| = {worst:.2e}"


def _oracle_equivalence():
    sched = make_lz_schedule(4e4, 2e5, 3e9, 1e-4)
    coils = CoilPair(gamma_s=4e3, gamma_d=4e3)
    a = evolve_master("adiabatic", sched, coils)
    b = evolve_amplitudes_rotating("adiabatic", sched, coils)
    diff = float(np.max(np.abs(a.rho - b.rho)))
    return diff < 1e-6, f"max elementwise difference = {diff:.2e}"


def _frame_equivalence():
    coils = CoilPair(gamma_s=3e3, gamma_d=1e3, gamma_w=2e3, omega_s0=1e6, omega_d0=1.2e6)
    cfg = IntegratorConfig(sample_count=400)
    lab = evolve_amplitudes_lab(coils, 4e4, t_span=2e-4, cfg=cfg)
    import warnings
    from .schedules import NonCrossingSweepWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCrossingSweepWarning)
        sched = make_lz_schedule(4e4, 2e5, 0.0, 1e-4)
    rot = evolve_amplitudes_rotating("adiabatic", sched, coils, cfg=cfg)
    diff = max(float(np.max(np.abs(lab.frac_s - rot.frac_s))),
               float(np.max(np.abs(lab.frac_d - rot.frac_d))))
    return diff < 1e-6, f"max population difference = {diff:.2e}"


def _pure_decay():
    import warnings
    from .schedules import NonCrossingSweepWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCrossingSweepWarning)
        sched = make_lz_schedule(1e-6, 1e5, 0.0, 1e-4)  # negligible coupling, no sweep
    g = 4e3
    coils = CoilPair(gamma_s=g, gamma_d=g)
    traj = evolve_master("adiabatic", sched, coils)
    expected = math.exp(-2.0 * g * traj.window)
    err = abs(traj.trace[-1] - expected)
    return err < 1e-9, f"|trace(T) - exp(-2 g T)| = {err:.2e}"


def _resonant_beats():
    import warnings
    from .schedules import NonCrossingSweepWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCrossingSweepWarning)
        sched = make_lz_schedule(4e4, 0.0, 0.0, 5e-5)
    traj = evolve_master("adiabatic", sched, CoilPair())
    expected = np.sin(4e4 * traj.t) ** 2
    err = float(np.max(np.abs(traj.frac_d - expected)))
    return err < 1e-7, f"max |frac_d - sin^2(kappa t)| = {err:.2e}"


def _landau_zener():
    kappa0 = 4e4
    beta = 8 * 0.5 * kappa0**2
    t0 = 80 * kappa0 / beta
    sched = make_lz_schedule(kappa0, 0.0, beta, t0)
    traj = evolve_master("adiabatic", sched, CoilPair())
    expected = lz_probability(kappa0, beta)
    err = abs(traj.frac_s[-1] - expected)
    tol = max(0.02, 0.1 * expected)
    return err < tol, f"|survival - formula| = {err:.4f} (tol {tol:.4f})"


def _transitionless_following():
    kappa0 = 4e4
    beta = 8 * 2.0 * kappa0**2
    t0 = 20 * kappa0 / beta
    sched = make_lz_schedule(kappa0, 0.0, beta, t0)
    u = adiabatic_basis(kappa0, float(sched.delta(0.0)))
    rho0 = np.outer(u[:, 1], u[:, 1]).astype(complex)
    traj = evolve_master("tqd", sched, CoilPair(), rho0=rho0, phi_dot_mode="off")
    low = 1.0
    for i in range(len(traj.t)):
        _, p_minus = adiabatic_populations(traj.rho[i], traj.kappa[i], traj.delta[i])
        low = min(low, p_minus)
    return low > 1.0 - 5e-3, f"min branch population = {low:.6f}"


def _energy_balance():
    sched = make_lz_schedule(4e4, 2e5, 3e9, 1e-4)
    coils = CoilPair(gamma_s=4e3, gamma_d=4e3)
    traj = evolve_master("adiabatic", sched, coils)
    residual = doublecheck_integrals(traj, coils)
    return residual < 1e-5, f"balance residual = {residual:.2e}"


def _counterdiabatic_identity():
    sched = make_lz_schedule(4e4, 2e5, 3e9, 1e-4)
    h = 1e-9 * sched.window
    worst = 0.0
    for t in np.linspace(2 * h, sched.window - 2 * h, 41):
        theta_plus = mixing_angle(float(sched.kappa(t + h)), float(sched.delta(t + h)))
        theta_minus = mixing_angle(float(sched.kappa(t - h)), float(sched.delta(t - h)))
        fd = abs(theta_plus - theta_minus) / (2 * h) / 2.0
        ka = counterdiabatic_terms(sched, float(t), phi_dot_mode="off").kappa_a
        worst = max(worst, abs(fd - ka) / max(ka, 1e-300))
    return worst < 1e-4, f"max relative mismatch = {worst:.2e}"


def _diagonalization():
    worst = 0.0
    sched = make_lz_schedule(4e4, 2e5, 3e9, 1e-4)
    for t in np.linspace(0, sched.window, 17):
        ham = rotating_hamiltonian(sched, float(t))
        u = adiabatic_basis(float(sched.kappa(t)), float(sched.delta(t)))
        m = u.T @ ham.matrix.real @ u
        worst = max(worst, abs(m[0, 1]) / np.linalg.norm(ham.matrix))
    return worst < 1e-10, f"max off-diagonal residue = {worst:.2e}"


def _tqd_static_limit():
    import warnings
    from .schedules import NonCrossingSweepWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCrossingSweepWarning)
        sched = make_lz_schedule(4e4, 2e5, 0.0, 1e-4)
    worst = 0.0
    for t in np.linspace(0, sched.window, 9):
        a = tqd_hamiltonian(sched, float(t), phi_dot_mode="verbatim").matrix
        b = rotating_hamiltonian(sched, float(t)).matrix
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst == 0.0, f"max |H_tqd - H_rot| = {worst:.2e}"


PROPERTIES = [
    ("norm-conservation", _norm_conservation),
    ("oracle-equivalence", _oracle_equivalence),
    ("frame-equivalence", _frame_equivalence),
    ("pure-decay-closed-form", _pure_decay),
    ("resonant-beats-closed-form", _resonant_beats),
    ("landau-zener-formula", _landau_zener),
    ("transitionless-following", _transitionless_following),
    ("energy-balance", _energy_balance),
    ("counterdiabatic-identity", _counterdiabatic_identity),
    ("adiabatic-diagonalization", _diagonalization),
    ("tqd-static-limit", _tqd_static_limit),
]


def run_selftest(config=None) -> int:
    """Run every analytic property; print one PASS/FAIL line each."""
    failures = 0
    for name, prop in PROPERTIES:
        try:
            ok, detail = prop()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures += 1
    print(f"{len(PROPERTIES) - failures}/{len(PROPERTIES)} properties passed")
    return 0 if failures == 0 else 1
