"""Compiled integration kernel shared by every evolution routine.

All three equation families (master equation, rotating-frame amplitudes,
lab-frame amplitudes) are integrated by one Dormand-Prince 5(4) / fixed RK4
loop over a real 4-component state:

    master     y = [rho_ss, Re rho_sd, Im rho_sd, rho_dd]
    amplitudes y = [Re b_s, Im b_s, Re b_d, Im b_d]

Carrying only the independent density-matrix components keeps rho exactly
Hermitian at every step (equivalent to re-symmetrizing rho <- (rho + rho^H)/2
after each step, but without drift to remove).

Parameter vector layout (float64):
    0  schedule kind        0 = Landau-Zener closed form, 1 = sampled tables
    1  kappa0               3  beta
    2  delta_offset         4  t0
    5  protocol             0 = adiabatic, 1 = counterdiabatic (TQD)
    6  phi_dot_mode         0 = off, 1 = verbatim
    7  ramp fraction of T   (0 disables the kappa_a boundary ramp)
    8  window T
    9  equation kind        0 = master, 1 = rotating amplitudes, 2 = lab amplitudes
    10 g1, 11 g2            amplitude decay rates Gamma_s and Gamma_d + Gamma_w
    12 omega_s, 13 omega_d, 14 kappa (lab oracle only)
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, shim for safety
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

STATUS_OK = 0
STATUS_STIFF = 1

METHOD_RK45 = 0
METHOD_RK4 = 1


@njit(cache=True, nogil=True)
def _controls(t, p, times, ktab, dtab):
    """Evaluate (kappa, delta, dkappa/dt, ddelta/dt) at time t."""
    if p[0] == 0.0:
        return p[1], p[2] + p[3] * (t - p[4]), 0.0, p[3]
    n = times.shape[0]
    if t <= times[0]:
        i = 0
    elif t >= times[n - 1]:
        i = n - 2
    else:
        lo, hi = 0, n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if times[mid] <= t:
                lo = mid
            else:
                hi = mid
        i = lo
    dt = times[i + 1] - times[i]
    wk = (ktab[i + 1] - ktab[i]) / dt
    wd = (dtab[i + 1] - dtab[i]) / dt
    tt = min(max(t, times[0]), times[n - 1])
    return ktab[i] + wk * (tt - times[i]), dtab[i] + wd * (tt - times[i]), wk, wd


@njit(cache=True, nogil=True)
def _hamiltonian(t, p, times, ktab, dtab):
    """Return (h11, Re h12, Im h12) of the protocol Hamiltonian at time t."""
    k, d, kdot, ddot = _controls(t, p, times, ktab, dtab)
    if p[5] == 0.0:
        return 0.5 * d, -k, 0.0
    gap2 = d * d + 4.0 * k * k
    rate = (kdot * d - k * ddot) / gap2
    if p[7] > 0.0:
        ramp = p[7] * p[8]
        if t < ramp:
            w = math.sin(0.5 * math.pi * t / ramp)
            rate *= w * w
        elif t > p[8] - ramp:
            w = math.sin(0.5 * math.pi * (p[8] - t) / ramp)
            rate *= w * w
    phi_dot = 0.0
    if p[6] == 1.0:
        phi_dot = 2.0 * d * ddot * ddot / (gap2 + ddot * ddot)
    return 0.5 * (d - phi_dot), -k, rate


@njit(cache=True, nogil=True)
def _rhs(t, y, out, p, times, ktab, dtab):
    if p[9] == 2.0:
        # lab frame: da_s/dt = (j w_s - g1) a_s + j kappa a_d, drain alike
        kap = p[14]
        asr, asi, adr, adi = y[0], y[1], y[2], y[3]
        out[0] = -p[12] * asi - p[10] * asr - kap * adi
        out[1] = p[12] * asr - p[10] * asi + kap * adr
        out[2] = -p[13] * adi - p[11] * adr - kap * asi
        out[3] = p[13] * adr - p[11] * adi + kap * asr
        return
    h11, cr, ci = _hamiltonian(t, p, times, ktab, dtab)
    if p[9] == 1.0:
        # rotating amplitudes: db/dt = (-j H - diag(g1, g2)) b
        bsr, bsi, bdr, bdi = y[0], y[1], y[2], y[3]
        # -j*(h11*bs + c*bd) - g1*bs
        out[0] = h11 * bsi + (cr * bdi + ci * bdr) - p[10] * bsr
        out[1] = -h11 * bsr - (cr * bdr - ci * bdi) - p[10] * bsi
        # -j*(conj(c)*bs - h11*bd) - g2*bd
        out[2] = (cr * bsi - ci * bsr) - h11 * bdi - p[11] * bdr
        out[3] = -(cr * bsr + ci * bsi) + h11 * bdr - p[11] * bdi
        return
    # master equation, y = [pop_s, Re u, Im u, pop_d] with u = rho_sd;
    # populations decay at 2*g, coherence at g1 + g2
    ps, ur, ui, pd = y[0], y[1], y[2], y[3]
    im_cu = ci * ur - cr * ui          # Im(c * conj(u))
    flow = 2.0 * im_cu
    out[0] = flow - 2.0 * p[10] * ps
    out[3] = -flow - 2.0 * p[11] * pd
    # du = -j*(2*h11*u + c*(pd - ps)) - (g1 + g2)*u
    dpop = pd - ps
    out[1] = 2.0 * h11 * ui + ci * dpop - (p[10] + p[11]) * ur
    out[2] = -2.0 * h11 * ur - cr * dpop - (p[10] + p[11]) * ui


@njit(cache=True, nogil=True)
def integrate(y0, t_samples, p, times, ktab, dtab, rtol, atol, max_step, method):
    """Integrate from t_samples[0] hitting every sample time exactly.

    Returns (samples array, stats[accepted, rejected, rhs_evals], status, t_fail).
    """
    n = t_samples.shape[0]
    out = np.empty((n, 4))
    y = y0.copy()
    out[0] = y

    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    k7 = np.empty(4)
    yt = np.empty(4)
    yn = np.empty(4)

    n_acc = 0
    n_rej = 0
    n_rhs = 0

    t_end = t_samples[n - 1]
    h_floor = max(1e-14 * (t_end - t_samples[0]), 1e-300)

    if method == METHOD_RK4:
        for i in range(1, n):
            ta, tb = t_samples[i - 1], t_samples[i]
            span = tb - ta
            m = int(math.ceil(span / max_step)) if max_step < span else 1
            h = span / m
            t = ta
            for _ in range(m):
                _rhs(t, y, k1, p, times, ktab, dtab)
                for j in range(4):
                    yt[j] = y[j] + 0.5 * h * k1[j]
                _rhs(t + 0.5 * h, yt, k2, p, times, ktab, dtab)
                for j in range(4):
                    yt[j] = y[j] + 0.5 * h * k2[j]
                _rhs(t + 0.5 * h, yt, k3, p, times, ktab, dtab)
                for j in range(4):
                    yt[j] = y[j] + h * k3[j]
                _rhs(t + h, yt, k4, p, times, ktab, dtab)
                for j in range(4):
                    y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                t += h
                n_rhs += 4
                n_acc += 1
            out[i] = y
        stats = np.array([float(n_acc), float(n_rej), float(n_rhs)])
        return out, stats, STATUS_OK, t_end

    # Dormand-Prince 5(4), FSAL
    t = t_samples[0]
    _rhs(t, y, k1, p, times, ktab, dtab)
    n_rhs += 1
    h = min(max_step, (t_end - t) * 1e-3)
    if h <= 0.0:
        h = max_step

    for i in range(1, n):
        tb = t_samples[i]
        while t < tb:
            if h > tb - t:
                h = tb - t
            if h > max_step:
                h = max_step
            # stages
            for j in range(4):
                yt[j] = y[j] + h * 0.2 * k1[j]
            _rhs(t + 0.2 * h, yt, k2, p, times, ktab, dtab)
            for j in range(4):
                yt[j] = y[j] + h * (0.075 * k1[j] + 0.225 * k2[j])
            _rhs(t + 0.3 * h, yt, k3, p, times, ktab, dtab)
            for j in range(4):
                yt[j] = y[j] + h * (0.9777777777777777 * k1[j] - 3.7333333333333334 * k2[j]
                                    + 3.5555555555555554 * k3[j])
            _rhs(t + 0.8 * h, yt, k4, p, times, ktab, dtab)
            for j in range(4):
                yt[j] = y[j] + h * (2.9525986892242035 * k1[j] - 11.595793324188385 * k2[j]
                                    + 9.822892851699436 * k3[j] - 0.2908093278463649 * k4[j])
            _rhs(t + 0.8888888888888888 * h, yt, k5, p, times, ktab, dtab)
            for j in range(4):
                yt[j] = y[j] + h * (2.8462752525252526 * k1[j] - 10.757575757575758 * k2[j]
                                    + 8.906422717743473 * k3[j] + 0.2784090909090909 * k4[j]
                                    - 0.2735313036020583 * k5[j])
            _rhs(t + h, yt, k6, p, times, ktab, dtab)
            for j in range(4):
                yn[j] = y[j] + h * (0.09114583333333333 * k1[j] + 0.44923629829290207 * k3[j]
                                    + 0.6510416666666666 * k4[j] - 0.322376179245283 * k5[j]
                                    + 0.13095238095238096 * k6[j])
            _rhs(t + h, yn, k7, p, times, ktab, dtab)
            n_rhs += 6

            # embedded error estimate (5th minus 4th order)
            err = 0.0
            for j in range(4):
                e = h * (0.0012326388888888888 * k1[j] - 0.0042527702905061394 * k3[j]
                         + 0.03697916666666667 * k4[j] - 0.05086379716981132 * k5[j]
                         + 0.0419047619047619 * k6[j] - 0.025 * k7[j])
                sc = atol + rtol * max(abs(y[j]), abs(yn[j]))
                q = e / sc
                err += q * q
            err = math.sqrt(err / 4.0)

            if err <= 1.0:
                t += h
                if tb - t < h_floor:
                    t = tb
                for j in range(4):
                    y[j] = yn[j]
                    k1[j] = k7[j]
                n_acc += 1
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h = h * fac
            else:
                n_rej += 1
                h = h * max(0.2, 0.9 * err ** -0.2)
                if h < h_floor:
                    stats = np.array([float(n_acc), float(n_rej), float(n_rhs)])
                    return out, stats, STATUS_STIFF, t
        out[i] = y
    stats = np.array([float(n_acc), float(n_rej), float(n_rhs)])
    return out, stats, STATUS_OK, t_end
