"""Jitted fixed-step integration kernels for the coupled simulation.

State layout (float64[8]): i_m, theta_m, omega_m, theta_l, omega_l,
T_W, T_H, T_M.

The electrical pole (L/R ~ 0.12 ms) is handled with an exact exponential
sub-step inside each RK4 mechanical step: stage currents relax
exponentially toward the instantaneous equilibrium (V - K_e*omega)/R, and
the end-of-step current uses the exact first-order-hold convolution. This
keeps dt = 1e-4 s stable and accurate instead of forcing dt ~ 1e-5.

Thermal states advance once per control tick (the decimated rate) from the
tick-mean Joule power; tau1 >= 1.49 s makes that deeply converged.

Parameter packs:
  em[11] = R, L, K_e, K_tau, J_m, B_m, K_s, N, J_l, B_l, locked(0/1)
  th[11] = R_A, alpha, T_A, R1, R2, R3, C1, C2, C3, i_source, T_MAX
  acc[4] = heat in (J), source in (J), heat out (J), reserved
"""

import numpy as np
from numba import njit

TICK_OK = 0
TICK_THERMAL = 1
TICK_DIVERGED = 2


@njit(cache=True)
def _chirp_v(t, amp_v, f0, rate):
    phase = 2.0 * np.pi * (f0 * t + 0.5 * rate * t * t)
    return amp_v * np.sin(phase)


@njit(cache=True)
def _mech_rates(i_m, th_m, w_m, th_l, w_l, d_d, d_l, em):
    K_tau = em[3]
    J_m = em[4]
    B_m = em[5]
    K_s = em[6]
    N = em[7]
    locked = em[10] != 0.0
    theta_d = th_m / N - th_l
    spring = K_s * theta_d + d_d
    dw_m = (K_tau * i_m - spring / N - B_m * w_m) / J_m
    if locked:
        return w_m, dw_m, 0.0, 0.0
    J_l = em[8]
    B_l = em[9]
    dw_l = (spring + d_l - B_l * w_l) / J_l
    return w_m, dw_m, w_l, dw_l


@njit(cache=True, nogil=True)
def advance_tick(y, t0, n_sub, dt, v_mode, v_a, v_b, v_c, d_d, d_l, em, th, acc):
    """Advance one control tick: n_sub mechanical RK4 steps with the
    electrical exponential sub-step, then one thermal RK4 step from the
    tick-mean Joule power. v_mode 0: constant voltage v_a held over the
    tick (ZOH); v_mode 1: chirp v_a*sin(2*pi*(v_b*t + v_c*t^2/2)) evaluated
    at every stage time. Returns TICK_OK/TICK_THERMAL/TICK_DIVERGED.
    """
    R = em[0]
    L = em[1]
    K_e = em[2]
    tau_e = L / R
    e_full = np.exp(-dt / tau_e)
    e_half = np.exp(-0.5 * dt / tau_e)
    phi0 = 1.0 - e_full
    phi1 = 1.0 - (tau_e / dt) * phi0

    r_a = th[0]
    alpha = th[1]
    t_amb = th[2]

    pj_sum = 0.0
    t_w = y[5]
    for k in range(n_sub):
        t = t0 + k * dt
        if v_mode == 0:
            v0 = v_a
            vh = v_a
            v1 = v_a
        else:
            v0 = _chirp_v(t, v_a, v_b, v_c)
            vh = _chirp_v(t + 0.5 * dt, v_a, v_b, v_c)
            v1 = _chirp_v(t + dt, v_a, v_b, v_c)

        i0 = y[0]
        th_m = y[1]
        w_m = y[2]
        th_l = y[3]
        w_l = y[4]

        # RK4 stages; stage current relaxes toward the stage equilibrium
        k1_tm, k1_wm, k1_tl, k1_wl = _mech_rates(i0, th_m, w_m, th_l, w_l, d_d, d_l, em)

        w_s = w_m + 0.5 * dt * k1_wm
        i_eq = (vh - K_e * w_s) / R
        i_s = i_eq + (i0 - i_eq) * e_half
        k2_tm, k2_wm, k2_tl, k2_wl = _mech_rates(
            i_s, th_m + 0.5 * dt * k1_tm, w_s,
            th_l + 0.5 * dt * k1_tl, w_l + 0.5 * dt * k1_wl, d_d, d_l, em)

        w_s = w_m + 0.5 * dt * k2_wm
        i_eq = (vh - K_e * w_s) / R
        i_s = i_eq + (i0 - i_eq) * e_half
        k3_tm, k3_wm, k3_tl, k3_wl = _mech_rates(
            i_s, th_m + 0.5 * dt * k2_tm, w_s,
            th_l + 0.5 * dt * k2_tl, w_l + 0.5 * dt * k2_wl, d_d, d_l, em)

        w_s = w_m + dt * k3_wm
        i_eq = (v1 - K_e * w_s) / R
        i_s = i_eq + (i0 - i_eq) * e_full
        k4_tm, k4_wm, k4_tl, k4_wl = _mech_rates(
            i_s, th_m + dt * k3_tm, w_s,
            th_l + dt * k3_tl, w_l + dt * k3_wl, d_d, d_l, em)

        y[1] = th_m + (dt / 6.0) * (k1_tm + 2.0 * k2_tm + 2.0 * k3_tm + k4_tm)
        y[2] = w_m + (dt / 6.0) * (k1_wm + 2.0 * k2_wm + 2.0 * k3_wm + k4_wm)
        y[3] = th_l + (dt / 6.0) * (k1_tl + 2.0 * k2_tl + 2.0 * k3_tl + k4_tl)
        y[4] = w_l + (dt / 6.0) * (k1_wl + 2.0 * k2_wl + 2.0 * k3_wl + k4_wl)

        # exact step of L di/dt = (g - R i) with g linear over the sub-step
        g0 = v0 - K_e * w_m
        g1 = v1 - K_e * y[2]
        y[0] = e_full * i0 + (g0 * phi0 + (g1 - g0) * phi1) / R

        # winding temperature held over the tick inside the loss term
        pj_sum += r_a * (1.0 + alpha * (t_w - t_amb)) * y[0] * y[0]

    pj_mean = pj_sum / n_sub

    # one thermal RK4 step over the whole tick with constant forcing
    h = n_sub * dt
    r1 = th[3]
    r2 = th[4]
    r3 = th[5]
    c1 = th[6]
    c2 = th[7]
    c3 = th[8]
    i_src = th[9]
    t_max = th[10]

    tw = y[5]
    thh = y[6]
    tm = y[7]

    a1_w = (pj_mean - (tw - thh) / r1) / c1
    a1_h = ((tw - thh) / r1 - (thh - tm) / r2) / c2
    a1_m = ((thh - tm) / r2 + i_src - (tm - t_amb) / r3) / c3

    w2 = tw + 0.5 * h * a1_w
    h2 = thh + 0.5 * h * a1_h
    m2 = tm + 0.5 * h * a1_m
    a2_w = (pj_mean - (w2 - h2) / r1) / c1
    a2_h = ((w2 - h2) / r1 - (h2 - m2) / r2) / c2
    a2_m = ((h2 - m2) / r2 + i_src - (m2 - t_amb) / r3) / c3

    w3 = tw + 0.5 * h * a2_w
    h3 = thh + 0.5 * h * a2_h
    m3 = tm + 0.5 * h * a2_m
    a3_w = (pj_mean - (w3 - h3) / r1) / c1
    a3_h = ((w3 - h3) / r1 - (h3 - m3) / r2) / c2
    a3_m = ((h3 - m3) / r2 + i_src - (m3 - t_amb) / r3) / c3

    w4 = tw + h * a3_w
    h4 = thh + h * a3_h
    m4 = tm + h * a3_m
    a4_w = (pj_mean - (w4 - h4) / r1) / c1
    a4_h = ((w4 - h4) / r1 - (h4 - m4) / r2) / c2
    a4_m = ((h4 - m4) / r2 + i_src - (m4 - t_amb) / r3) / c3

    y[5] = tw + (h / 6.0) * (a1_w + 2.0 * a2_w + 2.0 * a3_w + a4_w)
    y[6] = thh + (h / 6.0) * (a1_h + 2.0 * a2_h + 2.0 * a3_h + a4_h)
    y[7] = tm + (h / 6.0) * (a1_m + 2.0 * a2_m + 2.0 * a3_m + a4_m)

    # tick-level energy bookkeeping, consistent with the scheme above
    acc[0] += pj_mean * h
    acc[1] += i_src * h
    acc[2] += 0.5 * ((tm - t_amb) + (y[7] - t_amb)) / r3 * h

    ok = True
    for j in range(8):
        if not np.isfinite(y[j]):
            ok = False
    # magnitude net: a blown-up integration can stay finite for a while
    # yet push states far past anything the physics allows (stall current
    # 3.5 A, no-load speed 8.6e3 rad/s, lossless ceiling ~6e2 C). Such a
    # state must not be read as a thermal halt.
    if abs(y[0]) > 1.0e4 or abs(y[2]) > 1.0e7 or abs(y[4]) > 1.0e7:
        ok = False
    if abs(y[5]) > 2.0e3 or abs(y[6]) > 2.0e3 or abs(y[7]) > 2.0e3:
        ok = False
    if not ok:
        return TICK_DIVERGED
    if y[5] >= t_max:
        return TICK_THERMAL
    return TICK_OK


@njit(cache=True, nogil=True)
def run_chirp_open_loop(y, n_ticks, n_sub, dt, amp_v, f0, rate, d_d, d_l,
                        em, th, acc, rec_pwm, rec_thd, rec_i, rec_tw,
                        rec_th_h, rec_tm):
    """Open-loop chirp driver, fully jitted. Records end-of-tick samples.

    Returns (ticks_done, status). rec_pwm holds the chirp value at the
    tick end (normalized to [-1, 1] by the caller's amp_v scaling).
    """
    status = TICK_OK
    done = 0
    for k in range(n_ticks):
        t0 = k * n_sub * dt
        status = advance_tick(y, t0, n_sub, dt, 1, amp_v, f0, rate,
                              d_d, d_l, em, th, acc)
        t_end = (k + 1) * n_sub * dt
        rec_pwm[k] = _chirp_v(t_end, 1.0, f0, rate)
        rec_thd[k] = y[1] / em[7] - y[3]
        rec_i[k] = y[0]
        rec_tw[k] = y[5]
        rec_th_h[k] = y[6]
        rec_tm[k] = y[7]
        done = k + 1
        if status != TICK_OK:
            break
    return done, status
