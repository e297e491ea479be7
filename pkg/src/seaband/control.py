"""Torque controller: PID, disturbance observer, thermal throttle.

The stack runs at the control rate (default 1 kHz) on the spring torque
channel. Order per tick: PID on the torque error produces a normalized
effort x, the observer subtracts its disturbance estimate from x, the
thermal stage scales and low-passes the result when the winding estimate
approaches the limit, and the final PWM command is clamped to [-1, 1].

The observer's compensation path is fed the previously applied command
(after throttling and saturation), so the estimate converges to the real
unmodeled torque instead of fighting the thermal stage.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .lti import RationalTF, butterworth_lowpass, discretize, freq_response
from .thermo import ThermalParams, WindingTempEstimator

PWM_LIMIT = 1.0


@dataclass(frozen=True)
class PidConfig:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    derivative_filter_tau: float = 0.0
    output_clamp: float = PWM_LIMIT

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ConfigError("pid gains must be non-negative")
        if self.derivative_filter_tau < 0:
            raise ConfigError("derivative filter tau must be non-negative")
        if self.kd > 0 and self.derivative_filter_tau <= 0:
            raise ConfigError("kd > 0 requires a derivative filter tau")
        if self.output_clamp != PWM_LIMIT:
            raise ConfigError("output clamp is fixed at +/-1 (normalized PWM)")


@dataclass(frozen=True)
class DobConfig:
    nominal_plant: RationalTF
    q_cutoff: float
    q_order: int = 3
    sample_period: float = 1e-3

    def __post_init__(self):
        if self.q_cutoff <= 0:
            raise ConfigError("q_cutoff must be positive rad/s")
        if self.sample_period <= 0:
            raise ConfigError("sample_period must be positive")
        rel = self.nominal_plant.relative_order
        if self.q_order < rel:
            raise ConfigError(
                "q_order %d below nominal plant relative order %d; "
                "Q*P^-1 would be improper" % (self.q_order, rel))

    def discrete_filters(self):
        """Tustin-discretized (Q, Q*P_n^-1) pair; raises ConfigError if
        either comes out unstable at this sample period."""
        q = butterworth_lowpass(self.q_order, self.q_cutoff)
        q_pinv = q * self.nominal_plant.inverse()
        out = []
        for name, tf in (("Q", q), ("Q*P^-1", q_pinv)):
            dz = discretize(tf, self.sample_period)
            poles = np.roots(dz.den) if len(dz.den) > 1 else np.array([])
            if poles.size and np.max(np.abs(poles)) >= 1.0:
                raise ConfigError(
                    "discretized %s filter unstable at Ts=%g" % (name, self.sample_period))
            out.append(dz)
        return out[0], out[1]


@dataclass(frozen=True)
class ThermalRegulatorConfig:
    trigger_fraction: float = 0.95
    min_gain: float = 0.0
    filter_cutoff_max: float = 20.0
    filter_cutoff_min: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.trigger_fraction < 1.0:
            raise ConfigError("trigger_fraction must lie in (0, 1)")
        if not 0.0 <= self.min_gain < 1.0:
            raise ConfigError("min_gain must lie in [0, 1)")
        if self.filter_cutoff_min <= 0:
            raise ConfigError("filter cutoffs must be positive Hz")
        if self.filter_cutoff_max < self.filter_cutoff_min:
            raise ConfigError("filter_cutoff_max must be >= filter_cutoff_min")


class _Df2t:
    """Direct-form II transposed IIR stepper for a z^-1 rational filter."""

    def __init__(self, num, den):
        n = max(len(num), len(den))
        self.b = np.zeros(n)
        self.a = np.zeros(n)
        self.b[:len(num)] = num
        self.a[:len(den)] = den
        self.z = np.zeros(max(n - 1, 1))

    def step(self, x):
        y = self.b[0] * x + self.z[0]
        n = len(self.b)
        for j in range(1, n - 1):
            self.z[j - 1] = self.b[j] * x + self.z[j] - self.a[j] * y
        if n > 1:
            self.z[n - 2] = self.b[n - 1] * x - self.a[n - 1] * y
        return y

    def reset(self):
        self.z[:] = 0.0


@dataclass
class ControlState:
    integrator: float = 0.0
    prev_error: float = 0.0
    deriv_filtered: float = 0.0
    applied_pwm: float = 0.0
    regulator_level: float = 0.0
    regulator_active: bool = False
    x_pid: float = 0.0
    d_hat: float = 0.0
    dob_q: _Df2t | None = None
    dob_qpinv: _Df2t | None = None


def pid_step(state, reference, measurement, dt, cfg):
    """One PID update with conditional anti-windup and a filtered
    derivative. Returns effort clamped to [-1, 1]."""
    err = reference - measurement
    d_raw = (err - state.prev_error) / dt
    if cfg.derivative_filter_tau > 0:
        a = cfg.derivative_filter_tau / (cfg.derivative_filter_tau + dt)
        state.deriv_filtered = a * state.deriv_filtered + (1.0 - a) * d_raw
    else:
        state.deriv_filtered = d_raw
    state.prev_error = err

    integ = state.integrator + cfg.ki * err * dt
    u = cfg.kp * err + integ + cfg.kd * state.deriv_filtered
    if u > PWM_LIMIT:
        # integrate only while it pulls back inside the clamp
        if cfg.ki * err > 0:
            integ = state.integrator
            u = cfg.kp * err + integ + cfg.kd * state.deriv_filtered
        u = min(u, PWM_LIMIT)
    elif u < -PWM_LIMIT:
        if cfg.ki * err < 0:
            integ = state.integrator
            u = cfg.kp * err + integ + cfg.kd * state.deriv_filtered
        u = max(u, -PWM_LIMIT)
    state.integrator = integ
    return min(max(u, -PWM_LIMIT), PWM_LIMIT)


def dob_step(state, x_in, theta_d_meas, cfg):
    """Subtract the filtered disturbance estimate from the incoming
    effort. The inverse-plant path sees the measured deflection; the
    command path sees the previously applied PWM."""
    u_from_meas = state.dob_qpinv.step(theta_d_meas)
    u_from_cmd = state.dob_q.step(state.applied_pwm)
    state.d_hat = u_from_meas - u_from_cmd
    return x_in - state.d_hat


def thermal_regulate(state, pwm_ref, t_w_est, t_max, dt, cfg):
    """Scale and low-pass the command as the winding estimate nears the
    limit. Below trigger_fraction * t_max this is an exact pass-through;
    above it the gain falls linearly to min_gain at t_max and the
    smoothing corner slides from filter_cutoff_max down to
    filter_cutoff_min. Output magnitude never exceeds the input's.
    """
    trigger = cfg.trigger_fraction * t_max
    if t_w_est < trigger:
        state.regulator_level = pwm_ref
        state.regulator_active = False
        return pwm_ref

    state.regulator_active = True
    span = t_max * (1.0 - cfg.trigger_fraction)
    gain = (t_max - t_w_est) / span
    gain = max(cfg.min_gain, min(1.0, gain))

    frac = (t_w_est - trigger) / (t_max - trigger)
    frac = min(max(frac, 0.0), 1.0)
    cutoff_hz = cfg.filter_cutoff_max + (cfg.filter_cutoff_min - cfg.filter_cutoff_max) * frac
    a = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz * dt)
    state.regulator_level += a * (gain * pwm_ref - state.regulator_level)

    bound = abs(pwm_ref)
    return min(max(state.regulator_level, -bound), bound)


class ControlStack:
    """Composable per-tick controller. Any stage may be disabled by
    passing None. When pid is None the reference argument of step() is
    taken directly as the normalized effort x (useful for probing the
    observer loop on its own).
    """

    def __init__(self, pid=None, dob=None, regulator=None,
                 thermal: ThermalParams | None = None,
                 sample_period: float = 1e-3):
        if sample_period <= 0:
            raise ConfigError("sample_period must be positive")
        if dob is not None and abs(dob.sample_period - sample_period) > 1e-12:
            raise ConfigError("observer sample period must match the stack's")
        if regulator is not None and thermal is None:
            raise ConfigError("thermal throttling needs thermal parameters")
        self.pid = pid
        self.dob = dob
        self.regulator = regulator
        self.thermal = thermal
        self.sample_period = sample_period
        self.state = ControlState()
        self._log = None
        self._tick = 0
        if dob is not None:
            qz, qpz = dob.discrete_filters()
            self.state.dob_q = _Df2t(qz.num, qz.den)
            self.state.dob_qpinv = _Df2t(qpz.num, qpz.den)
        self.estimator = WindingTempEstimator(thermal) if thermal is not None else None

    @property
    def winding_estimate(self):
        return self.estimator.T_W if self.estimator is not None else None

    def step(self, reference, torque_meas, theta_d_meas, i_m_meas,
             t_h_meas=None):
        """One control tick: returns the PWM command in [-1, 1]."""
        dt = self.sample_period
        if self.estimator is not None:
            self.estimator.update(i_m_meas, dt, t_h_meas)
        if self.pid is not None:
            x = pid_step(self.state, reference, torque_meas, dt, self.pid)
        else:
            x = reference
        self.state.x_pid = x
        if self.dob is not None:
            x = dob_step(self.state, x, theta_d_meas, self.dob)
        if self.regulator is not None:
            x = thermal_regulate(self.state, x, self.estimator.T_W,
                                 self.thermal.T_MAX, dt, self.regulator)
        pwm = min(max(x, -PWM_LIMIT), PWM_LIMIT)
        self.state.applied_pwm = pwm
        if self._log is not None:
            est = self.estimator.T_W if self.estimator is not None else math.nan
            self._log.write("%.6f,%.9g,%.9g,%.9g,%.9g,%.9g,%.6f\n" % (
                self._tick * dt, reference, torque_meas, self.state.x_pid,
                self.state.d_hat, pwm, est))
        self._tick += 1
        return pwm

    def open_log(self, path):
        """Stream one CSV row per tick into path until close_log().
        Columns: t, ref, meas, x_pid, d_hat, pwm_out, t_w_est."""
        self.close_log()
        self._log = open(path, "w")
        self._log.write("t,ref,meas,x_pid,d_hat,pwm_out,t_w_est\n")

    def close_log(self):
        if self._log is not None:
            self._log.close()
            self._log = None

    def reset(self):
        st = self.state
        st.integrator = 0.0
        st.prev_error = 0.0
        st.deriv_filtered = 0.0
        st.applied_pwm = 0.0
        st.regulator_level = 0.0
        st.regulator_active = False
        st.x_pid = 0.0
        st.d_hat = 0.0
        if st.dob_q is not None:
            st.dob_q.reset()
            st.dob_qpinv.reset()
        if self.estimator is not None:
            self.estimator.reset()
        self._tick = 0


def pid_tf(cfg):
    """Continuous transfer function of the PID law, assembled without
    degenerate factors so integrator-less configs carry no origin pole."""
    c = RationalTF([cfg.kp], [1.0])
    if cfg.ki > 0:
        c = c + RationalTF([cfg.ki], [1.0, 0.0])
    if cfg.kd > 0:
        c = c + RationalTF([cfg.kd, 0.0], [cfg.derivative_filter_tau, 1.0])
    return c


def closed_loop_predicted_tf(pid, plant):
    """Unity-feedback closed loop C*P/(1 + C*P) for the torque channel.

    plant must already be expressed on the torque channel (spring torque
    per unit normalized effort)."""
    c = pid_tf(pid)
    num = np.polymul(c.num, plant.num)
    den = np.polyadd(np.polymul(c.den, plant.den), num)
    return RationalTF(num, den)


def default_pid_config(plant, crossover=None, phase_margin_deg=60.0,
                       sample_period=1e-3):
    """Loop-shape a PI(D) on the given torque plant.

    Picks the open-loop crossover (default: twice the plant corner),
    then meets the phase-margin target with a PI when the plant leaves
    enough phase and adds a filtered lead when it does not.
    """
    from .lti import bandwidth_3db

    if crossover is None:
        crossover = 2.0 * 2.0 * math.pi * bandwidth_3db(plant)
    wc = float(crossover)
    if wc <= 0:
        raise ConfigError("crossover must be positive rad/s")
    if wc >= math.pi / sample_period:
        raise ConfigError("crossover beyond the Nyquist rate")

    p = complex(freq_response(plant, wc))
    phase_p = math.degrees(math.atan2(p.imag, p.real))
    need = -180.0 + phase_margin_deg - phase_p
    tau_f = 1.0 / (10.0 * wc)

    if need <= -1.0:
        # PI alone: place the zero so the integrator lag equals -need
        ti_wc = 1.0 / math.tan(math.radians(-need))
        ti = ti_wc / wc
        mag_c_rel = math.sqrt(1.0 + 1.0 / (ti_wc * ti_wc))
        kp = 1.0 / (abs(p) * mag_c_rel)
        return PidConfig(kp=kp, ki=kp / ti, kd=0.0,
                         derivative_filter_tau=tau_f)

    # lead needed: slow PI zero a decade in, remaining phase from kd
    ti = 10.0 / wc
    phi_pi = math.degrees(math.atan(1.0 / (ti * wc)))
    lead = math.radians(min(need + phi_pi, 70.0))
    # filtered derivative kd*s/(tau_f*s+1) adds atan(kd_wc) - atan(tau_f*wc)
    base = math.atan(tau_f * wc)
    ratio = math.tan(lead + base)
    kd_over_kp = ratio / wc
    c_rel = complex(1.0, -1.0 / (ti * wc)) + complex(0.0, kd_over_kp * wc) / complex(1.0, tau_f * wc)
    kp = 1.0 / (abs(p) * abs(c_rel))
    return PidConfig(kp=kp, ki=kp / ti, kd=kp * kd_over_kp,
                     derivative_filter_tau=tau_f)
