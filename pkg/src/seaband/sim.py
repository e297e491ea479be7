"""Coupled time-domain simulation and the chirp-sweep experiment harness.

The integrator advances the drive, gearbox, spring, load, and the
three-node heat network together. The electrical pole (L/R ~ 0.12 ms) is
stiff relative to everything else, so the current state uses an exact
exponential sub-step inside each RK4 mechanical step; dt = 1e-4 s is then
stable and accurate, validated against brute-force small steps. Thermal
states advance once per control tick from the tick-mean winding loss.

A sweep drives the actuator with a phase-continuous linear chirp, bins
the torque response into per-cycle envelope samples keyed to the chirp's
analytic instantaneous frequency, and terminates the run the moment the
winding temperature reaches T_MAX. The accessible bandwidth of the run
is the lower of the -3 dB frequency and the thermal-limit frequency.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .control import PWM_LIMIT, ControlStack
from .defaults import DEFAULT_SEA, DEFAULT_THERMAL, LOCKED_LOAD
from .electromech import LoadParams, SeaParams
from .errors import (ConfigError, DivergenceError, IndeterminateBandwidthError,
                     InsufficientDataError)
from .thermo import ThermalParams, ThermalState

ENVELOPE_SMOOTH_CYCLES = 5


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    control_dt: float = 1e-3
    duration: float | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        ratio = self.control_dt / self.dt
        if self.control_dt < self.dt or abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("control_dt must be an integer multiple of dt")
        if self.duration is not None and self.duration <= 0:
            raise ConfigError("duration must be positive")

    @property
    def n_sub(self):
        return int(round(self.control_dt / self.dt))


@dataclass(frozen=True)
class ChirpSpec:
    amplitude: float
    f_start: float
    f_end: float
    sweep_rate: float = 0.02

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ConfigError("chirp amplitude must be positive")
        if not 0 < self.f_start < self.f_end:
            raise ConfigError("need 0 < f_start < f_end")
        if self.sweep_rate <= 0:
            raise ConfigError("sweep_rate must be positive")

    @property
    def duration(self):
        return (self.f_end - self.f_start) / self.sweep_rate

    def phase(self, t):
        return 2.0 * np.pi * (self.f_start * t + 0.5 * self.sweep_rate * t * t)

    def freq(self, t):
        return self.f_start + self.sweep_rate * t

    def value(self, t):
        return self.amplitude * np.sin(self.phase(t))

    def cycle_boundaries(self, t_end):
        """Times at which the analytic phase completes whole cycles,
        starting with t = 0. Only boundaries inside [0, t_end]."""
        total = self.f_start * t_end + 0.5 * self.sweep_rate * t_end * t_end
        n = int(math.floor(total + 1e-12))
        ks = np.arange(1, n + 1, dtype=float)
        f0 = self.f_start
        r = self.sweep_rate
        t_k = (np.sqrt(f0 * f0 + 2.0 * r * ks) - f0) / r
        return np.concatenate(([0.0], t_k))


@dataclass
class TimeTraces:
    t: np.ndarray
    pwm: np.ndarray
    i_m: np.ndarray
    theta_d: np.ndarray
    torque: np.ndarray
    T_W: np.ndarray
    T_H: np.ndarray
    T_M: np.ndarray
    halted: bool
    halt_time: float | None
    final_state: np.ndarray
    energy: dict = field(default_factory=dict)

    def energy_residual(self):
        """Relative heat-balance error |in - out - stored| / in."""
        e = self.energy
        total_in = e["joule_j"] + e["source_j"]
        resid = abs(total_in - e["convected_j"] - e["stored_j"])
        return resid / max(total_in, 1e-12)


@dataclass
class SweepResult:
    freq_grid: np.ndarray
    torque_magnitude: np.ndarray
    gain: np.ndarray
    winding_temp: np.ndarray
    housing_temp: np.ndarray
    pwm_rms: np.ndarray
    thermal_limit_freq: float | None
    bandwidth_3db: float | None
    accessible_bandwidth: float | None
    terminated_early: bool
    meta: dict = field(default_factory=dict)


def _em_pack(sea, load):
    m = sea.motor
    if load.locked:
        j_l, b_l, locked = 1.0, 0.0, 1.0
    else:
        j_l, b_l, locked = load.J_l, load.B_l, 0.0
    return np.array([m.R, m.L, m.K_e, m.K_tau, m.J_m, m.B_m,
                     sea.K_s, sea.N, j_l, b_l, locked])


def _th_pack(p):
    return np.array([p.R_A, p.alpha_cu, p.T_A, p.R1, p.R2, p.R3,
                     p.C1, p.C2, p.C3, p.i_source, p.T_MAX])


def _initial_state(thermal, initial_thermal):
    y = np.zeros(8)
    if initial_thermal is None:
        y[5] = y[6] = y[7] = thermal.T_A
    else:
        y[5] = initial_thermal.T_W
        y[6] = initial_thermal.T_H
        y[7] = initial_thermal.T_M
    return y


def _energy_dict(acc, thermal, y0, y1):
    stored = (thermal.C1 * (y1[5] - y0[5]) + thermal.C2 * (y1[6] - y0[6])
              + thermal.C3 * (y1[7] - y0[7]))
    return {"joule_j": float(acc[0]), "source_j": float(acc[1]),
            "convected_j": float(acc[2]), "stored_j": float(stored)}


def integrate_coupled(sea: SeaParams, load: LoadParams, thermal: ThermalParams,
                      controller: ControlStack | None, input, cfg: SimConfig,
                      initial_thermal: ThermalState | None = None,
                      d_d: float = 0.0, d_l: float = 0.0):
    """Advance the full state (i_m, theta_m, omega_m, theta_l, omega_l,
    T_W, T_H, T_M) and return traces sampled at the control period.

    input semantics: with a controller, it is the torque reference (a
    ChirpSpec or a callable of time); without one, it is the normalized
    PWM command applied open loop (ChirpSpec, callable, or constant).
    The run halts, without error, at the tick where T_W reaches T_MAX.
    A non-finite state raises a divergence error carrying the time.
    """
    if controller is not None and abs(controller.sample_period - cfg.control_dt) > 1e-12:
        raise ConfigError("controller sample period must equal control_dt")
    chirp = input if isinstance(input, ChirpSpec) else None
    if cfg.duration is not None:
        duration = cfg.duration
    elif chirp is not None:
        duration = chirp.duration
    else:
        raise ConfigError("duration required unless the input is a chirp")

    h = cfg.control_dt
    n_ticks = int(math.ceil(duration / h - 1e-9))
    if n_ticks < 1:
        raise ConfigError("duration shorter than one control tick")
    em = _em_pack(sea, load)
    th = _th_pack(thermal)
    acc = np.zeros(4)
    y = _initial_state(thermal, initial_thermal)
    y0 = y.copy()
    v_nom = sea.V_nominal

    if controller is None and chirp is not None:
        # fully jitted path; chirp evaluated at every integrator stage
        rec = [np.empty(n_ticks) for _ in range(6)]
        amp_v = min(chirp.amplitude, PWM_LIMIT) * v_nom
        done, status = _kernels.run_chirp_open_loop(
            y, n_ticks, cfg.n_sub, cfg.dt, amp_v, chirp.f_start,
            chirp.sweep_rate, d_d, d_l, em, th, acc, *rec)
        if status == _kernels.TICK_DIVERGED:
            raise DivergenceError("non-finite state", t=done * h)
        pwm, thd, i_m, tw, th_h, tm = (r[:done] for r in rec)
        pwm = pwm * min(chirp.amplitude, PWM_LIMIT)
        t = h * np.arange(1, done + 1)
        halted = status == _kernels.TICK_THERMAL
        traces = TimeTraces(t=t, pwm=pwm, i_m=i_m, theta_d=thd,
                            torque=sea.K_s * thd, T_W=tw, T_H=th_h, T_M=tm,
                            halted=halted,
                            halt_time=t[-1] if halted else None,
                            final_state=y.copy())
        traces.energy = _energy_dict(acc, thermal, y0, y)
        return traces

    if chirp is not None:
        ref_fn = chirp.value
    elif callable(input):
        ref_fn = input
    else:
        const = float(input)
        ref_fn = lambda t: const

    rec = np.empty((8, n_ticks))
    halted = False
    done = 0
    for k in range(n_ticks):
        t0 = k * h
        ref = float(ref_fn(t0))
        if controller is not None:
            theta_d = y[1] / sea.N - y[3]
            pwm = controller.step(ref, sea.K_s * theta_d, theta_d, y[0])
        else:
            pwm = min(max(ref, -PWM_LIMIT), PWM_LIMIT)
        status = _kernels.advance_tick(y, t0, cfg.n_sub, cfg.dt, 0,
                                       pwm * v_nom, 0.0, 0.0, d_d, d_l,
                                       em, th, acc)
        thd = y[1] / sea.N - y[3]
        rec[:, k] = (pwm, y[0], thd, sea.K_s * thd, y[5], y[6], y[7], t0 + h)
        done = k + 1
        if status == _kernels.TICK_DIVERGED:
            raise DivergenceError("non-finite state", t=t0 + h)
        if status == _kernels.TICK_THERMAL:
            halted = True
            break

    pwm, i_m, thd, tau, tw, th_h, tm, t = (rec[j, :done] for j in range(8))
    traces = TimeTraces(t=t.copy(), pwm=pwm.copy(), i_m=i_m.copy(),
                        theta_d=thd.copy(), torque=tau.copy(), T_W=tw.copy(),
                        T_H=th_h.copy(), T_M=tm.copy(), halted=halted,
                        halt_time=t[done - 1] if halted else None,
                        final_state=y.copy())
    traces.energy = _energy_dict(acc, thermal, y0, y)
    return traces


def extract_envelope(trace, chirp: ChirpSpec):
    """Per-cycle peak magnitudes keyed to the chirp's instantaneous
    frequency. trace may be TimeTraces or a (t, y) pair. Frequencies are
    taken from the analytic phase at each cycle midpoint, never from
    zero-crossing estimation. Needs at least one whole cycle."""
    if hasattr(trace, "torque"):
        t, y = trace.t, trace.torque
    else:
        t, y = trace
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    bounds = chirp.cycle_boundaries(t[-1])
    if len(bounds) < 2:
        raise InsufficientDataError("trace shorter than one chirp cycle")
    idx = np.searchsorted(t, bounds)
    freqs = np.empty(len(bounds) - 1)
    mags = np.empty(len(bounds) - 1)
    for j in range(len(bounds) - 1):
        lo, hi = idx[j], idx[j + 1]
        seg = y[lo:hi] if hi > lo else y[max(lo - 1, 0):max(hi, 1)]
        mags[j] = np.max(np.abs(seg))
        freqs[j] = chirp.freq(0.5 * (bounds[j] + bounds[j + 1]))
    return freqs, mags


def _smooth(x, window):
    w = min(window, len(x))
    if w <= 1:
        return x
    pad = np.pad(x, (w // 2, w - 1 - w // 2), mode="edge")
    return np.convolve(pad, np.ones(w) / w, mode="valid")


def _crossing_freq(freqs, gains, smooth_window=ENVELOPE_SMOOTH_CYCLES):
    """First -3 dB crossing of a gain curve relative to its low-frequency
    level, with light smoothing so cycle-to-cycle ripple cannot fake a
    crossing. Returns None when the curve never falls through."""
    if len(gains) < 4:
        return None
    sm = _smooth(np.asarray(gains, dtype=float), smooth_window)
    ref = float(np.median(sm[:3]))
    if ref <= 0:
        return None
    target = ref / math.sqrt(2.0)
    below = np.nonzero(sm < target)[0]
    below = below[below > 0]
    if below.size == 0:
        return None
    j = below[0]
    f0, f1 = freqs[j - 1], freqs[j]
    g0, g1 = sm[j - 1], sm[j]
    if g0 == g1:
        return float(f1)
    return float(f0 + (g0 - target) * (f1 - f0) / (g0 - g1))


def _assemble_sweep(traces, chirp, amplitude, meta):
    t = traces.t
    bounds = chirp.cycle_boundaries(t[-1])
    if len(bounds) < 2:
        raise InsufficientDataError("sweep ended before one whole cycle")
    idx = np.searchsorted(t, bounds)
    rows = []
    for j in range(len(bounds) - 1):
        lo, hi = idx[j], idx[j + 1]
        if hi <= lo:
            lo = max(lo - 1, 0)
            hi = lo + 1
        f = chirp.freq(0.5 * (bounds[j] + bounds[j + 1]))
        mag = float(np.max(np.abs(traces.torque[lo:hi])))
        rms = float(np.sqrt(np.mean(traces.pwm[lo:hi] ** 2)))
        rows.append((f, mag, traces.T_W[hi - 1], traces.T_H[hi - 1], rms))
    if traces.halted and idx[-1] < len(t):
        # partial cycle up to the halt tick keeps the envelope flush with
        # the recorded thermal-limit frequency
        lo = idx[-1]
        f = chirp.freq(traces.halt_time)
        mag = float(np.max(np.abs(traces.torque[lo:])))
        rms = float(np.sqrt(np.mean(traces.pwm[lo:] ** 2)))
        rows.append((f, mag, traces.T_W[-1], traces.T_H[-1], rms))

    arr = np.array(rows)
    freqs, mags, tw, th_h, rms = (arr[:, j] for j in range(5))
    gains = mags / amplitude
    thermal_limit = chirp.freq(traces.halt_time) if traces.halted else None
    bw = _crossing_freq(freqs, gains)
    if bw is None and thermal_limit is None:
        accessible = None
    elif bw is None:
        accessible = thermal_limit
    elif thermal_limit is None:
        accessible = bw
    else:
        accessible = min(bw, thermal_limit)
    meta = dict(meta)
    meta.update(amplitude=amplitude, f_start=chirp.f_start,
                f_end=chirp.f_end, sweep_rate=chirp.sweep_rate,
                energy_residual=traces.energy_residual())
    return SweepResult(freq_grid=freqs, torque_magnitude=mags, gain=gains,
                       winding_temp=tw, housing_temp=th_h, pwm_rms=rms,
                       thermal_limit_freq=thermal_limit, bandwidth_3db=bw,
                       accessible_bandwidth=accessible,
                       terminated_early=traces.halted, meta=meta)


def run_open_loop_sweep(amplitude: float, chirp: ChirpSpec,
                        load: LoadParams = LOCKED_LOAD,
                        sea: SeaParams = DEFAULT_SEA,
                        thermal: ThermalParams = DEFAULT_THERMAL,
                        cfg: SimConfig | None = None,
                        initial_thermal: ThermalState | None = None):
    """Chirp the PWM command with no feedback and envelope the response.

    amplitude overrides chirp.amplitude and must lie in (0, 1]."""
    if not 0.0 < amplitude <= PWM_LIMIT:
        raise ConfigError("open-loop amplitude must lie in (0, 1]")
    cfg = cfg or SimConfig()
    drive = ChirpSpec(amplitude, chirp.f_start, chirp.f_end, chirp.sweep_rate)
    traces = integrate_coupled(sea, load, thermal, None, drive, cfg,
                               initial_thermal=initial_thermal)
    meta = {"mode": "open_loop", "dt": cfg.dt, "control_dt": cfg.control_dt,
            "load": "locked" if load.locked else {"J_l": load.J_l, "B_l": load.B_l}}
    return _assemble_sweep(traces, drive, amplitude, meta)


def run_closed_loop_sweep(torque_amplitude: float, chirp: ChirpSpec,
                          stack: ControlStack,
                          sea: SeaParams = DEFAULT_SEA,
                          thermal: ThermalParams = DEFAULT_THERMAL,
                          cfg: SimConfig | None = None,
                          initial_thermal: ThermalState | None = None):
    """Chirp the torque reference through the control stack against the
    locked-output plant; gain is measured amplitude over reference."""
    if torque_amplitude <= 0:
        raise ConfigError("torque amplitude must be positive")
    cfg = cfg or SimConfig()
    ref = ChirpSpec(torque_amplitude, chirp.f_start, chirp.f_end,
                    chirp.sweep_rate)
    stack.reset()
    traces = integrate_coupled(sea, LOCKED_LOAD, thermal, stack, ref, cfg,
                               initial_thermal=initial_thermal)
    meta = {"mode": "closed_loop", "dt": cfg.dt, "control_dt": cfg.control_dt,
            "load": "locked",
            "regulator": stack.regulator is not None,
            "observer": stack.dob is not None}
    return _assemble_sweep(traces, ref, torque_amplitude, meta)


def run_open_loop_family(amplitudes, chirp: ChirpSpec,
                         load: LoadParams = LOCKED_LOAD,
                         sea: SeaParams = DEFAULT_SEA,
                         thermal: ThermalParams = DEFAULT_THERMAL,
                         cfg: SimConfig | None = None, max_workers=None):
    """Open-loop sweeps over an amplitude family. Jobs share nothing and
    run on a thread pool; the integration kernel drops the GIL."""
    amplitudes = list(amplitudes)
    with ThreadPoolExecutor(max_workers=max_workers or len(amplitudes)) as ex:
        futs = [ex.submit(run_open_loop_sweep, a, chirp, load, sea, thermal, cfg)
                for a in amplitudes]
        return {a: f.result() for a, f in zip(amplitudes, futs)}


def accessible_bandwidth(result: SweepResult):
    """min(bandwidth_3db, thermal_limit_freq), treating a missing side
    as unbounded; raises when the sweep pinned down neither."""
    bw = result.bandwidth_3db
    tl = result.thermal_limit_freq
    if bw is None and tl is None:
        raise IndeterminateBandwidthError(
            "sweep crossed neither -3 dB nor the thermal limit")
    return min(bw if bw is not None else math.inf,
               tl if tl is not None else math.inf)


def sine_response(freq_hz, amplitude, stack: ControlStack,
                  sea: SeaParams = DEFAULT_SEA,
                  load: LoadParams = LOCKED_LOAD,
                  thermal: ThermalParams = DEFAULT_THERMAL,
                  cfg: SimConfig | None = None,
                  settle_cycles: int = 10, measure_cycles: int = 10,
                  min_settle_time: float = 0.5,
                  min_measure_time: float = 1.0):
    """Steady-state complex gain of the closed torque loop at one
    frequency, by quadrature demodulation over whole cycles.

    Cycle counts are floors: the settle window also waits out the
    plant's own transient (min_settle_time) and the measurement window
    spans at least min_measure_time, so high-frequency probes are not
    biased by startup leakage."""
    cfg = cfg or SimConfig()
    w = 2.0 * math.pi * freq_hz
    period = 1.0 / freq_hz
    settle = max(settle_cycles * period, min_settle_time)
    n_meas = max(measure_cycles, int(math.ceil(min_measure_time / period)))
    total = settle + n_meas * period
    run_cfg = SimConfig(cfg.dt, cfg.control_dt, total)
    stack.reset()
    ref = lambda t: amplitude * math.sin(w * t)
    traces = integrate_coupled(sea, load, thermal, stack, ref, run_cfg)
    t0 = traces.t[-1] - n_meas * period
    sel = traces.t >= t0 - 1e-12
    t = traces.t[sel]
    y = traces.torque[sel]
    demod = np.exp(-1j * w * t)
    # reference phasor sampled the same way, so ZOH delay cancels
    r = amplitude * np.sin(w * (t - run_cfg.control_dt))
    g_y = 2.0 * np.mean(y * demod)
    g_r = 2.0 * np.mean(r * demod)
    return complex(g_y / g_r)


def write_sweep_csv(path, result: SweepResult):
    with open(path, "w") as fh:
        fh.write("freq_hz,torque_mag_nm,gain,winding_temp_c,"
                 "housing_temp_c,pwm_rms\n")
        for j in range(len(result.freq_grid)):
            fh.write("%.6f,%.6g,%.6g,%.4f,%.4f,%.6g\n" % (
                result.freq_grid[j], result.torque_magnitude[j],
                result.gain[j], result.winding_temp[j],
                result.housing_temp[j], result.pwm_rms[j]))


def sweep_summary(result: SweepResult):
    return {
        "bandwidth_3db_hz": result.bandwidth_3db,
        "thermal_limit_hz": result.thermal_limit_freq,
        "accessible_bandwidth_hz": result.accessible_bandwidth,
        "terminated_early": bool(result.terminated_early),
        "config": result.meta,
    }


def write_sweep_summary_json(path, result: SweepResult):
    with open(path, "w") as fh:
        json.dump(sweep_summary(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
