"""Four-body lumped thermal network: winding, housing, motor proximity, ambient.

Node balances, the copper-loss feedback steady state, nominal and overload
current analysis, and the online winding-temperature estimator used by the
control stack. Temperatures are degrees Celsius throughout; every formula
operates on differences, so no Kelvin conversion is needed (asserted at the
formula sites below).
"""

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    SamplingAdequacyError,
    ThermalRunawayError,
    ZeroHeadroomError,
)

__all__ = [
    "ThermalParams",
    "ThermalState",
    "OverloadBudget",
    "joule_power",
    "thermal_derivatives",
    "steady_state_winding_temp",
    "nominal_current",
    "overload_budget",
    "overload_transient",
    "estimate_winding_temp",
    "WindingTempEstimator",
    "integrate_thermal",
    "read_telemetry_csv",
    "write_estimate_csv",
    "estimate_from_telemetry",
]

# Short-term-operation bound on the overload on-time, in units of tau1.
OVERLOAD_CAP_TAU1 = 5.0


@dataclass(frozen=True)
class ThermalParams:
    """Network element values. Capacitances are derived as C_k = tau_k/R_k
    since bench identification yields time constants and resistances.

    tau3 ships as a lower bound (the slow node settles beyond the record
    length of typical identification runs); downstream fits flag it.
    """

    R1: float = 5.368        # K/W, winding -> housing
    R2: float = 1.253        # K/W, housing -> motor proximity
    R3: float = 0.357        # K/W, proximity -> ambient
    tau1: float = 1.49       # s
    tau2: float = 13.66      # s
    tau3: float = 60.0       # s, lower bound
    alpha_cu: float = 3.93e-3  # 1/K, copper resistance drift
    R_A: float = 6.840       # ohm, winding resistance at T_A
    T_A: float = 25.0        # degC ambient
    i_source: float = 0.0    # W, auxiliary electronics heat injected at the proximity node
    T_MAX: float = 130.0     # degC, winding limit

    def __post_init__(self):
        for name in ("R1", "R2", "R3", "tau1", "tau2", "tau3", "R_A"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"ThermalParams.{name} must be strictly positive")
        if self.tau1 >= self.tau2:
            raise ValueError(
                f"estimator validity needs tau1 < tau2, got {self.tau1} >= {self.tau2}")
        if self.T_MAX <= self.T_A:
            raise ValueError("T_MAX must exceed ambient")

    @property
    def C1(self):
        return self.tau1 / self.R1

    @property
    def C2(self):
        return self.tau2 / self.R2

    @property
    def C3(self):
        return self.tau3 / self.R3

    @property
    def sum_R(self):
        return self.R1 + self.R2 + self.R3


@dataclass
class ThermalState:
    T_W: float
    T_H: float
    T_M: float

    @classmethod
    def ambient(cls, p: ThermalParams):
        return cls(p.T_A, p.T_A, p.T_A)


@dataclass(frozen=True)
class OverloadBudget:
    K_o: float
    t_on: float        # s; math.inf when the loading is steady-state safe
    t_beta: float      # degC, implied steady overload winding temperature
    capped: bool       # True when the raw on-time exceeded 5*tau1


def joule_power(i_m, T_W, p: ThermalParams):
    """Copper loss R_A*(1 + alpha*(T_W - T_A))*i^2; difference in degC == K."""
    return p.R_A * (1.0 + p.alpha_cu * (T_W - p.T_A)) * i_m * i_m


def thermal_derivatives(s: ThermalState, i_m, p: ThermalParams):
    """Node balances of the network, solved for the temperature rates.

    winding:   C1 dT_W = P_J - (T_W - T_H)/R1
    housing:   C2 dT_H = (T_W - T_H)/R1 - (T_H - T_M)/R2
    proximity: C3 dT_M = (T_H - T_M)/R2 + i_source - (T_M - T_A)/R3
    """
    pj = joule_power(i_m, s.T_W, p)
    q1 = (s.T_W - s.T_H) / p.R1
    q2 = (s.T_H - s.T_M) / p.R2
    q3 = (s.T_M - p.T_A) / p.R3
    return ThermalState(
        T_W=(pj - q1) / p.C1,
        T_H=(q1 - q2) / p.C2,
        T_M=(q2 + p.i_source - q3) / p.C3,
    )


def steady_state_winding_temp(i_m, p: ThermalParams):
    """Capacitors open: T_A + (i^2 R_A sum_R + i_source R3)/(1 - alpha i^2 R_A sum_R).

    The denominator expresses copper-loss feedback; at or below zero the
    operating point has no steady state.
    """
    drive = i_m * i_m * p.R_A * p.sum_R
    denom = 1.0 - p.alpha_cu * drive
    if denom <= 0.0:
        raise ThermalRunawayError(
            f"alpha_cu*i^2*R_A*sum_R = {p.alpha_cu * drive:.4f} >= 1; no steady state at {i_m} A")
    return p.T_A + (drive + p.i_source * p.R3) / denom


def nominal_current(p: ThermalParams):
    """Current whose steady-state winding temperature equals T_MAX.

    Closed-form inversion of the steady-state expression:
        i_N = sqrt((T_MAX - T_A - i_source*R3) / (R_A*sum_R*(1 + alpha*(T_MAX - T_A))))
    """
    headroom = (p.T_MAX - p.T_A) - p.i_source * p.R3
    if headroom <= 0.0:
        raise ZeroHeadroomError(
            f"i_source alone contributes {p.i_source * p.R3:.2f} K of the "
            f"{p.T_MAX - p.T_A:.2f} K budget; no current headroom")
    i_n = math.sqrt(headroom / (p.R_A * p.sum_R * (1.0 + p.alpha_cu * (p.T_MAX - p.T_A))))
    return i_n


def overload_budget(i_O, T_H_initial, p: ThermalParams):
    """Overload constant and maximum safe on-time starting from a warm housing.

        K_o  = (i_O/i_N) * sqrt((T_MAX - T_A)*R1 / ((T_MAX - T_H)*sum_R))
        t_on = tau1 * ln(K_o^2/(K_o^2 - 1))     (K_o > 1)

    K_o <= 1 is steady-state safe: t_on is unbounded (math.inf). Finite
    on-times are capped at 5*tau1 (short-term-operation bound) with
    capped=True. t_beta is the implied steady overload temperature, the
    unique level consistent with the first-order winding transient reaching
    T_MAX at exactly t_on.
    """
    if T_H_initial >= p.T_MAX:
        raise ZeroHeadroomError(
            f"housing already at {T_H_initial} degC >= T_MAX = {p.T_MAX} degC")
    i_n = nominal_current(p)
    k_o = (i_O / i_n) * math.sqrt(
        (p.T_MAX - p.T_A) * p.R1 / ((p.T_MAX - T_H_initial) * p.sum_R))
    t_beta = T_H_initial + k_o * k_o * (p.T_MAX - T_H_initial)
    if k_o <= 1.0:
        return OverloadBudget(K_o=k_o, t_on=math.inf, t_beta=t_beta, capped=False)
    raw = p.tau1 * math.log(k_o * k_o / (k_o * k_o - 1.0))
    cap = OVERLOAD_CAP_TAU1 * p.tau1
    if raw > cap:
        return OverloadBudget(K_o=k_o, t_on=cap, t_beta=t_beta, capped=True)
    return OverloadBudget(K_o=k_o, t_on=raw, t_beta=t_beta, capped=False)


def overload_transient(T_H, T_beta, t, p: ThermalParams):
    """First-order winding transient T_H + (T_beta - T_H)*(1 - e^(-t/tau1))."""
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return T_H + (T_beta - T_H) * (1.0 - math.exp(-t / p.tau1))


def _check_dt(dt, p):
    if dt <= 0.0:
        raise SamplingAdequacyError(f"dt must be positive, got {dt}")
    if dt > p.tau1 / 5.0:
        raise SamplingAdequacyError(
            f"dt = {dt} s too coarse for tau1 = {p.tau1} s (need dt <= tau1/5)")


def estimate_winding_temp(prev, T_H_now, i_m_now, dt, p: ThermalParams):
    """One step of the winding estimator given a housing temperature stream.

    Exact zero-order-hold discretization of the R1-C1 subsection:
        dT[k] = dT[k-1]*e^(-dt/tau1) + R1*(1 - e^(-dt/tau1))*P_J[k]
        T_W[k] = T_H[k] + dT[k]
    with P_J evaluated at the previous winding estimate. `prev` is the
    (T_W, T_H) estimate pair from the last step.
    """
    _check_dt(dt, p)
    t_w_prev, t_h_prev = prev
    decay = math.exp(-dt / p.tau1)
    pj = joule_power(i_m_now, t_w_prev, p)
    d_t = (t_w_prev - t_h_prev) * decay + p.R1 * (1.0 - decay) * pj
    return T_H_now + d_t


class WindingTempEstimator:
    """Streaming estimator; runs a companion housing recursion when no
    measured housing temperature is available.

    The companion channel treats the temperature just outside the motor as
    ambient (the network's proximity node collapsed into T_A), so the
    housing settles at T_A + R2*P_J with time constant tau2.
    """

    def __init__(self, p: ThermalParams, T_W0=None, T_H0=None):
        self.p = p
        self._w0 = p.T_A if T_W0 is None else float(T_W0)
        self._h0 = p.T_A if T_H0 is None else float(T_H0)
        self.T_W = self._w0
        self.T_H = self._h0

    def reset(self):
        self.T_W = self._w0
        self.T_H = self._h0

    def update(self, i_m, dt, T_H_meas=None):
        """Advance one sample; returns the new winding estimate (degC)."""
        p = self.p
        _check_dt(dt, p)
        pj = joule_power(i_m, self.T_W, p)
        if T_H_meas is None:
            decay_h = math.exp(-dt / p.tau2)
            d_h = (self.T_H - p.T_A) * decay_h + p.R2 * (1.0 - decay_h) * pj
            t_h_now = p.T_A + d_h
        else:
            t_h_now = float(T_H_meas)
        decay = math.exp(-dt / p.tau1)
        d_t = (self.T_W - self.T_H) * decay + p.R1 * (1.0 - decay) * pj
        self.T_H = t_h_now
        self.T_W = t_h_now + d_t
        return self.T_W


def integrate_thermal(p: ThermalParams, current, t_end, dt=0.01, state0=None):
    """Fixed-step RK4 of the three-node ODE under a current profile.

    current: scalar (held constant) or callable t -> A. Returns
    (t, T_W, T_H, T_M) arrays including both endpoints. Thermal time
    constants are >= tau1, so dt around 10 ms is deeply converged; used for
    closed-form cross-checks and estimator ground truth.
    """
    if callable(current):
        i_of_t = current
    else:
        i_const = float(current)
        i_of_t = lambda t: i_const
    n = int(round(t_end / dt))
    t = np.arange(n + 1) * dt
    out = np.empty((n + 1, 3))
    s = ThermalState.ambient(p) if state0 is None else replace(state0)
    out[0] = (s.T_W, s.T_H, s.T_M)

    r1, r2, r3 = p.R1, p.R2, p.R3
    c1, c2, c3 = p.C1, p.C2, p.C3
    r_a, alpha, t_a, i_src = p.R_A, p.alpha_cu, p.T_A, p.i_source

    def rates(w, h, m, i_m):
        pj = r_a * (1.0 + alpha * (w - t_a)) * i_m * i_m
        q1 = (w - h) / r1
        q2 = (h - m) / r2
        return ((pj - q1) / c1,
                (q1 - q2) / c2,
                (q2 + i_src - (m - t_a) / r3) / c3)

    w, h, m = s.T_W, s.T_H, s.T_M
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n):
        tk = k * dt
        i0 = i_of_t(tk)
        ih = i_of_t(tk + half)
        i1 = i_of_t(tk + dt)
        a1, b1, g1 = rates(w, h, m, i0)
        a2, b2, g2 = rates(w + half * a1, h + half * b1, m + half * g1, ih)
        a3, b3, g3 = rates(w + half * a2, h + half * b2, m + half * g2, ih)
        a4, b4, g4 = rates(w + dt * a3, h + dt * b3, m + dt * g3, i1)
        w += sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        h += sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        m += sixth * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
        out[k + 1] = (w, h, m)
    return t, out[:, 0], out[:, 1], out[:, 2]


def read_telemetry_csv(path):
    """Telemetry columns: time_s, current_A, optional housing_temp_C."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty telemetry file")
        cols = [c.strip() for c in reader.fieldnames]
        if "time_s" not in cols or "current_A" not in cols:
            raise ValueError(
                f"{path}: need columns time_s, current_A; got {cols}")
        has_housing = "housing_temp_C" in cols
        t, i, th = [], [], []
        for row in reader:
            t.append(float(row["time_s"]))
            i.append(float(row["current_A"]))
            if has_housing:
                th.append(float(row["housing_temp_C"]))
    t = np.asarray(t)
    if len(t) < 2 or np.any(np.diff(t) <= 0.0):
        raise ValueError(f"{path}: time_s must be strictly increasing with >= 2 rows")
    return t, np.asarray(i), (np.asarray(th) if has_housing else None)


def estimate_from_telemetry(t, i_m, p: ThermalParams, T_H_meas=None):
    """Run the streaming estimator over a telemetry record."""
    est = WindingTempEstimator(p, T_H0=(T_H_meas[0] if T_H_meas is not None else None))
    out = np.empty(len(t))
    out[0] = est.T_W
    for k in range(1, len(t)):
        dt = t[k] - t[k - 1]
        meas = T_H_meas[k] if T_H_meas is not None else None
        out[k] = est.update(i_m[k], dt, T_H_meas=meas)
    return out


def write_estimate_csv(path, t, t_w_est):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "T_W_est_C"])
        for ti, yi in zip(t, t_w_est):
            writer.writerow([f"{ti:.6g}", f"{yi:.6f}"])
