"""Parameter identification from sweep and step-response records.

Three fitters: a third-order transfer-function fit to frequency-response
samples (complex or magnitude-only), nominal-model selection minimizing
the worst multiplicative mismatch over a candidate family, and a
two-stage thermal-network fit that pins the resistances from steady-state
levels and the capacitances from per-node integral balances.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (IllPosedFitError, InsufficientDataError,
                     NonStationaryFitWarning, SingularNominalError)
from .lti import RationalTF, freq_response
from .thermo import ThermalParams

MIN_FIT_SAMPLES = 8
MIN_FIT_DECADES = 1.5


@dataclass(frozen=True)
class FreqDataset:
    """Frequency-response samples. response may be complex (full phase
    information) or real non-negative (magnitude only); amplitude labels
    the source excitation level when known."""
    omega: np.ndarray
    response: np.ndarray
    amplitude: float | None = None

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        r = np.asarray(self.response)
        r = r.astype(complex) if np.iscomplexobj(r) else r.astype(float)
        if w.ndim != 1 or r.shape != w.shape:
            raise ValueError("omega and response must be same-length 1-D")
        if len(w) < 2 or np.any(np.diff(w) <= 0) or w[0] <= 0:
            raise ValueError("omega must be positive and strictly increasing")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "response", r)

    @property
    def magnitude_only(self):
        return not np.iscomplexobj(self.response)


@dataclass(frozen=True)
class ThermalStepDataset:
    """Temperatures under a constant winding current step from rest."""
    t: np.ndarray
    T_W: np.ndarray
    T_H: np.ndarray
    T_M: np.ndarray
    i_m: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if len(t) < 4 or np.any(np.diff(t) <= 0):
            raise ValueError("time must be strictly increasing, >= 4 rows")
        for name in ("T_W", "T_H", "T_M"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != t.shape:
                raise ValueError("%s length must match time" % name)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class TfFit:
    gain: float
    coeffs: np.ndarray  # A0..A3 ascending
    residual_rms: float
    nrmse: float

    @property
    def tf(self):
        a = self.coeffs
        return RationalTF([self.gain], [a[3], a[2], a[1], a[0]])


@dataclass(frozen=True)
class ThermalFit:
    params: ThermalParams
    residuals: dict
    tau3_is_lower_bound: bool


def _log_weights(omega):
    lw = np.log(omega)
    w = np.gradient(lw)
    return np.sqrt(w / np.sum(w))


def _check_coverage(omega):
    if len(omega) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            "need at least %d frequency samples" % MIN_FIT_SAMPLES)
    decades = math.log10(omega[-1] / omega[0])
    if decades < MIN_FIT_DECADES:
        raise InsufficientDataError(
            "frequency span %.2f decades below the %.1f needed"
            % (decades, MIN_FIT_DECADES))


def fit_third_order(data: FreqDataset, numerator: float | None = None):
    """Least-squares fit of g / (A3 s^3 + A2 s^2 + A1 s + A0).

    The overall scale of (g, A) is not identifiable from response data
    alone; with numerator given, the result is rescaled so gain equals
    it and the coefficients are absolute. Otherwise gain is reported as
    1.0 and the scale folds into the coefficients. Weighting is uniform
    per log-frequency interval. Complex data fits by equation error;
    magnitude-only data fits |den|^2 and takes the minimum-phase factor.
    """
    omega = data.omega
    _check_coverage(omega)
    wts = _log_weights(omega)
    w_ref = math.exp(float(np.mean(np.log(omega))))
    wn = omega / w_ref

    if data.magnitude_only:
        y = data.response.astype(float)
        if np.any(y <= 0):
            raise IllPosedFitError("magnitude samples must be positive")
        # |den(jw)|^2 is cubic in u = w^2; fit y^2 * cubic(u) = 1 so the
        # residuals are relative (raw 1/y^2 spans many decades and an
        # absolute fit would throw away the low band), then split the
        # spectrum into its stable factor
        u = wn * wn
        cols = np.stack([u ** 3, u ** 2, u, np.ones_like(u)], axis=1)
        row_w = wts * y * y
        a_mat = cols * row_w[:, None]
        b_vec = wts
        sol, _, rank, _ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
        if rank < 4:
            raise IllPosedFitError("rank-deficient magnitude regression")
        if sol[0] <= 0 or sol[3] <= 0:
            raise IllPosedFitError("magnitude fit left the stable family")
        # roots of q(-s^2) come in +/- pairs; keep the left-half triple
        p = np.array([-sol[0], 0.0, sol[1], 0.0, -sol[2], 0.0, sol[3]])
        rts = np.roots(p)
        lhp = rts[rts.real < 0]
        if len(lhp) != 3:
            raise IllPosedFitError("spectral factor is not third order")
        den = np.real(np.poly(lhp)) * math.sqrt(sol[0])
        pred = 1.0 / np.abs(np.polyval(den, 1j * wn))
        resid = (pred - y) * wts
        scale_err = float(np.sqrt(np.sum(resid ** 2)))
        nrmse = scale_err / max(float(np.sqrt(np.sum((y * wts) ** 2))), 1e-300)
    else:
        y = data.response.astype(complex)
        if np.any(np.abs(y) == 0):
            raise IllPosedFitError("zero response sample")
        # y * den(jw) = g with g fixed to 1: linear in den coefficients
        s = 1j * wn
        cols = np.stack([y * s ** 3, y * s ** 2, y * s, y], axis=1)
        a_mat = np.concatenate([(cols * wts[:, None]).real,
                                (cols * wts[:, None]).imag])
        b_vec = np.concatenate([wts, np.zeros_like(wts)])
        sol, _, rank, _ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
        if rank < 4:
            raise IllPosedFitError("rank-deficient frequency regression")
        den = sol.copy()  # columns were ordered s^3..s^0: already descending
        pred = 1.0 / np.polyval(den, 1j * wn)
        resid = (pred - y) * wts
        scale_err = float(np.sqrt(np.sum(np.abs(resid) ** 2)))
        nrmse = scale_err / max(float(np.sqrt(np.sum(np.abs(y * wts) ** 2))), 1e-300)

    # undo the frequency normalization: coefficient of s^k shrinks w_ref^k
    a_desc = den * np.array([w_ref ** -3, w_ref ** -2, w_ref ** -1, 1.0])
    gain = 1.0
    if numerator is not None:
        a_desc = a_desc * numerator
        gain = numerator
    if a_desc[0] < 0:
        a_desc = -a_desc
    return TfFit(gain=gain,
                 coeffs=np.array([a_desc[3], a_desc[2], a_desc[1], a_desc[0]]),
                 residual_rms=scale_err, nrmse=nrmse)


def select_nominal(models, omegas):
    """Pick the candidate whose worst relative mismatch against the rest
    of the family, max over candidates and frequencies of
    |(P_i - P_n)/P_n|, is smallest. Returns (index, per-frequency worst
    mismatch profile for the winner)."""
    if len(models) < 2:
        raise ValueError("need at least two candidate models")
    omegas = np.asarray(omegas, dtype=float)
    resp = np.empty((len(models), len(omegas)), dtype=complex)
    for i, m in enumerate(models):
        resp[i] = freq_response(m, omegas)
        if np.any(np.abs(resp[i]) < 1e-15):
            raise SingularNominalError(
                "candidate %d has (near) zero response in the grid" % i)
    best_idx = -1
    best_score = math.inf
    best_profile = None
    for n in range(len(models)):
        delta = np.abs((resp - resp[n]) / resp[n])
        profile = delta.max(axis=0)
        score = float(profile.max())
        if score < best_score:
            best_idx, best_score, best_profile = n, score, profile
    return best_idx, best_profile


def _cumtrapz(f, t):
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


def _ls_scalar(x, y):
    denom = float(np.dot(x, x))
    if denom <= 0:
        raise IllPosedFitError("no usable transient excitation")
    return float(np.dot(x, y)) / denom


def fit_thermal_step(data: ThermalStepDataset, priors: ThermalParams):
    """Fit R1..R3 and tau1..tau3 from a constant-current step record.

    priors supplies the non-fitted quantities (R_A, alpha_cu, T_A,
    i_source, T_MAX). Stage one reads the resistances off the settled
    temperature drops; stage two finds each node's capacitance by
    least-squares on its integrated heat balance, which is linear in C
    and tolerant of measurement noise. A record that has not settled
    triggers a non-stationary warning, not an error; tau3 is flagged as
    a lower bound when the record is shorter than three of it.
    """
    if data.i_m == 0:
        raise IllPosedFitError(
            "zero-current record carries no Joule excitation; "
            "resistances are unidentifiable")
    t = data.t
    tw, th, tm = data.T_W, data.T_H, data.T_M
    t_a = priors.T_A
    if abs(tw[0] - t_a) > 2.0 or abs(th[0] - t_a) > 2.0:
        warnings.warn("record does not start near ambient",
                      NonStationaryFitWarning)

    tail = max(2, len(t) // 10)
    w_inf = float(np.mean(tw[-tail:]))
    h_inf = float(np.mean(th[-tail:]))
    m_inf = float(np.mean(tm[-tail:]))

    # settlement check on the slowest measured node
    drift = abs(np.polyfit(t[-tail:], th[-tail:], 1)[0]) * (t[-1] - t[0])
    rise = max(h_inf - th[0], 1e-9)
    if drift > 0.02 * rise:
        warnings.warn("housing temperature still drifting at the end of "
                      "the record; resistances carry extra uncertainty",
                      NonStationaryFitWarning)

    p_inf = priors.R_A * (1.0 + priors.alpha_cu * (w_inf - t_a)) * data.i_m ** 2
    if w_inf <= h_inf or h_inf <= m_inf or m_inf <= t_a:
        raise IllPosedFitError("steady levels are not ordered W > H > M > A")
    r1 = (w_inf - h_inf) / p_inf
    r2 = (h_inf - m_inf) / p_inf
    r3 = (m_inf - t_a) / (p_inf + priors.i_source)

    pj = priors.R_A * (1.0 + priors.alpha_cu * (tw - t_a)) * data.i_m ** 2
    q1 = (tw - th) / r1
    q2 = (th - tm) / r2
    q3 = (tm - t_a) / r3
    c1 = _ls_scalar(tw - tw[0], _cumtrapz(pj - q1, t))
    c2 = _ls_scalar(th - th[0], _cumtrapz(q1 - q2, t))
    c3 = _ls_scalar(tm - tm[0], _cumtrapz(q2 + priors.i_source - q3, t))
    if c1 <= 0 or c2 <= 0 or c3 <= 0:
        raise IllPosedFitError("balance fit produced non-physical capacitance")

    params = replace(priors, R1=r1, R2=r2, R3=r3,
                     tau1=r1 * c1, tau2=r2 * c2, tau3=r3 * c3)

    resid = {}
    for name, meas, c, flow in (("T_W", tw, c1, pj - q1),
                                ("T_H", th, c2, q1 - q2),
                                ("T_M", tm, c3, q2 + priors.i_source - q3)):
        pred = meas[0] + _cumtrapz(flow, t) / c
        resid[name] = float(np.sqrt(np.mean((pred - meas) ** 2)))
    # the balance fit underestimates a truncated mount transient, so judge
    # record coverage against the slower of the fitted and prior values
    span = t[-1] - t[0]
    resolvable = 3.0 * max(params.tau3, priors.tau3)
    return ThermalFit(params=params, residuals=resid,
                      tau3_is_lower_bound=span < resolvable)


def read_freq_csv(path, amplitude=None):
    """Frequency-response CSV: either columns omega_rad_s,response_re,
    response_im or columns omega_rad_s,magnitude."""
    rows = np.genfromtxt(path, delimiter=",", names=True)
    if rows.size == 0:
        raise InsufficientDataError("no data rows in %s" % path)
    names = rows.dtype.names
    if names is None or "omega_rad_s" not in names:
        raise IllPosedFitError("missing omega_rad_s column in %s" % path)
    w = np.atleast_1d(rows["omega_rad_s"])
    if "response_re" in names and "response_im" in names:
        resp = np.atleast_1d(rows["response_re"]) + 1j * np.atleast_1d(rows["response_im"])
    elif "magnitude" in names:
        resp = np.atleast_1d(rows["magnitude"])
    else:
        raise IllPosedFitError(
            "need response_re/response_im or magnitude columns in %s" % path)
    return FreqDataset(omega=w, response=resp, amplitude=amplitude)


def dataset_from_sweep_csv(path, amplitude=None):
    """Build a magnitude-only dataset from a sweep CSV's gain curve."""
    rows = np.genfromtxt(path, delimiter=",", names=True)
    if rows.size == 0:
        raise InsufficientDataError("no data rows in %s" % path)
    names = rows.dtype.names
    if names is None or "freq_hz" not in names or "gain" not in names:
        raise IllPosedFitError("not a sweep CSV (freq_hz/gain): %s" % path)
    f = np.atleast_1d(rows["freq_hz"])
    g = np.atleast_1d(rows["gain"])
    keep = g > 0
    return FreqDataset(omega=2.0 * np.pi * f[keep], response=g[keep],
                       amplitude=amplitude)


def read_thermal_step_csv(path, i_m):
    rows = np.genfromtxt(path, delimiter=",", names=True)
    if rows.size == 0:
        raise InsufficientDataError("no data rows in %s" % path)
    names = rows.dtype.names
    need = ("time_s", "winding_temp_c", "housing_temp_c", "mount_temp_c")
    if names is None or any(c not in names for c in need):
        raise IllPosedFitError("thermal step CSV needs columns %s" % (need,))
    return ThermalStepDataset(t=np.atleast_1d(rows["time_s"]),
                              T_W=np.atleast_1d(rows["winding_temp_c"]),
                              T_H=np.atleast_1d(rows["housing_temp_c"]),
                              T_M=np.atleast_1d(rows["mount_temp_c"]),
                              i_m=float(i_m))
