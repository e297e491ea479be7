"""Minimal continuous/discrete LTI substrate.

Rational transfer functions with real coefficients in descending powers of s,
frequency-domain evaluation, -3 dB bandwidth search, Butterworth low-pass
prototypes, Tustin discretization, and a controllable-canonical state-space
realization. Everything downstream (plant models, observers, the control
stack) is built on these types.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DiscretizationSingularityError,
    EvaluationSingularityError,
    ImproperTransferFunctionError,
    NoBandwidthError,
)

__all__ = [
    "RationalTF",
    "DiscreteTF",
    "StateSpace",
    "freq_response",
    "bandwidth_3db",
    "butterworth_lowpass",
    "discretize",
    "tf_to_ss",
]


def _trim(coeffs):
    """Drop leading (highest-power) zeros, keeping at least one coefficient."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    return c[nz[0]:]


@dataclass(frozen=True)
class RationalTF:
    """Real-rational transfer function num(s)/den(s), descending powers.

    Coefficients are trimmed on construction; den must not be identically
    zero. Properness is not forced here (an inverted plant is legitimately
    improper inside an observer product) but tf_to_ss and discretize reject
    improper inputs.
    """

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = _trim(self.num)
        den = _trim(self.den)
        if not np.any(den):
            raise ZeroDivisionError("denominator polynomial is identically zero")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ValueError("non-finite transfer function coefficient")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def order(self):
        return len(self.den) - 1

    @property
    def relative_order(self):
        return len(self.den) - len(self.num)

    def is_proper(self):
        return len(self.num) <= len(self.den)

    def dc_gain(self):
        """Gain at s=0; inf for a pole at the origin, regardless of sign."""
        if self.den[-1] == 0.0:
            return np.inf if self.num[-1] != 0.0 else np.nan
        return self.num[-1] / self.den[-1]

    # Rational arithmetic used to assemble block diagrams. No pole-zero
    # cancellation is attempted; callers that need cancellation-free results
    # (DC gains of coupled subsystems) must assemble with cleared
    # denominators themselves, as electromech does.
    def __mul__(self, other):
        if isinstance(other, RationalTF):
            return RationalTF(np.polymul(self.num, other.num),
                              np.polymul(self.den, other.den))
        return RationalTF(self.num * float(other), self.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RationalTF):
            return RationalTF(np.polymul(self.num, other.den),
                              np.polymul(self.den, other.num))
        return RationalTF(self.num / float(other), self.den)

    def __add__(self, other):
        if not isinstance(other, RationalTF):
            other = RationalTF([float(other)], [1.0])
        num = np.polyadd(np.polymul(self.num, other.den),
                         np.polymul(other.num, self.den))
        return RationalTF(num, np.polymul(self.den, other.den))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, RationalTF):
            other = RationalTF([float(other)], [1.0])
        return self + (-1.0) * other

    def inverse(self):
        return RationalTF(self.den, self.num)


@dataclass(frozen=True)
class DiscreteTF:
    """Discrete filter b(z^-1)/a(z^-1) with a[0] = 1 and its sample period."""

    num: np.ndarray
    den: np.ndarray
    sample_period: float

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        if den[0] == 0.0:
            raise ValueError("leading denominator coefficient must be nonzero")
        if self.sample_period <= 0.0:
            raise ValueError(f"sample_period must be positive, got {self.sample_period}")
        object.__setattr__(self, "num", num / den[0])
        object.__setattr__(self, "den", den / den[0])

    def dc_gain(self):
        return np.sum(self.num) / np.sum(self.den)


@dataclass(frozen=True)
class StateSpace:
    """x' = Ax + Bu, y = Cx + Du. Single input, single output here."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    states: int = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        B = np.asarray(self.B, dtype=float).reshape(n, -1 if n else 1)
        C = np.asarray(self.C, dtype=float).reshape(-1 if n else 1, n)
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "states", n)


def freq_response(tf, omega):
    """Evaluate tf at s = j*omega. omega in rad/s, scalar or array.

    Raises EvaluationSingularityError if the denominator vanishes at a
    queried frequency (pole exactly on the imaginary axis there).
    """
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    s = 1j * omega_arr
    den_val = np.polyval(tf.den, s)
    if np.any(den_val == 0.0):
        bad = omega_arr[den_val == 0.0][0]
        raise EvaluationSingularityError(
            f"pole on the imaginary axis at omega = {bad} rad/s")
    out = np.polyval(tf.num, s) / den_val
    if not np.all(np.isfinite(out)):
        raise EvaluationSingularityError("frequency response overflowed")
    return out if np.ndim(omega) else complex(out[0])


_BW_F_LO = 1e-4   # Hz, search domain
_BW_F_HI = 1e6
_BW_GRID_PER_DECADE = 60


def bandwidth_3db(tf, reference_gain=None):
    """Lowest frequency (Hz) where |tf| falls to reference/sqrt(2).

    reference defaults to the DC magnitude, which must be finite and
    nonzero. Coarse log-spaced scan to bracket the first downward crossing,
    then bisection to 1e-6 relative tolerance. Dips narrower than the scan
    grid (~4%/point) would be skipped; the plants handled here are smooth
    low-order responses where that cannot happen.
    """
    if reference_gain is None:
        dc = tf.dc_gain()
        if not np.isfinite(dc) or dc == 0.0:
            raise NoBandwidthError(
                f"reference DC gain is {dc}; need a finite nonzero reference")
        reference_gain = abs(dc)
    target = reference_gain / np.sqrt(2.0)

    n_pts = int(_BW_GRID_PER_DECADE * np.log10(_BW_F_HI / _BW_F_LO)) + 1
    freqs = np.logspace(np.log10(_BW_F_LO), np.log10(_BW_F_HI), n_pts)
    mags = np.abs(freq_response(tf, 2.0 * np.pi * freqs))

    if mags[0] < target:
        raise NoBandwidthError(
            f"magnitude already below -3 dB at {_BW_F_LO} Hz; crossing is outside the domain")
    below = np.flatnonzero(mags < target)
    if below.size == 0:
        raise NoBandwidthError(
            f"magnitude never crosses -3 dB within [{_BW_F_LO}, {_BW_F_HI}] Hz")
    hi = freqs[below[0]]
    lo = freqs[below[0] - 1]

    while (hi - lo) > 1e-7 * lo:
        mid = np.sqrt(lo * hi)
        if abs(freq_response(tf, 2.0 * np.pi * mid)) < target:
            hi = mid
        else:
            lo = mid
    return float(np.sqrt(lo * hi))


def butterworth_lowpass(order, cutoff):
    """All-pole Butterworth low-pass, unity DC gain, cutoff in rad/s.

    |H(j*cutoff)| = 1/sqrt(2) exactly; magnitude is monotone nonincreasing.
    """
    if order < 1 or order != int(order):
        raise ValueError(f"order must be a positive integer, got {order}")
    if cutoff <= 0.0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    order = int(order)
    k = np.arange(order)
    angles = np.pi * (2.0 * k + order + 1.0) / (2.0 * order)
    poles = cutoff * np.exp(1j * angles)
    den = np.real(np.poly(poles))
    return RationalTF([cutoff ** order], den)


def discretize(tf, sample_period):
    """Bilinear (Tustin) transform; preserves a finite DC gain exactly.

    Raises DiscretizationSingularityError when the continuous denominator
    has a root at s = 2/Ts (the transform's pole) and
    ImproperTransferFunctionError for improper inputs.
    """
    if sample_period <= 0.0:
        raise ValueError(f"sample_period must be positive, got {sample_period}")
    if not tf.is_proper():
        raise ImproperTransferFunctionError(
            "cannot discretize an improper transfer function")
    n = tf.order
    c = 2.0 / sample_period

    den_at_pole = np.polyval(tf.den, c)
    scale = np.max(np.abs(tf.den)) * max(c ** n, 1.0)
    if abs(den_at_pole) <= 1e-12 * scale:
        raise DiscretizationSingularityError(
            f"continuous pole at s = 2/Ts = {c:g}; bilinear transform is singular")

    def transform(poly):
        # coeff of s^j maps to c^j (1 - z^-1)^j (1 + z^-1)^(n-j)
        out = np.zeros(n + 1)
        m = len(poly) - 1
        for idx, coeff in enumerate(poly):
            j = m - idx
            term = np.array([coeff * c ** j])
            for _ in range(j):
                term = np.convolve(term, [1.0, -1.0])
            for _ in range(n - j):
                term = np.convolve(term, [1.0, 1.0])
            out += term
        return out

    num_z = transform(tf.num)
    den_z = transform(tf.den)
    return DiscreteTF(num_z, den_z, sample_period)


def tf_to_ss(tf):
    """Controllable canonical realization of a proper RationalTF.

    A constant (order zero) transfer function yields an empty state with
    pure feedthrough.
    """
    if not tf.is_proper():
        raise ImproperTransferFunctionError(
            f"numerator order {len(tf.num) - 1} exceeds denominator order {tf.order}")
    n = tf.order
    a = tf.den / tf.den[0]
    b = np.zeros(n + 1)
    b[n + 1 - len(tf.num):] = tf.num / tf.den[0]

    d = b[0]
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)),
                          np.zeros((1, 0)), [[d]])
    r = b[1:] - d * a[1:]          # remainder after dividing out feedthrough
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -a[1:][::-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = r[::-1].reshape(1, n)
    return StateSpace(A, B, C, [[d]])


def ss_freq_response(ss, omega):
    """C (jwI - A)^-1 B + D for scalar or array omega; SISO result."""
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega_arr.shape, dtype=complex)
    eye = np.eye(ss.states)
    for i, w in enumerate(omega_arr):
        if ss.states:
            x = np.linalg.solve(1j * w * eye - ss.A, ss.B)
            out[i] = (ss.C @ x + ss.D)[0, 0]
        else:
            out[i] = ss.D[0, 0]
    return out if np.ndim(omega) else complex(out[0])
