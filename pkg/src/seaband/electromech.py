"""Electromechanical model of a gear-reduced series elastic actuator.

Winding electrical dynamics, motor-side mechanics, load-side mechanics, the
3x3 transfer matrix coupling them through the elastic element, the
output-locked voltage-to-deflection plant, and multiplicative model
uncertainty between fitted plants.

Sign conventions: theta_d = theta_m/N - theta_l (element deflection seen on
the output side), spring torque K_s*theta_d acts on the load and reacts on
the motor through the N:1 reduction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularNominalError
from .lti import RationalTF, freq_response

__all__ = [
    "MotorParams",
    "SeaParams",
    "LoadParams",
    "UncertaintySample",
    "electrical_tf",
    "mechanical_tf",
    "load_tf",
    "mimo_matrix",
    "output_locked_tf",
    "voltage_tf",
    "uncertainty",
]


@dataclass(frozen=True)
class MotorParams:
    R: float       # ohm, effective winding resistance
    L: float       # H, winding inductance
    K_e: float     # V*s/rad, back-EMF constant
    K_tau: float   # N*m/A, torque constant
    J_m: float     # kg*m^2, rotor inertia
    B_m: float     # N*m*s/rad, viscous friction

    def __post_init__(self):
        for name in ("R", "L", "K_e", "K_tau", "J_m", "B_m"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"MotorParams.{name} must be strictly positive")


@dataclass(frozen=True)
class SeaParams:
    motor: MotorParams
    K_s: float              # N*m/rad, elastic element stiffness
    N: float                # gear reduction, N:1
    V_nominal: float = 24.0  # V, bus voltage; PWM in [-1,1] maps to +-V_nominal

    def __post_init__(self):
        if self.K_s <= 0.0:
            raise ValueError("K_s must be strictly positive")
        if self.N <= 1.0:
            raise ValueError(f"gear reduction N must exceed 1, got {self.N}")
        if self.V_nominal <= 0.0:
            raise ValueError("V_nominal must be strictly positive")


_LOCKED = "locked"


@dataclass(frozen=True)
class LoadParams:
    """Load-side inertia/damping; J_l may be the distinguished LOCKED value.

    LOCKED models a rigidly fixed output (J_l -> infinity) and maps to a
    zero load transfer function, the exact limit rather than a large J_l.
    """

    J_l: object          # kg*m^2, or the string "locked"
    B_l: float = 0.0     # N*m*s/rad

    def __post_init__(self):
        if not self.locked:
            if not (isinstance(self.J_l, (int, float)) and self.J_l > 0.0):
                raise ValueError(f"J_l must be positive or LOCKED, got {self.J_l!r}")
        if self.B_l < 0.0:
            raise ValueError("B_l must be nonnegative")

    @property
    def locked(self):
        return isinstance(self.J_l, str) and self.J_l.lower() == _LOCKED

    @classmethod
    def locked_output(cls):
        return cls(J_l=_LOCKED, B_l=0.0)


@dataclass(frozen=True)
class UncertaintySample:
    omega: float       # rad/s
    delta: complex     # multiplicative mismatch at omega


def electrical_tf(p: SeaParams) -> RationalTF:
    """P_e(s) = K_tau/(Ls + R): voltage minus back-EMF to motor torque.

    The full electrical relation is tau_m = P_e*V - s*K_e*P_e*theta_m; the
    back-EMF branch is composed where needed (voltage_tf, the simulator).
    """
    m = p.motor
    return RationalTF([m.K_tau], [m.L, m.R])


def mechanical_tf(p: SeaParams) -> RationalTF:
    """P_m(s) = 1/(J_m s^2 + B_m s): net motor torque to motor angle."""
    m = p.motor
    return RationalTF([1.0], [m.J_m, m.B_m, 0.0])


def load_tf(l: LoadParams) -> RationalTF:
    """P_l(s) = 1/(s*(J_l s + B_l)); LOCKED gives the zero transfer function.

    Load-side stiffness is taken as zero, so torque maps to angle through a
    damped double integrator only.
    """
    if l.locked:
        return RationalTF([0.0], [1.0])
    return RationalTF([1.0], [l.J_l, l.B_l, 0.0])


def _plant_polys(p, l):
    """Numerator/denominator polynomials shared by the coupled transfer
    matrix, assembled with cleared denominators so no spurious common
    factors appear (keeps DC evaluation and coefficient comparisons exact).
    """
    m = p.motor
    n_m = np.array([1.0])
    d_m = np.array([m.J_m, m.B_m, 0.0])
    if l.locked:
        n_l = np.array([0.0])
        d_l = np.array([1.0])
    else:
        n_l = np.array([1.0])
        d_l = np.array([l.J_l, l.B_l, 0.0])
    # D(s) = 1 + K_s N^-2 P_m + K_s P_l, multiplied through by d_m*d_l
    d_common = np.polyadd(
        np.polyadd(np.polymul(d_m, d_l),
                   (p.K_s / p.N ** 2) * np.polymul(n_m, d_l)),
        p.K_s * np.polymul(n_l, d_m))
    return n_m, d_m, n_l, d_l, d_common


def mimo_matrix(p: SeaParams, l: LoadParams):
    """3x3 transfer matrix from (tau_m, d_d, d_l) to (theta_d, theta_l, theta_m).

    d_d is a disturbance torque added to the transmitted spring torque
    (reacting on the motor through 1/N and driving the load directly); d_l
    is a disturbance torque applied at the load. Returned as a nested tuple
    rows = outputs (theta_d, theta_l, theta_m), cols = inputs.
    """
    n_m, d_m, n_l, d_l, D = _plant_polys(p, l)
    Ks, N = p.K_s, p.N
    row_d = (
        RationalTF(np.polymul(n_m, d_l) / N, D),
        RationalTF(-np.polyadd(np.polymul(n_m, d_l) / N ** 2,
                               np.polymul(n_l, d_m)), D),
        RationalTF(-np.polymul(n_l, d_m), D),
    )
    row_l = (
        RationalTF((Ks / N) * np.polymul(n_l, n_m), D),
        RationalTF(np.polymul(n_l, d_m), D),
        RationalTF(np.polymul(n_l, np.polyadd(d_m, (Ks / N ** 2) * n_m)), D),
    )
    row_m = (
        RationalTF(np.polymul(n_m, np.polyadd(d_l, Ks * n_l)), D),
        RationalTF(-np.polymul(n_m, d_l) / N, D),
        RationalTF((Ks / N) * np.polymul(n_m, n_l), D),
    )
    return (row_d, row_l, row_m)


def output_locked_tf(p: SeaParams) -> RationalTF:
    """theta_d(s)/V(s) with the output rigidly fixed.

    Third-order plant (K_tau/N)/(A3 s^3 + A2 s^2 + A1 s + A0) with
        A0 = K_s R/N^2
        A1 = K_e K_tau + K_s L/N^2 + B_m R
        A2 = B_m L + J_m R
        A3 = J_m L
    """
    m = p.motor
    a0 = p.K_s * m.R / p.N ** 2
    a1 = m.K_e * m.K_tau + p.K_s * m.L / p.N ** 2 + m.B_m * m.R
    a2 = m.B_m * m.L + m.J_m * m.R
    a3 = m.J_m * m.L
    return RationalTF([m.K_tau / p.N], [a3, a2, a1, a0])


def voltage_tf(p: SeaParams, l: LoadParams):
    """(theta_d/V, theta_m/V, theta_l/V) with the back-EMF loop closed.

    Composes the electrical relation tau_m = P_e*(V - K_e s theta_m) with
    the coupled mechanics for an arbitrary load. With a LOCKED load the
    deflection channel reduces to output_locked_tf coefficient for
    coefficient.
    """
    m = p.motor
    n_m, d_m, n_l, d_l, D = _plant_polys(p, l)
    theta_m_num = np.polymul(n_m, np.polyadd(d_l, p.K_s * n_l))
    den = np.polyadd(
        np.polymul(D, [m.L, m.R]),
        m.K_e * m.K_tau * np.polymul([1.0, 0.0], theta_m_num))
    k = m.K_tau
    return (
        RationalTF(k / p.N * np.polymul(n_m, d_l), den),
        RationalTF(k * theta_m_num, den),
        RationalTF(k * p.K_s / p.N * np.polymul(n_l, n_m), den),
    )


def locked_torque_plant(p: SeaParams) -> RationalTF:
    """Spring torque per unit normalized PWM command, locked output.

    The command scales the bus voltage and the deflection carries K_s,
    so this is K_s * V_nominal * (theta_d / V)."""
    return p.K_s * p.V_nominal * output_locked_tf(p)


def uncertainty(g_x: RationalTF, g_nominal: RationalTF, omegas):
    """Multiplicative mismatch (G_x - G_nom)/G_nom sampled at each omega."""
    samples = []
    for w in np.atleast_1d(np.asarray(omegas, dtype=float)):
        nom = freq_response(g_nominal, float(w))
        if abs(nom) < 1e-15:
            raise SingularNominalError(
                f"nominal response magnitude {abs(nom):.3e} at omega = {w} rad/s")
        gx = freq_response(g_x, float(w))
        samples.append(UncertaintySample(float(w), (gx - nom) / nom))
    return samples
