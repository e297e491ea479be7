"""Reference actuator profile used by the CLI, demos, and tests.

A small brushed DC motor behind a 1742.222:1 reduction driving a
130 N.m/rad series spring, wound for 24 V bus operation, with the
three-node thermal network identified for its housed installation.
Override any field through the usual dataclass replace() or the CLI
config file; nothing below is load-bearing for the library itself.
"""

from .electromech import LoadParams, MotorParams, SeaParams
from .thermo import ThermalParams

DEFAULT_MOTOR = MotorParams(
    R=6.840,
    L=0.794e-3,
    K_e=2.8e-3,
    K_tau=5.484e-3,
    J_m=5.615e-8,
    B_m=8.726e-7,
)

DEFAULT_SEA = SeaParams(
    motor=DEFAULT_MOTOR,
    K_s=130.0,
    N=1742.222,
    V_nominal=24.0,
)

DEFAULT_THERMAL = ThermalParams()

LOCKED_LOAD = LoadParams.locked_output()
