"""Disturbance observer pushing a perturbed plant back to nominal.

The motor inertia is inflated 20 percent, which moves the resonant
pair. Below its filter cutoff the observer rewrites the loop so the
measured response follows the nominal model anyway; above the cutoff
the physical (perturbed) plant shows through. Sine probes on the full
nonlinear simulation confirm both regimes.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from seaband.control import ControlStack, DobConfig
from seaband.defaults import DEFAULT_MOTOR, DEFAULT_SEA, DEFAULT_THERMAL, LOCKED_LOAD
from seaband.electromech import MotorParams, SeaParams, locked_torque_plant, output_locked_tf
from seaband.lti import freq_response
from seaband.sim import SimConfig, sine_response

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

Q_CUTOFF = 80.0  # rad/s

motor_p = MotorParams(R=DEFAULT_MOTOR.R, L=DEFAULT_MOTOR.L,
                      K_e=DEFAULT_MOTOR.K_e, K_tau=DEFAULT_MOTOR.K_tau,
                      J_m=1.2 * DEFAULT_MOTOR.J_m, B_m=DEFAULT_MOTOR.B_m)
sea_p = SeaParams(motor=motor_p, K_s=DEFAULT_SEA.K_s, N=DEFAULT_SEA.N,
                  V_nominal=DEFAULT_SEA.V_nominal)

nominal = locked_torque_plant(DEFAULT_SEA)
perturbed = locked_torque_plant(sea_p)
pwm_nominal = DEFAULT_SEA.V_nominal * output_locked_tf(DEFAULT_SEA)

cfg = SimConfig(dt=2e-5, control_dt=2e-4)
probes = [2.0, 8.0, 30.0, 80.0, 240.0, 800.0]

measured = []
for w in probes:
    stack = ControlStack(pid=None,
                         dob=DobConfig(nominal_plant=pwm_nominal,
                                       q_cutoff=Q_CUTOFF,
                                       sample_period=cfg.control_dt),
                         sample_period=cfg.control_dt)
    g = sine_response(w / (2 * math.pi), 0.2, stack, sea=sea_p,
                      load=LOCKED_LOAD, thermal=DEFAULT_THERMAL, cfg=cfg)
    measured.append(abs(g))
    print("w = %6.1f rad/s: measured %.4f, nominal %.4f, perturbed %.4f"
          % (w, abs(g), abs(freq_response(nominal, w)),
             abs(freq_response(perturbed, w))))

w_grid = np.logspace(0, 3.2, 300)
fig, ax = plt.subplots(figsize=(7, 4.4))
ax.loglog(w_grid, np.abs(freq_response(nominal, w_grid)), "k", lw=1.3,
          label="nominal model")
ax.loglog(w_grid, np.abs(freq_response(perturbed, w_grid)), "gray", lw=1.3,
          ls="--", label="perturbed plant (+20% J_m)")
ax.loglog(probes, measured, "o", color="crimson", ms=6,
          label="measured with observer on")
ax.axvline(Q_CUTOFF, color="steelblue", ls=":", lw=1.1)
ax.text(Q_CUTOFF * 1.1, ax.get_ylim()[0] * 2, "filter cutoff", fontsize=9,
        color="steelblue")
ax.set_xlabel("frequency [rad/s]")
ax.set_ylabel("|torque / pwm reference|")
ax.set_title("observer holds the nominal response below its cutoff")
ax.legend(fontsize=9)
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig(OUT / "disturbance_observer.png", dpi=130)
print("wrote", OUT / "disturbance_observer.png")
