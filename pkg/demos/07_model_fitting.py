"""Fitting plant and thermal models from measured-style data.

Three identification tasks back to back: recovering the third order
plant from noisy frequency-response samples, recovering the thermal
ladder from a constant-current heating record, and picking the
nominal model out of an inertia-perturbed family by worst-case
frequency-domain mismatch.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from seaband.defaults import DEFAULT_MOTOR, DEFAULT_SEA, DEFAULT_THERMAL
from seaband.electromech import MotorParams, SeaParams, output_locked_tf
from seaband.lti import freq_response
from seaband.sysid import (FreqDataset, ThermalStepDataset, fit_thermal_step,
                           fit_third_order, select_nominal)
from seaband.thermo import integrate_thermal

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)
rng = np.random.default_rng(7)

# --- plant fit from noisy complex response samples
plant = output_locked_tf(DEFAULT_SEA)
omega = np.logspace(-1, 5, 60)
clean = freq_response(plant, omega)
noise = (rng.standard_normal(60) + 1j * rng.standard_normal(60)) / np.sqrt(2)
noisy = clean * (1 + 0.01 * noise)

fit = fit_third_order(FreqDataset(omega=omega, response=noisy),
                      numerator=plant.num[-1])
true_a = plant.den[::-1]
rel = np.abs((fit.coeffs - true_a) / true_a)
print("plant fit from 1%% noisy samples: worst coefficient error %.2f%%"
      % (100 * rel.max()))

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.2))
ax1.loglog(omega, np.abs(noisy), ".", ms=4, alpha=0.6, label="noisy samples")
ax1.loglog(omega, np.abs(freq_response(fit.tf, omega)), "crimson", lw=1.3,
           label="fitted model")
ax1.set_xlabel("frequency [rad/s]")
ax1.set_ylabel("|deflection / voltage|")
ax1.set_title("third order fit, nrmse %.1e" % fit.nrmse)
ax1.legend(fontsize=9)
ax1.grid(True, which="both", alpha=0.3)

# --- thermal fit from a heating record
t, tw, th, tm = integrate_thermal(DEFAULT_THERMAL, 1.0, 1200.0, dt=0.5)
tfit = fit_thermal_step(ThermalStepDataset(t=t, T_W=tw, T_H=th, T_M=tm,
                                           i_m=1.0), DEFAULT_THERMAL)
print("thermal fit: R1 %.3f (true %.3f), tau1 %.3f (true %.3f), "
      "tau2 %.2f (true %.2f)"
      % (tfit.params.R1, DEFAULT_THERMAL.R1, tfit.params.tau1,
         DEFAULT_THERMAL.tau1, tfit.params.tau2, DEFAULT_THERMAL.tau2))

ax2.plot(t, tw, "k", lw=1.1, label="winding record")
t2, tw2, _, _ = integrate_thermal(tfit.params, 1.0, 1200.0, dt=0.5)
ax2.plot(t2, tw2, "crimson", lw=1.1, ls="--", label="refit model replay")
ax2.set_xlabel("time [s]")
ax2.set_ylabel("temperature [C]")
ax2.set_title("thermal ladder recovery")
ax2.legend(fontsize=9)
ax2.grid(alpha=0.3)

fig.tight_layout()
fig.savefig(OUT / "model_fitting.png", dpi=130)
print("wrote", OUT / "model_fitting.png")

# --- nominal selection over an inertia family
models = []
for scale in (0.8, 1.0, 1.25):
    m = DEFAULT_MOTOR
    motor = MotorParams(R=m.R, L=m.L, K_e=m.K_e, K_tau=m.K_tau,
                        J_m=scale * m.J_m, B_m=m.B_m)
    models.append(output_locked_tf(SeaParams(motor=motor, K_s=DEFAULT_SEA.K_s,
                                             N=DEFAULT_SEA.N,
                                             V_nominal=DEFAULT_SEA.V_nominal)))
idx, worst = select_nominal(models, np.logspace(-1, 3, 61) * 2 * np.pi)
print("nominal selection over J_m scales (0.8, 1.0, 1.25): index %d, "
      "worst-case mismatch %.3f" % (idx, worst.max()))
