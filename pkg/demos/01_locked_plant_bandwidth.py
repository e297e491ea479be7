"""Locked-output plant: coefficients, DC gain, torque bandwidth.

With the gearbox output clamped, the voltage-to-deflection dynamics
collapse to a third order transfer function. This script prints its
coefficients, converts it to the torque plant, and draws the magnitude
response with the half-power point marked.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from seaband.defaults import DEFAULT_SEA
from seaband.electromech import locked_torque_plant, output_locked_tf
from seaband.lti import bandwidth_3db, freq_response

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

plant = output_locked_tf(DEFAULT_SEA)
torque = locked_torque_plant(DEFAULT_SEA)

a3, a2, a1, a0 = plant.den
print("deflection plant  K/(A3 s^3 + A2 s^2 + A1 s + A0)")
print("  K  = %.6e" % plant.num[-1])
print("  A3 = %.6e  A2 = %.6e" % (a3, a2))
print("  A1 = %.6e  A0 = %.6e" % (a1, a0))
print("  DC gain %.6e rad/V" % plant.dc_gain())

bw = bandwidth_3db(torque)
print("torque plant DC gain %.3f N*m per unit pwm" % torque.dc_gain())
print("torque bandwidth (locked output) %.4f Hz" % bw)

f = np.logspace(-1, 3, 400)
mag = np.abs(freq_response(torque, 2 * np.pi * f))
dc = torque.dc_gain()

fig, ax = plt.subplots(figsize=(7, 4.2))
ax.loglog(f, mag, lw=1.6)
ax.axhline(dc / np.sqrt(2), color="gray", ls="--", lw=0.9)
ax.axvline(bw, color="crimson", ls=":", lw=1.2)
ax.annotate("-3 dB at %.2f Hz" % bw, xy=(bw, dc / np.sqrt(2)),
            xytext=(bw * 2.2, dc * 0.5), fontsize=9,
            arrowprops=dict(arrowstyle="->", lw=0.8))
ax.set_xlabel("frequency [Hz]")
ax.set_ylabel("|torque / pwm|  [N*m]")
ax.set_title("locked-output torque plant")
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig(OUT / "locked_plant_bandwidth.png", dpi=130)
print("wrote", OUT / "locked_plant_bandwidth.png")
