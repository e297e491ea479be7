"""Three-node thermal ladder step responses.

Constant current i_m is applied from ambient and the
winding/housing/mount temperatures are integrated. Dashed lines show
the closed-form steady state for each current; the nominal current is
the one whose steady winding temperature sits exactly at the limit.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from seaband.defaults import DEFAULT_THERMAL
from seaband.errors import ThermalRunawayError
from seaband.thermo import (integrate_thermal, nominal_current,
                            steady_state_winding_temp)

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

p = DEFAULT_THERMAL
i_n = nominal_current(p)
print("nominal current %.4f A (steady winding = %.1f C)" % (i_n, p.T_MAX))

fig, ax = plt.subplots(figsize=(7, 4.2))
for i_m in (0.5, 1.0, i_n):
    t, tw, th, tm = integrate_thermal(p, i_m, 300.0, dt=0.02)
    steady = steady_state_winding_temp(i_m, p)
    line, = ax.plot(t, tw, lw=1.5, label="i = %.3f A" % i_m)
    ax.axhline(steady, color=line.get_color(), ls="--", lw=0.8, alpha=0.7)
    print("i = %.3f A: winding %.2f C at t = %.0f s, steady %.2f C"
          % (i_m, tw[-1], t[-1], steady))

# past the runaway boundary the copper resistance growth outruns the
# cooling and no finite steady state exists
try:
    steady_state_winding_temp(2.5, p)
except ThermalRunawayError as exc:
    print("i = 2.500 A:", exc)

ax.axhline(p.T_MAX, color="k", lw=1.0)
ax.text(5, p.T_MAX + 2, "T_MAX", fontsize=9)
ax.set_xlabel("time [s]")
ax.set_ylabel("winding temperature [C]")
ax.set_title("constant-current heating vs closed-form steady state")
ax.legend(loc="lower right", fontsize=9)
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(OUT / "thermal_ladder.png", dpi=130)
print("wrote", OUT / "thermal_ladder.png")
