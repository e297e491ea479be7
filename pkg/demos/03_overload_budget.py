"""Overload currents and the time budget before the winding limit.

Above the nominal current the winding heads for an asymptote beyond
T_MAX on the fast winding-to-housing time constant, so only a finite
on-time is available. The budget shrinks with both the overload factor
K_o and the housing temperature at engagement.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from seaband.defaults import DEFAULT_THERMAL
from seaband.thermo import nominal_current, overload_budget, overload_transient

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

p = DEFAULT_THERMAL
i_n = nominal_current(p)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))

for t_h in (30.0, 60.0, 90.0):
    factors = np.linspace(1.05, 4.0, 120)
    times = []
    for k in factors:
        # overload factor is defined against the housing-referred
        # current ceiling, not i_n directly
        i_cap = i_n * math.sqrt((p.T_MAX - t_h) * p.sum_R
                                / ((p.T_MAX - p.T_A) * p.R1))
        times.append(overload_budget(k * i_cap, t_h, p).t_on)
    ax1.semilogy(factors, times, lw=1.5, label="housing %.0f C" % t_h)

b = overload_budget(math.sqrt(2.0) * i_n
                    * math.sqrt((p.T_MAX - 60.0) * p.sum_R
                                / ((p.T_MAX - p.T_A) * p.R1)), 60.0, p)
print("K_o = sqrt(2) from a 60 C housing: t_on = %.4f s" % b.t_on)
print("  tau1 * ln 2              = %.4f s" % (p.tau1 * math.log(2.0)))

ax1.axhline(p.tau1 * math.log(2.0), color="gray", ls=":", lw=0.9)
ax1.set_xlabel("overload factor K_o")
ax1.set_ylabel("time to T_MAX [s]")
ax1.set_title("on-time budget")
ax1.legend(fontsize=9)
ax1.grid(True, which="both", alpha=0.3)

t = np.linspace(0.0, 3 * b.t_on, 300)
temps = [overload_transient(60.0, b.t_beta, ti, p) for ti in t]
ax2.plot(t, temps, lw=1.5)
ax2.axhline(p.T_MAX, color="k", lw=1.0)
ax2.axvline(b.t_on, color="crimson", ls=":", lw=1.2)
ax2.set_xlabel("time after engagement [s]")
ax2.set_ylabel("winding temperature [C]")
ax2.set_title("transient for K_o = sqrt(2), housing 60 C")
ax2.grid(alpha=0.3)

fig.tight_layout()
fig.savefig(OUT / "overload_budget.png", dpi=130)
print("wrote", OUT / "overload_budget.png")
