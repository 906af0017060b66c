#!/usr/bin/env python3
# Plots curves_mj0.csv: energy and orientation against R, one line per curve.
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(lambda: defaultdict(list))
with open("curves_mj0.csv", newline="") as f:
    for row in csv.DictReader(f):
        s = series[int(row["curve_id"])]
        s["R"].append(float(row["R_bohr"]))
        for key in ("energy_GHz", "cos1", "cos2"):
            s[key].append(float(row[key]))

fig, (ax_e, ax_c) = plt.subplots(2, 1, sharex=True, figsize=(6, 8))
for cid in sorted(series):
    s = series[cid]
    ax_e.plot(s["R"], s["energy_GHz"], lw=1)
    ax_c.plot(s["R"], s["cos1"], lw=1)
ax_e.set_ylabel("E (GHz)")
ax_c.set_ylabel("<cos theta_1>")
ax_c.set_xlabel("R (bohr)")
ax_e.set_title("M_J = 0")
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else "curves_mj0.pdf"
fig.savefig(out)
