"""How the post-expiry discount delta_p moves the critical and naive exits.

With delta_f = 0.7 and lambda_f = lambda_pN = 1 the critical-only VC exits
later than the naive first self when delta_p is large, and earlier when
delta_p is small. This script locates the crossing and then writes the
full sweep to CSV through the same code path the ``vcexit sweep`` command
uses.

Run:  python demos/02_reduction_factor_sweep.py [out.csv]
"""

import sys

import numpy as np
from scipy.optimize import brentq

from vcexit import DiscountSpec, ModelParams, solve
from vcexit.sweep import run_sweep, write_csv

p = ModelParams()
d = DiscountSpec(delta_f=0.7, lambda_f=1.0, lambda_pn=1.0, lambda_e=0.5)


def gap(dp):
    dd = d.replace(delta_p=dp)
    return solve("critical", p, dd).threshold - solve("naive", p, dd).threshold


print(" delta_p    x_G     x_N,0")
for dp in np.linspace(0.0, 0.7, 8):
    dd = d.replace(delta_p=float(dp))
    print(f"  {dp:.2f}   {solve('critical', p, dd).threshold:.4f}  {solve('naive', p, dd).threshold:.4f}")

cross = brentq(gap, 0.0, 0.7)
print(f"\nx_G and x_N,0 cross at delta_p = {cross:.4f}")

out = sys.argv[1] if len(sys.argv) > 1 else "delta_p_sweep.csv"
rows, skipped = run_sweep(p, d, "deltaP", np.linspace(0.0, 0.7, 71), ("critical", "naive"))
write_csv(rows, out)
print(f"wrote {len(rows)} rows to {out}")
