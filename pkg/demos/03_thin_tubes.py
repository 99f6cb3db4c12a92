"""Trace norm against BV norm of tube indicators on a domain with thinner and thinner tubes.

Run: python3 demos/03_thin_tubes.py
"""

from bvlab import fixtures as fx

print(" n   area        mouth       trace       ratio     growth")
prev = None
for n in range(2, 11):
    t = fx.thin_tube_norms(n)
    growth = "" if prev is None else f"{t['ratio'] / prev:.3f}"
    print(f"{n:2d}  {t['l1']:.3e}  {t['variation']:.3e}  {t['trace_l1']:.3e}  {t['ratio']:8.2f}  {growth}")
    prev = t["ratio"]
