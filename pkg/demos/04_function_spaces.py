"""Compare L1, John-Nirenberg and Besov energies on the circle of length one.

Run: python3 demos/04_function_spaces.py
"""

from bvlab import fixtures as fx
from bvlab.norms import besov_seminorm, bv_energy, jn_norm, l1_norm

for name, f in fx.circle_family(1024):
    b = [besov_seminorm(f, 0.0, method=m).seminorm for m in ("dyadic", "kernel", "fixed-balls")]
    print(f"{name:14s} L1 {l1_norm(f):.4f}  jn0/L1 {jn_norm(f, 0.0, restarts=4).value / l1_norm(f):.3f}  "
          f"B0 dyadic/kernel/balls {b[0]:.3f} {b[1]:.3f} {b[2]:.3f}")

print("\ndivergent example, exact fixed-ball sums on (0, 1):")
for J in (1, 2, 4, 8, 16):
    v, _ = fx.divergent_fixed_balls(J)
    print(f"  J={J:2d}: {v:.4f}   / H_J = {v / fx.harmonic(J):.4f}")

print("\nWeierstrass partial sums (alpha = 1/2):")
for K in (4, 8, 12):
    w = fx.circle_field(fx.weierstrass(K), 4096)
    print(f"  K={K:2d}: B^0.25 seminorm {besov_seminorm(w, 0.25).seminorm:.4f}, bv energy {bv_energy(w):.3f}")
