"""Extend boundary data into the unit square and read the trace back.

The linear extension averages the data over boundary shadows; the layered
extension glues extensions of Lipschitz approximations on thinner collars.
Run: python3 demos/02_extension_and_trace.py
"""

from bvlab import fixtures as fx
from bvlab.experiments.scenarios import prepared
from bvlab.extension import extend_besov, extend_l1
from bvlab.norms import besov_seminorm, l1_norm
from bvlab.space import DomainSpec
from bvlab.trace import trace_identity_report

disc, cover, pou = prepared(DomainSpec("unit-square", 1 / 64))
for name in ("coordinate", "step"):
    f = fx.named_fixture(name, disc)
    E = extend_besov(f, cover, pou, disc)
    R = extend_l1(f, disc, cover=cover, pou=pou)
    print(f"{name}: ||f||_L1 = {l1_norm(f):.4f}, B^0 norm = {besov_seminorm(f, 0.0, j0=cover.j0).value:.4f}")
    print(f"  linear   : int Lip F = {l1_norm(E.lipF):.4f}")
    print(f"  layered  : int Lip F = {l1_norm(R.lipF):.4f}, K = {R.schedule.K} ({R.schedule.stop_reason})")
    for row in R.schedule.rows():
        print(f"    k={row['k']}  rho={row['rho_k']:.4f}  LIP={row['lip_fk']:.3f}  err={row['l1_err_k']:.4f}")
    t = trace_identity_report(f, E, disc, sample_size=32, r_min=1 / 32)
    print(f"  trace of linear extension: max error {t.max_error:.4f}, converged {t.fraction_converged:.0%}")
