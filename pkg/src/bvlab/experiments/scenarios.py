"""Registered experiments. Each one fills a :class:`ScenarioReport` with raw
tables, measured constants and checks whose both sides are recorded."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import fixtures as fx
from ..cover import boundary_shadows, partition_of_unity, whitney_cover
from ..extension import extend_besov, extend_l1, layer_energy
from ..norms import besov_seminorm, bv_energy, jn_norm, l1_norm, lip_constant
from ..space import DomainSpec, build_domain, codim1_hausdorff, regularity_audit
from ..trace import jump_points, trace_identity_report
from .report import ScenarioConfig, ScenarioReport


@dataclass(frozen=True)
class Scenario:
    name: str
    run: object
    defaults: dict
    summary: str


SCENARIOS: dict = {}


def scenario(name, summary, **defaults):
    def deco(fn):
        SCENARIOS[name] = Scenario(name, fn, defaults, summary)
        return fn
    return deco


@lru_cache(maxsize=16)
def prepared(spec: DomainSpec):
    """Discretization with its shadowed Whitney cover and partition of unity."""
    disc = build_domain(spec)
    cover = boundary_shadows(whitney_cover(disc), disc)
    return disc, cover, partition_of_unity(cover, disc)


def _spec(cfg: ScenarioConfig, h: float, **over) -> DomainSpec:
    d = {**cfg.domain, **over, "h": h}
    d.setdefault("seed", cfg.seed)
    return DomainSpec.from_dict(d)


def _drift(values) -> float:
    v = [x for x in values if x > 0]
    return max(v) / min(v) if v else float("nan")


def _boundary_data(cfg, disc):
    if cfg.fixtures == ["family"] or not cfg.fixtures:
        return fx.fixture_family(disc, int(cfg.options.get("family_size", 20)), cfg.seed)
    out = []
    for name in cfg.fixtures:
        if name == "family":
            out += fx.fixture_family(disc, int(cfg.options.get("family_size", 20)), cfg.seed)
        else:
            out.append((name, fx.named_fixture(name, disc, cfg.seed)))
    return out


# ---------------------------------------------------------------------------


@scenario("besov-extension-bound", "energy of the Whitney extension against the boundary B^0 norm",
          domain={"shape": "unit-square"}, meshes=[1 / 32, 1 / 64], fixtures=["family"],
          tolerances={"drift": 2.0, "linearity": 1e-12, "constant_energy": 1e-9})
def besov_extension_bound(cfg: ScenarioConfig, rep: ScenarioReport):
    rows, per_mesh = [], []
    for h in cfg.meshes:
        disc, cover, pou = prepared(_spec(cfg, h))
        worst = 0.0
        data = _boundary_data(cfg, disc)
        for name, f in data:
            E = extend_besov(f, cover, pou, disc)
            energy = l1_norm(E.lipF)
            norm = besov_seminorm(f, 0.0, j0=cover.j0).value
            rows.append((h, name, energy, norm, energy / norm))
            worst = max(worst, energy / norm)
        per_mesh.append(worst)
        # exact linearity and constants
        f, g = data[0][1], data[1][1]
        lhs = extend_besov(2 * f + 3 * g, cover, pou, disc, with_lip=False).F.values
        rhs = (2 * extend_besov(f, cover, pou, disc, with_lip=False).F.values
               + 3 * extend_besov(g, cover, pou, disc, with_lip=False).F.values)
        lin = float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
        const = extend_besov(f.with_values(np.full(len(f), 1.7)), cover, pou, disc)
        rep.check(f"linearity h={h:g}", lin, "<=", cfg.tolerances["linearity"])
        rep.check(f"constant data energy h={h:g}", l1_norm(const.lipF), "<=", cfg.tolerances["constant_energy"])
        rep.constants[f"C h={h:g}"] = worst
    rep.add_table("besov_extension", ("h", "fixture", "bv_energy_Ef", "besov0_norm", "ratio"), rows)
    for a, b, ca, cb in zip(cfg.meshes, cfg.meshes[1:], per_mesh, per_mesh[1:]):
        rep.check(f"C drift h={a:g} vs h={b:g}", _drift([ca, cb]), "<", cfg.tolerances["drift"])


@scenario("layer-estimates", "collar energies of the Whitney extension of Lipschitz data",
          domain={"shape": "unit-square"}, meshes=[1 / 64], fixtures=["coordinate", "lipschitz"],
          options={"rho2": [0.2, 0.1, 0.05]}, tolerances={"spread": 2.0})
def layer_estimates(cfg: ScenarioConfig, rep: ScenarioReport):
    rows = []
    for h in cfg.meshes:
        disc, cover, pou = prepared(_spec(cfg, h))
        H = l1_norm(disc.boundary_field(np.ones(disc.n_boundary)))
        for name, f in _boundary_data(cfg, disc):
            E = extend_besov(f, cover, pou, disc)
            lip, nf = lip_constant(f), l1_norm(f)
            grad_r, l1_r = [], []
            for rho2 in cfg.options["rho2"]:
                grad, mass = layer_energy(E, 0.0, rho2, disc)
                grad_r.append(grad / (rho2 * H * lip))
                l1_r.append(mass / (rho2 * nf))
                rows.append((h, name, rho2, grad, rho2 * H * lip, grad_r[-1], mass, rho2 * nf, l1_r[-1]))
            rep.constants[f"C_grad {name} h={h:g}"] = max(grad_r)
            rep.constants[f"C_l1 {name} h={h:g}"] = max(l1_r)
            rep.check(f"gradient collar ratio spread {name} h={h:g}", _drift(grad_r), "<", cfg.tolerances["spread"])
            rep.check(f"L1 collar ratio spread {name} h={h:g}", _drift(l1_r), "<", cfg.tolerances["spread"])
    rep.add_table("layer_estimates", ("h", "fixture", "rho2", "grad", "rho2_H_LIP", "grad_ratio",
                                      "l1", "rho2_f_l1", "l1_ratio"), rows)


@scenario("l1-extension-bound", "layered extension of L1 data: schedule, L1 and energy bounds",
          domain={"shape": "unit-square"}, meshes=[1 / 32, 1 / 64], fixtures=["step", "arc", "family"],
          options={"K_max": 20, "family_size": 10},
          tolerances={"drift": 2.0, "l1_constant": 50.0})
def l1_extension_bound(cfg: ScenarioConfig, rep: ScenarioReport):
    rows, sched_rows = [], []
    cl1, cbv = [], []
    for h in cfg.meshes:
        disc, cover, pou = prepared(_spec(cfg, h))
        H = l1_norm(disc.boundary_field(np.ones(disc.n_boundary)))
        worst_l1 = worst_bv = 0.0
        invariants = True
        in_range = True
        for name, f in _boundary_data(cfg, disc):
            R = extend_l1(f, disc, int(cfg.options["K_max"]), cover, pou)
            s = R.schedule
            ok = s.check()
            invariants &= all(ok.values())
            eps = 2.0 ** (2 - s.K) * s.f_norm
            lo, hi = min(f.values.min(), 0.0), max(f.values.max(), 0.0)
            in_range &= bool(R.F.values.min() >= lo - eps and R.F.values.max() <= hi + eps)
            nf = s.f_norm
            r_l1 = l1_norm(R.F) / (disc.diam * nf)
            r_bv = l1_norm(R.lipF) / ((1 + H) * nf)
            worst_l1, worst_bv = max(worst_l1, r_l1), max(worst_bv, r_bv)
            rows.append((h, name, s.K, s.stop_reason, nf, l1_norm(R.F), l1_norm(R.lipF), r_l1, r_bv,
                         s.lip_sum(), s.truncation_error()))
            for row in s.rows():
                sched_rows.append((h, name, row["k"], row["rho_k"], row["lip_fk"], row["l1_err_k"]))
        rep.check(f"schedule invariants h={h:g}", float(invariants), ">=", 1.0,
                  "stage decay 2^(2-k)||f||, rho halving, sum rho_k LIP(f_k+1) <= 2||f||")
        rep.check(f"range within [min(f,0), max(f,0)] +- 2^(2-K)||f|| h={h:g}", float(in_range), ">=", 1.0)
        rep.check(f"L1 constant h={h:g}", worst_l1, "<=", cfg.tolerances["l1_constant"])
        rep.constants[f"C_L1 h={h:g}"] = worst_l1
        rep.constants[f"C_BV h={h:g}"] = worst_bv
        cl1.append(worst_l1)
        cbv.append(worst_bv)
    for i in range(len(cfg.meshes) - 1):
        a, b = cfg.meshes[i], cfg.meshes[i + 1]
        rep.check(f"C_L1 drift h={a:g} vs h={b:g}", _drift(cl1[i:i + 2]), "<", cfg.tolerances["drift"])
        rep.check(f"C_BV drift h={a:g} vs h={b:g}", _drift(cbv[i:i + 2]), "<", cfg.tolerances["drift"])
    rep.add_table("l1_extension", ("h", "fixture", "K", "stop", "f_l1", "F_l1", "bv_energy",
                                   "l1_ratio", "bv_ratio", "lip_sum", "truncation"), rows)
    rep.add_table("schedules", ("h", "fixture", "k", "rho_k", "lip_fk", "l1_err_k"), sched_rows)


@scenario("trace-recovery", "traces of extensions recover the boundary data",
          domain={"shape": "unit-square"}, meshes=[1 / 128],
          options={"r_min": [1 / 16, 1 / 32], "sample_size": 64},
          tolerances={"halving": [0.3, 0.7], "max_error": 0.2, "converged": 0.9})
def trace_recovery(cfg: ScenarioConfig, rep: ScenarioReport):
    h = cfg.meshes[0]
    disc, cover, pou = prepared(_spec(cfg, h))
    n = int(cfg.options["sample_size"])
    rows = []
    lip = fx.named_fixture("coordinate", disc)
    E = extend_besov(lip, cover, pou, disc)
    errs = []
    for r_min in cfg.options["r_min"]:
        t = trace_identity_report(lip, E, disc, n, cfg.seed, r_min)
        at = t.errors_at_floor()
        errs.append(float(at.max()) if len(at) else float("nan"))
        rows += [("coordinate", "E", t.r_min) + r for r in t.rows]
        rep.constants[f"oscillation constant r_min={t.r_min:.4g}"] = t.oscillation_constant()
        rep.constants[f"excluded at r_min={t.r_min:.4g}"] = len(t.errors) - len(at) + len(t.unresolved)
    rep.check("Lipschitz max error at coarsest r_min", errs[0], "<=", cfg.tolerances["max_error"])
    rep.check("error ratio when r_min halves", errs[1] / errs[0], "in", cfg.tolerances["halving"])
    step = fx.named_fixture("arc", disc)
    jumps = jump_points(step, disc)
    for tag, res in (("E", extend_besov(step, cover, pou, disc)), ("Ext", extend_l1(step, disc, 20, cover, pou))):
        t = trace_identity_report(step, res, disc, n, cfg.seed, cfg.options["r_min"][-1])
        rows += [("arc", tag, t.r_min) + r for r in t.rows]
        rep.check(f"step data converged fraction ({tag})", t.fraction_converged, ">=", cfg.tolerances["converged"])
        far = [r for r in t.failures if not r[5]]
        rep.check(f"failures away from jumps ({tag})", float(len(far)), "<=", 0.0,
                  f"jump neighbourhood radius 2^7 r_min = {t.meta['jump_radius']:.4g}")
        near = np.array([np.min(np.linalg.norm(jumps - disc.boundary_points[r[0]], axis=1))
                         for r in t.failures]) if t.failures and len(jumps) else np.zeros(0)
        rep.constants[f"largest failure distance to a jump ({tag}) / r_min"] = (
            float(near.max() / t.r_min) if len(near) else 0.0)
    rep.add_table("trace", ("fixture", "extension", "r_min", "z_id", "Tu", "final_residual", "slope",
                            "converged", "is_jump_neighbor"), rows)


@scenario("thin-tube-counterexample", "trace norm against BV norm of tube indicators",
          domain={"shape": "thin-tubes", "N": 8, "mode": "exact"}, meshes=[1 / 8],
          options={"n": [2, 3, 4, 5, 6, 7, 8], "discretized": True},
          tolerances={"doubling": [1.5, 2.5]})
def thin_tube_counterexample(cfg: ScenarioConfig, rep: ScenarioReport):
    ns = list(cfg.options["n"])
    exact = [fx.thin_tube_norms(n) for n in ns]
    rows = [(e["n"], e["l1"], e["variation"], e["bv"], e["trace_l1"], e["ratio"]) for e in exact]
    rep.add_table("thin_tubes_exact", ("n", "l1", "variation", "bv", "trace_l1", "ratio"), rows)
    for a, b in zip(exact, exact[1:]):
        rep.check(f"ratio growth n={a['n']}->{b['n']}", b["ratio"] / a["ratio"], "in", cfg.tolerances["doubling"])
    if cfg.options.get("discretized"):
        disc = build_domain(_spec(cfg, cfg.meshes[0], N=max(ns)))
        drows = []
        for e in exact:
            tr = fx.thin_tube_trace_measure(disc, e["n"])
            drows.append((e["n"], tr, e["bv"], tr / e["bv"]))
        rep.add_table("thin_tubes_discretized", ("n", "trace_l1_calibrated", "bv", "ratio"), drows)
        for a, b in zip(drows, drows[1:]):
            rep.check(f"calibrated ratio growth n={a[0]}->{b[0]}", b[3] / a[3], "in", cfg.tolerances["doubling"])
    rep.notes.append("u_n is the indicator of the closed tube U_n centred at 1/n^2")


@scenario("space-comparison", "L1, John-Nirenberg and Besov energies on circle fixtures",
          options={"n": 2048, "theta": 0.25, "weierstrass_n": 4096, "alpha": 0.5, "divergent_J": [8, 16, 32]},
          tolerances={"jn": [1.0, 3.0], "methods": 10.0, "harmonic": 2.0, "besov_growth": 1.5,
                      "bv_growth": 2.0})
def space_comparison(cfg: ScenarioConfig, rep: ScenarioReport):
    rows = []
    jn_ratios, spreads, chain = [], [], []
    theta = float(cfg.options["theta"])
    for name, f in fx.circle_family(int(cfg.options["n"]), cfg.seed):
        l1 = l1_norm(f)
        jn0 = jn_norm(f, 0.0, seed=cfg.seed).value
        b = {m: besov_seminorm(f, 0.0, method=m).seminorm for m in ("dyadic", "kernel", "fixed-balls")}
        spread = max(b.values()) / min(b.values()) if min(b.values()) > 0 else float("nan")
        jt = jn_norm(f, theta, seed=cfg.seed).value
        bt = besov_seminorm(f, theta).value
        rows.append((name, l1, jn0, jn0 / l1, b["dyadic"], b["kernel"], b["fixed-balls"], spread, jt, bt))
        jn_ratios.append(jn0 / l1)
        spreads.append(spread)
        chain.append(jt / bt)
    rep.add_table("circle_fixtures", ("fixture", "l1", "jn0", "jn0_over_l1", "besov_dyadic", "besov_kernel",
                                      "besov_fixed_balls", "method_spread", f"jn_theta", f"besov_theta"), rows)
    rep.check("min jn0 / L1", min(jn_ratios), ">=", cfg.tolerances["jn"][0])
    rep.check("max jn0 / L1", max(jn_ratios), "<=", cfg.tolerances["jn"][1])
    rep.check("Besov estimator spread", max(spreads), "<=", cfg.tolerances["methods"])
    rep.constants["C jn_theta <= C besov_theta"] = max(chain)

    Js = list(cfg.options["divergent_J"])
    vals = [fx.divergent_fixed_balls(J)[0] for J in Js]
    c = vals[0] / fx.harmonic(Js[0])
    rep.add_table("divergent", ("J", "value", "harmonic", "ratio"),
                  [(J, v, fx.harmonic(J), v / fx.harmonic(J)) for J, v in zip(Js, vals)])
    for J, v in zip(Js[1:], vals[1:]):
        rep.check(f"divergent value(J)/H_J at J={J}", v / fx.harmonic(J), "in",
                  [c / cfg.tolerances["harmonic"], c * cfg.tolerances["harmonic"]])

    n, alpha = int(cfg.options["weierstrass_n"]), float(cfg.options["alpha"])
    w = {K: fx.circle_field(fx.weierstrass(K, alpha), n) for K in (8, 12)}
    bes = {K: besov_seminorm(w[K], theta).seminorm for K in w}
    bv = {K: bv_energy(w[K]) for K in w}
    rep.add_table("weierstrass", ("K", "besov_theta", "bv_energy"), [(K, bes[K], bv[K]) for K in w])
    rep.check("Weierstrass Besov ratio K=12/K=8", bes[12] / bes[8], "<=", cfg.tolerances["besov_growth"])
    rep.check("Weierstrass BV ratio K=12/K=8", bv[12] / bv[8], ">=", cfg.tolerances["bv_growth"])


@scenario("regularity-audit", "Ahlfors regularity, density and doubling of test domains",
          domain={"shape": "unit-square"}, meshes=[1 / 32, 1 / 64, 1 / 128],
          options={"shapes": ["unit-square", "disc", "l-shape"], "tubes": [2, 3, 4, 5],
                   "tube_h": 1 / 8, "n_samples": 100, "radii_per_octave": 4},
          tolerances={"spread": 25.0, "density": 0.2})
def regularity_audit_scenario(cfg: ScenarioConfig, rep: ScenarioReport):
    q = int(cfg.options["radii_per_octave"])
    radii = [2.0 ** (-k / q) for k in range(q, 14 * q)]
    rows = []
    for shape in cfg.options["shapes"]:
        for h in cfg.meshes:
            disc = build_domain(DomainSpec(shape, h, seed=cfg.seed))
            r = regularity_audit(disc, radii, int(cfg.options["n_samples"]), cfg.seed)
            H, _ = codim1_hausdorff(disc)
            rows.append((shape, h, r.ahlfors_min, r.ahlfors_max, r.ahlfors_spread, r.density_min,
                         r.doubling_constant, H))
            rep.check(f"Ahlfors spread {shape} h={h:g}", r.ahlfors_spread, "<", cfg.tolerances["spread"])
            rep.check(f"density minimum {shape} h={h:g}", r.density_min, ">=", cfg.tolerances["density"])
    rep.add_table("regularity", ("shape", "h", "ahlfors_min", "ahlfors_max", "ahlfors_spread",
                                 "density_min", "doubling", "codim1_measure"), rows)
    tubes = cfg.options.get("tubes") or []
    if tubes:
        mins = []
        trows = []
        for N in tubes:
            disc = build_domain(DomainSpec("thin-tubes", float(cfg.options["tube_h"]), N=N, mode="exact"))
            r = regularity_audit(disc, radii, int(cfg.options["n_samples"]), cfg.seed)
            mins.append(r.density_min)
            trows.append((N, r.density_min, r.ahlfors_min, r.ahlfors_max))
        rep.add_table("thin_tube_density", ("N", "density_min", "ahlfors_min", "ahlfors_max"), trows)
        rep.check("thin-tube density minima decrease in N", mins, "decreasing")


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Run a registered scenario; the report is deterministic for a fixed config."""
    sc = SCENARIOS[config.scenario]
    rep = ScenarioReport(config.scenario, config.as_dict())
    t0 = time.perf_counter()
    sc.run(config, rep)
    rep.wall_time = time.perf_counter() - t0
    return rep
