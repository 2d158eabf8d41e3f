"""Acceptance checks with their reference values and tolerances.

Each check returns a :class:`CriterionResult`.  The ensemble runs behind the
numerical checks are shared through :class:`AcceptanceRun`, which caches
them (optionally on disk, so an interrupted verification resumes).
"""
from dataclasses import dataclass
import hashlib
import logging
import os
import tempfile
import time

import numpy as np

from . import corranalysis as ca
from . import experiments as ex
from . import fem, homogenize, stochastic, sweeps
from . import materials as mm

log = logging.getLogger(__name__)

ACCEPTANCE_SEED = 1
REALIZATIONS = 100
WINDOWS = ex.WINDOW_SIZES

REF_CONSTANTS = {
    "tandon_weng": {"e1": 12.4, "e2": 3.99, "g12": 1.31, "g23": 1.26, "nu12": 0.379},
    "halpin_tsai": {"e1": 11.2, "e2": 4.12, "g12": 1.30, "g23": 1.25, "nu12": 0.375},
}
REF_MATRICES = {
    "tandon_weng": {"11": 13.0, "12": 1.59, "22": 4.18, "66": 1.31},
    "halpin_tsai": {"11": 12.0, "12": 1.63, "22": 4.34, "66": 1.30},
}
REF_ELEMENT_SIZE = {
    fem.KUBC: {"11": 11.7, "12": 1.56, "21": 1.49, "22": 4.36, "66": 1.35},
    fem.SUBC: {"11": 6.42, "12": 1.49, "21": 1.58, "22": 3.91, "66": 1.16},
}
MODULUS_TOL = 0.05
POISSON_TOL = 0.005
ELEMENT_SIZE_RTOL = 0.10
HILL_TOL = 1e-8
DISJOINT_RHO = 0.2
SWAP_RHO = 0.15
UNCORRELATED_RHO = 0.2
ANISOTROPY_MEAN = 0.1


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f} s)"


def _sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


class AcceptanceRun:
    """Shared, seeded ensembles used by criteria 6 to 14."""

    def __init__(self, workers=1, realizations=REALIZATIONS, seed=ACCEPTANCE_SEED,
                 cache_dir=None):
        self.workers = workers
        self.realizations = realizations
        self.seed = seed
        self.cache_dir = cache_dir
        self._tables = {}
        self.timings = {}

    def _run(self, key, cfg):
        if key in self._tables:
            return self._tables[key]
        ck = None
        if self.cache_dir:
            os.makedirs(self.cache_dir, exist_ok=True)
            ck = os.path.join(self.cache_dir, f"{key}.partial.csv")
        t0 = time.perf_counter()
        log.info("ensemble %s: %d realizations", key, cfg.realizations)
        table = ca.ensemble_run(cfg, workers=self.workers, checkpoint=ck)
        self.timings[key] = time.perf_counter() - t0
        self._tables[key] = table
        return table

    def aligned_config(self, window):
        return ex.aligned_ensemble(window, self.realizations,
                                   stochastic.derive_seed(self.seed, 1, window))

    def aligned(self, window):
        return self._run(f"aligned_{window}", self.aligned_config(window))

    def moving_config(self, realizations=None):
        return ex.moving_window_ensemble(250, realizations or self.realizations,
                                         stochastic.derive_seed(self.seed, 2, 250))

    def moving(self):
        return self._run("moving_250", self.moving_config())

    def all_varying_750(self):
        cfg = ex.window_ensemble(ex.scenario_generation("all", 750), 750, self.realizations,
                                 stochastic.derive_seed(self.seed, 3, 750))
        return self._run("all_750", cfg)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# -- criteria ----------------------------------------------------------------

def criterion_1(run=None):
    def body():
        return {name: model(mm.PBT, mm.GLASS, 260.0 / 10.9, 0.1822)
                for name, model in mm.MODELS.items()}
    consts, dt = _timed(body)
    bad = []
    for name, ref in REF_CONSTANTS.items():
        c = consts[name]
        for key, target in ref.items():
            tol = POISSON_TOL if key == "nu12" else MODULUS_TOL
            val = getattr(c, key)
            if abs(val - target) > tol:
                bad.append(f"{name}.{key}={val:.4g} vs {target}")
    ok = not bad and dt < 1.0
    detail = "; ".join(bad) if bad else "all ten constants within tolerance"
    return CriterionResult(1, "analytic engineering constants", ok, detail, dt)


def criterion_2(run=None):
    def body():
        return {name: mm.plane_stress_matrix(model(mm.PBT, mm.GLASS, 260.0 / 10.9, 0.1822))
                for name, model in mm.MODELS.items()}
    mats, dt = _timed(body)
    bad = []
    for name, ref in REF_MATRICES.items():
        for lab, target in ref.items():
            val = float(mats[name][lab])
            if abs(val - target) > MODULUS_TOL:
                bad.append(f"{name} C{lab}={val:.4g} vs {target}")
    ok = not bad and dt < 1.0
    detail = "; ".join(bad) if bad else "all eight coefficients within 0.05 GPa"
    return CriterionResult(2, "analytic plane-stress matrices", ok, detail, dt)


def criterion_3(run=None):
    rng = np.random.default_rng(stochastic.derive_seed(ACCEPTANCE_SEED, 3))
    z, dt = _timed(lambda: stochastic.sample_fiber_length(rng, 1_000_000))
    mean = float(z.mean())
    ok = abs(mean - 260.0) <= 2.0 and dt < 10.0
    return CriterionResult(3, "Weibull fiber-length mean", ok, f"mean={mean:.3f} um", dt)


def criterion_4(run=None):
    def body():
        grid = np.zeros((250, 250), dtype=bool)
        return homogenize.apparent_tensors(grid)
    ts, dt = _timed(body)
    ref = mm.PBT.stiffness(mm.PLANE_STRESS)
    errs = {k: float(np.abs(t.matrix - ref).max() / np.abs(ref).max()) for k, t in ts.items()}
    ok = all(e <= 1e-8 for e in errs.values()) and dt < 5.0
    detail = ", ".join(f"{k} rel err {e:.1e}" for k, e in errs.items())
    return CriterionResult(4, "homogeneous-window oracle", ok, detail, dt)


def criterion_5(run=None):
    def body():
        size, width = 250, 80
        phi = width / size
        out = []
        zero_nu = (mm.IsotropicMaterial(2.6, 0.0, 1300.0), mm.IsotropicMaterial(70.0, 0.0, 2500.0))
        for phases in (zero_nu, (mm.PBT, mm.GLASS)):
            m, f = phases
            voigt = phi * f.young_modulus + (1 - phi) * m.young_modulus
            reuss = 1.0 / (phi / f.young_modulus + (1 - phi) / m.young_modulus)
            reuss_g = 1.0 / (phi / f.shear_modulus + (1 - phi) / m.shear_modulus)
            vert = homogenize.apparent_tensors(ex.laminate_window(size, width, True),
                                               phases=phases)
            out.append(("SUBC C66 (shear Reuss)", vert[fem.SUBC].coefficient("66"), reuss_g))
            if phases is zero_nu:
                horiz = homogenize.apparent_tensors(ex.laminate_window(size, width, False),
                                                    phases=phases)
                out += [
                    ("KUBC C22 parallel (Voigt)", vert[fem.KUBC].coefficient("22"), voigt),
                    ("SUBC C11 series (Reuss)", vert[fem.SUBC].coefficient("11"), reuss),
                    ("KUBC C11 parallel (Voigt)", horiz[fem.KUBC].coefficient("11"), voigt),
                    ("SUBC C22 series (Reuss)", horiz[fem.SUBC].coefficient("22"), reuss),
                ]
        return out
    checks, dt = _timed(body)
    errs = [(name, abs(v - ref) / abs(ref)) for name, v, ref in checks]
    worst = max(errs, key=lambda e: e[1])
    ok = all(e <= 1e-6 for _, e in errs)
    return CriterionResult(5, "two-strip laminate oracle", ok,
                           f"{len(errs)} checks, worst {worst[0]} rel err {worst[1]:.1e}", dt)


def criterion_6(run):
    table, dt = _timed(lambda: run.aligned(250))
    s = ex.summarize(table)
    bad, parts = [], []
    for kind, ref in REF_ELEMENT_SIZE.items():
        for lab, target in ref.items():
            val = s[kind].get(lab)
            parts.append(f"{kind} C{lab}={val:.3g}")
            if abs(val - target) > ELEMENT_SIZE_RTOL * target:
                bad.append(f"{kind} C{lab}={val:.4g} vs {target}")
    ok = not bad
    detail = "; ".join(bad) if bad else ", ".join(parts)
    return CriterionResult(6, "element-size table, h=10 um", ok, detail,
                           run.timings.get("aligned_250", dt))


def _diag_violations(table):
    s = ex.summarize(table)
    return [lab for lab in ("11", "22", "66")
            if s[fem.SUBC].get(lab) > s[fem.KUBC].get(lab)]


def criterion_7(run):
    t0 = time.perf_counter()
    issues = []
    tables = {f"aligned {w}": run.aligned(w) for w in WINDOWS}
    tables["all-varying 250"] = _center_table(run.moving())
    tables["all-varying 750"] = run.all_varying_750()
    for name, table in tables.items():
        issues += [f"{name} C{lab}" for lab in _diag_violations(table)]
    ok = not issues
    detail = "violations: " + ", ".join(issues) if issues else \
        f"SUBC <= KUBC on all diagonals of {len(tables)} ensembles"
    return CriterionResult(7, "bound ordering", ok, detail, time.perf_counter() - t0)


def _center_table(table):
    return ca.CoefficientTable(
        ca.center_layout(table.layout.domain, table.layout.window), table.bc_kinds, table.state,
        table.values[:, :1], table.seeds, table.hill[:, :1], table.fraction[:, :1])


def criterion_8(run):
    t0 = time.perf_counter()
    k = [ex.summarize(run.aligned(w))[fem.KUBC].get("11") for w in WINDOWS]
    s = [ex.summarize(run.aligned(w))[fem.SUBC].get("11") for w in WINDOWS]
    ok = k[0] > k[1] > k[2] and s[0] < s[1] < s[2]
    detail = ("KUBC C11 " + " > ".join(f"{v:.3f}" for v in k)
              + "; SUBC C11 " + " < ".join(f"{v:.3f}" for v in s))
    return CriterionResult(8, "window-size trend", ok, detail, time.perf_counter() - t0)


def criterion_9(run):
    table = run.aligned(250)
    worst = float(table.hill.max())
    return CriterionResult(9, "Hill residual", worst <= HILL_TOL,
                           f"max over {table.hill.size} tensor recoveries {worst:.1e}")


def criterion_10(run):
    t0 = time.perf_counter()
    small, large = _center_table(run.moving()), run.all_varying_750()
    ss, sl = ex.summarize(small), ex.summarize(large)
    bad, parts = [], []
    for kind in (fem.KUBC, fem.SUBC):
        for name, s in (("250", ss), ("750", sl)):
            for lab in ("16", "26"):
                m = s[kind].get(lab)
                if abs(m) >= ANISOTROPY_MEAN:
                    bad.append(f"{kind} {name} mean C{lab}={m:.3f}")
        a, b = ss[kind].get("16", "std"), sl[kind].get("16", "std")
        parts.append(f"{kind} std C16 {a:.3f} -> {b:.3f}")
        if not b < a:
            bad.append(f"{kind} std C16 does not shrink ({a:.3f} -> {b:.3f})")
    ok = not bad
    return CriterionResult(10, "vanishing anisotropy", ok,
                           "; ".join(bad) if bad else ", ".join(parts), time.perf_counter() - t0)


def _curves(run):
    if not hasattr(run, "_curves"):
        run._curves = ca.correlation_curves(run.moving())
    return run._curves


def criterion_11(run):
    t0 = time.perf_counter()
    curves = _curves(run)
    bad = []
    for lab in homogenize.COEFFICIENT_LABELS:
        for kind in fem.BC_KINDS:
            for cls in (ca.AXIAL, ca.DIAGONAL):
                if curves[(lab, lab, cls, kind)].rho[0] != 1.0:
                    bad.append(f"rho_{lab}^{lab}(0) != 1 ({kind})")
    worst = (0.0, "")
    for (a, b, cls, kind), c in curves.items():
        # the last point of each ray is the disjoint window
        step4 = c.rho[-1]
        if abs(step4) > worst[0]:
            worst = (abs(step4), f"rho_{a}^{b} {cls} {kind}")
        if abs(step4) >= DISJOINT_RHO:
            bad.append(f"disjoint rho_{a}^{b} {cls} {kind}={step4:.3f}")
    swap = 0.0
    for cls in (ca.AXIAL, ca.DIAGONAL):
        for kind in fem.BC_KINDS:
            d = np.abs(curves[("16", "26", cls, kind)].rho - curves[("26", "16", cls, kind)].rho)
            swap = max(swap, float(d.max()))
    if swap >= SWAP_RHO:
        bad.append(f"max |rho_16^26 - rho_26^16| = {swap:.3f}")
    detail = "; ".join(bad[:6]) + (f" (+{len(bad) - 6} more)" if len(bad) > 6 else "") if bad \
        else f"max disjoint |rho| {worst[0]:.3f} ({worst[1]}), max swap gap {swap:.3f}"
    return CriterionResult(11, "correlation sanity", not bad, detail, time.perf_counter() - t0)


def criterion_12(run):
    t0 = time.perf_counter()
    curves = _curves(run)
    worst, where = 0.0, ""
    for cls in (ca.AXIAL, ca.DIAGONAL):
        for kind in fem.BC_KINDS:
            c = curves[("16", "11", cls, kind)]
            i = int(np.argmax(np.abs(c.rho)))
            if abs(c.rho[i]) > worst:
                worst, where = float(abs(c.rho[i])), f"{cls} {kind} |xi|={c.xi[i]:g} um"
    ok = worst < UNCORRELATED_RHO
    return CriterionResult(12, "uncorrelated C16-C11", ok,
                           f"max |rho_16^11| = {worst:.3f} at {where}", time.perf_counter() - t0)


def criterion_13(run):
    t0 = time.perf_counter()
    small = run.moving().coefficient("11", fem.KUBC).ravel()
    large = run.all_varying_750().coefficient("11", fem.KUBC, 0)
    fs, fl = stochastic.fit_distribution(small), stochastic.fit_distribution(large)
    ok = fs.preferred == "weibull" and fl.loglik_gap < fs.loglik_gap
    detail = (f"250 um: {fs.preferred} preferred, gap {fs.loglik_gap:+.4f}/sample (n={fs.count}); "
              f"750 um: gap {fl.loglik_gap:+.4f}/sample (n={fl.count})")
    return CriterionResult(13, "distribution-shape transition", ok, detail,
                           time.perf_counter() - t0)


def criterion_14(run):
    t0 = time.perf_counter()
    parts, ok = [], True
    with tempfile.TemporaryDirectory() as tmp:
        # aligned-fiber ensemble of criterion 6, rerun from scratch
        first = run.aligned(250)
        again = ca.ensemble_run(run.aligned_config(250), workers=1)
        p1, p2 = os.path.join(tmp, "a.csv"), os.path.join(tmp, "b.csv")
        first.to_csv(p1)
        again.to_csv(p2)
        same = _sha(p1) == _sha(p2)
        ok &= same
        parts.append(f"element-size ensemble replay {'identical' if same else 'DIFFERS'}")
        # moving-window ensemble with different worker counts
        cfg = run.moving_config(realizations=2)
        q1, q2 = os.path.join(tmp, "m1.csv"), os.path.join(tmp, "m2.csv")
        ca.ensemble_run(cfg, workers=1).to_csv(q1)
        ca.ensemble_run(cfg, workers=2).to_csv(q2)
        same = _sha(q1) == _sha(q2)
        ok &= same
        parts.append(f"1 vs 2 workers {'identical' if same else 'DIFFERS'}")
        # analytic sweep
        spec = sweeps.SweepSpec(vary="orientation", n_samples=10_000)
        r1, r2 = os.path.join(tmp, "s1.csv"), os.path.join(tmp, "s2.csv")
        sweeps.run_sweep(spec, np.random.default_rng(run.seed)).to_csv(r1)
        sweeps.run_sweep(spec, np.random.default_rng(run.seed)).to_csv(r2)
        same = _sha(r1) == _sha(r2)
        ok &= same
        parts.append(f"sweep replay {'identical' if same else 'DIFFERS'}")
    return CriterionResult(14, "determinism", bool(ok), ", ".join(parts), time.perf_counter() - t0)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 15)}
QUICK = (1, 2, 3, 4, 5)


def run_acceptance(numbers=None, quick=False, run=None, report=print):
    """Evaluate the selected criteria in order and report one line each."""
    numbers = (QUICK if quick else tuple(CRITERIA)) if numbers is None else tuple(numbers)
    run = AcceptanceRun() if run is None else run
    results = []
    for n in numbers:
        res = CRITERIA[n](run)
        if report is not None:
            report(res.line())
        results.append(res)
    return results
