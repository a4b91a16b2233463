"""Bundled verification suite: every acceptance criterion, pinned.

Each criterion is a function of a shared context (so the expensive
invasion simulation is computed once and reused) returning a
CriterionResult.  ``run_verification`` executes a filtered subset,
prints one line per criterion, and emits a consolidated JSON report
plus plot-ready CSV data.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cauchy, spectral, storage, tracker, wavefront
from .grids import SpaceGrid, TraitGrid
from .potentials import KernelSpec, PotentialSpec


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    measured: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[criterion {self.number:02d}] {self.name}: {status} ({self.detail})"


class VerificationContext:
    """Lazy cache of the artifacts shared between criteria."""

    def __init__(self):
        self._cache = {}
        self.plots = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    # -- spectra ------------------------------------------------------

    def harmonic_basis(self, alpha, n_y=2001, R_y=10.0, k=5):
        def build():
            grid = TraitGrid(R_y, n_y)
            op = spectral.assemble_operator(grid, PotentialSpec("quadratic"), alpha)
            return spectral.eigenpairs(op, k)
        return self._get(("basis", alpha, n_y, R_y, k), build)

    def alpha_bar(self):
        def build():
            grid = TraitGrid(10.0, 2001)
            return spectral.find_alpha_bar(PotentialSpec("quadratic"), grid, tol=2.5e-4)
        return self._get("alpha_bar", build)

    # -- the shared invasion simulation --------------------------------

    def invasion(self):
        return self._get("invasion", self._build_invasion)

    def _build_invasion(self):
        tg = TraitGrid(10.0, 241)
        sg = SpaceGrid(200.0, 2001)
        pot = PotentialSpec("quadratic")
        ker = KernelSpec("constant", k=1.0)
        alpha = 0.25
        op = spectral.assemble_operator(tg, pot, alpha)
        basis = spectral.eigenpairs(op, 8)
        steady = wavefront.steady_state(basis, ker)
        c_star = wavefront.critical_speed(basis.lambda0)
        theta = 0.01 * steady.max_V
        spec = cauchy.InitialData(amplitude=0.1 * steady.mu, r_x=2.0, r_y=1.0)
        field0 = cauchy.init_field(spec, sg, tg, psi0=basis.psi0)
        settings = cauchy.RunSettings(T=90.0, dt="auto", snapshot_stride=75,
                                      theta=theta, alpha_bar=1.0)
        traj = cauchy.run(field0, op, ker, basis, settings)
        return {"trajectory": traj, "basis": basis, "steady": steady,
                "c_star": c_star, "theta": theta, "op": op, "kernel": ker,
                "settings": settings}


# ---------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------

def _crit_harmonic_spectrum(ctx):
    worst = 0.0
    for alpha in (0.25, 1.0, 4.0):
        basis = ctx.harmonic_basis(alpha)
        exact = np.sqrt(alpha) * (2 * np.arange(5) + 1)
        worst = max(worst, float(np.abs(basis.eigenvalues - exact).max() / exact.max()))
    return worst <= 1e-3, f"max rel err {worst:.2e} <= 1e-3", {"max_rel_err": worst}


def _crit_critical_intensity(ctx):
    ab = ctx.alpha_bar()
    err = abs(ab - 1.0)
    return err <= 1e-3, f"alpha_bar={ab:.6f}, |err|={err:.2e} <= 1e-3", {"alpha_bar": ab}


def _crit_critical_speed(ctx):
    lam0 = ctx.harmonic_basis(0.25).lambda0
    c = wavefront.critical_speed(lam0)
    err = abs(c - np.sqrt(2.0))
    return err <= 1e-3, f"c*={c:.6f}, |c*-sqrt2|={err:.2e} <= 1e-3", {"c_star": c}


def _crit_steady_identity(ctx):
    basis = ctx.harmonic_basis(0.25)
    ys = basis.grid.nodes
    kernels = [
        KernelSpec("constant", k=1.0),
        KernelSpec("constant", k=2.0),
        KernelSpec("gaussian", amplitude=1.0, width=2.0),
        KernelSpec("indicator", radius=3.0, height=1.0),
        KernelSpec("tabulated", table=(ys.copy(), np.maximum(0.0, 1.0 - np.abs(ys) / 5.0))),
    ]
    worst = 0.0
    for ker in kernels:
        ss = wavefront.steady_state(basis, ker)
        worst = max(worst, abs(ss.mu * ss.kernel_moment + ss.lambda0 - 1.0))
    return worst <= 1e-10, f"max identity defect {worst:.2e} <= 1e-10", {"max_defect": worst}


def _crit_kpp_oracle(ctx):
    r = 0.5
    c = 5.0 / np.sqrt(6.0) * np.sqrt(r)
    prof = wavefront.solve_kpp_profile(c, 0.5, L_x=60.0, n_x=4001)
    x = prof.grid.nodes
    exact = (1.0 + (np.sqrt(2.0) - 1.0) * np.exp(np.sqrt(r / 6.0) * x)) ** -2
    err = float(np.abs(prof.v - exact).max())
    ctx.plots["profile_vs_closed_form"] = ("x,v_numeric,v_exact", [x, prof.v, exact])
    return err <= 5e-4, f"sup err {err:.2e} <= 5e-4", {"sup_err": err}


def _crit_residual_convergence(ctx):
    alpha, lam0 = 0.25, 0.5
    c = 2.0 * np.sqrt(1.0 - lam0)
    moment = 2.0 ** 0.5 * np.pi ** 0.25 * alpha ** (-0.125)
    mu = (1.0 - lam0) / moment
    ref = wavefront.solve_kpp_profile(c, lam0, L_x=60.0, n_x=8001)
    pot, ker = PotentialSpec("quadratic"), KernelSpec("constant", k=1.0)

    def residual(n_x, n_y):
        stride = 8000 // (n_x - 1)
        v = ref.v[::stride]
        sgrid = SpaceGrid(60.0, n_x)
        tgrid = TraitGrid(10.0, n_y)
        psi = (np.sqrt(alpha) / np.pi) ** 0.25 * np.exp(-np.sqrt(alpha) * tgrid.nodes**2 / 2)
        u = mu * np.outer(v, psi)
        op = spectral.assemble_operator(tgrid, pot, alpha)
        return wavefront.wave_residual(u, c, op, ker, sgrid).max_interior

    coarse = residual(1001, 241)
    fine = residual(2001, 481)
    factor = coarse / fine
    ok = 3.2 <= factor <= 4.8
    return ok, f"residual factor {factor:.2f} in [3.2, 4.8]", \
        {"coarse": coarse, "fine": fine, "factor": factor}


def _crit_linear_regime(ctx):
    tg = TraitGrid(10.0, 201)
    sg = SpaceGrid(40.0, 161)
    op = spectral.assemble_operator(tg, PotentialSpec("quadratic"), 0.25)
    basis = spectral.eigenpairs(op, 1)
    u0 = np.tile(basis.psi0, (sg.n_points, 1))
    u0[0] = u0[-1] = 0.0
    f0 = cauchy.Field(0.0, u0, sg, tg, None)
    settings = cauchy.RunSettings(T=5.0, dt=1e-3, snapshot_stride=10**9,
                                  with_competition=False, check_bounds=False)
    traj = cauchy.run(f0, op, KernelSpec("constant", k=1.0), basis, settings)
    exact = np.exp((1.0 - basis.lambda0) * 5.0) * basis.psi0
    core = np.abs(sg.nodes) <= 0.5 * sg.half_width
    err = float(np.abs(traj.final.u[core] - exact[None, :]).max() / exact.max())
    return err <= 0.01, f"rel sup err {err:.2e} <= 1e-2 (core |x|<=L/2)", {"rel_err": err}


def _crit_propagation_speed(ctx):
    inv = ctx.invasion()
    trace = tracker.trace_from_diagnostics(inv["trajectory"])
    est = tracker.estimate_speed(trace, window_fraction=0.5)
    c_star = inv["c_star"]
    ratio = est.c_hat / c_star
    ctx.plots["front_position_vs_t"] = (
        "t,x_plus,x_minus",
        [trace.times, trace.x_plus, trace.x_minus])
    ok = est.status == "ok" and 0.95 <= ratio <= 1.02
    return ok, f"c_hat/c* = {ratio:.4f} in [0.95, 1.02]", \
        {"c_hat": est.c_hat, "c_star": c_star, "ratio": ratio, "stderr": est.stderr}


def _crit_invasion_to_steady(ctx):
    inv = ctx.invasion()
    c = 0.5 * inv["c_star"]
    times, errors, _ = tracker.invasion_profile_error(
        inv["trajectory"], inv["steady"], c, c_star=inv["c_star"])
    v_max = inv["steady"].max_V
    final_ok = errors[-1] <= 0.05 * v_max
    half = times >= 0.5 * times[-1]
    tail = errors[half]
    monotone = bool(np.all(np.diff(tail) <= 1e-9 * v_max))
    ok = final_ok and monotone
    return ok, (f"final err {errors[-1]/v_max:.2e} (<= 5e-2 of max V), "
                f"monotone last half: {monotone}"), \
        {"final_rel": float(errors[-1] / v_max), "monotone": monotone}


def _crit_emptiness_beyond(ctx):
    inv = ctx.invasion()
    c = 1.2 * inv["c_star"]
    times, sups, flags = tracker.emptiness_beyond(inv["trajectory"], c)
    v_max = inv["steady"].max_V
    rel = float(sups[-1] / v_max)
    ok = (not flags[-1]) and rel <= 1e-3
    return ok, f"final sup beyond 1.2c*t: {rel:.2e} of max V <= 1e-3", \
        {"final_rel": rel, "region_empty": bool(flags[-1])}


def _crit_extinction(ctx):
    ab = ctx.alpha_bar()
    alpha = 1.5 * ab
    tg = TraitGrid(10.0, 241)
    sg = SpaceGrid(30.0, 301)
    pot, ker = PotentialSpec("quadratic"), KernelSpec("constant", k=1.0)
    op = spectral.assemble_operator(tg, pot, alpha)
    basis = spectral.eigenpairs(op, 1)
    f0 = cauchy.init_field(cauchy.InitialData(0.05, 2.0, 1.0), sg, tg, psi0=basis.psi0)
    settings = cauchy.RunSettings(T=40.0, dt="auto", snapshot_stride=10**9,
                                  alpha_bar=ab)
    traj = cauchy.run(f0, op, ker, basis, settings)
    t, sup = traj.diag["t"], traj.diag["sup_u"]
    sel = t >= 0.5 * t[-1]
    slope = np.polyfit(t[sel], np.log(sup[sel]), 1)[0]
    target = basis.lambda0 - 1.0
    rel_dev = abs(-slope - target) / target
    ok = rel_dev <= 0.20
    return ok, (f"decay rate {-slope:.4f} vs lambda0-1 = {target:.4f} "
                f"(rel dev {rel_dev:.1%} <= 20%)"), \
        {"rate": float(-slope), "target": float(target), "rel_dev": float(rel_dev)}


def _crit_liouville_relaxation(ctx):
    tg = TraitGrid(10.0, 241)
    sg = SpaceGrid(50.0, 501)
    pot, ker = PotentialSpec("quadratic"), KernelSpec("constant", k=1.0)
    op = spectral.assemble_operator(tg, pot, 0.25)
    basis = spectral.eigenpairs(op, 8)
    steady = wavefront.steady_state(basis, ker)
    c_star = wavefront.critical_speed(basis.lambda0)
    qx = 0.6 + 0.4 * cauchy.bump_profile(sg.nodes / 40.0, 0.8)
    qy = 1.0 + 0.3 * np.exp(-((tg.nodes - 1.0) ** 2))
    u0 = steady.V[None, :] * qx[:, None] * qy[None, :]
    u0[0] = u0[-1] = 0.0
    f0 = cauchy.Field(0.0, u0, sg, tg, None)
    settings = cauchy.RunSettings(T=25.0, dt="auto", snapshot_stride=10**9,
                                  frame_speed=0.5 * c_star, check_bounds=False)
    traj = cauchy.run(f0, op, ker, basis, settings)
    core = np.abs(sg.nodes) <= 12.5
    dev = float(np.abs(traj.final.u[core] - steady.V[None, :]).max() / steady.max_V)
    ok = dev <= 1e-2
    return ok, f"core distance to V: {dev:.2e} of max V <= 1e-2", {"final_rel": dev}


def _crit_mode_decay(ctx):
    inv = ctx.invasion()
    basis = inv["basis"]
    modes = inv["trajectory"].diag["modes"]          # (steps, 8) of max_x |v_i|
    lams = basis.eigenvalues[: modes.shape[1]]
    peaks = modes.max(axis=0)
    floor = 1e-10 * peaks.max()
    checked, failures = [], []
    for j in np.nonzero(lams > 1.0)[0]:
        series = modes[:, j]
        if peaks[j] <= floor:
            continue  # never excited (odd modes vanish by symmetry)
        checked.append(int(j))
        kp = int(np.argmax(series))
        after = series[kp:]
        if not np.all(after[1:] <= after[:-1] * 1.05 + floor):
            failures.append(f"mode {j} not monotone after its peak")
        if series[-1] > 1e-4 * peaks[j]:
            failures.append(f"mode {j} final/peak = {series[-1]/peaks[j]:.2e} > 1e-4")
    ok = not failures and len(checked) > 0
    detail = f"modes {checked} decayed below 1e-4 of peak" if ok else "; ".join(failures)
    return ok, detail, {"checked": checked, "failures": failures}


def _crit_truncation_study(ctx):
    pairs = spectral.truncation_study(PotentialSpec("quadratic"), 1.0,
                                      (4.0, 6.0, 8.0, 10.0), n_per_unit=400)
    lams = np.array([lam for _, lam in pairs])
    monotone = bool(np.all(np.diff(lams) <= 1e-10))
    cauchy_gap = abs(lams[3] - lams[2])
    ctx.plots["lambda0_vs_R"] = ("R,lambda0", [np.array([R for R, _ in pairs]), lams])
    ok = monotone and cauchy_gap < 1e-6
    return ok, (f"non-increasing: {monotone}, |lam(10)-lam(8)| = {cauchy_gap:.2e} < 1e-6"), \
        {"lambdas": lams.tolist(), "gap": float(cauchy_gap)}


def _crit_fractional(ctx):
    sigma, alpha = 0.5, 1.0
    pot = PotentialSpec("quadratic")
    results = {}
    for n in (801, 1601):
        grid = TraitGrid(20.0, n)
        op = spectral.assemble_operator(grid, pot, alpha, diffusion="fractional",
                                        sigma=sigma)
        results[n] = spectral.eigenpairs(op, 2)
    res_max = max(float(results[n].residuals.max()) for n in results)
    lam_c, lam_f = results[801].lambda0, results[1601].lambda0
    lam_stable = abs(lam_c - lam_f) <= 1e-3 * lam_f
    exponent = spectral.tail_exponent(results[1601], window=(0.5, 1.0))
    target = -(1.0 + 2.0 * sigma)
    exp_ok = abs(exponent - target) <= 0.5
    ok = res_max < 1e-8 and lam_stable and exp_ok
    detail = (f"eigen-residual {res_max:.1e} (<1e-8): {res_max < 1e-8}; "
              f"lambda0 drift {abs(lam_c-lam_f):.2e} (<=1e-3 rel): {lam_stable}; "
              f"tail exponent {exponent:.2f} vs {target:.1f} +- 0.5: {exp_ok}")
    return ok, detail, {"residual": res_max, "lambda0_coarse": lam_c,
                        "lambda0_fine": lam_f, "tail_exponent": exponent}


CRITERIA = [
    (1, "harmonic-spectrum", _crit_harmonic_spectrum),
    (2, "critical-intensity", _crit_critical_intensity),
    (3, "critical-speed", _crit_critical_speed),
    (4, "steady-state-identity", _crit_steady_identity),
    (5, "kpp-closed-form", _crit_kpp_oracle),
    (6, "residual-convergence", _crit_residual_convergence),
    (7, "linear-regime-solver", _crit_linear_regime),
    (8, "propagation-speed", _crit_propagation_speed),
    (9, "invasion-to-steady-state", _crit_invasion_to_steady),
    (10, "emptiness-beyond-critical", _crit_emptiness_beyond),
    (11, "extinction", _crit_extinction),
    (12, "liouville-relaxation", _crit_liouville_relaxation),
    (13, "mode-decay", _crit_mode_decay),
    (14, "truncation-study", _crit_truncation_study),
    (15, "fractional-variant", _crit_fractional),
]


def run_criterion(number, ctx=None) -> CriterionResult:
    ctx = ctx or VerificationContext()
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            passed, detail, measured = fn(ctx)
            return CriterionResult(num, name, bool(passed), detail, measured,
                                   time.perf_counter() - t0)
    raise ValueError(f"no criterion numbered {number}")


def run_verification(name_filter: str | None = None, out_dir=None,
                     ctx: VerificationContext | None = None, echo=print):
    """Run all (or filtered) criteria; returns (results, report dict)."""
    ctx = ctx or VerificationContext()
    selected = [(n, name, fn) for n, name, fn in CRITERIA
                if not name_filter or name_filter in name or name_filter == str(n)]
    results = []
    for num, name, fn in selected:
        t0 = time.perf_counter()
        passed, detail, measured = fn(ctx)
        res = CriterionResult(num, name, bool(passed), detail, measured,
                              time.perf_counter() - t0)
        results.append(res)
        echo(res.line())
    report = {
        "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                      "detail": r.detail, "measured": r.measured,
                      "runtime_s": round(r.runtime_s, 3)} for r in results],
        "all_passed": all(r.passed for r in results),
        "n_passed": sum(r.passed for r in results),
        "n_total": len(results),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        storage.write_json(out / "verification_report.json", report)
        for key, (header, cols) in ctx.plots.items():
            storage.write_csv(out / f"{key}.csv", header, cols)
    return results, report
