"""Command-line interface.

Subcommands: spectrum, alpha-bar, wave, simulate, speed, verify.
Configuration comes from a single JSON document (--config); flags only
select the subcommand, output directory, thread count, and the verify
filter.  Exit codes: 0 success (including partial wave sweeps), 2
configuration error, 3 numeric failure.  Errors print one machine-
readable JSON object to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import cauchy, spectral, storage, tracker, verify, wavefront
from .config import ExperimentConfig
from .errors import ConfigError, FrontlabError, NumericsError, ValidationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _emit_error(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}},
                                sort_keys=True) + "\n")
    return code


def _resolve_threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("FRONTLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FRONTLAB_THREADS is not an integer: {env!r}") from None
    return 1


def _out_dir(args, cfg: ExperimentConfig | None) -> Path:
    if args.out:
        out = Path(args.out)
    elif cfg is not None:
        out = cfg.output_dir()
    else:
        out = Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config PATH is required for this subcommand")
    return ExperimentConfig.from_file(args.config)


def _spectrum_pieces(cfg: ExperimentConfig):
    # precondition failures while building from config are config errors
    try:
        alpha, alpha_bar = cfg.resolve_alpha()
        op = cfg.operator(alpha)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    basis = spectral.eigenpairs(op, cfg.section("spectrum")["k"])
    return alpha, alpha_bar, op, basis


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    t0 = time.perf_counter()
    alpha, alpha_bar, op, basis = _spectrum_pieces(cfg)
    storage.spectral_basis_to_csv(basis, out / "spectral_basis.csv", cfg.hash)
    report = {
        "config_hash": cfg.hash,
        "alpha": alpha,
        "alpha_bar": alpha_bar,
        "bc": basis.bc,
        "diffusion": basis.diffusion,
        "sigma": basis.sigma,
        "eigenvalues": basis.eigenvalues.tolist(),
        "orthonormality_defect": basis.orthonormality_defect(),
        "max_eigen_residual": float(basis.residuals.max()),
        "timing_s": round(time.perf_counter() - t0, 3),
    }
    storage.write_json(out / "spectrum_report.json", report)
    print(f"lambda: {', '.join(f'{v:.6g}' for v in basis.eigenvalues)}")
    print(f"wrote {out / 'spectral_basis.csv'}")
    return EXIT_OK


def cmd_alpha_bar(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    t0 = time.perf_counter()
    kind, sigma = cfg.diffusion_kind()
    ab, info = spectral.find_alpha_bar(cfg.potential(), cfg.trait_grid(),
                                       tol=float(cfg.raw.get("alpha_bar_tol", 1e-6)),
                                       bc=cfg.boundary(), diffusion=kind, sigma=sigma,
                                       return_info=True)
    report = {"config_hash": cfg.hash, "alpha_bar": ab,
              "lambda0_at_alpha_bar": info["lambda0"],
              "bisection_halvings": info["halvings"],
              "eigenvalue_evaluations": info["evaluations"],
              "timing_s": round(time.perf_counter() - t0, 3)}
    storage.write_json(out / "alpha_bar.json", report)
    print(f"alpha_bar = {ab:.8g}")
    return EXIT_OK


def _solve_one_speed(c, lam0, cfg):
    try:
        profile = wavefront.solve_kpp_profile(c, lam0)
        return c, profile, None
    except ValidationError as exc:
        return c, None, str(exc)


def cmd_wave(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    threads = _resolve_threads(args.threads)
    alpha, _, op, basis = _spectrum_pieces(cfg)
    steady = wavefront.steady_state(basis, cfg.kernel())
    if steady.regime == "extinction":
        return _emit_error(EXIT_NUMERIC,
                           f"extinction regime (lambda0={steady.lambda0:.6g} >= 1): "
                           "no fronts to solve")
    c_star = wavefront.critical_speed(steady.lambda0)
    speeds = cfg.speeds(c_star)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(lambda c: _solve_one_speed(c, steady.lambda0, cfg),
                                   speeds))
    else:
        solved = [_solve_one_speed(c, steady.lambda0, cfg) for c in speeds]

    entries = []
    for idx, (c, profile, failure) in enumerate(solved):
        tag = f"c{idx:02d}"
        if failure is not None:
            entries.append({"c": c, "status": "rejected: c < c*", "reason": failure})
            continue
        storage.profile_to_csv(profile, out / f"profile_{tag}.csv", cfg.hash)
        wave = wavefront.assemble_wave(profile, steady)
        residual = wavefront.wave_residual(wave, c, op, cfg.kernel())
        storage.write_field_binary(
            out / f"wave_{tag}.bin", wave.u,
            {"n_x": wave.space_grid.n_points, "n_y": wave.trait_grid.n_points,
             "L_x": wave.space_grid.half_width, "R_y": wave.trait_grid.half_width,
             "c": c, "mu": steady.mu, "lambda0": steady.lambda0},
            cfg.hash)
        entries.append({"c": c, "status": "ok",
                        "gamma0": profile.gamma0,
                        "fitted_tail_rate": wavefront.fit_tail_rate(profile),
                        "newton_residual": profile.residual_report["newton_residual"],
                        "interior_residual": profile.residual_report["interior_residual"],
                        "wave_residual_max": residual.max_interior,
                        "profile_csv": f"profile_{tag}.csv",
                        "wave_bin": f"wave_{tag}.bin"})
    report = {"config_hash": cfg.hash, "alpha": alpha, "lambda0": steady.lambda0,
              "c_star": c_star, "mu": steady.mu, "waves": entries}
    storage.write_json(out / "wave_report.json", report)
    for e in entries:
        print(f"c={e['c']:.6g}: {e['status']}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    t0 = time.perf_counter()
    alpha, alpha_bar, op, basis = _spectrum_pieces(cfg)
    kernel = cfg.kernel()
    steady = wavefront.steady_state(basis, kernel)
    trk = cfg.section("tracker")
    theta = trk["theta"]
    if theta == "auto":
        theta = 0.01 * steady.max_V if steady.regime == "invasion" else None
    tsec = cfg.section("time")
    sg, tg = cfg.space_grid(), cfg.trait_grid()
    ini = cfg.section("initial")
    amp = float(ini["amplitude"])
    spec = cauchy.InitialData(amp, float(ini["r_x"]), float(ini["r_y"]),
                              float(ini["plateau"]))
    try:
        field0 = cauchy.init_field(spec, sg, tg, psi0=basis.psi0)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    settings = cauchy.RunSettings(
        T=float(tsec["T"]), dt=tsec.get("dt", "auto"),
        snapshot_stride=int(tsec.get("snapshot_stride", 25)),
        theta=theta, alpha_bar=alpha_bar)
    traj = cauchy.run(field0, op, kernel, basis, settings)

    storage.diagnostics_to_csv(traj, out / "diagnostics.csv", cfg.hash)
    which = cfg.section("output").get("snapshots", "final")
    to_save = traj.fields if which == "all" else [traj.final]
    for f in to_save:
        name = f"snapshot_t{f.t:012.4f}.bin"
        storage.write_field_binary(out / name, f.u,
                                   {"t": f.t, "n_x": sg.n_points, "n_y": tg.n_points,
                                    "L_x": sg.half_width, "R_y": tg.half_width},
                                   cfg.hash)

    report = {"config_hash": cfg.hash, "alpha": alpha, "alpha_bar": alpha_bar,
              "lambda0": basis.lambda0, "regime": steady.regime, "mu": steady.mu,
              "eigenvalues": basis.eigenvalues.tolist(),
              "violations": traj.violations, "warnings": traj.warnings[:20],
              "steps": traj.meta["steps"], "verdicts": []}

    if theta is not None and settings.T > 0:
        trace = tracker.trace_from_diagnostics(traj)
        storage.trace_to_csv(trace, out / "front_trace.csv", cfg.hash)
        est = tracker.estimate_speed(trace, float(trk["window_fraction"]))
        report["speed_estimate"] = {
            "status": est.status, "c_hat": est.c_hat, "c_plus": est.c_plus,
            "c_minus": est.c_minus, "stderr": est.stderr, "window": est.window,
        }
        if steady.regime == "invasion":
            c_star = wavefront.critical_speed(basis.lambda0)
            report["c_star"] = c_star
            if est.status == "ok":
                ratio = est.c_hat / c_star
                report["verdicts"].append({
                    "criterion": "propagation-speed[8]",
                    "passed": bool(0.95 <= ratio <= 1.02),
                    "measured": {"ratio": ratio}})
    else:
        report["speed_estimate"] = {"status": "no data"}

    if steady.regime == "extinction" and settings.T > 0:
        t, sup = traj.diag["t"], traj.diag["sup_u"]
        sel = t >= 0.5 * t[-1]
        if sup[sel].min() > 0 and sel.sum() >= 3:
            slope = float(np.polyfit(t[sel], np.log(sup[sel]), 1)[0])
            target = basis.lambda0 - 1.0
            report["verdicts"].append({
                "criterion": "extinction[11]",
                "passed": bool(abs(-slope - target) <= 0.2 * target),
                "measured": {"decay_rate": -slope, "lambda0_minus_1": target}})

    report["timing_s"] = round(time.perf_counter() - t0, 3)
    storage.write_json(out / "run_report.json", report)
    print(f"regime: {report['regime']}; steps: {report['steps']}; "
          f"speed: {report['speed_estimate'].get('c_hat')}")
    return EXIT_OK


def cmd_speed(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    trace_path = out / "front_trace.csv"
    if not trace_path.exists():
        raise ConfigError(f"no front trace found at {trace_path}; run 'simulate' first")
    trace = storage.read_trace_csv(trace_path)
    if len(trace.times) < 2:
        report = {"config_hash": cfg.hash, "status": "no data"}
    else:
        trk = cfg.section("tracker")
        est = tracker.estimate_speed(trace, float(trk["window_fraction"]))
        report = {"config_hash": cfg.hash, "status": est.status, "c_hat": est.c_hat,
                  "c_plus": est.c_plus, "c_minus": est.c_minus,
                  "stderr": est.stderr, "residual": est.residual,
                  "window": est.window, "n_samples": est.n_samples,
                  "warnings": est.warnings}
    storage.write_json(out / "speed_estimate.json", report)
    print(f"speed estimate: {report.get('c_hat')} ({report['status']})")
    return EXIT_OK


def cmd_verify(args) -> int:
    out = _out_dir(args, None)
    results, report = verify.run_verification(args.filter, out_dir=out)
    print(f"\n{report['n_passed']}/{report['n_total']} criteria passed; "
          f"report in {out / 'verification_report.json'}")
    return EXIT_OK if report["all_passed"] else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frontlab",
                                 description="Numerical laboratory for trait-structured "
                                             "invasion fronts")
    ap.add_argument("--config", help="path to the JSON experiment configuration")
    ap.add_argument("--out", help="output directory (default: config output.dir)")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for sweeps (env FRONTLAB_THREADS)")
    ap.add_argument("--filter", default=None,
                    help="verify only criteria whose name contains this string")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "alpha-bar", "wave", "simulate", "speed", "verify"):
        sub.add_parser(name)
    return ap


_HANDLERS = {
    "spectrum": cmd_spectrum,
    "alpha-bar": cmd_alpha_bar,
    "wave": cmd_wave,
    "simulate": cmd_simulate,
    "speed": cmd_speed,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        return _emit_error(EXIT_CONFIG, str(exc))
    except (ValidationError, NumericsError) as exc:
        return _emit_error(EXIT_NUMERIC, str(exc))
    except FrontlabError as exc:
        return _emit_error(EXIT_NUMERIC, str(exc))


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
