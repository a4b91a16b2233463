#!/usr/bin/env python3
"""Run the reference invasion experiment end to end.

Writes diagnostics, front trace, speed estimate, and the final field
into the output directory, then prints the measured speed against the
predicted minimal front speed.  At the default size this takes a few
minutes; pass --quick for a small sanity-scale run.
"""
import argparse
import json
import sys
from pathlib import Path

from frontlab.cli import main as cli_main

FULL = {
    "potential": {"kind": "quadratic", "a": 1.0},
    "kernel": {"kind": "constant", "k": 1.0},
    "alpha": 0.25,
    "grid": {"R_y": 10.0, "n_y": 241, "L_x": 200.0, "n_x": 2001},
    "time": {"T": 90.0, "dt": "auto", "snapshot_stride": 75},
    "initial": {"amplitude": 0.022, "r_x": 2.0, "r_y": 1.0},
    "tracker": {"theta": "auto", "window_fraction": 0.5},
}

QUICK = dict(FULL, grid={"R_y": 10.0, "n_y": 161, "L_x": 60.0, "n_x": 601},
             time={"T": 20.0, "dt": "auto", "snapshot_stride": 50})


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/invasion")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(QUICK if args.quick else FULL, indent=2))

    code = cli_main(["--config", str(cfg_path), "--out", str(out), "simulate"])
    if code != 0:
        sys.exit(code)
    report = json.loads((out / "run_report.json").read_text())
    est = report["speed_estimate"]
    print(f"\nlambda0 = {report['lambda0']:.6f}  c* = {report.get('c_star'):.6f}")
    print(f"measured front speed: {est.get('c_hat'):.6f} +- {est.get('stderr'):.2g}")
    for verdict in report["verdicts"]:
        print(f"verdict {verdict['criterion']}: {'PASS' if verdict['passed'] else 'FAIL'}")


if __name__ == "__main__":
    main()
