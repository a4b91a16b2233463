#!/usr/bin/env python3
"""Sweep the genetic-pressure intensity and the truncation radius.

Emits two plot-ready CSVs: lambda0 (and the next few eigenvalues) as a
function of alpha, and lambda0 as a function of the truncation radius,
for a chosen trait fitness cost.
"""
import argparse
from pathlib import Path

import numpy as np

import frontlab as fl
from frontlab import storage


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/spectrum")
    ap.add_argument("--potential", default="quadratic",
                    choices=["quadratic", "quartic", "abs"])
    ap.add_argument("--alphas", type=float, nargs="*",
                    default=list(np.round(np.geomspace(0.05, 5.0, 21), 6)))
    ap.add_argument("--n-modes", type=int, default=4)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pot = fl.PotentialSpec(args.potential)
    grid = fl.TraitGrid(10.0, 2001)

    rows = []
    for alpha in args.alphas:
        basis = fl.eigenpairs(fl.assemble_operator(grid, pot, alpha), args.n_modes)
        rows.append([alpha, *basis.eigenvalues])
    rows = np.asarray(rows)
    header = "alpha," + ",".join(f"lambda_{i}" for i in range(args.n_modes))
    storage.write_csv(out / "lambda_vs_alpha.csv", header,
                      [rows[:, j] for j in range(rows.shape[1])])

    ab = fl.find_alpha_bar(pot, grid, tol=1e-5)
    print(f"critical intensity for {args.potential}: alpha_bar = {ab:.6f}")

    pairs = fl.truncation_study(pot, 1.0, (3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0))
    storage.write_csv(out / "lambda0_vs_radius.csv", "R,lambda0",
                      [np.array([p[0] for p in pairs]),
                       np.array([p[1] for p in pairs])])
    print(f"wrote {out / 'lambda_vs_alpha.csv'} and {out / 'lambda0_vs_radius.csv'}")


if __name__ == "__main__":
    main()
