#!/usr/bin/env python3
"""Grid-refinement study: observed orders for the three discretizations.

Prints one table per study (radial FD Laplacian, Pohozaev identity on ball
minimizers, 2-D monotone iteration vs the exact 1-D connection) and writes
orders.csv into --out.
"""

import argparse
import os

import numpy as np

from elliptica import elliptic2d as e2
from elliptica import potential as pot
from elliptica import radial as rad


def study_radial_laplacian():
    n, p, lam = 3, 4.0, 1.0
    r = np.linspace(0.6, 3.0, 41)
    rows = []
    for h in (4e-2, 2e-2, 1e-2, 5e-3):
        v = rad.singular_power_solution(n, p, lam, r)
        vp = rad.singular_power_solution(n, p, lam, r + h)
        vm = rad.singular_power_solution(n, p, lam, r - h)
        lap = (vp - 2 * v + vm) / h ** 2 + (n - 1) / r * (vp - vm) / (2 * h)
        rows.append((h, float(np.max(np.abs(lap + lam * v ** p)))))
    return rows


def study_pohozaev():
    W = pot.truncate_potential(pot.double_well())
    rows = []
    for h in (0.1, 0.05, 0.025):
        prof, _ = e2.energy_minimize_ball(W, 10.0, 0.0, h, n=3)
        rows.append((h, abs(rad.pohozaev_residual(W, prof, 8.0).residual)))
    return rows


def study_monotone_2d():
    W = pot.truncate_potential(pot.double_well())
    exact = lambda x, y: -np.tanh(x / np.sqrt(2.0))
    rows = []
    for h in (0.08, 0.04, 0.02):
        g = e2.DomainGrid.box(((-8.0, 0.0), (-8.0, 0.0)), h)
        bnd = e2.Field.from_function(g, exact)
        u, _ = e2.monotone_iteration(W, e2.Field.full(g, W.a),
                                     e2.Field.full(g, W.b), tol=1e-10,
                                     boundary=bnd)
        err = float(np.max(np.abs(u.values - exact(*g.meshgrid()))[g.defined]))
        rows.append((h, err))
    return rows


def report(name, rows, fh):
    print(f"\n{name}")
    print(f"  {'h':>10} {'error':>12} {'order':>7}")
    prev = None
    for h, err in rows:
        order = "" if prev is None else f"{np.log2(prev / err):7.3f}"
        print(f"  {h:10.4g} {err:12.4e} {order:>7}")
        fh.write(f"{name},{h},{err}\n")
        prev = err


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "orders.csv")
    with open(path, "w") as fh:
        fh.write("study,h,error\n")
        report("radial-fd-laplacian", study_radial_laplacian(), fh)
        report("pohozaev-on-ball-minimizer", study_pohozaev(), fh)
        report("monotone-2d-vs-exact", study_monotone_2d(), fh)
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
