#!/usr/bin/env python3
"""Measure the convergence order of the small-amplitude family: for each
(gamma, eps1) cell, solve at a ladder of eps values and print the sup-norm
gap between the converged surface trace and the initializer profile, with
log2 slopes between successive halvings.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ehdsolitary import BaseParams, NewtonConfig, init_small, make_grid, newton_solve
from ehdsolitary.cli import _auto_half_length


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=str,
                    default="-0.3:0,0:0,0.4:0,-0.3:0.5,0:0.5,0.4:0.5",
                    help="comma list of gamma:eps1 pairs")
    ap.add_argument("--eps-ladder", type=str, default="0.04,0.02,0.01,0.005")
    ap.add_argument("--n-points", type=int, default=1024)
    args = ap.parse_args()

    ladder = [float(v) for v in args.eps_ladder.split(",")]
    for cell in args.cells.split(","):
        gamma, eps1 = (float(v) for v in cell.split(":"))
        base = BaseParams(gamma, eps1)
        gaps = []
        for eps in ladder:
            g = make_grid(_auto_half_length(eps, eps1), args.n_points)
            t0, p = init_small(eps, base, g)
            sol = newton_solve(t0, p, g, NewtonConfig())
            gaps.append(np.max(np.abs(sol.t1 - t0)))
        gaps = np.array(gaps)
        slopes = np.log2(gaps[:-1] / gaps[1:])
        print(f"gamma={gamma:+.2f} eps1={eps1:.2f}  "
              f"gaps=[{', '.join(f'{v:.3e}' for v in gaps)}]  "
              f"slopes=[{', '.join(f'{v:.3f}' for v in slopes)}]")


if __name__ == "__main__":
    main()
