#!/usr/bin/env python3
"""Sample the reduced planar dynamics: orbits launched from (Q0, 0) for a
list of launch heights, written as two-column files for gnuplot.

Example:
    python scripts/phase_portrait.py --out results/portrait
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ehdsolitary import OdeParams, phase_portrait
from ehdsolitary.io import write_plot_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=0.0)
    ap.add_argument("--eps1", type=float, default=0.0)
    ap.add_argument("--q0-list", type=str, default="0.5,1,1.5,2,2.5,3,3.5,4")
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--x-max", type=float, default=20.0)
    ap.add_argument("--out", type=str, default="portrait_out")
    args = ap.parse_args()

    launches = [float(v) for v in args.q0_list.split(",")]
    p = OdeParams(args.gamma, args.eps1)
    print(f"separatrix crest q0 = {p.q0:.6g}, quadratic coefficient = {p.c2:.6g}")
    orbits = phase_portrait(p, launches, dt=args.dt, x_max=args.x_max)

    out = Path(args.out)
    run_config = vars(args)
    for i, (q0, orb) in enumerate(zip(launches, orbits)):
        write_plot_columns(out / f"orbit_{i:02d}.dat", [orb.q, orb.p],
                           ["Q", "P"], run_config | {"q0": q0})
        print(f"Q0={q0:<5} drift={orb.energy_drift:.2e}"
              f"{'  escaped' if orb.escaped else ''}")
    print(f"wrote {len(orbits)} orbit files to {out}")


if __name__ == "__main__":
    main()
