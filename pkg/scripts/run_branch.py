#!/usr/bin/env python3
"""Follow the solitary branch for one parameter pair and persist everything:
branch records, solution sidecars, plot columns, and the stop classification.

Example:
    python scripts/run_branch.py --gamma 0 --eps1 0.5 --out results/branch0
"""
import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ehdsolitary import BaseParams, ContinuationConfig, NewtonConfig, classify_stop, continue_branch, make_grid
from ehdsolitary.cli import _auto_half_length
from ehdsolitary.io import save_branch, write_plot_columns


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=0.0)
    ap.add_argument("--eps1", type=float, default=0.5)
    ap.add_argument("--eps-start", type=float, default=1e-3)
    ap.add_argument("--max-points", type=int, default=500)
    ap.add_argument("--n-points", type=int, default=1024)
    ap.add_argument("--tol", type=float, default=1e-11)
    ap.add_argument("--out", type=str, default="branch_out")
    args = ap.parse_args()

    base = BaseParams(args.gamma, args.eps1)
    g = make_grid(_auto_half_length(args.eps_start, args.eps1), args.n_points)
    cfg = ContinuationConfig(eps_start=args.eps_start,
                             max_points=args.max_points,
                             newton=NewtonConfig(tol=args.tol))
    run_config = vars(args) | {"half_length": g.half_length}

    t0 = time.time()
    branch = continue_branch(base, g, cfg)
    elapsed = time.time() - t0

    pts = branch.points
    print(f"{len(pts)} accepted points in {elapsed:.1f} s")
    print(f"stop: {branch.stop_reason}  {branch.note}")
    rep = classify_stop(branch, base.with_alpha(pts[-1].alpha))
    print(f"classification [{rep.gamma_case}]: {rep.explanation}")
    last = pts[-1]
    print(f"endpoint: alpha={last.alpha:.6f} amplitude={last.amplitude:.6f} "
          f"m1={last.monitor_m1:.4f} m2={last.monitor_m2:.4f} "
          f"m3={last.monitor_m3:.4f} F={last.froude:.4f}")

    out = Path(args.out)
    save_branch(out / "branch.jsonl", branch, run_config)
    write_plot_columns(out / "branch_amplitude.dat",
                       [[p.alpha for p in pts], [p.amplitude for p in pts]],
                       ["alpha", "amplitude"], run_config)
    write_plot_columns(out / "branch_monitors.dat",
                       [[p.s for p in pts], [p.monitor_m1 for p in pts],
                        [p.monitor_m2 for p in pts], [p.monitor_m3 for p in pts],
                        [p.froude for p in pts]],
                       ["s", "m1", "m2", "m3", "froude"], run_config)
    print(f"wrote {out / 'branch.jsonl'} (+ sidecars, plot columns)")


if __name__ == "__main__":
    main()
