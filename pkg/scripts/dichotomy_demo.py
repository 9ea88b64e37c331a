#!/usr/bin/env python3
"""Small-scale demonstration of the wave-operator dichotomy (runs in ~2 min).

For a slowly decaying potential tail (gamma <= 1) the plain wave-operator
approximants refuse to settle: the Cauchy defect ||W(t) phi - W(2t) phi||
stays flat in t.  The trajectory-corrected (Dollard) approximants do settle.
For a short-range tail (gamma > 1) both settle.  This script measures all
three behaviors on a reduced grid and prints a comparison table.

Full desk-scale parameters live in scripts/configs/ and the acceptance suite.
"""

import argparse
import sys

from fracscatter import PhysicsParams, build_wavepacket, make_grid
from fracscatter.experiments import defect_pair_series
from fracscatter.grid import set_fft_workers
from fracscatter.propagate import geometric_schedule


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--threads", type=int, default=2)
    parser.add_argument("--rho", type=float, default=0.75)
    args = parser.parse_args()
    set_fft_workers(args.threads)

    grid = make_grid(1, 2**14, 190.0)
    schedule = geometric_schedule(0.05, 10.0, 2**0.5, 90.0)
    pair_lows = schedule.diagnostic_times[2 * schedule.diagnostic_times <= 90.0]
    print(f"grid: N=2^14, L=190; defect pairs (t, 2t) for t in "
          f"{pair_lows[0]:g}..{pair_lows[-1]:g}", flush=True)

    header = f"{'gamma':>6} {'plain slope':>12} {'modified slope':>15} {'plain(last)':>12} {'mod(last)':>10}"
    print(header)
    print("-" * len(header))
    for gamma in (0.5, 1.0, 2.0):
        params = PhysicsParams(rho=args.rho, gamma=gamma, lam=1.0, epsilon=0.5)
        phi = build_wavepacket(grid, params, 1.0, 0.1)
        plain = defect_pair_series(phi, schedule, params, modified=False)
        corrected = defect_pair_series(phi, schedule, params, modified=True)
        print(f"{gamma:6.1f} {plain.fitted_slope:12.3f} {corrected.fitted_slope:15.3f} "
              f"{plain.values[-1]:12.4f} {corrected.values[-1]:10.4f}", flush=True)

    print("\nflat plain defect at gamma <= 1 signals nonexistence of the plain")
    print("wave operators; the corrected column decays in every case that the")
    print("first-order trajectory phase can control (see README).")
    return 0


if __name__ == "__main__":
    sys.exit(main())
