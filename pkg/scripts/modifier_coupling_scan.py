#!/usr/bin/env python3
"""Scan the modifier self-overlap |(M(t) phi, phi)| against the coupling.

The overlap decays once the accumulated phase decorrelates across the
packet's frequency band.  For a tail exponent of 1 the phase grows like
lam * log t, so the decay onset moves exponentially with 1/lam: at lam = 1
nothing visible happens by t = 800, at lam = 25 the overlap collapses by
t ~ 20.  The multiplier is diagonal, so arbitrary times cost nothing; the
last column evaluates t = 1e23 to show the lam = 1 overlap does go down.

Runs in a few seconds.
"""

import argparse
import sys

import numpy as np

from fracscatter import PhysicsParams, build_wavepacket, make_grid
from fracscatter.diagnostics import modifier_overlap
from fracscatter.grid import set_fft_workers


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rho", type=float, default=0.75)
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--threads", type=int, default=2)
    args = parser.parse_args()
    set_fft_workers(args.threads)

    grid = make_grid(1, 2**15, 1500.0)
    times = [10.0, 50.0, 200.0, 800.0, 1e23]
    couplings = [0.5, 1.0, 5.0, 25.0]

    header = f"{'lam':>6} | " + " ".join(f"{f't={t:g}':>12}" for t in times)
    print(header)
    print("-" * len(header))
    for lam in couplings:
        params = PhysicsParams(rho=args.rho, gamma=args.gamma, lam=lam, epsilon=0.5)
        phi = build_wavepacket(grid, params, 1.0, 0.1)
        row = [abs(modifier_overlap(phi, phi, t, params)) for t in times]
        print(f"{lam:6.1f} | " + " ".join(f"{v:12.3e}" for v in row))

    print("\noverlap stays near 1 until lam * (log-grown phase) spreads a few")
    print("radians across the packet band, then collapses; the rho = 1/2 case")
    print("(not shown) would stay at exactly 1 forever.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
