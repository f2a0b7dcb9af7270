#!/usr/bin/env python3
"""Solve the nonlocal transport equation from closed-form initial data and
report the L1 density error, mass error, and fitted mass-loss slope at a
target time, across grid resolutions."""

import argparse
import time

import numpy as np

from rootflow import densities, metrics, pde_solver


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", default="semicircle", choices=["semicircle", "mp"])
    parser.add_argument("--c", type=float, default=1.0)
    parser.add_argument("--T", type=float, default=1.0)
    parser.add_argument("--t-end", type=float, default=0.5)
    parser.add_argument(
        "--resolutions", type=int, nargs="+", default=[128, 256, 512]
    )
    args = parser.parse_args()

    if args.family == "semicircle":
        family = densities.Semicircle(vanish_time=args.T)
    else:
        family = densities.MarchenkoPastur(ratio=args.c)

    print(f"# {args.family} to t={args.t_end}")
    print("#   N   steps   L1 error    mass error   mass slope   seconds")
    for n_cells in args.resolutions:
        params = pde_solver.SolverParams(N=n_cells, K=min(128, n_cells // 2))
        initial = pde_solver.state_from_family(family, 0.0, params)
        start = time.perf_counter()
        traj = pde_solver.run(initial, args.t_end, params)
        elapsed = time.perf_counter() - start
        final = traj.final_state
        l1 = metrics.l1_density_error(final, family, args.t_end)
        mass_err = abs(
            pde_solver.total_mass(final) - (family.mass(0.0) - args.t_end)
        )
        slope = float(np.polyfit(traj.mass_times, traj.masses, 1)[0])
        print(
            f"{n_cells:5d}  {traj.steps:6d}  {l1:.3e}   {mass_err:.3e}    "
            f"{slope:+.4f}     {elapsed:.2f}"
        )


if __name__ == "__main__":
    main()
