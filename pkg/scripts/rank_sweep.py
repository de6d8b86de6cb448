#!/usr/bin/env python3
"""Numerical rank of the extended Hankel matrix versus depth L and noise level."""
import argparse

import numpy as np

from ddpredict import NoiseSpec, simulate_trajectory
from ddpredict.experiment import example_system
from ddpredict.hankel import check_identifiability, extended_hankel


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--length", type=int, default=68)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    params, basis = example_system()
    u = np.random.default_rng(args.seed).standard_normal(args.length)
    print(f"{'mu':>6} {'L':>3} {'rows':>5} {'rank':>5} {'expected':>9} {'sigma_min/sigma_max':>20}")
    for mu in (0.0, 1e-6, 1e-3, 0.1):
        traj = simulate_trajectory(params, basis, [1.0, 1.0], u, NoiseSpec(mu, args.seed + 1) if mu else None)
        for l in range(3, 7):
            r = check_identifiability(traj, l, basis, params.ell)
            sv = np.linalg.svd(extended_hankel(traj, l, basis, params.ell), compute_uv=False)
            print(f"{mu:>6g} {l:>3} {r.rows:>5} {r.observed_rank:>5} {r.expected_rank:>9} "
                  f"{sv[-1] / sv[0]:>20.2e}")


if __name__ == "__main__":
    main()
