"""Heisenberg example: spectrum, accessibility, verdict and a reachable cloud.

    python3 demos/heisenberg_walkthrough.py
"""

import numpy as np

from liectrl import (
    CloudConfig,
    classify,
    coverage,
    differential_at_identity,
    eigensplit,
    gamma_rank,
    heisenberg_example_system,
    reach_cloud,
)


def main():
    sys = heisenberg_example_system()
    L = differential_at_identity(sys.model, sys.aut)
    split = eigensplit(L)
    print("df0 at e:\n", L)
    print("eigenvalues:", np.round(split.eigenvalues, 12), "dims (+/0/-):", split.dims)

    e = sys.model.identity
    print("gamma rank at e:", gamma_rank(sys, e).rank, "/", sys.dim)

    for line in classify(sys).lines():
        print(" ", line)

    # the cloud grows in every direction; a 5-point lattice is coarse, so
    # coverage of the unit box saturates well below 1
    for k in (4, 6, 8):
        cloud = reach_cloud(sys, CloudConfig(k, 5))
        cov = coverage(cloud, ([-1] * 3, [1] * 3), 0.5)
        print(f"k={k}: {len(cloud)} points, coverage of [-1,1]^3 at 0.5: {cov:.3f}")


if __name__ == "__main__":
    main()
