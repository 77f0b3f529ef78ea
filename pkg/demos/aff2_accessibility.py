"""Aff(2) systems: the parameter criterion versus numerical rank tests.

Sweeps g'(0) through the degenerate value -a h'(0) / (d - 1) and shows the
three tests switching together.

    python3 demos/aff2_accessibility.py
"""

import numpy as np

from liectrl import ControlRange, aff2_accessible, aff2_system, classify, gamma_rank, regular_pair_rank

U = ControlRange.box([-0.5], [0.5])


def main():
    a, d, hp = 1.0, 2.0, 1.0
    critical = -a * hp / (d - 1)
    print(f"a={a} d={d} h'(0)={hp}: degenerate at g'(0) = {critical}")
    for gp in (critical - 0.5, critical, critical + 0.5):
        sys = aff2_system(a, d, [1, hp], [0, gp], U)
        crit = aff2_accessible(a, d, hp, gp)
        pair = regular_pair_rank(sys, sys.model.identity, np.zeros((2, 1)))
        gam = gamma_rank(sys, [1.3, 0.2])
        print(f"  g'(0)={gp:+.2f}  criterion={crit}  pair rank={pair.rank}  gamma rank={gam.rank}")

    print("\nd = 1 turns accessibility into controllability:")
    for d in (1.0, 2.0):
        v = classify(aff2_system(1.0, d, [1, 1], [0], U))
        print(f"  d={d}: {v.conclusion} [{v.theorem}]")

    flat = aff2_system(1.0, 1.0, [1.0], [0, 1], U)  # h == 1
    print("\nh == 1: gamma rank", gamma_rank(flat, [2.0, 0.0]).rank, "- orbits stay on x = const")


if __name__ == "__main__":
    main()
