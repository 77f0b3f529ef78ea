"""Euclidean systems: Kalman test and a reachable cloud written to CSV.

    python3 demos/euclidean_cloud.py [out.csv]
"""

import sys as _sys

from liectrl import ControlRange, CloudConfig, coverage, euclidean_check, euclidean_system, reach_cloud, write_cloud_csv

ROT = [[0, 1], [-1, 0]]


def main(out=None):
    print("rotation:", euclidean_check(ROT, [0, 1]))
    print("expanding:", euclidean_check([[2, 0], [0, 1]], [[1, 0], [0, 1]]))

    sys = euclidean_system(ROT, [0, 1], ControlRange.box([-0.4], [0.4]))
    cloud = reach_cloud(sys, CloudConfig(20, 5))
    print(f"{len(cloud)} points after 20 steps;",
          "coverage of [-1,1]^2 at 0.25:", coverage(cloud, ([-1, -1], [1, 1]), 0.25))
    if out:
        write_cloud_csv(cloud, out)
        print("wrote", out)


if __name__ == "__main__":
    main(_sys.argv[1] if len(_sys.argv) > 1 else None)
