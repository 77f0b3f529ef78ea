"""Acceptance criteria 1-8.

Every test prints one ``[PASS]``/``[FAIL]`` line (also collected in the
"acceptance" section of the pytest summary) and asserts the criterion's
tolerance and runtime bound.
"""

import numpy as np
from scipy.linalg import expm, logm
from scipy.stats import ortho_group

from liectrl.accessibility import (
    ad_chain,
    aff2_accessible,
    gamma_rank,
    regular_pair_rank,
    x_minus,
    x_plus,
)
from liectrl.controllability import classify, euclidean_check
from liectrl.groups import Heisenberg, bch
from liectrl.reach import CloudConfig, coverage, reach_cloud
from liectrl.spectral import differential_at_identity, eigensplit, invariance_residual
from liectrl.system import (
    ControlRange,
    aff2_system,
    controllable_set_finite,
    dedup_points,
    euclidean_system,
    heisenberg_example_system,
    is_subset,
    reachable_set_finite,
    reverse,
    same_set,
)

from conftest import heis_alg, heis_mat

U05 = ControlRange.box([-0.5], [0.5])


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def test_criterion_1_heisenberg_example(criterion):
    with criterion(1, "Heisenberg example", 5.0) as c:
        sys = heisenberg_example_system()
        ev = np.linalg.eigvals(differential_at_identity(sys.model, sys.aut))
        dev = float(np.max(np.abs(ev - 1.0)))
        c.check(dev <= 1e-9, f"max|lambda-1| = {dev:.1e} <= 1e-9")
        rep = gamma_rank(sys, sys.model.identity)
        c.check(rep.rank == 3, f"gamma_rank(e) = {rep.rank}/3")
        v = classify(sys)
        c.check((v.conclusion, v.theorem) == ("Controllable", "T4.3"), f"verdict = {v.conclusion} [{v.theorem}]")
    assert c.ok and c.elapsed < 5.0


def test_criterion_2_aff2_instance_and_falsifier(criterion):
    with criterion(2, "Aff2 instance + falsifier", 5.0) as c:
        sys = aff2_system(1.0, 1.0, [1, 1], [0], U05)
        p = sys.aff2
        c.check(aff2_accessible(p.a, p.d, p.hp0, p.gp0), "accessible")
        rp = regular_pair_rank(sys, sys.model.identity, [[0.0], [0.0]])
        c.check(rp.full, f"regular pair rank {rp.rank}/2")
        v = classify(sys)
        c.check((v.conclusion, v.theorem) == ("Controllable", "T3.9"), f"verdict = {v.conclusion} [{v.theorem}]")
        bad = aff2_system(0.0, 1.0, [1, 1], [0, 1], U05)
        q = bad.aff2
        c.check(not aff2_accessible(q.a, q.d, q.hp0, q.gp0), "falsifier not accessible")
        rng = np.random.default_rng(42)
        ranks = [gamma_rank(bad, [rng.uniform(0.3, 3.0), rng.normal()]).rank for _ in range(3)]
        c.check(max(ranks) < 2, f"falsifier gamma ranks {ranks}")
    assert c.ok and c.elapsed < 5.0


def zero_control_forms(a, d, hp, gp, x):
    """Hand-derived fields and chains on Aff2 with every control set to 0.

    Minus chains keep the first component -h'(0) x of X- itself: the chart
    Jacobians are lower triangular, so pulling back never changes it.
    """
    return {
        ("plus", 0): [hp * x, (x / d) * (-a * hp + gp)],
        ("minus", 0): [-hp * x, -gp * x],
        ("plus", 1): [hp * x, -(a * hp * x / d) * (1 / d + 1) + gp / d**2 * x],
        ("plus", 2): [hp * x, -(a * hp * x / d) * (1 / d**2 + 1 / d + 1) + gp / d**3 * x],
        ("minus", 1): [-hp * x, -a * hp * x - d * gp * x],
        ("minus", 2): [-hp * x, -a * hp * x - d * a * hp * x - d**2 * gp * x],
    }


def test_criterion_3_closed_forms(criterion):
    with criterion(3, "Aff2 closed forms", 30.0) as c:
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(50):
            a = rng.uniform(-2, 2)
            d = rng.choice([-1, 1]) * rng.uniform(0.3, 3.0)
            hp, gp = rng.uniform(-1, 1), rng.uniform(-1, 1)
            sys = aff2_system(a, d, [1.0, hp, rng.uniform(-0.3, 0.3)], [0.0, gp, rng.uniform(-0.5, 0.5)], U05)
            pt = np.array([rng.uniform(0.3, 3.0), rng.normal()])
            oracle = zero_control_forms(a, d, hp, gp, pt[0])
            zero = [0.0]
            got = {("plus", 0): x_plus(sys, zero, pt)[:, 0], ("minus", 0): x_minus(sys, zero, pt)[:, 0]}
            for direction in ("plus", "minus"):
                for k in (1, 2):
                    got[direction, k] = ad_chain(sys, direction, [np.zeros(1)] * k, zero, pt)[:, 0]
            worst = max(worst, max(rel_err(got[key], oracle[key]) for key in oracle))
        c.check(worst <= 1e-5, f"worst relative error {worst:.1e} <= 1e-5 over 50 x 6 forms")
    assert c.ok and c.elapsed < 30.0


def test_criterion_4_euclidean(criterion):
    with criterion(4, "Euclidean criterion", 60.0) as c:
        rng = np.random.default_rng(42)
        agree = 0
        for i in range(50):
            d = int(rng.choice([2, 3, 4]))
            A = ortho_group.rvs(d, random_state=rng)
            m = int(rng.integers(1, 3))
            B = rng.normal(size=(d, m))
            if i % 4 == 0:
                # rank-deficient input: B inside an A-invariant subspace
                A = np.eye(d)
                B = np.zeros((d, 1))
                B[0, 0] = 1.0
            K = np.hstack([np.linalg.matrix_power(A, j) @ B for j in range(d)])
            kalman_full = np.linalg.matrix_rank(K) == d
            agree += euclidean_check(A, B)["controllable"] == kalman_full
        c.check(agree == 50, f"controllable <=> Kalman rank d on {agree}/50")
        rot = euclidean_check([[0, 1], [-1, 0]], [0, 1])
        c.check(rot["controllable"], "rotation controllable")
        # U = [-0.4, 0.4]: the 5-point lattice then has spacing 0.2 < 0.25, so
        # every 0.25-cell can hold a lattice point
        sys = euclidean_system([[0, 1], [-1, 0]], [0, 1], ControlRange.box([-0.4], [0.4]))
        cov = coverage(reach_cloud(sys, CloudConfig(20, 5)), ([-1, -1], [1, 1]), 0.25)
        c.check(cov >= 0.95, f"coverage {cov:.4f} >= 0.95")
    assert c.ok and c.elapsed < 60.0


def finite_presets():
    F = ControlRange.finite
    return [
        euclidean_system([[1.0]], [1.0], F([-1.0, 0.0, 1.0]), name="euclidean(1)"),
        aff2_system(1.0, 1.0, [1, 1], [0], F([-0.25, 0.0, 0.25]), name="aff2"),
        heisenberg_example_system(F([-0.5, 0.0, 0.5])),
    ]


def set_algebra_failures(sys) -> list[str]:
    bad = []
    R = {k: reachable_set_finite(sys, k) for k in range(5)}
    for k in range(5):
        for t in range(k + 1):
            if not is_subset(R[t], R[k]):
                bad.append(f"R{t} in R{k}")
    g = sys.model.random_element(np.random.default_rng(42), scale=0.5)
    for k in range(5):
        rhs = dedup_points(sys.model.mul(R[k], sys.aut.power(g, k)))
        if not same_set(reachable_set_finite(sys, k, g), rhs):
            bad.append(f"R{k}(g)")
    for k1 in range(1, 4):
        for k2 in range(1, 5 - k1):
            prod = sys.model.mul(R[k1][:, None, :], sys.aut.power(R[k2], k1)[None, :, :])
            if not same_set(dedup_points(prod.reshape(-1, sys.dim)), R[k1 + k2]):
                bad.append(f"R{k1}+{k2}")
    rev = reverse(sys)
    for k in range(5):
        if not same_set(reachable_set_finite(rev, k), controllable_set_finite(sys, k)):
            bad.append(f"duality k={k}")
    return bad


def test_criterion_5_set_algebra(criterion):
    with criterion(5, "set algebra", 30.0) as c:
        for sys in finite_presets():
            bad = set_algebra_failures(sys)
            c.check(not bad, f"{sys.name}: {'ok' if not bad else ','.join(bad)}")
    assert c.ok and c.elapsed < 30.0


def test_criterion_6_bch(criterion):
    with criterion(6, "BCH oracle", 5.0) as c:
        m = Heisenberg()
        rng = np.random.default_rng(42)
        worst = worst_mat = 0.0
        for _ in range(100):
            X, Y = rng.normal(size=3), rng.normal(size=3)
            Z = bch(m, X, Y, 2)
            worst = max(worst, float(np.linalg.norm(m.log(m.mul(m.exp(X), m.exp(Y))) - Z)))
            # independent check through 3x3 matrices
            L = logm(expm(heis_alg(X)) @ expm(heis_alg(Y))).real
            worst_mat = max(worst_mat, float(np.linalg.norm(heis_alg(Z) - L)))
            worst_mat = max(worst_mat, float(np.linalg.norm(heis_mat(m.exp(X)) - expm(heis_alg(X)))))
        c.check(worst <= 1e-10, f"chart error {worst:.1e} <= 1e-10")
        c.check(worst_mat <= 1e-10, f"matrix error {worst_mat:.1e}")
        ex = bch(m, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 2)
        c.check(ex.tolist() == [0.5, 1.0, 1.0], f"bch(e2, e3) = {ex.tolist()}")
    assert c.ok and c.elapsed < 5.0


def test_criterion_7_spectral(criterion):
    with criterion(7, "spectral suite", 30.0) as c:
        rng = np.random.default_rng(42)
        worst, sums, swaps = 0.0, 0, 0
        for _ in range(200):
            d = int(rng.integers(2, 8))
            L = rng.normal(size=(d, d))
            while abs(np.linalg.det(L)) < 1e-3:
                L = rng.normal(size=(d, d))
            s = eigensplit(L)
            sums += sum(s.dims) == d
            worst = max(worst, *(invariance_residual(L, s.block(b)) for b in ("plus", "zero", "minus")))
            si = eigensplit(np.linalg.inv(L))
            swaps += si.dims == (s.dims[2], s.dims[1], s.dims[0])
        c.check(sums == 200, f"dims sum to d on {sums}/200")
        c.check(worst <= 1e-9, f"invariance residual {worst:.1e} <= 1e-9")
        c.check(swaps == 200, f"inverse swaps blocks on {swaps}/200")
    assert c.ok and c.elapsed < 30.0


def test_criterion_8_leaf_confinement(criterion):
    with criterion(8, "h = 1 confinement", 5.0) as c:
        sys = aff2_system(0.7, 1.4, [1.0], [0, 1, 0.3], ControlRange.box([-1], [1]))
        rng = np.random.default_rng(42)
        starts = [(1.0, 0.0)] + [(float(rng.uniform(0.1, 5)), float(rng.normal())) for _ in range(4)]
        total = 0
        for start in starts:
            P = reach_cloud(sys, CloudConfig(6, 5, start=start)).points
            total += len(P)
            c.check(np.all(P[:, 0] == start[0]), f"x={start[0]:.3g} bit-equal on {len(P)} points")
        c.check(total > 500, f"{total} points")
    assert c.ok and c.elapsed < 5.0
