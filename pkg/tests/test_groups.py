import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm

from liectrl.errors import DomainError, ModelError
from liectrl.groups import (
    MAX_BCH_ORDER,
    Aff2,
    Euclidean,
    Heisenberg,
    NilpotentStructConst,
    bch,
    bch_term,
    derived_series,
    dynkin_term,
    jacobi_residual,
    lower_central_series,
)

from conftest import heis_alg, heis_mat

# ---------------------------------------------------------------------------
# matrix oracles: faithful matrix representations of the chart models


def aff_mat(g):
    x, y = g
    return np.array([[x, 0.0], [y, 1.0]])


def aff_alg(X):
    a, b = X
    return np.array([[a, 0.0], [b, 0.0]])


def upper_basis(n):
    """Strictly upper-triangular n x n matrix units, ordered by superdiagonal."""
    basis = []
    for k in range(1, n):
        for i in range(n - k):
            E = np.zeros((n, n))
            E[i, i + k] = 1.0
            basis.append(E)
    return basis


def struct_consts(basis):
    n = len(basis)
    flat = np.array([b.ravel() for b in basis]).T
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            comm = basis[i] @ basis[j] - basis[j] @ basis[i]
            c[i, j] = np.linalg.lstsq(flat, comm.ravel(), rcond=None)[0]
    return c


def to_mat(basis, X):
    return sum(x * b for x, b in zip(X, basis))


def from_mat(basis, M):
    flat = np.array([b.ravel() for b in basis]).T
    return np.linalg.lstsq(flat, M.ravel(), rcond=None)[0]


N5 = upper_basis(5)  # step-4 nilpotent algebra of dim 10
C5 = struct_consts(N5)

MODELS = [Euclidean(3), Aff2(), Heisenberg(), NilpotentStructConst(C5)]


# ---------------------------------------------------------------------------


def test_heisenberg_product_matches_matrices():
    rng = np.random.default_rng(0)
    m = Heisenberg()
    for _ in range(50):
        g, h = rng.normal(size=(2, 3))
        np.testing.assert_allclose(heis_mat(m.mul(g, h)), heis_mat(g) @ heis_mat(h), atol=1e-12)


def test_heisenberg_exp_log_match_matrix_exp():
    rng = np.random.default_rng(1)
    m = Heisenberg()
    for _ in range(50):
        X = rng.normal(size=3)
        np.testing.assert_allclose(heis_mat(m.exp(X)), expm(heis_alg(X)), atol=1e-12)
        g = rng.normal(size=3)
        np.testing.assert_allclose(heis_alg(m.log(g)), np.real(logm(heis_mat(g))), atol=1e-9)


def test_heisenberg_bracket_is_commutator():
    m = Heisenberg()
    rng = np.random.default_rng(2)
    X, Y = rng.normal(size=(2, 3))
    comm = heis_alg(X) @ heis_alg(Y) - heis_alg(Y) @ heis_alg(X)
    np.testing.assert_allclose(heis_alg(m.bracket(X, Y)), comm, atol=1e-14)


def test_aff2_against_matrices():
    rng = np.random.default_rng(3)
    m = Aff2()
    for _ in range(50):
        g = np.array([rng.uniform(0.1, 3.0), rng.normal()])
        h = np.array([rng.uniform(0.1, 3.0), rng.normal()])
        np.testing.assert_allclose(aff_mat(m.mul(g, h)), aff_mat(g) @ aff_mat(h), atol=1e-12)
        np.testing.assert_allclose(aff_mat(m.inv(g)), np.linalg.inv(aff_mat(g)), atol=1e-10)
        X = rng.normal(size=2)
        np.testing.assert_allclose(aff_mat(m.exp(X)), expm(aff_alg(X)), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(aff_alg(m.log(g)), np.real(logm(aff_mat(g))), atol=1e-9)
        Y = rng.normal(size=2)
        comm = aff_alg(X) @ aff_alg(Y) - aff_alg(Y) @ aff_alg(X)
        np.testing.assert_allclose(aff_alg(m.bracket(X, Y)), comm, atol=1e-14)


def test_aff2_small_alpha_branch_is_continuous():
    m = Aff2()
    for a in [0.0, 1e-9, -1e-9, 5e-7, -5e-7, 2e-6]:
        X = np.array([a, 1.3])
        np.testing.assert_allclose(aff_mat(m.exp(X)), expm(aff_alg(X)), rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(m.log(m.exp(X)), X, rtol=1e-12, atol=1e-15)


def test_aff2_rejects_nonpositive_x():
    m = Aff2()
    with pytest.raises(DomainError):
        m.mul([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        m.log([-1.0, 0.0])


def test_dimension_and_finiteness_checks():
    m = Heisenberg()
    with pytest.raises(DomainError):
        m.mul([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        m.exp([np.nan, 0.0, 0.0])


def test_identity_and_inverse_examples():
    m = Heisenberg()
    g = np.array([0.3, -1.2, 2.0])
    np.testing.assert_allclose(m.mul(g, m.inv(g)), m.identity, atol=1e-15)
    np.testing.assert_allclose(m.inv(g), [-0.3 + (-1.2) * 2.0, 1.2, -2.0])
    np.testing.assert_array_equal(Aff2().identity, [1.0, 0.0])


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_broadcasting_over_leading_axes(m):
    rng = np.random.default_rng(4)
    G = m.random_element(rng, (4, 5), scale=0.4)
    H = m.random_element(rng, (5,), scale=0.4)
    out = m.mul(G, H)
    assert out.shape == (4, 5, m.dim)
    np.testing.assert_allclose(out[2, 3], m.mul(G[2, 3], H[3]), atol=1e-12)


element = st.lists(st.floats(-1.5, 1.5, allow_nan=False), min_size=30, max_size=30)


@pytest.mark.parametrize("m", MODELS, ids=repr)
@settings(max_examples=40, deadline=None)
@given(raw=element)
def test_group_axioms(m, raw):
    v = np.array(raw[: 3 * m.dim]).reshape(3, m.dim)  # every model has dim <= 10
    g, h, k = m.exp(v[0]), m.exp(v[1]), m.exp(v[2])
    e = m.identity
    scale = 1.0 + np.abs(m.mul(m.mul(g, h), k)).max()
    assert m.distance(m.mul(m.mul(g, h), k), m.mul(g, m.mul(h, k))) <= 1e-11 * scale
    assert m.distance(m.mul(g, m.inv(g)), e) <= 1e-11 * (1 + np.abs(g).max() ** 2)
    assert m.distance(m.mul(e, g), g) <= 1e-14 * (1 + np.abs(g).max())
    assert m.distance(m.log(m.exp(v[0])), v[0]) <= 1e-10 * (1 + np.abs(v[0]).max())


# ---------------------------------------------------------------------------
# BCH


def test_bch_heisenberg_example():
    m = Heisenberg()
    out = bch(m, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 2)
    np.testing.assert_array_equal(out, [0.5, 1.0, 1.0])


def test_bch_order_one_is_sum():
    m = Heisenberg()
    np.testing.assert_array_equal(bch(m, [1.0, 2.0, 3.0], [0.5, 0.5, 0.5], 1), [1.5, 2.5, 3.5])


def test_bch_matches_matrix_log_on_step4_algebra():
    m = NilpotentStructConst(C5)
    assert m.nilpotency_step == 4
    rng = np.random.default_rng(5)
    for _ in range(30):
        X, Y = rng.normal(size=(2, m.dim))
        oracle = from_mat(N5, np.real(logm(expm(to_mat(N5, X)) @ expm(to_mat(N5, Y)))))
        np.testing.assert_allclose(bch(m, X, Y, 4), oracle, atol=1e-9)
        # orders above the step are clamped and stay exact
        np.testing.assert_allclose(bch(m, X, Y, 5), oracle, atol=1e-9)


def test_bch_small_arguments_on_aff2():
    # non-nilpotent: truncation error shrinks like |X|^(order+1)
    m = Aff2()
    rng = np.random.default_rng(6)
    X, Y = rng.normal(size=(2, 2))
    errs = []
    for t in [0.1, 0.05]:
        exact = m.log(m.mul(m.exp(t * X), m.exp(t * Y)))
        errs.append(np.linalg.norm(bch(m, t * X, t * Y, 4) - exact))
    assert errs[1] < errs[0] / 16


@pytest.mark.parametrize("n", [2, 3, 4])
def test_explicit_terms_equal_dynkin(n):
    m = NilpotentStructConst(C5)
    rng = np.random.default_rng(7 + n)
    X, Y = rng.normal(size=(2, m.dim))
    np.testing.assert_allclose(bch_term(m, X, Y, n), dynkin_term(m, X, Y, n), atol=1e-12)


def test_bch_argument_errors():
    m = Heisenberg()
    with pytest.raises(ValueError):
        bch(m, [0, 0, 0], [0, 0, 0], 0)
    with pytest.raises(ValueError):
        bch(m, [0, 0, 0], [0, 0, 0], 1.5)
    with pytest.raises(ValueError):
        bch(Aff2(), [0, 0], [0, 0], MAX_BCH_ORDER + 1)


def test_nilpotent_product_is_exact_bch():
    m = NilpotentStructConst(Heisenberg().structure_constants)
    h = Heisenberg()
    rng = np.random.default_rng(8)
    X, Y = rng.normal(size=(2, 3))
    np.testing.assert_allclose(m.mul(X, Y), h.log(h.mul(h.exp(X), h.exp(Y))), atol=1e-12)


# ---------------------------------------------------------------------------
# structure constants


def test_series_dimensions():
    c = Heisenberg().structure_constants
    assert [s.shape[1] for s in lower_central_series(c)] == [3, 1, 0]
    ca = Aff2().structure_constants
    assert [s.shape[1] for s in lower_central_series(ca)] == [2, 1, 1]
    assert [s.shape[1] for s in derived_series(ca)] == [2, 1, 0]
    assert Aff2().nilpotency_step is None
    assert Heisenberg().nilpotency_step == 2


def test_structure_constant_validation():
    c = np.zeros((2, 2, 2))
    c[0, 1, 1] = 1.0  # not antisymmetric
    with pytest.raises(ModelError):
        NilpotentStructConst(c)
    # antisymmetric but violating Jacobi: [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e1
    c = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 0)]:
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    assert jacobi_residual(c) > 0.5
    with pytest.raises(ModelError):
        NilpotentStructConst(c)


def test_non_nilpotent_and_too_deep_algebras_rejected():
    with pytest.raises(ModelError):
        NilpotentStructConst(Aff2().structure_constants)
    c7 = struct_consts(upper_basis(7))  # step 6
    with pytest.raises(ModelError):
        NilpotentStructConst(c7)
