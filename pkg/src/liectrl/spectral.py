"""Automorphisms, their differential at the identity, and the splitting of the
Lie algebra into unstable / center / stable generalized eigenspaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.optimize import least_squares

from .errors import ModelError, NumericalError, PreconditionError
from .groups import GroupModel

__all__ = [
    "AutomorphismModel",
    "SpectralSplit",
    "ClosureReport",
    "EquivarianceReport",
    "differential_at_identity",
    "eigensplit",
    "closure_check",
    "equivariance_check",
    "factor_center_unstable_stable",
    "TOL_ANALYTIC",
    "TOL_FINITE_DIFF",
]

TOL_ANALYTIC = 1e-9
TOL_FINITE_DIFF = 1e-6
FD_STEP = 1e-6

ChartMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AutomorphismModel:
    """A group automorphism ``f0`` given as chart functions.

    ``forward`` and ``inverse`` broadcast over leading axes. ``jacobian`` is
    the analytic matrix of the differential at ``e`` when known; otherwise it
    is estimated by finite differences. ``params`` records how the map was
    built so it can be serialized again.
    """

    forward: ChartMap
    inverse: ChartMap
    jacobian: np.ndarray | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, g):
        return self.forward(g)

    def inverted(self) -> "AutomorphismModel":
        jac = None if self.jacobian is None else np.linalg.inv(self.jacobian)
        return AutomorphismModel(self.inverse, self.forward, jac, kind=self.kind + "^-1", params=dict(self.params))

    def power(self, g, k: int):
        """Apply ``f0^k`` (negative ``k`` uses the inverse)."""
        fn = self.forward if k >= 0 else self.inverse
        g = np.asarray(g, dtype=float)
        for _ in range(abs(k)):
            g = fn(g)
        return g

    @classmethod
    def from_algebra_matrix(cls, model: GroupModel, L, check: bool = True) -> "AutomorphismModel":
        """The group automorphism ``exp o L o log`` induced by an algebra automorphism."""
        L = np.asarray(L, dtype=float)
        if L.shape != (model.dim, model.dim):
            raise ModelError(f"automorphism matrix must be {model.dim}x{model.dim}")
        if abs(np.linalg.det(L)) < 1e-12:
            raise ModelError("automorphism matrix is singular")
        if check:
            c = model.structure_constants
            # L[e_i, e_j] == [L e_i, L e_j]
            lhs = np.einsum("ijk,lk->ijl", c, L)
            rhs = np.einsum("ai,bj,abk->ijk", L, L, c)
            if np.max(np.abs(lhs - rhs), initial=0.0) > 1e-10 * max(1.0, np.abs(L).max()) ** 2:
                raise ModelError("matrix does not preserve the Lie bracket")
        Linv = np.linalg.inv(L)

        def forward(g):
            return model.exp(model.log(g) @ L.T)

        def inverse(g):
            return model.exp(model.log(g) @ Linv.T)

        return cls(forward, inverse, L.copy(), kind="algebra", params={"L": L.tolist()})

    @classmethod
    def aff2(cls, a: float, d: float) -> "AutomorphismModel":
        """``phi(x, y) = (x, a (x - 1) + d y)`` on Aff2."""
        a = float(a)
        d = float(d)
        if d == 0.0:
            raise ValueError("Aff2 automorphism needs d != 0")

        def forward(g):
            g = np.asarray(g, dtype=float)
            return np.stack([g[..., 0], a * (g[..., 0] - 1.0) + d * g[..., 1]], axis=-1)

        def inverse(g):
            g = np.asarray(g, dtype=float)
            return np.stack([g[..., 0], (-a / d) * (g[..., 0] - 1.0) + g[..., 1] / d], axis=-1)

        jac = np.array([[1.0, 0.0], [a, d]])
        return cls(forward, inverse, jac, kind="aff2", params={"a": a, "d": d})

    def check(self, model: GroupModel, rng: np.random.Generator | None = None, n: int = 50) -> None:
        """Raise ``ModelError`` unless ``f0`` fixes ``e``, is a homomorphism and is inverted correctly."""
        rng = np.random.default_rng(0) if rng is None else rng
        e = model.identity
        if model.distance(self.forward(e), e) > 1e-12:
            raise ModelError("automorphism does not fix the identity")
        g = model.random_element(rng, n, scale=0.7)
        h = model.random_element(rng, n, scale=0.7)
        lhs = self.forward(model.mul(g, h))
        rhs = model.mul(self.forward(g), self.forward(h))
        err = model.distance(lhs, rhs) / (1.0 + np.linalg.norm(lhs, axis=-1))
        if np.max(err) > 1e-10:
            raise ModelError(f"map is not a homomorphism (relative residual {np.max(err):.2e})")
        back = self.inverse(self.forward(g))
        if np.max(model.distance(back, g) / (1.0 + np.linalg.norm(g, axis=-1))) > 1e-10:
            raise ModelError("inverse does not undo the automorphism")


def _fd_differential(model: GroupModel, fn: ChartMap, step: float = FD_STEP) -> np.ndarray:
    n = model.dim
    cols = []
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        plus = model.log(fn(model.exp(ei)))
        minus = model.log(fn(model.exp(-ei)))
        cols.append((plus - minus) / (2.0 * step))
    return np.column_stack(cols)


def differential_at_identity(model: GroupModel, aut: AutomorphismModel, analytic: bool = True) -> np.ndarray:
    """Matrix of ``d(f0)_e`` in the algebra basis.

    Uses the analytic Jacobian when present (and ``analytic`` is true),
    otherwise central differences of ``log o f0 o exp`` at 0.
    """
    if analytic and aut.jacobian is not None:
        L = np.array(aut.jacobian, dtype=float)
    else:
        L = _fd_differential(model, aut.forward)
    if abs(np.linalg.det(L)) < 1e-12:
        raise ModelError("differential at the identity is singular: f0 is not an automorphism")
    return L


@dataclass(frozen=True)
class SpectralSplit:
    """Unstable / center / stable decomposition of an algebra automorphism.

    Bases are orthonormal real matrices whose columns span each block.
    """

    eigenvalues: np.ndarray
    basis_plus: np.ndarray
    basis_zero: np.ndarray
    basis_minus: np.ndarray
    tol: float
    boundary_warning: bool = False

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.basis_plus.shape[1], self.basis_zero.shape[1], self.basis_minus.shape[1])

    @property
    def dim(self) -> int:
        return self.basis_plus.shape[0]

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    @property
    def basis_center_unstable(self) -> np.ndarray:
        return _orth(np.hstack([self.basis_plus, self.basis_zero]))

    @property
    def basis_center_stable(self) -> np.ndarray:
        return _orth(np.hstack([self.basis_minus, self.basis_zero]))

    def block(self, name: str) -> np.ndarray:
        return {
            "plus": self.basis_plus,
            "zero": self.basis_zero,
            "minus": self.basis_minus,
            "plus_zero": self.basis_center_unstable,
            "minus_zero": self.basis_center_stable,
        }[name]

    @property
    def all_center(self) -> bool:
        """True when every eigenvalue has modulus one (within ``tol``)."""
        return self.dims[1] == self.dim


def _orth(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    q, r = np.linalg.qr(M)
    return q


def _classify(lam: complex, tol: float) -> int:
    mod = abs(lam)
    if mod > 1.0 + tol:
        return 1
    if mod < 1.0 - tol:
        return -1
    return 0


def eigensplit(L, tol: float = TOL_ANALYTIC) -> SpectralSplit:
    """Split R^n into the generalized eigenspaces of ``L`` grouped by |alpha| vs 1.

    Each block is obtained as the leading invariant subspace of an ordered
    real Schur form, so complex-conjugate pairs stay together and the bases
    come out real and orthonormal.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("eigensplit needs a square matrix")
    if not 0.0 < tol < 0.5:
        raise ValueError("tol must lie in (0, 0.5)")
    if abs(np.linalg.det(L)) < 1e-300 or np.linalg.matrix_rank(L) < L.shape[0]:
        raise ValueError("eigensplit needs an invertible matrix")
    n = L.shape[0]
    eigs = sla.eigvals(L)
    classes = np.array([_classify(lam, tol) for lam in eigs])
    dev = np.abs(np.abs(eigs) - 1.0)
    boundary = bool(np.any((dev > 1e-12) & (dev <= tol)))

    def chooser(target):
        # classify the reordered eigenvalue by its nearest original eigenvalue
        def pick(re, im):
            lam = complex(re, im)
            return classes[int(np.argmin(np.abs(eigs - lam)))] == target

        return pick

    bases = {}
    for target in (1, 0, -1):
        count = int(np.sum(classes == target))
        if count == 0:
            bases[target] = np.zeros((n, 0))
            continue
        if count == n:
            bases[target] = np.eye(n)
            continue
        _, Z, sdim = sla.schur(L, output="real", sort=chooser(target))
        if sdim != count:
            raise NumericalError(f"Schur reordering selected {sdim} eigenvalues, expected {count}")
        bases[target] = Z[:, :sdim]
    return SpectralSplit(
        eigenvalues=eigs,
        basis_plus=bases[1],
        basis_zero=bases[0],
        basis_minus=bases[-1],
        tol=tol,
        boundary_warning=boundary,
    )


def invariance_residual(L: np.ndarray, basis: np.ndarray) -> float:
    """How far ``L`` moves the span of ``basis`` out of itself."""
    if basis.shape[1] == 0:
        return 0.0
    image = L @ basis
    return float(np.linalg.norm(image - basis @ (basis.T @ image)))


def _bracket_escape(model: GroupModel, A: np.ndarray, B: np.ndarray, target: np.ndarray) -> float:
    """Largest component of [a, b] (a in span A, b in span B) outside span target."""
    if A.shape[1] == 0 or B.shape[1] == 0:
        return 0.0
    br = model.bracket(A.T[:, None, :], B.T[None, :, :]).reshape(-1, model.dim)
    if target.shape[1] == 0:
        resid = br
    else:
        resid = br - (br @ target) @ target.T
    return float(np.max(np.linalg.norm(resid, axis=-1)))


@dataclass(frozen=True)
class ClosureReport:
    residuals: dict
    tol: float

    @property
    def checks(self) -> dict:
        return {k: v <= self.tol for k, v in self.residuals.items()}

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def closure_check(model: GroupModel, split: SpectralSplit, tol: float = 1e-10) -> ClosureReport:
    """Report-only check that each block is a subalgebra and that the center
    block normalizes the unstable and stable blocks."""
    P, Z, M = split.basis_plus, split.basis_zero, split.basis_minus
    scale = max(1.0, float(np.max(np.abs(model.structure_constants), initial=0.0)))
    residuals = {
        "plus_subalgebra": _bracket_escape(model, P, P, P),
        "zero_subalgebra": _bracket_escape(model, Z, Z, Z),
        "minus_subalgebra": _bracket_escape(model, M, M, M),
        "plus_zero_in_plus": _bracket_escape(model, P, Z, P),
        "minus_zero_in_minus": _bracket_escape(model, M, Z, M),
        "plus_zero_subalgebra": _bracket_escape(
            model, split.basis_center_unstable, split.basis_center_unstable, split.basis_center_unstable
        ),
        "minus_zero_subalgebra": _bracket_escape(
            model, split.basis_center_stable, split.basis_center_stable, split.basis_center_stable
        ),
    }
    return ClosureReport(residuals, tol * scale)


@dataclass(frozen=True)
class EquivarianceReport:
    residuals: dict
    tol: float
    dpi: np.ndarray

    @property
    def ok(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())


def equivariance_check(
    model: GroupModel,
    aut: AutomorphismModel,
    pi: ChartMap,
    model2: GroupModel,
    aut2: AutomorphismModel,
    tol: float = 1e-9,
    split_tol: float = TOL_ANALYTIC,
    rng: np.random.Generator | None = None,
) -> EquivarianceReport:
    """Check that a surjective homomorphism intertwining two automorphisms
    carries each spectral block into the matching block of the target."""
    rng = np.random.default_rng(1) if rng is None else rng
    g = model.random_element(rng, 50, scale=0.7)
    lhs = pi(aut.forward(g))
    rhs = aut2.forward(pi(g))
    if np.max(model2.distance(lhs, rhs)) > 1e-10 * (1.0 + np.max(np.abs(lhs))):
        raise PreconditionError("pi o f0 != f0' o pi: the homomorphism does not intertwine the automorphisms")
    dpi = _fd_differential_between(model, model2, pi)
    s1 = eigensplit(differential_at_identity(model, aut), split_tol)
    s2 = eigensplit(differential_at_identity(model2, aut2), split_tol)
    residuals = {}
    for name in ("plus", "zero", "minus"):
        src = dpi @ s1.block(name)
        dst = s2.block(name)
        if src.shape[1] == 0:
            residuals[name] = 0.0
            continue
        proj = src - dst @ (dst.T @ src) if dst.shape[1] else src
        residuals[name] = float(np.max(np.linalg.norm(proj, axis=0)))
    return EquivarianceReport(residuals, tol, dpi)


def _fd_differential_between(m1: GroupModel, m2: GroupModel, fn: ChartMap, step: float = FD_STEP) -> np.ndarray:
    cols = []
    for i in range(m1.dim):
        ei = np.zeros(m1.dim)
        ei[i] = step
        plus = m2.log(fn(m1.exp(ei)))
        minus = m2.log(fn(m1.exp(-ei)))
        cols.append((plus - minus) / (2.0 * step))
    return np.column_stack(cols)


def factor_center_unstable_stable(model: GroupModel, split: SpectralSplit, g) -> tuple[np.ndarray, np.ndarray, float]:
    """Solve ``g = exp(X_pz) exp(X_m)`` with ``X_pz`` in the center-unstable
    block and ``X_m`` in the stable block.

    Returns ``(X_pz, X_m, residual)``; the residual is the chart distance of
    the reconstructed product from ``g``.
    """
    g = model.check_group(g)
    Q1 = split.basis_center_unstable
    Q2 = split.basis_minus
    k1 = Q1.shape[1]

    def resid(c):
        X1 = Q1 @ c[:k1]
        X2 = Q2 @ c[k1:]
        return model.mul(model.exp(X1), model.exp(X2)) - g

    x0 = np.linalg.lstsq(np.hstack([Q1, Q2]), model.log(g), rcond=None)[0]
    sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    X1 = Q1 @ sol.x[:k1]
    X2 = Q2 @ sol.x[k1:]
    r = float(np.linalg.norm(resid(sol.x)))
    return X1, X2, r

