"""Accessibility tests: control vector fields, their adjoint chains, the
rank of the transported fields, and regular pairs of the solution map.

All derivatives are central finite differences in chart coordinates. A
full-rank result is trustworthy up to finite-difference noise; a rank
deficiency is only heuristic because finitely many chains and controls are
sampled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, PreconditionError
from .system import Aff2Params, LinearSystem

__all__ = [
    "RankReport",
    "numerical_rank",
    "x_plus",
    "x_minus",
    "ad_chain",
    "chain_controls",
    "gamma_vectors",
    "gamma_rank",
    "regular_pair_rank",
    "solution_jacobian",
    "aff2_accessible",
    "aff2_x_plus",
    "aff2_x_minus",
    "aff2_ad_chain",
    "FIELD_STEP",
    "JAC_STEP",
    "RANK_TOL",
]

FIELD_STEP = 1e-5
JAC_STEP = 1e-6
RANK_TOL = 1e-7


@dataclass(frozen=True)
class RankReport:
    rank: int
    dim: int
    singular_values: list
    vectors_used: int
    tol: float
    matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def accessible(self) -> bool:
        return self.rank == self.dim

    @property
    def full(self) -> bool:
        return self.rank == self.dim

    @property
    def heuristic_negative(self) -> bool:
        """Set when rank is deficient; sampled chains cannot prove a negative."""
        return self.rank < self.dim


def numerical_rank(vectors, dim: int, tol: float = RANK_TOL) -> RankReport:
    """Rank of a stack of vectors (rows) with the threshold ``tol * sigma_max``."""
    V = np.asarray(vectors, dtype=float).reshape(-1, dim)
    if V.shape[0] == 0:
        return RankReport(0, dim, [], 0, tol, V)
    V = V[np.lexsort(V.T[::-1])]
    s = np.linalg.svd(V, compute_uv=False)
    smax = s[0] if s.size else 0.0
    rank = 0 if smax == 0.0 else int(np.sum(s > tol * smax))
    return RankReport(rank, dim, s.tolist(), V.shape[0], tol, V)


def _require_interior(sys: LinearSystem, u, margin: float) -> np.ndarray:
    if not sys.range.is_box:
        raise PreconditionError("vector fields need a box control range (finite sets have no interior)")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (sys.channels,):
        raise PreconditionError(f"control must have {sys.channels} channels")
    if not sys.range.is_interior(u, margin):
        raise PreconditionError(f"control {u.tolist()} is not strictly inside the control box")
    return u


def _field(sys: LinearSystem, u, x, minus: bool, h: float = FIELD_STEP) -> np.ndarray:
    u = _require_interior(sys, u, h)
    x = sys.model.check_group(x)
    cols = []
    for j in range(sys.channels):
        dv = np.zeros(sys.channels)
        dv[j] = h
        if minus:
            hi = sys.f(u, sys.f_inv(u + dv, x))
            lo = sys.f(u, sys.f_inv(u - dv, x))
        else:
            hi = sys.f_inv(u, sys.f(u + dv, x))
            lo = sys.f_inv(u, sys.f(u - dv, x))
        cols.append((hi - lo) / (2.0 * h))
    return np.column_stack(cols)


def x_plus(sys: LinearSystem, u, x) -> np.ndarray:
    """``X+_u(x) = d/dv f_u^{-1} o f_{u+v}(x)`` at ``v = 0``; one column per control channel."""
    return _field(sys, u, x, minus=False)


def x_minus(sys: LinearSystem, u, x) -> np.ndarray:
    """``X-_u(x) = d/dv f_u o f_{u+v}^{-1}(x)`` at ``v = 0``; one column per control channel."""
    return _field(sys, u, x, minus=True)


def _compose(sys: LinearSystem, controls, x, minus: bool):
    for u in controls:
        x = sys.f_inv(u, x) if minus else sys.f(u, x)
    return x


def _chart_jacobian(fn, x: np.ndarray, h: float = JAC_STEP) -> np.ndarray:
    n = x.shape[-1]
    cols = []
    for i in range(n):
        dx = np.zeros(n)
        dx[i] = h
        cols.append((fn(x + dx) - fn(x - dx)) / (2.0 * h))
    return np.column_stack(cols)


def ad_chain(sys: LinearSystem, direction: str, outer_controls, u0, x) -> np.ndarray:
    """Pull the field at ``u0`` back through the composition of the outer steps.

    For ``direction="plus"`` with outer controls ``u1, ..., uk`` this is
    ``(dF_x)^{-1} X+_{u0}(F(x))`` with ``F = f_{uk} o ... o f_{u1}``; the
    ``"minus"`` variant uses inverse steps and ``X-``.
    """
    if direction not in ("plus", "minus"):
        raise ValueError("direction must be 'plus' or 'minus'")
    minus = direction == "minus"
    x = sys.model.check_group(x)
    outer = [_require_interior(sys, u, JAC_STEP) for u in outer_controls]
    field_fn = x_minus if minus else x_plus
    if not outer:
        return field_fn(sys, u0, x)
    Fx = _compose(sys, outer, x, minus)
    J = _chart_jacobian(lambda p: _compose(sys, outer, p, minus), x)
    if abs(np.linalg.det(J)) < 1e-10:
        raise NumericalError("Jacobian of the step composition is singular")
    return np.linalg.solve(J, field_fn(sys, u0, Fx))


def chain_controls(sys: LinearSystem, depth: int, samples: int, seed: int = 42) -> list[tuple[list, np.ndarray]]:
    """Deterministic list of ``(outer_controls, u0)`` pairs for chain lengths 0..depth.

    Controls come from the lattice ``{0, +-rho/2}`` per channel plus
    ``samples`` seeded interior points; every length includes the all-zero chain.
    """
    rho = sys.range.radius
    m = sys.channels
    axes = [np.array([0.0, -r / 2.0, r / 2.0]) for r in rho]
    pool = [np.array(p) for p in itertools.product(*axes)]
    rng = np.random.default_rng(seed)
    pool += [rng.uniform(-0.9 * rho, 0.9 * rho) for _ in range(samples)]
    zero = np.zeros(m)
    chains = []
    for k in range(depth + 1):
        chains.append(([zero] * k, zero))
        for u0 in pool[1:]:
            chains.append(([zero] * k, u0))
        if k > 0:
            for _ in range(samples):
                idx = rng.integers(0, len(pool), size=k + 1)
                chains.append(([pool[i] for i in idx[1:]], pool[idx[0]]))
    return chains


def gamma_vectors(
    sys: LinearSystem, x, depth: int = 3, samples: int = 4, direction: str = "plus", seed: int = 42
) -> np.ndarray:
    """Stack of all sampled adjoint-chain vectors at ``x`` (one row each)."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    rows = []
    for outer, u0 in chain_controls(sys, depth, samples, seed):
        rows.append(ad_chain(sys, direction, outer, u0, x).T)
    return np.vstack(rows)


def gamma_rank(
    sys: LinearSystem,
    x,
    depth: int = 3,
    samples: int = 4,
    tol: float = RANK_TOL,
    direction: str = "plus",
    seed: int = 42,
) -> RankReport:
    """Numerical dimension of the span of transported control fields at ``x``.

    Full rank at every point means forward (``"plus"``) or backward
    (``"minus"``) accessibility.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    return numerical_rank(gamma_vectors(sys, x, depth, samples, direction, seed), sys.dim, tol)


def solution_jacobian(sys: LinearSystem, g, useq, h: float = JAC_STEP) -> np.ndarray:
    """Derivative of ``(u_0, ..., u_{k-1}) -> phi(k, g, u)``; columns ordered by step then channel."""
    useq = np.atleast_2d(np.asarray(useq, dtype=float))
    if useq.shape[1] != sys.channels:
        useq = useq.reshape(-1, sys.channels)
    for u in useq:
        _require_interior(sys, u, h)
    g = sys.model.check_group(g)
    cols = []
    for j in range(useq.shape[0]):
        for c in range(sys.channels):
            up = useq.copy()
            dn = useq.copy()
            up[j, c] += h
            dn[j, c] -= h
            cols.append((_compose(sys, up, g, False) - _compose(sys, dn, g, False)) / (2.0 * h))
    return np.column_stack(cols) if cols else np.zeros((sys.dim, 0))


def regular_pair_rank(sys: LinearSystem, g, useq, tol: float = RANK_TOL) -> RankReport:
    """Rank of the control-derivative of the solution map at ``(g, useq)``.

    Full rank makes ``(g, useq)`` a regular pair, so ``phi(k, g, useq)`` is an
    interior point of the reachable set; at ``g = e`` this shows the
    reachable set is open.
    """
    J = solution_jacobian(sys, g, useq)
    rep = numerical_rank(J.T, sys.dim, tol)
    return RankReport(rep.rank, rep.dim, rep.singular_values, J.shape[1], tol, J)


# ---------------------------------------------------------------------------
# closed forms for Aff2


def aff2_accessible(a: float, d: float, hp0: float, gp0: float) -> bool:
    """Sufficient accessibility criterion for Aff2 systems:
    ``h'(0) != 0`` and ``-a h'(0) != g'(0) (d - 1)``."""
    if d == 0:
        raise ValueError("d must be nonzero for f0 to be an automorphism")
    return abs(hp0) > 1e-12 and abs(-a * hp0 - gp0 * (d - 1.0)) > 1e-12


def aff2_x_plus(p: Aff2Params, u: float, x) -> np.ndarray:
    xx = np.asarray(x, dtype=float)[..., 0]
    r = p.dh(u) / p.h(u)
    return np.stack([r * xx, (xx / p.d) * (r * (-p.a - p.g(u)) + p.dg(u))], axis=-1)


def aff2_x_minus(p: Aff2Params, u: float, x) -> np.ndarray:
    xx = np.asarray(x, dtype=float)[..., 0]
    hu = p.h(u)
    return np.stack([-p.dh(u) / hu * xx, -p.dg(u) / hu * xx], axis=-1)


def aff2_ad_chain(p: Aff2Params, direction: str, outer_controls, u0: float, x) -> np.ndarray:
    """Closed-form adjoint chains on Aff2 for up to two outer steps.

    ``outer_controls`` are listed in application order, as in :func:`ad_chain`.

    The first component of every chain equals that of the raw field, since
    the chart Jacobians are lower triangular with matching diagonal factors.
    """
    a, d = p.a, p.d
    h, g, dh, dg = p.h, p.g, p.dh, p.dg
    xx = float(np.asarray(x, dtype=float)[0])
    k = len(outer_controls)
    r0 = dh(u0) / h(u0)
    if direction == "plus":
        if k == 0:
            return aff2_x_plus(p, u0, x)
        if k == 1:
            (u1,) = outer_controls
            second = (
                -(a + g(u1)) / (d * h(u0)) * dh(u0) * xx
                - (a + g(u0)) * dh(u0) * h(u1) / (d**2 * h(u0)) * xx
                + dg(u0) * h(u1) / d**2 * xx
            )
            return np.array([r0 * xx, second])
        if k == 2:
            u1, u2 = outer_controls
            second = (
                -(a + g(u1)) / (d * h(u0)) * dh(u0) * xx
                - (a + g(u2)) * dh(u0) * h(u1) / (d**2 * h(u0)) * xx
                - (a + g(u0)) * dh(u0) * h(u1) * h(u2) / (d**3 * h(u0)) * xx
                + dg(u0) * h(u2) * h(u1) / d**3 * xx
            )
            return np.array([r0 * xx, second])
    elif direction == "minus":
        if k == 0:
            return aff2_x_minus(p, u0, x)
        if k == 1:
            (u1,) = outer_controls
            second = -(a + g(u1)) / (h(u0) * h(u1)) * dh(u0) * xx - d * dg(u0) / (h(u0) * h(u1)) * xx
            return np.array([-r0 * xx, second])
        if k == 2:
            u1, u2 = outer_controls
            hh = h(u0) * h(u1) * h(u2)
            second = (
                -(a + g(u1)) * dh(u0) * xx / (h(u0) * h(u1))
                - d * (a + g(u2)) * dh(u0) * xx / hh
                - d**2 * dg(u0) * xx / hh
            )
            return np.array([-r0 * xx, second])
    else:
        raise ValueError("direction must be 'plus' or 'minus'")
    raise ValueError("closed forms are available for at most two outer steps")
