"""Discrete-time linear control systems ``g_{k+1} = f_u(e) . f0(g_k)``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.spatial import cKDTree

from .errors import ModelError, PreconditionError, ResourceError
from .groups import Aff2, Euclidean, GroupModel, Heisenberg, NilpotentStructConst
from .spectral import AutomorphismModel

__all__ = [
    "ControlRange",
    "Aff2Params",
    "LinearSystem",
    "euclidean_system",
    "aff2_system",
    "heisenberg_system",
    "heisenberg_example_system",
    "nilpotent_system",
    "step",
    "trajectory",
    "translation_identity_residual",
    "reverse",
    "reachable_set_finite",
    "controllable_set_finite",
    "dedup_points",
    "is_subset",
    "same_set",
    "ENUM_GUARD",
    "DEDUP_TOL",
]

ENUM_GUARD = 10**6
DEDUP_TOL = 1e-9

BetaMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ControlRange:
    """Admissible controls: a box ``[lo, hi]`` or a finite list of control vectors.

    A finite set is only ever a sub-sampling of a genuine neighborhood of 0,
    so exact set statements made with it are one-sided.
    """

    kind: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    points: np.ndarray | None = None

    @classmethod
    def box(cls, lo, hi) -> "ControlRange":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be matching 1-d arrays")
        if not (np.all(lo < 0.0) and np.all(hi > 0.0)):
            raise ValueError("box must satisfy lo < 0 < hi in every channel")
        return cls("box", lo=lo, hi=hi)

    @classmethod
    def finite(cls, points) -> "ControlRange":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("finite control set needs a non-empty list of control vectors")
        if not np.any(np.all(pts == 0.0, axis=1)):
            raise ValueError("finite control set must contain the zero control")
        return cls("finite", points=pts)

    @property
    def channels(self) -> int:
        return self.lo.size if self.kind == "box" else self.points.shape[1]

    @property
    def is_box(self) -> bool:
        return self.kind == "box"

    @property
    def radius(self) -> np.ndarray:
        """Half-width of the largest symmetric box around 0 inside the range."""
        if self.kind != "box":
            raise PreconditionError("radius is only defined for box ranges")
        return np.minimum(-self.lo, self.hi)

    def contains(self, u, tol: float = 1e-12) -> bool:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.shape != (self.channels,):
            return False
        if self.kind == "box":
            return bool(np.all(u >= self.lo - tol) and np.all(u <= self.hi + tol))
        return bool(np.any(np.all(np.abs(self.points - u) <= tol, axis=1)))

    def is_interior(self, u, margin: float = 0.0) -> bool:
        if self.kind != "box":
            return False
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return bool(np.all(u - margin > self.lo) and np.all(u + margin < self.hi))

    def lattice(self, per_channel: int) -> np.ndarray:
        """Grid of controls with ``per_channel`` points per axis; always holds 0 and the box corners."""
        if self.kind == "finite":
            return self.points.copy()
        if per_channel < 1:
            raise ValueError("lattice needs at least one point per channel")
        axes = []
        for lo, hi in zip(self.lo, self.hi):
            pts = [0.0] if per_channel == 1 else list(np.linspace(lo, hi, per_channel))
            pts.append(0.0)
            axes.append(np.unique(pts))
        return np.array(list(itertools.product(*axes)), dtype=float)

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        return {"kind": "finite", "points": self.points.tolist()}


@dataclass(frozen=True, eq=False)
class Aff2Params:
    """Scalar data of an Aff2 system ``f_u(x, y) = (h(u) x, a (x - 1) + d y + g(u) x)``.

    ``h``, ``g`` and their derivatives act on the single control channel.
    """

    a: float
    d: float
    h: Callable
    g: Callable
    dh: Callable
    dg: Callable

    @property
    def hp0(self) -> float:
        return float(self.dh(0.0))

    @property
    def gp0(self) -> float:
        return float(self.dg(0.0))

    def reversed(self) -> "Aff2Params":
        a, d, h, g, dh, dg = self.a, self.d, self.h, self.g, self.dh, self.dg

        def h_r(u):
            return 1.0 / h(u)

        def g_r(u):
            return -(a / d) * (1.0 / h(u) - 1.0) - g(u) / (d * h(u))

        def dh_r(u):
            return -dh(u) / h(u) ** 2

        def dg_r(u):
            hu = h(u)
            return (a / d) * dh(u) / hu**2 - (dg(u) * hu - g(u) * dh(u)) / (d * hu**2)

        return Aff2Params(-a / d, 1.0 / d, h_r, g_r, dh_r, dg_r)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """A linear control system on ``model``.

    ``beta`` maps control vectors (trailing axis of length ``channels``) to
    the translation part ``f_u(e)``; together with the automorphism it
    defines ``f_u(g) = beta(u) . f0(g)``.
    """

    model: GroupModel
    aut: AutomorphismModel
    beta: BetaMap
    range: ControlRange
    name: str = ""
    aff2: Aff2Params | None = None
    linear: tuple | None = None
    spec: dict | None = None

    def __post_init__(self):
        e = self.model.identity
        b0 = self.beta(np.zeros(self.range.channels))
        if self.model.distance(b0, e) > 1e-12:
            raise ModelError("f_0(e) must equal the identity: beta(0) != e")

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def channels(self) -> int:
        return self.range.channels

    @property
    def group_class(self) -> str:
        return self.model.group_class

    def f(self, u, g) -> np.ndarray:
        """``f_u(g)`` without control-range checks; broadcasts over leading axes."""
        return self.model.mul(self.beta(np.asarray(u, dtype=float)), self.aut.forward(g))

    def f_inv(self, u, g) -> np.ndarray:
        """``f_u^{-1}(g) = f0^{-1}(beta(u)^{-1} . g)``."""
        m = self.model
        return self.aut.inverse(m.mul(m.inv(self.beta(np.asarray(u, dtype=float))), g))

    def with_range(self, rng: ControlRange) -> "LinearSystem":
        spec = None
        if self.spec is not None:
            spec = dict(self.spec, control=rng.to_dict())
        return replace(self, range=rng, spec=spec)

    def reversed(self) -> "LinearSystem":
        return reverse(self)


def _check_control(sys: LinearSystem, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if not sys.range.contains(u):
        raise ValueError(f"control {u.tolist()} is not in the control range")
    return u


def step(sys: LinearSystem, g, u) -> np.ndarray:
    """One step ``f_u(g) = f_u(e) . f0(g)``."""
    u = _check_control(sys, u)
    return sys.f(u, sys.model.check_group(g))


def trajectory(sys: LinearSystem, k: int, g, useq: Sequence) -> np.ndarray:
    """Solution ``phi(k, g, u) = f_{u_{k-1}} o ... o f_{u_0}(g)``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    useq = list(useq)
    if len(useq) < k:
        raise ValueError(f"control sequence has {len(useq)} entries, need {k}")
    x = sys.model.check_group(g)
    for j in range(k):
        x = step(sys, x, useq[j])
    return np.array(x, dtype=float)


def translation_identity_residual(sys: LinearSystem, k: int, g, useq: Sequence) -> float:
    """Chart distance between ``phi(k, g, u)`` and ``phi(k, e, u) . f0^k(g)``."""
    lhs = trajectory(sys, k, g, useq)
    rhs = sys.model.mul(trajectory(sys, k, sys.model.identity, useq), sys.aut.power(g, k))
    return float(sys.model.distance(lhs, rhs))


def reverse(sys: LinearSystem) -> LinearSystem:
    """The reversed system ``h_{k+1} = f_u^{-1}(e) . f0^{-1}(h_k)``; its steps invert those of ``sys``."""
    m = sys.model
    aut_r = sys.aut.inverted()
    f0_inv = sys.aut.inverse
    beta = sys.beta

    def beta_r(u):
        return f0_inv(m.inv(beta(u)))

    linear = None
    if sys.linear is not None:
        A, B = sys.linear
        Ainv = np.linalg.inv(A)
        linear = (Ainv, -Ainv @ B)
    aff2 = sys.aff2.reversed() if sys.aff2 is not None else None
    name = sys.name[:-9] if sys.name.endswith("~reversed") else sys.name + "~reversed"
    return LinearSystem(m, aut_r, beta_r, sys.range, name=name, aff2=aff2, linear=linear, spec=None)


# ---------------------------------------------------------------------------
# constructors


def _poly_beta(coeffs: Sequence[Sequence[float]]) -> BetaMap:
    cs = [np.asarray(c, dtype=float) for c in coeffs]

    def beta(u):
        u = np.asarray(u, dtype=float)[..., 0]
        return np.stack([P.polyval(u, c) * np.ones_like(u) for c in cs], axis=-1)

    return beta


def euclidean_system(A, B, control: ControlRange, name: str = "euclidean") -> LinearSystem:
    """``x_{k+1} = A x_k + B u_k`` on R^d."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError("A must be square")
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("A must be invertible")
    if B.shape != (d, control.channels):
        raise ValueError(f"B must have shape {(d, control.channels)}, got {B.shape}")
    model = Euclidean(d)
    aut = AutomorphismModel.from_algebra_matrix(model, A, check=False)
    Bc = B.copy()

    def beta(u):
        return np.asarray(u, dtype=float) @ Bc.T

    spec = {"family": "euclidean", "A": A.tolist(), "B": B.tolist(), "control": control.to_dict()}
    return LinearSystem(model, aut, beta, control, name=name, linear=(A.copy(), Bc), spec=spec)


def _positive_on(coeffs: np.ndarray, control: ControlRange) -> bool:
    if control.kind == "finite":
        return bool(np.all(P.polyval(control.points[:, 0], coeffs) > 0.0))
    lo, hi = float(control.lo[0]), float(control.hi[0])
    if P.polyval(lo, coeffs) <= 0.0 or P.polyval(hi, coeffs) <= 0.0:
        return False
    roots = P.polyroots(coeffs) if np.any(coeffs[1:] != 0.0) else np.array([])
    real = roots[np.abs(roots.imag) < 1e-12].real
    return not np.any((real >= lo) & (real <= hi))


def aff2_system(a: float, d: float, h_coeffs, g_coeffs, control: ControlRange, name: str = "aff2") -> LinearSystem:
    """``f_u(x, y) = (h(u) x, a (x - 1) + d y + g(u) x)`` with polynomial ``h``, ``g``.

    Coefficients are in ascending powers of ``u``; ``h(0) = 1``, ``g(0) = 0``
    and ``h > 0`` on the control range are enforced.
    """
    if float(d) == 0.0:
        raise ValueError("Aff2 systems need d != 0")
    if control.channels != 1:
        raise ValueError("Aff2 systems take a single control channel")
    hc = np.trim_zeros(np.asarray(h_coeffs, dtype=float), "b")
    gc = np.trim_zeros(np.asarray(g_coeffs, dtype=float), "b")
    hc = hc if hc.size else np.zeros(1)
    gc = gc if gc.size else np.zeros(1)
    if hc[0] != 1.0:
        raise ValueError("h(0) must equal 1")
    if gc[0] != 0.0:
        raise ValueError("g(0) must equal 0")
    if not _positive_on(hc, control):
        raise ValueError("h must be strictly positive on the control range")
    dhc = P.polyder(hc)
    dgc = P.polyder(gc)
    params = Aff2Params(
        float(a),
        float(d),
        lambda u: P.polyval(u, hc),
        lambda u: P.polyval(u, gc),
        lambda u: P.polyval(u, dhc),
        lambda u: P.polyval(u, dgc),
    )
    model = Aff2()
    aut = AutomorphismModel.aff2(a, d)
    beta = _poly_beta([hc, gc])
    spec = {
        "family": "aff2",
        "a": float(a),
        "d": float(d),
        "h_coeffs": np.asarray(h_coeffs, dtype=float).tolist(),
        "g_coeffs": np.asarray(g_coeffs, dtype=float).tolist(),
        "control": control.to_dict(),
    }
    return LinearSystem(model, aut, beta, control, name=name, aff2=params, spec=spec)


def _check_beta_coeffs(beta_coeffs, dim: int) -> list[np.ndarray]:
    if len(beta_coeffs) != dim:
        raise ValueError(f"need {dim} coefficient lists for beta, got {len(beta_coeffs)}")
    out = []
    for c in beta_coeffs:
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if c.size and c[0] != 0.0:
            raise ValueError("beta polynomials must vanish at u = 0")
        out.append(c if c.size else np.zeros(1))
    return out


def heisenberg_system(M, c, beta_coeffs, control: ControlRange, name: str = "heisenberg") -> LinearSystem:
    """Linear system on the Heisenberg group.

    The automorphism is induced by the algebra map
    ``[[det M, c2, c3], [0, M]]`` (every automorphism of the Heisenberg
    algebra has this shape); ``beta_coeffs`` gives each coordinate of
    ``f_u(e)`` as a polynomial in the single control.
    """
    M = np.asarray(M, dtype=float)
    cvec = np.asarray(c, dtype=float)
    if M.shape != (2, 2) or cvec.shape != (2,):
        raise ValueError("Heisenberg automorphism needs a 2x2 M and a length-2 c")
    if control.channels != 1:
        raise ValueError("polynomial Heisenberg systems take a single control channel")
    L = np.zeros((3, 3))
    L[0, 0] = np.linalg.det(M)
    L[0, 1:] = cvec
    L[1:, 1:] = M
    model = Heisenberg()
    aut = AutomorphismModel.from_algebra_matrix(model, L)
    cs = _check_beta_coeffs(beta_coeffs, 3)
    spec = {
        "family": "heisenberg",
        "M": M.tolist(),
        "c": cvec.tolist(),
        "beta_coeffs": [x.tolist() for x in cs],
        "control": control.to_dict(),
    }
    return LinearSystem(model, aut, _poly_beta(cs), control, name=name, spec=spec)


def heisenberg_example_system(control: ControlRange | None = None) -> LinearSystem:
    """The worked Heisenberg example with
    ``f_u(x) = (x1 + x2 + x2^2/2 + u x2 + u x3 - u/2 - u^2/3, x2 + u, x2 + x3 - u/2)``."""
    control = ControlRange.box([-1.0], [1.0]) if control is None else control
    return heisenberg_system(
        [[1.0, 0.0], [1.0, 1.0]],
        [1.0, 0.0],
        [[0.0, -0.5, -1.0 / 3.0], [0.0, 1.0], [0.0, -0.5]],
        control,
        name="heisenberg-paper",
    )


def nilpotent_system(structure_constants, L, beta_coeffs, control: ControlRange, name: str = "nilpotent") -> LinearSystem:
    """Linear system on a nilpotent group in exponential coordinates.

    ``L`` must be an automorphism of the algebra; in exponential
    coordinates ``f0`` is the linear map ``L`` itself.
    """
    if control.channels != 1:
        raise ValueError("polynomial nilpotent systems take a single control channel")
    model = NilpotentStructConst(structure_constants)
    aut = AutomorphismModel.from_algebra_matrix(model, L)
    cs = _check_beta_coeffs(beta_coeffs, model.dim)
    spec = {
        "family": "nilpotent",
        "structure_constants": model.structure_constants.tolist(),
        "L": np.asarray(L, dtype=float).tolist(),
        "beta_coeffs": [x.tolist() for x in cs],
        "control": control.to_dict(),
    }
    return LinearSystem(model, aut, _poly_beta(cs), control, name=name, spec=spec)


# ---------------------------------------------------------------------------
# finite point sets


def dedup_points(points, tol: float = DEDUP_TOL) -> np.ndarray:
    """Sort points lexicographically and merge those closer than ``tol``.

    Merged clusters keep their first representative in sorted order.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] == 0:
        return pts
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    keys = np.round(pts / tol).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    pts = pts[np.sort(first)]
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if len(pairs):
        keep = np.ones(len(pts), dtype=bool)
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        for i, j in pairs:
            if keep[i]:
                keep[j] = False
        pts = pts[keep]
    return pts


def is_subset(A, B, tol: float = DEDUP_TOL) -> bool:
    """Every point of ``A`` has a point of ``B`` within ``tol``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[0] == 0:
        return True
    if B.shape[0] == 0:
        return False
    dist, _ = cKDTree(B).query(A)
    return bool(np.all(dist <= tol))


def same_set(A, B, tol: float = DEDUP_TOL) -> bool:
    return is_subset(A, B, tol) and is_subset(B, A, tol)


def _enumerate(sys: LinearSystem, k: int, start, mapper) -> np.ndarray:
    if sys.range.kind != "finite":
        raise PreconditionError("exact enumeration needs a finite control set")
    U = sys.range.points
    if len(U) ** k > ENUM_GUARD:
        raise ResourceError(f"|U|^k = {len(U)}^{k} exceeds the enumeration guard {ENUM_GUARD}")
    layer = np.atleast_2d(sys.model.check_group(start)).astype(float)
    for _ in range(k):
        cand = mapper(U[None, :, :], layer[:, None, :]).reshape(-1, sys.dim)
        layer = dedup_points(cand)
    return dedup_points(layer)


def reachable_set_finite(sys: LinearSystem, k: int, start=None) -> np.ndarray:
    """All points ``phi(k, start, u)`` over control sequences from the finite set, deduplicated."""
    start = sys.model.identity if start is None else start
    return _enumerate(sys, k, start, sys.f)


def controllable_set_finite(sys: LinearSystem, k: int, target=None) -> np.ndarray:
    """All points steered onto ``target`` in exactly ``k`` steps, by inverting steps."""
    target = sys.model.identity if target is None else target
    return _enumerate(sys, k, target, sys.f_inv)
