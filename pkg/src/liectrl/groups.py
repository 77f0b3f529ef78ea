"""Chart-coordinate arithmetic for the supported Lie group families.

Group and algebra elements are plain ``numpy`` arrays whose trailing axis
holds chart coordinates; every operation broadcasts over leading axes so the
simulators can push whole frontiers through a single call.

Supported families
------------------
``Euclidean(d)``
    The additive group R^d (abelian).
``Aff2``
    The affine group of the line, the half plane ``x > 0`` with product
    ``(x1, y1) . (x2, y2) = (x1 x2, y2 + x2 y1)`` and identity ``(1, 0)``.
``Heisenberg``
    R^3 with ``(x1, x2, x3) . (y1, y2, y3) = (x1 + y1 + x2 y3, x2 + y2, x3 + y3)``.
``NilpotentStructConst(c)``
    A simply connected nilpotent group given by its structure constants,
    charted by exponential coordinates so that the product is the
    (terminating) BCH series.

In every family the chart tangent space at the identity coincides with the
algebra coordinates, so a differential at ``e`` is directly a matrix on the
Lie algebra.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, ModelError

__all__ = [
    "GroupModel",
    "Euclidean",
    "Aff2",
    "Heisenberg",
    "NilpotentStructConst",
    "MAX_BCH_ORDER",
    "mul",
    "inv",
    "exp",
    "log",
    "bracket",
    "bch",
    "bch_term",
    "dynkin_term",
    "lower_central_series",
    "derived_series",
    "jacobi_residual",
]

MAX_BCH_ORDER = 5

# below this |alpha| the Aff2 exp/log use a Taylor expansion of expm1(a)/a
_AFF2_SERIES_CUTOFF = 1e-6


def _span(vectors: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the rows of ``vectors``."""
    if vectors.size == 0:
        return np.zeros((dim, 0))
    u, s, _ = np.linalg.svd(vectors.T, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((dim, 0))
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank]


def jacobi_residual(c: np.ndarray) -> float:
    """Largest Jacobi-identity violation over all basis triples."""
    # t[i, j, l, m] = [e_i, [e_j, e_l]]_m
    t = np.einsum("jlk,ikm->ijlm", c, c)
    jac = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(jac))) if jac.size else 0.0


def lower_central_series(c: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Bases of g = g^1 > g^2 > ... with g^{i+1} = [g, g^i].

    The list ends with the first zero-dimensional term, or with the first
    term that fails to shrink (non-nilpotent algebra).
    """
    dim = c.shape[0]
    series = [np.eye(dim)]
    while series[-1].shape[1] > 0:
        prev = series[-1]
        # brackets [e_i, v] for every basis vector v of the previous term
        prods = np.einsum("ijk,jv->ivk", c, prev).reshape(-1, dim)
        nxt = _span(prods, dim, tol)
        if nxt.shape[1] == prev.shape[1]:
            series.append(nxt)
            break
        series.append(nxt)
    return series


def derived_series(c: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Bases of the derived series g > [g, g] > [[g, g], [g, g]] > ..."""
    dim = c.shape[0]
    series = [np.eye(dim)]
    while series[-1].shape[1] > 0:
        prev = series[-1]
        prods = np.einsum("ijk,iv,jw->vwk", c, prev, prev).reshape(-1, dim)
        nxt = _span(prods, dim, tol)
        series.append(nxt)
        if nxt.shape[1] == prev.shape[1]:
            break
    return series


class GroupModel:
    """A concrete Lie group family in a fixed global chart.

    Subclasses provide ``mul``, ``inv``, ``exp`` and ``log``; the bracket is
    read off the structure constants ``c[i, j, k]`` with
    ``[e_i, e_j] = sum_k c[i, j, k] e_k``.
    """

    family: str = ""
    group_class: str = ""

    def __init__(self, dim: int, structure_constants: np.ndarray):
        c = np.asarray(structure_constants, dtype=float)
        if dim < 1 or c.shape != (dim, dim, dim):
            raise ModelError(f"structure constants must have shape {(dim,) * 3}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ModelError("structure constants must be finite")
        if np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0) > 1e-12:
            raise ModelError("structure constants are not antisymmetric")
        scale = max(1.0, float(np.max(np.abs(c), initial=0.0))) ** 2
        if jacobi_residual(c) > 1e-12 * scale:
            raise ModelError("structure constants violate the Jacobi identity")
        self.dim = dim
        self.structure_constants = c
        lcs = lower_central_series(c)
        self.nilpotency_step = len(lcs) - 1 if lcs[-1].shape[1] == 0 else None
        self.identity = self._identity()

    def _identity(self) -> np.ndarray:
        return np.zeros(self.dim)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"

    @property
    def is_nilpotent(self) -> bool:
        return self.nilpotency_step is not None

    def check_group(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        if g.shape[-1:] != (self.dim,):
            raise DomainError(f"expected trailing dimension {self.dim}, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise DomainError("group element has non-finite coordinates")
        return g

    def check_algebra(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1:] != (self.dim,):
            raise DomainError(f"expected trailing dimension {self.dim}, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DomainError("algebra element has non-finite coordinates")
        return X

    def bracket(self, X, Y) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return np.einsum("...i,...j,ijk->...k", X, Y, self.structure_constants)

    def random_algebra(self, rng: np.random.Generator, size=None, scale: float = 1.0) -> np.ndarray:
        shape = (self.dim,) if size is None else tuple(np.atleast_1d(size)) + (self.dim,)
        return scale * rng.standard_normal(shape)

    def random_element(self, rng: np.random.Generator, size=None, scale: float = 1.0) -> np.ndarray:
        return self.exp(self.random_algebra(rng, size, scale))

    def distance(self, g, h) -> np.ndarray:
        """Euclidean distance in chart coordinates."""
        return np.linalg.norm(np.asarray(g, float) - np.asarray(h, float), axis=-1)

    # family-specific
    def mul(self, g, h) -> np.ndarray:
        raise NotImplementedError

    def inv(self, g) -> np.ndarray:
        raise NotImplementedError

    def exp(self, X) -> np.ndarray:
        raise NotImplementedError

    def log(self, g) -> np.ndarray:
        raise NotImplementedError


class Euclidean(GroupModel):
    family = "euclidean"
    group_class = "euclidean"

    def __init__(self, d: int):
        super().__init__(d, np.zeros((d, d, d)))

    def __repr__(self) -> str:
        return f"Euclidean({self.dim})"

    def mul(self, g, h):
        return self.check_group(g) + self.check_group(h)

    def inv(self, g):
        return -self.check_group(g)

    def exp(self, X):
        return self.check_algebra(X).copy()

    def log(self, g):
        return self.check_group(g).copy()


def _expm1_over(a: np.ndarray) -> np.ndarray:
    """(e^a - 1) / a with the removable singularity at 0 filled in."""
    small = np.abs(a) < _AFF2_SERIES_CUTOFF
    safe = np.where(small, 1.0, a)
    return np.where(small, 1.0 + a / 2.0 + a * a / 6.0, np.expm1(safe) / safe)


class Aff2(GroupModel):
    """Affine group of the line on the chart ``{(x, y) : x > 0}``.

    Algebra basis: ``e1`` generates dilations, ``e2`` translations, with
    ``[e1, e2] = -e2`` (read off the commutator of the product).
    """

    family = "aff2"
    group_class = "solvable_sc"

    def __init__(self):
        c = np.zeros((2, 2, 2))
        c[0, 1, 1] = -1.0
        c[1, 0, 1] = 1.0
        super().__init__(2, c)

    def __repr__(self) -> str:
        return "Aff2()"

    def _identity(self):
        return np.array([1.0, 0.0])

    def check_group(self, g):
        g = super().check_group(g)
        if np.any(g[..., 0] <= 0.0):
            raise DomainError("Aff2 elements need a strictly positive first coordinate")
        return g

    def mul(self, g, h):
        g = self.check_group(g)
        h = self.check_group(h)
        x = g[..., 0] * h[..., 0]
        y = h[..., 1] + h[..., 0] * g[..., 1]
        return np.stack([x, y], axis=-1)

    def inv(self, g):
        g = self.check_group(g)
        x = 1.0 / g[..., 0]
        return np.stack([x, -g[..., 1] * x], axis=-1)

    def exp(self, X):
        X = self.check_algebra(X)
        a = X[..., 0]
        return np.stack([np.exp(a), X[..., 1] * _expm1_over(a)], axis=-1)

    def log(self, g):
        g = self.check_group(g)
        a = np.log(g[..., 0])
        return np.stack([a, g[..., 1] / _expm1_over(a)], axis=-1)


class Heisenberg(GroupModel):
    """Three-dimensional Heisenberg group; ``[e2, e3] = e1``."""

    family = "heisenberg"
    group_class = "nilpotent_sc"

    def __init__(self):
        c = np.zeros((3, 3, 3))
        c[1, 2, 0] = 1.0
        c[2, 1, 0] = -1.0
        super().__init__(3, c)

    def __repr__(self) -> str:
        return "Heisenberg()"

    def mul(self, g, h):
        g = self.check_group(g)
        h = self.check_group(h)
        out = g + h
        out[..., 0] += g[..., 1] * h[..., 2]
        return out

    def inv(self, g):
        g = self.check_group(g)
        out = -g
        out[..., 0] += g[..., 1] * g[..., 2]
        return out

    def exp(self, X):
        X = self.check_algebra(X)
        out = X.copy()
        out[..., 0] += 0.5 * X[..., 1] * X[..., 2]
        return out

    def log(self, g):
        g = self.check_group(g)
        out = g.copy()
        out[..., 0] -= 0.5 * g[..., 1] * g[..., 2]
        return out


class NilpotentStructConst(GroupModel):
    """Simply connected nilpotent group in exponential coordinates.

    The chart is the algebra itself, so ``exp`` and ``log`` are identities
    and the product is the BCH series, exact once truncated at the
    nilpotency step.
    """

    family = "nilpotent"
    group_class = "nilpotent_sc"

    def __init__(self, structure_constants):
        c = np.asarray(structure_constants, dtype=float)
        if c.ndim != 3:
            raise ModelError("structure constants must be a rank-3 array")
        super().__init__(c.shape[0], c)
        if self.nilpotency_step is None:
            raise ModelError("structure constants do not define a nilpotent algebra")
        if self.nilpotency_step > MAX_BCH_ORDER:
            raise ModelError(
                f"nilpotency step {self.nilpotency_step} exceeds the supported maximum {MAX_BCH_ORDER}"
            )

    def __repr__(self) -> str:
        return f"NilpotentStructConst(dim={self.dim}, step={self.nilpotency_step})"

    def mul(self, g, h):
        return bch(self, self.check_group(g), self.check_group(h), self.nilpotency_step)

    def inv(self, g):
        return -self.check_group(g)

    def exp(self, X):
        return self.check_algebra(X).copy()

    def log(self, g):
        return self.check_group(g).copy()


# ---------------------------------------------------------------------------
# functional surface


def mul(m: GroupModel, g, h) -> np.ndarray:
    return m.mul(g, h)


def inv(m: GroupModel, g) -> np.ndarray:
    return m.inv(g)


def exp(m: GroupModel, X) -> np.ndarray:
    return m.exp(X)


def log(m: GroupModel, g) -> np.ndarray:
    return m.log(g)


def bracket(m: GroupModel, X, Y) -> np.ndarray:
    return m.bracket(X, Y)


def _pair_compositions(n: int, k: int):
    """All k-tuples of (r, s) pairs with r + s >= 1 and total degree n."""
    if k == 0:
        if n == 0:
            yield ()
        return
    for deg in range(1, n - (k - 1) + 1):
        for r in range(deg + 1):
            for rest in _pair_compositions(n - deg, k - 1):
                yield ((r, deg - r),) + rest


@lru_cache(maxsize=None)
def _dynkin_table(n: int) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
    """Coefficients of right-nested bracket words in the degree-n BCH term.

    Words are tuples over {0: X, 1: Y}; the word (w1, ..., wn) stands for
    [w1, [w2, [..., [w_{n-1}, w_n]]]].
    """
    table: dict[tuple[int, ...], Fraction] = {}
    for k in range(1, n + 1):
        sign = Fraction((-1) ** (k - 1), k)
        for pairs in _pair_compositions(n, k):
            denom = n
            word: list[int] = []
            for r, s in pairs:
                denom *= math.factorial(r) * math.factorial(s)
                word += [0] * r + [1] * s
            w = tuple(word)
            # a nested word whose innermost bracket pairs equal letters vanishes
            if n > 1 and w[-1] == w[-2]:
                continue
            table[w] = table.get(w, Fraction(0)) + sign / denom
    return tuple((w, cf) for w, cf in sorted(table.items()) if cf != 0)


def dynkin_term(m: GroupModel, X, Y, n: int) -> np.ndarray:
    """Degree-n homogeneous BCH component from Dynkin's formula."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    X, Y = np.broadcast_arrays(X, Y)
    out = np.zeros(X.shape)
    letters = (X, Y)
    for word, cf in _dynkin_table(n):
        acc = letters[word[-1]]
        for w in reversed(word[:-1]):
            acc = m.bracket(letters[w], acc)
        out = out + float(cf) * acc
    return out


def bch_term(m: GroupModel, X, Y, n: int) -> np.ndarray:
    """Homogeneous degree-n term of log(exp X exp Y)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if n == 1:
        return X + Y
    br = m.bracket
    if n == 2:
        return 0.5 * br(X, Y)
    if n == 3:
        XY = br(X, Y)
        return (br(X, XY) + br(Y, br(Y, X))) / 12.0
    if n == 4:
        return -br(Y, br(X, br(X, Y))) / 24.0
    return dynkin_term(m, X, Y, n)


def bch(m: GroupModel, X, Y, order: int) -> np.ndarray:
    """Truncated Baker-Campbell-Hausdorff series C(X, Y) up to degree ``order``.

    For nilpotent models the series terminates at the nilpotency step, so any
    ``order`` at or above it is exact and larger orders are clamped. For
    other models the truncation is only an approximation for small X, Y.
    """
    if int(order) != order or order < 1:
        raise ValueError(f"BCH order must be a positive integer, got {order!r}")
    order = int(order)
    if m.nilpotency_step is not None:
        order = min(order, m.nilpotency_step)
    if order > MAX_BCH_ORDER:
        raise ValueError(f"BCH order {order} exceeds the supported maximum {MAX_BCH_ORDER}")
    X = m.check_algebra(X)
    Y = m.check_algebra(Y)
    out = X + Y
    for n in range(2, order + 1):
        out = out + bch_term(m, X, Y, n)
    return out
