"""Controllability verdicts for linear systems.

Each verdict names the criterion it rests on:

``EUC``   Kalman rank plus unit-modulus spectrum (Euclidean systems, iff).
``T3.4``  open reachable and controllable sets plus ``G = G0`` (solvable, sufficient).
``T3.9``  the Aff2 parameter criterion with ``d = 1`` (sufficient).
``T4.3``  open reachable and controllable sets plus ``G = G0`` (nilpotent, iff).

Openness is only ever *proven* by a full-rank regular pair at the identity;
failing to find one never counts as a refutation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .accessibility import RANK_TOL, aff2_accessible, gamma_rank, regular_pair_rank
from .errors import PreconditionError
from .spectral import SpectralSplit, differential_at_identity, eigensplit
from .system import LinearSystem, reverse

__all__ = [
    "ClassifyOptions",
    "OpennessResult",
    "Verdict",
    "classify",
    "euclidean_check",
    "aff2_controllable",
    "find_regular_pair",
    "reach_equals_group_test",
]

PROVEN = "proven"
HEURISTIC_NO = "heuristic_no"
UNKNOWN = "unknown"

_PAIR_BUDGET = 2000


@dataclass(frozen=True)
class ClassifyOptions:
    max_k: int | None = None  # default 2 * dim
    tol: float | None = None  # eigenvalue modulus tolerance; None -> 1e-9 analytic / 1e-6 numeric
    rank_tol: float = RANK_TOL
    seed: int = 42
    samples: int = 4
    depth: int = 3


@dataclass(frozen=True)
class OpennessResult:
    status: str
    k: int | None = None
    useq: list | None = None
    rank: int = 0
    pairs_tried: int = 0


@dataclass
class Verdict:
    conclusion: str
    theorem: str
    group_class: str
    g_equals_g0: bool
    moduli: list
    r_open: str
    c_open: str
    split_dims: tuple
    justification: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [
            f"group_class = {self.group_class}",
            f"moduli = {_fmt_list(self.moduli)}",
            f"g_equals_g0 = {str(self.g_equals_g0).lower()}",
            f"r_open = {self.r_open}",
            f"c_open = {self.c_open}",
        ]
        for tag, checks in self.justification:
            body = ", ".join(f"{k}={_fmt_value(v)}" for k, v in checks.items())
            out.append(f"check[{tag}] = {body}")
        out.append(f"verdict = {self.conclusion} [{self.theorem}]")
        return out


def _fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    return "none" if v is None else str(v)


def _fmt_list(xs) -> str:
    return "[" + ", ".join(f"{float(x):.12g}" for x in xs) + "]"


def euclidean_check(A, B, tol: float = 1e-9) -> dict:
    """Kalman rank and spectrum test for ``x+ = A x + B u``.

    Controllable (with a neighborhood of 0 as control range) iff the Kalman
    matrix has full rank and every eigenvalue of ``A`` has modulus one.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    d = A.shape[0]
    if A.shape != (d, d) or B.shape[0] != d:
        raise ValueError("A must be square and B must have as many rows as A")
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("A must be invertible")
    blocks = [B]
    for _ in range(d - 1):
        blocks.append(A @ blocks[-1])
    K = np.hstack(blocks)
    s = np.linalg.svd(K, compute_uv=False)
    rank = 0 if s.size == 0 or s[0] == 0.0 else int(np.sum(s > 1e-9 * s[0]))
    moduli = np.sort(np.abs(np.linalg.eigvals(A)))
    unit = bool(np.max(np.abs(moduli - 1.0)) <= tol)
    return {"kalman_rank": rank, "moduli": moduli.tolist(), "controllable": rank == d and unit}


def aff2_controllable(a: float, d: float, hp0: float, gp0: float) -> bool:
    """Sufficient criterion: accessibility conditions together with ``d = 1``."""
    return aff2_accessible(a, d, hp0, gp0) and abs(d - 1.0) <= 1e-12


def _candidate_sequences(sys: LinearSystem, k: int, seed: int, samples: int):
    m = sys.channels
    rho = sys.range.radius
    yield np.zeros((k, m))
    if sys.linear is not None:
        # x+ = A x + B u: the control Jacobian does not depend on the controls
        return
    axes = [np.array([0.0, -r / 2.0, r / 2.0]) for r in rho]
    per_step = [np.array(p) for p in itertools.product(*axes)]
    count = 1
    for combo in itertools.product(range(len(per_step)), repeat=k):
        if count >= _PAIR_BUDGET:
            break
        if not any(combo):
            continue
        count += 1
        yield np.array([per_step[i] for i in combo])
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        yield rng.uniform(-0.9 * rho, 0.9 * rho, size=(k, m))


def find_regular_pair(sys: LinearSystem, max_k: int, rank_tol: float = RANK_TOL, seed: int = 42, samples: int = 4) -> OpennessResult:
    """Search ``k <= max_k`` and the control lattice for a full-rank regular pair at ``e``."""
    if not sys.range.is_box:
        return OpennessResult(UNKNOWN)
    e = sys.model.identity
    tried = 0
    best = 0
    k0 = max(1, -(-sys.dim // sys.channels))
    for k in range(k0, max_k + 1):
        for useq in _candidate_sequences(sys, k, seed, samples):
            tried += 1
            rep = regular_pair_rank(sys, e, useq, rank_tol)
            best = max(best, rep.rank)
            if rep.full:
                return OpennessResult(PROVEN, k, useq.tolist(), rep.rank, tried)
    return OpennessResult(UNKNOWN, None, None, best, tried)


def _openness(sys: LinearSystem, opts: ClassifyOptions, max_k: int) -> OpennessResult:
    res = find_regular_pair(sys, max_k, opts.rank_tol, opts.seed, opts.samples)
    if res.status == PROVEN or not sys.range.is_box:
        return res
    # no regular pair: a rank-deficient field span at e is evidence (not proof) of empty interior
    gr = gamma_rank(sys, sys.model.identity, opts.depth, opts.samples, opts.rank_tol, seed=opts.seed)
    if gr.heuristic_negative:
        return OpennessResult(HEURISTIC_NO, None, None, res.rank, res.pairs_tried)
    return res


def _split(sys: LinearSystem, opts: ClassifyOptions) -> SpectralSplit:
    analytic = sys.aut.jacobian is not None
    tol = opts.tol if opts.tol is not None else (1e-9 if analytic else 1e-6)
    return eigensplit(differential_at_identity(sys.model, sys.aut), tol)


def classify(sys: LinearSystem, options: ClassifyOptions | None = None) -> Verdict:
    """Apply the strongest criterion available for the system's group class."""
    opts = options or ClassifyOptions()
    max_k = opts.max_k if opts.max_k is not None else 2 * sys.dim
    split = _split(sys, opts)
    n_plus, n_zero, n_minus = split.dims
    g0 = n_zero == sys.dim
    moduli = sorted(float(x) for x in split.moduli)
    r = _openness(sys, opts, max_k)
    c = _openness(reverse(sys), opts, max_k)
    open_both = r.status == PROVEN and c.status == PROVEN
    cls = sys.group_class
    just = [
        (
            "spectrum",
            {
                "dims": f"{n_plus}/{n_zero}/{n_minus}",
                "g_equals_g0": g0,
                "boundary_warning": split.boundary_warning,
            },
        ),
        ("openness", {"r_open": r.status, "r_k": r.k, "c_open": c.status, "c_k": c.k}),
    ]

    def verdict(conclusion, tag):
        return Verdict(conclusion, tag, cls, g0, moduli, r.status, c.status, split.dims, just)

    if cls == "euclidean" and sys.linear is not None:
        A, B = sys.linear
        ec = euclidean_check(A, B, split.tol)
        just.append(("EUC", {"kalman_rank": ec["kalman_rank"], "unit_moduli": g0}))
        if ec["controllable"] and open_both and g0:
            return verdict("Controllable", "EUC")
        if not ec["controllable"]:
            return verdict("NotControllable", "EUC")
        return verdict("Inconclusive", "EUC")

    if cls in ("nilpotent_sc", "euclidean"):
        just.append(("T4.3", {"open_both": open_both, "g_equals_g0": g0}))
        if open_both and g0:
            return verdict("Controllable", "T4.3")
        if not g0:
            # controllability would force G = G0, whichever way openness goes
            return verdict("NotControllable", "T4.3")
        return verdict("Inconclusive", "T4.3")

    if sys.aff2 is not None:
        p = sys.aff2
        acc = aff2_accessible(p.a, p.d, p.hp0, p.gp0)
        ok = aff2_controllable(p.a, p.d, p.hp0, p.gp0)
        just.append(("T3.9", {"accessible": acc, "d_equals_1": abs(p.d - 1.0) <= 1e-12}))
        if ok and open_both and g0:
            return verdict("Controllable", "T3.9")

    just.append(("T3.4", {"open_both": open_both, "g_equals_g0": g0}))
    if open_both and g0:
        return verdict("Controllable", "T3.4")
    return verdict("Inconclusive", "T3.4")


def reach_equals_group_test(sys: LinearSystem, options: ClassifyOptions | None = None) -> str:
    """Whether the reachable set from ``e`` is the whole group (nilpotent class only).

    ``refuted`` when the stable block is nontrivial, ``proven`` when the
    center-unstable block is everything and the reachable set is open,
    ``unknown`` otherwise.
    """
    if sys.group_class not in ("nilpotent_sc", "euclidean"):
        raise PreconditionError("this test applies to simply connected nilpotent groups only")
    opts = options or ClassifyOptions()
    split = _split(sys, opts)
    if split.dims[2] > 0:
        return "refuted"
    max_k = opts.max_k if opts.max_k is not None else 2 * sys.dim
    if find_regular_pair(sys, max_k, opts.rank_tol, opts.seed, opts.samples).status == PROVEN:
        return PROVEN
    return UNKNOWN
