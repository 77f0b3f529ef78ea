"""Point-cloud approximations of reachable and controllable sets.

Clouds are grown breadth-first over a fixed control lattice. Points are
pruned on a spatial hash (cells of side ``prune_cell`` centered on the
multiples of the cell size) and each cell keeps its first arrival, so a
cloud is a deterministic function of the system and its configuration.
All coverage statements made from a cloud are lower bounds on the true set.
"""

from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError
from .specfile import spec_digest
from .system import (
    LinearSystem,
    controllable_set_finite,
    reachable_set_finite,
    reverse,
    same_set,
)

__all__ = [
    "CloudConfig",
    "PointCloud",
    "DualityReport",
    "reach_cloud",
    "coverage",
    "cloud_contains",
    "duality_cloud_check",
    "system_digest",
    "format_number",
    "cloud_to_csv",
    "write_cloud_csv",
    "read_cloud_csv",
]


@dataclass(frozen=True)
class CloudConfig:
    steps: int
    controls_per_channel: int = 5
    prune_cell: float = 1e-3
    max_points: int = 10**6
    seed: int = 42
    window: tuple | None = None  # (lo, hi) chart box; points outside are dropped
    start: tuple | None = None

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if int(self.controls_per_channel) != self.controls_per_channel or self.controls_per_channel < 1:
            raise ValueError("controls_per_channel must be a positive integer")
        if not self.prune_cell > 0.0:
            raise ValueError("prune_cell must be positive")
        if int(self.max_points) != self.max_points or self.max_points < 1:
            raise ValueError("max_points must be a positive integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = None if self.window is None else [list(map(float, w)) for w in self.window]
        d["start"] = None if self.start is None else list(map(float, self.start))
        return d


@dataclass
class PointCloud:
    points: np.ndarray
    k_reached: np.ndarray
    meta: dict = field(default_factory=dict)
    truncated: bool = False

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def upto(self, k: int) -> np.ndarray:
        """Points first reached within ``k`` steps."""
        return self.points[self.k_reached <= k]


@dataclass(frozen=True)
class DualityReport:
    equal: bool
    k: int
    n_reversed_forward: int
    n_backward: int
    tol: float


def system_digest(sys: LinearSystem) -> str:
    """sha256 of the canonical JSON spec document (including the name)."""
    payload = dict(sys.spec, name=sys.name) if sys.spec is not None else {"name": sys.name}
    return spec_digest(payload)


def _cell_keys(points: np.ndarray, cell: float) -> np.ndarray:
    return np.round(points / cell).astype(np.int64)


def _as_void(keys: np.ndarray) -> np.ndarray:
    keys = np.ascontiguousarray(keys)
    return keys.view(np.dtype((np.void, keys.dtype.itemsize * keys.shape[1]))).ravel()


def reach_cloud(sys: LinearSystem, cfg: CloudConfig, direction: str = "forward") -> PointCloud:
    """Breadth-first approximation of the k-step reachable (``forward``) or
    controllable (``backward``) set from ``cfg.start`` (default ``e``).

    The backward cloud is the forward cloud of the reversed system.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    s = sys if direction == "forward" else reverse(sys)
    U = s.range.lattice(cfg.controls_per_channel)
    start = s.model.identity if cfg.start is None else np.asarray(cfg.start, dtype=float)
    start = s.model.check_group(start).reshape(1, s.dim)
    lo = hi = None
    if cfg.window is not None:
        lo = np.asarray(cfg.window[0], dtype=float)
        hi = np.asarray(cfg.window[1], dtype=float)

    pts = [start]
    ks = [np.zeros(1, dtype=np.int64)]
    seen = set(_as_void(_cell_keys(start, cfg.prune_cell)).tolist())
    total = 1
    frontier = start
    truncated = False
    for k in range(1, cfg.steps + 1):
        if frontier.shape[0] == 0:
            break
        cand = s.f(U[None, :, :], frontier[:, None, :]).reshape(-1, s.dim)
        cand = cand[np.all(np.isfinite(cand), axis=1)]
        if lo is not None:
            cand = cand[np.all((cand >= lo) & (cand <= hi), axis=1)]
        keys = _as_void(_cell_keys(cand, cfg.prune_cell))
        _, first = np.unique(keys, return_index=True)
        first = np.sort(first)
        kb = keys.tolist()
        fresh = np.array([kb[i] not in seen for i in first], dtype=bool)
        idx = first[fresh]
        if total + idx.size > cfg.max_points:
            idx = idx[: cfg.max_points - total]
            truncated = True
        seen.update(kb[i] for i in idx)
        frontier = cand[idx]
        pts.append(frontier)
        ks.append(np.full(idx.size, k, dtype=np.int64))
        total += idx.size
        if truncated:
            break

    meta = {
        "config": cfg.to_dict(),
        "direction": direction,
        "system": sys.name,
        "digest": system_digest(sys),
        "controls": U.tolist(),
    }
    return PointCloud(np.vstack(pts), np.concatenate(ks), meta, truncated)


def cloud_contains(cloud: PointCloud, points, cell: float | None = None) -> np.ndarray:
    """For each query point, whether its hash cell is occupied by the cloud."""
    cell = cloud.meta.get("config", {}).get("prune_cell", 1e-3) if cell is None else cell
    have = set(_as_void(_cell_keys(cloud.points, cell)).tolist())
    q = np.atleast_2d(np.asarray(points, dtype=float))
    return np.array([key in have for key in _as_void(_cell_keys(q, cell)).tolist()], dtype=bool)


def coverage(cloud: PointCloud | np.ndarray, box, resolution: float) -> float:
    """Fraction of grid cells of side ``resolution`` in ``box = (lo, hi)`` holding a cloud point."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    if np.any(hi <= lo) or not resolution > 0.0:
        raise ValueError("box must have hi > lo and resolution must be positive")
    counts = np.maximum(1, np.round((hi - lo) / resolution).astype(np.int64))
    inside = pts[np.all((pts >= lo) & (pts <= hi), axis=1)]
    if inside.shape[0] == 0:
        return 0.0
    idx = np.floor((inside - lo) / resolution).astype(np.int64)
    idx = np.minimum(idx, counts - 1)
    occupied = np.unique(np.ravel_multi_index(idx.T, counts)).size
    return occupied / float(np.prod(counts))


def duality_cloud_check(sys: LinearSystem, cfg: CloudConfig | None = None, k: int | None = None) -> DualityReport:
    """Compare the k-step reachable set of the reversed system with the
    k-step controllable set of ``sys``, both enumerated exactly.

    Needs a finite control set; the tolerance is ``cfg.prune_cell``.
    """
    if sys.range.is_box:
        raise PreconditionError("exact duality check needs a finite control set")
    if k is None:
        if cfg is None:
            raise ValueError("give either cfg or k")
        k = cfg.steps
    tol = cfg.prune_cell if cfg is not None else 1e-9
    fwd = reachable_set_finite(reverse(sys), k)
    bwd = controllable_set_finite(sys, k)
    return DualityReport(same_set(fwd, bwd, tol), k, len(fwd), len(bwd), tol)


# ---------------------------------------------------------------------------
# CSV export


def format_number(x: float) -> str:
    """Positional decimal with 12 significant digits, trailing zeros trimmed."""
    x = float(x) + 0.0  # fold -0.0
    s = np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="-")
    return "0" if s in ("-0", "0") else s


def cloud_to_csv(cloud: PointCloud) -> str:
    """CSV text with header ``k,x1,...,xd``; rows sorted by arrival step then coordinates."""
    d = cloud.dim
    order = np.lexsort(tuple(cloud.points[:, j] for j in range(d - 1, -1, -1)) + (cloud.k_reached,))
    buf = io.StringIO()
    buf.write(",".join(["k"] + [f"x{j + 1}" for j in range(d)]) + "\n")
    for i in order:
        row = [str(int(cloud.k_reached[i]))] + [format_number(v) for v in cloud.points[i]]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_cloud_csv(cloud: PointCloud, path) -> None:
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(cloud_to_csv(cloud))


def read_cloud_csv(path) -> PointCloud:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return PointCloud(data[:, 1:].copy(), data[:, 0].astype(np.int64), {"source": str(path)})
