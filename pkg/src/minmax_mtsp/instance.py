"""Problem instances: TSPLIB-subset parsing, random generation, metrics, neighbor lists.

Vertex indexing convention used throughout the package: vertex 0 is the depot,
vertices 1..n are the cities (matching 1-based city ids in solution files).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._rng import Rng

# Full pairwise matrix kept only up to this vertex count; larger instances
# compute distances on demand.
MATRIX_MAX_VERTICES = 3000


class Metric(Enum):
    REAL_EUCLIDEAN = "real_euclidean"
    ROUNDED_EUCLIDEAN = "rounded_euclidean"  # TSPLIB EUC_2D nearest-integer rounding
    ATT = "att"
    CEIL_EUCLIDEAN = "ceil_euclidean"        # TSPLIB CEIL_2D


METRIC_CODE = {
    Metric.REAL_EUCLIDEAN: 0,
    Metric.ROUNDED_EUCLIDEAN: 1,
    Metric.ATT: 2,
    Metric.CEIL_EUCLIDEAN: 3,
}

# Default metric per TSPLIB edge weight type. EUC_2D deliberately maps to the
# unrounded metric: the reference objective values for these benchmark files
# are fractional, so nearest-integer rounding would change their magnitudes.
EDGE_WEIGHT_DEFAULTS = {
    "EUC_2D": Metric.REAL_EUCLIDEAN,
    "ATT": Metric.ATT,
    "CEIL_2D": Metric.CEIL_EUCLIDEAN,
}

METRIC_TO_EDGE_WEIGHT = {
    Metric.REAL_EUCLIDEAN: "EUC_2D",
    Metric.ROUNDED_EUCLIDEAN: "EUC_2D",
    Metric.ATT: "ATT",
    Metric.CEIL_EUCLIDEAN: "CEIL_2D",
}


class ParseError(ValueError):
    """Malformed instance file; message carries the offending line number."""


class InfeasibleInstanceError(ValueError):
    pass


def _metric_distance(ax: float, ay: float, bx: float, by: float, code: int) -> float:
    dx = ax - bx
    dy = ay - by
    if code == 0:
        return math.sqrt(dx * dx + dy * dy)
    if code == 1:
        return float(math.floor(math.sqrt(dx * dx + dy * dy) + 0.5))
    if code == 2:
        r = math.sqrt((dx * dx + dy * dy) / 10.0)
        t = math.floor(r + 0.5)
        return float(t + 1 if t < r else t)
    return float(math.ceil(math.sqrt(dx * dx + dy * dy)))


@dataclass
class Instance:
    """Depot + cities with a symmetric nonnegative metric over vertices 0..n."""

    name: str
    depot: tuple[float, float]
    cities: list[tuple[float, float]]
    metric: Metric = Metric.REAL_EUCLIDEAN
    coords: np.ndarray = field(init=False, repr=False)
    _matrix: np.ndarray | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        if len(self.cities) < 1:
            raise ValueError("instance needs at least one city")
        pts = [self.depot] + list(self.cities)
        self.coords = np.asarray(pts, dtype=np.float64)
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("non-finite coordinate")

    @property
    def n(self) -> int:
        return len(self.cities)

    @property
    def num_vertices(self) -> int:
        return self.n + 1

    @property
    def metric_code(self) -> int:
        return METRIC_CODE[self.metric]

    @property
    def matrix(self) -> np.ndarray | None:
        """Full distance matrix, or None above MATRIX_MAX_VERTICES."""
        if self._matrix is None and self.num_vertices <= MATRIX_MAX_VERTICES:
            self._matrix = self._build_matrix()
        return self._matrix

    def _build_matrix(self) -> np.ndarray:
        x = self.coords[:, 0]
        y = self.coords[:, 1]
        dx = x[:, None] - x[None, :]
        dy = y[:, None] - y[None, :]
        code = self.metric_code
        if code == 0:
            d = np.sqrt(dx * dx + dy * dy)
        elif code == 1:
            d = np.floor(np.sqrt(dx * dx + dy * dy) + 0.5)
        elif code == 2:
            r = np.sqrt((dx * dx + dy * dy) / 10.0)
            t = np.floor(r + 0.5)
            d = np.where(t < r, t + 1.0, t)
        else:
            d = np.ceil(np.sqrt(dx * dx + dy * dy))
        np.fill_diagonal(d, 0.0)
        return d

    def distance(self, i: int, j: int) -> float:
        nv = self.num_vertices
        if not (0 <= i < nv and 0 <= j < nv):
            raise IndexError(f"vertex index out of range: ({i}, {j})")
        if i == j:
            return 0.0
        if self._matrix is not None:
            return float(self._matrix[i, j])
        ax, ay = self.coords[i]
        bx, by = self.coords[j]
        return _metric_distance(ax, ay, bx, by, self.metric_code)

    def kernel_args(self):
        """(coords, matrix, use_matrix, metric_code) as the jitted kernels expect."""
        mat = self.matrix
        if mat is not None:
            return self.coords, mat, True, self.metric_code
        return self.coords, np.zeros((1, 1), dtype=np.float64), False, self.metric_code


def distance(inst: Instance, i: int, j: int) -> float:
    return inst.distance(i, j)


@dataclass
class NeighborList:
    """Per-vertex list of the alpha nearest other vertices, nearest first.

    Ties in distance break toward the lower vertex index. Lists cover the whole
    vertex set (depot included), so entry 0 may appear; move scans skip it.
    """

    alpha: int
    lists: np.ndarray  # int32, shape (num_vertices, effective_alpha)

    @property
    def effective_alpha(self) -> int:
        return self.lists.shape[1]


def build_neighbor_lists(inst: Instance, alpha: int) -> NeighborList:
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    nv = inst.num_vertices
    eff = min(alpha, nv - 1)
    lists = np.empty((nv, eff), dtype=np.int32)
    mat = inst.matrix
    idx = np.arange(nv)
    code = inst.metric_code
    for i in range(nv):
        if mat is not None:
            d = mat[i]
        else:
            dx = inst.coords[:, 0] - inst.coords[i, 0]
            dy = inst.coords[:, 1] - inst.coords[i, 1]
            e = np.sqrt(dx * dx + dy * dy)
            if code == 0:
                d = e
            elif code == 1:
                d = np.floor(e + 0.5)
            elif code == 2:
                r = np.sqrt((dx * dx + dy * dy) / 10.0)
                t = np.floor(r + 0.5)
                d = np.where(t < r, t + 1.0, t)
            else:
                d = np.ceil(e)
            d[i] = 0.0
        # sort by (distance, index); drop self (distance 0, lowest index among zeros is i
        # itself only when no coincident points -- mask explicitly to be safe)
        order = np.lexsort((idx, d))
        take = [j for j in order if j != i][:eff]
        lists[i, :] = take
    return NeighborList(alpha=alpha, lists=lists)


def parse_tsplib(source, metric_override: Metric | None = None, name: str | None = None) -> Instance:
    """Parse a TSPLIB-style file (EUC_2D / ATT / CEIL_2D, NODE_COORD_SECTION).

    The first listed node becomes the depot, the rest become cities in file
    order. `source` may be a string or a file-like object.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    lines = text.splitlines()

    header: dict[str, str] = {}
    coord_start = None
    for ln, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s:
            continue
        up = s.upper()
        if up.startswith("NODE_COORD_SECTION"):
            coord_start = ln
            break
        if up.startswith(("EDGE_WEIGHT_SECTION", "DISPLAY_DATA_SECTION")):
            raise ParseError(f"line {ln}: unsupported section before NODE_COORD_SECTION")
        if ":" in s:
            key, val = s.split(":", 1)
            header[key.strip().upper()] = val.strip()
        elif up == "EOF":
            break
        else:
            raise ParseError(f"line {ln}: malformed header line {s!r}")

    if coord_start is None:
        raise ParseError("line 1: missing NODE_COORD_SECTION")
    if "DIMENSION" not in header:
        raise ParseError("line 1: missing DIMENSION")
    try:
        dim = int(header["DIMENSION"])
    except ValueError:
        raise ParseError("line 1: DIMENSION is not an integer") from None
    if dim < 2:
        raise ParseError("line 1: DIMENSION must be >= 2 (depot plus at least one city)")

    ew = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if ew not in EDGE_WEIGHT_DEFAULTS:
        raise ParseError(f"line 1: unsupported EDGE_WEIGHT_TYPE {ew!r}")

    pts: list[tuple[float, float]] = []
    ln = coord_start
    for raw in lines[coord_start:]:
        ln += 1
        s = raw.strip()
        if not s:
            continue
        if s.upper() == "EOF":
            break
        parts = s.split()
        if len(parts) < 3:
            raise ParseError(f"line {ln}: expected 'index x y', got {s!r}")
        try:
            x, y = float(parts[-2]), float(parts[-1])
        except ValueError:
            raise ParseError(f"line {ln}: non-numeric coordinate in {s!r}") from None
        pts.append((x, y))
        if len(pts) == dim:
            break
    if len(pts) != dim:
        raise ParseError(f"line {ln}: DIMENSION is {dim} but only {len(pts)} coordinate lines found")

    metric = metric_override or EDGE_WEIGHT_DEFAULTS[ew]
    inst_name = name or header.get("NAME", "unnamed")
    return Instance(name=inst_name, depot=pts[0], cities=pts[1:], metric=metric)


def generate_random(n: int, width: float, seed: int) -> Instance:
    """Depot plus n cities sampled uniformly on [0, width]^2 (deterministic per seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if width <= 0:
        raise ValueError("width must be positive")
    rng = Rng(seed)
    pts = [(rng.uniform() * width, rng.uniform() * width) for _ in range(n + 1)]
    return Instance(
        name=f"rand-n{n}-s{seed}",
        depot=pts[0],
        cities=pts[1:],
        metric=Metric.REAL_EUCLIDEAN,
    )


def write_tsplib(inst: Instance) -> str:
    """Render an instance in the same TSPLIB subset the parser reads."""
    out = [
        f"NAME : {inst.name}",
        "TYPE : TSP",
        f"DIMENSION : {inst.num_vertices}",
        f"EDGE_WEIGHT_TYPE : {METRIC_TO_EDGE_WEIGHT[inst.metric]}",
        "NODE_COORD_SECTION",
    ]
    for i, (x, y) in enumerate(inst.coords, start=1):
        xs = repr(float(x))
        ys = repr(float(y))
        out.append(f"{i} {xs} {ys}")
    out.append("EOF")
    return "\n".join(out) + "\n"
