"""Field geometry: the rectangular sensor field, the Go-style board of candidate
intersections laid over it, and deployments of nodes with neighbor queries.

Two metrics are supported. ``planar`` is plain Euclidean distance inside the
rectangle. ``toroidal`` wraps both axes, which removes edge effects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from gowsn.errors import (
    AlreadyOccupied,
    IndexOutOfRange,
    InvalidParams,
    NonPositivePitch,
    NotAnIntersection,
    PitchExceedsField,
)

METRICS = ("planar", "toroidal")

# Relative slack when flooring field/pitch, so 100 / (100/19) still gives 19.
_LATTICE_EPS = 1e-9

# below this many points a dense distance matrix beats building a KD-tree
_BRUTE_FORCE_MAX = 48


@dataclass(frozen=True)
class FieldSpec:
    length_m: float
    width_m: float
    range_m: float

    def __post_init__(self):
        for name in ("length_m", "width_m", "range_m"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidParams(f"{name} must be a positive finite number, got {value!r}")
        if self.range_m >= min(self.length_m, self.width_m):
            raise InvalidParams(
                f"range_m={self.range_m} must be smaller than the shorter field side "
                f"({min(self.length_m, self.width_m)})"
            )

    def area(self) -> float:
        return self.length_m * self.width_m

    @property
    def is_square(self) -> bool:
        return self.length_m == self.width_m

    @property
    def diagonal_m(self) -> float:
        return math.hypot(self.length_m, self.width_m)

    def to_dict(self) -> dict:
        return {"length_m": self.length_m, "width_m": self.width_m, "range_m": self.range_m}


@dataclass(frozen=True, order=True)
class GridPoint:
    row: int
    col: int
    x_m: float = dc_field(compare=False)
    y_m: float = dc_field(compare=False)


@dataclass(frozen=True)
class GridBoard:
    """Square lattice of pitch ``pitch_m`` over the field, borders included.

    ``closed`` holds the occupied intersections. Boards are immutable;
    :func:`occupy` returns a new board.
    """

    field: FieldSpec
    pitch_m: float
    rows: int
    cols: int
    closed: frozenset = frozenset()

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def point(self, row: int, col: int) -> GridPoint:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise NotAnIntersection(f"({row}, {col}) is outside a {self.rows}x{self.cols} board")
        return GridPoint(row, col, col * self.pitch_m, row * self.pitch_m)

    def intersections(self) -> list[GridPoint]:
        """All intersections in row-major order."""
        return [self.point(r, c) for r in range(self.rows) for c in range(self.cols)]

    def center(self) -> GridPoint:
        return self.point(self.rows // 2, self.cols // 2)

    def is_intersection(self, point: GridPoint) -> bool:
        if not (0 <= point.row < self.rows and 0 <= point.col < self.cols):
            return False
        return math.isclose(point.x_m, point.col * self.pitch_m, abs_tol=1e-9) and math.isclose(
            point.y_m, point.row * self.pitch_m, abs_tol=1e-9
        )

    def occupied_mask(self) -> np.ndarray:
        mask = np.zeros((self.rows, self.cols), dtype=bool)
        for p in self.closed:
            mask[p.row, p.col] = True
        return mask

    def closed_xy(self) -> np.ndarray:
        """Coordinates of occupied intersections, row-major, shape (k, 2)."""
        pts = sorted(self.closed)
        return np.array([(p.x_m, p.y_m) for p in pts], dtype=float).reshape(-1, 2)


def make_board(field: FieldSpec, pitch_m: float) -> GridBoard:
    if not pitch_m > 0:
        raise NonPositivePitch(f"pitch_m must be positive, got {pitch_m!r}")
    if pitch_m > min(field.length_m, field.width_m):
        raise PitchExceedsField(
            f"pitch_m={pitch_m} exceeds the shorter field side {min(field.length_m, field.width_m)}"
        )
    rows = math.floor(field.width_m / pitch_m * (1 + _LATTICE_EPS)) + 1
    cols = math.floor(field.length_m / pitch_m * (1 + _LATTICE_EPS)) + 1
    return GridBoard(field=field, pitch_m=float(pitch_m), rows=rows, cols=cols)


def free_points(board: GridBoard) -> set[GridPoint]:
    return set(board.intersections()) - board.closed


def occupy(board: GridBoard, point: GridPoint) -> GridBoard:
    if not board.is_intersection(point):
        raise NotAnIntersection(f"{point} is not an intersection of the board")
    # normalize coordinates so closed never holds near-duplicates
    point = board.point(point.row, point.col)
    if point in board.closed:
        raise AlreadyOccupied(f"intersection ({point.row}, {point.col}) is already occupied")
    return GridBoard(board.field, board.pitch_m, board.rows, board.cols, board.closed | {point})


def _check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise InvalidParams(f"metric must be one of {METRICS}, got {metric!r}")
    return metric


class Deployment:
    """An ordered set of node positions in a field.

    ``nodes`` is a read-only float array of shape (N, 2) holding (x_m, y_m).
    """

    __slots__ = ("field", "nodes", "metric")

    def __init__(self, field: FieldSpec, nodes: Iterable[Sequence[float]] | np.ndarray, metric: str = "planar"):
        arr = np.array(nodes, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(arr)):
            raise InvalidParams("node coordinates must be finite")
        tol = 1e-9
        if arr.size and (
            arr[:, 0].min() < -tol
            or arr[:, 1].min() < -tol
            or arr[:, 0].max() > field.length_m + tol
            or arr[:, 1].max() > field.width_m + tol
        ):
            raise InvalidParams("node positions must lie inside the field")
        arr.setflags(write=False)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nodes", arr)
        object.__setattr__(self, "metric", _check_metric(metric))

    def __setattr__(self, name, value):
        raise AttributeError("Deployment is immutable")

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, Deployment):
            return NotImplemented
        return (
            self.field == other.field
            and self.metric == other.metric
            and np.array_equal(self.nodes, other.nodes)
        )

    def __repr__(self):
        return f"Deployment(n={len(self)}, metric={self.metric!r}, field={self.field})"

    def with_metric(self, metric: str) -> Deployment:
        return Deployment(self.field, self.nodes, metric)

    def to_dict(self) -> dict:
        return {
            "field": self.field.to_dict(),
            "metric": self.metric,
            "nodes": [[float(x), float(y)] for x, y in self.nodes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Deployment:
        try:
            field = FieldSpec(**data["field"])
            return cls(field, data.get("nodes", []), data.get("metric", "planar"))
        except (KeyError, TypeError) as exc:
            raise InvalidParams(f"malformed deployment document: {exc}") from exc


def axis_deltas(a: np.ndarray, b: np.ndarray, field: FieldSpec, metric: str) -> np.ndarray:
    """Per-axis absolute separations between broadcastable point arrays (..., 2)."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if metric == "toroidal":
        box = np.array([field.length_m, field.width_m])
        d = np.minimum(d, box - d)
    return d


def distance(a, b, field: FieldSpec, metric: str = "planar") -> float:
    d = axis_deltas(np.asarray(a), np.asarray(b), field, _check_metric(metric))
    return float(np.hypot(d[..., 0], d[..., 1]))


def _check_index(dep: Deployment, index: int) -> None:
    if not 0 <= index < len(dep):
        raise IndexOutOfRange(f"node index {index} out of range for {len(dep)} nodes")


def count_neighbors(dep: Deployment, index: int, radius_m: float) -> int:
    """Number of other nodes within ``radius_m`` of node ``index``."""
    _check_index(dep, index)
    if not radius_m > 0:
        raise InvalidParams(f"radius_m must be positive, got {radius_m!r}")
    d = axis_deltas(dep.nodes, dep.nodes[index], dep.field, dep.metric)
    within = d[:, 0] ** 2 + d[:, 1] ** 2 <= radius_m * radius_m
    return int(within.sum()) - 1


def is_isolated(dep: Deployment, index: int, radius_m: float) -> bool:
    return count_neighbors(dep, index, radius_m) == 0


def _tree(points: np.ndarray, field: FieldSpec, metric: str) -> tuple[cKDTree, np.ndarray]:
    if metric == "toroidal":
        box = np.array([field.length_m, field.width_m])
        pts = np.mod(points, box)
        # np.mod can return the box edge itself for tiny negatives
        pts[pts >= box] = 0.0
        return cKDTree(pts, boxsize=box), pts
    return cKDTree(points), points


def nearest_neighbor_distances(
    points: np.ndarray, field: FieldSpec, metric: str = "planar"
) -> np.ndarray:
    """Distance from each point to its nearest other point (inf when alone)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) < 2:
        return np.full(len(points), np.inf)
    if len(points) <= _BRUTE_FORCE_MAX:
        d = axis_deltas(points[:, None, :], points[None, :, :], field, _check_metric(metric))
        sq = d[..., 0] ** 2 + d[..., 1] ** 2
        np.fill_diagonal(sq, np.inf)
        return np.sqrt(sq.min(axis=1))
    tree, pts = _tree(points, field, _check_metric(metric))
    dist, _ = tree.query(pts, k=2)
    return dist[:, 1]


def nearest_distances_to(
    queries: np.ndarray, sites: np.ndarray, field: FieldSpec, metric: str = "planar"
) -> np.ndarray:
    """Distance from each query point to the closest site (inf without sites)."""
    queries = np.asarray(queries, dtype=float).reshape(-1, 2)
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(sites) == 0:
        return np.full(len(queries), np.inf)
    tree, _ = _tree(sites, field, _check_metric(metric))
    if metric == "toroidal":
        box = np.array([field.length_m, field.width_m])
        queries = np.mod(queries, box)
        queries[queries >= box] = 0.0
    dist, _ = tree.query(queries, k=1)
    return dist


def covering_counts(
    queries: np.ndarray, sites: np.ndarray, field: FieldSpec, radius_m: float, metric: str = "planar"
) -> np.ndarray:
    """For each query point, how many sites lie within ``radius_m``."""
    queries = np.asarray(queries, dtype=float).reshape(-1, 2)
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(sites) == 0:
        return np.zeros(len(queries), dtype=int)
    tree, _ = _tree(sites, field, _check_metric(metric))
    if metric == "toroidal":
        box = np.array([field.length_m, field.width_m])
        queries = np.mod(queries, box)
        queries[queries >= box] = 0.0
    return np.asarray(tree.query_ball_point(queries, r=radius_m, return_length=True), dtype=int)


def min_pairwise_distance(dep: Deployment) -> float:
    if len(dep) < 2:
        return math.inf
    return float(nearest_neighbor_distances(dep.nodes, dep.field, dep.metric).min())


def all_isolated_flags(dep: Deployment, radius_m: float) -> np.ndarray:
    """Boolean array, True where the node has no neighbor within ``radius_m``."""
    return nearest_neighbor_distances(dep.nodes, dep.field, dep.metric) > radius_m
