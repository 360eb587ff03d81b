"""Go-inspired scoring of free board intersections and the weighted random draw
that picks where the next node goes.

A scorer receives a :class:`Candidates` batch and returns one score in [0, 1]
per candidate. Scores are combined as a weighted sum, and the next point is
drawn with probability proportional to ``composite + smoothing``.

Built-in heuristics:

``star_point``
    1 on the nine star points (hoshi) scaled to the board, falling off
    linearly with lattice distance.
``edge_line``
    Go opening doctrine: 0 on the first line, best on the third and fourth
    lines from the nearest border, tapering towards the centre.
``dispersion``
    Distance to the nearest placed node divided by the field diagonal.
``attachment``
    1 if a placed node is within range (the network stays connected), else 0.

``dispersion`` and ``attachment`` return 0.5 while nothing is placed.

Custom scorers can be wrapped with :meth:`Heuristic.pointwise` (one Python
call per candidate) or written against :class:`Candidates` directly, then
registered with :func:`register`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from gowsn.errors import BoardExhausted, InvalidConfig, InvalidParams
from gowsn.field_model import Deployment, GridBoard, GridPoint, nearest_distances_to

DEFAULT_SMOOTHING = 0.01


class Candidates:
    """A batch of intersections to score, in row-major order."""

    def __init__(
        self,
        board: GridBoard,
        placed: Deployment,
        rows: np.ndarray,
        cols: np.ndarray,
        nearest_grid: np.ndarray | None = None,
    ):
        self.board = board
        self.placed = placed
        self.rows = rows
        self.cols = cols
        # optional (rows, cols) array of distances to the nearest placed node,
        # maintained incrementally by the placement loop
        self._nearest_grid = nearest_grid

    def __len__(self):
        return len(self.rows)

    @cached_property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.cols, self.rows]).astype(float) * self.board.pitch_m

    @cached_property
    def nearest_m(self) -> np.ndarray:
        """Distance from each candidate to the closest placed node (inf if none)."""
        if self._nearest_grid is not None:
            return self._nearest_grid[self.rows, self.cols]
        return nearest_distances_to(self.xy, self.placed.nodes, self.placed.field, self.placed.metric)

    def points(self) -> list[GridPoint]:
        return [self.board.point(int(r), int(c)) for r, c in zip(self.rows, self.cols)]


Scorer = Callable[[Candidates], np.ndarray]


@dataclass(frozen=True)
class Heuristic:
    name: str
    weight: float
    scorer: Scorer = dc_field(compare=False, repr=False)

    def __post_init__(self):
        if not self.name:
            raise InvalidParams("heuristic name must be non-empty")
        if not (self.weight >= 0 and math.isfinite(self.weight)):
            raise InvalidParams(f"heuristic {self.name!r}: weight must be finite and >= 0, got {self.weight}")

    @classmethod
    def pointwise(
        cls, name: str, fn: Callable[[GridBoard, Deployment, GridPoint], float], weight: float = 1.0
    ) -> Heuristic:
        def scorer(cands: Candidates) -> np.ndarray:
            return np.array([fn(cands.board, cands.placed, p) for p in cands.points()], dtype=float)

        return cls(name, weight, scorer)

    def with_weight(self, weight: float) -> Heuristic:
        return Heuristic(self.name, weight, self.scorer)

    def score(self, cands: Candidates) -> np.ndarray:
        s = np.asarray(self.scorer(cands), dtype=float).reshape(-1)
        if s.shape != (len(cands),) or not np.all(np.isfinite(s)):
            raise InvalidParams(f"heuristic {self.name!r} returned malformed scores")
        if s.size and (s.min() < 0 or s.max() > 1):
            raise InvalidParams(f"heuristic {self.name!r} produced scores outside [0, 1]")
        return s


@dataclass(frozen=True)
class HeuristicSet:
    heuristics: tuple[Heuristic, ...] = ()
    combine: str = "weighted_sum"

    def __post_init__(self):
        object.__setattr__(self, "heuristics", tuple(self.heuristics))
        names = [h.name for h in self.heuristics]
        if len(set(names)) != len(names):
            raise InvalidParams(f"heuristic names must be unique, got {names}")
        if self.combine != "weighted_sum":
            raise InvalidParams(f"unsupported combine mode {self.combine!r}")

    @property
    def names(self) -> list[str]:
        return [h.name for h in self.heuristics]

    def __len__(self):
        return len(self.heuristics)

    def scaled(self, factor: float) -> HeuristicSet:
        return HeuristicSet(tuple(h.with_weight(h.weight * factor) for h in self.heuristics), self.combine)

    def composite(self, cands: Candidates) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        total = np.zeros(len(cands))
        parts = {}
        for h in self.heuristics:
            parts[h.name] = h.score(cands)
            if h.weight:
                total += h.weight * parts[h.name]
        return total, parts


@dataclass(frozen=True)
class ScoredCandidate:
    point: GridPoint
    composite_score: float
    per_heuristic: Mapping[str, float]


# -- built-in scorers ---------------------------------------------------------

_STAR_FRACTIONS = (3 / 18, 9 / 18, 15 / 18)


def star_lines(n_lines: int) -> list[int]:
    """Indices of the three star lines on an axis with ``n_lines`` lines."""
    return sorted({math.floor(f * (n_lines - 1) + 0.5) for f in _STAR_FRACTIONS})


@lru_cache(maxsize=32)
def _star_grid(rows: int, cols: int) -> np.ndarray:
    r = np.arange(rows, dtype=float)[:, None]
    c = np.arange(cols, dtype=float)[None, :]
    dr = np.abs(r[..., None] - np.array(star_lines(rows), dtype=float)).min(axis=-1)
    dc = np.abs(c[..., None] - np.array(star_lines(cols), dtype=float)).min(axis=-1)
    decay = max((min(rows, cols) - 1) / 6, 1.0)
    grid = np.clip(1.0 - np.hypot(dr, dc) / decay, 0.0, 1.0)
    grid.setflags(write=False)
    return grid


@lru_cache(maxsize=32)
def _edge_grid(rows: int, cols: int) -> np.ndarray:
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    k = np.minimum(np.minimum(r, rows - 1 - r), np.minimum(c, cols - 1 - c)).astype(float)
    grid = np.maximum(0.25, 1.0 - 0.25 * (k - 3))
    grid[k <= 3] = 1.0
    grid[k == 1] = 0.5
    grid[k == 0] = 0.0
    grid.setflags(write=False)
    return grid


def star_point(cands: Candidates) -> np.ndarray:
    return _star_grid(cands.board.rows, cands.board.cols)[cands.rows, cands.cols]


def edge_line(cands: Candidates) -> np.ndarray:
    return _edge_grid(cands.board.rows, cands.board.cols)[cands.rows, cands.cols]


def dispersion(cands: Candidates) -> np.ndarray:
    if len(cands.placed) == 0:
        return np.full(len(cands), 0.5)
    return np.clip(cands.nearest_m / cands.placed.field.diagonal_m, 0.0, 1.0)


def attachment(cands: Candidates) -> np.ndarray:
    if len(cands.placed) == 0:
        return np.full(len(cands), 0.5)
    return (cands.nearest_m <= cands.placed.field.range_m).astype(float)


_CATALOG: dict[str, Scorer] = {
    "star_point": star_point,
    "edge_line": edge_line,
    "dispersion": dispersion,
    "attachment": attachment,
}


def register(name: str, scorer: Scorer) -> None:
    """Make a custom scorer addressable by name from run configs."""
    if name in _CATALOG:
        raise InvalidParams(f"heuristic {name!r} is already registered")
    _CATALOG[name] = scorer


def available() -> list[str]:
    return list(_CATALOG)


def builtin_catalog() -> HeuristicSet:
    return HeuristicSet(tuple(Heuristic(name, 1.0, _CATALOG[name]) for name in
                              ("star_point", "edge_line", "dispersion", "attachment")))


def from_config(entries: Iterable[Mapping]) -> HeuristicSet:
    """Build a set from ``[{"name": ..., "weight": ...}, ...]``."""
    out = []
    for entry in entries:
        name = entry["name"]
        if name not in _CATALOG:
            raise InvalidConfig(f"unknown heuristic {name!r}; available: {', '.join(_CATALOG)}")
        out.append(Heuristic(name, float(entry.get("weight", 1.0)), _CATALOG[name]))
    return HeuristicSet(tuple(out))


# -- scoring and selection ------------------------------------------------------


def placed_from_board(board: GridBoard, metric: str = "planar") -> Deployment:
    return Deployment(board.field, board.closed_xy(), metric)


def _candidates(
    board: GridBoard, placed: Deployment, include_occupied: bool, nearest_grid: np.ndarray | None = None
) -> Candidates:
    if include_occupied:
        mask = np.ones((board.rows, board.cols), dtype=bool)
    else:
        mask = ~board.occupied_mask()
    rows, cols = np.nonzero(mask)
    return Candidates(board, placed, rows, cols, nearest_grid)


def score_candidates(
    board: GridBoard, placed: Deployment, hs: HeuristicSet, include_occupied: bool = False
) -> list[ScoredCandidate]:
    cands = _candidates(board, placed, include_occupied)
    if len(cands) == 0:
        raise BoardExhausted("no free intersections left to score")
    total, parts = hs.composite(cands)
    return [
        ScoredCandidate(p, float(total[i]), {name: float(s[i]) for name, s in parts.items()})
        for i, p in enumerate(cands.points())
    ]


def random_select(
    board: GridBoard,
    hs: HeuristicSet,
    rng: np.random.Generator,
    *,
    placed: Deployment | None = None,
    smoothing: float = DEFAULT_SMOOTHING,
    fig2_literal: bool = False,
    nearest_grid: np.ndarray | None = None,
) -> GridPoint:
    """Draw the next intersection with probability proportional to composite score + smoothing.

    Only free intersections are eligible unless ``fig2_literal`` is set, in
    which case every intersection is, and the caller must skip occupied draws.
    ``nearest_grid`` lets a caller that tracks distances to ``placed`` skip
    the KD-tree query.
    """
    if smoothing < 0:
        raise InvalidParams(f"smoothing must be >= 0, got {smoothing}")
    if placed is None:
        placed = placed_from_board(board)
    cands = _candidates(board, placed, fig2_literal, nearest_grid)
    if len(cands) == 0 or len(board.closed) == board.size:
        raise BoardExhausted("every intersection is occupied")
    weights = hs.composite(cands)[0] + smoothing
    total = float(weights.sum())
    u = rng.random()
    if total <= 0:
        idx = min(int(u * len(cands)), len(cands) - 1)
    else:
        cdf = np.cumsum(weights)
        idx = min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), len(cands) - 1)
    return board.point(int(cands.rows[idx]), int(cands.cols[idx]))
