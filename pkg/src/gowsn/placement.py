"""GO_HEURISTICS placement loop and the continuous uniform baseline.

The loop keeps drawing intersections with :func:`random_select` and occupies
each new one, until the connectivity probability meets the stopping rule.
That probability depends only on N, so the heuristics decide where nodes go
but never how many are placed.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from gowsn.analytics import StoppingRule, loop_state
from gowsn.errors import BoardExhausted, InvalidConfig, IterationCapExceeded
from gowsn.field_model import METRICS, Deployment, FieldSpec, GridBoard, axis_deltas, occupy
from gowsn.heuristics import DEFAULT_SMOOTHING, HeuristicSet, random_select

SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class PlacementConfig:
    stopping: StoppingRule = dc_field(default_factory=StoppingRule)
    max_iterations: int | None = None  # None -> 100 x intersection count
    seed: int = 0
    fig2_literal: bool = False
    smoothing: float = DEFAULT_SMOOTHING
    no_seed_node: bool = False
    metric: str = "planar"

    def __post_init__(self):
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidConfig(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 <= self.seed <= SEED_MAX:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.smoothing < 0:
            raise InvalidConfig(f"smoothing must be >= 0, got {self.smoothing}")
        if self.metric not in METRICS:
            raise InvalidConfig(f"metric must be one of {METRICS}, got {self.metric!r}")


class TraceEntry(NamedTuple):
    iteration: int
    n: int
    lam: float
    p: float
    row: int
    col: int
    skipped: bool


@dataclass(frozen=True)
class PlacementResult:
    deployment: Deployment
    n_final: int
    lambda_final: float
    p_final: float
    iterations: int
    trace: tuple[TraceEntry, ...] = ()
    initial_n: int = 0
    board: GridBoard | None = None

    def to_dict(self) -> dict:
        out = self.deployment.to_dict()
        out.update(
            n_final=self.n_final,
            lambda_final=self.lambda_final,
            p_final=self.p_final,
            iterations=self.iterations,
        )
        return out


def go_heuristics_place(
    field: FieldSpec, board: GridBoard, hs: HeuristicSet, cfg: PlacementConfig
) -> PlacementResult:
    if board.field != field:
        raise InvalidConfig("board was built for a different field")
    rng = np.random.default_rng(cfg.seed)
    order = sorted(board.closed)
    if cfg.no_seed_node:
        # literal bookkeeping: N counts one more node than the board holds
        n = len(board.closed) + 1
    else:
        if not board.closed:
            order.append(board.center())
            board = occupy(board, board.center())
        n = len(board.closed)

    cap = cfg.max_iterations if cfg.max_iterations is not None else 100 * board.size
    xy = np.empty((board.size, 2))
    for i, pt in enumerate(order):
        xy[i] = (pt.x_m, pt.y_m)
    k = len(order)

    # distance from every intersection to its nearest placed node
    lattice_xy = np.stack(np.meshgrid(np.arange(board.cols), np.arange(board.rows)), axis=-1) * board.pitch_m
    nearest = np.full((board.rows, board.cols), np.inf)
    for i in range(k):
        nearest = _update_nearest(nearest, lattice_xy, xy[i], field, cfg.metric)

    lam, p = loop_state(field, n)
    initial_n = n
    trace: list[TraceEntry] = []
    iteration = 0
    while not cfg.stopping.satisfied(p):
        if k == board.size:
            raise BoardExhausted(
                f"all {board.size} intersections occupied at N={n} with p={p:.6g}, "
                f"target {cfg.stopping.target:g}"
            )
        if iteration >= cap:
            raise IterationCapExceeded(f"stopping rule not met after {cap} iterations (N={n})")
        iteration += 1
        placed = Deployment(field, xy[:k], cfg.metric)
        current = random_select(
            board,
            hs,
            rng,
            placed=placed,
            smoothing=cfg.smoothing,
            fig2_literal=cfg.fig2_literal,
            nearest_grid=nearest,
        )
        if current in board.closed:
            trace.append(TraceEntry(iteration, n, lam, p, current.row, current.col, True))
            continue
        board = occupy(board, current)
        xy[k] = (current.x_m, current.y_m)
        nearest = _update_nearest(nearest, lattice_xy, xy[k], field, cfg.metric)
        k += 1
        n += 1
        lam, p = loop_state(field, n)
        trace.append(TraceEntry(iteration, n, lam, p, current.row, current.col, False))

    return PlacementResult(
        deployment=Deployment(field, xy[:k], cfg.metric),
        n_final=n,
        lambda_final=lam,
        p_final=p,
        iterations=iteration,
        trace=tuple(trace),
        initial_n=initial_n,
        board=board,
    )


def _update_nearest(nearest, lattice_xy, site, field, metric) -> np.ndarray:
    d = axis_deltas(lattice_xy, site, field, metric)
    return np.minimum(nearest, np.hypot(d[..., 0], d[..., 1]))


def uniform_points(rng: np.random.Generator, field: FieldSpec, n: int) -> np.ndarray:
    """``n`` i.i.d. uniform positions over the continuous field, shape (n, 2)."""
    return rng.random((n, 2)) * np.array([field.length_m, field.width_m])


def uniform_random_place(
    field: FieldSpec, n_nodes: int, seed: int = 0, metric: str = "planar"
) -> PlacementResult:
    if n_nodes < 1:
        raise InvalidConfig(f"n_nodes must be >= 1, got {n_nodes}")
    if not 0 <= seed <= SEED_MAX:
        raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {seed}")
    rng = np.random.default_rng(seed)
    dep = Deployment(field, uniform_points(rng, field, n_nodes), metric)
    lam, p = loop_state(field, n_nodes)
    return PlacementResult(dep, n_nodes, lam, p, iterations=0, initial_n=n_nodes)
