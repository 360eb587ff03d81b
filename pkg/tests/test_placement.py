import numpy as np
import pytest
from scipy import stats

import golden
from gowsn import analytics
from gowsn.analytics import StoppingRule, connectivity_probability, density, DensityParams
from gowsn.errors import BoardExhausted, InvalidConfig, IterationCapExceeded
from gowsn.field_model import FieldSpec, count_neighbors, is_isolated, make_board, occupy
from gowsn.heuristics import HeuristicSet, builtin_catalog
from gowsn.placement import PlacementConfig, go_heuristics_place, uniform_random_place

LOW_TARGET = StoppingRule.paper_literal(0.1)
COMPLEMENT = StoppingRule.error_complement(0.1)


@pytest.fixture(scope="module")
def default_run():
    field = FieldSpec(100, 100, 7)
    return go_heuristics_place(field, make_board(field, 3.5), builtin_catalog(), PlacementConfig(seed=11))


@pytest.mark.parametrize("rule, want", [(LOW_TARGET, golden.N_STAR_PAPER_LITERAL),
                                        (COMPLEMENT, golden.N_STAR_ERROR_COMPLEMENT)])
def test_n_final_is_stopping_n(benchmark_field, benchmark_board, rule, want):
    for seed in (0, 1, 2**63):
        res = go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(), PlacementConfig(rule, seed=seed))
        assert res.n_final == want == analytics.stopping_n(benchmark_field, rule)
        assert rule.satisfied(res.p_final)


def test_result_invariants(default_run):
    res = default_run
    assert res.initial_n == 1
    assert res.n_final == len(res.deployment) == len(res.board.closed)
    assert res.iterations == res.n_final - res.initial_n == len(res.trace)
    # distinct lattice sites
    assert len({tuple(p) for p in res.deployment.nodes}) == res.n_final
    assert {(p.x_m, p.y_m) for p in res.board.closed} == {tuple(p) for p in res.deployment.nodes}
    # the seed node sits at the board centre
    assert tuple(res.deployment.nodes[0]) == (49.0, 49.0)


def test_trace_monotone_and_replayable(default_run):
    field = FieldSpec(100, 100, 7)
    prev_iter, prev_n = 0, default_run.initial_n
    for entry in default_run.trace:
        assert entry.iteration > prev_iter
        assert not entry.skipped and entry.n == prev_n + 1
        lam = density(DensityParams.for_field(field, entry.n))
        assert entry.lam == pytest.approx(lam, rel=1e-12)
        assert entry.p == pytest.approx(connectivity_probability(lam, entry.n), rel=1e-12)
        prev_iter, prev_n = entry.iteration, entry.n
    last = default_run.trace[-1]
    assert (last.n, last.lam, last.p) == (default_run.n_final, default_run.lambda_final, default_run.p_final)


def test_deterministic_per_seed(benchmark_field, benchmark_board):
    cfg = PlacementConfig(LOW_TARGET, seed=42)
    a = go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(), cfg)
    b = go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(), cfg)
    assert a.deployment == b.deployment and a.trace == b.trace
    c = go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(), PlacementConfig(LOW_TARGET, seed=43))
    assert c.n_final == a.n_final
    assert not np.array_equal(c.deployment.nodes, a.deployment.nodes)


def test_already_satisfied_runs_no_loop(benchmark_field, benchmark_board):
    p1 = analytics.loop_state(benchmark_field, 1)[1]
    res = go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(),
                              PlacementConfig(StoppingRule.paper_literal(p1 * 0.5)))
    assert res.n_final == 1 and res.iterations == 0 and res.trace == ()


def test_tiny_board_exhausts(benchmark_field):
    with pytest.raises(BoardExhausted):
        go_heuristics_place(benchmark_field, make_board(benchmark_field, 50), builtin_catalog(),
                            PlacementConfig(COMPLEMENT))


def test_literal_mode_records_skips(benchmark_field):
    board = make_board(benchmark_field, 100 / 18)  # 361 intersections
    res = go_heuristics_place(benchmark_field, board, HeuristicSet(),
                              PlacementConfig(LOW_TARGET, seed=5, fig2_literal=True))
    assert res.n_final == golden.N_STAR_PAPER_LITERAL
    skipped = [t for t in res.trace if t.skipped]
    assert skipped, "with 321 of 361 points filled some draws must hit occupied points"
    assert res.iterations == len(res.trace) > res.n_final - res.initial_n
    ns = [t.n for t in res.trace]
    assert ns == sorted(ns)
    for t in skipped:
        assert t.n == ns[res.trace.index(t)]


def test_iteration_cap(benchmark_field, benchmark_board):
    with pytest.raises(IterationCapExceeded):
        go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(),
                            PlacementConfig(LOW_TARGET, max_iterations=10))


def test_no_seed_node_bookkeeping(benchmark_field, benchmark_board):
    res = go_heuristics_place(benchmark_field, benchmark_board, builtin_catalog(),
                              PlacementConfig(LOW_TARGET, no_seed_node=True))
    assert res.initial_n == 1
    assert res.n_final == golden.N_STAR_PAPER_LITERAL
    assert len(res.board.closed) == len(res.deployment) == res.n_final - 1


def test_partially_occupied_start(benchmark_field, benchmark_board):
    board = benchmark_board
    for cell in [(0, 0), (5, 5), (10, 20)]:
        board = occupy(board, board.point(*cell))
    res = go_heuristics_place(benchmark_field, board, builtin_catalog(), PlacementConfig(LOW_TARGET))
    assert res.initial_n == 3 and res.n_final == golden.N_STAR_PAPER_LITERAL
    assert res.iterations == res.n_final - 3


def test_config_validation(benchmark_field, benchmark_board):
    with pytest.raises(InvalidConfig):
        PlacementConfig(max_iterations=0)
    with pytest.raises(InvalidConfig):
        PlacementConfig(seed=-1)
    with pytest.raises(InvalidConfig):
        PlacementConfig(seed=2**64)
    with pytest.raises(InvalidConfig):
        go_heuristics_place(FieldSpec(100, 100, 8), benchmark_board, builtin_catalog(), PlacementConfig())


def test_uniform_baseline(benchmark_field):
    one = uniform_random_place(benchmark_field, 1, seed=9)
    assert len(one.deployment) == 1 and is_isolated(one.deployment, 0, 7)
    a = uniform_random_place(benchmark_field, 300, seed=3)
    b = uniform_random_place(benchmark_field, 300, seed=3)
    assert a.deployment == b.deployment
    assert a.n_final == 300 and a.iterations == 0
    # continuous, not lattice-constrained
    assert not np.allclose(a.deployment.nodes % 3.5, 0)
    with pytest.raises(InvalidConfig):
        uniform_random_place(benchmark_field, 0)


@pytest.mark.slow
def test_uniform_mean_neighbor_count(benchmark_field):
    means = []
    for seed in range(100):
        dep = uniform_random_place(benchmark_field, 500, seed=seed, metric="toroidal").deployment
        means.append(np.mean([count_neighbors(dep, i, 7) for i in range(500)]))
    means = np.array(means)
    se = means.std(ddof=1) / np.sqrt(len(means))
    assert abs(means.mean() - golden.DENSITY_500 * 499 / 500) <= 4 * se
    assert abs(means.mean() - golden.DENSITY_500) < 0.05


def literal_empty_set_cell_pvalue(runs=3000):
    """Chi-square p-value for the cells picked by literal-mode placement with no heuristics.

    Field 100 m, R = 40 m, pitch 25 m (5 x 5 board); paper-literal(0.5) stops at N = 4,
    so each run picks three cells besides the centre seed.
    """
    field = FieldSpec(100, 100, 40)
    board = make_board(field, 25)
    counts = np.zeros(25, dtype=int)
    for seed in range(runs):
        res = go_heuristics_place(field, board, HeuristicSet(),
                                  PlacementConfig(StoppingRule.paper_literal(0.5), seed=seed, fig2_literal=True))
        for t in res.trace:
            if not t.skipped:
                counts[t.row * 5 + t.col] += 1
    centre = 2 * 5 + 2
    assert counts[centre] == 0
    return stats.chisquare(np.delete(counts, centre)).pvalue


def test_literal_empty_set_is_lattice_uniform():
    assert analytics.stopping_n(FieldSpec(100, 100, 40), StoppingRule.paper_literal(0.5)) == 4
    assert literal_empty_set_cell_pvalue() > 0.001
