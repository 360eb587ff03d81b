import math

import numpy as np
import pytest

import golden
from gowsn.analytics import CoverageModel, StoppingRule, binomial_pmf, tv_distance
from gowsn.errors import BoardExhausted, InvalidConfig
from gowsn.field_model import FieldSpec, make_board
from gowsn.heuristics import HeuristicSet, builtin_catalog
from gowsn.montecarlo import (
    McConfig,
    McReport,
    ValidationSettings,
    binomial_std_error,
    compare_strategies,
    count_no_isolated,
    coverage_counts,
    mc_coverage_histogram,
    mc_no_isolated_probability,
    mc_shaping_curve,
    mc_two_node_contact,
    run_validation,
    trial_rng,
    two_node_contact_probability,
)
from gowsn.placement import PlacementConfig


@pytest.mark.parametrize(
    "kwargs",
    [dict(trials=0), dict(samples_per_trial=0), dict(metric="hex"), dict(master_seed=-1), dict(master_seed=2**64)],
)
def test_mc_config_validation(kwargs):
    with pytest.raises(InvalidConfig):
        McConfig(**kwargs)


def test_report_fields():
    rep = McReport.from_count(30, 100, 0.25)
    assert rep.estimate == 0.3
    assert rep.std_error == pytest.approx(math.sqrt(0.3 * 0.7 / 100))
    assert rep.abs_deviation == pytest.approx(0.05)
    assert binomial_std_error(0.0, 10) == 0.0


def test_trial_streams_depend_only_on_seed_and_index():
    a = trial_rng(5, 17).random(4)
    trial_rng(5, 3).random(100)
    assert np.array_equal(a, trial_rng(5, 17).random(4))
    assert not np.array_equal(a, trial_rng(6, 17).random(4))


def test_needs_two_nodes(benchmark_field):
    with pytest.raises(InvalidConfig):
        mc_no_isolated_probability(benchmark_field, 1, McConfig(10))
    with pytest.raises(InvalidConfig):
        mc_coverage_histogram(benchmark_field, 1, McConfig(10))


def test_two_node_toroidal_exact(benchmark_field):
    rep = mc_two_node_contact(benchmark_field, McConfig(20_000, metric="toroidal", master_seed=3))
    assert rep.analytic_reference == pytest.approx(golden.P_R_BENCH, rel=1e-15)
    assert rep.abs_deviation <= 3 * rep.std_error


def test_two_node_planar_formula():
    # independent check: plain numpy simulation of 10^6 point pairs in a 100 x 60 field
    field = FieldSpec(100, 60, 12)
    rng = np.random.default_rng(99)
    a = rng.random((1_000_000, 2)) * [100, 60]
    b = rng.random((1_000_000, 2)) * [100, 60]
    est = np.mean(np.hypot(*(a - b).T) <= 12)
    se = math.sqrt(est * (1 - est) / 1_000_000)
    assert abs(two_node_contact_probability(field, "planar") - est) <= 4 * se
    rep = mc_two_node_contact(field, McConfig(20_000, metric="planar", master_seed=1))
    assert rep.abs_deviation <= 3 * rep.std_error


def test_whole_torus_in_range():
    field = FieldSpec(100, 100, 71)  # 71 > half the diagonal
    rep = mc_no_isolated_probability(field, 5, McConfig(300))
    assert rep.estimate == 1.0 and rep.std_error == 0.0


def test_workers_do_not_change_results(benchmark_field):
    cfg = McConfig(64, samples_per_trial=20, master_seed=12)
    assert count_no_isolated(benchmark_field, 300, cfg, workers=1) == count_no_isolated(benchmark_field, 300, cfg, workers=4)
    np.testing.assert_array_equal(
        coverage_counts(benchmark_field, 200, cfg, workers=1), coverage_counts(benchmark_field, 200, cfg, workers=3)
    )


def test_histogram_normalized(benchmark_field):
    cfg = McConfig(50, samples_per_trial=40)
    counts = coverage_counts(benchmark_field, 300, cfg)
    assert counts.sum() == 50 * 40
    hist = mc_coverage_histogram(benchmark_field, 300, cfg)
    assert len(hist) == 300
    assert math.fsum(hist) == pytest.approx(1.0, abs=1e-12)


def test_vanishing_discs_put_all_mass_at_zero():
    field = FieldSpec(100, 100, 1e-6)
    hist = mc_coverage_histogram(field, 100, McConfig(20, samples_per_trial=50))
    assert hist[0] == 1.0 and hist[1:].sum() == 0


def test_histogram_tv_shrinks_with_samples(benchmark_field):
    ref = binomial_pmf(CoverageModel.build(1000, 7, 100))
    small = tv_distance(mc_coverage_histogram(benchmark_field, 1000, McConfig(10, 100, master_seed=4)), ref)
    large = tv_distance(mc_coverage_histogram(benchmark_field, 1000, McConfig(1000, 100, master_seed=4)), ref)
    assert large < small
    assert large < 0.02


def test_validation_small_run_passes(benchmark_field):
    settings = ValidationSettings(eq2_n=200, coverage_n=300, two_node_trials=2000)
    report = run_validation(benchmark_field, McConfig(300, 20), settings)
    assert set(report["checks"]) == {"eq2", "two_node", "eq4_tv", "eq6_tv", "eq4_eq6_tv"}
    assert report["passed"], report["checks"]
    assert report["eq2"]["trials"] == 300
    assert [r["N"] for r in report["shaping_curve"]] == list(settings.shaping_n)
    assert set(report["eq2"]) == {"estimate", "std_error", "trials", "analytic_reference", "abs_deviation"}


def test_validation_single_trial_passes(benchmark_field):
    settings = ValidationSettings(two_node_trials=1)
    report = run_validation(benchmark_field, McConfig(1, 100), settings)
    assert report["passed"], report["checks"]


def test_validation_negative_control(benchmark_field):
    settings = ValidationSettings(eq2_n=200, coverage_n=300, two_node_trials=2000)
    report = run_validation(benchmark_field, McConfig(300, 20), settings, reference_offset=0.4)
    assert not report["passed"]
    assert not report["checks"]["eq2"]["pass"]


def test_compare_self_is_identical(benchmark_field, benchmark_board):
    rep = compare_strategies(benchmark_field, benchmark_board, builtin_catalog(),
                             PlacementConfig(StoppingRule.paper_literal(0.1)), 3, baseline="heuristic")
    assert rep.summary["heuristic"] == rep.summary["heuristic_self"]


def test_compare_small_run(benchmark_field, benchmark_board):
    cfg = PlacementConfig(StoppingRule.paper_literal(0.1), seed=8)
    rep = compare_strategies(benchmark_field, benchmark_board, builtin_catalog(), cfg, 4)
    assert [(r.strategy, r.trial) for r in rep.records] == [
        (s, t) for t in range(4) for s in ("heuristic", "uniform")
    ]
    heur = [r for r in rep.records if r.strategy == "heuristic"]
    assert all(r.min_pairwise_m >= 3.5 - 1e-12 for r in heur)
    again = compare_strategies(benchmark_field, benchmark_board, builtin_catalog(), cfg, 4)
    assert again == rep


def test_compare_dispersion_only_spreads_nodes(benchmark_field, benchmark_board):
    hs = HeuristicSet(tuple(h for h in builtin_catalog().heuristics if h.name == "dispersion"))
    rep = compare_strategies(benchmark_field, benchmark_board, hs, PlacementConfig(StoppingRule.paper_literal(0.1)), 5)
    assert rep.summary["heuristic"].mean_min_pairwise_m >= rep.summary["uniform"].mean_min_pairwise_m


def test_compare_propagates_exhaustion(benchmark_field):
    with pytest.raises(BoardExhausted):
        compare_strategies(benchmark_field, make_board(benchmark_field, 50), builtin_catalog(), PlacementConfig(), 2)


def test_shaping_overlay_tracks_closed_form(benchmark_field):
    rows = mc_shaping_curve(benchmark_field, (50, 200), McConfig(200, 50, master_seed=5))
    assert [r["N"] for r in rows] == [50, 200]
    for r in rows:
        assert abs(r["mc"] - r["analytic"]) <= 4 * max(r["std_error"], 1e-3)
