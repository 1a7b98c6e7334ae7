import json

import pytest

from wavefeas.exceptions import EmptySolvedByAll
from wavefeas.harness import bench_instance, run_bench, summarize, worker_count
from wavefeas.solvers import RunRecord, SolveConfig, two_stage_solve

ALGS = ("dr", "gcrm", "lt")


def _rec(iters, solved=True, stage1=10, alg="dr", seed=0):
    cost = {"dr": 1, "gcrm": 1, "lt": 2}[alg] + 1
    return RunRecord(solved, stage1, iters, 1e-10 if solved else 1.0,
                     1 + 2 * stage1 + cost * iters, seed, alg)


def _records(rows):
    """rows: list of per-instance tuples of (iters, solved)."""
    return {a: [_rec(r[i][0], r[i][1], alg=a, seed=k) for k, r in enumerate(rows)]
            for i, a in enumerate(ALGS)}


def test_single_instance_winner():
    stats = summarize(_records([((200, True), (40, True), (30, True))]))
    assert [stats.per_algorithm[a]["wins"] for a in ALGS] == [0, 0, 1]
    assert [stats.per_algorithm[a]["median"] for a in ALGS] == [200, 40, 30]
    assert stats.solved_by_all == 1 and stats.ties == 0


def test_partial_failure_shrinks_solved_by_all():
    stats = summarize(_records([((200, True), (40, True), (30, True)),
                                ((300, True), (20000, False), (35, True))]))
    assert stats.solved_by_all == 1
    assert stats.per_algorithm["gcrm"]["cases_solved"] == 1
    assert stats.per_algorithm["lt"]["cases_solved"] == 2


def test_ties_award_no_win():
    stats = summarize(_records([((50, True), (30, True), (30, True)),
                                ((50, True), (20, True), (30, True))]))
    assert stats.ties == 1
    assert [stats.per_algorithm[a]["wins"] for a in ALGS] == [0, 1, 0]
    assert sum(stats.per_algorithm[a]["wins"] for a in ALGS) + stats.ties == stats.solved_by_all


def test_quartiles_inclusive_linear():
    rows = [((v, True), (v, True), (v, True)) for v in (1, 2, 3, 4)]
    s = summarize(_records(rows)).per_algorithm["dr"]
    assert (s["Q1"], s["median"], s["Q3"], s["mean"]) == (1.75, 2.5, 3.25, 2.5)


def test_stage2_projection_evals():
    s = summarize(_records([((10, True), (10, True), (10, True))])).per_algorithm
    assert s["dr"]["median_stage2_projection_evals"] == 20
    assert s["lt"]["median_stage2_projection_evals"] == 30


def test_empty_solved_by_all():
    stats = summarize(_records([((10, False), (10, True), (10, True))]))
    assert stats.solved_by_all == 0 and not stats.stats_available
    assert stats.per_algorithm["dr"]["median"] is None
    assert stats.per_algorithm["gcrm"]["cases_solved"] == 1
    with pytest.raises(EmptySolvedByAll):
        stats.check()


def test_unequal_lengths_rejected():
    recs = _records([((1, True), (1, True), (1, True))])
    recs["dr"].append(_rec(3))
    with pytest.raises(ValueError):
        summarize(recs)


def test_bench_instance_shares_stage1(spec_card):
    recs = bench_instance(spec_card, 5)
    assert len({r.stage1_iters for r in recs}) == 1
    assert [r.algorithm for r in recs] == list(ALGS)
    # each branch equals a standalone two-stage run
    for r in recs:
        alone = two_stage_solve(SolveConfig(spec=spec_card, seed=5, algorithm=r.algorithm))
        assert alone.to_dict() == r.to_dict()


def test_bench_deterministic_and_worker_independent(spec_card, monkeypatch):
    monkeypatch.delenv("WAVEFEAS_THREADS", raising=False)
    a, _ = run_bench(spec_card, 6, base_seed=3, workers=1)
    b, _ = run_bench(spec_card, 6, base_seed=3, workers=1)
    c, _ = run_bench(spec_card, 6, base_seed=3, workers=2)
    ja = json.dumps(a.to_dict(), indent=2)
    assert ja == json.dumps(b.to_dict(), indent=2) == json.dumps(c.to_dict(), indent=2)
    d = a.to_dict()
    assert d["n_starts"] == 6 and d["base_seed"] == 3 and len(d["instances"]) == 6
    assert [inst["seed"] for inst in d["instances"]] == list(range(3, 9))
    for alg in ALGS:
        entry = d["algorithms"][alg]
        assert set(entry) >= {"cases_solved", "solved_by_all", "wins", "Q1", "mean", "Q3", "median"}
        assert d["solved_by_all"] <= entry["cases_solved"]


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("WAVEFEAS_THREADS", "2")
    assert worker_count(8) == 2
    assert worker_count(1) == 1
    monkeypatch.delenv("WAVEFEAS_THREADS")
    assert worker_count(3) == 3


def test_run_bench_rejects_empty(spec_card):
    with pytest.raises(ValueError):
        run_bench(spec_card, 0)
