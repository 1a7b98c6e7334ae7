"""Benchmark orchestration: shared stage 1, three stage-2 branches, statistics."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import os

import numpy as np

from .exceptions import EmptySolvedByAll
from .solvers import (
    ALGORITHMS,
    COLINEAR_TOL,
    SolveConfig,
    finish_record,
    get_problem,
    initial_point,
    run_stage1,
    run_stage2,
    StageResult,
)

__all__ = ["BenchStats", "bench_instance", "run_bench", "summarize", "worker_count"]

logger = logging.getLogger(__name__)

THREADS_ENV = "WAVEFEAS_THREADS"


def worker_count(requested=None):
    """Number of worker processes, capped by ``$WAVEFEAS_THREADS`` when set."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def bench_instance(spec, seed, tol=1e-9, stage1_threshold=1e-2, max_iters=20000,
                   algorithms=ALGORITHMS, colinear_tol=COLINEAR_TOL):
    """Run stage 1 once from ``seed`` and branch it into each algorithm's stage 2.

    Returns a list of :class:`RunRecord` in ``algorithms`` order.
    """
    problem = get_problem(spec)
    s1 = run_stage1(initial_point(spec, seed), problem, stage1_threshold, max_iters)
    records = []
    for alg in algorithms:
        cfg = SolveConfig(spec=spec, tol=tol, stage1_threshold=stage1_threshold,
                          max_iters=max_iters, algorithm=alg, seed=seed, colinear_tol=colinear_tol)
        if s1.gap >= stage1_threshold:
            s2 = StageResult(s1.x, 0, s1.gap, 0)
        else:
            s2 = run_stage2(s1.x, s1.gap, problem, alg, tol, max_iters - s1.iters, colinear_tol)
        records.append(finish_record(s1, s2, cfg, problem))
    return records


def _bench_task(args):
    return bench_instance(*args)


def _stage2_evals(rec):
    # stage 1 costs one gap check up front plus two P_V evaluations per iteration
    return rec.projection_evals - (1 + 2 * rec.stage1_iters)


def _quantiles(values):
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"Q1": float(q1), "mean": float(v.mean()), "Q3": float(q3), "median": float(med)}


@dataclass
class BenchStats:
    """Table-style statistics of stage-2 iteration counts.

    Quartiles, mean and median are taken over the instances solved by every
    algorithm; they are ``None`` when there are none.  A win is a strictly
    smallest stage-2 count on such an instance; ties award no win.
    """

    algorithms: tuple
    per_algorithm: dict
    solved_by_all: int
    ties: int
    n_instances: int
    instances: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def stats_available(self):
        return self.solved_by_all > 0

    def check(self):
        if not self.stats_available:
            raise EmptySolvedByAll("no instance was solved by every algorithm")
        return self

    def to_dict(self):
        return {
            **self.meta,
            "n_instances": self.n_instances,
            "solved_by_all": self.solved_by_all,
            "ties": self.ties,
            "algorithms": {a: self.per_algorithm[a] for a in self.algorithms},
            "instances": self.instances,
        }


def summarize(records, algorithms=None):
    """Aggregate per-algorithm lists of RunRecords indexed by instance.

    Parameters
    ----------
    records : dict
        ``{algorithm: [RunRecord, ...]}``, all lists of equal length.
    """
    algorithms = tuple(algorithms or records.keys())
    lengths = {len(records[a]) for a in algorithms}
    if len(lengths) != 1:
        raise ValueError("record lists must have equal length")
    n = lengths.pop()
    solved = np.array([[records[a][i].solved for a in algorithms] for i in range(n)], dtype=bool)
    iters = np.array([[records[a][i].stage2_iters for a in algorithms] for i in range(n)], dtype=float)
    all_mask = solved.all(axis=1) if n else np.zeros(0, dtype=bool)
    sub = iters[all_mask]
    wins = np.zeros(len(algorithms), dtype=int)
    ties = 0
    for row in sub:
        best = row.min()
        winners = np.flatnonzero(row == best)
        if len(winners) == 1:
            wins[winners[0]] += 1
        else:
            ties += 1
    per = {}
    for i, a in enumerate(algorithms):
        entry = {
            "cases_solved": int(solved[:, i].sum()),
            "solved_by_all": int(all_mask.sum()),
            "wins": int(wins[i]),
        }
        if len(sub):
            entry.update(_quantiles(sub[:, i]))
            evals = [_stage2_evals(records[a][k]) for k in np.flatnonzero(all_mask)]
            entry["median_stage2_projection_evals"] = float(np.median(evals))
        else:
            entry.update({"Q1": None, "mean": None, "Q3": None, "median": None,
                          "median_stage2_projection_evals": None})
        per[a] = entry
    instances = []
    for i in range(n):
        first = records[algorithms[0]][i]
        instances.append({
            "seed": int(first.seed),
            "stage1_iters": int(first.stage1_iters),
            "solved": {a: bool(records[a][i].solved) for a in algorithms},
            "stage2_iters": {a: int(records[a][i].stage2_iters) for a in algorithms},
        })
    return BenchStats(algorithms, per, int(all_mask.sum()), ties, n, instances)


def run_bench(spec, n_starts=100, base_seed=0, tol=1e-9, stage1_threshold=1e-2,
              max_iters=20000, workers=None, algorithms=ALGORITHMS):
    """Two-stage benchmark over ``n_starts`` seeds ``base_seed, base_seed + 1, ...``.

    Instances are independent and may run in worker processes; results are
    merged in seed order, so the statistics do not depend on ``workers``.

    Returns
    -------
    stats : BenchStats
    records : dict
        ``{algorithm: [RunRecord, ...]}`` in seed order.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    seeds = [base_seed + i for i in range(n_starts)]
    tasks = [(spec, s, tol, stage1_threshold, max_iters, tuple(algorithms)) for s in seeds]
    n_workers = min(worker_count(workers), n_starts)
    if n_workers == 1:
        results = [_bench_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_bench_task, tasks))
    records = {a: [res[i] for res in results] for i, a in enumerate(algorithms)}
    stats = summarize(records, algorithms)
    stats.meta = {
        "problem": spec.to_dict(),
        "n_starts": n_starts,
        "base_seed": base_seed,
        "tol": tol,
        "stage1_threshold": stage1_threshold,
        "max_iters": max_iters,
    }
    logger.info("bench %s: solved_by_all=%d", spec.kind, stats.solved_by_all)
    return stats, records
