"""Douglas-Rachford, GCRM and L_T iterations on a two-set splitting.

Every step function takes the current point and a *problem*: any object with
``project_V``, ``project_W`` and ``norm`` (e.g. :class:`WaveletProblem` or
:class:`TwoSetProblem`).  Points are numpy arrays; inner products are real
(see :func:`wavefeas.algebra.inner`).
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .algebra import COLINEAR_TOL, circumcenter, colinear, inner
from .constraints import ProblemSpec, _problem
from .ensemble import Ensemble, product_point, random_ensemble

__all__ = [
    "ALGORITHMS",
    "TwoSetProblem",
    "SolveConfig",
    "RunRecord",
    "dr_step",
    "gcrm_step",
    "lt_step",
    "pi_T",
    "gap",
    "initial_point",
    "get_problem",
    "run_stage1",
    "run_stage2",
    "two_stage_solve",
]

logger = logging.getLogger(__name__)

ALGORITHMS = ("dr", "gcrm", "lt")


@dataclass(frozen=True)
class TwoSetProblem:
    """Ad hoc splitting from two projection callables (real Euclidean norm)."""

    project_V: callable
    project_W: callable

    @staticmethod
    def norm(x):
        return np.sqrt(inner(x, x))

    def gap(self, x):
        w = self.project_W(x)
        return self.norm(self.project_V(w) - w)


def gap(x, problem):
    """Stopping functional ``|P_V P_W x - P_W x|``."""
    return problem.gap(x)


def _dr_parts(x, problem):
    pv = problem.project_V(x)
    rv = 2.0 * pv - x
    pw = problem.project_W(rv)
    return pv, rv, pw


def dr_step(x, problem):
    """Douglas-Rachford operator ``T x = x - P_V x + P_W R_V x``."""
    pv, _, pw = _dr_parts(x, problem)
    return x - pv + pw


def gcrm_step(x, problem, colinear_tol=COLINEAR_TOL):
    """Circumcenter of ``x, R_V x, R_W R_V x``; falls back to ``T x`` when colinear."""
    pv, r1, pw = _dr_parts(x, problem)
    r2 = 2.0 * pw - r1
    if colinear(x, r1, r2, colinear_tol):
        return x - pv + pw
    return circumcenter(x, r1, r2, colinear_tol)


def pi_T(x, Tx, T2x, span_tol=1e-14):
    """Auxiliary point ``2(T^2x - Tx) + 2 P_span(T^2x - Tx)(Tx - x) + x``.

    The span projection is taken as zero when ``|T^2x - Tx|`` is below
    ``span_tol`` times the scale of the inputs.
    """
    d = T2x - Tx
    dd = inner(d, d)
    scale = 1.0 + np.sqrt(inner(x, x))
    if dd <= (span_tol * scale) ** 2:
        return 2.0 * d + x
    coef = inner(Tx - x, d) / dd
    return (2.0 + 2.0 * coef) * d + x


def lt_step(x, problem, colinear_tol=COLINEAR_TOL):
    """Centering operator ``L_T``: circumcenter of ``x, 2Tx - x, pi_T(x)``, else ``T^2 x``."""
    Tx = dr_step(x, problem)
    T2x = dr_step(Tx, problem)
    p = pi_T(x, Tx, T2x)
    y = 2.0 * Tx - x
    if colinear(x, y, p, colinear_tol):
        return T2x
    return circumcenter(x, y, p, colinear_tol)


# P_V evaluations per step
_STEP_COST = {"dr": 1, "gcrm": 1, "lt": 2}


def _stepper(algorithm, problem, colinear_tol):
    if algorithm == "dr":
        return lambda x: dr_step(x, problem)
    if algorithm == "gcrm":
        return lambda x: gcrm_step(x, problem, colinear_tol)
    if algorithm == "lt":
        return lambda x: lt_step(x, problem, colinear_tol)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


@dataclass(frozen=True)
class SolveConfig:
    """Settings of one two-stage run."""

    spec: ProblemSpec = field(default_factory=ProblemSpec)
    tol: float = 1e-9
    stage1_threshold: float = 1e-2
    max_iters: int = 20000
    algorithm: str = "lt"
    seed: int = 0
    colinear_tol: float = COLINEAR_TOL
    record_trace: bool = False

    def __post_init__(self):
        if not 0 < self.tol < self.stage1_threshold:
            raise ValueError("need 0 < tol < stage1_threshold")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not self.colinear_tol > 0:
            raise ValueError("colinear_tol must be positive")


@dataclass
class RunRecord:
    """Outcome of a two-stage run.

    ``solution`` is the free array of ``P_W x`` (part 1) and is only set when
    the run is solved.  ``projection_evals`` counts every ``P_V`` evaluation,
    including the one inside each gap check.
    """

    solved: bool
    stage1_iters: int
    stage2_iters: int
    final_gap: float
    projection_evals: int
    seed: int
    algorithm: str
    solution: np.ndarray = None
    trace: list = None

    def to_dict(self, include_trace=True):
        out = {
            "solved": bool(self.solved),
            "stage1_iters": int(self.stage1_iters),
            "stage2_iters": int(self.stage2_iters),
            "final_gap": float(self.final_gap),
            "projection_evals": int(self.projection_evals),
            "seed": int(self.seed),
            "algorithm": self.algorithm,
            "solution": Ensemble(self.solution).to_dict() if self.solution is not None else None,
        }
        if include_trace and self.trace is not None:
            out["trace"] = [float(g) for g in self.trace]
        return out

    @classmethod
    def from_dict(cls, data):
        sol = data.get("solution")
        return cls(
            solved=data["solved"],
            stage1_iters=data["stage1_iters"],
            stage2_iters=data["stage2_iters"],
            final_gap=data["final_gap"],
            projection_evals=data["projection_evals"],
            seed=data["seed"],
            algorithm=data["algorithm"],
            solution=Ensemble.from_dict(sol).free.copy() if sol is not None else None,
            trace=data.get("trace"),
        )


def initial_point(spec, seed):
    """Product point with all four parts equal to a seeded random ensemble."""
    return product_point(random_ensemble(spec.M, seed))


@dataclass
class StageResult:
    x: np.ndarray
    iters: int
    gap: float
    evals: int
    trace: list = None


_COMPILED = {}


def get_problem(spec, compiled=True):
    """Projection machinery for ``spec``; the compiled variant when available."""
    problem = _problem(spec)
    if not compiled:
        return problem
    if spec not in _COMPILED:
        from ._kernels import FastProblem, kernel_params

        params = kernel_params(problem)
        _COMPILED[spec] = FastProblem(problem, params) if params is not None else problem
    return _COMPILED[spec]


def run_stage1(x, problem, threshold, max_iters, record_trace=False):
    """Iterate Douglas-Rachford until the gap drops below ``threshold``."""
    g = problem.gap(x)
    evals = 1
    if hasattr(problem, "run"):
        g0 = g
        x, it, g, tr = problem.run(x, g, "dr", threshold, max_iters, COLINEAR_TOL, record_trace)
        return StageResult(x, it, g, evals + 2 * it, [g0] + tr if record_trace else None)
    trace = [g] if record_trace else None
    it = 0
    while g >= threshold and it < max_iters:
        x = dr_step(x, problem)
        g = problem.gap(x)
        it += 1
        evals += 2
        if record_trace:
            trace.append(g)
    return StageResult(x, it, g, evals, trace)


def run_stage2(x, g, problem, algorithm, tol, budget, colinear_tol=COLINEAR_TOL, record_trace=False):
    """Iterate ``algorithm`` from ``x`` (with current gap ``g``) until ``gap < tol``."""
    cost = _STEP_COST[algorithm] + 1
    if hasattr(problem, "run"):
        x, it, g, tr = problem.run(x, g, algorithm, tol, budget, colinear_tol, record_trace)
        return StageResult(x, it, g, cost * it, tr)
    step = _stepper(algorithm, problem, colinear_tol)
    trace = [] if record_trace else None
    it = 0
    evals = 0
    while g >= tol and it < budget:
        x = step(x)
        g = problem.gap(x)
        it += 1
        evals += cost
        if record_trace:
            trace.append(g)
    return StageResult(x, it, g, evals, trace)


def finish_record(stage1, stage2, cfg, problem):
    solved = stage2.gap < cfg.tol
    solution = problem.project_W(stage2.x)[0].copy() if solved else None
    trace = None
    if cfg.record_trace:
        trace = list(stage1.trace) + list(stage2.trace)
    return RunRecord(
        solved=bool(solved),
        stage1_iters=stage1.iters,
        stage2_iters=stage2.iters,
        final_gap=float(stage2.gap),
        projection_evals=stage1.evals + stage2.evals,
        seed=cfg.seed,
        algorithm=cfg.algorithm,
        solution=solution,
        trace=trace,
    )


def two_stage_solve(cfg, compiled=True):
    """Douglas-Rachford to ``stage1_threshold``, then ``cfg.algorithm`` to ``tol``.

    The iteration cap applies to the total of both stages.  Stage 2 only
    starts once stage 1 has reached its threshold.  ``compiled=False`` forces
    the numpy reference implementation.
    """
    problem = get_problem(cfg.spec, compiled)
    x0 = initial_point(cfg.spec, cfg.seed)
    s1 = run_stage1(x0, problem, cfg.stage1_threshold, cfg.max_iters, cfg.record_trace)
    if s1.gap >= cfg.stage1_threshold:
        s2 = StageResult(s1.x, 0, s1.gap, 0, [] if cfg.record_trace else None)
    else:
        s2 = run_stage2(
            s1.x, s1.gap, problem, cfg.algorithm, cfg.tol, cfg.max_iters - s1.iters,
            cfg.colinear_tol, cfg.record_trace,
        )
    rec = finish_record(s1, s2, cfg, problem)
    logger.debug(
        "seed=%d alg=%s solved=%s stage1=%d stage2=%d gap=%.3g",
        cfg.seed, cfg.algorithm, rec.solved, rec.stage1_iters, rec.stage2_iters, rec.final_gap,
    )
    return rec
