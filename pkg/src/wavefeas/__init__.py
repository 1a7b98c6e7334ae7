"""Wavelet feasibility problems solved with Douglas-Rachford and centering methods."""

from .constraints import ProblemSpec, WaveletProblem
from .ensemble import Ensemble
from .estimator import WaveletDesigner
from .harness import BenchStats, run_bench, summarize
from .solvers import RunRecord, SolveConfig, two_stage_solve
from .wavelet import FilterPair, cascade, extract_filters, verify

__version__ = "0.1.0"

__all__ = [
    "BenchStats",
    "Ensemble",
    "FilterPair",
    "ProblemSpec",
    "RunRecord",
    "SolveConfig",
    "WaveletDesigner",
    "WaveletProblem",
    "cascade",
    "extract_filters",
    "run_bench",
    "summarize",
    "two_stage_solve",
    "verify",
]
