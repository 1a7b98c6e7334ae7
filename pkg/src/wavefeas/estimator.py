"""scikit-learn style front end.

:class:`WaveletDesigner` solves a feasibility problem in ``fit`` and then acts
as a transformer: a one-level periodic orthogonal wavelet analysis of each
row of ``X`` with the designed filters.
"""

import numbers
import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils import check_array, check_scalar
from sklearn.utils.validation import check_is_fitted

from .constraints import ProblemSpec
from .ensemble import Ensemble
from .solvers import ALGORITHMS, SolveConfig, two_stage_solve
from .wavelet import cascade, extract_filters, verify


class WaveletDesigner(TransformerMixin, BaseEstimator):
    """Design an orthogonal wavelet filter pair and apply it to signals.

    Parameters
    ----------
    problem : {'sym', 'card'}, default='sym'
        Near symmetry or near cardinality.
    M : int, default=6
        Filter length (even, >= 4).
    D : int, default=1
        Regularity order.
    gamma : float, default=0.5
        Slack of the near-symmetry / near-cardinality set.
    P : float or None, default=None
        Symmetry centre or cardinality point (2 / 1 when None).
    algorithm : {'dr', 'gcrm', 'lt'}, default='lt'
        Stage-2 method.
    tol, stage1_threshold, max_iters
        Stopping tolerance, stage switch gap and total iteration cap.
    random_state : int, default=0
        Seed of the random starting ensemble.

    Attributes
    ----------
    ensemble_ : Ensemble
        Feasible ensemble found by ``fit``.
    h_, g_ : ndarray
        Real scaling and wavelet filters (``sum(h_) == 1``).
    run_record_ : RunRecord
    residuals_ : dict
        Output of :func:`wavefeas.wavelet.verify`.
    """

    def __init__(self, problem="sym", M=6, D=1, gamma=0.5, P=None, algorithm="lt",
                 tol=1e-9, stage1_threshold=1e-2, max_iters=20000, random_state=0):
        self.problem = problem
        self.M = M
        self.D = D
        self.gamma = gamma
        self.P = P
        self.algorithm = algorithm
        self.tol = tol
        self.stage1_threshold = stage1_threshold
        self.max_iters = max_iters
        self.random_state = random_state

    def _config(self):
        check_scalar(self.M, "M", numbers.Integral, min_val=4)
        check_scalar(self.max_iters, "max_iters", numbers.Integral, min_val=1)
        check_scalar(self.random_state, "random_state", numbers.Integral)
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        spec = ProblemSpec(kind=self.problem, M=self.M, D=self.D, gamma=self.gamma, P=self.P)
        return SolveConfig(spec=spec, tol=self.tol, stage1_threshold=self.stage1_threshold,
                           max_iters=self.max_iters, algorithm=self.algorithm,
                           seed=self.random_state)

    def fit(self, X=None, y=None):
        """Solve the feasibility problem; ``X`` and ``y`` are ignored."""
        cfg = self._config()
        rec = two_stage_solve(cfg)
        self.run_record_ = rec
        if not rec.solved:
            warnings.warn(
                f"no feasible ensemble within {cfg.max_iters} iterations "
                f"(gap {rec.final_gap:.3g}); try another random_state",
                ConvergenceWarning,
            )
            return self
        self.ensemble_ = Ensemble(rec.solution)
        filters = extract_filters(rec.solution)
        self.h_ = filters.h.real.copy()
        self.g_ = filters.g.real.copy()
        self.residuals_ = verify(rec.solution, cfg.spec)
        return self

    def _analysis_matrix(self, n):
        check_is_fitted(self, "h_")
        if n % 2 or n < len(self.h_):
            raise ValueError(f"signal length must be even and >= {len(self.h_)}, got {n}")
        W = np.zeros((n, n))
        for m in range(n // 2):
            for k in range(len(self.h_)):
                W[m, (2 * m + k) % n] += np.sqrt(2) * self.h_[k]
                W[n // 2 + m, (2 * m + k) % n] += np.sqrt(2) * self.g_[k]
        return W

    def transform(self, X):
        """Approximation then detail coefficients of each row (periodic extension)."""
        X = check_array(X)
        return X @ self._analysis_matrix(X.shape[1]).T

    def inverse_transform(self, X):
        X = check_array(X)
        return X @ self._analysis_matrix(X.shape[1])

    def cascade(self, levels=10):
        """Samples ``(x, phi, psi)`` of the designed scaling function and wavelet."""
        check_is_fitted(self, "h_")
        return cascade(extract_filters(self.ensemble_.free), levels)
