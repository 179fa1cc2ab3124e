"""scikit-learn compatible wrappers around the tail fits and metrics.

The estimators take a 1-d array of event CMIp (a column vector is accepted
too) so they can sit in pipelines and be cloned, grid-searched and pickled.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DataError
from .metrics import log_normalized
from .tailfit import (CandidatePolicy, TailFit, fit_truncated_lognormal, gof_bootstrap, hill_alpha,
                      ks_distance, pareto_logpdf, select_m_large, truncated_lognormal_logpdf)


def check_cmip(X, *, min_samples: int = 1) -> np.ndarray:
    """Validate event CMIp: finite, nonnegative, 1-d or a single column."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DataError(f"expected a single column of CMIp, got shape {arr.shape}")
        arr = arr[:, 0]
    elif arr.ndim != 1:
        raise DataError(f"expected 1-d CMIp, got {arr.ndim}-d input")
    if arr.size < min_samples:
        raise DataError(f"need at least {min_samples} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DataError("CMIp must be finite")
    if np.any(arr < 0):
        raise DataError("CMIp must be nonnegative")
    return arr


class ParetoTailEstimator(TransformerMixin, BaseEstimator):
    """Pareto tail above a threshold, fitted by the Hill estimator.

    Parameters
    ----------
    m_large : float or None
        Fixed threshold. When None it is chosen by minimum KS distance over
        the candidate grid described by ``min_quantile`` and ``min_tail``.
    n_bootstrap : int
        Replicates for :meth:`goodness_of_fit`.
    random_state : int
        Master seed for the bootstrap.

    Attributes
    ----------
    m_large_, alpha_, ks_distance_, n_tail_, quantile_q_ : fitted tail summary
    aled_ : mean of ln(M / m_large_) over the tail, equal to 1 / alpha_
    """

    def __init__(self, m_large=None, min_quantile=0.5, min_tail=50, n_bootstrap=1000,
                 random_state=0, n_jobs=1):
        self.m_large = m_large
        self.min_quantile = min_quantile
        self.min_tail = min_tail
        self.n_bootstrap = n_bootstrap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _policy(self):
        return CandidatePolicy(min_quantile=self.min_quantile, min_tail=self.min_tail)

    def fit(self, X, y=None):
        x = check_cmip(X, min_samples=2)
        if self.m_large is None:
            fit = select_m_large(x, self._policy())
            self.m_large_, self.alpha_ = fit.M_large, fit.alpha
            self.ks_distance_, self.n_tail_ = fit.ks_distance, fit.n_tail
            self.quantile_q_ = float(fit.quantile_q)
        else:
            tail = x[x >= self.m_large]
            self.m_large_ = float(self.m_large)
            self.alpha_ = hill_alpha(tail, self.m_large_)
            self.ks_distance_ = ks_distance(tail, self.m_large_, self.alpha_)
            self.n_tail_ = int(tail.size)
            self.quantile_q_ = float(np.mean(x < self.m_large_))
        self.aled_ = 1.0 / self.alpha_
        self._data = x
        return self

    @property
    def tail_fit_(self):
        check_is_fitted(self, "alpha_")
        return TailFit(self.m_large_, self.alpha_, self.ks_distance_, self.n_tail_, self.quantile_q_)

    def transform(self, X):
        """ln(M / m_large_) for tail values; values below the threshold map to NaN."""
        check_is_fitted(self, "alpha_")
        x = check_cmip(X)
        out = np.full(x.shape, np.nan)
        tail = x >= self.m_large_
        out[tail] = log_normalized(x[tail], self.m_large_)
        return out

    def sf(self, M):
        """Fitted exceedance probability P[M' > M | M' >= m_large_]."""
        check_is_fitted(self, "alpha_")
        M = np.asarray(M, dtype=float)
        return np.where(M < self.m_large_, 1.0, (np.maximum(M, self.m_large_) / self.m_large_) ** -self.alpha_)

    def score_samples(self, X):
        check_is_fitted(self, "alpha_")
        x = check_cmip(X)
        x = x[x >= self.m_large_]
        return pareto_logpdf(x, self.m_large_, self.alpha_)

    def score(self, X, y=None):
        """Mean tail log-likelihood."""
        return float(np.mean(self.score_samples(X)))

    def goodness_of_fit(self, X=None):
        check_is_fitted(self, "alpha_")
        x = self._data if X is None else check_cmip(X)
        return gof_bootstrap(x, self.tail_fit_, self.n_bootstrap, self.random_state,
                             self._policy(), self.n_jobs)


class TruncatedLognormalEstimator(BaseEstimator):
    """Lognormal conditioned on [a_, inf), with a_ chosen by minimum KS distance."""

    def __init__(self, min_quantile=0.5, min_tail=50, max_candidates=100, sigma_floor=1e-3):
        self.min_quantile = min_quantile
        self.min_tail = min_tail
        self.max_candidates = max_candidates
        self.sigma_floor = sigma_floor

    def fit(self, X, y=None):
        x = check_cmip(X)
        policy = CandidatePolicy(self.min_quantile, self.min_tail, max_candidates=self.max_candidates)
        fit = fit_truncated_lognormal(x, policy, self.sigma_floor)
        self.a_, self.mu_, self.sigma_ = fit.a, fit.mu, fit.sigma
        self.ks_distance_, self.n_tail_ = fit.ks_distance, fit.n_tail
        self.lognormal_fit_ = fit
        return self

    def score_samples(self, X):
        check_is_fitted(self, "sigma_")
        x = check_cmip(X)
        x = x[x >= self.a_]
        return truncated_lognormal_logpdf(x, self.a_, self.mu_, self.sigma_)

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))
