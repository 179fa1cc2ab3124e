"""Heavy-tail characterization of event CMIp.

Hill estimation of the Pareto slope magnitude, KS-minimizing threshold
selection, the semi-parametric bootstrap goodness-of-fit test, a truncated
lognormal alternative, and a Vuong likelihood-ratio comparison of the two.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, special

from .exceptions import ConfigError, DataError, NumericalError

SIGMA_FLOOR = 1e-3
GOF_REJECT_LEVEL = 0.1
LR_INCONCLUSIVE_LEVEL = 0.1


@dataclass(frozen=True)
class TailFit:
    M_large: float
    alpha: float
    ks_distance: float
    n_tail: int
    quantile_q: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LognormalTailFit:
    a: float
    mu: float
    sigma: float
    ks_distance: float
    n_tail: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class GofResult:
    p_value: float
    n_bootstrap: int
    d_observed: float
    n_failed: int = 0

    @property
    def plausible(self) -> bool:
        """True when the power-law hypothesis is not rejected at the 0.1 level."""
        return self.p_value >= GOF_REJECT_LEVEL


@dataclass(frozen=True)
class CandidatePolicy:
    """Which observed values may serve as a threshold.

    Candidates are distinct positive values at or above the ``min_quantile``
    empirical quantile that leave at least ``min_tail`` points at or above
    themselves. ``max_candidates`` thins the grid evenly when set.
    """

    min_quantile: float = 0.5
    min_tail: int = 50
    min_events: int = 100
    max_candidates: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.min_quantile < 1.0:
            raise ConfigError("min_quantile must lie in [0, 1)")
        if self.min_tail < 2:
            raise ConfigError("min_tail must be at least 2")


def _tail_array(tail_values, M_large):
    x = np.asarray(tail_values, dtype=float)
    if not M_large > 0:
        raise DataError("M_large must be positive")
    if x.size < 2:
        raise DataError("need at least two tail values")
    if np.any(x < M_large):
        raise DataError("tail values must be at or above M_large")
    return x


def hill_alpha(tail_values, M_large: float) -> float:
    """Hill estimate n / sum(ln(M / M_large)), the reciprocal of ALED."""
    x = _tail_array(tail_values, M_large)
    total = math.fsum(np.log(x / M_large))
    if total <= 0:
        raise DataError("all tail values equal M_large; alpha is infinite")
    return x.size / total


def _ks_sorted(logx, lo, alpha, le, ri):
    # logx sorted ascending; le/ri count values < and <= each point
    n = logx.size
    model = -np.expm1(-alpha * (logx - lo))
    return float(max(np.max(np.abs(ri / n - model)), np.max(np.abs(le / n - model))))


def _ecdf_ranks(sorted_x):
    le = np.searchsorted(sorted_x, sorted_x, side="left")
    ri = np.searchsorted(sorted_x, sorted_x, side="right")
    return le, ri


def ks_distance(tail_values, M_large: float, alpha: float) -> float:
    """Sup distance between the tail ECDF and the Pareto(alpha) CDF above M_large.

    Both one-sided limits of the ECDF are checked at every sample point, so
    this is the exact supremum over all M.
    """
    x = np.sort(_tail_array(tail_values, M_large))
    if not alpha > 0:
        raise DataError("alpha must be positive")
    le, ri = _ecdf_ranks(x)
    return _ks_sorted(np.log(x), math.log(M_large), alpha, le, ri)


def _candidates(x_sorted, policy: CandidatePolicy):
    n = x_sorted.size
    first = np.flatnonzero(np.r_[True, x_sorted[1:] != x_sorted[:-1]])
    q_floor = np.quantile(x_sorted, policy.min_quantile) if policy.min_quantile > 0 else -np.inf
    keep = (x_sorted[first] > 0) & (x_sorted[first] >= q_floor) & (n - first >= policy.min_tail)
    idx = first[keep]
    if policy.max_candidates and idx.size > policy.max_candidates:
        pick = np.unique(np.round(np.linspace(0, idx.size - 1, policy.max_candidates)).astype(int))
        idx = idx[pick]
    return idx


def select_m_large(all_event_cmip, policy: CandidatePolicy | None = None) -> TailFit:
    """Pick the threshold whose Hill-fitted Pareto tail has the smallest KS distance.

    Ties go to the smaller threshold.
    """
    policy = policy or CandidatePolicy()
    x = np.sort(np.asarray(all_event_cmip, dtype=float))
    n = x.size
    if n < policy.min_events:
        raise DataError(f"need at least {policy.min_events} events, got {n}")
    if not np.all(np.isfinite(x)):
        raise DataError("event CMIp must be finite")
    cand = _candidates(x, policy)
    if cand.size == 0:
        raise DataError("no candidate threshold satisfies the tail-size floor")

    with np.errstate(divide="ignore"):
        logx = np.log(x)
    le, ri = _ecdf_ranks(x)
    # suffix sums of logs give each candidate's Hill denominator in O(1)
    suffix = np.r_[np.cumsum(logx[::-1])[::-1], 0.0]
    best = None
    for j in cand:
        nt = n - j
        denom = suffix[j] - nt * logx[j]
        if denom <= 0:
            continue
        alpha = nt / denom
        d = _ks_sorted(logx[j:], logx[j], alpha, le[j:] - j, ri[j:] - j)
        if best is None or d < best[0]:
            best = (d, j, alpha)
    if best is None:
        raise DataError("no candidate threshold has a finite alpha")
    d, j, alpha = best
    return TailFit(M_large=float(x[j]), alpha=float(alpha), ks_distance=d,
                   n_tail=int(n - j), quantile_q=float(j / n))


def _pareto_sample(rng, n, M_large, alpha):
    return M_large * rng.random(n) ** (-1.0 / alpha)


def _bootstrap_replicate(seed_seq, data, fit, policy):
    rng = np.random.default_rng(seed_seq)
    n = data.size
    body = data[data < fit.M_large]
    n_tail = rng.binomial(n, fit.n_tail / n) if body.size else n
    synth = np.concatenate([
        _pareto_sample(rng, n_tail, fit.M_large, fit.alpha),
        rng.choice(body, size=n - n_tail, replace=True) if body.size else np.empty(0),
    ])
    try:
        return select_m_large(synth, policy).ks_distance
    except DataError:
        return None


def gof_bootstrap(all_event_cmip, fit: TailFit, n_bootstrap: int = 1000, seed: int = 0,
                  policy: CandidatePolicy | None = None, n_jobs: int = 1) -> GofResult:
    """Semi-parametric bootstrap p-value for the power-law tail hypothesis.

    Each replicate keeps the sample size, draws the tail share from the fitted
    Pareto and the rest from the empirical body, then refits the threshold.
    Replicate seeds are spawned from ``seed`` so the result does not depend on
    ``n_jobs``. A replicate whose refit fails counts as exceeding d_observed.
    """
    if n_bootstrap < 100:
        raise ConfigError("n_bootstrap must be at least 100")
    policy = policy or CandidatePolicy()
    data = np.asarray(all_event_cmip, dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(n_bootstrap)
    rep = lambda s: _bootstrap_replicate(s, data, fit, policy)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            ds = list(pool.map(rep, seeds))
    else:
        ds = [rep(s) for s in seeds]
    failed = sum(d is None for d in ds)
    hits = sum(1 for d in ds if d is None or d >= fit.ks_distance)
    return GofResult(p_value=hits / n_bootstrap, n_bootstrap=n_bootstrap,
                     d_observed=fit.ks_distance, n_failed=failed)


# truncated lognormal -------------------------------------------------------

def _tln_nll(params, logx, log_a):
    mu, sigma = params
    z = (logx - mu) / sigma
    tail_mass = special.log_ndtr(-(log_a - mu) / sigma)
    return logx.size * math.log(sigma) + 0.5 * float(np.dot(z, z)) + logx.size * tail_mass


def _tln_cdf(logx, log_a, mu, sigma):
    # 1 - sf(ln x) / sf(ln a), evaluated in log space
    ls = special.log_ndtr(-(logx - mu) / sigma) - special.log_ndtr(-(log_a - mu) / sigma)
    return -np.expm1(ls)


def _fit_tln_at(logx, log_a, sigma_floor):
    m, s = float(np.mean(logx)), float(np.std(logx))
    s = max(s, sigma_floor)
    span = max(s, 1.0)
    bounds = [(log_a - 60.0 * span, float(logx.max()) + 10.0 * span), (sigma_floor, 50.0 * span)]
    starts = [(m, s), (log_a, 1.5 * s), (log_a - 2.0 * s, 2.5 * s), (log_a - 6.0 * s, 4.0 * s)]
    best = None
    for x0 in starts:
        x0 = (min(max(x0[0], bounds[0][0]), bounds[0][1]), min(max(x0[1], bounds[1][0]), bounds[1][1]))
        res = optimize.minimize(_tln_nll, x0, args=(logx, log_a), method="L-BFGS-B", bounds=bounds)
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    return best


def fit_truncated_lognormal(all_event_cmip, policy: CandidatePolicy | None = None,
                            sigma_floor: float = SIGMA_FLOOR) -> LognormalTailFit:
    """Lognormal conditioned on [a, inf) with a chosen by minimum KS distance.

    For every candidate ``a`` the conditional likelihood is maximized over
    (mu, sigma) with bounded multi-start L-BFGS-B. The default policy thins
    the threshold grid to 100 candidates since each one costs an optimization.
    """
    policy = policy or CandidatePolicy(max_candidates=100)
    x = np.sort(np.asarray(all_event_cmip, dtype=float))
    if x.size < policy.min_events:
        raise DataError(f"need at least {policy.min_events} events, got {x.size}")
    cand = _candidates(x, policy)
    if cand.size == 0:
        raise DataError("no candidate threshold satisfies the tail-size floor")
    le, ri = _ecdf_ranks(x)
    n = x.size
    best = None
    for j in cand:
        logx = np.log(x[j:])
        log_a = logx[0]
        res = _fit_tln_at(logx, log_a, sigma_floor)
        if res is None:
            continue
        mu, sigma = map(float, res.x)
        model = _tln_cdf(logx, log_a, mu, sigma)
        nt = n - j
        d = float(max(np.max(np.abs((ri[j:] - j) / nt - model)),
                      np.max(np.abs((le[j:] - j) / nt - model))))
        if best is None or d < best.ks_distance:
            best = LognormalTailFit(a=float(x[j]), mu=mu, sigma=sigma, ks_distance=d, n_tail=int(nt))
    if best is None:
        raise NumericalError("truncated lognormal optimization failed for every candidate")
    if best.sigma <= sigma_floor * (1 + 1e-6):
        raise DataError(f"fitted sigma collapsed to the floor {sigma_floor}; data are near-constant")
    return best


# likelihood ratio ----------------------------------------------------------

@dataclass(frozen=True)
class LikelihoodRatioResult:
    log_ratio: float
    normalized: float
    p_value: float
    n: int

    @property
    def preferred(self) -> str:
        """'pareto', 'lognormal', or 'inconclusive' at the 0.1 level."""
        if self.p_value >= LR_INCONCLUSIVE_LEVEL or self.log_ratio == 0:
            return "inconclusive"
        return "pareto" if self.log_ratio > 0 else "lognormal"

    def __iter__(self):
        return iter((self.normalized, self.p_value))


def pareto_logpdf(x, x_min, alpha):
    x = np.asarray(x, dtype=float)
    return math.log(alpha) + alpha * math.log(x_min) - (alpha + 1.0) * np.log(x)


def truncated_lognormal_logpdf(x, a, mu, sigma):
    logx = np.log(np.asarray(x, dtype=float))
    z = (logx - mu) / sigma
    return (-logx - math.log(sigma) - 0.5 * math.log(2 * math.pi) - 0.5 * z * z
            - special.log_ndtr(-(math.log(a) - mu) / sigma))


def likelihood_ratio_test(tail_values, pareto: TailFit, lognormal: LognormalTailFit) -> LikelihoodRatioResult:
    """Vuong test of Pareto against truncated lognormal on their common support.

    Both densities are renormalized to [c, inf) with c the larger threshold.
    A positive ratio favors Pareto; the p-value is two-sided.
    """
    x = np.asarray(tail_values, dtype=float)
    c = max(pareto.M_large, lognormal.a)
    x = x[x >= c]
    if x.size == 0:
        raise DataError("no tail values on the common support")
    return vuong_test(pareto_logpdf(x, c, pareto.alpha),
                      truncated_lognormal_logpdf(x, c, lognormal.mu, lognormal.sigma))


def vuong_test(loglik_first, loglik_second) -> LikelihoodRatioResult:
    """Normalized log-likelihood ratio of two pointwise log-likelihood arrays."""
    d = np.asarray(loglik_first, dtype=float) - np.asarray(loglik_second, dtype=float)
    n = int(d.size)
    total = math.fsum(d)
    sd = float(np.std(d))
    if sd == 0.0:
        if total == 0.0:
            return LikelihoodRatioResult(0.0, 0.0, 1.0, n)
        return LikelihoodRatioResult(total, math.copysign(math.inf, total), 0.0, n)
    normalized = total / (sd * math.sqrt(n))
    p = float(special.erfc(abs(normalized) / math.sqrt(2)))
    return LikelihoodRatioResult(total, normalized, p, n)
