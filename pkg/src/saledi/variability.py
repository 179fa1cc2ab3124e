"""Closed-form statistical accuracy of the large-event metrics.

The number of large events in a window is Poisson with mean ``n_large_bar``;
the per-event contributions are i.i.d. Wald's equation and the
Blackwell-Girshick variance identity then give the relative standard error
(RSE) of the annual sum and of the per-event mean.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

from scipy import special

from .exceptions import ConfigError, NumericalError

M_MAX_DEFAULT = 43_830.0  # one month of total blackout, minutes per customer
DEFAULT_RSE_TARGET = 0.1
_LIMIT_TOL = 1e-9


@dataclass(frozen=True)
class BoundedModel:
    """Normalized large-event magnitude Y = M / M_large on [1, p_max]."""

    kind: Literal["bounded-pareto", "bounded-lognormal"]
    p_max: float
    alpha: float | None = None
    mu: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if not self.p_max > 1:
            raise ConfigError("p_max must exceed 1")
        if self.kind == "bounded-pareto":
            if self.alpha is None or not self.alpha > 0:
                raise ConfigError("bounded Pareto needs alpha > 0")
        elif self.kind == "bounded-lognormal":
            if self.mu is None or self.sigma is None or not self.sigma > 0:
                raise ConfigError("bounded lognormal needs mu and sigma > 0")
        else:
            raise ConfigError(f"unknown model kind {self.kind!r}")

    @classmethod
    def from_threshold(cls, kind, M_large, M_max=M_MAX_DEFAULT, **params):
        return cls(kind=kind, p_max=M_max / M_large, **params)

    def moment(self, k: int) -> float:
        if self.kind == "bounded-pareto":
            return bounded_pareto_moments(self.alpha, self.p_max, k)
        return bounded_lognormal_moments(self.mu, self.sigma, self.p_max, k)

    @property
    def rse(self) -> float:
        return rse_from_moments(self.moment(1), self.moment(2))

    def sf(self, p):
        """Exceedance probability P[Y > p] for 1 <= p <= p_max."""
        if self.kind == "bounded-pareto":
            a, top = self.alpha, self.p_max ** -self.alpha
            return (p ** -a - top) / (1 - top)
        lo, hi, s = -self.mu / self.sigma, (math.log(self.p_max) - self.mu) / self.sigma, self.sigma
        z = (math.log(p) - self.mu) / s
        return (special.ndtr(-z) - special.ndtr(-hi)) / (special.ndtr(-lo) - special.ndtr(-hi))


@dataclass(frozen=True)
class RsePlan:
    f_large_all: float
    rse_target: float
    n_year: int
    n_large_bar: float
    rse_achieved: float

    def to_dict(self):
        return asdict(self)


def rse_compound(rse_x: float, n_large_bar: float, mode: Literal["sum", "mean"] = "sum") -> float:
    """RSE of a Poisson compound sum (mode='sum') or of its per-event mean."""
    if not n_large_bar > 0:
        raise ConfigError("n_large_bar must be positive")
    if rse_x < 0:
        raise ConfigError("rse_x must be nonnegative")
    if mode == "sum":
        return math.sqrt(1.0 + rse_x * rse_x) / math.sqrt(n_large_bar)
    if mode == "mean":
        return rse_x / math.sqrt(n_large_bar)
    raise ConfigError(f"unknown mode {mode!r}")


def rse_from_moments(m1: float, m2: float) -> float:
    """sqrt(E[Y^2] / E[Y]^2 - 1), clipped at zero against rounding."""
    return math.sqrt(max(m2 / (m1 * m1) - 1.0, 0.0))


def bounded_pareto_moments(alpha: float, p_max: float, k: int) -> float:
    """E[Y^k] for the Pareto(alpha) conditioned on [1, p_max].

    Near alpha == k the analytic limit alpha * ln(p_max) / (1 - p_max**-alpha)
    is used; elsewhere expm1 keeps the ratio accurate close to the singularity.
    """
    if not p_max > 1:
        raise ConfigError("p_max must exceed 1")
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    log_p = math.log(p_max)
    norm = -math.expm1(-alpha * log_p)
    if abs(alpha - k) < _LIMIT_TOL:
        return alpha * log_p / norm
    return alpha * math.expm1((k - alpha) * log_p) / ((k - alpha) * norm)


def bounded_lognormal_moments(mu: float, sigma: float, p_max: float, k: int) -> float:
    """E[Y^k] for the lognormal(mu, sigma) conditioned on [1, p_max]."""
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    if not p_max > 1:
        raise ConfigError("p_max must exceed 1")
    log_p = math.log(p_max)
    num = _normal_mass((-mu - k * sigma ** 2) / sigma, (log_p - mu - k * sigma ** 2) / sigma)
    den = _normal_mass(-mu / sigma, (log_p - mu) / sigma)
    if den <= 1e-300 or num <= 0:
        raise NumericalError("support [1, p_max] has vanishing probability under the lognormal")
    return math.exp(k * mu + 0.5 * k * k * sigma ** 2) * num / den


def _normal_mass(lo: float, hi: float) -> float:
    # Phi(hi) - Phi(lo), taken from the nearer tail to avoid cancellation
    if lo > 0:
        return float(special.ndtr(-lo) - special.ndtr(-hi))
    return float(special.ndtr(hi) - special.ndtr(lo))


def data_requirement_factor(rse_y: float) -> float:
    """How many times more large events SPLEDI needs than SALEDI for equal RSE."""
    if rse_y < 0:
        raise ConfigError("rse_y must be nonnegative")
    return (1.0 + rse_y * rse_y) / 2.0


def plan_n_year(f_large_all: float, rse_target: float = DEFAULT_RSE_TARGET) -> RsePlan:
    """Fewest whole years for which sqrt(2 / (f * n_year)) <= rse_target."""
    if not f_large_all > 0:
        raise ConfigError("f_large_all must be positive")
    if not 0 < rse_target < 1:
        raise ConfigError("rse_target must lie in (0, 1)")
    bound = 2.0 / (f_large_all * rse_target * rse_target)
    n_year = max(1, math.ceil(bound))
    # guard the ceiling against the bound landing a hair above an integer
    if n_year > 1 and math.isclose(bound, n_year - 1, rel_tol=1e-12):
        n_year -= 1
    n_large_bar = f_large_all * n_year
    return RsePlan(f_large_all=f_large_all, rse_target=rse_target, n_year=n_year,
                   n_large_bar=n_large_bar, rse_achieved=math.sqrt(2.0 / n_large_bar))


def rse_comparison(alpha: float, M_large: float, M_max: float = M_MAX_DEFAULT,
                   mu: float | None = None, sigma: float | None = None) -> dict:
    """RSE of the bounded tail models and the resulting SPLEDI data factors."""
    pb = BoundedModel.from_threshold("bounded-pareto", M_large, M_max, alpha=alpha)
    out = {
        "alpha": alpha, "M_large": M_large, "M_max": M_max, "p_max": pb.p_max,
        "RSE_Pb": pb.rse, "factor_Pb": data_requirement_factor(pb.rse),
        "RSE_LNb": None, "factor_LNb": None,
    }
    if mu is not None and sigma is not None:
        ln = BoundedModel.from_threshold("bounded-lognormal", M_large, M_max, mu=mu, sigma=sigma)
        out["RSE_LNb"] = ln.rse
        out["factor_LNb"] = data_requirement_factor(ln.rse)
    return out
