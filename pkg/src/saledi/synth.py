"""Seeded synthetic outage catalogs with known tail parameters.

Event magnitudes come from a lognormal body spliced below ``threshold`` and a
Pareto-type tail above it. Each event is decomposed into sustained member
outages whose integer customer-minutes sum to the event CMIp, and events are
spaced so that time grouping recovers them exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import special, stats

from .events import GROUPING_CAP_MINUTES, EventCatalog, group_events
from .exceptions import ConfigError
from .ingest import MINUTES_PER_YEAR, OutageRecord, SystemProfile, iso_to_minutes
from .tailfit import TailFit

TAIL_MODELS = ("pareto", "bounded-pareto", "bounded-lognormal")
MAX_MEMBER_OFFSET = 5  # members start within 5 min of the event, before any restore


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int = 0
    years: float = 6.0
    event_rate: float = 900.0
    tail_fraction: float = 0.15
    threshold: float = 0.1
    tail_model: str = "pareto"
    alpha: float = 0.8
    p_max: float | None = None
    tail_mu: float = 0.0
    tail_sigma: float = 1.0
    body_mu: float = math.log(0.01)
    body_sigma: float = 1.5
    mean_outages_per_event: float = 3.0
    n_customer: int = 100_000
    span_start: int = iso_to_minutes("2015-01-01T00:00")
    cap_minutes: int = GROUPING_CAP_MINUTES

    def __post_init__(self):
        if not self.event_rate > 0:
            raise ConfigError("event_rate must be positive")
        if not self.years > 0:
            raise ConfigError("years must be positive")
        if not 0.0 <= self.tail_fraction <= 1.0:
            raise ConfigError("tail_fraction must lie in [0, 1]")
        if not self.threshold > 0:
            raise ConfigError("threshold must be positive")
        if self.tail_model not in TAIL_MODELS:
            raise ConfigError(f"tail_model must be one of {TAIL_MODELS}")
        if self.tail_model != "bounded-lognormal" and not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.tail_model.startswith("bounded") and (self.p_max is None or not self.p_max > 1):
            raise ConfigError("bounded tail models need p_max > 1")
        if self.tail_model == "bounded-lognormal" and not self.tail_sigma > 0:
            raise ConfigError("tail_sigma must be positive")
        if not self.body_sigma > 0:
            raise ConfigError("body_sigma must be positive")
        if self.mean_outages_per_event < 1:
            raise ConfigError("mean_outages_per_event must be at least 1")
        if self.n_customer <= 0:
            raise ConfigError("n_customer must be positive")

    def to_dict(self):
        return asdict(self)


# inverse CDFs on a uniform u in (0, 1] --------------------------------------

def pareto_from_uniform(u, alpha):
    return np.asarray(u, dtype=float) ** (-1.0 / alpha)


def bounded_pareto_from_uniform(u, alpha, p_max):
    top = p_max ** -alpha
    return (np.asarray(u, dtype=float) * (1.0 - top) + top) ** (-1.0 / alpha)


def bounded_lognormal_from_uniform(u, mu, sigma, p_max):
    lo, hi = -mu / sigma, (math.log(p_max) - mu) / sigma
    z = stats.truncnorm.ppf(np.asarray(u, dtype=float), lo, hi)
    return np.exp(mu + sigma * z)


def _body_from_uniform(u, mu, sigma, threshold):
    # lognormal conditioned below threshold
    top = special.ndtr((math.log(threshold) - mu) / sigma)
    return np.exp(mu + sigma * special.ndtri(np.asarray(u, dtype=float) * top))


def tail_from_uniform(spec: SyntheticSpec, u):
    """Normalized tail magnitudes P = M / threshold."""
    if spec.tail_model == "pareto":
        return pareto_from_uniform(u, spec.alpha)
    if spec.tail_model == "bounded-pareto":
        return bounded_pareto_from_uniform(u, spec.alpha, spec.p_max)
    return bounded_lognormal_from_uniform(u, spec.tail_mu, spec.tail_sigma, spec.p_max)


def _uniform(rng, size=None):
    # (0, 1]: keeps u**(-1/alpha) finite
    return 1.0 - rng.random(size)


def sample_magnitudes(spec: SyntheticSpec, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``n`` event CMIp from the spliced body/tail model by inversion."""
    if n < 0:
        raise ConfigError("n must be nonnegative")
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    is_tail = rng.random(n) < spec.tail_fraction
    u = _uniform(rng, n)
    out = np.empty(n)
    out[is_tail] = spec.threshold * tail_from_uniform(spec, u[is_tail])
    out[~is_tail] = _body_from_uniform(u[~is_tail], spec.body_mu, spec.body_sigma, spec.threshold)
    return out


# catalog generation ----------------------------------------------------------

@dataclass
class SyntheticData:
    records: list[OutageRecord]
    profile: SystemProfile
    truth: TailFit
    magnitudes: list[float]

    def catalog(self) -> EventCatalog:
        return group_events(self.records, self.profile)


def _decompose(rng, cm_target: float, n_members: int, n_customer: int):
    """Split integer customer-minutes over members as (duration, customers) pairs."""
    shares = rng.dirichlet(np.ones(n_members)) if n_members > 1 else np.ones(1)
    proposals = rng.integers(6, 601, size=n_members)
    parts = []
    for share, dur in zip(shares, proposals):
        cm = max(share * cm_target, 6.0)
        # keep at least ~100 customers per member so rounding stays below 1%
        dur = int(max(6, min(int(dur), math.floor(cm / 100.0))))
        if cm / dur > n_customer:
            dur = math.ceil(cm / n_customer)
        customers = max(1, math.ceil(cm / dur - 1e-9))
        parts.append((dur, customers))
    return parts


def generate_data(spec: SyntheticSpec) -> SyntheticData:
    """Outage records, profile, ground truth and the realized event CMIp."""
    span = int(round(spec.years * MINUTES_PER_YEAR))
    gap = spec.cap_minutes + MAX_MEMBER_OFFSET + 1
    placement = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(0,)))
    n_events = int(placement.poisson(spec.event_rate * spec.years))
    free = span - n_events * gap
    if free < 0:
        raise ConfigError("span too short to separate the drawn events")
    offsets = np.sort(placement.uniform(0.0, free, n_events))
    starts = spec.span_start + np.floor(offsets).astype(np.int64) + np.arange(n_events, dtype=np.int64) * gap

    records, magnitudes = [], []
    n_tail = 0
    p_geom = 1.0 / spec.mean_outages_per_event
    for i, ev_start in enumerate(starts):
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1, i)))
        is_tail = rng.random() < spec.tail_fraction
        u = _uniform(rng)
        if is_tail:
            n_tail += 1
            M = spec.threshold * float(tail_from_uniform(spec, u))
        else:
            M = float(_body_from_uniform(u, spec.body_mu, spec.body_sigma, spec.threshold))
        k = int(rng.geometric(p_geom))
        parts = _decompose(rng, M * spec.n_customer, k, spec.n_customer)
        member_offsets = np.sort(rng.integers(0, MAX_MEMBER_OFFSET + 1, size=k))
        member_offsets[0] = 0
        total = 0
        for j, ((dur, cust), off) in enumerate(zip(parts, member_offsets)):
            s = int(ev_start) + int(off)
            records.append(OutageRecord(s, f"E{i:06d}-{j:03d}", s + dur, cust))
            total += dur * cust
        magnitudes.append(total / spec.n_customer)
    records.sort()
    profile = SystemProfile(spec.n_customer, spec.span_start, spec.span_start + span)
    truth = TailFit(
        M_large=spec.threshold,
        alpha=spec.alpha if spec.tail_model != "bounded-lognormal" else float("nan"),
        ks_distance=0.0,
        n_tail=n_tail,
        quantile_q=1.0 - spec.tail_fraction,
    )
    return SyntheticData(records, profile, truth, magnitudes)


def generate_catalog(spec: SyntheticSpec) -> tuple[EventCatalog, TailFit]:
    data = generate_data(spec)
    return data.catalog(), data.truth


def write_truth(data: SyntheticData, spec: SyntheticSpec, path: str | Path) -> None:
    truth = data.truth.to_dict()
    if isinstance(truth["alpha"], float) and math.isnan(truth["alpha"]):
        truth["alpha"] = None
    payload = {"schema_version": 1, "spec": spec.to_dict(), "truth": truth,
               "n_events": len(data.magnitudes), "n_outages": len(data.records),
               "n_customer": data.profile.n_customer,
               "span_start": data.profile.span_start, "span_end": data.profile.span_end}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
