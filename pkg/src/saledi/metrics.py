"""Resilience and reliability metrics computed from an event catalog.

SALEDI sums ln(M / M_large) over large events and annualizes; ALED is the
mean of the same logs, so ``SALEDI == f_large * ALED``. The seemingly
plausible counterparts (SPLEDI, SPALED) drop the logarithm and are reported
for comparison only.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .events import EventCatalog
from .exceptions import ConfigError, DataError
from .ingest import MINUTES_PER_YEAR, minutes_to_year

MINUTES_PER_MONTH = MINUTES_PER_YEAR // 12  # 43 830
MED_BETA = 2.5
MIN_MED_HISTORY_DAYS = 365


@dataclass
class MetricsReport:
    window_start: int
    window_end: int
    n_year: float
    M_large: float
    n_large: int
    f_large: float
    SALEDI: float
    ALED: float | None
    SPLEDI: float
    SPALED: float | None
    SAIDI_with_MED: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["SAIDI_with_MED"] = {str(k): v for k, v in sorted(self.SAIDI_with_MED.items())}
        return d


@dataclass(frozen=True)
class CvarSpec:
    value_transform: Literal["identity", "ln", "log10_cost"] = "ln"
    beta: float = 0.0
    cost_factor_k: float = 1.0

    def __post_init__(self):
        if self.value_transform not in ("identity", "ln", "log10_cost"):
            raise ConfigError(f"unknown value transform {self.value_transform!r}")
        if not 0.0 <= self.beta < 1.0:
            raise ConfigError("beta must lie in [0, 1)")
        if self.cost_factor_k <= 0:
            raise ConfigError("cost_factor_k must be positive")


@dataclass(frozen=True)
class ExceedanceCurve:
    """Empirical exceedance staircase.

    For each distinct value ``v``, ``above`` holds the number of values
    strictly greater than ``v``; exceedance is that count divided by ``scale``
    (the sample size for probability curves, n_year for frequency curves).
    """

    kind: Literal["probability", "frequency"]
    values: tuple[float, ...]
    above: tuple[int, ...]
    count: int
    scale: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(v, c / self.scale) for v, c in zip(self.values, self.above)]

    @property
    def n_points(self) -> int:
        return len(self.values)

    def __call__(self, x):
        idx = np.searchsorted(np.asarray(self.values), np.asarray(x, dtype=float), side="right")
        above = np.asarray((self.count,) + self.above)
        return above[idx] / self.scale


def saidi_with_med(outage_cmip: Iterable[float]) -> float:
    """Annual SAIDI including major event days: the plain sum of outage CMIp."""
    values = list(outage_cmip)
    if any(v < 0 for v in values):
        raise DataError("outage CMIp must be nonnegative")
    return math.fsum(values)


def log_normalized(values, M_large: float) -> np.ndarray:
    """ln(M / M_large) for each value; the caller guarantees M >= M_large."""
    return np.log(np.asarray(values, dtype=float) / M_large)


def _check_window(catalog: EventCatalog, window):
    if window is None:
        window = (catalog.profile.span_start, catalog.profile.span_end)
    ws, we = int(window[0]), int(window[1])
    if we <= ws:
        raise ConfigError("window has zero or negative duration")
    return ws, we


def _large_in_window(catalog: EventCatalog, M_large: float, ws: int, we: int):
    if not M_large > 0:
        raise ConfigError("M_large must be positive")
    return [e.M for e in catalog.events if ws <= e.start < we and e.M >= M_large]


def saidi_by_year(catalog: EventCatalog, window=None) -> dict[int, float]:
    """SAIDI with major event days for each calendar year touched by the window."""
    ws, we = _check_window(catalog, window)
    per_year: dict[int, list[float]] = {}
    for e in catalog.events:
        for start, m in zip(e.starts, e.member_cmip):
            if ws <= start < we:
                per_year.setdefault(minutes_to_year(start), []).append(m)
    return {y: saidi_with_med(v) for y, v in sorted(per_year.items())}


def resilience_metrics(catalog: EventCatalog, M_large: float, window=None,
                       with_saidi: bool = True) -> MetricsReport:
    """SALEDI, ALED and companions over a window of event start times.

    Large events satisfy ``M >= M_large``. With no large events SALEDI and
    SPLEDI are 0 and the averages are None.
    """
    ws, we = _check_window(catalog, window)
    large = _large_in_window(catalog, M_large, ws, we)
    n_year = (we - ws) / MINUTES_PER_YEAR
    n_large = len(large)
    if n_large:
        logs = log_normalized(large, M_large)
        log_sum = math.fsum(logs)
        ratio_sum = math.fsum(np.asarray(large) / M_large)
        aled, spaled = log_sum / n_large, ratio_sum / n_large
    else:
        log_sum = ratio_sum = 0.0
        aled = spaled = None
    return MetricsReport(
        window_start=ws,
        window_end=we,
        n_year=n_year,
        M_large=float(M_large),
        n_large=n_large,
        f_large=n_large / n_year,
        SALEDI=log_sum / n_year,
        ALED=aled,
        SPLEDI=ratio_sum / n_year,
        SPALED=spaled,
        SAIDI_with_MED=saidi_by_year(catalog, (ws, we)) if with_saidi else {},
    )


def seemingly_plausible_metrics(catalog: EventCatalog, M_large: float, window=None):
    """(SPLEDI, SPALED): SALEDI and ALED without the logarithm."""
    rep = resilience_metrics(catalog, M_large, window, with_saidi=False)
    return rep.SPLEDI, rep.SPALED


def cvar(values: Sequence[float], spec: CvarSpec, threshold: float) -> float:
    """Empirical CVaR of the transformed tail values.

    ``ln`` gives ALED, ``identity`` gives SPALED and ``log10_cost`` gives the
    mean of log10(k * M).
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise DataError("no large events")
    if not threshold > 0:
        raise ConfigError("threshold must be positive")
    if np.any(arr < threshold):
        raise DataError("all values must be at or above the threshold")
    if spec.value_transform == "ln":
        v = log_normalized(arr, threshold)
    elif spec.value_transform == "identity":
        v = arr / threshold
    else:
        v = np.log10(spec.cost_factor_k * arr)
    return math.fsum(v) / arr.size


def exceedance(values, kind: Literal["probability", "frequency"] = "probability",
               n_year: float = 1.0) -> ExceedanceCurve:
    arr = np.sort(np.asarray(values, dtype=float))
    n = arr.size
    if kind == "probability":
        if n == 0:
            raise DataError("probability exceedance needs at least one value")
        scale = float(n)
    elif kind == "frequency":
        if not n_year > 0:
            raise ConfigError("n_year must be positive")
        scale = float(n_year)
    else:
        raise ConfigError(f"unknown exceedance kind {kind!r}")
    uniq = np.unique(arr)
    above = n - np.searchsorted(arr, uniq, side="right")
    return ExceedanceCurve(kind, tuple(map(float, uniq)), tuple(map(int, above)), n, scale)


def area_under_exceedance(curve: ExceedanceCurve) -> float:
    """Exact integral of the staircase from 0 to infinity.

    Summed as horizontal slices, so the frequency curve of raw data returns
    the data sum and the probability curve returns the data mean.
    """
    if not curve.values:
        return 0.0
    if curve.values[0] < 0:
        raise DataError("area is defined for nonnegative values only")
    pieces = []
    prev_v, prev_count = 0.0, curve.count
    for v, c in zip(curve.values, curve.above):
        pieces.append((v - prev_v) * prev_count)
        prev_v, prev_count = v, c
    return math.fsum(pieces) / curve.scale


def track_sliding(catalog: EventCatalog, M_large: float, n_year: int, step_months: int = 1,
                  n_jobs: int = 1) -> list[MetricsReport]:
    """Metrics over windows of ``n_year`` years advancing by ``step_months``.

    M_large is held fixed. Windows start at the catalog span start and are
    kept while they end at or before the span end.
    """
    if n_year <= 0 or step_months <= 0:
        raise ConfigError("n_year and step_months must be positive")
    span_start, span_end = catalog.profile.span_start, catalog.profile.span_end
    width = int(round(n_year * MINUTES_PER_YEAR))
    step = step_months * MINUTES_PER_MONTH
    if span_start + width > span_end:
        raise DataError("catalog span is shorter than one window")
    windows = []
    ws = span_start
    while ws + width <= span_end:
        windows.append((ws, ws + width))
        ws += step
    run = lambda w: resilience_metrics(catalog, M_large, w)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(run, windows))
    return [run(w) for w in windows]


def major_event_threshold(history_daily: Sequence[float], beta: float = MED_BETA) -> float:
    """IEEE 1366 2.5-beta threshold: exp(mean + beta * std) of ln(nonzero daily SAIDI)."""
    hist = np.asarray(history_daily, dtype=float)
    if hist.size < MIN_MED_HISTORY_DAYS:
        raise DataError(f"need at least {MIN_MED_HISTORY_DAYS} days of history, got {hist.size}")
    nz = hist[hist > 0]
    if nz.size == 0:
        raise DataError("history has no nonzero days")
    logs = np.log(nz)
    sigma = float(np.std(logs, ddof=1)) if nz.size > 1 else 0.0
    return float(np.exp(np.mean(logs) + beta * sigma))


def saidi_without_med(year_daily: Sequence[float], history_daily: Sequence[float],
                      beta: float = MED_BETA) -> float:
    """SAIDI for one year with days above the major event threshold removed."""
    t_med = major_event_threshold(history_daily, beta)
    days = np.asarray(year_daily, dtype=float)
    # relative slack so a flat history does not flag its own days through rounding
    keep = days[days <= t_med * (1 + 1e-12)]
    return math.fsum(keep)
