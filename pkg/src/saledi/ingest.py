"""Outage record parsing and per-outage customer minutes interrupted (CMIp)."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import ConfigError, DataError

MINUTES_PER_YEAR = 525_960  # 365.25 days
SUSTAINED_MINUTES = 5
CSV_COLUMNS = ("outage_id", "start", "restore", "customers")

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_ISO_MINUTE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}$")
_INT = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True, order=True)
class OutageRecord:
    """One outage. Times are integer minutes since the Unix epoch."""

    start: int
    outage_id: str
    restore: int
    customers_interrupted: int

    def __post_init__(self):
        if self.restore < self.start:
            raise DataError(f"outage {self.outage_id}: restore earlier than start")
        if self.customers_interrupted < 0:
            raise DataError(f"outage {self.outage_id}: negative customers")

    @property
    def duration_minutes(self) -> int:
        return self.restore - self.start


@dataclass(frozen=True)
class SystemProfile:
    n_customer: int
    span_start: int
    span_end: int

    def __post_init__(self):
        if self.n_customer <= 0:
            raise ConfigError("n_customer must be positive")
        if self.span_end <= self.span_start:
            raise ConfigError("span_end must be after span_start")

    @property
    def n_year_all(self) -> float:
        return (self.span_end - self.span_start) / MINUTES_PER_YEAR

    @classmethod
    def from_records(cls, records: Sequence[OutageRecord], n_customer: int,
                     span_start: int | None = None, span_end: int | None = None) -> "SystemProfile":
        """Build a profile whose span defaults to the first start / last restore."""
        if span_start is None:
            if not records:
                raise DataError("cannot infer span from an empty record list")
            span_start = min(r.start for r in records)
        if span_end is None:
            if not records:
                raise DataError("cannot infer span from an empty record list")
            span_end = max(r.restore for r in records)
        outside = [r for r in records if not span_start <= r.start < span_end]
        if outside:
            raise ConfigError(f"observation span does not cover outage {outside[0].outage_id!r} "
                              f"starting at {minutes_to_iso(outside[0].start)}")
        return cls(int(n_customer), int(span_start), int(span_end))


def iso_to_minutes(text: str) -> int:
    if not _ISO_MINUTE.match(text):
        raise ValueError(f"expected YYYY-MM-DDTHH:MM, got {text!r}")
    dt = datetime.strptime(text, "%Y-%m-%dT%H:%M").replace(tzinfo=timezone.utc)
    return int((dt - _EPOCH).total_seconds()) // 60


def minutes_to_iso(minutes: int) -> str:
    dt = datetime.fromtimestamp(int(minutes) * 60, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M")


def minutes_to_year(minutes: int) -> int:
    return datetime.fromtimestamp(int(minutes) * 60, tz=timezone.utc).year


def _timestamp_style(text: str) -> str:
    if _INT.match(text):
        return "epoch"
    if _ISO_MINUTE.match(text):
        return "iso"
    raise ValueError(f"unparseable timestamp {text!r}")


def parse_outage_csv(path: str | Path) -> list[OutageRecord]:
    """Read the outage CSV and return records sorted by (start, outage_id).

    Raises DataError naming the 1-based data row and the offending field.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if tuple(header) != CSV_COLUMNS:
            raise DataError(f"{path}: header must be {','.join(CSV_COLUMNS)}, got {','.join(header)}")
        records = []
        style = None
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(CSV_COLUMNS):
                raise DataError(f"row {row_no}: expected {len(CSV_COLUMNS)} columns, got {len(row)}")
            outage_id, start_s, restore_s, cust_s = (cell.strip() for cell in row)
            if not outage_id:
                raise DataError(f"row {row_no}: field outage_id is empty")
            times = []
            for field, text in (("start", start_s), ("restore", restore_s)):
                try:
                    row_style = _timestamp_style(text)
                except ValueError as exc:
                    raise DataError(f"row {row_no}: field {field}: {exc}") from None
                if style is None:
                    style = row_style
                elif row_style != style:
                    raise DataError(f"row {row_no}: field {field}: mixes {row_style} and {style} timestamps")
                times.append(int(text) if row_style == "epoch" else iso_to_minutes(text))
            if not _INT.match(cust_s):
                raise DataError(f"row {row_no}: field customers: not an integer: {cust_s!r}")
            customers = int(cust_s)
            if customers < 0:
                raise DataError(f"row {row_no}: field customers: negative value {customers}")
            if times[1] < times[0]:
                raise DataError(f"row {row_no}: field restore: earlier than start")
            records.append(OutageRecord(times[0], outage_id, times[1], customers))
    if not records:
        raise DataError(f"{path}: no data rows")
    records.sort()
    return records


def write_outage_csv(records: Iterable[OutageRecord], path: str | Path, style: str = "iso") -> None:
    if style not in ("iso", "epoch"):
        raise ConfigError(f"unknown timestamp style {style!r}")
    fmt = minutes_to_iso if style == "iso" else str
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([r.outage_id, fmt(r.start), fmt(r.restore), r.customers_interrupted])


def filter_sustained(records: Iterable[OutageRecord],
                     threshold_minutes: int = SUSTAINED_MINUTES) -> list[OutageRecord]:
    """Keep outages lasting strictly more than ``threshold_minutes``."""
    return [r for r in records if r.duration_minutes > threshold_minutes]


def outage_cmip(record: OutageRecord, profile: SystemProfile | int) -> float:
    """Customer minutes interrupted divided by customers served."""
    n_customer = profile if isinstance(profile, int) else profile.n_customer
    if n_customer <= 0:
        raise ConfigError("n_customer must be positive")
    return record.duration_minutes * record.customers_interrupted / n_customer
