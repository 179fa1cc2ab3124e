"""Time-overlap grouping of sustained outages into resilience events."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .exceptions import ConfigError, DataError
from .ingest import OutageRecord, SystemProfile, outage_cmip

GROUPING_CAP_MINUTES = 180


@dataclass(frozen=True)
class Event:
    event_id: int
    outage_ids: tuple[str, ...]
    starts: tuple[int, ...]
    member_cmip: tuple[float, ...]
    start: int
    end: int

    @property
    def M(self) -> float:
        return event_cmip(self)

    @property
    def n_outage_in_event(self) -> int:
        return len(self.outage_ids)


@dataclass
class EventCatalog:
    events: list[Event]
    profile: SystemProfile
    cap_minutes: int = GROUPING_CAP_MINUTES
    _M: list[float] | None = field(default=None, init=False, repr=False, compare=False)

    @property
    def n_allevent(self) -> int:
        return len(self.events)

    @property
    def cmip(self) -> list[float]:
        """Event CMIp in catalog order."""
        if self._M is None:
            self._M = [e.M for e in self.events]
        return self._M

    def starts(self) -> list[int]:
        return [e.start for e in self.events]


def event_cmip(event: Event) -> float:
    """Sum of member outage CMIp (correctly rounded)."""
    return math.fsum(event.member_cmip)


def group_events(records: Sequence[OutageRecord], profile: SystemProfile,
                 cap_minutes: int = GROUPING_CAP_MINUTES) -> EventCatalog:
    """Single sweep over records sorted by (start, outage_id).

    A record joins the open event when it starts strictly before the horizon,
    the latest capped restore ``min(restore, start + cap)`` among members.
    """
    if cap_minutes <= 0:
        raise ConfigError("grouping cap must be positive")
    for prev, cur in zip(records, records[1:]):
        if (cur.start, cur.outage_id) < (prev.start, prev.outage_id):
            raise DataError(f"records not sorted at outage {cur.outage_id}")

    events: list[Event] = []
    members: list[OutageRecord] = []
    horizon = None

    def close():
        events.append(Event(
            event_id=len(events) + 1,
            outage_ids=tuple(r.outage_id for r in members),
            starts=tuple(r.start for r in members),
            member_cmip=tuple(outage_cmip(r, profile) for r in members),
            start=members[0].start,
            end=max(r.restore for r in members),
        ))

    for rec in records:
        capped = min(rec.restore, rec.start + cap_minutes)
        if members and rec.start < horizon:
            members.append(rec)
            horizon = max(horizon, capped)
            continue
        if members:
            close()
        members = [rec]
        horizon = capped
    if members:
        close()
    return EventCatalog(events, profile, cap_minutes)
