"""Participant roster: the controller's source of truth about who is in
the trial, plus the decision service's (possibly stale) mirror.

A removal normally notifies the decision service so both views agree;
when the notification is suppressed (the roster-desync fault) the mirror
keeps the removed participant until the next reconciliation, reproducing
the misrouted-assignment incident.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


@dataclass
class Participant:
    participant_id: str
    start_day: int
    end_day: int
    index: int  # stable ordinal, drives seed streams and time offsets
    morning_time_weekday: str = "09:00"
    evening_time_weekday: str = "20:00"
    morning_time_weekend: str = "09:30"
    evening_time_weekend: str = "20:30"
    removed_on_day: int | None = None
    removal_reason: str | None = None

    @property
    def entry_decision_t(self) -> int:
        return (self.start_day - 1) * 2

    @property
    def last_decision_t(self) -> int:
        return self.end_day * 2 - 1

    def active_on(self, day: int) -> bool:
        if self.removed_on_day is not None and day >= self.removed_on_day:
            return False
        return self.start_day <= day <= self.end_day

    def day_in_trial(self, day: int) -> int:
        return day - self.start_day + 1

    def active_day_count(self) -> int:
        last = self.end_day if self.removed_on_day is None else min(
            self.end_day, self.removed_on_day - 1
        )
        return max(0, last - self.start_day + 1)


_TIME_RE = re.compile(r"^\d{2}:\d{2}$")


def validate_registration(info: dict, existing_ids: set[str]) -> list[tuple[str, str]]:
    """Pre-registration checks; returns (raw kind, code) pairs for failures.

    Codes follow the granular numeric scheme: invalid id 100, bad trial
    dates 101/102, bad notification times 105/106, duplicate 108.
    """
    problems: list[tuple[str, str]] = []
    pid = info.get("participant_id")
    if not pid or not isinstance(pid, str):
        problems.append(("invalid_registration", "100"))
    if pid in existing_ids:
        problems.append(("duplicate_registration", "108"))
    start, end = info.get("start_day"), info.get("end_day")
    if not isinstance(start, int) or start < 1:
        problems.append(("invalid_registration", "101"))
    if not isinstance(end, int) or (isinstance(start, int) and end < start):
        problems.append(("invalid_registration", "102"))
    for key, code in (("morning_time", "105"), ("evening_time", "106")):
        value = info.get(key)
        if value is not None and not _TIME_RE.match(str(value)):
            problems.append(("invalid_registration", code))
    return problems


@dataclass
class Roster:
    participants: dict[str, Participant] = field(default_factory=dict)
    service_view: set[str] = field(default_factory=set)  # decision service's mirror
    events: list[dict] = field(default_factory=list)

    def register(self, participant: Participant, timestamp: str = "") -> None:
        self.participants[participant.participant_id] = participant
        self.service_view.add(participant.participant_id)
        self.events.append(
            {"kind": "entered", "participant": participant.participant_id, "timestamp": timestamp}
        )

    def remove(
        self, participant_id: str, day: int, reason: str, *, notify: bool = True, timestamp: str = ""
    ) -> None:
        p = self.participants[participant_id]
        p.removed_on_day = day
        p.removal_reason = reason
        if notify:
            self.service_view.discard(participant_id)
        self.events.append(
            {
                "kind": "removed",
                "participant": participant_id,
                "day": day,
                "reason": reason,
                "notified": notify,
                "timestamp": timestamp,
            }
        )

    def active_ids(self, day: int) -> list[str]:
        return sorted(p.participant_id for p in self.participants.values() if p.active_on(day))

    def service_active_ids(self, day: int) -> list[str]:
        """What the decision service believes is active (mirror ∩ window)."""
        out = []
        for pid in self.service_view:
            p = self.participants[pid]
            if p.start_day <= day <= p.end_day:
                out.append(pid)
        return sorted(out)

    def desynced(self, day: int) -> bool:
        return self.active_ids(day) != self.service_active_ids(day)

    def reconcile(self) -> None:
        self.service_view = {
            pid for pid, p in self.participants.items() if p.removed_on_day is None
        }

    def ever_registered(self) -> list[str]:
        return sorted(self.participants)

    def learning_cohort(self) -> list[str]:
        """Everyone whose data enters model updates: ever registered and
        not removed (completed participants stay in)."""
        return sorted(
            pid for pid, p in self.participants.items() if p.removed_on_day is None
        )

    def service_learning_cohort(self) -> list[str]:
        """Same cohort as seen through the service mirror."""
        return sorted(self.service_view)
