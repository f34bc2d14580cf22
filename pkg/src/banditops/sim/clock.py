"""Simulated time: trial days with two decision slots each.

There is no wall clock anywhere in a run; every timestamp derives from
the clock so identical configurations replay byte-identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"

_SLOT_HOUR = {"MORNING": 9, "EVENING": 20}


class Slot(str, Enum):
    MORNING = "MORNING"
    EVENING = "EVENING"


@dataclass
class SimClock:
    base_date: str = "2024-01-01"
    day: int = 1
    slot: Slot = Slot.MORNING

    def advance(self) -> None:
        if self.slot is Slot.MORNING:
            self.slot = Slot.EVENING
        else:
            self.slot = Slot.MORNING
            self.day += 1

    def decision_index(self, day: int | None = None, slot: Slot | None = None) -> int:
        """Trial-level decision index: (day-1)*2 + slot."""
        day = self.day if day is None else day
        slot = self.slot if slot is None else slot
        return (day - 1) * 2 + (0 if slot is Slot.MORNING else 1)

    def timestamp(
        self,
        day: int | None = None,
        slot: Slot | None = None,
        minute_offset: int = 0,
        second_offset: int = 0,
    ) -> str:
        """Datetime string for a slot; offsets keep per-participant rows unique."""
        day = self.day if day is None else day
        slot = self.slot if slot is None else slot
        base = datetime.strptime(self.base_date, "%Y-%m-%d")
        moment = base + timedelta(
            days=day - 1,
            hours=_SLOT_HOUR[slot.value],
            minutes=minute_offset,
            seconds=second_offset,
        )
        return moment.strftime(TIME_FORMAT)

    def timestamp_for_index(self, decision_index: int, minute_offset: int = 0) -> str:
        day = decision_index // 2 + 1
        slot = Slot.MORNING if decision_index % 2 == 0 else Slot.EVENING
        return self.timestamp(day=day, slot=slot, minute_offset=minute_offset)
