"""Deterministic fault injection at component boundaries.

Faults are applied where the controller, decision service, store, and
external data sources meet -- never inside the decision mathematics.  A
plan plus the master seed fixes the exact multiset of injected faults,
so two runs with the same configuration corrupt the same interactions.

Plan files are YAML::

    version: 1
    entries:
      - kind: RL_CRASH
        target: ALL            # or a participant id / component name
        window: {start_day: 12, start_slot: MORNING, end_day: 12, end_slot: MORNING}
        probability: 1.0
        params: {}

Window matching uses the *data* day for data-corruption kinds (a fetch
for day-8 data is faulted by an entry windowed on day 8 even when the
fetch happens at a later update) and the current day for
infrastructure kinds.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import yaml

from .errors import RejectedInput


class FaultKind(str, Enum):
    ENDPOINT_FAIL = "ENDPOINT_FAIL"
    RESPONSE_UNPARSEABLE = "RESPONSE_UNPARSEABLE"
    MALFORMED_DATA = "MALFORMED_DATA"
    EMPTY_DATA = "EMPTY_DATA"
    DUPLICATE_DATA = "DUPLICATE_DATA"
    RL_CRASH = "RL_CRASH"
    DB_CONN_LOSS = "DB_CONN_LOSS"
    DB_SAVE_ERROR = "DB_SAVE_ERROR"
    OOM_PRESSURE = "OOM_PRESSURE"
    BLANK_SCHEDULE = "BLANK_SCHEDULE"
    ROSTER_DESYNC = "ROSTER_DESYNC"
    TIMEZONE_SKIP = "TIMEZONE_SKIP"
    REQUEST_THROTTLE = "REQUEST_THROTTLE"


#: Interaction boundary tags used by the simulator.
CONTEXT_FETCH = "context_fetch"  # morning sensor/app data for state construction
UPDATE_FETCH = "update_fetch"  # sensor/app data for reward construction
WINDOW_CLOSE = "window_close"  # decision-window outcome delivery (MiWaves)
DECISION_REQUEST = "decision_request"  # controller -> decision service
SCHEDULE_DELIVERY = "schedule_delivery"  # controller -> app
DB_WRITE = "db_write"  # decision service -> its own store
ROSTER_NOTIFY = "roster_notify"  # controller -> decision service roster change

#: Which boundaries each data-level kind can corrupt.
_DATA_BOUNDARIES = {
    FaultKind.ENDPOINT_FAIL: {CONTEXT_FETCH, UPDATE_FETCH, WINDOW_CLOSE, DECISION_REQUEST, SCHEDULE_DELIVERY},
    FaultKind.RESPONSE_UNPARSEABLE: {CONTEXT_FETCH, UPDATE_FETCH, WINDOW_CLOSE},
    FaultKind.MALFORMED_DATA: {CONTEXT_FETCH, UPDATE_FETCH, WINDOW_CLOSE, DECISION_REQUEST},
    FaultKind.EMPTY_DATA: {CONTEXT_FETCH, UPDATE_FETCH, WINDOW_CLOSE},
    FaultKind.DUPLICATE_DATA: {CONTEXT_FETCH, UPDATE_FETCH, WINDOW_CLOSE},
    FaultKind.TIMEZONE_SKIP: {UPDATE_FETCH, WINDOW_CLOSE},
    FaultKind.DB_SAVE_ERROR: {DB_WRITE},
    FaultKind.BLANK_SCHEDULE: {SCHEDULE_DELIVERY},
    FaultKind.ROSTER_DESYNC: {ROSTER_NOTIFY},
    FaultKind.REQUEST_THROTTLE: {CONTEXT_FETCH, UPDATE_FETCH},
}

#: Kinds whose window matches the data's day rather than the wall day.
_DATA_DAY_KINDS = {
    FaultKind.MALFORMED_DATA,
    FaultKind.EMPTY_DATA,
    FaultKind.DUPLICATE_DATA,
    FaultKind.RESPONSE_UNPARSEABLE,
    FaultKind.TIMEZONE_SKIP,
}

#: Component-availability kinds, checked by the engine per (day, slot).
COMPONENT_KINDS = {FaultKind.RL_CRASH, FaultKind.DB_CONN_LOSS, FaultKind.OOM_PRESSURE}

_SLOTS = ("MORNING", "EVENING")


def _slot_index(slot: str) -> int:
    try:
        return _SLOTS.index(slot)
    except ValueError:
        raise RejectedInput(f"slot must be MORNING or EVENING, got {slot!r}")


@dataclass(frozen=True)
class Window:
    start_day: int
    start_slot: str = "MORNING"
    end_day: int = 10**6
    end_slot: str = "EVENING"

    def contains(self, day: int, slot: str) -> bool:
        lo = (self.start_day, _slot_index(self.start_slot))
        hi = (self.end_day, _slot_index(self.end_slot))
        return lo <= (day, _slot_index(slot)) <= hi


@dataclass(frozen=True)
class FaultEntry:
    kind: FaultKind
    target: str = "ALL"  # participant id, component name, or ALL
    window: Window = Window(1)
    probability: float = 1.0
    params: dict = field(default_factory=dict)

    def matches_target(self, participant: str | None) -> bool:
        return self.target == "ALL" or (participant is not None and self.target == participant)


@dataclass(frozen=True)
class Interaction:
    """One boundary crossing, as seen by the fault lab."""

    boundary: str
    day: int
    slot: str
    participant: str | None = None
    data_day: int | None = None
    endpoint: str = ""


@dataclass(frozen=True)
class InjectedFault:
    kind: FaultKind
    entry_index: int
    boundary: str
    day: int
    slot: str
    participant: str | None
    params: dict


class FaultPlan:
    """Ordered list of fault entries; supports live appends for drills."""

    def __init__(self, entries: list[FaultEntry] | None = None):
        self.entries: list[FaultEntry] = list(entries or [])

    def add(self, entry: FaultEntry) -> None:
        self.entries.append(entry)

    def __len__(self) -> int:
        return len(self.entries)

    @staticmethod
    def from_dict(doc: dict) -> "FaultPlan":
        entries = []
        for raw in doc.get("entries", []):
            win = raw.get("window", {}) or {}
            entries.append(
                FaultEntry(
                    kind=FaultKind(raw["kind"]),
                    target=str(raw.get("target", "ALL")),
                    window=Window(
                        start_day=int(win.get("start_day", 1)),
                        start_slot=str(win.get("start_slot", "MORNING")),
                        end_day=int(win.get("end_day", 10**6)),
                        end_slot=str(win.get("end_slot", "EVENING")),
                    ),
                    probability=float(raw.get("probability", 1.0)),
                    params=dict(raw.get("params", {}) or {}),
                )
            )
        return FaultPlan(entries)

    @staticmethod
    def load(path: str | Path) -> "FaultPlan":
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
        return FaultPlan.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "entries": [
                {
                    "kind": e.kind.value,
                    "target": e.target,
                    "window": {
                        "start_day": e.window.start_day,
                        "start_slot": e.window.start_slot,
                        "end_day": e.window.end_day,
                        "end_slot": e.window.end_slot,
                    },
                    "probability": e.probability,
                    "params": e.params,
                }
                for e in self.entries
            ],
        }

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))


def _h32(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


def _triggers(entry: FaultEntry, idx: int, interaction: Interaction, master_seed: int) -> bool:
    if entry.probability >= 1.0:
        return True
    # Keyed rng: the draw depends only on (seed, entry, interaction), never
    # on evaluation order, so fault expansion is reproducible.
    rng = np.random.default_rng(
        [
            master_seed & 0xFFFFFFFF,
            0xFA017,
            idx,
            interaction.day,
            _slot_index(interaction.slot),
            _h32(interaction.boundary),
            _h32(interaction.participant or ""),
            interaction.data_day or 0,
        ]
    )
    return bool(rng.random() < entry.probability)


def apply(interaction: Interaction, plan: FaultPlan, master_seed: int) -> list[InjectedFault]:
    """Return the faults striking one interaction (empty list = untouched)."""
    hits: list[InjectedFault] = []
    for idx, entry in enumerate(plan.entries):
        boundaries = _DATA_BOUNDARIES.get(entry.kind)
        if boundaries is None or interaction.boundary not in boundaries:
            continue
        if not entry.matches_target(interaction.participant):
            continue
        match_day = (
            interaction.data_day
            if entry.kind in _DATA_DAY_KINDS and interaction.data_day is not None
            else interaction.day
        )
        match_slot = interaction.slot if match_day == interaction.day else "MORNING"
        if not entry.window.contains(match_day, match_slot):
            continue
        if not _triggers(entry, idx, interaction, master_seed):
            continue
        hits.append(
            InjectedFault(
                kind=entry.kind,
                entry_index=idx,
                boundary=interaction.boundary,
                day=interaction.day,
                slot=interaction.slot,
                participant=interaction.participant,
                params=entry.params,
            )
        )
    return hits


def component_down(
    plan: FaultPlan, kind: FaultKind, day: int, slot: str, master_seed: int, overrides: set[int]
) -> int | None:
    """Index of the plan entry taking a component down at (day, slot).

    ``overrides`` holds entry indices cleared early by an operator
    restart; those windows no longer count.  Returns None when the
    component is up.
    """
    for idx, entry in enumerate(plan.entries):
        if entry.kind is not kind or idx in overrides:
            continue
        if not entry.window.contains(day, slot):
            continue
        probe = Interaction(boundary="component", day=day, slot=slot)
        if _triggers(entry, idx, probe, master_seed):
            return idx
    return None


class MemoryPressureModel:
    """Cloud-computer memory usage as a fraction of capacity.

    Usage sits at a baseline unless an OOM_PRESSURE window is active, in
    which case it ramps linearly from the baseline at window start to
    ``params.peak`` at window end.  Crossing 1.0 crashes the decision
    service and its store connection (handled by the engine).
    """

    def __init__(self, plan: FaultPlan, baseline: float = 0.35):
        self.baseline = baseline
        self._windows = [
            (e.window, float(e.params.get("peak", 0.95)))
            for e in plan.entries
            if e.kind is FaultKind.OOM_PRESSURE
        ]

    def usage(self, day: int, slot: str) -> float:
        level = self.baseline
        tick = day * 2 + _slot_index(slot)
        for window, peak in self._windows:
            if not window.contains(day, slot):
                continue
            start = window.start_day * 2 + _slot_index(window.start_slot)
            end = window.end_day * 2 + _slot_index(window.end_slot)
            frac = 1.0 if end == start else (tick - start) / (end - start)
            level = max(level, self.baseline + (peak - self.baseline) * frac)
        return level


def paper_replay_plan(profile_name: str, participants: list[str]) -> FaultPlan:
    """Built-in plan triggering every fault kind across a 70-day run.

    Events are spread out so each kind's footprint is observable in
    isolation; the MiWaves variant skips BLANK_SCHEDULE (that profile has
    no treatment schedules).
    """
    p = list(participants) + ["p-spare"] * 9
    entries = [
        FaultEntry(FaultKind.REQUEST_THROTTLE, "ALL", Window(6, "MORNING", 6, "EVENING"), params={"cap": 10}),
        FaultEntry(FaultKind.MALFORMED_DATA, p[0], Window(8, "MORNING", 8, "EVENING")),
        FaultEntry(FaultKind.RESPONSE_UNPARSEABLE, p[1], Window(9, "MORNING", 9, "EVENING")),
        FaultEntry(FaultKind.EMPTY_DATA, p[2], Window(10, "MORNING", 10, "EVENING")),
        FaultEntry(FaultKind.DUPLICATE_DATA, p[3], Window(11, "MORNING", 11, "EVENING")),
        FaultEntry(FaultKind.RL_CRASH, "ALL", Window(12, "MORNING", 12, "MORNING")),
        FaultEntry(FaultKind.DB_CONN_LOSS, "ALL", Window(14, "MORNING", 14, "MORNING")),
        FaultEntry(FaultKind.DB_SAVE_ERROR, p[4], Window(15, "MORNING", 15, "EVENING")),
        FaultEntry(FaultKind.OOM_PRESSURE, "ALL", Window(16, "MORNING", 17, "EVENING"), params={"peak": 0.95}),
        FaultEntry(FaultKind.ROSTER_DESYNC, p[6], Window(20, "MORNING", 20, "MORNING")),
        FaultEntry(FaultKind.TIMEZONE_SKIP, p[7], Window(21, "MORNING", 21, "EVENING")),
        FaultEntry(FaultKind.ENDPOINT_FAIL, p[8], Window(22, "MORNING", 22, "EVENING")),
    ]
    if profile_name == "ORALYTICS":
        entries.append(FaultEntry(FaultKind.BLANK_SCHEDULE, p[5], Window(19, "MORNING", 19, "MORNING")))
    return FaultPlan(entries)


def random_interaction_plan(probability: float = 0.3, start_day: int = 1) -> FaultPlan:
    """Background noise: each data interaction corrupted with the given
    total probability, split across three kinds."""
    if not 0.0 <= probability <= 1.0:
        raise RejectedInput(f"probability must be in [0, 1], got {probability}")
    share = probability / 3.0
    return FaultPlan(
        [
            FaultEntry(FaultKind.ENDPOINT_FAIL, "ALL", Window(start_day), probability=share),
            FaultEntry(FaultKind.MALFORMED_DATA, "ALL", Window(start_day), probability=share),
            FaultEntry(FaultKind.EMPTY_DATA, "ALL", Window(start_day), probability=share),
        ]
    )
