"""Issue classification, dosage/probability scans, alerting, and the
green documentation ledger.

Issues carry a profile-scoped code and one of three severities:

* RED    -- endangers participants' experience or the usefulness of the
            trial data; alerts are marked urgent.
* YELLOW -- degrades the algorithm's ability to learn or personalize;
            alerted, but less urgent.
* GREEN  -- must be documented so post-trial statistical analyses can be
            adjusted; no alert, ledger only.

Severity is a pure function of the code.  Every red or yellow issue
produces exactly one alert and one ledger entry.
"""

from __future__ import annotations

import json
import urllib.request
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Severity(str, Enum):
    RED = "RED"
    YELLOW = "YELLOW"
    GREEN = "GREEN"


# ---------------------------------------------------------------------------
# Code registries
# ---------------------------------------------------------------------------

_SHARED_CODES = {
    # Codes not tied to one trial's historical table: memory watchdog,
    # probability bounds, roster reconciliation, catch-all, documentation.
    "MEM": (Severity.RED, "cloud memory usage exceeded the configured threshold"),
    "R5": (Severity.RED, "action probability above 0.8 or below 0.2"),
    "RDSYNC": (Severity.YELLOW, "controller and decision-service rosters disagree"),
    "UNK": (Severity.YELLOW, "unclassified component error"),
    "G-AUDIT": (Severity.GREEN, "cross-store consistency discrepancy"),
    "G-DOC": (Severity.GREEN, "component event documented for analysis"),
    "G-OPS": (Severity.GREEN, "operator control action"),
    "G-BUFFER": (Severity.GREEN, "alert delivery deferred; buffered until sink recovery"),
}

ORALYTICS_CODES: dict[str, tuple[Severity, str]] = {
    "R1": (Severity.RED, "participant got no prompt at any decision point in the last 7 days"),
    "R2": (Severity.RED, "participant got a prompt at every decision point in the last 7 days"),
    "R3": (Severity.RED, "error saving data for participant"),
    "Y1": (Severity.YELLOW, "dependency endpoint call failed"),
    "Y2": (Severity.YELLOW, "endpoint response could not be parsed"),
    "Y3": (Severity.YELLOW, "endpoint returned malformed data"),
    "Y4": (Severity.YELLOW, "endpoint returned no data"),
    "Y5": (Severity.YELLOW, "treatment personalization failed; fallback executed"),
    "Y6": (Severity.YELLOW, "policy update failed for the given batch"),
    **_SHARED_CODES,
}

_MIWAVES_YELLOW = {
    0: "authorization token is malformed",
    1: "authorization token is missing",
    2: "authorization token does not match a registered client",
    3: "authorization procedure error on the decision API",
    4: "client registration limit reached",
    5: "error registering client on the decision API",
    6: "client already exists in the decision database",
    7: "invalid client credentials",
    8: "error authenticating client credentials",
    9: "logout failed: token could not be blacklisted and committed",
    10: "malformed logout request",
    11: "invalid auth token at logout",
    100: "invalid user id",
    101: "invalid personalization start date",
    102: "invalid personalization end date",
    103: "invalid consent start date",
    104: "invalid consent end date",
    105: "invalid morning notification time",
    106: "invalid evening notification time",
    107: "error writing user registration to the decision database",
    108: "user already registered",
    109: "registration procedure error",
    200: "invalid user id in outcome payload",
    201: "invalid survey-completion flag",
    202: "invalid app-use flag",
    203: "user id not present in the decision database",
    204: "reward construction error",
    205: "state construction error",
    206: "action computation error",
    207: "unexpected error computing an action for the user",
    208: "unexpected error computing an action for the user (secondary path)",
    209: "activity response missing although the survey was completed",
    210: "cannabis-use field missing although the survey was completed",
    211: "window label missing or empty",
    300: "user id does not exist",
    301: "trial has not started for the user",
    302: "trial has ended for the user",
    303: "unexpected error committing data at decision-window close",
    304: "invalid action value from caller",
    305: "invalid action seed from caller",
    306: "invalid action probability from caller",
    307: "invalid policy id from caller",
    308: "invalid decision index from caller",
    309: "invalid action timestamp from caller",
    310: "invalid action request id from caller",
    311: "invalid survey-completion timestamp from caller",
    312: "invalid push-notification timestamp from caller",
    313: "invalid message-click timestamp from caller",
    314: "invalid morning notification time from caller",
    315: "invalid evening notification time from caller",
    316: "data fetch from the controller failed",
    317: "controller returned empty data at decision-window close",
    318: "controller returned more than one decision window's data",
    319: "no action found for the given request id",
    320: "unexpected error fetching data or updating the decision time",
    321: "error updating decision records for the decision index",
    322: "decision index already present (duplicate from controller)",
    323: "unexpected error checking for an existing decision index",
    324: "invalid window label",
    400: "failed to dump database tables to disk",
    401: "failed to write new policy weights to the database",
    402: "unexpected error during the policy update",
    403: "hyperparameter update failed",
    404: "posterior update failed",
    405: "update data flag invoked but not implemented",
    406: "error building the update's return payload",
}

MIWAVES_CODES: dict[str, tuple[Severity, str]] = {
    "R1": (Severity.RED, "over 80% of active participants unprompted at a decision point"),
    "R2": (Severity.RED, "over 80% of active participants prompted at a decision point"),
    "R3": (Severity.RED, "participant prompted at over 80% of the last 7 days' decision points"),
    "R4": (Severity.RED, "participant unprompted at over 80% of the last 7 days' decision points"),
    **{str(k): (Severity.YELLOW, v) for k, v in _MIWAVES_YELLOW.items()},
    **_SHARED_CODES,
}

REGISTRIES: dict[str, dict[str, tuple[Severity, str]]] = {
    "ORALYTICS": ORALYTICS_CODES,
    "MIWAVES": MIWAVES_CODES,
}

#: Raw component-event kind -> issue code, per profile.  This is the
#: classification table the fault-conformance fixtures check against.
RAW_TO_CODE: dict[str, dict[str, str]] = {
    "ORALYTICS": {
        "endpoint_fail": "Y1",
        "request_throttled": "Y1",
        "unparseable_response": "Y2",
        "malformed_data": "Y3",
        "duplicate_data": "Y3",
        "duplicate_registration": "Y3",
        "invalid_registration": "Y3",
        "empty_data": "Y4",
        "window_skipped": "Y4",
        "rl_unavailable": "Y5",
        "db_conn_loss": "Y5",
        "schedule_build_failed": "Y5",
        "personalization_fallback": "Y5",
        "update_failed": "Y6",
        "db_save_error": "R3",
        "memory_threshold": "MEM",
        "prob_out_of_bounds": "R5",
        "dosage_all_off": "R1",
        "dosage_all_on": "R2",
        "roster_mismatch": "RDSYNC",
        "audit_discrepancy": "G-AUDIT",
        "component_event": "G-DOC",
        "blank_schedule": "G-DOC",
        "control_command": "G-OPS",
        "alert_buffered": "G-BUFFER",
    },
    "MIWAVES": {
        "endpoint_fail": "316",
        "request_throttled": "316",
        "unparseable_response": "320",
        "malformed_data": "205",
        "duplicate_data": "318",
        "duplicate_registration": "108",
        "invalid_registration": "100",
        "empty_data": "317",
        "window_skipped": "317",
        "rl_unavailable": "207",
        "db_conn_loss": "401",
        "personalization_fallback": "207",
        "update_failed": "402",
        "db_save_error": "321",
        "memory_threshold": "MEM",
        "prob_out_of_bounds": "R5",
        "dosage_all_on": "R3",
        "dosage_all_off": "R4",
        "population_low": "R1",
        "population_high": "R2",
        "roster_mismatch": "RDSYNC",
        "audit_discrepancy": "G-AUDIT",
        "component_event": "G-DOC",
        "control_command": "G-OPS",
        "alert_buffered": "G-BUFFER",
    },
}


@dataclass
class IssueEvent:
    issue_id: str
    code: str
    severity: Severity
    profile: str
    message: str
    timestamp: str
    day: int
    slot: str
    participants: tuple[str, ...] = ()
    decision_points: tuple[int, ...] = ()
    fallback_executed: str | None = None
    acknowledged: bool = False
    ack_note: str = ""
    resolved_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "issue_id": self.issue_id,
            "code": self.code,
            "severity": self.severity.value,
            "profile": self.profile,
            "message": self.message,
            "timestamp": self.timestamp,
            "day": self.day,
            "slot": self.slot,
            "participants": list(self.participants),
            "decision_points": list(self.decision_points),
            "fallback_executed": self.fallback_executed,
            "acknowledged": self.acknowledged,
            "ack_note": self.ack_note,
            "resolved_at": self.resolved_at,
        }


def classify(raw: Mapping, profile: str) -> tuple[str, Severity, str]:
    """Map a raw component event to (code, severity, message).

    The raw event may carry an explicit ``code`` (used verbatim when it
    is in the registry) or a ``kind`` looked up in the classification
    table; anything else lands on the catch-all yellow with diagnostics.
    """
    registry = REGISTRIES[profile]
    code = str(raw["code"]) if "code" in raw and str(raw.get("code")) in registry else None
    if code is None:
        code = RAW_TO_CODE[profile].get(str(raw.get("kind")))
    if code is None or code not in registry:
        severity, base = registry["UNK"]
        return "UNK", severity, f"{base}: {raw.get('kind')!r} {raw.get('detail', '')}".rstrip()
    severity, base = registry[code]
    detail = str(raw.get("detail", "")).strip()
    message = f"{base}" + (f" ({detail})" if detail else "")
    return code, severity, message


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------

DOSAGE_WINDOW = 14  # 7 days x 2 decision points
DOSAGE_FRACTION = 0.8  # strict: "more than 80%"
PROB_BOUNDS = (0.2, 0.8)


def scan_dosage(
    history: Mapping[str, Sequence[tuple[int, int]]],
    profile: str,
    *,
    min_population: int = 5,
    population_indices: Sequence[int] | None = None,
) -> list[dict]:
    """Dosage findings over the trailing 7 days (pure function).

    ``history`` maps participant -> (decision index, action) pairs in
    ascending index order; participants with fewer than 14 points are
    skipped.  Oralytics fires only on all-14 uniformity; MiWaves fires
    when strictly more than 80% of the 14 points share one action, and
    additionally checks each decision point across the active population
    (skipped below ``min_population`` participants).
    """
    findings: list[dict] = []
    for pid in sorted(history):
        pairs = list(history[pid])[-DOSAGE_WINDOW:]
        if len(pairs) < DOSAGE_WINDOW:
            continue
        points = tuple(t for t, _ in pairs)
        acts = [a for _, a in pairs]
        on = sum(acts)
        if profile == "ORALYTICS":
            if on == DOSAGE_WINDOW:
                findings.append({"kind": "dosage_all_on", "participant": pid, "decision_points": points})
            elif on == 0:
                findings.append({"kind": "dosage_all_off", "participant": pid, "decision_points": points})
        else:
            if on / DOSAGE_WINDOW > DOSAGE_FRACTION:
                findings.append({"kind": "dosage_all_on", "participant": pid, "decision_points": points})
            elif (DOSAGE_WINDOW - on) / DOSAGE_WINDOW > DOSAGE_FRACTION:
                findings.append({"kind": "dosage_all_off", "participant": pid, "decision_points": points})

    if profile == "MIWAVES":
        by_point: dict[int, list[tuple[str, int]]] = {}
        for pid in sorted(history):
            for t, a in history[pid]:
                if population_indices is None or t in population_indices:
                    by_point.setdefault(t, []).append((pid, a))
        for t in sorted(by_point):
            rows = by_point[t]
            if len(rows) < min_population:
                continue
            frac_on = sum(a for _, a in rows) / len(rows)
            if frac_on > DOSAGE_FRACTION:
                findings.append(
                    {
                        "kind": "population_high",
                        "participant": None,
                        "participants": tuple(p for p, _ in rows),
                        "decision_points": (t,),
                    }
                )
            elif 1.0 - frac_on > DOSAGE_FRACTION:
                findings.append(
                    {
                        "kind": "population_low",
                        "participant": None,
                        "participants": tuple(p for p, _ in rows),
                        "decision_points": (t,),
                    }
                )
    return findings


def probability_out_of_bounds(prob: float, bounds: tuple[float, float] = PROB_BOUNDS) -> bool:
    """True iff the probability violates the clipping range (strict)."""
    lo, hi = bounds
    return prob < lo or prob > hi


# ---------------------------------------------------------------------------
# Alert sinks
# ---------------------------------------------------------------------------


class SinkUnavailable(Exception):
    pass


class AlertSink:
    def deliver(self, alert: dict) -> None:  # pragma: no cover - interface
        raise NotImplementedError


class FileAlertSink(AlertSink):
    """Writes one JSON file per alert; the stand-in for email delivery."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.available = True

    def deliver(self, alert: dict) -> None:
        if not self.available:
            raise SinkUnavailable("file sink marked unavailable")
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{alert['alert_id']}.json"
        path.write_text(json.dumps(alert, indent=2, sort_keys=True) + "\n")


class WebhookAlertSink(AlertSink):
    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.timeout = timeout

    def deliver(self, alert: dict) -> None:
        body = json.dumps(alert).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                if resp.status >= 400:
                    raise SinkUnavailable(f"webhook returned {resp.status}")
        except SinkUnavailable:
            raise
        except Exception as exc:
            raise SinkUnavailable(f"webhook delivery failed: {exc}")


class CollectingAlertSink(AlertSink):
    """In-memory sink for tests."""

    def __init__(self):
        self.alerts: list[dict] = []
        self.available = True

    def deliver(self, alert: dict) -> None:
        if not self.available:
            raise SinkUnavailable("collecting sink marked unavailable")
        self.alerts.append(alert)


# ---------------------------------------------------------------------------
# The sentinel
# ---------------------------------------------------------------------------


@dataclass
class LedgerEntry:
    entry_id: str
    issue_id: str | None
    code: str
    severity: str
    detected_at: str
    resolved_at: str | None
    participants: list[str]
    decision_point_count: int
    fallback_used: str | None
    note: str
    component: str

    def to_dict(self) -> dict:
        return self.__dict__.copy()


class Sentinel:
    """Stateful monitor: classifies events, dispatches alerts, keeps the
    ledger, and runs the edge-triggered watchdog and dosage dedup."""

    def __init__(
        self,
        profile: str,
        *,
        sink: AlertSink,
        memory_threshold: float = 0.9,
        min_population: int = 5,
        manual_red: bool = False,
        clock=None,
        on_issue=None,
        on_alert=None,
        on_ledger=None,
    ):
        self.profile = profile
        self.sink = sink
        self.memory_threshold = memory_threshold
        self.min_population = min_population
        self.manual_red = manual_red
        self._clock = clock
        self._on_issue = on_issue
        self._on_alert = on_alert
        self._on_ledger = on_ledger
        self.issues: list[IssueEvent] = []
        self.alerts: list[dict] = []
        self.ledger: list[LedgerEntry] = []
        self.review_queue: list[str] = []  # red issues held for manual review
        self._buffered: list[dict] = []
        self._issue_seq = 0
        self._ledger_seq = 0
        self._alert_seq = 0
        self._mem_armed = True
        self._dosage_active: set[tuple[str, str]] = set()

    # -- time ---------------------------------------------------------------
    def _now(self) -> tuple[str, int, str]:
        if self._clock is None:
            return "", 0, "MORNING"
        return self._clock.timestamp(), self._clock.day, self._clock.slot.value

    # -- core intake ---------------------------------------------------------
    def observe(self, raw: Mapping) -> IssueEvent:
        """Classify one raw event, record it, alert + ledger as required."""
        code, severity, message = classify(raw, self.profile)
        ts, day, slot = self._now()
        self._issue_seq += 1
        issue = IssueEvent(
            issue_id=f"ISS-{self._issue_seq:06d}",
            code=code,
            severity=severity,
            profile=self.profile,
            message=message,
            timestamp=str(raw.get("timestamp", ts)),
            day=int(raw.get("day", day)),
            slot=str(raw.get("slot", slot)),
            participants=tuple(raw.get("participants", ())),
            decision_points=tuple(raw.get("decision_points", ())),
            fallback_executed=raw.get("fallback_executed"),
        )
        self.issues.append(issue)
        if self._on_issue:
            self._on_issue(issue)
        if severity in (Severity.RED, Severity.YELLOW):
            if severity is Severity.RED and self.manual_red and raw.get("kind", "").startswith(
                ("dosage", "population", "prob")
            ):
                self.review_queue.append(issue.issue_id)
            else:
                self._dispatch_alert(issue)
            self._ledger_entry(issue, note=str(raw.get("note", "")))
        else:
            self._ledger_entry(issue, note=str(raw.get("note", "")))
        return issue

    def _dispatch_alert(self, issue: IssueEvent) -> None:
        self._alert_seq += 1
        alert = {
            "alert_id": f"ALERT-{self._alert_seq:06d}",
            "issue_id": issue.issue_id,
            "severity": issue.severity.value,
            "urgent": issue.severity is Severity.RED,
            "timestamp": issue.timestamp,
            "subject": f"[{issue.severity.value}] {issue.code}: {issue.message}",
            "participants": list(issue.participants),
        }
        self.alerts.append(alert)
        try:
            self.sink.deliver(alert)
            alert["delivered"] = True
        except SinkUnavailable:
            alert["delivered"] = False
            self._buffered.append(alert)
            self._green(
                "G-BUFFER",
                f"alert {alert['alert_id']} buffered; sink unavailable",
                issue_id=issue.issue_id,
            )
        if self._on_alert:
            self._on_alert(alert)

    def flush_alerts(self) -> int:
        """Retry buffered alerts; returns how many were delivered."""
        delivered = 0
        still: list[dict] = []
        for alert in self._buffered:
            try:
                self.sink.deliver(alert)  # original timestamp preserved in payload
                alert["delivered"] = True
                delivered += 1
            except SinkUnavailable:
                still.append(alert)
        self._buffered = still
        return delivered

    @property
    def buffered_alert_count(self) -> int:
        return len(self._buffered)

    def _ledger_entry(self, issue: IssueEvent, note: str = "", component: str = "") -> LedgerEntry:
        self._ledger_seq += 1
        entry = LedgerEntry(
            entry_id=f"LED-{self._ledger_seq:06d}",
            issue_id=issue.issue_id,
            code=issue.code,
            severity=issue.severity.value,
            detected_at=issue.timestamp,
            resolved_at=issue.resolved_at,
            participants=list(issue.participants),
            decision_point_count=len(issue.decision_points),
            fallback_used=issue.fallback_executed,
            note=note,
            component=component or _component_for(issue.code),
        )
        self.ledger.append(entry)
        if self._on_ledger:
            self._on_ledger(entry)
        return entry

    def _green(self, code: str, message: str, issue_id: str | None = None, **extra) -> IssueEvent:
        raw = {"code": code, "detail": message}
        raw.update(extra)
        return self.observe(raw)

    def record_control(self, kind: str, target: str, note: str) -> LedgerEntry:
        """Every operator command is documented as a green entry."""
        issue = self.observe(
            {"kind": "control_command", "detail": f"{kind} target={target}", "note": note}
        )
        return self.ledger[-1]

    # -- scans ----------------------------------------------------------------
    def run_dosage_scan(
        self,
        history: Mapping[str, Sequence[tuple[int, int]]],
        population_indices: Sequence[int] | None = None,
    ) -> list[IssueEvent]:
        """Edge-triggered dosage scan: a (participant, kind) pair refires
        only after the condition has cleared."""
        findings = scan_dosage(
            history,
            self.profile,
            min_population=self.min_population,
            population_indices=population_indices,
        )
        fired: list[IssueEvent] = []
        seen: set[tuple[str, str]] = set()
        for f in findings:
            key = (str(f.get("participant")), f["kind"])
            seen.add(key)
            if f["participant"] is not None and key in self._dosage_active:
                continue
            raw = {
                "kind": f["kind"],
                "participants": (
                    (f["participant"],) if f.get("participant") else f.get("participants", ())
                ),
                "decision_points": f["decision_points"],
            }
            fired.append(self.observe(raw))
        self._dosage_active = {
            k for k in seen if k[0] != "None"
        }  # population findings are per-point, never latched
        return fired

    def check_probability(
        self, prob: float, participant: str, decision_t: int
    ) -> IssueEvent | None:
        if probability_out_of_bounds(prob):
            return self.observe(
                {
                    "kind": "prob_out_of_bounds",
                    "participants": (participant,),
                    "decision_points": (decision_t,),
                    "detail": f"prob={prob:.6f}",
                }
            )
        return None

    def watchdog_memory(self, usage: float) -> IssueEvent | None:
        """Single-shot red on upward threshold crossing; re-arms below."""
        if usage >= self.memory_threshold:
            if self._mem_armed:
                self._mem_armed = False
                return self.observe(
                    {"kind": "memory_threshold", "detail": f"usage={usage:.3f}"}
                )
            return None
        self._mem_armed = True
        return None

    # -- triage ----------------------------------------------------------------
    def find_issue(self, issue_id: str) -> IssueEvent | None:
        for issue in self.issues:
            if issue.issue_id == issue_id:
                return issue
        return None

    def acknowledge(self, issue_id: str, note: str = "") -> IssueEvent | None:
        issue = self.find_issue(issue_id)
        if issue is None:
            return None
        issue.acknowledged = True
        issue.ack_note = note
        self._green("G-OPS", f"acknowledged {issue_id}", note=note)
        return issue

    def resolve(self, issue_id: str, note: str = "") -> IssueEvent | None:
        issue = self.find_issue(issue_id)
        if issue is None:
            return None
        ts, _, _ = self._now()
        issue.resolved_at = ts
        self._green("G-OPS", f"resolved {issue_id}", note=note)
        return issue


def _component_for(code: str) -> str:
    if code.startswith("G-OPS"):
        return "operations"
    if code in ("R3", "321", "401", "400"):
        return "store"
    if code in ("Y1", "Y2", "Y3", "Y4", "316", "317", "318", "320"):
        return "external"
    if code in ("MEM",):
        return "cloud"
    if code in ("RDSYNC",):
        return "backend"
    return "decision-service"


# ---------------------------------------------------------------------------
# Cross-store consistency audit
# ---------------------------------------------------------------------------


def consistency_audit(
    executed: Sequence[tuple[str, int]],
    selection_rows: Sequence[Mapping],
    update_rows: Sequence[Mapping],
    schedule_rows: Sequence[Mapping],
    excluded: Sequence[tuple[str, int]],
) -> list[dict]:
    """Cross-check the decision tables at the end of a simulated day.

    * every executed decision appears exactly once in the selection data;
    * points excluded from learning never appear in the update data;
    * probability / action / seed agree between the persisted schedule
      rows and the selection rows.

    Returns discrepancy dicts with component attribution; an empty list
    means the day is clean.
    """
    discrepancies: list[dict] = []
    key = lambda r: (str(r["participant_id"]), int(r["participant_decision_t"]))
    sel_by_key: dict[tuple[str, int], list[Mapping]] = {}
    for row in selection_rows:
        sel_by_key.setdefault(key(row), []).append(row)

    for pid, t in executed:
        rows = sel_by_key.get((pid, t), [])
        if len(rows) == 0:
            discrepancies.append(
                {
                    "check": "selection_missing",
                    "participant": pid,
                    "decision_t": t,
                    "component": "store",
                    "detail": "executed decision has no selection row",
                }
            )
        elif len(rows) > 1:
            discrepancies.append(
                {
                    "check": "selection_duplicate",
                    "participant": pid,
                    "decision_t": t,
                    "component": "store",
                    "detail": f"{len(rows)} selection rows for one decision",
                }
            )

    excluded_set = {(str(p), int(t)) for p, t in excluded}
    for row in update_rows:
        k = key(row)
        if k in excluded_set:
            discrepancies.append(
                {
                    "check": "excluded_in_update",
                    "participant": k[0],
                    "decision_t": k[1],
                    "component": "decision-service",
                    "detail": "excluded decision point present in update data",
                }
            )

    sched_by_key: dict[tuple[str, int, int], Mapping] = {}
    for row in schedule_rows:
        sched_by_key[(str(row["participant_id"]), int(row["schedule_id"]), int(row["participant_decision_t"]))] = row
    for rows in sel_by_key.values():
        for row in rows:
            k = (str(row["participant_id"]), int(row.get("schedule_id", -1)), int(row["participant_decision_t"]))
            ref = sched_by_key.get(k)
            if ref is None:
                continue
            for col in ("prob", "action", "random_seed"):
                if ref.get(col) != row.get(col):
                    discrepancies.append(
                        {
                            "check": "selection_schedule_mismatch",
                            "participant": k[0],
                            "decision_t": k[2],
                            "component": "store",
                            "detail": f"{col} differs between schedule and selection rows",
                        }
                    )
    return discrepancies
