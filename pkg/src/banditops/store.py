"""Persistence for both trial profiles.

A run directory holds one JSONL file per table plus sidecar logs.  Data
files are append-only: inserts append a row object, and the one allowed
mutation -- attaching reward fields to a previously inserted decision row
-- appends a completion record instead of rewriting, so the on-disk
history is a faithful log.  Snapshots copy the materialized tables;
restore swaps them back in.

Tables and column names mirror the production trial databases:

* Oralytics (5 tables): participant_info, posterior_weights,
  participant_data, treatment_selection_data, update_data.  Vector and
  matrix values are flattened into ``state.0``, ``posterior_mu.3``,
  ``posterior_var.2.7``-style columns.
* MiWaves (7 tables): users, user_status, algorithm_status,
  rl_hyperparam_update_request, rl_weights, rl_action_selection,
  user_action_history.  Vector values are stored as JSON arrays.
"""

from __future__ import annotations

import json
import re
import shutil
from collections.abc import Callable, Mapping
from pathlib import Path

import numpy as np

from .errors import RejectedInput

# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------

_PARTICIPANT_DATA_BASE = (
    "participant_id",
    "participant_start_day",
    "participant_end_day",
    "timestamp",
    "schedule_id",
    "participant_decision_t",
    "decision_time",
    "day_in_trial",
    "policy_idx",
    "random_seed",
    "action",
    "prob",
)

ORALYTICS_SCHEMA: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    # table -> (fixed columns, flattened-column regex prefixes)
    "participant_info": (
        (
            "participant_id",
            "participant_start_day",
            "participant_end_day",
            "morning_time_weekday",
            "evening_time_weekday",
            "morning_time_weekend",
            "evening_time_weekend",
            "participant_entry_decision_t",
            "participant_last_decision_t",
            "currently_in_trial",
            "participant_day_in_trial",
            "participant_opened_app",
            "most_recent_schedule_id",
        ),
        (),
    ),
    "posterior_weights": (
        ("policy_idx", "timestamp"),
        (r"posterior_mu\.\d+", r"posterior_var\.\d+\.\d+"),
    ),
    "participant_data": (_PARTICIPANT_DATA_BASE, (r"state\.\d+",)),
    "treatment_selection_data": (
        _PARTICIPANT_DATA_BASE
        + (
            "brushing_duration",
            "pressure_duration",
            "quality",
            "raw_quality",
            "reward",
            "cost_term",
            "B_condition",
            "A1_condition",
            "A2_condition",
            "actual_b_bar",
        ),
        (r"state\.\d+",),
    ),
    "update_data": (
        (
            "participant_id",
            "participant_start_day",
            "participant_end_day",
            "timestamp",
            "participant_decision_t",
            "decision_time",
            "first_policy_idx",
            "action",
            "prob",
            "reward",
            "quality",
        ),
        (r"state\.\d+",),
    ),
}

MIWAVES_SCHEMA: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "users": (
        ("user_id", "consent_start_date", "consent_end_date", "rl_start_date", "rl_end_date"),
        (),
    ),
    "user_status": (
        (
            "user_id",
            "trial_phase",
            "morning_notif_time_start",
            "evening_notif_time_start",
            "current_decision_index",
            "current_time_of_day",
            "trial_day",
        ),
        (),
    ),
    "algorithm_status": (
        (
            "policy_id",
            "update_time",
            "update_day_in_trial",
            "current_decision_time",
            "current_day_in_trial",
        ),
        (),
    ),
    "rl_hyperparam_update_request": (
        (
            "id",
            "backup_location",
            "request_timestamp",
            "request_status",
            "request_message",
            "request_error_code",
            "completed_timestamp",
        ),
        (),
    ),
    "rl_weights": (
        (
            "id",
            "policy_id",
            "update_timestamp",
            "post_mean_array",
            "post_var_array",
            "post_tpop_mean_array",
            "post_tpop_var_array",
            "noise_var",
            "random_eff_cov_array",
            "code_commit_id",
            "data_pickle_file_path",
            "user_list",
            "hp_update_id",
        ),
        (),
    ),
    "rl_action_selection": (
        (
            "user_id",
            "user_decision_idx",
            "morning_notification_time",
            "evening_notification_time",
            "day_in_trial",
            "action",
            "policy_id",
            "seed",
            "prior_ema_completion_time",
            "action_selection_timestamp",
            "message_sent_notification_ts",
            "message_click_notification_ts",
            "act_prob",
            "cannabis_use",
            "state_vector",
            "reward",
            "row_complete",
            "rid",
        ),
        (),
    ),
    "user_action_history": (
        (
            "index",
            "user_id",
            "decision_idx",
            "finished_ema",
            "activity_question_response",
            "app_use_flag",
            "cannabis_use",
            "reward",
            "state",
            "action",
            "seed",
            "act_prob",
            "policy_id",
            "timestamp",
        ),
        (),
    ),
}

SCHEMAS = {"ORALYTICS": ORALYTICS_SCHEMA, "MIWAVES": MIWAVES_SCHEMA}


# ---------------------------------------------------------------------------
# Flattening helpers
# ---------------------------------------------------------------------------


def flatten_vector(prefix: str, vec) -> dict[str, float]:
    return {f"{prefix}.{i}": float(v) for i, v in enumerate(np.asarray(vec, dtype=float))}


def flatten_matrix(prefix: str, mat) -> dict[str, float]:
    m = np.asarray(mat, dtype=float)
    return {
        f"{prefix}.{i}.{j}": float(m[i, j]) for i in range(m.shape[0]) for j in range(m.shape[1])
    }


def unflatten_vector(prefix: str, row: Mapping) -> np.ndarray:
    pat = re.compile(rf"^{re.escape(prefix)}\.(\d+)$")
    pairs = sorted(
        (int(m.group(1)), float(v))
        for k, v in row.items()
        if (m := pat.match(k)) is not None
    )
    return np.array([v for _, v in pairs])


def unflatten_matrix(prefix: str, row: Mapping) -> np.ndarray:
    pat = re.compile(rf"^{re.escape(prefix)}\.(\d+)\.(\d+)$")
    entries = [
        (int(m.group(1)), int(m.group(2)), float(v))
        for k, v in row.items()
        if (m := pat.match(k)) is not None
    ]
    n = max(i for i, _, _ in entries) + 1
    out = np.zeros((n, n))
    for i, j, v in entries:
        out[i, j] = v
    return out


def _plain(value):
    """Coerce numpy scalars/arrays so rows round-trip through JSON exactly."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


class Store:
    """Append-only table store materialized in memory, logged to JSONL."""

    def __init__(self, profile: str, run_dir: str | Path | None = None):
        if profile not in SCHEMAS:
            raise RejectedInput(f"unknown profile {profile!r}")
        self.profile = profile
        self.schema = SCHEMAS[profile]
        self.run_dir = Path(run_dir) if run_dir is not None else None
        self.tables: dict[str, list[dict]] = {name: [] for name in self.schema}
        self._snapshot_seq = 0
        if self.run_dir is not None:
            (self.run_dir / "tables").mkdir(parents=True, exist_ok=True)

    # -- validation -----------------------------------------------------------
    def _validate(self, table: str, row: Mapping) -> dict:
        if table not in self.schema:
            raise RejectedInput(f"unknown table {table!r} for profile {self.profile}")
        fixed, patterns = self.schema[table]
        missing = [c for c in fixed if c not in row]
        if missing:
            raise RejectedInput(f"{table}: missing columns {missing}")
        compiled = [re.compile(f"^{p}$") for p in patterns]
        unknown = [
            c
            for c in row
            if c not in fixed and not any(p.match(c) for p in compiled)
        ]
        if unknown:
            raise RejectedInput(f"{table}: unknown columns {unknown}")
        return {k: _plain(v) for k, v in row.items()}

    # -- write path -------------------------------------------------------------
    def append(self, table: str, row: Mapping) -> int:
        clean = self._validate(table, row)
        self.tables[table].append(clean)
        self._log(table, clean)
        return len(self.tables[table]) - 1

    def complete_row(self, table: str, match: Mapping, fields: Mapping) -> bool:
        """Fill previously-null fields of the latest row matching ``match``.

        Used to attach reward data to a decision row once the outcome
        arrives; refuses to overwrite a non-null value.  Returns False if
        no row matches.
        """
        fields = {k: _plain(v) for k, v in fields.items()}
        for row in reversed(self.tables[table]):
            if all(row.get(k) == v for k, v in match.items()):
                for k, v in fields.items():
                    if k in row and row[k] is not None and row[k] != v:
                        raise RejectedInput(
                            f"{table}: refusing to overwrite {k}={row[k]!r} with {v!r}"
                        )
                    row[k] = v
                self._log(table, {"__complete__": dict(match), "fields": fields})
                return True
        return False

    def _log(self, table: str, obj: Mapping) -> None:
        if self.run_dir is None:
            return
        path = self.run_dir / "tables" / f"{table}.jsonl"
        with open(path, "a") as fh:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")

    # -- read path ---------------------------------------------------------------
    def query(self, table: str, predicate: Callable[[dict], bool] | None = None, **eq) -> list[dict]:
        rows = self.tables[table]
        if eq:
            rows = [r for r in rows if all(r.get(k) == v for k, v in eq.items())]
        if predicate is not None:
            rows = [r for r in rows if predicate(r)]
        return list(rows)

    def __len__(self) -> int:
        return sum(len(rows) for rows in self.tables.values())

    # -- snapshots ------------------------------------------------------------------
    def snapshot(self) -> str:
        self._snapshot_seq += 1
        snap_id = f"SNAP-{self._snapshot_seq:04d}"
        if self.run_dir is not None:
            snap_dir = self.run_dir / "snapshots" / snap_id
            snap_dir.mkdir(parents=True, exist_ok=True)
            for name, rows in self.tables.items():
                (snap_dir / f"{name}.json").write_text(json.dumps(rows, sort_keys=True))
        else:
            self._mem_snapshots = getattr(self, "_mem_snapshots", {})
            self._mem_snapshots[snap_id] = json.loads(json.dumps(self.tables))
        return snap_id

    def restore(self, snap_id: str) -> None:
        if self.run_dir is not None:
            snap_dir = self.run_dir / "snapshots" / snap_id
            if not snap_dir.is_dir():
                raise RejectedInput(f"no snapshot {snap_id!r}")
            for name in self.tables:
                path = snap_dir / f"{name}.json"
                self.tables[name] = json.loads(path.read_text()) if path.exists() else []
        else:
            snaps = getattr(self, "_mem_snapshots", {})
            if snap_id not in snaps:
                raise RejectedInput(f"no snapshot {snap_id!r}")
            self.tables = json.loads(json.dumps(snaps[snap_id]))

    @staticmethod
    def load(profile: str, run_dir: str | Path) -> "Store":
        """Rebuild the materialized tables from a run directory's logs."""
        store = Store(profile, run_dir=None)
        tables_dir = Path(run_dir) / "tables"
        for name in store.tables:
            path = tables_dir / f"{name}.jsonl"
            if not path.exists():
                continue
            with open(path) as fh:
                for line in fh:
                    obj = json.loads(line)
                    if "__complete__" in obj:
                        match, fields = obj["__complete__"], obj["fields"]
                        for row in reversed(store.tables[name]):
                            if all(row.get(k) == v for k, v in match.items()):
                                row.update(fields)
                                break
                    else:
                        store.tables[name].append(obj)
        return store
