"""Backup treatment schedules for the Oralytics profile.

Every morning the decision service pre-computes actions for the whole
remaining horizon so the app can keep delivering treatment even if later
communication fails.  Entries fall into three provenance zones relative
to the build point t:

* ``t, t+1``          -- today's decision points, scored with the current context;
* ``t+2 .. t+27``     -- the next two weeks, scored with a modified context
                         (brushing average frozen at its most recent value,
                         app engagement imputed to 0, prompt average projected
                         forward over the schedule's own tentative actions);
* ``beyond t+27``     -- fixed probability 0.5, no context consulted.

Schedules are immutable once built; a newer build supersedes by id.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import RejectedInput
from .features import HISTORY_WINDOW, ORALYTICS_ADVANTAGE, normalize_action_avg, exp_average
from .params import RhoParams
from .posterior import PosteriorState
from .sampling import draw_action, smooth_probability

#: Last schedule offset scored with the modified context.
MODIFIED_ZONE_END = 27

FIXED_PROB = 0.5


class Provenance(str, Enum):
    CURRENT_CONTEXT = "CURRENT_CONTEXT"
    MODIFIED_CONTEXT = "MODIFIED_CONTEXT"
    FIXED_HALF = "FIXED_HALF"


def zone_for_offset(offset: int) -> Provenance:
    if offset < 0:
        raise RejectedInput(f"offset must be nonnegative, got {offset}")
    if offset < 2:
        return Provenance.CURRENT_CONTEXT
    if offset <= MODIFIED_ZONE_END:
        return Provenance.MODIFIED_CONTEXT
    return Provenance.FIXED_HALF


@dataclass(frozen=True)
class ScheduleEntry:
    decision_t: int
    state: np.ndarray
    prob: float
    seed: int
    action: int
    provenance: Provenance


@dataclass
class TreatmentSchedule:
    schedule_id: int
    participant_id: str
    created_at: str
    policy_idx: int
    start_t: int
    personalized: bool
    entries: list[ScheduleEntry] = field(default_factory=list)

    def entry_for(self, decision_t: int) -> ScheduleEntry | None:
        i = decision_t - self.start_t
        if 0 <= i < len(self.entries):
            return self.entries[i]
        return None


def modified_context(
    most_recent_b_bar: float, time_of_day: int, a_bar_projection: float
) -> np.ndarray:
    """Context for a future decision point the service cannot observe yet.

    The brushing average is imputed with the most recent known value, the
    prompt average with the forward projection, and prior-day app
    engagement with 0 (a participant who did not open the app gets no
    fresh schedule, so that is the best guess).
    """
    if time_of_day not in (0, 1):
        raise RejectedInput(f"time_of_day must be 0 or 1, got {time_of_day}")
    return np.array(
        [float(time_of_day), float(most_recent_b_bar), float(a_bar_projection), 0.0, 1.0]
    )


def build_backup_schedule(
    participant_id: str,
    posterior: PosteriorState,
    current_contexts: tuple[np.ndarray, np.ndarray],
    start_t: int,
    *,
    b_bar_recent: float,
    action_history: Sequence[int],
    rho_params: RhoParams,
    draw_seed: Callable[[int], int],
    schedule_id: int,
    horizon: int = 140,
    created_at: str = "",
    personalized: bool = True,
) -> TreatmentSchedule:
    """Construct the schedule covering decision points start_t .. horizon-1.

    ``current_contexts`` holds the morning and evening contexts for the
    build day.  ``action_history`` lists the participant's executed
    actions most-recent-first; the modified-zone prompt average folds the
    schedule's own tentative actions on top of it, since those are known
    at construction time.  ``draw_seed(decision_t)`` supplies the stored
    random seed for each entry, fixed at construction so replay can
    reproduce every Bernoulli draw.

    With ``personalized=False`` (the fallback when the policy or its
    database is unavailable) every entry gets probability 0.5; zone
    labels keep their positional meaning.
    """
    if start_t % 2 != 0:
        raise RejectedInput(f"schedules are built at morning points; start_t={start_t} is odd")
    if not 0 <= start_t < horizon:
        raise RejectedInput(f"start_t {start_t} outside horizon {horizon}")

    mu_adv, sig_adv = posterior.marginal(ORALYTICS_ADVANTAGE)
    recent_actions = list(action_history[:HISTORY_WINDOW])
    entries: list[ScheduleEntry] = []
    for decision_t in range(start_t, horizon):
        offset = decision_t - start_t
        zone = zone_for_offset(offset)
        tod = decision_t % 2
        if zone is Provenance.CURRENT_CONTEXT:
            state = np.asarray(current_contexts[offset], dtype=float)
        else:
            window = (list(recent_actions) + [0] * HISTORY_WINDOW)[:HISTORY_WINDOW]
            a_proj = normalize_action_avg(exp_average([float(a) for a in window]))
            state = modified_context(b_bar_recent, tod, a_proj)
        if not personalized:
            prob = FIXED_PROB
        elif zone is Provenance.FIXED_HALF:
            prob = FIXED_PROB
        else:
            prob = smooth_probability(mu_adv, sig_adv, state, rho_params)
        seed = draw_seed(decision_t)
        action = draw_action(prob, seed)
        entries.append(
            ScheduleEntry(
                decision_t=decision_t,
                state=state,
                prob=prob,
                seed=seed,
                action=action,
                provenance=zone,
            )
        )
        recent_actions.insert(0, action)
        del recent_actions[HISTORY_WINDOW:]

    return TreatmentSchedule(
        schedule_id=schedule_id,
        participant_id=participant_id,
        created_at=created_at,
        policy_idx=posterior.policy_idx,
        start_t=start_t,
        personalized=personalized,
        entries=entries,
    )
