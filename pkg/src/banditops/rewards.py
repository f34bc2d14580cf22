"""Reward construction for both trial flavors.

Oralytics rewards brushing quality minus a prompt cost that discourages
prompting participants who already brush well and have been prompted
heavily.  MiWaves rewards the engagement level 0-3 (one point each for
app use, completing the self-monitoring survey, and clicking the prompt).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RejectedInput
from .features import QUALITY_CAP, normalize_action_avg, normalize_quality_avg
from .params import CostParams


@dataclass(frozen=True)
class RewardRecord:
    """One constructed Oralytics reward with its cost decomposition."""

    quality: float
    raw_quality: float
    cost: float
    reward: float
    b_condition: bool
    a1_condition: bool
    a2_condition: bool
    actual_b_bar: float

    def __post_init__(self):
        if self.reward != self.quality - self.cost:
            raise RejectedInput("reward must equal quality - cost exactly")


def compute_reward_oralytics(
    raw_quality: float,
    b_bar: float,
    a_bar: float,
    action: int,
    params: CostParams,
) -> RewardRecord:
    """Build the surrogate reward for one executed Oralytics decision point.

    ``b_bar`` (seconds, [0, 180]) and ``a_bar`` ([0, 1]) are the
    unnormalized exponential averages observed at the decision point; the
    cost indicators compare them on the normalized [-1, 1] scale against
    the thresholds in ``params``.  Sending a prompt (action 1) to a
    participant above the brushing and prompt-rate thresholds incurs
    ``xi1``; a prompt rate above the second threshold incurs ``xi2``.
    No prompt, no cost.
    """
    if raw_quality < 0:
        raise RejectedInput(f"raw_quality must be nonnegative, got {raw_quality}")
    if action not in (0, 1):
        raise RejectedInput(f"action must be 0 or 1, got {action}")
    b_norm = normalize_quality_avg(b_bar)
    a_norm = normalize_action_avg(a_bar)
    b_condition = b_norm > params.b_thresh
    a1_condition = a_norm > params.a1_thresh
    a2_condition = a_norm > params.a2_thresh
    cost = 0.0
    if action == 1:
        cost = params.xi1 * float(b_condition and a1_condition) + params.xi2 * float(a2_condition)
    quality = min(float(raw_quality), QUALITY_CAP)
    return RewardRecord(
        quality=quality,
        raw_quality=float(raw_quality),
        cost=cost,
        reward=quality - cost,
        b_condition=b_condition,
        a1_condition=a1_condition,
        a2_condition=a2_condition,
        actual_b_bar=b_norm,
    )


def engagement_reward(finished_ema: bool, app_use: bool, message_click: bool) -> int:
    """MiWaves engagement level in {0, 1, 2, 3}: one point per signal."""
    return int(finished_ema) + int(app_use) + int(message_click)
