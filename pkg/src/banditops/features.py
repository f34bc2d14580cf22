"""Context construction and model feature maps.

The Oralytics context is a 5-vector

    [time_of_day, b_bar_norm, a_bar_norm, prior_day_app_engagement, 1]

where ``b_bar`` / ``a_bar`` are exponentially weighted averages of the
last 14 decision points' brushing quality / prompt indicators, and the
averages are mapped affinely onto [-1, 1].

The MiWaves state is 3 binary features (recent app engagement, time of
day, recent cannabis abstinence) expanded into the 8 interaction products
``[1, s1, s2, s3, s1*s2, s2*s3, s1*s3, s1*s2*s3]``.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import RejectedInput

#: Number of past decision points entering the exponential averages (7 days x 2).
HISTORY_WINDOW = 14

#: Decay rate of the exponential averages.
GAMMA = 13.0 / 14.0

#: Brushing quality is truncated at this many seconds.
QUALITY_CAP = 180.0

ORALYTICS_CONTEXT_DIM = 5
ORALYTICS_FEATURE_DIM = 15
MIWAVES_STATE_DIM = 3
MIWAVES_FEATURE_DIM = 8
MIWAVES_PHI_DIM = 24

#: Advantage-weight positions inside the full weight vectors.
ORALYTICS_ADVANTAGE = slice(10, 15)
MIWAVES_ADVANTAGE = slice(8, 16)


def exp_average(values: Sequence[float], gamma: float = GAMMA) -> float:
    """Normalized exponentially weighted average of the last 14 values.

    ``values`` must hold exactly 14 entries ordered most-recent-first.
    Weights are ``c * gamma**(j-1)`` for j = 1..14 with
    ``c = (1 - gamma) / (1 - gamma**14)`` so they sum to one; a constant
    input is therefore a fixed point.
    """
    if len(values) != HISTORY_WINDOW:
        raise RejectedInput(f"expected exactly {HISTORY_WINDOW} values, got {len(values)}")
    if not (0.0 < gamma < 1.0):
        raise RejectedInput(f"gamma must lie in (0, 1), got {gamma}")
    weights = gamma ** np.arange(HISTORY_WINDOW)
    c = (1.0 - gamma) / (1.0 - gamma**HISTORY_WINDOW)
    return float(c * np.dot(weights, np.asarray(values, dtype=float)))


def normalize_quality_avg(b_bar: float) -> float:
    """Map a quality average on [0, 180] seconds onto [-1, 1]."""
    return 2.0 * (b_bar / QUALITY_CAP) - 1.0


def normalize_action_avg(a_bar: float) -> float:
    """Map a prompt-rate average on [0, 1] onto [-1, 1]."""
    return 2.0 * a_bar - 1.0


def _pad_window(history: Sequence[float]) -> list[float]:
    # Decision points before trial entry contribute zeros (cold start).
    vals = list(history[:HISTORY_WINDOW])
    vals += [0.0] * (HISTORY_WINDOW - len(vals))
    return vals


def build_context_oralytics(
    quality_history: Sequence[float],
    action_history: Sequence[float],
    time_of_day: int,
    opened_app_prior_day: int,
    gamma: float = GAMMA,
) -> np.ndarray:
    """Assemble the 5-feature Oralytics context at a decision point.

    Histories are ordered most-recent-first and may be shorter than 14
    entries; missing entries are zero-padded so new participants start at
    the normalized floor of -1 for both averages.
    """
    if time_of_day not in (0, 1):
        raise RejectedInput(f"time_of_day must be 0 (morning) or 1 (evening), got {time_of_day}")
    if opened_app_prior_day not in (0, 1):
        raise RejectedInput(f"opened_app_prior_day must be 0 or 1, got {opened_app_prior_day}")
    b_bar = exp_average(_pad_window(quality_history), gamma)
    a_bar = exp_average(_pad_window(action_history), gamma)
    return np.array(
        [
            float(time_of_day),
            normalize_quality_avg(b_bar),
            normalize_action_avg(a_bar),
            float(opened_app_prior_day),
            1.0,
        ]
    )


def feature_map_oralytics(context: np.ndarray, action: int, pi: float) -> np.ndarray:
    """Action-centered regression features: [S, pi*S, (A - pi)*S]."""
    s = np.asarray(context, dtype=float)
    if s.shape != (ORALYTICS_CONTEXT_DIM,):
        raise RejectedInput(f"context must have shape (5,), got {s.shape}")
    return np.concatenate([s, pi * s, (action - pi) * s])


def feature_map_miwaves(state: Sequence[int]) -> np.ndarray:
    """Interaction expansion of the 3 binary state bits into 8 features."""
    s = np.asarray(state, dtype=float)
    if s.shape != (MIWAVES_STATE_DIM,) or not np.isin(s, (0.0, 1.0)).all():
        raise RejectedInput(f"state must be 3 binary values, got {state!r}")
    s1, s2, s3 = s
    return np.array([1.0, s1, s2, s3, s1 * s2, s2 * s3, s1 * s3, s1 * s2 * s3])


def phi_miwaves(state: Sequence[int], action: int, pi: float) -> np.ndarray:
    """Mixed-model regression features: [f, (A - pi)*f, pi*f] with f = g."""
    f = feature_map_miwaves(state)
    return np.concatenate([f, (action - pi) * f, pi * f])
