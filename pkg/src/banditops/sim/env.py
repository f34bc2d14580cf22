"""Synthetic participant environment.

Stands in for the sensors and apps the real trials drew data from.
Every outcome is a pure function of (master seed, participant index,
decision index), so re-querying the same outcome -- at decision time,
at window close, at a later update fetch -- always returns the same
value regardless of call order.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_LATENT, _BRUSH, _APP, _EMA, _USE, _CLICK, _CANNABIS, _PRESSURE = range(1, 9)


class EnvModel:
    def __init__(self, master_seed: int, profile: str):
        self.master_seed = int(master_seed) & 0xFFFFFFFF
        self.profile = profile

    def _rng(self, *key: int) -> np.random.Generator:
        return np.random.default_rng([self.master_seed, *key])

    @lru_cache(maxsize=None)
    def _latent(self, pid_idx: int) -> tuple[float, ...]:
        rng = self._rng(_LATENT, pid_idx)
        return (
            float(rng.uniform(60.0, 150.0)),  # mean brushing quality, seconds
            float(rng.uniform(0.0, 25.0)),  # prompt effect on quality
            float(rng.uniform(0.3, 0.9)),  # p(open app on a day)
            float(rng.uniform(0.4, 0.9)),  # p(finish self-monitoring survey)
            float(rng.uniform(0.3, 0.8)),  # p(use app in a window)
            float(rng.uniform(0.2, 0.7)),  # p(click a delivered prompt)
            float(rng.uniform(0.2, 0.8)),  # p(report cannabis use)
        )

    # -- Oralytics outcomes ---------------------------------------------------

    def brushing_quality(self, pid_idx: int, decision_t: int, action: int) -> float:
        """Raw brushing seconds; occasionally exceeds the 180 s cap."""
        mu, effect, *_ = self._latent(pid_idx)
        rng = self._rng(_BRUSH, pid_idx, decision_t)
        return float(max(0.0, rng.normal(mu + effect * action, 35.0)))

    def pressure_duration(self, pid_idx: int, decision_t: int) -> float:
        rng = self._rng(_PRESSURE, pid_idx, decision_t)
        return float(max(0.0, rng.normal(4.0, 2.0)))

    def app_opened(self, pid_idx: int, day: int) -> int:
        p_open = self._latent(pid_idx)[2]
        rng = self._rng(_APP, pid_idx, day)
        return int(rng.random() < p_open)

    # -- MiWaves outcomes -------------------------------------------------------

    def engagement(self, pid_idx: int, decision_t: int, action: int) -> dict:
        """Window outcome tuple; engagement rises slightly when prompted."""
        _, _, _, p_ema, p_app, p_click, p_use = self._latent(pid_idx)
        boost = 0.1 * action
        finished_ema = bool(self._rng(_EMA, pid_idx, decision_t).random() < min(1.0, p_ema + boost))
        app_use = bool(self._rng(_USE, pid_idx, decision_t).random() < min(1.0, p_app + boost))
        message_click = bool(
            action == 1 and self._rng(_CLICK, pid_idx, decision_t).random() < p_click
        )
        rng_c = self._rng(_CANNABIS, pid_idx, decision_t)
        using = bool(rng_c.random() < p_use)
        # Stored as [quantity in grams, uses per day]; zero when abstaining.
        quantity = round(float(rng_c.uniform(0.1, 2.0)), 3) if using else 0.0
        frequency = float(rng_c.integers(1, 5)) if using else 0.0
        return {
            "finished_ema": finished_ema,
            "app_use": app_use,
            "message_click": message_click,
            "cannabis_using": using,
            "cannabis_use": [quantity, frequency],
        }
