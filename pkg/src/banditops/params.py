"""Trial profiles and their tunable parameters.

Two built-in profiles are shipped:

* ``ORALYTICS`` -- 70-day tooth-brushing trial, two decision points per
  day, weekly policy refresh, Bayesian linear regression with action
  centering over a 5-feature context (15 model weights).
* ``MIWAVES`` -- 30-day cannabis-reduction trial, two decision points per
  day, nightly policy refresh, Bayesian linear mixed model with
  per-participant random effects over a 3-bit state (24 weights per
  participant).

Both profiles randomize prompts through smooth posterior sampling with a
generalized logistic squashing function whose asymptotes clip every
action-selection probability into ``[l_min, l_max]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError


class TrialName(str, Enum):
    ORALYTICS = "ORALYTICS"
    MIWAVES = "MIWAVES"


class UpdateCadence(str, Enum):
    WEEKLY = "WEEKLY"
    DAILY = "DAILY"


@dataclass(frozen=True)
class RhoParams:
    """Generalized logistic squashing parameters.

    rho(x) = l_min + (l_max - l_min) / (1 + c * exp(-b * x)) ** k

    The asymptotes keep probabilities bounded away from 0 and 1 so that
    post-trial analyses retain statistical power.
    """

    l_min: float = 0.2
    l_max: float = 0.8
    b: float = 1.0
    c: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.l_min < self.l_max < 1.0):
            raise ConfigurationError(
                f"need 0 < l_min < l_max < 1, got ({self.l_min}, {self.l_max})"
            )
        if min(self.b, self.c, self.k) <= 0:
            raise ConfigurationError("rho shape parameters b, c, k must be positive")


@dataclass(frozen=True)
class CostParams:
    """Prompt-cost parameters for the Oralytics surrogate reward.

    Thresholds are expressed on the normalized [-1, 1] feature scale used
    by the policy state; inputs are normalized before comparison.
    """

    xi1: float = 100.0
    xi2: float = 100.0
    b_thresh: float = 0.5
    a1_thresh: float = 0.5
    a2_thresh: float = 0.8

    def __post_init__(self):
        for name in ("xi1", "xi2"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be nonnegative")
        for name in ("xi1", "xi2", "b_thresh", "a1_thresh", "a2_thresh"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")


@dataclass
class PriorSpec:
    """Gaussian prior over model weights: N(mu, sigma)."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.mu.ndim != 1 or self.sigma.shape != (self.mu.size, self.mu.size):
            raise ConfigurationError(
                f"prior shapes inconsistent: mu {self.mu.shape}, sigma {self.sigma.shape}"
            )
        if not np.allclose(self.sigma, self.sigma.T, atol=1e-10):
            raise ConfigurationError("prior covariance must be symmetric")
        try:
            np.linalg.cholesky(self.sigma)
        except np.linalg.LinAlgError:
            raise ConfigurationError("prior covariance must be positive definite")

    @property
    def dim(self) -> int:
        return self.mu.size


def _check_psd(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if not np.allclose(m, m.T, atol=1e-10):
        raise ConfigurationError(f"{name} must be symmetric")
    eigmin = float(np.linalg.eigvalsh(m).min())
    if eigmin < -1e-10:
        raise ConfigurationError(f"{name} must be positive semidefinite (min eig {eigmin:g})")
    return m


@dataclass
class TrialProfile:
    """Everything the decision mathematics needs to run one trial flavor."""

    name: TrialName
    trial_length_days: int
    update_cadence: UpdateCadence
    rho: RhoParams
    prior: PriorSpec
    noise_variance: float
    decision_points_per_day: int = 2
    cost: CostParams | None = None
    random_effects_cov: np.ndarray | None = None

    def __post_init__(self):
        if self.noise_variance <= 0:
            raise ConfigurationError("noise variance must be positive")
        if self.decision_points_per_day != 2:
            raise ConfigurationError("both supported profiles run 2 decision points per day")
        expected_T = {TrialName.ORALYTICS: 140, TrialName.MIWAVES: 60}[self.name]
        if self.total_decision_points != expected_T:
            raise ConfigurationError(
                f"{self.name.value} must have {expected_T} decision points per participant, "
                f"got {self.total_decision_points}"
            )
        if self.name is TrialName.MIWAVES:
            if self.random_effects_cov is None:
                raise ConfigurationError("MIWAVES requires a random-effects covariance")
            self.random_effects_cov = _check_psd(self.random_effects_cov, "random_effects_cov")
            if self.random_effects_cov.shape != (self.weight_dim, self.weight_dim):
                raise ConfigurationError("random_effects_cov must be 24x24")
        if self.prior.dim != self.weight_dim:
            raise ConfigurationError(
                f"prior dimension {self.prior.dim} != weight dimension {self.weight_dim}"
            )

    @property
    def total_decision_points(self) -> int:
        return self.trial_length_days * self.decision_points_per_day

    @property
    def context_dim(self) -> int:
        return 5 if self.name is TrialName.ORALYTICS else 3

    @property
    def weight_dim(self) -> int:
        """Dimension of the model-weight vector (per participant for MIWAVES)."""
        return 15 if self.name is TrialName.ORALYTICS else 24

    @property
    def advantage_slice(self) -> slice:
        """Index range of the treatment-advantage weights within the weight vector."""
        # Oralytics weights are [baseline, prob-weighted, advantage];
        # MiWaves weights are [baseline, advantage, prob-weighted].
        return slice(10, 15) if self.name is TrialName.ORALYTICS else slice(8, 16)


def oralytics_profile(
    *,
    rho: RhoParams | None = None,
    cost: CostParams | None = None,
    prior: PriorSpec | None = None,
    noise_variance: float = 40.0**2,
    trial_length_days: int = 70,
) -> TrialProfile:
    """Default Oralytics profile: weakly informative prior at the 0-180 s reward scale."""
    return TrialProfile(
        name=TrialName.ORALYTICS,
        trial_length_days=trial_length_days,
        update_cadence=UpdateCadence.WEEKLY,
        rho=rho or RhoParams(),
        cost=cost or CostParams(),
        prior=prior or PriorSpec(np.zeros(15), 25.0 * np.eye(15)),
        noise_variance=noise_variance,
    )


def miwaves_profile(
    *,
    rho: RhoParams | None = None,
    prior: PriorSpec | None = None,
    noise_variance: float = 1.0,
    random_effects_cov: np.ndarray | None = None,
    trial_length_days: int = 30,
) -> TrialProfile:
    """Default MiWaves profile: unit noise at the 0-3 engagement reward scale."""
    return TrialProfile(
        name=TrialName.MIWAVES,
        trial_length_days=trial_length_days,
        update_cadence=UpdateCadence.DAILY,
        rho=rho or RhoParams(),
        prior=prior or PriorSpec(np.zeros(24), 25.0 * np.eye(24)),
        noise_variance=noise_variance,
        random_effects_cov=np.eye(24) if random_effects_cov is None else random_effects_cov,
    )
