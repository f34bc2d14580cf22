"""Gaussian posterior updates for both reward models.

Oralytics uses plain conjugate Bayesian linear regression over a 15-dim
weight vector.  MiWaves uses a linear mixed model: every participant i
has weights ``theta_i = theta_pop + u_i`` with ``u_i ~ N(0, Sigma_u)``,
so the joint prior over the stacked ``(theta_1, ..., theta_m)`` has
``Sigma_theta + Sigma_u`` on the diagonal blocks and ``Sigma_theta`` on
every off-diagonal block (the shared population term induces the
cross-participant correlation).  Both updates are recomputed from the
full interaction history every time.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, NumericalError, RejectedInput, RosterDesyncError
from .params import PriorSpec

_SYM_TOL = 1e-10


def _require_pd(sigma: np.ndarray, what: str) -> None:
    if not np.allclose(sigma, sigma.T, atol=_SYM_TOL):
        raise ConfigurationError(f"{what} covariance is not symmetric")
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        eigs = np.linalg.eigvalsh(sigma)
        raise ConfigurationError(
            f"{what} covariance is not positive definite (min eig {eigs.min():g})"
        )


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


@dataclass(frozen=True)
class PosteriorState:
    """Indexed policy snapshot: N(mu, sigma) over the model weights.

    ``policy_idx`` 0 denotes the prior distribution before any data
    update; index k is the k-th refresh.
    """

    policy_idx: int
    mu: np.ndarray
    sigma: np.ndarray
    updated_at: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        if self.policy_idx < 0:
            raise ConfigurationError("policy_idx must be nonnegative")
        if self.sigma.shape != (self.mu.size, self.mu.size):
            raise ConfigurationError("mu / sigma dimensions disagree")
        _require_pd(self.sigma, "posterior")

    @property
    def dim(self) -> int:
        return self.mu.size

    def marginal(self, idx: slice) -> tuple[np.ndarray, np.ndarray]:
        """Marginal (mu, sigma) over a contiguous weight block."""
        return self.mu[idx].copy(), self.sigma[idx, idx].copy()


def posterior_update_blr(
    prior: PosteriorState,
    batch: Sequence[tuple[np.ndarray, float]],
    sigma2: float,
    updated_at: str | None = None,
) -> PosteriorState:
    """Conjugate Gaussian update for the linear reward model.

    With design rows Phi and rewards R observed under noise variance
    ``sigma2``:

        Sigma_post = (Sigma0^-1 + Phi' Phi / sigma2)^-1
        mu_post    = Sigma_post (Sigma0^-1 mu0 + Phi' R / sigma2)

    An empty batch returns the prior with the policy index advanced.
    """
    if sigma2 <= 0:
        raise RejectedInput(f"sigma2 must be positive, got {sigma2}")
    if not batch:
        return replace(prior, policy_idx=prior.policy_idx + 1, updated_at=updated_at)
    phi = np.asarray([p for p, _ in batch], dtype=float)
    r = np.asarray([float(y) for _, y in batch])
    if phi.ndim != 2 or phi.shape[1] != prior.dim:
        raise RejectedInput(
            f"design rows must have dimension {prior.dim}, got shape {phi.shape}"
        )
    prec0 = np.linalg.inv(prior.sigma)
    prec_post = prec0 + phi.T @ phi / sigma2
    sigma_post = _symmetrize(np.linalg.inv(prec_post))
    mu_post = sigma_post @ (prec0 @ prior.mu + phi.T @ r / sigma2)
    return PosteriorState(
        policy_idx=prior.policy_idx + 1,
        mu=mu_post,
        sigma=sigma_post,
        updated_at=updated_at,
    )


@dataclass(frozen=True)
class JointPosteriorState:
    """Stacked per-participant posterior for the mixed model.

    ``participant_ids`` fixes the block order: participant i's weights
    occupy rows ``i*d : (i+1)*d`` of ``mu`` and the matching blocks of
    ``sigma``.
    """

    policy_idx: int
    participant_ids: tuple[str, ...]
    mu: np.ndarray
    sigma: np.ndarray
    updated_at: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        m = len(self.participant_ids)
        if m == 0:
            raise ConfigurationError("joint posterior needs at least one participant")
        if self.mu.size % m != 0:
            raise ConfigurationError("stacked dimension not divisible by participant count")
        if self.sigma.shape != (self.mu.size, self.mu.size):
            raise ConfigurationError("mu / sigma dimensions disagree")
        _require_pd(self.sigma, "joint posterior")

    @property
    def block_dim(self) -> int:
        return self.mu.size // len(self.participant_ids)

    def block_slice(self, participant_id: str) -> slice:
        i = self.participant_ids.index(participant_id)
        d = self.block_dim
        return slice(i * d, (i + 1) * d)

    def participant_marginal(
        self, participant_id: str, idx: slice | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Marginal (mu, sigma) for one participant, optionally sub-sliced."""
        blk = self.block_slice(participant_id)
        mu = self.mu[blk]
        sig = self.sigma[blk, blk]
        if idx is not None:
            mu, sig = mu[idx], sig[idx, idx]
        return mu.copy(), sig.copy()


def stacked_prior(
    prior: PriorSpec, sigma_u: np.ndarray, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Joint prior over m stacked participant weight vectors.

    Mean is the population prior repeated; covariance has
    ``Sigma_theta + Sigma_u`` on the diagonal blocks and ``Sigma_theta``
    everywhere else.
    """
    d = prior.dim
    mu = np.tile(prior.mu, m)
    sigma = np.tile(prior.sigma, (m, m))
    for i in range(m):
        blk = slice(i * d, (i + 1) * d)
        sigma[blk, blk] += sigma_u
    return mu, sigma


def posterior_update_mixed(
    prior: PriorSpec,
    batches: Mapping[str, Sequence[tuple[np.ndarray, float]]],
    sigma2_eps: float,
    sigma_u: np.ndarray,
    *,
    roster: Sequence[str],
    policy_idx: int = 1,
    updated_at: str | None = None,
) -> JointPosteriorState:
    """Joint mixed-model update over every participant in the roster.

    Assembles the block-diagonal Gram matrix A (sum of phi phi' per
    participant), the stacked moment vector B (sum of phi * reward per
    participant) and the joint prior, then conditions:

        Sigma_post = (SigmaTilde^-1 + A / sigma2_eps)^-1
        mu_post    = Sigma_post (SigmaTilde^-1 mu_stacked + B / sigma2_eps)

    Every roster member must be a key of ``batches`` (an empty sequence
    is fine); data for anyone outside the roster is a desync.
    """
    if sigma2_eps <= 0:
        raise RejectedInput(f"sigma2_eps must be positive, got {sigma2_eps}")
    roster = list(roster)
    if not roster:
        raise RejectedInput("roster must not be empty")
    extra = sorted(set(batches) - set(roster))
    missing = sorted(set(roster) - set(batches))
    if extra or missing:
        raise RosterDesyncError(
            f"roster/batch mismatch: extra={extra}, missing={missing}",
            extra=extra,
            missing=missing,
        )
    d = prior.dim
    m = len(roster)
    mu0, sigma_tilde = stacked_prior(prior, np.asarray(sigma_u, dtype=float), m)

    a = np.zeros((m * d, m * d))
    b = np.zeros(m * d)
    for i, pid in enumerate(roster):
        blk = slice(i * d, (i + 1) * d)
        for phi, reward in batches[pid]:
            phi = np.asarray(phi, dtype=float)
            if phi.shape != (d,):
                raise RejectedInput(
                    f"participant {pid}: design row has shape {phi.shape}, expected ({d},)"
                )
            a[blk, blk] += np.outer(phi, phi)
            b[blk.start : blk.stop] += phi * float(reward)

    try:
        prec_prior = np.linalg.inv(sigma_tilde)
        prec_post = prec_prior + a / sigma2_eps
        sigma_post = _symmetrize(np.linalg.inv(prec_post))
        mu_post = sigma_post @ (prec_prior @ mu0 + b / sigma2_eps)
        np.linalg.cholesky(sigma_post)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"mixed-model update failed: {exc}",
            diagnostics={
                "participants": m,
                "rows": int(sum(len(v) for v in batches.values())),
                "prior_cond": float(np.linalg.cond(sigma_tilde)),
            },
        )
    return JointPosteriorState(
        policy_idx=policy_idx,
        participant_ids=tuple(roster),
        mu=mu_post,
        sigma=sigma_post,
        updated_at=updated_at,
    )
