"""Smooth posterior sampling: squashing function, clipped action
probabilities, and reproducible Bernoulli draws.

The action-selection probability is the Gaussian expectation

    pi = E[rho(s' beta)],   beta ~ N(mu_beta, Sigma_beta)

over the advantage-weight posterior.  Since ``s' beta`` is scalar
Gaussian the expectation reduces to a 1-D integral, evaluated with
fixed-node Gauss-Hermite quadrature so the result is deterministic.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np

from .errors import NumericalWarning, RejectedInput
from .params import RhoParams

#: Quadrature resolution; far beyond what a smooth bounded integrand needs.
GH_NODES = 100

#: Action seeds are integers in [0, SEED_SPACE).
SEED_SPACE = 1000


def rho(x, params: RhoParams):
    """Generalized logistic squashing, strictly inside (l_min, l_max).

    Accepts scalars or arrays; monotone nondecreasing in x for positive
    shape parameters.
    """
    x = np.asarray(x, dtype=float)
    # exp(-b*x) overflows float64 past ~709; the limit is rho -> l_min anyway.
    z = np.clip(-params.b * x, None, 700.0)
    denom = (1.0 + params.c * np.exp(z)) ** params.k
    out = params.l_min + (params.l_max - params.l_min) / denom
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4)
def _gh_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.hermite.hermgauss(n)
    return nodes, weights


def smooth_probability(
    mu_beta: np.ndarray,
    sigma_beta: np.ndarray,
    s: np.ndarray,
    params: RhoParams,
    nodes: int = GH_NODES,
) -> float:
    """Deterministic clipped action probability E[rho(s' beta)].

    ``sigma_beta`` is the advantage-block marginal of the current
    posterior.  The scalar projection ``s' beta ~ N(s'mu, s'Sigma s)``
    turns the expectation into a 1-D Gauss-Hermite sum; positive weights
    make the result a convex combination of rho values, so it stays in
    [l_min, l_max].  A (numerically) negative projected variance is
    clamped to zero with a warning.
    """
    mu_beta = np.asarray(mu_beta, dtype=float)
    s = np.asarray(s, dtype=float)
    mean = float(s @ mu_beta)
    var = float(s @ np.asarray(sigma_beta, dtype=float) @ s)
    if var < 0.0:
        warnings.warn(
            f"projected advantage variance {var:g} < 0; clamped to 0",
            NumericalWarning,
            stacklevel=2,
        )
        var = 0.0
    if var == 0.0:
        pi = rho(mean, params)
    else:
        x, w = _gh_nodes(nodes)
        y = mean + math.sqrt(2.0 * var) * x
        pi = float(w @ rho(y, params)) / math.sqrt(math.pi)
    return float(min(max(pi, params.l_min), params.l_max))


def draw_action(pi: float, seed: int) -> int:
    """Reproduce a Bernoulli(pi) draw from a stored integer seed.

    The seed maps to the midpoint uniform ``(seed + 0.5) / 1000``, which
    avoids ties when pi is an exact multiple of 1/1000; the action is 1
    iff that uniform falls below pi.  Pure function: same (pi, seed)
    always yields the same action.
    """
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise RejectedInput(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < SEED_SPACE:
        raise RejectedInput(f"seed must lie in [0, {SEED_SPACE - 1}], got {seed}")
    if not 0.0 <= pi <= 1.0:
        raise RejectedInput(f"pi must lie in [0, 1], got {pi}")
    return 1 if (seed + 0.5) / SEED_SPACE < pi else 0
