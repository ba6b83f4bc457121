"""EM refinement of a Bernoulli mixture, run entirely in the log domain.

The E-step never touches zero cells: per-row log masses decompose into a
per-component base term (all features off) plus a sparse correction summed
over the active features, so one sparse matvec per iteration does the work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .dataset import BinaryDataset
from .errors import EmptyDatasetError, ParameterError
from .params import MixtureParams

#: Posterior mass below which a component counts as empty in the M-step.
_EMPTY_COMPONENT_TOL = 1e-12

#: Guards log() against exact-zero mixing weights.
_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class EmConfig:
    """Stopping rule and numeric guards for ``em_refine``.

    Iteration stops at the first weight update with Euclidean norm below
    ``omega_tol`` (strict), or after ``max_iters`` iterations.  Conditional
    means are clamped into [prob_floor, 1 - prob_floor] so log-likelihoods
    stay finite.
    """

    omega_tol: float = 0.01
    max_iters: int = 500
    prob_floor: float = 1e-6

    def __post_init__(self):
        if self.omega_tol < 0:
            raise ParameterError("omega_tol must be >= 0")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if not 0.0 < self.prob_floor < 0.5:
            raise ParameterError("prob_floor must lie in (0, 0.5)")


@dataclass(frozen=True, eq=False)
class EmTrace:
    """Convergence record of one EM run.

    ``loglik`` holds iterations + 1 values: the total log-likelihood entering
    each iteration plus the final model's value; the sequence is
    non-decreasing up to floating slack.  ``omega_deltas`` holds the weight
    update norm of each executed iteration.
    """

    iterations: int
    loglik: np.ndarray
    omega_deltas: np.ndarray
    converged: bool


def _floored(means: np.ndarray, eps: float) -> np.ndarray:
    return np.clip(means, eps, 1.0 - eps)


def _log_masses(means, weights, matrix) -> np.ndarray:
    """Per-row, per-component joint log masses; ``means`` must be floored."""
    log_mu = np.log(means)
    log_1m = np.log1p(-means)
    base = log_1m.sum(axis=0) + np.log(np.maximum(weights, _TINY))
    return matrix @ (log_mu - log_1m) + base


def posteriors(
    params: MixtureParams, dataset: BinaryDataset, prob_floor: float = 1e-6
) -> np.ndarray:
    """Responsibility matrix (N x k); every row sums to 1."""
    lm = _log_masses(_floored(params.means, prob_floor), params.weights, dataset.matrix)
    return _normalized(lm)


def posterior(params: MixtureParams, row, prob_floor: float = 1e-6) -> np.ndarray:
    """Posterior component probabilities of a single binary d-vector."""
    x = np.asarray(row, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != params.n_features:
        raise ParameterError("row length must equal the number of features")
    lm = _log_masses(_floored(params.means, prob_floor), params.weights, x)
    return _normalized(lm)[0]


def _normalized(log_masses: np.ndarray) -> np.ndarray:
    shift = log_masses.max(axis=1, keepdims=True)
    p = np.exp(log_masses - shift)
    p /= p.sum(axis=1, keepdims=True)
    return p


def log_likelihood(
    params: MixtureParams, dataset: BinaryDataset, prob_floor: float = 1e-6
) -> float:
    """Total log-likelihood of the dataset under the (floored) model."""
    if dataset.n_rows == 0:
        raise EmptyDatasetError("cannot score an empty dataset")
    lm = _log_masses(_floored(params.means, prob_floor), params.weights, dataset.matrix)
    return float(logsumexp(lm, axis=1).sum())


def em_refine(
    dataset: BinaryDataset,
    init: MixtureParams,
    config: EmConfig | None = None,
) -> tuple[MixtureParams, EmTrace]:
    """Refine mixture parameters by EM until the weights stop moving.

    Each iteration computes responsibilities under the current model and
    replaces means with posterior-weighted feature frequencies and weights
    with mean responsibilities.  A component whose posterior mass vanishes
    keeps its previous mean column and is pinned at the probability floor,
    with weights renormalized.  Permuting the init columns permutes the
    output accordingly.
    """
    if config is None:
        config = EmConfig()
    if dataset.n_rows == 0:
        raise EmptyDatasetError("cannot refine on an empty dataset")
    if init.n_features != dataset.n_cols:
        raise ParameterError("init means must have one row per dataset column")
    x = dataset.matrix
    n = dataset.n_rows
    eps = config.prob_floor
    means = _floored(init.means, eps)
    weights = np.asarray(init.weights, dtype=np.float64).copy()

    logliks: list[float] = []
    deltas: list[float] = []
    converged = False
    iterations = config.max_iters
    for it in range(config.max_iters):
        lm = _log_masses(means, weights, x)
        logliks.append(float(logsumexp(lm, axis=1).sum()))
        post = _normalized(lm)

        nk = post.sum(axis=0)
        sums = x.T @ post
        new_weights = nk / n
        new_means = np.array(means)
        alive = nk > _EMPTY_COMPONENT_TOL
        new_means[:, alive] = sums[:, alive] / nk[alive]
        if not alive.all():
            new_weights[~alive] = eps
            new_weights = new_weights / new_weights.sum()
        new_means = _floored(new_means, eps)

        delta = float(np.linalg.norm(new_weights - weights))
        deltas.append(delta)
        means, weights = new_means, new_weights
        if delta < config.omega_tol:
            converged = True
            iterations = it + 1
            break

    refined = MixtureParams(means=means, weights=weights)
    logliks.append(log_likelihood(refined, dataset, eps))
    return refined, EmTrace(
        iterations=iterations,
        loglik=np.asarray(logliks),
        omega_deltas=np.asarray(deltas),
        converged=converged,
    )
