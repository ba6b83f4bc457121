"""Mixture parameter container shared by the decomposition, EM, and reporting layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_MEANS_TOL = 1e-9
_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MixtureParams:
    """Per-feature conditional means (d x k) plus mixing weights (k,).

    Mean entries live in [0, 1] and the weights form a point on the
    probability simplex (nonnegative, summing to 1 within 1e-9).  Arrays are
    stored read-only, so instances are safe to share across threads.
    """

    means: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if means.ndim != 2:
            raise ParameterError("means must be a 2-D array of shape (d, k)")
        if weights.ndim != 1 or weights.size != means.shape[1]:
            raise ParameterError("weights length must equal the number of mean columns")
        if weights.size == 0:
            raise ParameterError("at least one component is required")
        if means.size and (means.min() < -_MEANS_TOL or means.max() > 1.0 + _MEANS_TOL):
            raise ParameterError("mean entries must lie in [0, 1]")
        if weights.min() < -1e-12:
            raise ParameterError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ParameterError("weights must sum to 1")
        # Tiny arithmetic excursions are snapped back onto the valid set.
        means = np.clip(means, 0.0, 1.0)
        weights = np.maximum(weights, 0.0)
        means.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "weights", weights)

    @property
    def n_features(self) -> int:
        return self.means.shape[0]

    @property
    def n_components(self) -> int:
        return self.means.shape[1]
