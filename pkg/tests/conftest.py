"""Shared oracles and model builders for the test suite.

The oracles here recompute quantities by independent routes (dense brute
force, analytic formulas, pair enumeration) so library results always have a
second derivation to match against.
"""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np

import binmix


def analytic_moments(means: np.ndarray, weights: np.ndarray):
    """Exact model moments built directly from the definition.

    m1 = sum_h w_h mu_h, m2 = sum_h w_h mu_h mu_h^T, m3 the rank-one sum of
    third-order outer products.
    """
    m1 = means @ weights
    m2 = (means * weights) @ means.T
    m3 = np.einsum("ih,jh,lh,h->ijl", means, means, means, weights)
    return m1, m2, m3


def empirical_moments(dataset: binmix.BinaryDataset):
    """Dense brute-force estimators over the sample, including the d^3 tensor."""
    x = dataset.to_dense()
    n = x.shape[0]
    m1 = x.mean(axis=0)
    m2 = x.T @ x / n
    m3 = np.einsum("ni,nj,nl->ijl", x, x, x) / n
    return m1, m2, m3


def random_admissible_model(rng: np.random.Generator, d: int, k: int,
                            min_weight: float = 0.1) -> binmix.MixtureParams:
    """Random model with full-rank means, a distinct-entry row, and weights
    bounded below by ``min_weight``."""
    means = rng.uniform(0.05, 0.95, size=(d, k))
    leftover = 1.0 - k * min_weight
    weights = min_weight + leftover * rng.dirichlet(np.ones(k))
    return binmix.MixtureParams(means, weights)


def best_permutation_error(recovered: binmix.MixtureParams,
                           means: np.ndarray, weights: np.ndarray) -> float:
    """Max-abs parameter error minimized over component relabelings."""
    k = weights.size
    best = np.inf
    for perm in permutations(range(k)):
        p = list(perm)
        err = max(
            np.abs(recovered.means[:, p] - means).max(),
            np.abs(recovered.weights[p] - weights).max(),
        )
        best = min(best, err)
    return best


def pair_counting_ari(labels_a, labels_b) -> float:
    """Adjusted Rand index by direct enumeration of all item pairs."""
    a = list(labels_a)
    b = list(labels_b)
    n = len(a)
    ss = sd = ds = dd = 0
    for i, j in combinations(range(n), 2):
        same_a = a[i] == a[j]
        same_b = b[i] == b[j]
        if same_a and same_b:
            ss += 1
        elif same_a:
            sd += 1
        elif same_b:
            ds += 1
        else:
            dd += 1
    total = ss + sd + ds + dd
    expected = (ss + sd) * (ss + ds) / total
    max_index = ((ss + sd) + (ss + ds)) / 2.0
    if max_index == expected:
        return 1.0
    return (ss - expected) / (max_index - expected)


def separable_model(d: int, k: int, seed: int) -> binmix.MixtureParams:
    """Block-signature mixture whose components differ by >= 0.5 in some
    feature's conditional mean, with every feature row k-distinct."""
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.02, 0.25, size=(d, k))
    block = d // k
    for c in range(k):
        means[c * block : (c + 1) * block, c] = rng.uniform(0.75, 0.95, size=block)
    weights = 0.1 + (1.0 - 0.1 * k) * rng.dirichlet(np.ones(k))
    return binmix.MixtureParams(means, weights)
