"""Observable moment estimators, spectral whitening, and per-feature slices.

The first moment is the vector of column means; the second is the normalized
co-occurrence Gram matrix.  Third-order information is only ever touched
through d whitened k x k slices, so the dense d^3 tensor never exists here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import sparse

from .dataset import BinaryDataset
from .errors import EmptyDatasetError, ParameterError, RankDeficiencyError, RankInfeasibleError

#: Relative spectral cutoff: singular values below RANK_TOL_RATIO * s_max do
#: not count toward the effective rank.
RANK_TOL_RATIO = 1e-8


@dataclass(frozen=True, eq=False)
class MomentSet:
    """First and second observable moments plus the sample count behind them."""

    m1: np.ndarray
    m2: np.ndarray
    n: int

    def __post_init__(self):
        m1 = np.asarray(self.m1, dtype=np.float64)
        m2 = np.asarray(self.m2, dtype=np.float64)
        if m1.ndim != 1 or m2.shape != (m1.size, m1.size):
            raise ParameterError("m1 must be (d,) and m2 must be (d, d)")
        m1.setflags(write=False)
        m2.setflags(write=False)
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "m2", m2)


@dataclass(frozen=True, eq=False)
class WhiteningBasis:
    """Top-k spectral basis of m2 and the dataset projected through it.

    ``projected`` holds the N x k whitened rows X u_k diag(s_k^{-1/2});
    their Gram matrix divided by N is the identity by construction.
    """

    u_k: np.ndarray
    s_k: np.ndarray
    projected: np.ndarray

    @property
    def k(self) -> int:
        return self.s_k.size


@dataclass(frozen=True, eq=False)
class SliceMatrix:
    """One feature's whitened third-order slice: a symmetric k x k matrix."""

    feature: int
    h: np.ndarray


@dataclass(frozen=True, eq=False)
class BiasBound:
    """Per-feature diagonal-bias budget of the moment estimators."""

    feature: int
    second_order: float
    third_order_diag: float


def estimate_m1(dataset: BinaryDataset) -> np.ndarray:
    """Column means of the binary matrix."""
    if dataset.n_rows == 0:
        raise EmptyDatasetError("cannot estimate moments of an empty dataset")
    return np.asarray(dataset.matrix.sum(axis=0)).ravel() / dataset.n_rows


def estimate_m2(dataset: BinaryDataset) -> MomentSet:
    """Normalized co-occurrence matrix X^T X / N together with m1.

    Off-diagonal entries are unbiased for the model second moment; diagonal
    entries equal m1 (x^2 = x for binary data), hence carry the bias that
    ``bias_bounds`` budgets.
    """
    if dataset.n_rows == 0:
        raise EmptyDatasetError("cannot estimate moments of an empty dataset")
    x = dataset.matrix
    gram = (x.T @ x).toarray() / dataset.n_rows
    gram = (gram + gram.T) / 2.0
    return MomentSet(m1=estimate_m1(dataset), m2=gram, n=dataset.n_rows)


def truncated_basis(m2: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic top-k SVD factors (u_k, s_k) of a symmetric PSD matrix.

    The effective rank is the count of singular values above
    RANK_TOL_RATIO * s_max; requesting more raises RankDeficiencyError naming
    the achievable rank.  Each singular vector's sign is fixed so that its
    largest-magnitude entry is positive, making the factors reproducible.
    """
    m2 = np.asarray(m2, dtype=np.float64)
    d = m2.shape[0]
    if k < 1:
        raise ParameterError("k must be >= 1")
    if k > d:
        raise RankInfeasibleError(f"k={k} exceeds the feature count d={d}")
    u, s, _ = np.linalg.svd(m2)
    cutoff = RANK_TOL_RATIO * (s[0] if s.size else 0.0)
    achievable = int(np.sum(s > cutoff))
    if achievable < k:
        raise RankDeficiencyError(
            f"second moment supports rank {achievable}, but k={k} was requested",
            achievable_rank=achievable,
        )
    u_k = u[:, :k].copy()
    top = np.argmax(np.abs(u_k), axis=0)
    signs = np.sign(u_k[top, np.arange(k)])
    signs[signs == 0] = 1.0
    u_k *= signs
    return u_k, s[:k].copy()


def whiten(dataset: BinaryDataset, moments: MomentSet, k: int) -> WhiteningBasis:
    """Project rows into the whitened k-dimensional spectral space of m2."""
    u_k, s_k = truncated_basis(moments.m2, k)
    projected = dataset.matrix @ (u_k / np.sqrt(s_k))
    return WhiteningBasis(u_k=u_k, s_k=s_k, projected=np.asarray(projected))


def _slice_from_csc(
    projected: np.ndarray, csc: sparse.csc_matrix, feature: int, n_rows: int
) -> SliceMatrix:
    rows = csc.indices[csc.indptr[feature] : csc.indptr[feature + 1]]
    sel = projected[rows]
    h = (sel.T @ sel) / n_rows
    return SliceMatrix(feature=feature, h=(h + h.T) / 2.0)


def feature_slice(
    basis: WhiteningBasis, dataset: BinaryDataset, feature: int
) -> SliceMatrix:
    """Whitened slice of one feature: X_k^T diag(x_feature) X_k / N."""
    if not 0 <= feature < dataset.n_cols:
        raise ParameterError(f"feature {feature} out of range [0, {dataset.n_cols})")
    return _slice_from_csc(
        basis.projected, dataset.matrix.tocsc(), feature, dataset.n_rows
    )


def iter_feature_slices(
    basis: WhiteningBasis, dataset: BinaryDataset
) -> Iterator[SliceMatrix]:
    """Yield every feature's whitened slice; one pass over the sparse columns."""
    csc = dataset.matrix.tocsc()
    for feature in range(dataset.n_cols):
        yield _slice_from_csc(basis.projected, csc, feature, dataset.n_rows)


def bias_bounds(moments: MomentSet) -> list[BiasBound]:
    """Per-feature budgets for the diagonal bias of the moment estimators.

    For 0/1 features the second-order diagonal bias is at most m1_i - m1_i^2
    and the third-order super-diagonal bias at most m1_i - m1_i^3; both
    budgets vanish for degenerate features (m1_i in {0, 1}).
    """
    return [
        BiasBound(
            feature=i,
            second_order=float(v - v * v),
            third_order_diag=float(v - v * v * v),
        )
        for i, v in enumerate(moments.m1)
    ]
