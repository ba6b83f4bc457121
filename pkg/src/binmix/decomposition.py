"""Spectral recovery of mixture parameters from second/third-order moments.

Both entry points share one backbone: whiten the second moment, pick the
anchor feature whose whitened slice has the best-separated eigenvalues, use
its eigenvectors as the joint diagonalizer, and read every feature's
conditional means off the diagonalized slices.  ``svtd_exact`` consumes
explicit moment arrays; ``asvtd`` computes the same slices directly from the
sparse data matrix without ever materializing the third-order tensor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .dataset import BinaryDataset
from .errors import (
    AnchorNotFoundError,
    EmptyDatasetError,
    ParameterError,
    ParseError,
    RankDeficiencyError,
    RankInfeasibleError,
)
from .moments import SliceMatrix, estimate_m2, iter_feature_slices, truncated_basis, whiten
from .params import MixtureParams


@dataclass(frozen=True, eq=False)
class AnchorChoice:
    """Selected anchor feature, its eigenvalue gap, and the diagonalizer."""

    feature: int
    gap: float
    rotation: np.ndarray


def _eig_descending(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition, eigenvalues sorted descending.

    Each eigenvector's sign is fixed so its largest-magnitude entry is
    positive.  Eigenvalues keep their sign (they estimate conditional means,
    which noise can push below zero).
    """
    vals, vecs = np.linalg.eigh(h)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    top = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[top, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs
    return vals, vecs


def _min_gap(vals: np.ndarray) -> float:
    """Minimum pairwise distance among (sorted) eigenvalues; +inf for k=1."""
    if vals.size < 2:
        return float("inf")
    return float(np.min(np.abs(np.diff(vals))))


def select_anchor(slices: Iterable[SliceMatrix]) -> AnchorChoice:
    """Pick the feature maximizing the minimum pairwise eigenvalue gap.

    Ties break toward the lowest feature index.  If every candidate's gap is
    zero there is no feature separating the components and
    AnchorNotFoundError is raised.
    """
    best: tuple[float, int, np.ndarray] | None = None
    for sl in slices:
        vals, vecs = _eig_descending(sl.h)
        gap = _min_gap(vals)
        if best is None or gap > best[0]:
            best = (gap, sl.feature, vecs)
    if best is None:
        raise ParameterError("no slices supplied")
    gap, feature, rotation = best
    if not gap > 0.0:
        raise AnchorNotFoundError(
            "no feature separates the components: all eigenvalue gaps are zero"
        )
    return AnchorChoice(feature=feature, gap=gap, rotation=rotation)


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def recover_weights(means: np.ndarray, m1: np.ndarray) -> np.ndarray:
    """Solve m1 = means @ w in least squares and project onto the simplex."""
    means = np.asarray(means, dtype=np.float64)
    m1 = np.asarray(m1, dtype=np.float64)
    k = means.shape[1]
    if np.linalg.matrix_rank(means) < k:
        raise RankDeficiencyError(
            "recovered means are rank deficient; weights are not identifiable",
            achievable_rank=int(np.linalg.matrix_rank(means)),
        )
    solution, *_ = np.linalg.lstsq(means, m1, rcond=None)
    return _project_simplex(solution)


def _decompose(
    slices_factory: Callable[[], Iterator[SliceMatrix]],
    m1: np.ndarray,
    d: int,
    k: int,
) -> tuple[MixtureParams, AnchorChoice]:
    """Shared backbone: anchor pass, then a second pass reading off rows."""
    anchor = select_anchor(slices_factory())
    o = anchor.rotation
    rows = np.empty((d, k), dtype=np.float64)
    for sl in slices_factory():
        rows[sl.feature] = np.diag(o.T @ sl.h @ o)
    means = np.clip(rows, 0.0, 1.0)
    weights = recover_weights(means, m1)
    return MixtureParams(means=means, weights=weights), anchor


def svtd_exact(
    m1: np.ndarray, m2: np.ndarray, m3: np.ndarray, k: int
) -> MixtureParams:
    """Recover mixture parameters from explicit moment arrays.

    ``m2`` must be symmetric PSD with effective rank >= k, and some feature
    must have k distinct conditional means for the anchor to exist.  With
    exact moments of an admissible model the recovery is exact up to
    numerical error.
    """
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    m3 = np.asarray(m3, dtype=np.float64)
    d = m1.size
    if m2.shape != (d, d) or m3.shape != (d, d, d):
        raise ParameterError("m2 must be (d, d) and m3 must be (d, d, d)")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if k > d:
        raise RankInfeasibleError(f"k={k} exceeds the feature count d={d}")
    if k == 1:
        return MixtureParams(np.clip(m1, 0.0, 1.0)[:, None], np.ones(1))
    u_k, s_k = truncated_basis(m2, k)
    w = u_k / np.sqrt(s_k)

    def factory() -> Iterator[SliceMatrix]:
        for i in range(d):
            h = w.T @ m3[:, :, i] @ w
            yield SliceMatrix(feature=i, h=(h + h.T) / 2.0)

    params, _ = _decompose(factory, m1, d, k)
    return params


def asvtd_with_anchor(
    dataset: BinaryDataset, k: int
) -> tuple[MixtureParams, AnchorChoice]:
    """As ``asvtd`` but also returning the anchor choice for diagnostics."""
    if dataset.n_rows == 0:
        raise EmptyDatasetError("cannot decompose an empty dataset")
    d = dataset.n_cols
    if k < 1:
        raise ParameterError("k must be >= 1")
    if k > d:
        raise RankInfeasibleError(f"k={k} exceeds the feature count d={d}")
    moments = estimate_m2(dataset)
    if k == 1:
        params = MixtureParams(np.clip(moments.m1, 0.0, 1.0)[:, None], np.ones(1))
        anchor = AnchorChoice(feature=0, gap=float("inf"), rotation=np.ones((1, 1)))
        return params, anchor
    basis = whiten(dataset, moments, k)
    return _decompose(
        lambda: iter_feature_slices(basis, dataset), moments.m1, d, k
    )


def asvtd(dataset: BinaryDataset, k: int) -> MixtureParams:
    """Recover mixture parameters directly from the sparse data matrix.

    Algebraically identical to ``svtd_exact`` applied to the empirical
    moments of the same dataset, but runs in O(d^2 N + d k^2 N) time and
    never builds the third-order tensor: each feature's whitened slice is a
    k x k Gram matrix over the rows carrying that feature.
    """
    return asvtd_with_anchor(dataset, k)[0]


# ---------------------------------------------------------------------------
# Model files: full-precision JSON that round-trips bit-exactly.


def save_model(params: MixtureParams, path, anchor: AnchorChoice | None = None) -> None:
    payload = {
        "format": "binmix-model",
        "version": 1,
        "n_features": params.n_features,
        "n_components": params.n_components,
        "means": [[float(v) for v in row] for row in params.means],
        "weights": [float(v) for v in params.weights],
        "anchor": None
        if anchor is None
        else {
            "feature": anchor.feature,
            "gap": None if np.isinf(anchor.gap) else anchor.gap,
            "rotation": [[float(v) for v in row] for row in anchor.rotation],
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def load_model(path) -> tuple[MixtureParams, AnchorChoice | None]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "binmix-model":
        raise ParseError(f"{path}: not a model file")
    params = MixtureParams(
        np.asarray(payload["means"], dtype=np.float64),
        np.asarray(payload["weights"], dtype=np.float64),
    )
    anchor = None
    if payload.get("anchor") is not None:
        a = payload["anchor"]
        gap = float("inf") if a["gap"] is None else float(a["gap"])
        anchor = AnchorChoice(
            feature=int(a["feature"]),
            gap=gap,
            rotation=np.asarray(a["rotation"], dtype=np.float64),
        )
    return params, anchor
