"""Hard assignments, interpretability reports, partition metrics, stability.

Everything downstream of parameter estimation lives here: turning a fitted
mixture into cluster labels, ranked per-cluster code tables, the payload the
HTTP layer and CLI serialize, the adjusted Rand index, the overlapping-split
stability protocol, and the k-means comparison arm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import em as _em
from .dataset import BinaryDataset, SplitPair, Vocabulary, overlapping_split
from .decomposition import asvtd
from .errors import ParameterError
from .params import MixtureParams


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """A fitted mixture together with its hard row assignments."""

    params: MixtureParams
    assignments: np.ndarray
    posteriors: np.ndarray
    cluster_sizes: np.ndarray


@dataclass(frozen=True, eq=False)
class RelevanceTable:
    """Per-cluster feature scores and descending-score feature rankings."""

    lam: float
    scores: np.ndarray
    top_lists: tuple[tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class FrequencyChart:
    """Top features by global frequency with per-cluster relative frequencies."""

    features: tuple[str, ...]
    global_frequency: np.ndarray
    per_cluster: np.ndarray  # (len(features), k)


@dataclass(frozen=True, eq=False)
class HeatmapBlock:
    """All rows of one cluster, in original order, over the heatmap features."""

    cluster: int
    row_ids: tuple[str, ...]
    cells: np.ndarray  # (len(row_ids), len(features)) of 0/1


@dataclass(frozen=True, eq=False)
class Heatmap:
    features: tuple[str, ...]
    blocks: tuple[HeatmapBlock, ...]


@dataclass(frozen=True, eq=False)
class ClusterReport:
    sizes: np.ndarray
    frequency_chart: FrequencyChart
    heatmap: Heatmap


def assign(
    params: MixtureParams, dataset: BinaryDataset, prob_floor: float = 1e-6
) -> ClusterModel:
    """Assign every row to its maximum-posterior component (ties: lowest index)."""
    post = _em.posteriors(params, dataset, prob_floor)
    labels = np.argmax(post, axis=1)
    sizes = np.bincount(labels, minlength=params.n_components)
    return ClusterModel(
        params=params, assignments=labels, posteriors=post, cluster_sizes=sizes
    )


def relevance(
    params: MixtureParams, lam: float = 0.6, prob_floor: float = 1e-6
) -> RelevanceTable:
    """Score every (feature, cluster) pair by floored in-cluster frequency vs lift.

    The score blends the log in-cluster frequency (weight ``lam``) with the
    log lift over the weight-averaged frequency (weight ``1 - lam``).  At
    lam=1 the within-cluster ranking reduces to the frequency ranking; at
    lam=0 a feature equally frequent everywhere scores zero.
    """
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lam must lie in [0, 1]")
    mu = np.clip(params.means, prob_floor, 1.0 - prob_floor)
    marginal = mu @ params.weights
    scores = lam * np.log(mu) + (1.0 - lam) * np.log(mu / marginal[:, None])
    top_lists = tuple(
        tuple(int(i) for i in np.argsort(-scores[:, j], kind="stable"))
        for j in range(scores.shape[1])
    )
    return RelevanceTable(lam=lam, scores=scores, top_lists=top_lists)


def _frequency_order(freq: np.ndarray, vocab: Vocabulary) -> list[int]:
    # Descending frequency; ties break lexicographically by code.
    return sorted(range(freq.size), key=lambda j: (-freq[j], vocab.codes[j]))


def build_report(
    model: ClusterModel,
    dataset: BinaryDataset,
    vocab: Vocabulary,
    top_chart: int = 20,
    top_heatmap: int = 40,
) -> ClusterReport:
    """Frequency chart and cluster-banded heatmap over the most common codes.

    Both feature lists rank by global frequency (ties lexicographic) and are
    clamped to the actual feature count.  Heatmap rows are grouped by cluster
    and keep their original order inside each block; empty clusters
    contribute empty blocks so the band count always equals k.
    """
    if top_chart < 1 or top_heatmap < 1:
        raise ParameterError("top_chart and top_heatmap must be >= 1")
    d = dataset.n_cols
    k = model.params.n_components
    freq = np.asarray(dataset.matrix.sum(axis=0)).ravel() / max(dataset.n_rows, 1)
    order = _frequency_order(freq, vocab)

    onehot = np.zeros((dataset.n_rows, k))
    onehot[np.arange(dataset.n_rows), model.assignments] = 1.0
    counts = np.asarray(dataset.matrix.T @ onehot)  # (d, k)
    sizes = model.cluster_sizes
    ratios = np.divide(
        counts,
        np.maximum(sizes, 1)[None, :],
        out=np.zeros_like(counts),
        where=sizes[None, :] > 0,
    )

    chart_idx = order[: min(top_chart, d)]
    chart = FrequencyChart(
        features=tuple(vocab.codes[j] for j in chart_idx),
        global_frequency=freq[chart_idx],
        per_cluster=ratios[chart_idx, :],
    )

    heat_idx = order[: min(top_heatmap, d)]
    dense_cols = np.asarray(dataset.matrix[:, heat_idx].todense())
    blocks = []
    for c in range(k):
        rows = np.nonzero(model.assignments == c)[0]
        blocks.append(
            HeatmapBlock(
                cluster=c,
                row_ids=tuple(dataset.row_ids[i] for i in rows),
                cells=dense_cols[rows].astype(np.int8),
            )
        )
    heatmap = Heatmap(
        features=tuple(vocab.codes[j] for j in heat_idx), blocks=tuple(blocks)
    )
    return ClusterReport(sizes=sizes, frequency_chart=chart, heatmap=heatmap)


def _sig12(value: float) -> float:
    """Round to 12 significant digits for serialization-stable payloads."""
    return float(f"{float(value):.12g}")


def report_payload(
    model: ClusterModel,
    dataset: BinaryDataset,
    vocab: Vocabulary,
    lam: float = 0.6,
    top_chart: int = 20,
    top_heatmap: int = 40,
    top_relevance: int = 10,
) -> dict:
    """JSON-ready report: sizes, frequency chart, heatmap blocks, relevance.

    All floats are rounded to 12 significant digits so identical runs render
    byte-identical payloads.
    """
    report = build_report(model, dataset, vocab, top_chart, top_heatmap)
    table = relevance(model.params, lam)
    k = model.params.n_components
    chart = report.frequency_chart
    payload = {
        "n_rows": dataset.n_rows,
        "n_components": k,
        "sizes": [int(s) for s in report.sizes],
        "frequency_chart": {
            "features": list(chart.features),
            "global_frequency": [_sig12(v) for v in chart.global_frequency],
            "per_cluster": {
                code: [_sig12(v) for v in chart.per_cluster[i]]
                for i, code in enumerate(chart.features)
            },
        },
        "heatmap": {
            "features": list(report.heatmap.features),
            "blocks": [
                {
                    "cluster": b.cluster,
                    "row_ids": list(b.row_ids),
                    "cells": [[int(v) for v in row] for row in b.cells],
                }
                for b in report.heatmap.blocks
            ],
        },
        "relevance": {
            "lambda": _sig12(lam),
            "clusters": [
                {
                    "cluster": j,
                    "items": [
                        {
                            "code": vocab.codes[i],
                            "score": _sig12(table.scores[i, j]),
                            "frequency": _sig12(model.params.means[i, j]),
                        }
                        for i in table.top_lists[j][: min(top_relevance, len(vocab))]
                    ],
                }
                for j in range(k)
            ],
        },
    }
    return payload


def adjusted_rand_index(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """Chance-adjusted pair-counting agreement between two partitions.

    1 for identical partitions (up to relabeling), about 0 for independent
    ones; can go negative.  Degenerate denominators (both partitions trivial
    and equal) return 1.0.
    """
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.ndim != 1 or a.shape != b.shape:
        raise ParameterError("label arrays must be 1-D and of equal length")
    n = a.size
    if n < 2:
        raise ParameterError("need at least two items to compare partitions")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return (x * (x - 1)) // 2

    index = int(comb2(table).sum())
    row_sum = int(comb2(table.sum(axis=1)).sum())
    col_sum = int(comb2(table.sum(axis=0)).sum())
    total = int(comb2(np.int64(n)))
    expected = row_sum * col_sum / total
    max_index = (row_sum + col_sum) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def stability_check(
    dataset: BinaryDataset,
    k: int,
    overlap: float = 0.5,
    seed: int = 0,
    em_config: _em.EmConfig | None = None,
    split: SplitPair | None = None,
) -> float:
    """Agreement of two full pipeline runs on overlapping row subsets.

    Draws a seeded overlapping split (or uses the supplied one), runs
    decomposition + EM + assignment independently on each subset, and
    returns the adjusted Rand index of the two label vectors restricted to
    the shared rows.  Values near 1 mean the clustering is reproducible;
    structureless data lands near 0.
    """
    if split is None:
        split = overlapping_split(dataset, overlap, seed)
    config = em_config if em_config is not None else _em.EmConfig()

    def labels_of(rows: np.ndarray) -> np.ndarray:
        sub = dataset.subset(rows)
        init = asvtd(sub, k)
        refined, _ = _em.em_refine(sub, init, config)
        model = assign(refined, sub)
        by_original = np.full(dataset.n_rows, -1, dtype=np.int64)
        by_original[rows] = model.assignments
        return by_original

    label_a = labels_of(split.subset_a)
    label_b = labels_of(split.subset_b)
    shared = split.intersection
    return adjusted_rand_index(label_a[shared], label_b[shared])


def kmeans_baseline(dataset: BinaryDataset, k: int, seed: int = 0) -> np.ndarray:
    """k-means labels on the raw binary rows; the comparison arm for benchmarks."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if k > dataset.n_rows:
        raise ParameterError(f"k={k} exceeds the number of rows {dataset.n_rows}")
    from sklearn.cluster import KMeans

    km = KMeans(
        n_clusters=k, init="k-means++", n_init=10, max_iter=300, random_state=seed
    )
    return km.fit_predict(dataset.matrix)
