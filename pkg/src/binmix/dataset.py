"""Sparse binary datasets: ingestion, synthesis, overlapping splits, snapshots.

Rows are records (e.g. patients), columns are normalized diagnostic codes,
and a cell is 1 when the record carries the code.  Everything here is
immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    EmptyDatasetError,
    InvalidCodeError,
    ParameterError,
    ParseError,
    RankInfeasibleError,
)
from .params import MixtureParams


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Ordered feature codes with a reverse lookup table."""

    codes: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        index = {code: j for j, code in enumerate(self.codes)}
        if len(index) != len(self.codes):
            raise ParameterError("vocabulary codes must be unique")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, code: str) -> bool:
        return code in self.index

    def column(self, code: str) -> int:
        return self.index[code]

    def code(self, j: int) -> str:
        return self.codes[j]


@dataclass(frozen=True, eq=False)
class BinaryDataset:
    """An N x d binary matrix in row-major sparse form plus stable row ids."""

    matrix: sparse.csr_matrix
    row_ids: tuple[str, ...]

    def __post_init__(self):
        m = self.matrix
        if not sparse.issparse(m):
            raise ParameterError("matrix must be a scipy sparse matrix")
        m = m.tocsr().astype(np.float64)
        m.sum_duplicates()
        m.sort_indices()
        if m.nnz and (m.data.min() < 1.0 or m.data.max() > 1.0):
            raise ParameterError("matrix entries must be exactly 0 or 1 with no duplicates")
        if len(self.row_ids) != m.shape[0]:
            raise ParameterError("row_ids length must equal the number of rows")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "row_ids", tuple(str(r) for r in self.row_ids))

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def row_counts(self) -> np.ndarray:
        """Number of active codes per row."""
        return np.diff(self.matrix.indptr)

    def positions(self) -> np.ndarray:
        """All (row, col) positions holding 1, as an (nnz, 2) int array."""
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.matrix.indptr))
        return np.column_stack([rows, self.matrix.indices])

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.matrix.todense(), dtype=np.float64)

    def subset(self, rows: Sequence[int]) -> "BinaryDataset":
        """Restrict to the given row indices, keeping their order."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= self.n_rows):
            raise ParameterError("row index out of range")
        return BinaryDataset(self.matrix[rows], tuple(self.row_ids[i] for i in rows))

    def column_subset(self, cols: Sequence[int]) -> "BinaryDataset":
        """Restrict to the given column indices, keeping their order."""
        cols = np.asarray(cols, dtype=np.int64)
        if cols.size and (cols.min() < 0 or cols.max() >= self.n_cols):
            raise ParameterError("column index out of range")
        return BinaryDataset(self.matrix[:, cols].tocsr(), self.row_ids)

    @classmethod
    def from_dense(cls, array, row_ids=None) -> "BinaryDataset":
        arr = np.asarray(array, dtype=np.float64)
        if row_ids is None:
            row_ids = tuple(str(i) for i in range(arr.shape[0]))
        return cls(sparse.csr_matrix(arr), tuple(row_ids))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Generating parameters and per-row component labels of a synthetic set."""

    params: MixtureParams
    labels: np.ndarray


@dataclass(frozen=True, eq=False)
class SplitPair:
    """Two overlapping row-index subsets and their intersection (all sorted)."""

    subset_a: np.ndarray
    subset_b: np.ndarray
    intersection: np.ndarray


def normalize_code(raw: str) -> str:
    """Reduce a diagnostic code to its general 3-character form.

    Everything from the first '.' on is dropped and at most the first three
    characters of the remainder are kept ("428.21" -> "428", "V45.81" ->
    "V45").  Case-preserving and idempotent.
    """
    code = raw.strip()
    if not code:
        raise InvalidCodeError("empty code")
    stem = code.split(".", 1)[0][:3].strip()
    if not stem:
        raise InvalidCodeError(f"code {raw!r} has no general part before '.'")
    return stem


def ingest(
    records: Iterable[tuple[str, Sequence[str]]],
    min_codes: int = 3,
) -> tuple[BinaryDataset, Vocabulary]:
    """Turn (row_id, raw code list) records into a binary dataset.

    Codes are normalized and de-duplicated per record; records with fewer
    than ``min_codes`` distinct normalized codes are dropped.  The vocabulary
    is the lexicographically sorted set of codes over retained records, and
    matrix rows follow the input order of retained records.
    """
    if min_codes < 0:
        raise ParameterError("min_codes must be >= 0")
    kept: list[tuple[str, list[str]]] = []
    seen_codes: set[str] = set()
    for row_id, codes in records:
        normalized = {normalize_code(c) for c in codes}
        if len(normalized) >= min_codes:
            kept.append((str(row_id), sorted(normalized)))
            seen_codes.update(normalized)
    if not kept:
        raise EmptyDatasetError(
            f"no records retained with at least {min_codes} distinct codes"
        )
    vocab = Vocabulary(tuple(sorted(seen_codes)))
    indices: list[int] = []
    indptr = [0]
    for _, codes in kept:
        cols = sorted(vocab.index[c] for c in codes)
        indices.extend(cols)
        indptr.append(len(indices))
    matrix = sparse.csr_matrix(
        (np.ones(len(indices)), np.asarray(indices, dtype=np.int32), np.asarray(indptr)),
        shape=(len(kept), len(vocab)),
    )
    return BinaryDataset(matrix, tuple(r for r, _ in kept)), vocab


def sample_from_params(
    params: MixtureParams, n: int, seed: int | np.random.Generator
) -> tuple[BinaryDataset, np.ndarray]:
    """Draw ``n`` rows from a mixture: pick a component, then flip d coins."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    labels = rng.choice(params.n_components, size=n, p=params.weights / params.weights.sum())
    dense = (rng.random((n, params.n_features)) < params.means[:, labels].T).astype(np.float64)
    return BinaryDataset.from_dense(dense), labels


def generate_synthetic(
    d: int, k: int, n: int, seed: int = 0
) -> tuple[BinaryDataset, GroundTruth]:
    """Sample a random mixture model and a dataset drawn from it.

    Mean entries are drawn i.i.d. from a unit-rate exponential and each
    column is affinely rescaled into [0, 1] by its own min/max; weights are
    exponential draws normalized to sum 1.  Fixed seeds reproduce bit-equal
    datasets.
    """
    if k < 1 or n < 1:
        raise ParameterError("k and n must be >= 1")
    if d < k:
        raise RankInfeasibleError(f"d={d} features cannot support k={k} components")
    rng = np.random.default_rng(seed)
    raw = rng.exponential(1.0, size=(d, k))
    lo = raw.min(axis=0)
    span = raw.max(axis=0) - lo
    means = np.where(span > 0, (raw - lo) / np.where(span > 0, span, 1.0), 0.5)
    wraw = rng.exponential(1.0, size=k)
    weights = wraw / wraw.sum()
    params = MixtureParams(means, weights)
    data, labels = sample_from_params(params, n, rng)
    return data, GroundTruth(params=params, labels=labels)


def synthetic_vocabulary(d: int) -> Vocabulary:
    """Zero-padded numeric codes whose lexicographic order matches columns."""
    if d > 1000:
        raise ParameterError("synthetic vocabularies support at most 1000 codes")
    return Vocabulary(tuple(f"{j:03d}" for j in range(d)))


def overlapping_split(
    dataset: BinaryDataset, overlap_fraction: float = 0.5, seed: int = 0
) -> SplitPair:
    """Split rows into two overlapping subsets covering the whole dataset.

    A seeded shuffle marks round(overlap_fraction * N) rows as shared; the
    remainder is halved between the two subsets.  Subset index arrays are
    sorted ascending.
    """
    if not 0.0 < overlap_fraction < 1.0:
        raise ParameterError("overlap_fraction must lie strictly between 0 and 1")
    n = dataset.n_rows
    if n < 10:
        raise ParameterError("overlapping_split needs at least 10 rows")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_shared = max(1, round(overlap_fraction * n))
    shared = perm[:n_shared]
    rest = perm[n_shared:]
    half = rest.size // 2
    subset_a = np.sort(np.concatenate([shared, rest[:half]]))
    subset_b = np.sort(np.concatenate([shared, rest[half:]]))
    return SplitPair(
        subset_a=subset_a, subset_b=subset_b, intersection=np.sort(shared)
    )


# ---------------------------------------------------------------------------
# Text records: "row_id;code,code,..." one record per line.


def parse_records(
    text: str, record_sep: str = ";", code_sep: str = ","
) -> list[tuple[str, list[str]]]:
    """Parse delimited record text; blank lines are skipped."""
    records: list[tuple[str, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        head, sep, tail = line.partition(record_sep)
        if not sep:
            raise ParseError(f"line {lineno}: missing record separator {record_sep!r}")
        row_id = head.strip()
        if not row_id:
            raise ParseError(f"line {lineno}: empty row id")
        codes = [tok for tok in (t.strip() for t in tail.split(code_sep)) if tok]
        records.append((row_id, codes))
    return records


def read_records_file(
    path, record_sep: str = ";", code_sep: str = ","
) -> list[tuple[str, list[str]]]:
    text = Path(path).read_text(encoding="utf-8")
    return parse_records(text, record_sep=record_sep, code_sep=code_sep)


def format_records(
    dataset: BinaryDataset,
    vocab: Vocabulary,
    record_sep: str = ";",
    code_sep: str = ",",
) -> str:
    """Render a dataset back into record text (inverse of parse + ingest)."""
    lines = []
    indptr, indices = dataset.matrix.indptr, dataset.matrix.indices
    for i, row_id in enumerate(dataset.row_ids):
        cols = indices[indptr[i] : indptr[i + 1]]
        lines.append(f"{row_id}{record_sep}{code_sep.join(vocab.codes[j] for j in cols)}")
    return "\n".join(lines) + "\n"


def write_records_file(dataset, vocab, path, record_sep=";", code_sep=",") -> None:
    Path(path).write_text(
        format_records(dataset, vocab, record_sep=record_sep, code_sep=code_sep),
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# Snapshots: JSON files that round-trip a dataset bit-exactly.


def save_snapshot(dataset: BinaryDataset, vocab: Vocabulary, path) -> None:
    indptr, indices = dataset.matrix.indptr, dataset.matrix.indices
    rows = [
        [int(j) for j in indices[indptr[i] : indptr[i + 1]]]
        for i in range(dataset.n_rows)
    ]
    payload = {
        "format": "binmix-dataset",
        "version": 1,
        "n_rows": dataset.n_rows,
        "n_cols": dataset.n_cols,
        "row_ids": list(dataset.row_ids),
        "codes": list(vocab.codes),
        "rows": rows,
    }
    Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def load_snapshot(path) -> tuple[BinaryDataset, Vocabulary]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "binmix-dataset":
        raise ParseError(f"{path}: not a dataset snapshot")
    indices: list[int] = []
    indptr = [0]
    for cols in payload["rows"]:
        indices.extend(cols)
        indptr.append(len(indices))
    matrix = sparse.csr_matrix(
        (np.ones(len(indices)), np.asarray(indices, dtype=np.int32), np.asarray(indptr)),
        shape=(payload["n_rows"], payload["n_cols"]),
    )
    return (
        BinaryDataset(matrix, tuple(payload["row_ids"])),
        Vocabulary(tuple(payload["codes"])),
    )
