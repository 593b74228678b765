"""Similarity matrices: R/XR monomers, hybridization and Euclidean distances."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset, MetricKind, ParameterSpec
from .errors import (ConfigurationError, DomainError, ParseError, UnsupportedMetricError,
                     ValidationError)

MATRIX_DIGITS = 17


class MatrixKind(enum.Enum):
    SIMILARITY = "similarity"
    DISSIMILARITY = "dissimilarity"


SIMILARITY = MatrixKind.SIMILARITY
DISSIMILARITY = MatrixKind.DISSIMILARITY


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric ``n x n`` matrix tagged as similarity or dissimilarity.

    Similarity matrices have a unit diagonal and entries in ``[0, 1]``;
    dissimilarity matrices have a zero diagonal and nonnegative entries.
    Entries are stored read-only.
    """

    entries: np.ndarray
    kind: MatrixKind = SIMILARITY
    labels: tuple | None = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=float, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if not isinstance(self.kind, MatrixKind):
            object.__setattr__(self, "kind", MatrixKind(str(self.kind).lower()))
        labels = self.labels
        if labels is None:
            labels = [str(i) for i in range(m.shape[0])]
        object.__setattr__(self, "labels", tuple(str(x) for x in labels))
        self.validate()

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def validate(self):
        m = self.entries
        if len(self.labels) != m.shape[0]:
            raise ValidationError("label count does not match matrix size")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("matrix labels must be unique")
        if not np.all(np.isfinite(m)):
            raise ValidationError("matrix contains NaN or infinite entries")
        if not np.array_equal(m, m.T):
            raise ValidationError("matrix is not exactly symmetric")
        diag = np.diagonal(m)
        if self.kind is SIMILARITY:
            if np.any(m < 0) or np.any(m > 1):
                raise ValidationError("similarity entries must lie in [0, 1]")
            if np.any(diag != 1):
                raise ValidationError("similarity diagonal must be exactly 1")
        else:
            if np.any(m < 0):
                raise ValidationError("dissimilarity entries must be >= 0")
            if np.any(diag != 0):
                raise ValidationError("dissimilarity diagonal must be exactly 0")

    def restrict(self, indices: Sequence[int]) -> "SimilarityMatrix":
        idx = np.asarray(indices, dtype=int)
        return SimilarityMatrix(self.entries[np.ix_(idx, idx)], self.kind,
                                [self.labels[i] for i in idx])

    def permute(self, order: Sequence[int]) -> "SimilarityMatrix":
        return self.restrict(order)

    def to_csv(self, digits: int = MATRIX_DIGITS) -> str:
        return matrix_to_csv(self, digits)


def symmetrize_upper(m: np.ndarray) -> np.ndarray:
    """Mirror the strict upper triangle onto the lower one."""
    upper = np.triu(m, 1)
    return upper + upper.T


def pairwise_metric(v_i: float, v_j: float, spec: ParameterSpec) -> float:
    """Similarity of two values of one parameter under its R or XR metric."""
    if spec.metric is MetricKind.R:
        if v_i < 0 or v_j < 0:
            raise DomainError(f"R metric needs nonnegative values, got ({v_i}, {v_j})")
        hi = max(v_i, v_j)
        if hi == 0:
            return 1.0
        return min(v_i, v_j) / hi
    if spec.metric is MetricKind.XR:
        if not spec.base > 1:
            raise ConfigurationError(f"XR base must be > 1, got {spec.base}")
        return float(spec.base) ** (-abs(v_i - v_j))
    raise UnsupportedMetricError(f"metric {spec.metric.value} has no pairwise similarity form")


def _column_log_similarity(values: np.ndarray, spec: ParameterSpec):
    """Log-similarity matrix of one column plus a mask of pairs with similarity 0."""
    v = np.asarray(values, dtype=float)
    if spec.metric is MetricKind.XR:
        if not spec.base > 1:
            raise ConfigurationError(f"XR base must be > 1, got {spec.base}")
        return -math.log(spec.base) * np.abs(v[:, None] - v[None, :]), None
    if spec.metric is MetricKind.R:
        if np.any(v < 0):
            raise DomainError(f"R metric on {spec.name!r} needs nonnegative values")
        zero = v == 0
        logv = np.log(np.where(zero, 1.0, v))
        logsim = -np.abs(logv[:, None] - logv[None, :])
        logsim[zero[:, None] & zero[None, :]] = 0.0
        mismatch = zero[:, None] ^ zero[None, :]
        return logsim, (mismatch if mismatch.any() else None)
    raise UnsupportedMetricError(
        f"parameter {spec.name!r} uses {spec.metric.value}; coordinate parameters "
        "go through euclidean_dissimilarity")


def monomer_matrix(dataset: Dataset, param_index: int) -> SimilarityMatrix:
    """Similarity matrix built from a single parameter column."""
    if not 0 <= param_index < dataset.p:
        raise ConfigurationError(f"parameter index {param_index} out of range 0..{dataset.p - 1}")
    spec = dataset.parameters[param_index]
    if spec.metric is MetricKind.R:
        v = dataset.values[:, param_index]
        hi = np.maximum(v[:, None], v[None, :])
        lo = np.minimum(v[:, None], v[None, :])
        m = np.divide(lo, hi, out=np.ones_like(hi), where=hi != 0)
    else:
        logsim, _ = _column_log_similarity(dataset.values[:, param_index], spec)
        m = np.exp(logsim)
    m = symmetrize_upper(m)
    np.fill_diagonal(m, 1.0)
    return SimilarityMatrix(m, SIMILARITY, dataset.object_ids)


def _normalized_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise ConfigurationError("hybridization weights must be finite and >= 0")
    total = w.sum()
    if not total > 0:
        raise ConfigurationError("hybridization weights must not all be zero")
    return w / total


def hybridize(monomers: Sequence[SimilarityMatrix], weights: Sequence[float] | None = None
              ) -> SimilarityMatrix:
    """Weighted geometric mean of monomer similarity matrices.

    Weights are normalized to sum to one and act as exponents. The product is
    accumulated in log space; an exact zero in any monomer with positive
    weight makes the hybrid entry zero.
    """
    if not monomers:
        raise ValidationError("hybridize needs at least one monomer matrix")
    if weights is None:
        weights = [1.0] * len(monomers)
    if len(weights) != len(monomers):
        raise ValidationError(f"{len(weights)} weights for {len(monomers)} monomers")
    w = _normalized_weights(weights)
    first = monomers[0]
    logsum = np.zeros((first.n, first.n))
    zero = np.zeros((first.n, first.n), dtype=bool)
    for m, wp in zip(monomers, w):
        if m.kind is not SIMILARITY:
            raise ValidationError("only similarity matrices can be hybridized")
        if m.n != first.n or m.labels != first.labels:
            raise ValidationError("monomer matrices differ in size or labels")
        if wp == 0:
            continue
        z = m.entries == 0
        zero |= z
        logsum += wp * np.log(np.where(z, 1.0, m.entries))
    out = np.exp(logsum)
    out[zero] = 0.0
    out = symmetrize_upper(out)
    np.fill_diagonal(out, 1.0)
    return SimilarityMatrix(out, SIMILARITY, first.labels)


def hybrid_matrix(dataset: Dataset) -> SimilarityMatrix:
    """Hybrid similarity of a whole R/XR dataset, computed in one pass.

    Equivalent to hybridizing every monomer matrix with the parameter
    weights, but never materializes per-column similarities, so columns whose
    similarities would underflow on their own still contribute exactly.
    """
    w = _normalized_weights([s.weight for s in dataset.parameters])
    n = dataset.n
    xr_cols, xr_scale, r_cols, r_scale = [], [], [], []
    for j, spec in enumerate(dataset.parameters):
        if w[j] == 0:
            continue
        if spec.metric is MetricKind.XR:
            if not spec.base > 1:
                raise ConfigurationError(f"XR base must be > 1, got {spec.base}")
            xr_cols.append(j)
            xr_scale.append(w[j] * math.log(spec.base))
        elif spec.metric is MetricKind.R:
            r_cols.append(j)
            r_scale.append(w[j])
        else:
            raise UnsupportedMetricError(
                f"parameter {spec.name!r} is a coordinate; mixed metric kinds cannot be hybridized")
    v = dataset.values
    zero = np.zeros((n, n), dtype=bool)
    # XR: sum_p w_p ln(B_p) |dv_p| is a weighted city-block distance
    blocks = []
    if xr_cols:
        blocks.append(v[:, xr_cols] * np.asarray(xr_scale))
    if r_cols:
        rv = v[:, r_cols]
        if np.any(rv < 0):
            raise DomainError("R metric needs nonnegative values")
        rz = rv == 0
        blocks.append(np.log(np.where(rz, 1.0, rv)) * np.asarray(r_scale))
        if rz.any():
            # one zero and one positive value means similarity 0
            rzf = rz.astype(float)
            zero = (rzf @ (1 - rzf).T + (1 - rzf) @ rzf.T) > 0
    y = np.hstack(blocks)
    out = np.exp(-cdist(y, y, "cityblock"))
    if r_cols and np.any(v[:, r_cols] == 0):
        # both-zero pairs contributed |log 1 - log 1| = 0, as required by R(0,0) = 1
        out[zero] = 0.0
    out = symmetrize_upper(out)
    np.fill_diagonal(out, 1.0)
    return SimilarityMatrix(out, SIMILARITY, dataset.object_ids)


def euclidean_dissimilarity(dataset: Dataset) -> SimilarityMatrix:
    """Straight-line distances between objects in coordinate space."""
    kinds = {s.metric for s in dataset.parameters}
    if kinds != {MetricKind.EUCLIDEAN}:
        raise ConfigurationError(
            "euclidean_dissimilarity needs every parameter to be a EUCLIDEAN coordinate, "
            f"got {sorted(k.value for k in kinds)}")
    d = symmetrize_upper(cdist(dataset.values, dataset.values, "euclidean"))
    return SimilarityMatrix(d, DISSIMILARITY, dataset.object_ids)


def dataset_matrix(dataset: Dataset) -> SimilarityMatrix:
    """Input matrix for a dataset, chosen by its parameters' metric kinds."""
    kinds = {s.metric for s in dataset.parameters}
    if MetricKind.EUCLIDEAN in kinds:
        return euclidean_dissimilarity(dataset)
    return hybrid_matrix(dataset)


def matrix_to_csv(matrix: SimilarityMatrix, digits: int = MATRIX_DIGITS) -> str:
    buf = io.StringIO()
    buf.write(f"# kind: {matrix.kind.value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", *matrix.labels])
    for label, row in zip(matrix.labels, matrix.entries):
        writer.writerow([label, *(f"{x:.{digits}g}" for x in row)])
    return buf.getvalue()


def read_matrix_text(text: str) -> SimilarityMatrix:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParseError("matrix CSV must start with a '# kind: ...' line", row=1)
    tag = lines[0].lstrip("#").strip()
    key, _, value = tag.partition(":")
    if key.strip().lower() != "kind":
        raise ParseError(f"bad kind tag {lines[0]!r}", row=1)
    try:
        kind = MatrixKind(value.strip().lower())
    except ValueError:
        raise ParseError(f"unknown matrix kind {value.strip()!r}", row=1) from None
    rows = [r for r in csv.reader(io.StringIO("\n".join(lines[1:]))) if r]
    if not rows:
        raise ParseError("matrix CSV has no header", row=2)
    labels = rows[0][1:]
    if len(rows) - 1 != len(labels):
        raise ParseError(f"expected {len(labels)} matrix rows, got {len(rows) - 1}")
    m = np.empty((len(labels), len(labels)))
    for i, row in enumerate(rows[1:]):
        lineno = i + 3
        if row[0] != labels[i] or len(row) != len(labels) + 1:
            raise ParseError(f"row {lineno}: label or width does not match the header", row=lineno)
        for j, cell in enumerate(row[1:]):
            try:
                m[i, j] = float(cell)
            except ValueError:
                raise ParseError(f"row {lineno}, column {labels[j]!r}: cannot parse {cell!r}",
                                 row=lineno, column=labels[j]) from None
    return SimilarityMatrix(m, kind, labels)


def load_matrix(path) -> SimilarityMatrix:
    with open(path, encoding="utf-8") as fh:
        return read_matrix_text(fh.read())
