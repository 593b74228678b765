"""Iterative averaging of similarity matrices and two-way partition extraction.

One transformation step replaces every entry ``(i, j)`` by the mean, over all
objects ``k``, of ``min(S[i,k], S[j,k]) / max(S[i,k], S[j,k])``. Repeating the
step drives any heterogeneous matrix toward two blocks: entries inside each
block tend to 1 and entries across blocks tend to a common constant omega.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from .errors import ConfigurationError, DichotomyViolationError, DomainError, ValidationError
from .similarity import DISSIMILARITY, SIMILARITY, SimilarityMatrix, symmetrize_upper

MEAN_MODES = ("AM", "GM")
CONTRAST_SLOPE = 0.082
OMEGA_SPREAD_LIMIT = 1e-6
# above this the contrast denominator is replaced by its leading exponential
_CONTRAST_LOG_SWITCH = 700.0
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class EtsmConfig:
    """Settings for iteration and partition extraction.

    ``exclude_self`` drops the ``k = i`` and ``k = j`` terms from each
    average. It is off by default and only meant for experimentation.
    """

    mean_mode: str = "GM"
    contrast_C: float = 80.0
    converge_eps: float = 1e-12
    t_max: int = 10_000
    homogeneity_tol: float = 1e-9
    partition_threshold: float = 0.5
    exclude_self: bool = False

    def __post_init__(self):
        mode = str(self.mean_mode).upper()
        if mode not in MEAN_MODES:
            raise ConfigurationError(f"mean_mode must be AM or GM, got {self.mean_mode!r}")
        object.__setattr__(self, "mean_mode", mode)
        if not 0 <= self.contrast_C <= 200:
            raise ConfigurationError(f"contrast C must lie in [0, 200], got {self.contrast_C}")
        if not self.converge_eps > 0:
            raise ConfigurationError(f"converge_eps must be > 0, got {self.converge_eps}")
        if int(self.t_max) != self.t_max or self.t_max < 1:
            raise ConfigurationError(f"t_max must be an integer >= 1, got {self.t_max}")
        if not 0 <= self.homogeneity_tol < 1:
            raise ConfigurationError(f"homogeneity_tol must lie in [0, 1), got {self.homogeneity_tol}")
        if not 0 < self.partition_threshold < 1:
            raise ConfigurationError(
                f"partition_threshold must lie in (0, 1), got {self.partition_threshold}")


@dataclass(frozen=True)
class Partition:
    """Two disjoint, non-empty index sets. ``left`` holds the smallest index."""

    left: tuple
    right: tuple

    def __post_init__(self):
        left = tuple(sorted(int(i) for i in self.left))
        right = tuple(sorted(int(i) for i in self.right))
        if not left or not right:
            raise ValidationError("both sides of a partition must be non-empty")
        if set(left) & set(right):
            raise ValidationError("partition sides overlap")
        if right[0] < left[0]:
            left, right = right, left
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def sides(self):
        return self.left, self.right

    def labels(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=int)
        out[list(self.right)] = 1
        return out


class Homogeneous(enum.Enum):
    HOMOGENEOUS = "homogeneous"

    def __repr__(self):
        return "HOMOGENEOUS"


HOMOGENEOUS = Homogeneous.HOMOGENEOUS


@dataclass
class Trace:
    """Per-iteration values of selected matrix entries."""

    pairs: list
    pair_labels: list
    values: list = field(default_factory=list)
    max_delta: list = field(default_factory=list)

    def record(self, matrix: np.ndarray, delta: float):
        self.values.append([float(matrix[i, j]) for i, j in self.pairs])
        self.max_delta.append(float(delta))

    def __len__(self):
        return len(self.values)

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", *self.pair_labels, "max_delta"])
        for t, (row, delta) in enumerate(zip(self.values, self.max_delta), start=1):
            writer.writerow([t, *(f"{v:.{digits}g}" for v in row), f"{delta:.{digits}g}"])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class EtsmOutcome:
    final_matrix: SimilarityMatrix
    t_used: int
    partition: object
    omega: float | None
    trace: Trace | None = None
    max_delta: float = 0.0
    converged: bool = True
    snapshots: dict = field(default_factory=dict)

    @property
    def homogeneous(self) -> bool:
        return self.partition is HOMOGENEOUS


def _pair_average(S: np.ndarray, geometric: bool, exclude_self: bool,
                  sort_terms: bool) -> np.ndarray:
    """Generic kernel over the upper-triangle pairs, in chunks of pairs.

    With ``sort_terms`` every pair's ``n`` terms are summed in ascending
    order, which makes the result independent of how objects are numbered.
    """
    n = S.shape[0]
    out = np.ones((n, n))
    rows, cols = np.triu_indices(n, 1)
    chunk = max(1, _CHUNK_ELEMENTS // max(n, 1))
    ks = np.arange(n)
    for p0 in range(0, len(rows), chunk):
        i, j = rows[p0:p0 + chunk], cols[p0:p0 + chunk]
        a, b = S[i], S[j]
        hi = np.maximum(a, b)
        ratio = np.divide(np.minimum(a, b), hi, out=np.ones(hi.shape), where=hi > 0)
        if exclude_self:
            keep = (ks[None, :] != i[:, None]) & (ks[None, :] != j[:, None])
            count = n - 2
        else:
            keep = None
            count = n
        if geometric:
            zero = ratio == 0
            # log(min/max) <= 0; exact zeros are handled separately
            terms = np.log(np.where(zero, 1.0, ratio))
            if keep is not None:
                terms = np.where(keep, terms, 0.0)
                zero &= keep
            if sort_terms:
                terms.sort(axis=1)
            vals = np.exp(terms.sum(axis=1) / count)
            vals[zero.any(axis=1)] = 0.0
        else:
            terms = ratio if keep is None else np.where(keep, ratio, 0.0)
            if sort_terms:
                terms.sort(axis=1)
            vals = terms.sum(axis=1) / count
        out[i, j] = vals
        out[j, i] = vals
    return out


def _geometric_fast(S: np.ndarray) -> np.ndarray:
    """GM step via ``log(min/max) = -|log a - log b|`` and a city-block distance."""
    n = S.shape[0]
    zero = S == 0
    logs = np.log(np.where(zero, 1.0, S))
    out = np.exp(-cdist(logs, logs, "cityblock") / n)
    if zero.any():
        zf = zero.astype(float)
        mismatch = (zf @ (1 - zf).T + (1 - zf) @ zf.T) > 0
        out[mismatch] = 0.0
    return out


def _step(S: np.ndarray, mean_mode: str, exclude_self: bool = False,
          sort_terms: bool = False) -> np.ndarray:
    n = S.shape[0]
    if exclude_self and n < 3:
        raise ConfigurationError("exclude_self needs at least 3 objects")
    if mean_mode == "GM" and not (exclude_self or sort_terms):
        out = _geometric_fast(S)
    else:
        out = _pair_average(S, mean_mode == "GM", exclude_self, sort_terms)
    out = symmetrize_upper(np.clip(out, 0.0, 1.0))
    np.fill_diagonal(out, 1.0)
    return out


def transform_step(matrix: SimilarityMatrix, mean_mode: str = "GM",
                   exclude_self: bool = False) -> SimilarityMatrix:
    """Apply one averaging transformation and return a similarity matrix.

    Works on similarity and on zero-diagonal dissimilarity input alike. With
    GM on a dissimilarity matrix every entry collapses to 0, because the
    self terms contribute ratio 0; use AM for the first step on such input.

    Each entry's terms are summed in sorted order, so relabeling the objects
    permutes the output exactly. :func:`iterate` uses a faster kernel that
    agrees with this one to a few units in the last place.
    """
    mode = str(mean_mode).upper()
    if mode not in MEAN_MODES:
        raise ConfigurationError(f"mean_mode must be AM or GM, got {mean_mode!r}")
    out = _step(np.asarray(matrix.entries, dtype=float), mode, exclude_self, sort_terms=True)
    return SimilarityMatrix(out, SIMILARITY, matrix.labels)


def contrast(s, C: float):
    """Attenuate similarities toward 0 while keeping 0 and 1 fixed.

    ``(exp((e**s - 1)**k) - 1) / (exp((e - 1)**k) - 1)`` with ``k = 0.082 C``.
    Once ``(e - 1)**k`` exceeds 700 the ratio is evaluated as
    ``exp(a - b)``, which drops only the ``-1`` terms.
    """
    if not 0 <= C <= 200:
        raise DomainError(f"contrast C must lie in [0, 200], got {C}")
    arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError("contrast input must lie in [0, 1]")
    k = CONTRAST_SLOPE * C
    top = np.expm1(1.0)
    b = top ** k
    with np.errstate(divide="ignore"):
        a = np.expm1(arr) ** k
    if b > _CONTRAST_LOG_SWITCH:
        out = np.exp(a - b)
    else:
        out = np.expm1(a) / np.expm1(b)
    out = np.where(arr == 0, 0.0, out)
    out = np.where(arr == 1, 1.0, out)
    if np.ndim(s) == 0:
        return float(out)
    return out


def _components(contrasted: np.ndarray, threshold: float):
    return connected_components(contrasted >= threshold, directed=False)


def extract_partition(matrix: SimilarityMatrix, config: EtsmConfig = EtsmConfig()):
    """Split a (converged) similarity matrix into two groups.

    Entries are passed through :func:`contrast` and pairs whose contrasted
    value reaches ``config.partition_threshold`` are linked. One connected
    component means :data:`HOMOGENEOUS`, two give a :class:`Partition`.

    If every entry is within ``homogeneity_tol`` of 1 the matrix is
    homogeneous outright. If omega sits so close to 1 that contrast at the
    configured C cannot resolve it in double precision (one component while
    the matrix is not homogeneous), contrast is applied to the matrix
    rescaled by ``(s - min) / (1 - min)`` instead.
    """
    if matrix.kind is not SIMILARITY:
        raise ValidationError("partition extraction needs a similarity matrix")
    if config.contrast_C <= 0:
        raise ConfigurationError("partition extraction needs contrast C > 0")
    m = matrix.entries
    n = m.shape[0]
    if n == 1 or m.min() >= 1 - config.homogeneity_tol:
        return HOMOGENEOUS
    c = contrast(m, config.contrast_C)
    ncomp, labels = _components(c, config.partition_threshold)
    if ncomp == 1:
        lo = m.min()
        c = contrast(np.clip((m - lo) / (1 - lo), 0.0, 1.0), config.contrast_C)
        ncomp, labels = _components(c, config.partition_threshold)
        if ncomp == 1:
            return HOMOGENEOUS
    if ncomp == 2:
        return Partition(tuple(np.flatnonzero(labels == 0)), tuple(np.flatnonzero(labels == 1)))
    hist, _ = np.histogram(c[np.triu_indices(n, 1)], bins=10, range=(0.0, 1.0))
    raise DichotomyViolationError(
        f"expected two groups, found {ncomp} components; contrasted value histogram "
        f"(10 bins over [0,1]): {hist.tolist()}",
        n_components=int(ncomp), histogram=hist.tolist())


def _pair_label(labels, i, j):
    return f"{labels[i]}-{labels[j]}"


def iterate(matrix: SimilarityMatrix, config: EtsmConfig = EtsmConfig(), tracked_pairs=None,
            snapshot_every: int | None = None) -> EtsmOutcome:
    """Transform repeatedly until the matrix stops changing, then split it.

    Dissimilarity input always gets an arithmetic-mean first step; every later
    step uses ``config.mean_mode``. Iteration stops when the largest entry
    change drops below ``config.converge_eps`` or after ``config.t_max``
    steps. Omega is the mean of the entries linking the two groups.
    """
    S = np.array(matrix.entries, dtype=float)
    n = S.shape[0]
    if n < 1:
        raise ValidationError("cannot iterate an empty matrix")
    dissimilar = matrix.kind is DISSIMILARITY
    trace = None
    if tracked_pairs is not None:
        pairs = [(int(i), int(j)) for i, j in tracked_pairs]
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"tracked pair ({i}, {j}) out of range for n={n}")
        trace = Trace(pairs, [_pair_label(matrix.labels, i, j) for i, j in pairs])
    snapshots = {}
    delta = math.inf
    t = 0
    while t < config.t_max:
        mode = "AM" if (t == 0 and dissimilar) else config.mean_mode
        new = _step(S, mode, config.exclude_self)
        # the first step of a distance matrix changes units, so it never counts as converged
        delta = math.inf if (t == 0 and dissimilar) else float(np.max(np.abs(new - S)))
        S = new
        t += 1
        if trace is not None:
            trace.record(S, delta if math.isfinite(delta) else float("nan"))
        if snapshot_every and t % snapshot_every == 0:
            snapshots[t] = SimilarityMatrix(S.copy(), SIMILARITY, matrix.labels)
        if delta < config.converge_eps:
            break
    converged = delta < config.converge_eps
    final = SimilarityMatrix(S, SIMILARITY, matrix.labels)
    try:
        part = extract_partition(final, config)
    except DichotomyViolationError as exc:
        raise DichotomyViolationError(
            f"{exc} (after {t} iterations, final max delta {delta:.3g})",
            n_components=exc.n_components, histogram=exc.histogram, t_used=t,
            max_delta=delta) from None
    omega = None
    if part is not HOMOGENEOUS:
        inter = S[np.ix_(part.left, part.right)]
        omega = float(inter.mean())
        spread = float(inter.max() - inter.min())
        if spread >= OMEGA_SPREAD_LIMIT:
            raise DichotomyViolationError(
                f"inter-group entries have not settled: spread {spread:.3g} "
                f"after {t} iterations (max delta {delta:.3g})", n_components=2,
                t_used=t, max_delta=delta)
    return EtsmOutcome(final, t, part, omega, trace, delta, converged, snapshots)
