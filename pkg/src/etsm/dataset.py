"""Object-by-parameter tables: validation, CSV ingestion and seeded generators."""

from __future__ import annotations

import configparser
import csv
import enum
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, ParseError, ValidationError

DEFAULT_XR_BASE = 1.1
CSV_DIGITS = 12


class MetricKind(enum.Enum):
    R = "R"
    XR = "XR"
    EUCLIDEAN = "EUCLIDEAN"

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        key = text.strip().upper()
        if key in ("EUCLIDEAN_COORDINATE", "EUCLID", "COORD", "COORDINATE"):
            key = "EUCLIDEAN"
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(
                f"unknown metric {text!r}; expected one of R, XR, EUCLIDEAN") from None


@dataclass(frozen=True)
class ParameterSpec:
    """How one column is compared between objects.

    ``base`` is only meaningful for XR and must exceed 1 there. ``weight`` is
    the column's share in the hybrid similarity matrix.
    """

    name: str
    metric: MetricKind = MetricKind.XR
    base: float = DEFAULT_XR_BASE
    weight: float = 1.0

    def __post_init__(self):
        if not isinstance(self.metric, MetricKind):
            object.__setattr__(self, "metric", MetricKind.parse(str(self.metric)))
        if self.metric is MetricKind.XR and not self.base > 1:
            raise ConfigurationError(
                f"parameter {self.name!r}: XR base must be > 1, got {self.base}")
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ConfigurationError(
                f"parameter {self.name!r}: weight must be a finite value >= 0, got {self.weight}")


@dataclass(frozen=True)
class Dataset:
    """Immutable table of ``n`` labeled objects by ``p`` labeled parameters.

    ``groups`` is an optional sidecar of planted group indices, filled by the
    synthetic generators and used only as a test oracle.
    """

    object_ids: tuple
    parameters: tuple
    values: np.ndarray
    groups: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "object_ids", tuple(str(o) for o in self.object_ids))
        object.__setattr__(self, "parameters", tuple(self.parameters))
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1 and len(self.parameters) == 1:
            values = values[:, None]
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.groups is not None:
            object.__setattr__(self, "groups", tuple(int(g) for g in self.groups))
        self.validate()

    @property
    def n(self) -> int:
        return len(self.object_ids)

    @property
    def p(self) -> int:
        return len(self.parameters)

    @property
    def parameter_names(self) -> tuple:
        return tuple(spec.name for spec in self.parameters)

    def validate(self):
        n, p = self.n, self.p
        if n < 1 or p < 1:
            raise ValidationError(f"dataset needs at least one object and one parameter (got {n}x{p})")
        if self.values.shape != (n, p):
            raise ValidationError(f"values have shape {self.values.shape}, expected {(n, p)}")
        seen = set()
        for oid in self.object_ids:
            if oid in seen:
                raise ValidationError(f"duplicate object id {oid!r}")
            seen.add(oid)
        names = set()
        for spec in self.parameters:
            if not isinstance(spec, ParameterSpec):
                raise ValidationError(f"parameter {spec!r} is not a ParameterSpec")
            if spec.name in names:
                raise ValidationError(f"duplicate parameter name {spec.name!r}")
            names.add(spec.name)
        if not any(spec.weight > 0 for spec in self.parameters):
            raise ValidationError("at least one parameter must have a positive weight")
        bad = np.argwhere(~np.isfinite(self.values))
        if len(bad):
            i, j = bad[0]
            raise ValidationError(
                f"non-finite value at object {self.object_ids[i]!r}, parameter {self.parameters[j].name!r}")
        for j, spec in enumerate(self.parameters):
            if spec.metric is MetricKind.R:
                neg = np.flatnonzero(self.values[:, j] < 0)
                if len(neg):
                    raise ValidationError(
                        f"R-metric parameter {spec.name!r} has negative value "
                        f"{self.values[neg[0], j]} at object {self.object_ids[neg[0]]!r}")
        if self.groups is not None and len(self.groups) != n:
            raise ValidationError("groups sidecar length does not match object count")

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = list(indices)
        groups = None if self.groups is None else [self.groups[i] for i in idx]
        return Dataset([self.object_ids[i] for i in idx], self.parameters,
                       self.values[idx], groups)

    def with_parameters(self, parameters: Sequence[ParameterSpec]) -> "Dataset":
        """Same table with the per-column metric assignment replaced."""
        if [s.name for s in parameters] != list(self.parameter_names):
            raise ConfigurationError("replacement parameters must keep the column names and order")
        return Dataset(self.object_ids, parameters, self.values, self.groups)

    def to_csv(self, digits: int = CSV_DIGITS) -> str:
        return dataset_to_csv(self, digits)


def format_number(x: float, digits: int = CSV_DIGITS) -> str:
    return f"{float(x):.{digits}g}"


def dataset_to_csv(dataset: Dataset, digits: int = CSV_DIGITS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", *dataset.parameter_names])
    for oid, row in zip(dataset.object_ids, dataset.values):
        writer.writerow([oid, *(format_number(v, digits) for v in row)])
    return buf.getvalue()


def write_csv(dataset: Dataset, path, digits: int = CSV_DIGITS):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(dataset, digits))


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {column!r}: cannot parse {text!r} as a number",
                         row=row, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {column!r}: value {text!r} is not finite",
                         row=row, column=column)
    return value


def read_csv_text(text: str, param_config: Sequence[ParameterSpec] | None = None) -> Dataset:
    """Parse dataset CSV text. See :func:`load_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError("empty CSV: a header row is required", row=1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError("header must name an id column and at least one parameter", row=1)
    columns = {name: j for j, name in enumerate(header) if j > 0}
    if param_config is None:
        param_config = [ParameterSpec(name) for name in header[1:]]
    for spec in param_config:
        if spec.name not in columns:
            raise ConfigurationError(f"configured parameter column {spec.name!r} not found in CSV header")
    ids, table = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} cells, got {len(row)}", row=lineno)
        ids.append(row[0].strip())
        table.append([_parse_float(row[columns[s.name]].strip(), lineno, s.name) for s in param_config])
    if not ids:
        raise ValidationError("CSV holds no data rows")
    return Dataset(ids, param_config, np.array(table, dtype=float).reshape(len(ids), len(param_config)))


def load_csv(path, param_config: Sequence[ParameterSpec] | None = None) -> Dataset:
    """Load an ``id,param...`` CSV into a :class:`Dataset`.

    Parameters
    ----------
    path : str or path-like
        UTF-8 file whose first column holds object ids.
    param_config : sequence of ParameterSpec, optional
        Columns to read and how to compare them. Every name must appear in the
        header. When omitted, all columns are read as XR with the default base.
    """
    if not os.path.exists(path):
        raise ConfigurationError(f"no such file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        return read_csv_text(fh.read(), param_config)


def parse_param_config(text: str) -> list:
    """Read an INI-style metric configuration, one section per column::

        [temperature]
        metric = XR
        base = 1.1
        weight = 2
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed metric config: {exc}") from None
    specs = []
    for name in parser.sections():
        sec = parser[name]
        unknown = set(sec) - {"metric", "base", "weight"}
        if unknown:
            raise ConfigurationError(f"column {name!r}: unknown keys {sorted(unknown)}")
        try:
            base = float(sec.get("base", DEFAULT_XR_BASE))
            weight = float(sec.get("weight", 1.0))
        except ValueError as exc:
            raise ConfigurationError(f"column {name!r}: {exc}") from None
        specs.append(ParameterSpec(name, MetricKind.parse(sec.get("metric", "XR")), base, weight))
    if not specs:
        raise ConfigurationError("metric config defines no columns")
    return specs


def load_param_config(path) -> list:
    if not os.path.exists(path):
        raise ConfigurationError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_param_config(fh.read())


def gen_random(n_objects: int, n_params: int, lo: float = 1.0, hi: float = 500.0,
               seed: int = 0, base: float = DEFAULT_XR_BASE, integer: bool = False) -> Dataset:
    """Uniform random table in ``[lo, hi]``, all columns XR(``base``) with weight 1."""
    if n_objects < 1 or n_params < 1:
        raise ValidationError("n_objects and n_params must be >= 1")
    if not lo < hi:
        raise ValidationError(f"invalid range: lo={lo} must be < hi={hi}")
    rng = np.random.default_rng(seed)
    values = rng.uniform(lo, hi, size=(n_objects, n_params))
    if integer:
        values = np.rint(values)
    ids = [f"o{i + 1}" for i in range(n_objects)]
    params = [ParameterSpec(f"p{j + 1}", MetricKind.XR, base, 1.0) for j in range(n_params)]
    return Dataset(ids, params, values)


@dataclass(frozen=True)
class ScatterGroup:
    center: tuple
    spread: float
    count: int


def _group_label(g: int) -> str:
    return chr(ord("A") + g) if g < 26 else f"G{g}_"


def gen_scatter(groups: Iterable, seed: int = 0, metric: MetricKind = MetricKind.EUCLIDEAN,
                base: float = DEFAULT_XR_BASE) -> Dataset:
    """Points scattered around 3-D centers.

    Each group is a :class:`ScatterGroup` or a mapping with ``center``,
    ``spread`` and ``count``. Offsets are Gaussian with standard deviation
    ``spread / 2``, truncated (by rejection) to a ball of radius ``spread``.
    Object ids are ``A1, A2, ..., B1, ...``; the planted group index of each
    point is kept in ``Dataset.groups``.
    """
    parsed = []
    for g in groups:
        if isinstance(g, Mapping):
            g = ScatterGroup(tuple(g["center"]), float(g["spread"]), int(g["count"]))
        center = np.asarray(g.center, dtype=float)
        if center.shape != (3,):
            raise ValidationError(f"group center must be a 3-vector, got {g.center!r}")
        if not g.spread > 0:
            raise ValidationError(f"group spread must be > 0, got {g.spread}")
        if g.count < 1:
            raise ValidationError(f"group count must be >= 1, got {g.count}")
        parsed.append((center, float(g.spread), int(g.count)))
    if not parsed:
        raise ValidationError("gen_scatter needs at least one group")
    rng = np.random.default_rng(seed)
    points, ids, labels = [], [], []
    for gi, (center, spread, count) in enumerate(parsed):
        accepted = 0
        while accepted < count:
            offset = rng.normal(0.0, spread / 2, size=3)
            if np.linalg.norm(offset) <= spread:
                points.append(center + offset)
                accepted += 1
                ids.append(f"{_group_label(gi)}{accepted}")
                labels.append(gi)
    params = [ParameterSpec(axis, metric, base, 1.0) for axis in ("x", "y", "z")]
    return Dataset(ids, params, np.array(points), labels)


def tetrahedron_centers(edge: float) -> np.ndarray:
    """Vertices of a regular tetrahedron with the given edge length."""
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return v * (edge / np.linalg.norm(v[0] - v[1]))


def benchmark_groups(counts: Sequence[int] = (16, 8, 8, 4), separation: float = 5.0,
                     spread: float = 1.0) -> list:
    """Default planted benchmark: up to four groups on tetrahedron vertices.

    ``separation`` is the center-to-center distance.
    """
    if len(counts) > 4:
        raise ConfigurationError("the tetrahedral benchmark supports at most four groups")
    centers = tetrahedron_centers(separation)
    return [ScatterGroup(tuple(c), spread, k) for c, k in zip(centers, counts)]
