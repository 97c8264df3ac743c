"""IP-group data model: schema, labeled datasets, CSV ingestion, folds."""

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (BadValue, ClassTooSmall, EmptyFile, MissingColumn,
                     UnknownFeature)

IP_GROUP_FEATURES = (
    "ipInReceives",
    "ipInDelivers",
    "ipOutRequests",
    "ipOutDiscards",
    "ipInDiscards",
    "ipForwDatagrams",
    "ipOutNoRoutes",
    "ipInAddrErrors",
)
LABEL_COLUMN = "class"


@dataclass(frozen=True)
class MibSchema:
    feature_names: tuple
    label_column: str = LABEL_COLUMN

    def __post_init__(self):
        names = tuple(self.feature_names)
        object.__setattr__(self, "feature_names", names)
        if not names:
            raise UnknownFeature("schema needs at least one feature")
        if len(set(names)) != len(names):
            raise UnknownFeature(f"duplicate feature names in {names}")
        if self.label_column in names:
            raise UnknownFeature(f"label column {self.label_column!r} clashes with a feature")

    @property
    def n_features(self):
        return len(self.feature_names)


IP_GROUP = MibSchema(IP_GROUP_FEATURES)


def v_number(name):
    """Return the ``V1``..``V8`` identifier of an IP-group variable."""
    return f"V{IP_GROUP_FEATURES.index(name) + 1}"


def normalize_label(token):
    return token.strip().lower()


class Dataset:
    """Immutable table of non-negative counter rows with optional class labels.

    ``X`` is a read-only ``(n_rows, n_features)`` float64 array whose columns
    follow ``schema.feature_names``. ``labels`` is a tuple of lower-case
    strings, or ``None`` for unlabeled data (prediction input only).
    """

    __slots__ = ("schema", "X", "labels")

    def __init__(self, schema, X, labels=None):
        X = np.array(X, dtype=np.float64, copy=True).reshape(-1, schema.n_features)
        X.setflags(write=False)
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != X.shape[0]:
                raise ValueError("labels and rows differ in length")
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    def __len__(self):
        return self.X.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema and self.labels == other.labels
                and np.array_equal(self.X, other.X))

    def __repr__(self):
        return f"Dataset(rows={len(self)}, features={list(self.feature_names)})"

    @property
    def feature_names(self):
        return self.schema.feature_names

    @property
    def labeled(self):
        return self.labels is not None

    def label_set(self):
        """Sorted distinct labels."""
        return tuple(sorted(set(self.labels)))

    def encoded(self, label_set=None):
        """Return ``(label_set, codes)`` with ``codes[i]`` indexing ``label_set``."""
        if label_set is None:
            label_set = self.label_set()
        index = {c: i for i, c in enumerate(label_set)}
        return tuple(label_set), np.array([index[c] for c in self.labels], dtype=np.intp)

    def take(self, rows):
        """Sub-dataset of the given row indices (in the given order)."""
        rows = np.asarray(rows, dtype=np.intp)
        labels = None if self.labels is None else tuple(self.labels[i] for i in rows)
        return Dataset(self.schema, self.X[rows], labels)


def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_cell(text, row, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise BadValue(row, column, text) from None
    if not math.isfinite(value) or value < 0:
        raise BadValue(row, column, text)
    return value


def load_csv(source, schema=IP_GROUP, require_label=True):
    """Parse a dataset from a UTF-8 CSV byte stream.

    Columns are matched by header name, so any column order works and extra
    columns are ignored. Data rows are numbered from 1 in error reports.
    When ``require_label`` is false a missing ``class`` column yields an
    unlabeled dataset.
    """
    reader = csv.reader(_open_text(source))
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        raise EmptyFile("no header row")
    header = [h.strip() for h in header]
    position = {name: i for i, name in enumerate(header)}
    for name in schema.feature_names:
        if name not in position:
            raise MissingColumn(name)
    has_label = schema.label_column in position
    if require_label and not has_label:
        raise MissingColumn(schema.label_column)

    cols = [position[name] for name in schema.feature_names]
    label_col = position.get(schema.label_column)
    rows, labels = [], []
    for row_no, record in enumerate(reader, start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        values = []
        for name, col in zip(schema.feature_names, cols):
            if col >= len(record) or not record[col].strip():
                raise BadValue(row_no, name, None)
            values.append(_parse_cell(record[col].strip(), row_no, name))
        rows.append(values)
        if has_label:
            token = normalize_label(record[label_col]) if label_col < len(record) else ""
            if not token:
                raise BadValue(row_no, schema.label_column, None)
            labels.append(token)
    if not rows:
        raise EmptyFile("header present but no data rows")
    return Dataset(schema, np.array(rows), labels if has_label else None)


def read_csv(path, schema=IP_GROUP, require_label=True):
    with open(path, "rb") as fh:
        return load_csv(fh, schema, require_label)


def dump_csv(data, stream):
    """Write ``data`` as CSV text to ``stream``; floats use ``repr`` so reloads are exact."""
    writer = csv.writer(stream, lineterminator="\n")
    header = list(data.feature_names)
    if data.labeled:
        header.append(data.schema.label_column)
    writer.writerow(header)
    for i, row in enumerate(data.X):
        cells = [repr(float(v)) for v in row]
        if data.labeled:
            cells.append(data.labels[i])
        writer.writerow(cells)


def write_csv(data, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        dump_csv(data, fh)


def project(data, subset):
    """Keep only the ``subset`` features, in the dataset's original column order."""
    subset = list(subset)
    if not subset:
        raise UnknownFeature("feature subset is empty")
    if len(set(subset)) != len(subset):
        raise UnknownFeature(f"duplicate names in subset {subset}")
    for name in subset:
        if name not in data.feature_names:
            raise UnknownFeature(f"{name!r} is not a feature of this dataset")
    wanted = set(subset)
    keep = [i for i, name in enumerate(data.feature_names) if name in wanted]
    schema = MibSchema(tuple(data.feature_names[i] for i in keep), data.schema.label_column)
    return Dataset(schema, data.X[:, keep], data.labels)


def class_distribution(data):
    if not data.labels:
        return {}
    return dict(Counter(data.labels))


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple

    def test_indices(self, fold):
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def train_indices(self, fold):
        return np.flatnonzero(np.asarray(self.assignments) != fold)

    def sizes(self):
        return [int(np.sum(np.asarray(self.assignments) == f)) for f in range(self.k)]


def stratified_folds(data, k, seed):
    """Assign every row to one of ``k`` folds, class by class.

    Rows of each class (classes in sorted order) are shuffled with a
    generator seeded by ``seed`` and dealt round-robin. The dealing position
    carries over between classes so overall fold sizes also differ by at
    most one.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    counts = class_distribution(data)
    for label in sorted(counts):
        if counts[label] < k:
            raise ClassTooSmall(label, counts[label], k)
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(data), dtype=np.intp)
    labels = np.array(data.labels, dtype=object)
    offset = 0
    for label in sorted(counts):
        members = np.flatnonzero(labels == label)
        members = members[rng.permutation(len(members))]
        assignments[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k
    return FoldPlan(k, tuple(int(a) for a in assignments))
