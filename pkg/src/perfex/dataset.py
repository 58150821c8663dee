"""Tabular prediction data: feature schema, prediction tables, row subsets.

A :class:`PredictionTable` couples feature columns with true labels, predicted
labels and optional per-class scores.  It is the only view the rest of the
package has of the classifier under inspection, which is what keeps every
downstream computation model-agnostic: any model that can be run over a
dataset once can be explained.

CSV layout
----------
Tables round-trip through a fixed CSV layout: one header row, the feature
columns in schema order, then ``__true__`` and ``__pred__`` holding class
labels, then optionally one ``__score_<class>`` column per class, in class-set
order.  Files are UTF-8 with ``.`` as the decimal separator.  Missing cells
are rejected at load time; there is no imputation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._files import atomic_write_text
from .errors import DataFormatError, EmptyTableError, UnknownClassError

NUMERIC = "numeric"
BINARY = "binary"
CATEGORICAL = "categorical"
FEATURE_KINDS = (NUMERIC, BINARY, CATEGORICAL)

TRUE_COLUMN = "__true__"
PRED_COLUMN = "__pred__"
SCORE_PREFIX = "__score_"

SCORE_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Feature:
    """One feature column: a name, a kind, and (if categorical) its categories."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise ValueError(f"categorical feature {self.name!r} needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"duplicate categories on feature {self.name!r}")
        elif self.categories:
            raise ValueError(f"categories given for non-categorical feature {self.name!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered collection of features describing the columns of a table."""

    features: tuple[Feature, ...]

    def __post_init__(self):
        if not self.features:
            raise ValueError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names in schema")
        object.__setattr__(self, "features", tuple(self.features))

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index(self, name: str) -> int:
        for j, f in enumerate(self.features):
            if f.name == name:
                return j
        raise KeyError(name)


@dataclass(frozen=True)
class ClassSet:
    """Ordered set of class labels.  Order is significant: score columns,
    score matrices and weighted metrics all follow it."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise ValueError("need at least two classes")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate class labels")
        if any(not lbl for lbl in self.labels):
            raise ValueError("empty class label")

    @property
    def k(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None


def _encode_labels(values, classes: ClassSet, column: str) -> np.ndarray:
    lookup = {lbl: i for i, lbl in enumerate(classes.labels)}
    codes = np.empty(len(values), dtype=np.int32)
    for i, v in enumerate(values):
        try:
            codes[i] = lookup[v]
        except KeyError:
            raise UnknownClassError(
                f"label {v!r} in {column} is not in the class set", row=i + 1
            ) from None
    return codes


class PredictionTable:
    """Immutable table of features, true labels, predicted labels and scores.

    Feature columns are stored as numpy arrays: float64 for numeric and binary
    features, int32 category codes (indices into the feature's category tuple)
    for categorical ones.  Labels are stored as int32 codes into the class
    set.  All arrays are marked read-only, so tables can be shared freely
    between threads.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        classes: ClassSet,
        columns,
        y_true,
        y_pred,
        scores=None,
        *,
        scores_are_probabilities: bool = True,
    ):
        self.schema = schema
        self.classes = classes
        if len(columns) != schema.m:
            raise DataFormatError(
                f"expected {schema.m} feature columns, got {len(columns)}"
            )
        n = len(y_true)
        if len(y_pred) != n:
            raise DataFormatError("__true__ and __pred__ lengths differ")

        encoded = []
        for j, feature in enumerate(schema.features):
            col = columns[j]
            if len(col) != n:
                raise DataFormatError(f"feature {feature.name!r} has wrong length")
            if feature.kind == CATEGORICAL:
                lookup = {c: i for i, c in enumerate(feature.categories)}
                arr = np.empty(n, dtype=np.int32)
                for i, v in enumerate(col):
                    try:
                        arr[i] = lookup[v]
                    except KeyError:
                        raise DataFormatError(
                            f"value {v!r} is not a category of {feature.name!r}",
                            row=i + 1,
                        ) from None
            else:
                arr = np.asarray(col, dtype=np.float64).copy()
                if arr.ndim != 1:
                    raise DataFormatError(f"feature {feature.name!r} is not 1-D")
                bad = ~np.isfinite(arr)
                if bad.any():
                    raise DataFormatError(
                        f"non-finite value in feature {feature.name!r}",
                        row=int(np.flatnonzero(bad)[0]) + 1,
                    )
                if feature.kind == BINARY:
                    off = (arr != 0.0) & (arr != 1.0)
                    if off.any():
                        raise DataFormatError(
                            f"binary feature {feature.name!r} has a value outside {{0, 1}}",
                            row=int(np.flatnonzero(off)[0]) + 1,
                        )
            arr.flags.writeable = False
            encoded.append(arr)
        self._columns = tuple(encoded)

        self._y = _encode_labels(y_true, classes, TRUE_COLUMN)
        self._pred = _encode_labels(y_pred, classes, PRED_COLUMN)
        self._y.flags.writeable = False
        self._pred.flags.writeable = False

        self.scores_are_probabilities = bool(scores_are_probabilities)
        if scores is None:
            self._scores = None
        else:
            sc = np.asarray(scores, dtype=np.float64).copy()
            if sc.shape != (n, classes.k):
                raise DataFormatError(
                    f"score matrix must have shape ({n}, {classes.k}), got {sc.shape}"
                )
            if not np.isfinite(sc).all():
                raise DataFormatError("non-finite score value")
            if ((sc < 0.0) | (sc > 1.0)).any():
                bad_row = int(np.flatnonzero(((sc < 0.0) | (sc > 1.0)).any(axis=1))[0])
                raise DataFormatError("score outside [0, 1]", row=bad_row + 1)
            if self.scores_are_probabilities and n > 0:
                sums = sc.sum(axis=1)
                off = np.abs(sums - 1.0) > SCORE_SUM_TOLERANCE
                if off.any():
                    raise DataFormatError(
                        "score row does not sum to 1",
                        row=int(np.flatnonzero(off)[0]) + 1,
                    )
            sc.flags.writeable = False
            self._scores = sc

        correct = self._y == self._pred
        correct.flags.writeable = False
        self._correct = correct

    # -- basic accessors ---------------------------------------------------

    @property
    def n(self) -> int:
        return self._y.shape[0]

    @property
    def m(self) -> int:
        return self.schema.m

    @property
    def y_codes(self) -> np.ndarray:
        return self._y

    @property
    def pred_codes(self) -> np.ndarray:
        return self._pred

    @property
    def scores(self) -> np.ndarray | None:
        return self._scores

    @property
    def correct(self) -> np.ndarray:
        """Boolean array: predicted label equals true label."""
        return self._correct

    def column(self, j: int) -> np.ndarray:
        """Raw stored column ``j``: floats, or category codes if categorical."""
        return self._columns[j]

    def column_labels(self, j: int) -> list[str]:
        """Categorical column ``j`` decoded back to category strings."""
        feature = self.schema.features[j]
        if feature.kind != CATEGORICAL:
            raise ValueError(f"feature {feature.name!r} is not categorical")
        cats = feature.categories
        return [cats[c] for c in self._columns[j]]

    def y_labels(self) -> list[str]:
        return [self.classes.labels[c] for c in self._y]

    def pred_labels(self) -> list[str]:
        return [self.classes.labels[c] for c in self._pred]

    def full_view(self) -> "SubsetView":
        return SubsetView(self, np.arange(self.n, dtype=np.int64))

    def subset(self, indices) -> "PredictionTable":
        """New table holding the given rows (ascending positional indices)."""
        idx = np.asarray(indices, dtype=np.int64)
        out = object.__new__(PredictionTable)
        out.schema = self.schema
        out.classes = self.classes
        cols = []
        for arr in self._columns:
            sub = arr[idx]
            sub.flags.writeable = False
            cols.append(sub)
        out._columns = tuple(cols)
        out._y = self._y[idx]
        out._pred = self._pred[idx]
        out._y.flags.writeable = False
        out._pred.flags.writeable = False
        out.scores_are_probabilities = self.scores_are_probabilities
        if self._scores is None:
            out._scores = None
        else:
            out._scores = self._scores[idx]
            out._scores.flags.writeable = False
        out._correct = out._y == out._pred
        out._correct.flags.writeable = False
        return out

    def equals(self, other: "PredictionTable") -> bool:
        """Field-by-field equality, exact on every array."""
        if self.schema != other.schema or self.classes != other.classes:
            return False
        if self.n != other.n:
            return False
        if self.scores_are_probabilities != other.scores_are_probabilities:
            return False
        for a, b in zip(self._columns, other._columns):
            if not np.array_equal(a, b):
                return False
        if not (np.array_equal(self._y, other._y) and np.array_equal(self._pred, other._pred)):
            return False
        if (self._scores is None) != (other._scores is None):
            return False
        if self._scores is not None and not np.array_equal(self._scores, other._scores):
            return False
        return True


@dataclass(frozen=True, eq=False)
class SubsetView:
    """A strictly increasing selection of rows from one table.

    Views are cheap (one index array) and immutable; splitting a view yields
    two views over the same underlying table.
    """

    table: PredictionTable
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ValueError("view indices must be 1-D")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.table.n:
                raise ValueError("view index out of range")
            if idx.size > 1 and not (np.diff(idx) > 0).all():
                raise ValueError("view indices must be strictly increasing")
        if idx.flags.writeable:
            idx = idx.copy()
            idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)

    def column(self, j: int) -> np.ndarray:
        return self.table.column(j)[self.indices]


def split_rows(view: SubsetView, feature: int, value) -> tuple[SubsetView, SubsetView]:
    """Partition ``view`` on one feature condition, preserving row order.

    Numeric and binary features split on ``x <= value`` (left) versus
    ``x > value`` (right); categorical features split on ``x == value``
    versus ``x != value``.
    """
    table = view.table
    feat = table.schema.features[feature]
    col = view.column(feature)
    if feat.kind == CATEGORICAL:
        if not isinstance(value, str):
            raise ValueError("categorical split needs a category string")
        try:
            code = feat.categories.index(value)
        except ValueError:
            raise ValueError(
                f"value {value!r} is not a category of {feat.name!r}"
            ) from None
        mask = col == code
    else:
        value = float(value)
        mask = col <= value
    left = SubsetView(table, view.indices[mask])
    right = SubsetView(table, view.indices[~mask])
    return left, right


# -- CSV loading ----------------------------------------------------------


def _parse_float(cell: str, row: int, column: str) -> float:
    if cell == "":
        raise DataFormatError(f"missing value in column {column!r}", row=row)
    try:
        v = float(cell)
    except ValueError:
        raise DataFormatError(
            f"cannot parse {cell!r} in column {column!r} as a number", row=row
        ) from None
    if not math.isfinite(v):
        raise DataFormatError(f"non-finite value in column {column!r}", row=row)
    return v


def _looks_numeric(cell: str) -> bool:
    try:
        return math.isfinite(float(cell))
    except ValueError:
        return False


def _infer_schema(names, raw_columns) -> FeatureSchema:
    # Inference rule: all-numeric columns whose distinct values sit inside
    # {0, 1} are binary, columns with any non-numeric cell are categorical,
    # everything else is numeric.
    features = []
    for name, col in zip(names, raw_columns):
        if all(_looks_numeric(c) for c in col):
            distinct = {float(c) for c in col}
            if len(distinct) <= 2 and distinct <= {0.0, 1.0}:
                features.append(Feature(name, BINARY))
            else:
                features.append(Feature(name, NUMERIC))
        else:
            features.append(Feature(name, CATEGORICAL, tuple(sorted(set(col)))))
    return FeatureSchema(tuple(features))


def load_table(
    source,
    schema: FeatureSchema | None = None,
    classes: ClassSet | None = None,
    *,
    scores_are_probabilities: bool = True,
) -> PredictionTable:
    """Load a prediction table from CSV.

    Parameters
    ----------
    source:
        A filesystem path, ``bytes``, or a readable file object.
    schema:
        Optional schema.  When omitted, feature kinds are inferred from the
        data: all-numeric columns with values inside {0, 1} become binary,
        columns with non-numeric cells become categorical (categories sorted),
        the rest numeric.
    classes:
        Optional declared class set.  When score columns are present their
        order defines the class set and ``classes``, if also given, must
        agree.  With neither, classes are the sorted distinct labels seen in
        ``__true__`` and ``__pred__``.

    Raises
    ------
    DataFormatError
        On any malformed content; the offending 1-based data row is named
        where applicable.  An empty table is an error.
    UnknownClassError
        When a label is not in the declared class set.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    text = data.decode("utf-8")

    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty file: no header") from None

    if TRUE_COLUMN not in header:
        raise DataFormatError(f"header has no {TRUE_COLUMN} column")
    true_at = header.index(TRUE_COLUMN)
    feature_names = header[:true_at]
    if not feature_names:
        raise DataFormatError("no feature columns before the label columns")
    if len(header) <= true_at + 1 or header[true_at + 1] != PRED_COLUMN:
        raise DataFormatError(f"{PRED_COLUMN} must immediately follow {TRUE_COLUMN}")
    score_headers = header[true_at + 2 :]
    for h in score_headers:
        if not h.startswith(SCORE_PREFIX):
            raise DataFormatError(f"unexpected trailing column {h!r}")
    score_labels = [h[len(SCORE_PREFIX) :] for h in score_headers]

    if score_labels:
        declared = ClassSet(tuple(score_labels))
        if classes is not None and classes != declared:
            raise DataFormatError("declared classes do not match score columns")
        classes = declared

    rows = list(reader)
    if not rows:
        raise EmptyTableError("table has no data rows")
    width = len(header)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"expected {width} cells, got {len(row)}", row=i + 1
            )

    raw_features = [[row[j] for row in rows] for j in range(len(feature_names))]
    if schema is None:
        schema = _infer_schema(feature_names, raw_features)
    else:
        if schema.names != tuple(feature_names):
            raise DataFormatError(
                "schema feature names do not match the CSV header"
            )

    columns = []
    for j, feature in enumerate(schema.features):
        raw = raw_features[j]
        if feature.kind == CATEGORICAL:
            for i, cell in enumerate(raw):
                if cell == "":
                    raise DataFormatError(
                        f"missing value in column {feature.name!r}", row=i + 1
                    )
            columns.append(raw)
        else:
            columns.append(
                [_parse_float(cell, i + 1, feature.name) for i, cell in enumerate(raw)]
            )

    y_true = [row[true_at] for row in rows]
    y_pred = [row[true_at + 1] for row in rows]
    for i, v in enumerate(y_true):
        if v == "":
            raise DataFormatError(f"missing value in column {TRUE_COLUMN!r}", row=i + 1)
    for i, v in enumerate(y_pred):
        if v == "":
            raise DataFormatError(f"missing value in column {PRED_COLUMN!r}", row=i + 1)

    if classes is None:
        classes = ClassSet(tuple(sorted(set(y_true) | set(y_pred))))

    scores = None
    if score_labels:
        scores = [
            [
                _parse_float(row[true_at + 2 + s], i + 1, score_headers[s])
                for s in range(len(score_labels))
            ]
            for i, row in enumerate(rows)
        ]

    return PredictionTable(
        schema,
        classes,
        columns,
        y_true,
        y_pred,
        scores,
        scores_are_probabilities=scores_are_probabilities,
    )


# -- CSV writing ----------------------------------------------------------


def _format_cell(v: float) -> str:
    # repr() of a float is the shortest string that round-trips exactly.
    return repr(float(v))


def table_to_csv_text(table: PredictionTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(table.schema.names) + [TRUE_COLUMN, PRED_COLUMN]
    if table.scores is not None:
        header += [SCORE_PREFIX + lbl for lbl in table.classes.labels]
    writer.writerow(header)

    decoded = []
    for j, feature in enumerate(table.schema.features):
        if feature.kind == CATEGORICAL:
            decoded.append(table.column_labels(j))
        else:
            decoded.append([_format_cell(v) for v in table.column(j)])
    y = table.y_labels()
    pred = table.pred_labels()
    scores = table.scores
    for i in range(table.n):
        row = [decoded[j][i] for j in range(table.m)]
        row.append(y[i])
        row.append(pred[i])
        if scores is not None:
            row.extend(_format_cell(v) for v in scores[i])
        writer.writerow(row)
    return buf.getvalue()


def write_csv(table: PredictionTable, path) -> None:
    """Serialize ``table`` to CSV at ``path`` (atomic write)."""
    atomic_write_text(path, table_to_csv_text(table))


# -- stratified splitting -------------------------------------------------


def stratified_split_indices(y_codes, k: int, fractions, seed) -> list[np.ndarray]:
    """Partition row positions into parts with class proportions preserved.

    Within each class, rows are shuffled with a generator seeded from
    ``seed`` and dealt to the parts by cumulative fraction; each part's
    indices are returned in ascending order.  Fractions must sum to 1.
    """
    fracs = [float(f) for f in fractions]
    if len(fracs) < 2:
        raise ValueError("need at least two fractions")
    if any(f < 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
        raise ValueError("fractions must be non-negative and sum to 1")
    y = np.asarray(y_codes)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    parts: list[list[np.ndarray]] = [[] for _ in fracs]
    for c in range(k):
        pool = np.flatnonzero(y == c)
        rng.shuffle(pool)
        bounds = [int(round(sum(fracs[: i + 1]) * pool.size)) for i in range(len(fracs))]
        start = 0
        for p, stop in enumerate(bounds):
            parts[p].append(pool[start:stop])
            start = stop
    return [np.sort(np.concatenate(chunks)) if chunks else np.empty(0, np.int64) for chunks in parts]


def stratified_split(table: PredictionTable, fractions, seed) -> list[PredictionTable]:
    """Split a table into stratified parts (for example 0.5/0.25/0.25)."""
    parts = stratified_split_indices(table.y_codes, table.classes.k, fractions, seed)
    return [table.subset(idx) for idx in parts]
