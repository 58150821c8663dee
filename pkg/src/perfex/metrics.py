"""Performance metrics evaluated on row subsets.

Every metric maps a set of rows to a :class:`MetricValue`: a number in
[0, 1], the row count the value's confidence interval applies to (its
*support*), and a defined flag.  Undefined values (empty denominators) are
first-class: they propagate instead of being silently replaced by zero, and
the split search treats them as infeasible.

Metric selection strings
------------------------
``accuracy`` | ``precision:<class>`` | ``recall:<class>`` | ``f1:<class>`` |
``weighted_precision`` | ``weighted_recall`` | ``weighted_f1`` |
``ece:<bins>`` | ``mean_min_score:<class>,<class>[,...]``

Determinism: value computations use exact integer counting where possible
and exactly rounded float summation (``math.fsum``) elsewhere, so a metric
value does not depend on row order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import ClassSet, PredictionTable, SubsetView
from .errors import MissingScoresError

ACCURACY = "accuracy"
PRECISION = "precision"
RECALL = "recall"
F1 = "f1"
WEIGHTED_PRECISION = "weighted_precision"
WEIGHTED_RECALL = "weighted_recall"
WEIGHTED_F1 = "weighted_f1"
ECE = "ece"
MEAN_MIN_SCORE = "mean_min_score"

_CLASS_KINDS = (PRECISION, RECALL, F1)
_WEIGHTED_KINDS = (WEIGHTED_PRECISION, WEIGHTED_RECALL, WEIGHTED_F1)
KINDS = (ACCURACY,) + _CLASS_KINDS + _WEIGHTED_KINDS + (ECE, MEAN_MIN_SCORE)

DEFAULT_ECE_BINS = 10


@dataclass(frozen=True)
class MetricValue:
    """A metric outcome: ``value`` (or None when undefined) plus its support."""

    value: float | None
    support: int

    @property
    def defined(self) -> bool:
        return self.value is not None


_UNDEFINED = MetricValue(None, 0)


@dataclass(frozen=True)
class MetricSpec:
    """Which metric to compute, with its parameters.

    Use the factory classmethods or :func:`parse_metric`; the ``name``
    property gives back the canonical selection string.
    """

    kind: str
    class_label: str | None = None
    bins: int = 0
    class_subset: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind in _CLASS_KINDS and not self.class_label:
            raise ValueError(f"{self.kind} needs a class label")
        if self.kind == ECE and self.bins < 1:
            raise ValueError("ece needs at least one bin")
        if self.kind == MEAN_MIN_SCORE:
            if len(self.class_subset) < 2:
                raise ValueError("mean_min_score needs at least two classes")
            if len(set(self.class_subset)) != len(self.class_subset):
                raise ValueError("duplicate class in mean_min_score subset")

    # -- factories ---------------------------------------------------------

    @classmethod
    def accuracy(cls) -> "MetricSpec":
        return cls(ACCURACY)

    @classmethod
    def precision(cls, class_label: str) -> "MetricSpec":
        return cls(PRECISION, class_label=class_label)

    @classmethod
    def recall(cls, class_label: str) -> "MetricSpec":
        return cls(RECALL, class_label=class_label)

    @classmethod
    def f1(cls, class_label: str) -> "MetricSpec":
        return cls(F1, class_label=class_label)

    @classmethod
    def weighted(cls, which: str) -> "MetricSpec":
        kind = f"weighted_{which}"
        if kind not in _WEIGHTED_KINDS:
            raise ValueError(f"no weighted variant of {which!r}")
        return cls(kind)

    @classmethod
    def ece(cls, bins: int = DEFAULT_ECE_BINS) -> "MetricSpec":
        return cls(ECE, bins=int(bins))

    @classmethod
    def mean_min_score(cls, class_subset) -> "MetricSpec":
        return cls(MEAN_MIN_SCORE, class_subset=tuple(class_subset))

    # -- properties ----------------------------------------------------------

    @property
    def requires_scores(self) -> bool:
        return self.kind in (ECE, MEAN_MIN_SCORE)

    @property
    def name(self) -> str:
        if self.kind in _CLASS_KINDS:
            return f"{self.kind}:{self.class_label}"
        if self.kind == ECE:
            return f"ece:{self.bins}"
        if self.kind == MEAN_MIN_SCORE:
            return f"mean_min_score:{','.join(self.class_subset)}"
        return self.kind


def parse_metric(text: str) -> MetricSpec:
    """Parse a metric selection string into a :class:`MetricSpec`."""
    text = text.strip()
    kind, sep, arg = text.partition(":")
    if kind in (ACCURACY,) + _WEIGHTED_KINDS:
        if sep:
            raise ValueError(f"metric {kind!r} takes no argument")
        return MetricSpec(kind)
    if kind in _CLASS_KINDS:
        if not arg:
            raise ValueError(f"metric {kind!r} needs a class label, e.g. {kind}:a")
        return MetricSpec(kind, class_label=arg)
    if kind == ECE:
        if not sep:
            return MetricSpec.ece()
        try:
            bins = int(arg)
        except ValueError:
            raise ValueError(f"ece bin count {arg!r} is not an integer") from None
        return MetricSpec.ece(bins)
    if kind == MEAN_MIN_SCORE:
        labels = [part for part in arg.split(",") if part] if arg else []
        if len(labels) < 2:
            raise ValueError("mean_min_score needs at least two class labels")
        return MetricSpec.mean_min_score(labels)
    raise ValueError(f"unknown metric {text!r}")


def _check_classes(spec: MetricSpec, classes: ClassSet) -> None:
    if spec.class_label is not None and spec.class_label not in classes.labels:
        raise ValueError(f"metric references unknown class {spec.class_label!r}")
    for lbl in spec.class_subset:
        if lbl not in classes.labels:
            raise ValueError(f"metric references unknown class {lbl!r}")


# -- evaluation -------------------------------------------------------------


def evaluate(spec: MetricSpec, view: SubsetView) -> MetricValue:
    """Evaluate a metric on the rows of ``view``.

    Returns an undefined :class:`MetricValue` when the metric's denominator
    is empty on these rows (for example precision of a class that is never
    predicted here).  Raises :class:`MissingScoresError` when a score-based
    metric meets a table without score columns.
    """
    return evaluate_indices(spec, view.table, view.indices)


def evaluate_indices(spec: MetricSpec, table: PredictionTable, indices: np.ndarray) -> MetricValue:
    """Same as :func:`evaluate` but on a raw index array (internal fast path)."""
    _check_classes(spec, table.classes)
    if spec.requires_scores and table.scores is None:
        raise MissingScoresError(f"metric {spec.name} needs score columns")
    kind = spec.kind
    if kind == ACCURACY:
        return _accuracy(table, indices)
    if kind == PRECISION:
        return _precision(table, indices, table.classes.index(spec.class_label))
    if kind == RECALL:
        return _recall(table, indices, table.classes.index(spec.class_label))
    if kind == F1:
        return _f1(table, indices, table.classes.index(spec.class_label))
    if kind in _WEIGHTED_KINDS:
        return _weighted(table, indices, kind)
    if kind == ECE:
        return _ece(table, indices, spec.bins)
    if kind == MEAN_MIN_SCORE:
        cols = [table.classes.index(lbl) for lbl in spec.class_subset]
        return _mean_min_score(table, indices, cols)
    raise AssertionError(kind)


def _accuracy(table, idx) -> MetricValue:
    n = int(idx.size)
    if n == 0:
        return _UNDEFINED
    hits = int(table.correct[idx].sum())
    return MetricValue(hits / n, n)


def _precision(table, idx, code) -> MetricValue:
    pred = table.pred_codes[idx]
    sel = pred == code
    den = int(sel.sum())
    if den == 0:
        return _UNDEFINED
    num = int((table.y_codes[idx][sel] == code).sum())
    return MetricValue(num / den, den)


def _recall(table, idx, code) -> MetricValue:
    true = table.y_codes[idx]
    sel = true == code
    den = int(sel.sum())
    if den == 0:
        return _UNDEFINED
    num = int((table.pred_codes[idx][sel] == code).sum())
    return MetricValue(num / den, den)


def _f1(table, idx, code) -> MetricValue:
    p = _precision(table, idx, code)
    r = _recall(table, idx, code)
    support = min(p.support, r.support)
    if not (p.defined and r.defined):
        return MetricValue(None, support)
    s = p.value + r.value
    if s == 0.0:
        return MetricValue(None, support)
    return MetricValue(2.0 * p.value * r.value / s, support)


_PER_CLASS = {
    WEIGHTED_PRECISION: _precision,
    WEIGHTED_RECALL: _recall,
    WEIGHTED_F1: _f1,
}


def _weighted(table, idx, kind) -> MetricValue:
    n = int(idx.size)
    if n == 0:
        return _UNDEFINED
    per_class = _PER_CLASS[kind]
    true = table.y_codes[idx]
    counts = np.bincount(true, minlength=table.classes.k)
    terms = []
    for code in range(table.classes.k):
        weight = int(counts[code])
        if weight == 0:
            continue
        v = per_class(table, idx, code)
        if not v.defined:
            # One undefined constituent makes the whole average undefined.
            return MetricValue(None, n)
        terms.append(weight * v.value)
    return MetricValue(math.fsum(terms) / n, n)


def _ece(table, idx, bins) -> MetricValue:
    n = int(idx.size)
    if n == 0:
        return _UNDEFINED
    conf = table.scores[idx].max(axis=1)
    correct = table.correct[idx]
    # Equal-width bins on [0, 1]; each bin is (lo, hi] except the first,
    # which also contains 0.  searchsorted against the shared edge array
    # keeps boundary handling identical to a per-row comparison loop.
    edges = np.array([i / bins for i in range(bins + 1)])
    which = np.searchsorted(edges, conf, side="left") - 1
    which = np.clip(which, 0, bins - 1)
    total = 0.0
    parts = []
    for b in range(bins):
        in_bin = which == b
        size = int(in_bin.sum())
        if size == 0:
            continue
        acc = int(correct[in_bin].sum()) / size
        avg_conf = math.fsum(conf[in_bin]) / size
        parts.append((size / n) * abs(acc - avg_conf))
    total = math.fsum(parts)
    return MetricValue(total, n)


def _mean_min_score(table, idx, cols) -> MetricValue:
    n = int(idx.size)
    if n == 0:
        return _UNDEFINED
    mins = table.scores[idx][:, cols].min(axis=1)
    return MetricValue(math.fsum(mins) / n, n)
