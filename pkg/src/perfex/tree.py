"""Meta trees: recursive metric-gap partitioning of a prediction table.

A node splits its rows on the condition found by the split search; growth
stops at ``max_depth``, when no feasible split exists, or when the best gap
falls below ``min_beta``.  Each leaf records its row count and the metric
value on its rows.

The minimum per-side support comes from a binomial proportion confidence
interval: a proportion estimate ``e`` on ``n`` rows has half-width
``z * sqrt(e(1-e)/n)``, and since ``e(1-e) <= 1/4`` a half-width of ``D/2``
(total interval width ``D``) is guaranteed once ``n >= z^2 / D^2``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .dataset import CATEGORICAL, ClassSet, FeatureSchema, PredictionTable
from .errors import (
    EmptyTableError,
    SchemaMismatchError,
    TreeFormatError,
    UndefinedMetricError,
)
from .metrics import MetricSpec, MetricValue, evaluate, parse_metric
from .splitter import SearchConfig, SplitCandidate, best_split

FORMAT_VERSION = 1


class MinSamples(NamedTuple):
    exact: float
    required: int


def min_samples(confidence_z: float, interval_width: float) -> MinSamples:
    """Rows needed so a proportion's CI is no wider than ``interval_width``.

    Returns the exact real bound ``z^2 / D^2`` (worst case at e = 1/2) and
    the first integer row count that satisfies it.
    """
    if confidence_z <= 0:
        raise ValueError("confidence_z must be positive")
    if not 0 < interval_width <= 1:
        raise ValueError("interval_width must be in (0, 1]")
    exact = (confidence_z * confidence_z) / (interval_width * interval_width)
    return MinSamples(exact, int(math.ceil(exact)))


@dataclass(frozen=True)
class StoppingRule:
    """When tree growth stops.

    ``confidence_z`` and ``max_interval_width`` set the per-side minimum
    metric support via :func:`min_samples`; set both to 1.0 to disable that
    floor (the minimum becomes a single row).
    """

    max_depth: int = 6
    min_beta: float = 0.05
    confidence_z: float = 1.96
    max_interval_width: float = 0.1

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.min_beta < 0:
            raise ValueError("min_beta must be non-negative")
        min_samples(self.confidence_z, self.max_interval_width)

    @property
    def min_support(self) -> int:
        return min_samples(self.confidence_z, self.max_interval_width).required


@dataclass(frozen=True, eq=False)
class Leaf:
    leaf_id: int
    size: int
    metric: MetricValue
    indices: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class Internal:
    candidate: SplitCandidate
    left: "Node"
    right: "Node"


Node = Union[Leaf, Internal]


@dataclass(frozen=True)
class PathStep:
    """One edge on a root-to-leaf path; ``is_left`` tells which side was taken."""

    feature: int
    kind: str
    value: float | str
    is_left: bool


@dataclass(frozen=True)
class LeafStats:
    leaf_id: int
    size: int
    metric: MetricValue
    path: tuple[PathStep, ...]


def schema_fingerprint(schema: FeatureSchema, classes: ClassSet) -> str:
    doc = {
        "features": [
            {"name": f.name, "kind": f.kind, "categories": list(f.categories)}
            for f in schema.features
        ],
        "classes": list(classes.labels),
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True, eq=False)
class MetaTree:
    root: Node
    metric: MetricSpec
    stopping: StoppingRule
    alpha: int
    schema_fingerprint: str
    n_build: int

    def leaves(self) -> list[Leaf]:
        out: list[Leaf] = []

        def walk(node: Node):
            if isinstance(node, Leaf):
                out.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    def depth(self) -> int:
        def walk(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def leaf_stats(self) -> list[LeafStats]:
        """Per-leaf statistics with the root-to-leaf condition path, in
        leaf-id order."""
        out: list[LeafStats] = []

        def walk(node: Node, path: tuple[PathStep, ...]):
            if isinstance(node, Leaf):
                out.append(LeafStats(node.leaf_id, node.size, node.metric, path))
                return
            c = node.candidate
            walk(node.left, path + (PathStep(c.feature, c.kind, c.value, True),))
            walk(node.right, path + (PathStep(c.feature, c.kind, c.value, False),))

        walk(self.root, ())
        return out

    def to_json(self) -> str:
        return serialize_tree(self)

    @classmethod
    def from_json(cls, text: str) -> "MetaTree":
        return deserialize_tree(text)


def build_tree(
    table: PredictionTable,
    metric: MetricSpec,
    stopping: StoppingRule | None = None,
    alpha: int = 100,
    *,
    max_thresholds: int | None = None,
    threads: int = 1,
    keep_leaf_indices: bool = True,
) -> MetaTree:
    """Grow a meta tree on ``table`` for ``metric``.

    Growth is greedy and recursive: each node takes the feasible split with
    the largest metric gap, left side first.  Leaf ids are assigned in
    depth-first pre-order.  Raises :class:`UndefinedMetricError` when the
    metric is undefined on the whole table and :class:`EmptyTableError` on
    an empty one.
    """
    stopping = stopping or StoppingRule()
    if table.n == 0:
        raise EmptyTableError("cannot build a tree on an empty table")
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    if table.n < alpha:
        raise ValueError(f"table has {table.n} rows, fewer than alpha={alpha}")

    config = SearchConfig(
        alpha=alpha, min_support=stopping.min_support, max_thresholds=max_thresholds
    )
    root_view = table.full_view()
    root_value = evaluate(metric, root_view)
    if not root_value.defined:
        raise UndefinedMetricError(
            f"metric {metric.name} is undefined on the whole table"
        )

    ids = itertools.count()

    def grow(view, value: MetricValue, depth: int) -> Node:
        if depth < stopping.max_depth:
            found = best_split(view, metric, config, threads=threads)
            if found is not None and found.beta >= stopping.min_beta:
                left = grow(found.left, found.e_left, depth + 1)
                right = grow(found.right, found.e_right, depth + 1)
                return Internal(found.candidate, left, right)
        indices = view.indices if keep_leaf_indices else None
        return Leaf(next(ids), len(view), value, indices)

    root = grow(root_view, root_value, 0)
    return MetaTree(
        root=root,
        metric=metric,
        stopping=stopping,
        alpha=alpha,
        schema_fingerprint=schema_fingerprint(table.schema, table.classes),
        n_build=table.n,
    )


def assign(tree: MetaTree, table: PredictionTable) -> np.ndarray:
    """Route every row of ``table`` to a leaf; returns the leaf id per row.

    The table must carry the same schema and classes the tree was built on
    (checked via the stored fingerprint).  Rows exactly at a numeric
    threshold go left.
    """
    if schema_fingerprint(table.schema, table.classes) != tree.schema_fingerprint:
        raise SchemaMismatchError("table schema does not match the tree")
    out = np.empty(table.n, dtype=np.int64)
    stack: list[tuple[Node, np.ndarray]] = [
        (tree.root, np.arange(table.n, dtype=np.int64))
    ]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.leaf_id
            continue
        c = node.candidate
        col = table.column(c.feature)[idx]
        if c.kind == "eq":
            feat = table.schema.features[c.feature]
            mask = col == feat.categories.index(c.value)
        else:
            mask = col <= c.value
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


# -- serialization ----------------------------------------------------------


def _node_to_doc(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {
            "leaf": {
                "id": node.leaf_id,
                "size": node.size,
                "value": node.metric.value,
                "support": node.metric.support,
            }
        }
    return {
        "feature": node.candidate.feature,
        "kind": node.candidate.kind,
        "value": node.candidate.value,
        "left": _node_to_doc(node.left),
        "right": _node_to_doc(node.right),
    }


def serialize_tree(tree: MetaTree) -> str:
    """Canonical JSON for a tree: sorted keys, full float precision."""
    doc = {
        "format_version": FORMAT_VERSION,
        "metric": tree.metric.name,
        "alpha": tree.alpha,
        "stopping": {
            "max_depth": tree.stopping.max_depth,
            "min_beta": tree.stopping.min_beta,
            "confidence_z": tree.stopping.confidence_z,
            "max_interval_width": tree.stopping.max_interval_width,
        },
        "schema_fingerprint": tree.schema_fingerprint,
        "n_build": tree.n_build,
        "root": _node_to_doc(tree.root),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _need(doc: dict, key: str, types, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise TreeFormatError(f"missing {key!r} in {where}")
    v = doc[key]
    if not isinstance(v, types) or isinstance(v, bool):
        raise TreeFormatError(f"bad type for {key!r} in {where}")
    return v


def _node_from_doc(doc, ids, where: str) -> Node:
    if not isinstance(doc, dict):
        raise TreeFormatError(f"node at {where} is not an object")
    if "leaf" in doc:
        leaf = doc["leaf"]
        size = _need(leaf, "size", int, where)
        value = _need(leaf, "value", (int, float), where)
        support = _need(leaf, "support", int, where)
        if size < 0 or support < 0:
            raise TreeFormatError(f"negative count in {where}")
        return Leaf(next(ids), size, MetricValue(float(value), support), None)
    feature = _need(doc, "feature", int, where)
    kind = _need(doc, "kind", str, where)
    if kind not in ("le", "eq"):
        raise TreeFormatError(f"unknown split kind {kind!r} in {where}")
    value = _need(doc, "value", (int, float) if kind == "le" else str, where)
    if feature < 0:
        raise TreeFormatError(f"negative feature index in {where}")
    left = _node_from_doc(_need(doc, "left", dict, where), ids, where + ".left")
    right = _node_from_doc(_need(doc, "right", dict, where), ids, where + ".right")
    cand = SplitCandidate(feature, kind, float(value) if kind == "le" else value)
    return Internal(cand, left, right)


def deserialize_tree(text: str) -> MetaTree:
    """Parse tree JSON back into a :class:`MetaTree`.

    Leaf ids are reassigned in depth-first pre-order, which reproduces the
    ids the builder gave.  Any structural or type problem raises
    :class:`TreeFormatError`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise TreeFormatError("top level is not an object")
    version = _need(doc, "format_version", int, "document")
    if version != FORMAT_VERSION:
        raise TreeFormatError(f"unsupported format version {version}")
    metric_name = _need(doc, "metric", str, "document")
    try:
        metric = parse_metric(metric_name)
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None
    alpha = _need(doc, "alpha", int, "document")
    stop_doc = _need(doc, "stopping", dict, "document")
    try:
        stopping = StoppingRule(
            max_depth=_need(stop_doc, "max_depth", int, "stopping"),
            min_beta=float(_need(stop_doc, "min_beta", (int, float), "stopping")),
            confidence_z=float(_need(stop_doc, "confidence_z", (int, float), "stopping")),
            max_interval_width=float(
                _need(stop_doc, "max_interval_width", (int, float), "stopping")
            ),
        )
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None
    fingerprint = _need(doc, "schema_fingerprint", str, "document")
    n_build = _need(doc, "n_build", int, "document")
    ids = itertools.count()
    root = _node_from_doc(_need(doc, "root", dict, "document"), ids, "root")
    return MetaTree(
        root=root,
        metric=metric,
        stopping=stopping,
        alpha=alpha,
        schema_fingerprint=fingerprint,
        n_build=n_build,
    )
