"""Synthetic datasets and small built-in classifiers for end-to-end runs.

Generation is reproducible byte-for-byte: every generator uses PCG64 streams
spawned from the caller's seed, one stream per class, so adding a class or
changing its count never perturbs the draws of another class.

The built-in classifiers are deliberately simple (an analytic density rule,
nearest centroid, a single axis threshold, a small Gini-grown decision
tree).  They exist so a full table with predictions and scores can be
produced from nothing; any real model's predictions enter through the same
CSV contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import (
    ClassSet,
    Feature,
    FeatureSchema,
    NUMERIC,
    PredictionTable,
    stratified_split_indices,
)
from .splitter import candidate_thresholds


@dataclass(frozen=True)
class GaussianSpec:
    """One class blob: label, mean vector, isotropic sigma, sample count."""

    label: str
    mean: tuple[float, ...]
    sigma: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "mean", tuple(float(v) for v in self.mean))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.count < 1:
            raise ValueError("count must be at least 1")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Plain features-plus-labels data, before any classifier has run."""

    features: np.ndarray  # (n, m) float64
    labels: tuple[str, ...]
    feature_names: tuple[str, ...]
    classes: ClassSet

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if x.shape[0] != len(self.labels):
            raise ValueError("features and labels lengths differ")
        if x.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length does not match columns")
        if x.flags.writeable:
            x = x.copy()
            x.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def label_codes(self) -> np.ndarray:
        lookup = {lbl: i for i, lbl in enumerate(self.classes.labels)}
        return np.array([lookup[v] for v in self.labels], dtype=np.int32)

    def schema(self) -> FeatureSchema:
        return FeatureSchema(tuple(Feature(name, NUMERIC) for name in self.feature_names))

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            self.features[idx],
            tuple(self.labels[i] for i in idx),
            self.feature_names,
            self.classes,
        )


def generate_blobs(specs, seed, feature_names=None) -> LabeledDataset:
    """Sample isotropic Gaussian blobs, one per spec, in spec order.

    Rows come out grouped by class; each class draws from its own spawned
    stream, so the same seed always reproduces the same dataset.
    """
    specs = tuple(specs)
    if not specs:
        raise ValueError("need at least one blob spec")
    dim = len(specs[0].mean)
    if any(len(s.mean) != dim for s in specs):
        raise ValueError("all blob means must have the same dimension")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate blob labels")
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(dim)) if dim != 2 else ("x", "y")
    streams = np.random.SeedSequence(seed).spawn(len(specs))
    blocks = []
    row_labels: list[str] = []
    for spec, stream in zip(specs, streams):
        rng = np.random.Generator(np.random.PCG64(stream))
        blocks.append(rng.normal(loc=spec.mean, scale=spec.sigma, size=(spec.count, dim)))
        row_labels.extend([spec.label] * spec.count)
    return LabeledDataset(
        np.vstack(blocks), tuple(row_labels), tuple(feature_names), ClassSet(tuple(labels))
    )


def generate_two_gaussian(
    delta: float, n_per_class: int, seed, *, mu0: float = 10.0, sigma: float = 2.0
) -> LabeledDataset:
    """The bundled 1-D task: class 0 at ``mu0``, class 1 shifted by ``delta``."""
    specs = (
        GaussianSpec("0", (mu0,), sigma, n_per_class),
        GaussianSpec("1", (mu0 + delta,), sigma, n_per_class),
    )
    return generate_blobs(specs, seed, feature_names=("z",))


def flip_labels(
    dataset: LabeledDataset, feature: int, threshold: float, prob: float, seed
) -> LabeledDataset:
    """Swap the true label (two-class data) with probability ``prob`` on rows
    where ``feature > threshold``.  Uses its own stream from ``seed``."""
    if dataset.classes.k != 2:
        raise ValueError("label flipping is defined for two-class data")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    eligible = dataset.features[:, feature] > threshold
    flip = eligible & (rng.random(dataset.n) < prob)
    a, b = dataset.classes.labels
    swapped = {a: b, b: a}
    labels = tuple(
        swapped[lbl] if flip[i] else lbl for i, lbl in enumerate(dataset.labels)
    )
    return LabeledDataset(dataset.features, labels, dataset.feature_names, dataset.classes)


def split_dataset(dataset: LabeledDataset, fractions, seed) -> list[LabeledDataset]:
    """Stratified partition of a labeled dataset (for example 0.5/0.25/0.25)."""
    parts = stratified_split_indices(
        dataset.label_codes(), dataset.classes.k, fractions, seed
    )
    return [dataset.subset(idx) for idx in parts]


# -- built-in classifiers ---------------------------------------------------


class GaussianDensityClassifier:
    """Predicts the class whose isotropic Gaussian density is highest.

    Scores are the densities normalized to sum to 1 (computed from
    log-densities for stability).  Ties go to the first class.
    """

    def __init__(self, components):
        comps = tuple(components)
        if len(comps) < 2:
            raise ValueError("need at least two components")
        self.class_labels = tuple(label for label, _, _ in comps)
        self._means = np.array([mean for _, mean, _ in comps], dtype=np.float64)
        if self._means.ndim == 1:
            self._means = self._means[:, None]
        self._sigmas = np.array([sigma for _, _, sigma in comps], dtype=np.float64)
        if (self._sigmas <= 0).any():
            raise ValueError("sigma must be positive")

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        dim = X.shape[1]
        d2 = ((X[:, None, :] - self._means[None, :, :]) ** 2).sum(axis=2)
        log_dens = -d2 / (2.0 * self._sigmas**2) - dim * np.log(
            self._sigmas * math.sqrt(2.0 * math.pi)
        )
        log_dens -= log_dens.max(axis=1, keepdims=True)
        dens = np.exp(log_dens)
        return dens / dens.sum(axis=1, keepdims=True)


class NearestCentroidClassifier:
    """Predicts the nearest centroid; scores are a softmax of negative
    Euclidean distances."""

    def __init__(self, centroids):
        cents = tuple(centroids)
        if len(cents) < 2:
            raise ValueError("need at least two centroids")
        self.class_labels = tuple(label for label, _ in cents)
        self._centers = np.array([c for _, c in cents], dtype=np.float64)
        if self._centers.ndim == 1:
            self._centers = self._centers[:, None]

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        d = np.sqrt(((X[:, None, :] - self._centers[None, :, :]) ** 2).sum(axis=2))
        z = -d
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)


class AxisThresholdClassifier:
    """Hard rule on one feature: ``below`` when x < threshold, else ``above``.
    Scores are one-hot."""

    def __init__(self, feature: int, threshold: float, below: str, above: str):
        self.feature = feature
        self.threshold = float(threshold)
        self.class_labels = (below, above)

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        is_below = X[:, self.feature] < self.threshold
        scores = np.zeros((X.shape[0], 2), dtype=np.float64)
        scores[is_below, 0] = 1.0
        scores[~is_below, 1] = 1.0
        return scores


class CartClassifier:
    """A small depth-limited decision tree grown on Gini impurity.

    Splits use the same "x <= threshold goes left" convention as the meta
    tree, with thresholds enumerated by :func:`candidate_thresholds`.  Leaf
    scores are the training class frequencies in that leaf.
    """

    def __init__(self, max_depth: int = 3, max_thresholds: int | None = None):
        if max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        self.max_depth = max_depth
        self.max_thresholds = max_thresholds
        self.class_labels: tuple[str, ...] = ()
        self._root = None

    def fit(self, dataset: LabeledDataset) -> "CartClassifier":
        self.class_labels = dataset.classes.labels
        k = dataset.classes.k
        X = dataset.features
        y = dataset.label_codes()

        def gini(counts: np.ndarray) -> float:
            n = counts.sum()
            if n == 0:
                return 0.0
            p = counts / n
            return 1.0 - float((p * p).sum())

        def grow(idx: np.ndarray, depth: int):
            counts = np.bincount(y[idx], minlength=k).astype(np.float64)
            node_n = idx.size
            if depth >= self.max_depth or node_n < 2 or gini(counts) == 0.0:
                return ("leaf", counts / node_n)
            best = None  # (impurity, feature, threshold, mask)
            for j in range(X.shape[1]):
                col = X[idx, j]
                order = np.argsort(col, kind="stable")
                col_sorted = col[order]
                labels_sorted = y[idx][order]
                onehot = np.zeros((node_n, k), dtype=np.int64)
                onehot[np.arange(node_n), labels_sorted] = 1
                cum = np.cumsum(onehot, axis=0)
                for v in candidate_thresholds(col, self.max_thresholds):
                    n_left = int(np.searchsorted(col_sorted, v, side="right"))
                    if n_left == 0 or n_left == node_n:
                        continue
                    left_counts = cum[n_left - 1].astype(np.float64)
                    right_counts = counts - left_counts
                    impurity = (
                        n_left * gini(left_counts)
                        + (node_n - n_left) * gini(right_counts)
                    ) / node_n
                    if best is None or impurity < best[0]:
                        best = (impurity, j, float(v))
            if best is None or best[0] >= gini(counts):
                return ("leaf", counts / node_n)
            _, j, v = best
            mask = X[idx, j] <= v
            left = grow(idx[mask], depth + 1)
            right = grow(idx[~mask], depth + 1)
            return ("split", j, v, left, right)

        self._root = grow(np.arange(dataset.n, dtype=np.int64), 0)
        return self

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        if self._root is None:
            raise ValueError("classifier is not fitted")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty((X.shape[0], len(self.class_labels)), dtype=np.float64)
        stack = [(self._root, np.arange(X.shape[0], dtype=np.int64))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node[0] == "leaf":
                out[idx] = node[1]
                continue
            _, j, v, left, right = node
            mask = X[idx, j] <= v
            stack.append((left, idx[mask]))
            stack.append((right, idx[~mask]))
        return out


def predict_table(classifier, dataset: LabeledDataset) -> PredictionTable:
    """Run a built-in classifier over a dataset and assemble the full table.

    The classifier's classes must be exactly the dataset's (any order); score
    columns come out in the dataset's class order and the predicted label is
    the argmax score, first class winning ties.
    """
    if set(classifier.class_labels) != set(dataset.classes.labels):
        raise ValueError("classifier and dataset disagree on the class set")
    raw = classifier.score_matrix(dataset.features)
    order = [classifier.class_labels.index(lbl) for lbl in dataset.classes.labels]
    scores = raw[:, order]
    pred_codes = scores.argmax(axis=1)
    pred = [dataset.classes.labels[c] for c in pred_codes]
    columns = [dataset.features[:, j] for j in range(dataset.m)]
    return PredictionTable(
        dataset.schema(),
        dataset.classes,
        columns,
        list(dataset.labels),
        pred,
        scores,
    )


# -- bundled presets ---------------------------------------------------------

DEMO_BLOB_CENTERS = ((10.0, 10.0), (20.0, 12.0), (15.0, 15.0))
DEMO_BLOB_SIGMA = 3.0
DEMO_BLOB_TOTAL = 10000


def blob_specs(n_total: int = DEMO_BLOB_TOTAL) -> tuple[GaussianSpec, ...]:
    """Three overlapping 2-D blobs; rows are divided as evenly as possible."""
    k = len(DEMO_BLOB_CENTERS)
    base, extra = divmod(n_total, k)
    return tuple(
        GaussianSpec(str(i), center, DEMO_BLOB_SIGMA, base + (1 if i < extra else 0))
        for i, center in enumerate(DEMO_BLOB_CENTERS)
    )


def two_gaussian_classifier(
    delta: float, *, mu0: float = 10.0, sigma: float = 2.0
) -> GaussianDensityClassifier:
    """The matched analytic classifier for :func:`generate_two_gaussian`."""
    return GaussianDensityClassifier(
        (("0", (mu0,), sigma), ("1", (mu0 + delta,), sigma))
    )


def preset_two_gaussian(delta: float, n_per_class: int, seed) -> PredictionTable:
    """Two-Gaussian data scored by its own matched density classifier."""
    data = generate_two_gaussian(delta, n_per_class, seed)
    return predict_table(two_gaussian_classifier(delta), data)


EXAMPLE2D_FLIP_THRESHOLD = 12.0
EXAMPLE2D_FLIP_PROB = 0.5


def preset_example2d(seed, n_per_class: int = 150):
    """Two well-separated 2-D blobs with noisy labels in the upper band.

    Red sits at (10, 10), blue at (30, 10), both sigma 2.  Labels above
    y = 12 are swapped with probability 0.5, so a rule that only looks at x
    stays perfect below the band and degrades inside it.  Returns the
    dataset and that x-threshold rule classifier.
    """
    specs = (
        GaussianSpec("red", (10.0, 10.0), 2.0, n_per_class),
        GaussianSpec("blue", (30.0, 10.0), 2.0, n_per_class),
    )
    data = generate_blobs(specs, seed, feature_names=("x", "y"))
    data = flip_labels(
        data,
        feature=1,
        threshold=EXAMPLE2D_FLIP_THRESHOLD,
        prob=EXAMPLE2D_FLIP_PROB,
        seed=np.random.SeedSequence([int(seed), 1]),
    )
    classifier = AxisThresholdClassifier(0, 20.0, "red", "blue")
    return data, classifier
