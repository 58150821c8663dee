"""Exhaustive single-feature split search maximizing the metric gap.

The search enumerates every admissible condition over every feature, splits
the rows on each, and keeps the condition with the largest absolute metric
difference (*beta*) between the two sides.  A candidate is feasible only if
both sides have at least ``alpha`` rows, both metric values are defined, and
both supports reach ``min_support``.

Determinism contract: candidates are enumerated in a fixed order (ascending
feature index, then ascending threshold or category order) and a candidate
replaces the incumbent only on a strict beta improvement, so the first
maximal candidate in enumeration order always wins.  Beta improvements
smaller than ``BETA_TIE_TOLERANCE`` count as ties.  Candidate evaluation may
be spread over worker threads; the reduction happens in enumeration order,
so results are independent of thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import CATEGORICAL, PredictionTable, SubsetView
from .metrics import MetricSpec, MetricValue, evaluate_indices

BETA_TIE_TOLERANCE = 1e-12

# With no explicit cap, features with more distinct values than this are
# reduced to AUTO_CAP quantile thresholds.
AUTO_UNIQUE_LIMIT = 256
AUTO_CAP = 255


@dataclass(frozen=True)
class SplitCandidate:
    """One admissible condition: ``kind`` is ``"le"`` (x <= value) for
    numeric and binary features or ``"eq"`` (x == value) for categorical."""

    feature: int
    kind: str
    value: float | str


@dataclass(frozen=True, eq=False)
class SplitResult:
    candidate: SplitCandidate
    left: SubsetView
    right: SubsetView
    e_left: MetricValue
    e_right: MetricValue
    beta: float


@dataclass(frozen=True)
class SearchConfig:
    """Feasibility knobs for the split search.

    ``alpha`` is the minimum row count per side; ``min_support`` the minimum
    metric support per side; ``max_thresholds`` caps the number of numeric
    thresholds per feature (None applies the automatic rule: unlimited up to
    256 distinct values, 255 quantiles beyond).
    """

    alpha: int = 100
    min_support: int = 385
    max_thresholds: int | None = None

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")
        if self.min_support < 0:
            raise ValueError("min_support must be non-negative")
        if self.max_thresholds is not None and self.max_thresholds < 1:
            raise ValueError("max_thresholds must be at least 1 (or None)")


def candidate_thresholds(values: np.ndarray, max_thresholds: int | None = None) -> np.ndarray:
    """Thresholds to try for one numeric column: the distinct values, or a
    deduplicated set of nearest-rank quantiles when there are too many.

    With a cap of ``c`` the thresholds are the ``q/(c+1)`` quantiles of the
    column for ``q = 1..c``, where quantile ``p`` of ``n`` sorted values is
    the one at index ``ceil(p*n) - 1``.
    """
    values = np.asarray(values, dtype=np.float64)
    uniq = np.unique(values)
    cap = max_thresholds
    if cap is None:
        cap = None if uniq.size <= AUTO_UNIQUE_LIMIT else AUTO_CAP
    if cap is None or uniq.size <= cap:
        return uniq
    ordered = np.sort(values)
    n = ordered.size
    picks = []
    for q in range(1, cap + 1):
        p = q / (cap + 1)
        i = int(np.ceil(p * n)) - 1
        picks.append(ordered[min(max(i, 0), n - 1)])
    return np.unique(np.array(picks))


def enumerate_candidates(view: SubsetView, config: SearchConfig | None = None) -> list[SplitCandidate]:
    """All conditions the search would consider for ``view``, in search order."""
    config = config or SearchConfig()
    out = []
    schema = view.table.schema
    for j, feature in enumerate(schema.features):
        col = view.column(j)
        if feature.kind == CATEGORICAL:
            for code in np.unique(col):
                out.append(SplitCandidate(j, "eq", feature.categories[int(code)]))
        else:
            for v in candidate_thresholds(col, config.max_thresholds):
                out.append(SplitCandidate(j, "le", float(v)))
    return out


def _feature_blocks(view: SubsetView, config: SearchConfig):
    """Per-feature candidate blocks with the column slice prepared once.

    Yields ``(feature, kind, column, pairs)`` where each pair is
    ``(public_value, comparison_value, left_count)``; ``left_count`` lets the
    alpha check run before any mask is built.
    """
    schema = view.table.schema
    for j, feature in enumerate(schema.features):
        col = view.column(j)
        if feature.kind == CATEGORICAL:
            codes, counts = np.unique(col, return_counts=True)
            pairs = [
                (feature.categories[int(c)], int(c), int(cnt))
                for c, cnt in zip(codes, counts)
            ]
            yield j, "eq", col, pairs
        else:
            uniq, counts = np.unique(col, return_counts=True)
            cum = np.cumsum(counts)
            thresholds = candidate_thresholds(col, config.max_thresholds)
            # Thresholds are values present in the column, so the row count
            # of the left side is the cumulative count at that value.
            at = np.searchsorted(uniq, thresholds, side="right") - 1
            pairs = [
                (float(v), float(v), int(cum[a])) for v, a in zip(thresholds, at)
            ]
            yield j, "le", col, pairs


def best_split(
    view: SubsetView,
    metric: MetricSpec,
    config: SearchConfig | None = None,
    threads: int = 1,
) -> SplitResult | None:
    """Find the feasible condition with the largest metric gap.

    Returns None when no candidate is feasible or every feasible candidate
    has a zero gap.
    """
    config = config or SearchConfig()
    table = view.table
    vidx = view.indices
    n = vidx.size
    if n == 0:
        raise ValueError("cannot split an empty view")

    jobs = []
    for j, kind, col, pairs in _feature_blocks(view, config):
        for public, cmp_value, n_left in pairs:
            n_right = n - n_left
            if n_left < config.alpha or n_right < config.alpha:
                continue
            jobs.append((j, kind, col, public, cmp_value))

    def score(job):
        j, kind, col, public, cmp_value = job
        if kind == "eq":
            mask = col == cmp_value
        else:
            mask = col <= cmp_value
        e_left = evaluate_indices(metric, table, vidx[mask])
        e_right = evaluate_indices(metric, table, vidx[~mask])
        if not (e_left.defined and e_right.defined):
            return None
        if e_left.support < config.min_support or e_right.support < config.min_support:
            return None
        return abs(e_left.value - e_right.value), e_left, e_right

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(score, jobs, chunksize=max(1, len(jobs) // (threads * 4))))
    else:
        outcomes = [score(job) for job in jobs]

    best_beta = 0.0
    best = None
    for job, outcome in zip(jobs, outcomes):
        if outcome is None:
            continue
        beta, e_left, e_right = outcome
        if abs(beta - best_beta) < BETA_TIE_TOLERANCE:
            continue
        if beta > best_beta:
            best_beta = beta
            best = (job, e_left, e_right)

    if best is None:
        return None
    (j, kind, col, public, cmp_value), e_left, e_right = best
    if kind == "eq":
        mask = col == cmp_value
    else:
        mask = col <= cmp_value
    return SplitResult(
        SplitCandidate(j, kind, public),
        SubsetView(table, vidx[mask]),
        SubsetView(table, vidx[~mask]),
        e_left,
        e_right,
        best_beta,
    )
