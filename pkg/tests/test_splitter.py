"""Split search against hand cases and an independent exhaustive oracle."""

import numpy as np
import pytest

from perfex import (
    MetricSpec,
    SearchConfig,
    best_split,
    candidate_thresholds,
    enumerate_candidates,
)
from perfex.metrics import evaluate_indices

from tests._naive import naive_best_split, naive_thresholds, random_plain_table
from tests._tables import WORKED_CORRECT, WORKED_Z, worked_example_table, make_table, plain_to_table

ACC = MetricSpec.accuracy()


def value_fn(spec, table):
    """Adapter handing the package's metric values to the naive search."""

    def fn(idx_list):
        v = evaluate_indices(spec, table, np.asarray(idx_list, dtype=np.int64))
        return (v.value, v.support)

    return fn


def test_candidate_thresholds_distinct_values():
    got = candidate_thresholds(np.array([1.0, 1.0, 2.0, 3.0]))
    assert list(got) == [1.0, 2.0, 3.0]


def test_candidate_thresholds_capped_to_quantiles():
    values = np.arange(1000, dtype=np.float64)
    got = candidate_thresholds(values, max_thresholds=9)
    # Nearest-rank deciles: index ceil(q/10 * 1000) - 1 of the sorted values.
    assert list(got) == [99.0, 199.0, 299.0, 399.0, 499.0, 599.0, 699.0, 799.0, 899.0]
    assert list(got) == naive_thresholds(list(values), cap=9)


def test_candidate_thresholds_cap_dedups():
    values = np.array([1.0] * 90 + [2.0] * 10)
    got = candidate_thresholds(values, max_thresholds=4)
    assert list(got) == [1.0, 2.0]


def test_candidate_thresholds_automatic_rule():
    uniq256 = np.arange(256, dtype=np.float64)
    assert candidate_thresholds(uniq256).size == 256
    uniq300 = np.arange(300, dtype=np.float64)
    capped = candidate_thresholds(uniq300)
    assert capped.size <= 255
    assert list(capped) == naive_thresholds(list(uniq300))


def test_enumeration_order_is_fixed():
    t = make_table(
        "nc",
        [[2.0, 1.0, 2.0], ["v", "u", "u"]],
        ["a", "a", "b"],
        ["a", "b", "b"],
    )
    cands = enumerate_candidates(t.full_view())
    assert [(c.feature, c.kind, c.value) for c in cands] == [
        (0, "le", 1.0),
        (0, "le", 2.0),
        (1, "eq", "u"),
        (1, "eq", "v"),
    ]
    # Only categories present in the view are enumerated.
    sub = t.subset(np.array([0]))
    cands = enumerate_candidates(sub.full_view())
    assert [(c.feature, c.value) for c in cands] == [(0, 2.0), (1, "v")]


def test_worked_example_best_split_is_exact():
    t = worked_example_table()
    got = best_split(t.full_view(), ACC, SearchConfig(alpha=1, min_support=4))
    assert got is not None
    assert (got.candidate.feature, got.candidate.kind, got.candidate.value) == (0, "le", -1.0)
    assert got.e_left.value == 0.4
    assert got.e_right.value == 0.8
    assert got.beta == 0.4
    assert len(got.left) == 5 and len(got.right) == 5


def test_no_gap_means_no_split():
    t = make_table("n", [[1.0, 2.0, 3.0, 4.0]], ["a"] * 4, ["a"] * 4, classes=("a", "b"))
    assert best_split(t.full_view(), ACC, SearchConfig(alpha=1, min_support=1)) is None


def test_infeasible_everywhere_means_no_split():
    t = worked_example_table()
    # alpha larger than half the rows: no candidate has two big-enough sides.
    assert best_split(t.full_view(), ACC, SearchConfig(alpha=6, min_support=1)) is None
    with pytest.raises(ValueError):
        best_split(t.subset(np.array([], dtype=np.int64)).full_view(), ACC)


def test_tie_breaks_to_first_candidate_in_order():
    # Two identical features: the tie must go to the lower feature index.
    preds = [("a" if ok else "b") for ok in WORKED_CORRECT]
    t = make_table("nn", [list(WORKED_Z), list(WORKED_Z)], ["a"] * 10, preds)
    got = best_split(t.full_view(), ACC, SearchConfig(alpha=1, min_support=4))
    assert got.candidate.feature == 0 and got.candidate.value == -1.0


def test_tie_breaks_to_first_threshold():
    # Mirror-symmetric pattern: thresholds 1 and 3 both reach beta 2/3
    # (up to fp rounding, inside the tie tolerance); the first must win.
    t = make_table("n", [[1.0, 2.0, 3.0, 4.0]], ["a"] * 4, ["a", "b", "a", "b"])
    got = best_split(t.full_view(), ACC, SearchConfig(alpha=1, min_support=1))
    assert got.candidate.value == 1.0
    assert got.beta == pytest.approx(2 / 3, abs=1e-12)


def test_min_support_uses_metric_support_not_size():
    # Class b is predicted on just four of twelve rows, so no split can give
    # precision:b a support of 3 on both sides, however many rows there are.
    y = ["a", "b", "b", "a", "a", "a"] * 2
    p = ["a", "b", "a", "a", "b", "a"] * 2
    x = [float(i) for i in range(12)]
    t = make_table("n", [x], y, p)
    spec = MetricSpec.precision("b")
    assert best_split(t.full_view(), spec, SearchConfig(alpha=2, min_support=3)) is None
    got = best_split(t.full_view(), spec, SearchConfig(alpha=2, min_support=1))
    assert got is not None
    assert min(got.e_left.support, got.e_right.support) < 3  # size alone was never the blocker


def test_undefined_sides_are_infeasible():
    # Class b only ever predicted on low x: any split isolating it leaves the
    # other side undefined for precision:b, so the search must return None.
    t = make_table(
        "n",
        [[1.0, 2.0, 3.0, 4.0]],
        ["b", "b", "a", "a"],
        ["b", "b", "a", "a"],
    )
    assert best_split(t.full_view(), MetricSpec.precision("b"), SearchConfig(1, 1)) is None


def test_alpha_monotonicity():
    rng = np.random.default_rng(31)
    for _ in range(25):
        plain = random_plain_table(rng, max_rows=80, with_scores=False)
        t = plain_to_table(plain)
        betas = []
        for alpha in (1, 5, 15):
            got = best_split(t.full_view(), ACC, SearchConfig(alpha, 1))
            betas.append(-1.0 if got is None else got.beta)
        # Raising alpha only shrinks the feasible set.
        assert betas[0] >= betas[1] >= betas[2]


def test_result_sides_partition_the_view():
    t = worked_example_table()
    got = best_split(t.full_view(), ACC, SearchConfig(alpha=1, min_support=1))
    merged = np.sort(np.concatenate([got.left.indices, got.right.indices]))
    assert np.array_equal(merged, np.arange(10))
    assert (np.diff(got.left.indices) > 0).all()


def test_threads_do_not_change_the_result():
    rng = np.random.default_rng(47)
    for _ in range(10):
        plain = random_plain_table(rng, max_rows=120, with_scores=False)
        t = plain_to_table(plain)
        serial = best_split(t.full_view(), ACC, SearchConfig(2, 1), threads=1)
        pooled = best_split(t.full_view(), ACC, SearchConfig(2, 1), threads=4)
        if serial is None:
            assert pooled is None
            continue
        assert serial.candidate == pooled.candidate
        assert serial.beta == pooled.beta
        assert np.array_equal(serial.left.indices, pooled.left.indices)


def test_matches_naive_exhaustive_search():
    rng = np.random.default_rng(53)
    for _ in range(40):
        plain = random_plain_table(rng, max_rows=60)
        t = plain_to_table(plain)
        specs = [ACC, MetricSpec.precision(plain["classes"][0]), MetricSpec.weighted("f1")]
        if plain["scores"] is not None:
            specs.append(MetricSpec.mean_min_score(tuple(plain["classes"][:2])))
        alpha = int(rng.choice([1, 3, 10]))
        min_support = int(rng.choice([1, 5]))
        for spec in specs:
            got = best_split(t.full_view(), spec, SearchConfig(alpha, min_support))
            want = naive_best_split(plain, alpha, min_support, value_fn(spec, t))
            if want is None:
                assert got is None, (spec.name, got and got.candidate)
                continue
            assert got is not None, (spec.name, want)
            assert (got.candidate.feature, got.candidate.kind, got.candidate.value) == want[:3]
            assert got.beta == want[3]  # same doubles, same order: bit-exact


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(alpha=0)
    with pytest.raises(ValueError):
        SearchConfig(min_support=-1)
    with pytest.raises(ValueError):
        SearchConfig(max_thresholds=0)
