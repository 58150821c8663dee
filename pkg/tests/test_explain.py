"""Path summaries and rendered explanation blocks."""

import numpy as np
import pytest

from perfex import (
    Feature,
    FeatureSchema,
    MetricSpec,
    PerfexError,
    StoppingRule,
    build_tree,
    default_phrase,
    leaf_row_mask,
    render,
    summarize_path,
)
from perfex.explain import NO_CONDITIONS_TEMPLATE
from perfex.metrics import MetricValue
from perfex.tree import LeafStats, PathStep

from tests._naive import random_plain_table
from tests._tables import plain_to_table

NUM = FeatureSchema((Feature("length", "numeric"),))
MIXED = FeatureSchema(
    (
        Feature("length", "numeric"),
        Feature("flag", "binary"),
        Feature("color", "categorical", ("blue", "green", "red")),
    )
)


def stats(path, size=10, value=0.5):
    return LeafStats(0, size, MetricValue(value, size), tuple(path))


def test_repeated_left_branches_keep_the_tightest_upper_bound():
    s = stats([PathStep(0, "le", 12.0, True), PathStep(0, "le", 9.5, True)])
    out = summarize_path(s, NUM)
    assert len(out) == 1
    assert out[0].upper == 9.5 and out[0].lower is None
    assert out[0].describe() == "length <= 9.50"


def test_interval_renders_lower_bound_first():
    s = stats([PathStep(0, "le", 12.39, True), PathStep(0, "le", 10.77, False)])
    out = summarize_path(s, NUM)
    assert out[0].describe() == "length > 10.77, length <= 12.39"


def test_integer_thresholds_drop_decimals():
    s = stats([PathStep(0, "le", 5.0, True)])
    assert summarize_path(s, NUM)[0].describe() == "length <= 5"
    s = stats([PathStep(0, "le", -3.0, False)])
    assert summarize_path(s, NUM)[0].describe() == "length > -3"


def test_the_reference_block_renders_byte_identically():
    path = (
        PathStep(0, "le", 12.39, True),
        PathStep(0, "le", 10.77, False),
    )
    s = LeafStats(0, 134, MetricValue(0.6791044776119403, 134), path)
    summaries = summarize_path(s, NUM)
    got = render(s, summaries)
    want = (
        "There are 134 datapoints for which the\n"
        "following conditions hold:\n"
        "  length > 10.77, length <= 12.39\n"
        "and for these datapoints accuracy is 0.68"
    )
    assert got == want


def test_root_leaf_renders_placeholder_line():
    s = LeafStats(0, 20, MetricValue(0.75, 20), ())
    got = render(s, summarize_path(s, NUM))
    assert got.splitlines()[2] == "  (no conditions — all datapoints)"
    assert NO_CONDITIONS_TEMPLATE.format(unit_noun="rows") == "(no conditions — all rows)"


def test_custom_unit_noun_and_phrase():
    s = LeafStats(0, 7, MetricValue(0.07, 7), (PathStep(0, "le", 2.0, True),))
    got = render(s, summarize_path(s, NUM), unit_noun="trips", phrase="the recall of class b")
    assert got.startswith("There are 7 trips for which the")
    assert got.endswith("and for these trips the recall of class b is 0.07")


def test_binary_feature_resolves_to_0_or_1():
    s = stats([PathStep(1, "le", 0.0, True)])
    assert summarize_path(s, MIXED)[0].describe() == "flag = 0"
    s = stats([PathStep(1, "le", 0.0, False)])
    assert summarize_path(s, MIXED)[0].describe() == "flag = 1"
    # A vacuous bound (everything <= 1) says nothing and is dropped.
    s = stats([PathStep(1, "le", 1.0, True)])
    assert summarize_path(s, MIXED) == []


def test_binary_contradiction_raises():
    s = stats([PathStep(1, "le", 0.0, True), PathStep(1, "le", 0.0, False)])
    with pytest.raises(PerfexError):
        summarize_path(s, MIXED)


def test_categorical_pin_and_exclusions():
    s = stats([PathStep(2, "eq", "red", True)])
    assert summarize_path(s, MIXED)[0].describe() == "color = red"
    s = stats([PathStep(2, "eq", "red", False), PathStep(2, "eq", "blue", False)])
    assert summarize_path(s, MIXED)[0].describe() == "color != red, color != blue"
    # Pinned later: earlier exclusions of other categories become redundant.
    s = stats([PathStep(2, "eq", "red", False), PathStep(2, "eq", "blue", True)])
    out = summarize_path(s, MIXED)
    assert out[0].describe() == "color = blue"
    assert out[0].excluded == ()


def test_categorical_contradictions_raise():
    s = stats([PathStep(2, "eq", "red", True), PathStep(2, "eq", "red", False)])
    with pytest.raises(PerfexError):
        summarize_path(s, MIXED)
    s = stats([PathStep(2, "eq", "red", False), PathStep(2, "eq", "red", True)])
    with pytest.raises(PerfexError):
        summarize_path(s, MIXED)
    s = stats([PathStep(2, "eq", "red", True), PathStep(2, "eq", "blue", True)])
    with pytest.raises(PerfexError):
        summarize_path(s, MIXED)


def test_empty_numeric_interval_raises():
    s = stats([PathStep(0, "le", 5.0, True), PathStep(0, "le", 7.0, False)])
    with pytest.raises(PerfexError):
        summarize_path(s, NUM)
    # Equal bounds are empty too: > 5 and <= 5 has no rows.
    s = stats([PathStep(0, "le", 5.0, True), PathStep(0, "le", 5.0, False)])
    with pytest.raises(PerfexError):
        summarize_path(s, NUM)


def test_features_appear_in_first_use_order():
    s = stats(
        [
            PathStep(2, "eq", "red", True),
            PathStep(0, "le", 4.0, True),
            PathStep(2, "eq", "red", True),
        ]
    )
    out = summarize_path(s, MIXED)
    assert [c.name for c in out] == ["color", "length"]
    # One line per feature, at most.
    assert len(out) == len({c.feature for c in out})


def test_full_precision_masks_round_trip_the_leaf_rows():
    # The rendered text rounds to two decimals, but filtering uses the exact
    # thresholds, so every leaf's row set is reproduced exactly.
    rng = np.random.default_rng(71)
    for _ in range(8):
        plain = random_plain_table(rng, max_rows=250, with_scores=False)
        t = plain_to_table(plain)
        rule = StoppingRule(max_depth=4, min_beta=0.0, confidence_z=1.0, max_interval_width=1.0)
        tree = build_tree(t, MetricSpec.accuracy(), rule, alpha=5)
        for stats_, leaf in zip(tree.leaf_stats(), tree.leaves()):
            summaries = summarize_path(stats_, t.schema)
            mask = leaf_row_mask(summaries, t)
            assert np.array_equal(np.flatnonzero(mask), leaf.indices)


def test_two_decimal_rounding_in_text_only():
    s = stats([PathStep(0, "le", 12.3456789, True), PathStep(0, "le", 10.7654321, False)])
    out = summarize_path(s, NUM)
    assert out[0].describe() == "length > 10.77, length <= 12.35"
    assert out[0].upper == 12.3456789  # the stored bound keeps full precision


def test_default_phrase_per_metric():
    assert default_phrase(MetricSpec.accuracy()) == "accuracy"
    assert default_phrase(MetricSpec.recall("b")) == "recall for class b"
    assert default_phrase(MetricSpec.weighted("f1")) == "weighted f1"
    assert default_phrase(MetricSpec.ece(10)) == "the expected calibration error"
    assert "a, b" in default_phrase(MetricSpec.mean_min_score(("a", "b")))


def test_undefined_leaf_value_renders_na():
    s = LeafStats(0, 3, MetricValue(None, 0), ())
    got = render(s, [])
    assert got.endswith("is n/a")
