import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXED_CREATED_AT
from mlfix.checks import auc_roc, cramers_v, ks_statistic, pearson
from mlfix.checks.stats import InsufficientData
from mlfix.model import (
    ArtifactBundle,
    CheckCategory,
    CheckResult,
    CheckStatus,
    ColumnKind,
    ColumnStatistics,
    DATA_INTEGRITY_CHECK_IDS,
    DatasetStatistics,
    MODEL_EVALUATION_CHECK_IDS,
    NumericSummary,
    TRAIN_TEST_VALIDATION_CHECK_IDS,
    decode_bundle,
    encode_bundle,
)

finite_floats = st.floats(allow_nan=False, allow_infinity=False, width=32)
metric_names = st.text(alphabet="abcdefghij_", min_size=1, max_size=8)


@st.composite
def check_results(draw, category: CheckCategory, ids):
    check_id = draw(st.sampled_from(ids))
    status = draw(st.sampled_from(list(CheckStatus)))
    metrics = draw(st.dictionaries(metric_names, finite_floats, max_size=4))
    details = draw(st.dictionaries(metric_names, finite_floats, max_size=4))
    return CheckResult(
        check_id=check_id,
        category=category,
        status=status,
        metrics=metrics,
        condition=draw(st.text(max_size=30)),
        summary=draw(st.text(max_size=40)),
        details=details,
    )


@st.composite
def column_stats(draw, index: int):
    kind = draw(st.sampled_from(list(ColumnKind)))
    summary = None
    if kind is ColumnKind.NUMERIC and draw(st.booleans()):
        qs = sorted(draw(st.lists(finite_floats, min_size=5, max_size=5)))
        summary = NumericSummary(
            min=qs[0], max=qs[4], mean=draw(finite_floats), std=abs(draw(finite_floats)),
            q1=qs[1], q2=qs[2], q3=qs[3],
        )
    return ColumnStatistics(
        name=f"col{index}",
        kind=kind,
        null_fraction=draw(st.floats(0, 1)),
        distinct_count=draw(st.integers(0, 50)),
        numeric_summary=summary,
    )


@st.composite
def dataset_stats(draw):
    n_cols = draw(st.integers(0, 4))
    columns = tuple(draw(column_stats(i)) for i in range(n_cols))
    sample_count = draw(st.integers(0, 10_000))
    distribution = None
    if draw(st.booleans()) and sample_count > 0:
        n_classes = draw(st.integers(1, 4))
        counts = draw(
            st.lists(st.integers(0, sample_count // n_classes), min_size=n_classes, max_size=n_classes)
        )
        distribution = {f"class_{i}": c for i, c in enumerate(counts)}
    return DatasetStatistics(sample_count=sample_count, per_column=columns, class_distribution=distribution)


def unique_by_id(results):
    seen = {}
    for r in results:
        seen.setdefault(r.check_id, r)
    return tuple(seen.values())


@st.composite
def bundles(draw):
    return ArtifactBundle(
        created_at=FIXED_CREATED_AT,
        train_stats=draw(dataset_stats()),
        test_stats=draw(dataset_stats()),
        integrity_results=unique_by_id(
            draw(st.lists(check_results(CheckCategory.DATA_INTEGRITY, DATA_INTEGRITY_CHECK_IDS), max_size=4))
        ),
        validation_results=unique_by_id(
            draw(st.lists(check_results(CheckCategory.TRAIN_TEST_VALIDATION, TRAIN_TEST_VALIDATION_CHECK_IDS), max_size=4))
        ),
        evaluation_results=unique_by_id(
            draw(st.lists(check_results(CheckCategory.MODEL_EVALUATION, MODEL_EVALUATION_CHECK_IDS), max_size=4))
        ),
        client_info=draw(st.dictionaries(st.text(max_size=8), st.text(max_size=8), max_size=3)),
    )


@settings(max_examples=60, deadline=None)
@given(bundles())
def test_bundle_round_trip_property(bundle):
    assert decode_bundle(encode_bundle(bundle)) == bundle


@settings(max_examples=60, deadline=None)
@given(bundles())
def test_encoding_injective_on_reencode(bundle):
    payload = encode_bundle(bundle)
    assert encode_bundle(decode_bundle(payload)) == payload


category_vectors = st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=2, max_size=60)


@settings(max_examples=120, deadline=None)
@given(category_vectors, st.randoms())
def test_cramers_v_range_and_symmetry(values, rnd):
    other = list(values)
    rnd.shuffle(other)
    try:
        forward = cramers_v(values, other)
        backward = cramers_v(other, values)
    except InsufficientData:
        return
    assert 0.0 <= forward <= 1.0
    assert forward == pytest.approx(backward, abs=1e-12)


@settings(max_examples=120, deadline=None)
@given(category_vectors)
def test_cramers_v_relabeling_invariance(values):
    pairs = list(zip(values, reversed(values)))
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    relabel = {"a": "zebra", "b": "yak", "c": "xerus", "d": "wolf"}
    try:
        original = cramers_v(a, b)
    except InsufficientData:
        return
    assert cramers_v([relabel[x] for x in a], b) == pytest.approx(original, abs=1e-12)


numeric_samples = st.lists(st.floats(-50, 50), min_size=1, max_size=50)


@settings(max_examples=120, deadline=None)
@given(numeric_samples, numeric_samples)
def test_ks_range_symmetry_and_monotone_invariance(a, b):
    d = ks_statistic(a, b)
    assert 0.0 <= d <= 1.0
    assert ks_statistic(b, a) == d
    transform = lambda x: math.atan(x) * 3 + x  # strictly increasing
    assert ks_statistic([transform(x) for x in a], [transform(x) for x in b]) == pytest.approx(d, abs=1e-12)


@settings(max_examples=120, deadline=None)
@given(numeric_samples, numeric_samples)
def test_ks_matches_brute_force(a, b):
    d = ks_statistic(a, b)
    points = sorted(a + b)
    na, nb = len(a), len(b)
    brute = max(abs(sum(x <= p for x in a) / na - sum(y <= p for y in b) / nb) for p in points)
    assert d == brute  # exact, no tolerance


@settings(max_examples=120, deadline=None)
@given(
    st.lists(st.floats(0, 1).map(lambda v: round(v, 1)), min_size=2, max_size=30),
    st.randoms(),
)
def test_auc_matches_concordance_counting(scores, rnd):
    labels = [rnd.randint(0, 1) for _ in scores]
    if len(set(labels)) < 2:
        labels[0], labels[1] = 0, 1
    value = auc_roc(scores, labels)
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    concordant = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    assert value == pytest.approx(concordant / (len(pos) * len(neg)), abs=1e-12)
    assert 0.0 <= value <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=40))
def test_pearson_range(pairs):
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    try:
        r = pearson(a, b)
    except InsufficientData:
        return
    assert -1.0 <= r <= 1.0
