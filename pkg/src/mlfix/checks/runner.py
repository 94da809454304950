"""Check registry and suite execution."""

from __future__ import annotations

import math

from ..model import (
    ALL_CHECK_IDS,
    DATA_INTEGRITY_CHECK_IDS,
    MODEL_EVALUATION_CHECK_IDS,
    TRAIN_TEST_VALIDATION_CHECK_IDS,
    CheckCategory,
    CheckResult,
    CheckStatus,
)
from . import evaluation, integrity, validation
from .core import CheckContext, CheckSpec
from .stats import InsufficientData


class UnknownCheckError(KeyError):
    pass


REGISTRY: dict[str, CheckSpec] = {
    spec.check_id: spec for spec in integrity.SPECS + validation.SPECS + evaluation.SPECS
}

# The wire model owns the canonical id lists; execution must match exactly.
assert tuple(s.check_id for s in integrity.SPECS) == DATA_INTEGRITY_CHECK_IDS
assert tuple(s.check_id for s in validation.SPECS) == TRAIN_TEST_VALIDATION_CHECK_IDS
assert tuple(s.check_id for s in evaluation.SPECS) == MODEL_EVALUATION_CHECK_IDS
assert set(REGISTRY) == set(ALL_CHECK_IDS)

_CATEGORY_IDS = {
    CheckCategory.DATA_INTEGRITY: DATA_INTEGRITY_CHECK_IDS,
    CheckCategory.TRAIN_TEST_VALIDATION: TRAIN_TEST_VALIDATION_CHECK_IDS,
    CheckCategory.MODEL_EVALUATION: MODEL_EVALUATION_CHECK_IDS,
}


def _condition_string(spec: CheckSpec, threshold: float, primary: str) -> str:
    if spec.comparator == "report":
        return "reported (no condition)"
    if spec.comparator == "not in (0, threshold)":
        return f"{primary} not in (0, {threshold:g})"
    return f"{primary} {spec.comparator} {threshold:g}"


def _satisfied(value: float, comparator: str, threshold: float) -> bool:
    if comparator == "<=":
        return value <= threshold
    if comparator == ">=":
        return value >= threshold
    if comparator == "==":
        return value == threshold
    raise ValueError(f"unsupported comparator {comparator!r}")


def run_check(check_id: str, ctx: CheckContext) -> CheckResult:
    """Execute one registered check; never raises for a valid context."""
    spec = REGISTRY.get(check_id)
    if spec is None:
        raise UnknownCheckError(f"unknown check id {check_id!r}")
    threshold = ctx.config.threshold(check_id)
    try:
        outcome = spec.fn(ctx, ctx.config, threshold)
    except InsufficientData as reason:
        return CheckResult(
            check_id=check_id,
            category=spec.category,
            status=CheckStatus.SKIPPED,
            metrics={},
            condition=_condition_string(spec, threshold, spec.metric),
            summary=f"skipped: {reason}",
        )
    except Exception as exc:  # internal failures become error results
        return CheckResult(
            check_id=check_id,
            category=spec.category,
            status=CheckStatus.ERROR,
            metrics={},
            condition=_condition_string(spec, threshold, spec.metric),
            summary=f"{type(exc).__name__}: {exc}",
        )

    bad = [k for k, v in {**outcome.metrics, **outcome.details}.items() if not math.isfinite(v)]
    if bad:
        return CheckResult(
            check_id=check_id,
            category=spec.category,
            status=CheckStatus.ERROR,
            metrics={},
            condition=_condition_string(spec, threshold, spec.metric),
            summary=f"non-finite metric value(s): {', '.join(bad)}",
        )

    primary = outcome.primary_metric or spec.metric
    condition = _condition_string(spec, threshold, primary)
    if spec.comparator == "report" or outcome.violated is False:
        status = CheckStatus.PASS
    else:
        violated = outcome.violated
        if violated is None:
            violated = not _satisfied(outcome.metrics[primary], spec.comparator, threshold)
        if not violated:
            status = CheckStatus.PASS
        else:
            status = CheckStatus.WARN if spec.warn_on_fail else CheckStatus.FAIL
    return CheckResult(
        check_id=check_id,
        category=spec.category,
        status=status,
        metrics=outcome.metrics,
        condition=condition,
        summary=outcome.summary,
        details=outcome.details,
    )


def run_suite(category: CheckCategory, ctx: CheckContext) -> list[CheckResult]:
    """Run every registered check of a category in registry order.

    Checks are independent and side-effect free, so execution could be
    parallelized; output order is always registry order regardless.
    """
    return [run_check(check_id, ctx) for check_id in _CATEGORY_IDS[category]]
