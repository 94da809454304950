"""Typed wire model shared by the ingest client and the analysis server.

Every document that crosses a process boundary (bundle.json, diagnosis.json,
schema.json, provider requests) is defined here as a frozen dataclass with a
canonical JSON form: UTF-8, sorted keys, compact separators, floats as their
shortest round-tripping decimal. NaN/Inf are invalid on the wire. Decoding
validates all invariants and reports violations with a field path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Mapping, NoReturn, Sequence

BUNDLE_VERSION = "1.0"
MODALITY = "tabular"

_TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%S.%fZ"


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    TEXT = "text"
    DATETIME = "datetime"
    IDENTIFIER = "identifier"


class TaskKind(str, Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class CheckCategory(str, Enum):
    DATA_INTEGRITY = "data_integrity"
    TRAIN_TEST_VALIDATION = "train_test_validation"
    MODEL_EVALUATION = "model_evaluation"


class CheckStatus(str, Enum):
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"
    ERROR = "error"
    SKIPPED = "skipped"


class Severity(str, Enum):
    CRITICAL = "critical"
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    INFO = "info"


class SourceAgent(str, Enum):
    DATASET = "dataset"
    CHECKS = "checks"
    CHECKPOINT = "checkpoint"
    REASONER = "reasoner"


class DatasetRef(str, Enum):
    TRAIN = "train"
    TEST = "test"


SEVERITY_WEIGHT = {
    Severity.CRITICAL: 4,
    Severity.HIGH: 3,
    Severity.MEDIUM: 2,
    Severity.LOW: 1,
    Severity.INFO: 0,
}

# Registry of every check the engine can emit. The check engine builds its
# registry against this set so wire validation and execution cannot drift.
DATA_INTEGRITY_CHECK_IDS = (
    "percent_of_nulls",
    "mixed_nulls",
    "mixed_data_types",
    "string_mismatch",
    "special_characters",
    "is_single_value",
    "class_imbalance",
    "data_duplicates",
    "conflicting_labels",
    "outlier_sample_detection",
    "feature_label_correlation",
    "feature_feature_correlation",
)
TRAIN_TEST_VALIDATION_CHECK_IDS = (
    "datasets_size_comparison",
    "new_label",
    "new_category",
    "index_leakage",
    "train_test_samples_mix",
    "label_drift",
    "feature_drift",
    "multivariate_drift",
)
MODEL_EVALUATION_CHECK_IDS = (
    "single_dataset_performance",
    "train_test_performance",
    "confusion_matrix_report",
    "roc_report",
    "calibration_score",
    "simple_model_comparison",
    "weak_segments_performance",
    "prediction_drift",
)
ALL_CHECK_IDS = frozenset(
    DATA_INTEGRITY_CHECK_IDS
    + TRAIN_TEST_VALIDATION_CHECK_IDS
    + MODEL_EVALUATION_CHECK_IDS
)


class WireError(ValueError):
    """Invariant violation while encoding or decoding a wire document."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _fail(path: str, message: str) -> NoReturn:
    raise WireError(path, message)


# ---------------------------------------------------------------------------
# decoding helpers
# ---------------------------------------------------------------------------


def _expect_object(value: Any, path: str, keys: set[str]) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        _fail(path, f"expected object, got {type(value).__name__}")
    unknown = set(value) - keys
    if unknown:
        _fail(path, f"unknown field(s): {', '.join(sorted(unknown))}")
    return value


def _expect_list(value: Any, path: str) -> Sequence[Any]:
    if not isinstance(value, (list, tuple)):
        _fail(path, f"expected array, got {type(value).__name__}")
    return value


def _expect_str(value: Any, path: str, allow_empty: bool = True) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected string, got {type(value).__name__}")
    if not allow_empty and not value:
        _fail(path, "must be non-empty")
    return value


def _expect_int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}")
    return value


def _expect_float(
    value: Any,
    path: str,
    lo: float | None = None,
    hi: float | None = None,
) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected number, got {type(value).__name__}")
    out = float(value)
    if not math.isfinite(out):
        _fail(path, "non-finite metric")
    if lo is not None and out < lo:
        _fail(path, f"must be >= {lo}")
    if hi is not None and out > hi:
        _fail(path, f"must be <= {hi}")
    return out


def _expect_enum(value: Any, path: str, enum_cls: type[Enum]) -> Any:
    raw = _expect_str(value, path)
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        _fail(path, f"invalid value {raw!r}, expected one of: {allowed}")


def _expect_float_map(value: Any, path: str) -> dict[str, float]:
    if not isinstance(value, Mapping):
        _fail(path, f"expected object, got {type(value).__name__}")
    out: dict[str, float] = {}
    for key, item in value.items():
        out[_expect_str(key, path)] = _expect_float(item, f"{path}.{key}")
    return out


def _expect_timestamp(value: Any, path: str) -> datetime:
    raw = _expect_str(value, path)
    try:
        parsed = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        _fail(path, f"invalid UTC timestamp {raw!r}")
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _format_timestamp(value: datetime) -> str:
    return value.astimezone(timezone.utc).strftime(_TIMESTAMP_FMT)


def _opt(data: Mapping[str, Any], key: str) -> Any:
    value = data.get(key)
    return None if value is None else value


def _freeze(obj: Any, name: str, value: Any) -> None:
    object.__setattr__(obj, name, value)


# ---------------------------------------------------------------------------
# dataset schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "kind": self.kind.value}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ColumnSpec":
        obj = _expect_object(data, path, {"name", "kind"})
        return cls(
            name=_expect_str(obj.get("name"), f"{path}.name", allow_empty=False),
            kind=_expect_enum(obj.get("kind"), f"{path}.kind", ColumnKind),
        )


@dataclass(frozen=True)
class DatasetSchema:
    columns: tuple[ColumnSpec, ...]
    task: TaskKind
    label_column: str | None = None
    index_column: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise WireError("columns", "column names must be unique")
        for ref, attr in ((self.label_column, "label_column"), (self.index_column, "index_column")):
            if ref is not None and ref not in names:
                raise WireError(attr, f"{ref!r} is not a declared column")

    def column(self, name: str) -> ColumnSpec:
        for spec in self.columns:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def feature_columns(self) -> tuple[ColumnSpec, ...]:
        """Declared columns usable as features: identifiers, the label and the
        index column are excluded."""
        out = []
        for spec in self.columns:
            if spec.kind is ColumnKind.IDENTIFIER:
                continue
            if spec.name in (self.label_column, self.index_column):
                continue
            out.append(spec)
        return tuple(out)

    def to_dict(self) -> dict[str, Any]:
        return {
            "columns": [c.to_dict() for c in self.columns],
            "label_column": self.label_column,
            "index_column": self.index_column,
            "task": self.task.value,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "schema") -> "DatasetSchema":
        obj = _expect_object(data, path, {"columns", "label_column", "index_column", "task"})
        columns = tuple(
            ColumnSpec.from_dict(item, f"{path}.columns[{i}]")
            for i, item in enumerate(_expect_list(obj.get("columns"), f"{path}.columns"))
        )
        label = _opt(obj, "label_column")
        index = _opt(obj, "index_column")
        if label is not None:
            label = _expect_str(label, f"{path}.label_column")
        if index is not None:
            index = _expect_str(index, f"{path}.index_column")
        try:
            return cls(
                columns=columns,
                task=_expect_enum(obj.get("task"), f"{path}.task", TaskKind),
                label_column=label,
                index_column=index,
            )
        except WireError as err:
            _fail(f"{path}.{err.path}", err.message)


# ---------------------------------------------------------------------------
# dataset statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumericSummary:
    min: float
    max: float
    mean: float
    std: float
    q1: float
    q2: float
    q3: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "std": self.std,
            "q1": self.q1,
            "q2": self.q2,
            "q3": self.q3,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "NumericSummary":
        obj = _expect_object(data, path, {"min", "max", "mean", "std", "q1", "q2", "q3"})
        values = {key: _expect_float(obj.get(key), f"{path}.{key}") for key in ("min", "max", "mean", "std", "q1", "q2", "q3")}
        if not (values["min"] <= values["q1"] <= values["q2"] <= values["q3"] <= values["max"]):
            _fail(path, "quartiles must be monotone within [min, max]")
        return cls(**values)


@dataclass(frozen=True)
class TopValue:
    value: str
    count: int

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "count": self.count}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "TopValue":
        obj = _expect_object(data, path, {"value", "count"})
        return cls(
            value=_expect_str(obj.get("value"), f"{path}.value"),
            count=_expect_int(obj.get("count"), f"{path}.count", minimum=0),
        )


@dataclass(frozen=True)
class ColumnStatistics:
    name: str
    kind: ColumnKind
    null_fraction: float
    distinct_count: int
    numeric_summary: NumericSummary | None = None
    top_values: tuple[TopValue, ...] | None = None

    def __post_init__(self) -> None:
        if self.top_values is not None:
            _freeze(self, "top_values", tuple(self.top_values))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "null_fraction": self.null_fraction,
            "distinct_count": self.distinct_count,
            "numeric_summary": self.numeric_summary.to_dict() if self.numeric_summary else None,
            "top_values": [t.to_dict() for t in self.top_values] if self.top_values is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ColumnStatistics":
        obj = _expect_object(
            data, path, {"name", "kind", "null_fraction", "distinct_count", "numeric_summary", "top_values"}
        )
        summary = _opt(obj, "numeric_summary")
        top = _opt(obj, "top_values")
        return cls(
            name=_expect_str(obj.get("name"), f"{path}.name", allow_empty=False),
            kind=_expect_enum(obj.get("kind"), f"{path}.kind", ColumnKind),
            null_fraction=_expect_float(obj.get("null_fraction"), f"{path}.null_fraction", lo=0.0, hi=1.0),
            distinct_count=_expect_int(obj.get("distinct_count"), f"{path}.distinct_count", minimum=0),
            numeric_summary=None if summary is None else NumericSummary.from_dict(summary, f"{path}.numeric_summary"),
            top_values=None
            if top is None
            else tuple(
                TopValue.from_dict(item, f"{path}.top_values[{i}]")
                for i, item in enumerate(_expect_list(top, f"{path}.top_values"))
            ),
        )


@dataclass(frozen=True)
class DatasetStatistics:
    sample_count: int
    per_column: tuple[ColumnStatistics, ...]
    class_distribution: dict[str, int] | None = None

    def __post_init__(self) -> None:
        _freeze(self, "per_column", tuple(self.per_column))

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample_count": self.sample_count,
            "per_column": [c.to_dict() for c in self.per_column],
            "class_distribution": dict(self.class_distribution) if self.class_distribution is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "DatasetStatistics":
        obj = _expect_object(data, path, {"sample_count", "per_column", "class_distribution"})
        sample_count = _expect_int(obj.get("sample_count"), f"{path}.sample_count", minimum=0)
        per_column = tuple(
            ColumnStatistics.from_dict(item, f"{path}.per_column[{i}]")
            for i, item in enumerate(_expect_list(obj.get("per_column"), f"{path}.per_column"))
        )
        raw_dist = _opt(obj, "class_distribution")
        dist: dict[str, int] | None = None
        if raw_dist is not None:
            if not isinstance(raw_dist, Mapping):
                _fail(f"{path}.class_distribution", "expected object")
            dist = {
                _expect_str(k, f"{path}.class_distribution"): _expect_int(
                    v, f"{path}.class_distribution.{k}", minimum=0
                )
                for k, v in raw_dist.items()
            }
            if sum(dist.values()) > sample_count:
                _fail(f"{path}.class_distribution", "class counts exceed sample_count")
        return cls(sample_count=sample_count, per_column=per_column, class_distribution=dist)


# ---------------------------------------------------------------------------
# check results and checkpoint metadata
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    category: CheckCategory
    status: CheckStatus
    metrics: dict[str, float]
    condition: str
    summary: str
    details: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check_id": self.check_id,
            "category": self.category.value,
            "status": self.status.value,
            "metrics": dict(self.metrics),
            "condition": self.condition,
            "summary": self.summary,
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "CheckResult":
        obj = _expect_object(
            data, path, {"check_id", "category", "status", "metrics", "condition", "summary", "details"}
        )
        check_id = _expect_str(obj.get("check_id"), f"{path}.check_id", allow_empty=False)
        if check_id not in ALL_CHECK_IDS:
            _fail(f"{path}.check_id", f"unknown check id {check_id!r}")
        return cls(
            check_id=check_id,
            category=_expect_enum(obj.get("category"), f"{path}.category", CheckCategory),
            status=_expect_enum(obj.get("status"), f"{path}.status", CheckStatus),
            metrics=_expect_float_map(obj.get("metrics"), f"{path}.metrics"),
            condition=_expect_str(obj.get("condition"), f"{path}.condition"),
            summary=_expect_str(obj.get("summary"), f"{path}.summary"),
            details=_expect_float_map(obj.get("details", {}), f"{path}.details"),
        )


_SCALAR_TYPES = (str, int, float, bool)


@dataclass(frozen=True)
class CheckpointMetadata:
    architecture: str
    parameter_count: int
    num_classes: int | None = None
    docstring: str | None = None
    training_config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "architecture": self.architecture,
            "parameter_count": self.parameter_count,
            "num_classes": self.num_classes,
            "docstring": self.docstring,
            "training_config": dict(self.training_config),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "CheckpointMetadata":
        obj = _expect_object(
            data, path, {"architecture", "parameter_count", "num_classes", "docstring", "training_config"}
        )
        num_classes = _opt(obj, "num_classes")
        if num_classes is not None:
            num_classes = _expect_int(num_classes, f"{path}.num_classes", minimum=2)
        docstring = _opt(obj, "docstring")
        if docstring is not None:
            docstring = _expect_str(docstring, f"{path}.docstring")
        raw_cfg = obj.get("training_config", {})
        if not isinstance(raw_cfg, Mapping):
            _fail(f"{path}.training_config", "expected object")
        cfg: dict[str, Any] = {}
        for key, value in raw_cfg.items():
            key = _expect_str(key, f"{path}.training_config")
            if value is not None and not isinstance(value, _SCALAR_TYPES):
                _fail(f"{path}.training_config.{key}", "expected scalar value")
            if isinstance(value, float) and not math.isfinite(value):
                _fail(f"{path}.training_config.{key}", "non-finite metric")
            cfg[key] = value
        return cls(
            architecture=_expect_str(obj.get("architecture"), f"{path}.architecture"),
            parameter_count=_expect_int(obj.get("parameter_count"), f"{path}.parameter_count", minimum=0),
            num_classes=num_classes,
            docstring=docstring,
            training_config=cfg,
        )


# ---------------------------------------------------------------------------
# artifact bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArtifactBundle:
    train_stats: DatasetStatistics
    test_stats: DatasetStatistics
    integrity_results: tuple[CheckResult, ...]
    validation_results: tuple[CheckResult, ...]
    evaluation_results: tuple[CheckResult, ...]
    created_at: datetime
    checkpoint: CheckpointMetadata | None = None
    client_info: dict[str, str] = field(default_factory=dict)
    bundle_version: str = BUNDLE_VERSION
    modality: str = MODALITY

    def __post_init__(self) -> None:
        for name in ("integrity_results", "validation_results", "evaluation_results"):
            _freeze(self, name, tuple(getattr(self, name)))

    def all_results(self) -> tuple[CheckResult, ...]:
        return self.integrity_results + self.validation_results + self.evaluation_results

    def to_dict(self) -> dict[str, Any]:
        return {
            "bundle_version": self.bundle_version,
            "modality": self.modality,
            "created_at": _format_timestamp(self.created_at),
            "train_stats": self.train_stats.to_dict(),
            "test_stats": self.test_stats.to_dict(),
            "integrity_results": [r.to_dict() for r in self.integrity_results],
            "validation_results": [r.to_dict() for r in self.validation_results],
            "evaluation_results": [r.to_dict() for r in self.evaluation_results],
            "checkpoint": self.checkpoint.to_dict() if self.checkpoint else None,
            "client_info": dict(self.client_info),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "bundle") -> "ArtifactBundle":
        obj = _expect_object(
            data,
            path,
            {
                "bundle_version",
                "modality",
                "created_at",
                "train_stats",
                "test_stats",
                "integrity_results",
                "validation_results",
                "evaluation_results",
                "checkpoint",
                "client_info",
            },
        )
        version = _expect_str(obj.get("bundle_version"), f"{path}.bundle_version", allow_empty=False)
        major = version.split(".", 1)[0]
        if major != BUNDLE_VERSION.split(".", 1)[0]:
            _fail(f"{path}.bundle_version", f"unsupported major version {version!r}")
        modality = _expect_str(obj.get("modality"), f"{path}.modality")
        if modality != MODALITY:
            _fail(f"{path}.modality", f"unsupported modality {modality!r}")

        def read_results(key: str, category: CheckCategory) -> tuple[CheckResult, ...]:
            items = _expect_list(obj.get(key), f"{path}.{key}")
            results = tuple(CheckResult.from_dict(item, f"{path}.{key}[{i}]") for i, item in enumerate(items))
            seen: set[str] = set()
            for i, result in enumerate(results):
                if result.category is not category:
                    _fail(f"{path}.{key}[{i}].category", f"expected {category.value}")
                if result.check_id in seen:
                    _fail(f"{path}.{key}[{i}].check_id", f"duplicate check id {result.check_id!r}")
                seen.add(result.check_id)
            return results

        checkpoint = _opt(obj, "checkpoint")
        raw_info = obj.get("client_info", {})
        if not isinstance(raw_info, Mapping):
            _fail(f"{path}.client_info", "expected object")
        client_info = {
            _expect_str(k, f"{path}.client_info"): _expect_str(v, f"{path}.client_info.{k}")
            for k, v in raw_info.items()
        }
        return cls(
            bundle_version=version,
            modality=modality,
            created_at=_expect_timestamp(obj.get("created_at"), f"{path}.created_at"),
            train_stats=DatasetStatistics.from_dict(obj.get("train_stats"), f"{path}.train_stats"),
            test_stats=DatasetStatistics.from_dict(obj.get("test_stats"), f"{path}.test_stats"),
            integrity_results=read_results("integrity_results", CheckCategory.DATA_INTEGRITY),
            validation_results=read_results("validation_results", CheckCategory.TRAIN_TEST_VALIDATION),
            evaluation_results=read_results("evaluation_results", CheckCategory.MODEL_EVALUATION),
            checkpoint=None if checkpoint is None else CheckpointMetadata.from_dict(checkpoint, f"{path}.checkpoint"),
            client_info=client_info,
        )


# ---------------------------------------------------------------------------
# analysis outputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evidence:
    check_id: str
    metric: str
    value: float

    def to_dict(self) -> dict[str, Any]:
        return {"check_id": self.check_id, "metric": self.metric, "value": self.value}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Evidence":
        obj = _expect_object(data, path, {"check_id", "metric", "value"})
        return cls(
            check_id=_expect_str(obj.get("check_id"), f"{path}.check_id", allow_empty=False),
            metric=_expect_str(obj.get("metric"), f"{path}.metric"),
            value=_expect_float(obj.get("value"), f"{path}.value"),
        )

    @property
    def column(self) -> str | None:
        """Column qualifier when the metric is written as ``name[column]``."""
        if self.metric.endswith("]") and "[" in self.metric:
            return self.metric[self.metric.index("[") + 1 : -1]
        return None


@dataclass(frozen=True)
class Finding:
    finding_id: str
    source_agent: SourceAgent
    severity: Severity
    confidence: float
    evidence: tuple[Evidence, ...]
    description: str

    def __post_init__(self) -> None:
        _freeze(self, "evidence", tuple(self.evidence))

    def to_dict(self) -> dict[str, Any]:
        return {
            "finding_id": self.finding_id,
            "source_agent": self.source_agent.value,
            "severity": self.severity.value,
            "confidence": self.confidence,
            "evidence": [e.to_dict() for e in self.evidence],
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Finding":
        obj = _expect_object(
            data, path, {"finding_id", "source_agent", "severity", "confidence", "evidence", "description"}
        )
        return cls(
            finding_id=_expect_str(obj.get("finding_id"), f"{path}.finding_id", allow_empty=False),
            source_agent=_expect_enum(obj.get("source_agent"), f"{path}.source_agent", SourceAgent),
            severity=_expect_enum(obj.get("severity"), f"{path}.severity", Severity),
            confidence=_expect_float(obj.get("confidence"), f"{path}.confidence", lo=0.0, hi=1.0),
            evidence=tuple(
                Evidence.from_dict(item, f"{path}.evidence[{i}]")
                for i, item in enumerate(_expect_list(obj.get("evidence"), f"{path}.evidence"))
            ),
            description=_expect_str(obj.get("description"), f"{path}.description"),
        )


@dataclass(frozen=True)
class Hypothesis:
    statement: str
    supporting_findings: tuple[str, ...]
    kb_citations: tuple[str, ...]
    plausibility: float

    def __post_init__(self) -> None:
        _freeze(self, "supporting_findings", tuple(self.supporting_findings))
        _freeze(self, "kb_citations", tuple(self.kb_citations))

    def to_dict(self) -> dict[str, Any]:
        return {
            "statement": self.statement,
            "supporting_findings": list(self.supporting_findings),
            "kb_citations": list(self.kb_citations),
            "plausibility": self.plausibility,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Hypothesis":
        obj = _expect_object(data, path, {"statement", "supporting_findings", "kb_citations", "plausibility"})
        supporting = tuple(
            _expect_str(item, f"{path}.supporting_findings[{i}]")
            for i, item in enumerate(_expect_list(obj.get("supporting_findings"), f"{path}.supporting_findings"))
        )
        if not supporting:
            _fail(f"{path}.supporting_findings", "must be non-empty")
        return cls(
            statement=_expect_str(obj.get("statement"), f"{path}.statement"),
            supporting_findings=supporting,
            kb_citations=tuple(
                _expect_str(item, f"{path}.kb_citations[{i}]")
                for i, item in enumerate(_expect_list(obj.get("kb_citations"), f"{path}.kb_citations"))
            ),
            plausibility=_expect_float(obj.get("plausibility"), f"{path}.plausibility", lo=0.0, hi=1.0),
        )


@dataclass(frozen=True)
class RankedFinding:
    finding: Finding
    rank_score: float

    def to_dict(self) -> dict[str, Any]:
        return {"finding": self.finding.to_dict(), "rank_score": self.rank_score}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "RankedFinding":
        obj = _expect_object(data, path, {"finding", "rank_score"})
        return cls(
            finding=Finding.from_dict(obj.get("finding"), f"{path}.finding"),
            rank_score=_expect_float(obj.get("rank_score"), f"{path}.rank_score"),
        )


@dataclass(frozen=True)
class Action:
    action: str
    rationale: str
    linked_findings: tuple[str, ...]

    def __post_init__(self) -> None:
        _freeze(self, "linked_findings", tuple(self.linked_findings))

    def to_dict(self) -> dict[str, Any]:
        return {
            "action": self.action,
            "rationale": self.rationale,
            "linked_findings": list(self.linked_findings),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Action":
        obj = _expect_object(data, path, {"action", "rationale", "linked_findings"})
        return cls(
            action=_expect_str(obj.get("action"), f"{path}.action", allow_empty=False),
            rationale=_expect_str(obj.get("rationale"), f"{path}.rationale"),
            linked_findings=tuple(
                _expect_str(item, f"{path}.linked_findings[{i}]")
                for i, item in enumerate(_expect_list(obj.get("linked_findings"), f"{path}.linked_findings"))
            ),
        )


@dataclass(frozen=True)
class Consensus:
    samples: int
    agreement: float

    def to_dict(self) -> dict[str, Any]:
        return {"samples": self.samples, "agreement": self.agreement}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Consensus":
        obj = _expect_object(data, path, {"samples", "agreement"})
        return cls(
            samples=_expect_int(obj.get("samples"), f"{path}.samples", minimum=0),
            agreement=_expect_float(obj.get("agreement"), f"{path}.agreement", lo=0.0, hi=1.0),
        )


@dataclass(frozen=True)
class Diagnosis:
    ranked_findings: tuple[RankedFinding, ...]
    hypotheses: tuple[Hypothesis, ...]
    actions: tuple[Action, ...]
    summary: str
    consensus: Consensus
    degraded: bool = False

    def __post_init__(self) -> None:
        _freeze(self, "ranked_findings", tuple(self.ranked_findings))
        _freeze(self, "hypotheses", tuple(self.hypotheses))
        _freeze(self, "actions", tuple(self.actions))

    def to_dict(self) -> dict[str, Any]:
        return {
            "ranked_findings": [r.to_dict() for r in self.ranked_findings],
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "actions": [a.to_dict() for a in self.actions],
            "summary": self.summary,
            "consensus": self.consensus.to_dict(),
            "degraded": self.degraded,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "diagnosis") -> "Diagnosis":
        obj = _expect_object(
            data, path, {"ranked_findings", "hypotheses", "actions", "summary", "consensus", "degraded"}
        )
        ranked = tuple(
            RankedFinding.from_dict(item, f"{path}.ranked_findings[{i}]")
            for i, item in enumerate(_expect_list(obj.get("ranked_findings"), f"{path}.ranked_findings"))
        )
        for i in range(1, len(ranked)):
            if ranked[i].rank_score > ranked[i - 1].rank_score:
                _fail(f"{path}.ranked_findings[{i}].rank_score", "findings must be sorted by descending rank_score")
        known_ids = {r.finding.finding_id for r in ranked}
        hypotheses = tuple(
            Hypothesis.from_dict(item, f"{path}.hypotheses[{i}]")
            for i, item in enumerate(_expect_list(obj.get("hypotheses"), f"{path}.hypotheses"))
        )
        for i, hyp in enumerate(hypotheses):
            for j, fid in enumerate(hyp.supporting_findings):
                if fid not in known_ids:
                    _fail(f"{path}.hypotheses[{i}].supporting_findings[{j}]", f"unknown finding id {fid!r}")
        actions = tuple(
            Action.from_dict(item, f"{path}.actions[{i}]")
            for i, item in enumerate(_expect_list(obj.get("actions"), f"{path}.actions"))
        )
        for i, action in enumerate(actions):
            for j, fid in enumerate(action.linked_findings):
                if fid not in known_ids:
                    _fail(f"{path}.actions[{i}].linked_findings[{j}]", f"unknown finding id {fid!r}")
        degraded = obj.get("degraded", False)
        if not isinstance(degraded, bool):
            _fail(f"{path}.degraded", "expected boolean")
        has_high = any(SEVERITY_WEIGHT[r.finding.severity] >= SEVERITY_WEIGHT[Severity.HIGH] for r in ranked)
        if has_high and not actions:
            _fail(f"{path}.actions", "must be non-empty when findings of severity high or above exist")
        return cls(
            ranked_findings=ranked,
            hypotheses=hypotheses,
            actions=actions,
            summary=_expect_str(obj.get("summary"), f"{path}.summary"),
            consensus=Consensus.from_dict(obj.get("consensus"), f"{path}.consensus"),
            degraded=degraded,
        )


# ---------------------------------------------------------------------------
# provider contract
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LLMMessage:
    role: str
    content: str

    def to_dict(self) -> dict[str, Any]:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class LLMRequest:
    messages: tuple[LLMMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 1024
    response_format_hint: str | None = None

    def __post_init__(self) -> None:
        _freeze(self, "messages", tuple(self.messages))
        if not self.messages:
            raise WireError("messages", "must be non-empty")
        if not math.isfinite(self.temperature) or not 0.0 <= self.temperature <= 2.0:
            raise WireError("temperature", "must be finite and within [0, 2]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "messages": [m.to_dict() for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "response_format_hint": self.response_format_hint,
        }


@dataclass(frozen=True)
class LLMResponse:
    content: str
    provider_id: str
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "content": self.content,
            "provider_id": self.provider_id,
            "usage": {"prompt_tokens": self.prompt_tokens, "completion_tokens": self.completion_tokens},
        }


# ---------------------------------------------------------------------------
# canonical encoding
# ---------------------------------------------------------------------------


def canonical_json_bytes(document: Any) -> bytes:
    """Canonical JSON: sorted keys, compact separators, UTF-8, no NaN/Inf.

    Floats rely on Python's shortest round-tripping repr, so equal values
    always produce identical bytes.
    """
    try:
        text = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)
    except ValueError as err:
        raise WireError("document", f"not canonically encodable: {err}") from err
    return text.encode("utf-8")


def encode_bundle(bundle: ArtifactBundle) -> bytes:
    """Serialize a bundle to canonical bytes, re-validating every invariant."""
    document = bundle.to_dict()
    ArtifactBundle.from_dict(document)
    return canonical_json_bytes(document)


def decode_bundle(raw: bytes | str) -> ArtifactBundle:
    return ArtifactBundle.from_dict(_load_document(raw, "bundle"))


def bundle_hash(bundle: ArtifactBundle) -> str:
    """SHA-256 hex digest of the canonical encoding; the server cache key."""
    return hashlib.sha256(encode_bundle(bundle)).hexdigest()


def encode_diagnosis(diagnosis: Diagnosis) -> bytes:
    document = diagnosis.to_dict()
    Diagnosis.from_dict(document)
    return canonical_json_bytes(document)


def decode_diagnosis(raw: bytes | str) -> Diagnosis:
    return Diagnosis.from_dict(_load_document(raw, "diagnosis"))


def encode_schema(schema: DatasetSchema) -> bytes:
    return canonical_json_bytes(schema.to_dict())


def decode_schema(raw: bytes | str) -> DatasetSchema:
    return DatasetSchema.from_dict(_load_document(raw, "schema"))


def _load_document(raw: bytes | str, path: str) -> Any:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="strict")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as err:
        raise WireError(path, f"malformed JSON: {err}") from err


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
