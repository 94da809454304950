"""mlfix: diagnostic checks for tabular ML workflows plus an analysis service
that turns check results into a ranked, actionable diagnosis."""

__version__ = "0.1.0"

from .model import (
    ArtifactBundle,
    CheckResult,
    CheckpointMetadata,
    DatasetSchema,
    DatasetStatistics,
    Diagnosis,
    Finding,
    Hypothesis,
    WireError,
    bundle_hash,
    decode_bundle,
    decode_diagnosis,
    decode_schema,
    encode_bundle,
    encode_diagnosis,
)

__all__ = [
    "__version__",
    "ArtifactBundle",
    "CheckResult",
    "CheckpointMetadata",
    "DatasetSchema",
    "DatasetStatistics",
    "Diagnosis",
    "Finding",
    "Hypothesis",
    "WireError",
    "bundle_hash",
    "decode_bundle",
    "decode_diagnosis",
    "decode_schema",
    "encode_bundle",
    "encode_diagnosis",
]
