"""Phase-2 analysis agents: analyzers, reasoner and provider abstraction."""

from .analyzers import (
    AgentRegistry,
    analyze_checkpoint,
    analyze_checks,
    analyze_dataset,
    severity_for_result,
)
from .providers import (
    FixtureMiss,
    HttpChatProvider,
    Provider,
    ProviderError,
    ProviderUnavailable,
    StubProvider,
    prompt_hash,
)
from .reasoner import (
    ConsensusResult,
    ConsensusSample,
    FindingCluster,
    PipelineConfig,
    aggregate_findings,
    generate_hypotheses,
    rank_diagnosis,
    run_pipeline,
    self_consistent_complete,
)

__all__ = [
    "AgentRegistry",
    "analyze_dataset",
    "analyze_checks",
    "analyze_checkpoint",
    "severity_for_result",
    "Provider",
    "ProviderError",
    "ProviderUnavailable",
    "FixtureMiss",
    "StubProvider",
    "HttpChatProvider",
    "prompt_hash",
    "FindingCluster",
    "ConsensusSample",
    "ConsensusResult",
    "PipelineConfig",
    "aggregate_findings",
    "generate_hypotheses",
    "rank_diagnosis",
    "self_consistent_complete",
    "run_pipeline",
]
