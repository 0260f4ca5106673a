from .base import (
    AuditLog,
    CostLedger,
    ElicitationClient,
    ElicitationResult,
    EmbeddingClient,
    NerClient,
    OracleConfig,
    OracleSuite,
    OracleUnreachable,
    RateLimiter,
    SchemaViolation,
)
from .local import RuleBasedNer, TrigramEmbedder
from .synthetic import SyntheticElicitation, SyntheticNer, SyntheticWorld

__all__ = [
    "AuditLog",
    "CostLedger",
    "ElicitationClient",
    "ElicitationResult",
    "EmbeddingClient",
    "NerClient",
    "OracleConfig",
    "OracleSuite",
    "OracleUnreachable",
    "RateLimiter",
    "RuleBasedNer",
    "SchemaViolation",
    "SyntheticElicitation",
    "SyntheticNer",
    "SyntheticWorld",
    "TrigramEmbedder",
]
