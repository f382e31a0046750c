"""escalade: gated escalation pipeline for AI incident reports.

An incident record moves through eight ordered gates (causal involvement,
scope, immediate triggers, pattern correlation, harm category and severity,
cross-border propagation, irreversibility, near miss) and lands in exactly one
of ``escalate``, ``alert``, ``discard`` with a full per-gate trace. The
package also ships composite clustering of related incidents, rolling harm
tolerance monitoring, comparator regulatory profiles with gap analysis, a
review corpus, a CLI, and a stepwise session API.
"""

from .config import EngineConfig, VulnerabilityModifier, load_config
from .clusters import (
    ClusterContext,
    CompositeCluster,
    aggregate_assessment,
    build_clusters,
    signature_match,
)
from .gates import (
    Classification,
    ClassificationTrace,
    GateOutcome,
    GateResult,
    classify,
)
from .model import (
    GATE_IDS,
    SCHEMA_VERSION,
    Availability,
    CausationAssessment,
    CausationConfidence,
    CausationRole,
    ConfigurationError,
    FieldGroup,
    GateReadiness,
    HarmAssessment,
    HarmBasis,
    ImmediateFlag,
    ImpactMetrics,
    IncidentRecord,
    ModelError,
    ParseError,
    PropagationAssessment,
    PropagationPathway,
    PropagationVelocity,
    Restorability,
    ReversibilityProfile,
    RootCauseKind,
    RootCauseSignature,
    ScopeDomain,
    Ternary,
    ValidationFinding,
    VulnerabilityFlag,
    completeness_check,
    validate_record,
)
from .monitor import (
    HarmSeriesPoint,
    ToleranceConfig,
    ToleranceEvent,
    detect_events,
    monitor_series,
    promote_event,
)
from .profiles import (
    GapReport,
    ProfileEvaluation,
    ProfileRuleSet,
    Verdict,
    eval_profile,
    gap_report,
    load_profile,
    load_profiles,
)
from .registry import (
    DimensionRegistry,
    DimensionRegistryEntry,
    DimensionStatus,
    UnknownDimensionError,
    dimension_registry,
    load_harm_categories,
    lookup_dimension,
)

__version__ = "0.1.0"

__all__ = [
    "Availability",
    "CausationAssessment",
    "CausationConfidence",
    "CausationRole",
    "Classification",
    "ClassificationTrace",
    "ClusterContext",
    "CompositeCluster",
    "ConfigurationError",
    "DimensionRegistry",
    "DimensionRegistryEntry",
    "DimensionStatus",
    "EngineConfig",
    "FieldGroup",
    "GATE_IDS",
    "GapReport",
    "GateOutcome",
    "GateReadiness",
    "GateResult",
    "HarmAssessment",
    "HarmBasis",
    "HarmSeriesPoint",
    "ImmediateFlag",
    "ImpactMetrics",
    "IncidentRecord",
    "ModelError",
    "ParseError",
    "ProfileEvaluation",
    "ProfileRuleSet",
    "PropagationAssessment",
    "PropagationPathway",
    "PropagationVelocity",
    "Restorability",
    "ReversibilityProfile",
    "RootCauseKind",
    "RootCauseSignature",
    "SCHEMA_VERSION",
    "ScopeDomain",
    "Ternary",
    "ToleranceConfig",
    "ToleranceEvent",
    "UnknownDimensionError",
    "ValidationFinding",
    "Verdict",
    "VulnerabilityFlag",
    "VulnerabilityModifier",
    "aggregate_assessment",
    "build_clusters",
    "classify",
    "completeness_check",
    "detect_events",
    "dimension_registry",
    "eval_profile",
    "gap_report",
    "load_config",
    "load_harm_categories",
    "load_profile",
    "load_profiles",
    "lookup_dimension",
    "monitor_series",
    "promote_event",
    "signature_match",
    "validate_record",
]
