"""Markov chain analysis of change logs from collaborative ontology projects."""

from .errors import (
    AbsentRow,
    ChainlogError,
    CycleDetected,
    DegenerateDistribution,
    EmptyLog,
    InsufficientData,
    MalformedRecord,
    UnknownClass,
    UnknownRoot,
    UnknownState,
)
from .hierarchy import HierarchyGraph, Relationship, classify_relationship, load_hierarchy
from .ingest import ChangeLog, ChangeRecord, IngestConfig, parse_changelog, validate_changelog
from .markov import (
    StateSpace,
    TransitionModel,
    expand_order,
    fit,
    log_likelihood,
    predict_top_k,
    sample_paths,
    transition_probability,
)
from .metrics import ContributionDistribution, gini_coefficient, normalized_entropy, state_histogram
from .paths import (
    BREAK,
    InteractionPath,
    PathKind,
    SessionConfig,
    build_action_paths,
    build_depth_paths,
    build_paths,
    build_property_paths,
    build_relationship_paths,
    build_user_sequence_paths,
    insert_breaks,
    merge_runs,
)
from .report import AnalysisConfig, run_analyze

__version__ = "0.1.0"
