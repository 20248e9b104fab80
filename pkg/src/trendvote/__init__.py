"""Trend mining and human-AI hybrid candidate selection."""

from .agents import (
    AgentClient,
    AgentEndpoint,
    ContextDocument,
    MockTable,
    PanelSpec,
    VoterProfile,
    consolidate_contexts,
    instantiate_panel,
    run_deep_research,
)
from .analysis import alignment_report, js_distance, vote_distribution
from .ballot import (
    Ballot,
    Session,
    SessionStore,
    Tally,
    VotingRule,
    advance,
    collect_ai_ballots,
    create_session,
    close_session,
    submit_ballot,
    tally,
)
from .cooccur import CoocGraph, build_cooccurrence_graph
from .corpus import CorpusStore, IngestReport, WorkRecord, load_domain_map
from .embedding import (
    EmbeddingTable,
    TrainConfig,
    embed_graph,
    generate_walks,
    train_skipgram,
)
from .hotness import (
    HotnessParams,
    HotnessTable,
    bandwidth_from_percentile,
    compute_hotness,
    rank_change,
    sample_pairwise_distances,
)
from .propose import (
    Candidate,
    CandidatePool,
    assemble_breakthrough_prompt,
    assemble_question_prompt,
    cross_model_vote,
    propose_candidates,
    select_top_pool,
)
from .trends import (
    ClusterSet,
    KeywordSelections,
    SelectionThresholds,
    cluster_by_hotness_priority,
    select_breakthrough_keywords,
    select_question_keywords,
)

__version__ = "0.1.0"

__all__ = [
    "AgentClient",
    "AgentEndpoint",
    "Ballot",
    "Candidate",
    "CandidatePool",
    "ClusterSet",
    "ContextDocument",
    "CoocGraph",
    "CorpusStore",
    "EmbeddingTable",
    "HotnessParams",
    "HotnessTable",
    "IngestReport",
    "KeywordSelections",
    "MockTable",
    "PanelSpec",
    "SelectionThresholds",
    "Session",
    "SessionStore",
    "Tally",
    "TrainConfig",
    "VoterProfile",
    "VotingRule",
    "WorkRecord",
    "advance",
    "alignment_report",
    "assemble_breakthrough_prompt",
    "assemble_question_prompt",
    "bandwidth_from_percentile",
    "build_cooccurrence_graph",
    "close_session",
    "cluster_by_hotness_priority",
    "collect_ai_ballots",
    "compute_hotness",
    "consolidate_contexts",
    "create_session",
    "cross_model_vote",
    "embed_graph",
    "generate_walks",
    "instantiate_panel",
    "js_distance",
    "load_domain_map",
    "propose_candidates",
    "rank_change",
    "run_deep_research",
    "sample_pairwise_distances",
    "select_breakthrough_keywords",
    "select_question_keywords",
    "select_top_pool",
    "submit_ballot",
    "tally",
    "train_skipgram",
    "vote_distribution",
]
