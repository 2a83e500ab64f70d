"""Incremental sightseeing-dialogue engine.

Streams of in-progress transcription updates drive per-update voice-action
decisions (respond, nod, nod with backchannel, or stay still) while a
topic-branching common-ground tree collects the preferences the system has
explicitly taken up.  The active branch compiles into a faceted spot query;
responses are enumerated as dialogue acts, selected under a feasibility
guarantee, realized from templates, and delivered one clause-sized chunk per
user acknowledgment.
"""

from .common_ground import (
    CommonGroundTree,
    Preference,
    PreferenceStatus,
    TopicNode,
    active_preferences,
    extract_preferences,
    filter_accepted,
    record_preferences,
)
from .config import EngineConfig
from .dialogue_policy import (
    DialogueAct,
    DialogueActType,
    generate_candidate_das,
    realize_response,
    segment_into_chunks,
    select_da,
)
from .expression_motion import (
    AnnotatedUtterance,
    Expression,
    Motion,
    RuleClassifier,
    classify,
    evaluate_classifier,
)
from .history import DialogueHistory, Speaker, Turn
from .llm_backend import (
    BackendConfig,
    BackendError,
    CompletionResult,
    LiveBackend,
    PromptTemplate,
    StubBackend,
)
from .orchestrator import Engine, Session, create_session
from .replay import ReplayReport, replay_transcript
from .spot_search import (
    SearchQuery,
    SpotDatabase,
    SpotRecord,
    build_query,
    load_spot_database,
    search_spots,
)
from .stub_rules import build_stub_backend
from .taxonomy import CategoryTaxonomy, Facet
from .voice_action import (
    AckEvent,
    AckKind,
    AsrEvent,
    DeliveryState,
    VoiceActionDecision,
    VoiceActionSelector,
    VoiceActionType,
    arbitrate,
    on_ack,
    on_barge_in,
    start_delivery,
)

__version__ = "0.1.0"
