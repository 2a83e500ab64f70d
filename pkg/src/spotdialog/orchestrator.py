"""Session lifecycle and serialized event handling.

Each session is driven by exactly one event at a time: transcription
updates, acknowledgments, and silence timers all funnel through
:meth:`Engine.handle_event`, which returns the outbound actions that event
produced.  With the stub backend the whole engine is a deterministic
function of the timed event sequence, which is what the replay harness and
the byte-stable logs rely on.

A finalized utterance runs the full turn pipeline: extract candidate
preferences, generate a response over the current common ground (enumerate
acts, select one, realize it), then ground exactly those candidates the
realized response takes up, record them in the tree, and start chunked
delivery of the response.  Deferred backend replies re-enter through
:meth:`Engine.apply_deferred_decision`, where anything older than the newest
transcription update is dropped rather than reordered.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Union

from .common_ground import (
    CommonGroundTree,
    Preference,
    extract_preferences,
    filter_accepted,
    record_preferences,
)
from .config import EngineConfig
from .dialogue_policy import (
    generate_candidate_das,
    realization_templates,
    realize_response,
    segment_into_chunks,
    select_da,
)
from .expression_motion import classify
from .history import DialogueHistory
from .llm_backend import LiveBackend, LlmBackend, load_template_dir
from .spot_search import (
    SearchQuery,
    SpotDatabase,
    SpotRecord,
    build_query,
    load_spot_database,
    search_spots,
)
from .stub_rules import build_stub_backend
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

_PROMPT_NAMES = (
    "extract_preferences",
    "filter_accepted",
    "select_da",
    "realize_response",
    "voice_action",
)


@dataclass(frozen=True)
class TimerEvent:
    session_id: str
    due_ms: int
    kind: str = "silence"


EngineEvent = Union[AsrEvent, AckEvent, TimerEvent]


@dataclass(frozen=True)
class EngineAction:
    session_id: str
    index: int


@dataclass(frozen=True)
class Speak(EngineAction):
    text: str = ""
    expression: str = "neutral"
    motion: str = "idle"


@dataclass(frozen=True)
class NodCmd(EngineAction):
    pass


@dataclass(frozen=True)
class BackchannelCmd(EngineAction):
    token: str = ""


@dataclass(frozen=True)
class QueryUpdate(EngineAction):
    query: SearchQuery = field(default_factory=SearchQuery)


@dataclass(frozen=True)
class GroundUpdate(EngineAction):
    tree: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ResultsUpdate(EngineAction):
    results: tuple[tuple[SpotRecord, int], ...] = ()


@dataclass(frozen=True)
class TurnReport:
    """Per-turn grounding trace: what was heard, considered, and kept."""

    extracted: tuple[Preference, ...]
    candidates: tuple[Preference, ...]
    accepted: tuple[Preference, ...]


class SequenceError(ValueError):
    """A transcription update arrived out of order."""


@dataclass
class Session:
    id: str
    config: EngineConfig
    tree: CommonGroundTree
    history: DialogueHistory
    selector: VoiceActionSelector
    delivery: DeliveryState | None = None
    recent_decisions: list[VoiceActionDecision] = field(default_factory=list)
    decision_records: list[tuple[VoiceActionDecision, bool]] = field(
        default_factory=list
    )
    decided_sequences: set[int] = field(default_factory=set)
    latest_sequence: int = -1
    silence_deadline_ms: int | None = None
    action_index: int = 0
    consumed_utterance: str | None = None
    archived_started: int = 0
    archived_delivered: int = 0
    archived_cancelled: int = 0
    last_turn_report: TurnReport | None = None

    def delivery_totals(self) -> tuple[int, int, int]:
        """Cumulative (started, delivered, cancelled) chunks this session."""
        started, delivered, cancelled = (
            self.archived_started,
            self.archived_delivered,
            self.archived_cancelled,
        )
        if self.delivery is not None:
            started += self.delivery.started_count
            delivered += self.delivery.delivered_count
            cancelled += self.delivery.cancelled_count
        return started, delivered, cancelled


class Engine:
    """Shared immutable resources plus the per-session event handlers."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self.db: SpotDatabase = load_spot_database(config.poi_path)
        self.templates = realization_templates(config.templates_dir)
        self.prompts = load_template_dir(config.prompts_dir)
        missing = set(_PROMPT_NAMES) - set(self.prompts)
        if missing:
            raise FileNotFoundError(
                "missing prompt template(s): " + ", ".join(sorted(missing))
            )
        if config.llm.mode == "live":
            self.backend: LlmBackend = LiveBackend(config.llm)
        else:
            self.backend = build_stub_backend(
                backchannel_tokens=config.backchannel_tokens,
                token_threshold=config.new_token_nod_threshold,
            )
        self.sessions: dict[str, Session] = {}

    def create_session(self, session_id: str | None = None) -> Session:
        session = Session(
            id=session_id or uuid.uuid4().hex,
            config=self.config,
            tree=CommonGroundTree.fresh(),
            history=DialogueHistory(),
            selector=VoiceActionSelector(
                self.backend,
                template=self.prompts["voice_action"],
                token_threshold=self.config.new_token_nod_threshold,
                backchannel_tokens=self.config.backchannel_tokens,
            ),
        )
        self.sessions[session.id] = session
        return session

    def next_timer_due(self, session: Session) -> int | None:
        return session.silence_deadline_ms

    def handle_event(self, session: Session, event: EngineEvent) -> list[EngineAction]:
        if event.session_id != session.id:
            raise ValueError(
                f"event for session {event.session_id!r} handled by {session.id!r}"
            )
        if isinstance(event, AsrEvent):
            if event.is_final:
                return self._handle_final(session, event)
            return self._handle_partial(session, event)
        if isinstance(event, AckEvent):
            return self._handle_ack(session, event)
        return self._handle_timer(session, event)

    # -- transcription updates ------------------------------------------------

    def _check_sequence(self, session: Session, event: AsrEvent) -> None:
        if event.sequence <= session.latest_sequence:
            raise SequenceError(
                f"sequence {event.sequence} not after {session.latest_sequence}"
            )
        session.latest_sequence = event.sequence

    def _decide(self, session: Session, event: AsrEvent) -> VoiceActionDecision:
        raw = session.selector.decide(session.history, event)
        if (
            raw.action is VoiceActionType.RESPONSE
            and not event.is_final
            and not self.config.early_response
        ):
            raw = VoiceActionDecision(
                action=VoiceActionType.NONE,
                triggering_sequence=raw.triggering_sequence,
                at_ms=raw.at_ms,
            )
        decision = arbitrate(
            raw,
            session.recent_decisions,
            event.timestamp_ms,
            window_ms=self.config.nod_window_ms,
        )
        self._record_decision(session, decision, event.is_final)
        return decision

    def _record_decision(
        self, session: Session, decision: VoiceActionDecision, is_final: bool
    ) -> None:
        if decision.triggering_sequence in session.decided_sequences:
            raise SequenceError(
                f"sequence {decision.triggering_sequence} already decided"
            )
        session.decided_sequences.add(decision.triggering_sequence)
        session.decision_records.append((decision, is_final))
        session.recent_decisions.append(decision)
        del session.recent_decisions[:-50]

    def apply_deferred_decision(
        self, session: Session, decision: VoiceActionDecision, is_final: bool = False
    ) -> list[EngineAction]:
        """Re-entry point for backend replies computed off the event path.

        A reply tagged with anything older than the newest transcription
        update, or for a sequence already decided, is dropped before
        application — late replies never reorder the decision stream.
        """
        if (
            decision.triggering_sequence < session.latest_sequence
            or decision.triggering_sequence in session.decided_sequences
        ):
            return []
        self._record_decision(session, decision, is_final)
        return self._decision_actions(session, decision)

    def _decision_actions(
        self, session: Session, decision: VoiceActionDecision
    ) -> list[EngineAction]:
        actions: list[EngineAction] = []
        if decision.action in (VoiceActionType.NOD, VoiceActionType.NOD_BACKCHANNEL):
            actions.append(self._emit(session, NodCmd))
        if decision.action is VoiceActionType.NOD_BACKCHANNEL:
            actions.append(
                self._emit(session, BackchannelCmd, token=decision.backchannel_text)
            )
        return actions

    def _handle_partial(self, session: Session, event: AsrEvent) -> list[EngineAction]:
        self._check_sequence(session, event)
        self._barge_in(session, event)
        decision = self._decide(session, event)
        actions = self._decision_actions(session, decision)
        if decision.action is VoiceActionType.RESPONSE:
            # Only reachable with --early-response and a backend that fires
            # on partials; the matching final is then answered silently.
            session.consumed_utterance = event.partial_text.strip()
            actions.extend(self._respond(session, event.partial_text, event))
        return actions

    def _handle_final(self, session: Session, event: AsrEvent) -> list[EngineAction]:
        self._check_sequence(session, event)
        self._decide(session, event)
        consumed = session.consumed_utterance
        session.consumed_utterance = None
        if consumed is not None and consumed == event.partial_text.strip():
            return []
        return self._respond(session, event.partial_text, event)

    # -- response pipeline ----------------------------------------------------

    def _respond(
        self, session: Session, utterance: str, event: AsrEvent
    ) -> list[EngineAction]:
        turn = session.history.append_user(utterance)
        extracted: list[Preference] = []
        if utterance.strip():
            extracted = extract_preferences(
                utterance,
                session.history,
                self.backend,
                turn=turn.index,
                template=self.prompts["extract_preferences"],
                category_taxonomy=self.db.taxonomy,
            )
        active = session.tree.active_node
        candidates = [c for c in extracted if not active.contains(c)]

        results = search_spots(
            build_query(session.tree),
            self.db,
            limit=self.config.search_limit,
            weights=self.config.weights,
        )
        das = generate_candidate_das(
            results,
            session.tree,
            session.history,
            candidates,
            top_k=self.config.top_k,
        )
        act = select_da(
            das,
            utterance,
            session.history,
            self.backend,
            template=self.prompts["select_da"],
        )
        response = realize_response(
            act,
            session.history,
            self.backend,
            templates=self.templates,
            prompt=self.prompts["realize_response"],
        )
        accepted = filter_accepted(
            response,
            candidates,
            self.backend,
            template=self.prompts["filter_accepted"],
        )
        record_preferences(
            session.tree, accepted, turn.index, category_taxonomy=self.db.taxonomy
        )
        session.history.append_system(response, act)
        session.last_turn_report = TurnReport(
            extracted=tuple(extracted),
            candidates=tuple(candidates),
            accepted=tuple(accepted),
        )

        chunks = segment_into_chunks(response)
        self._retire_delivery(session)
        session.delivery = start_delivery(chunks)

        actions = [
            self._emit(session, QueryUpdate, query=build_query(session.tree)),
            self._emit(session, GroundUpdate, tree=session.tree.to_dict()),
            self._emit(
                session,
                ResultsUpdate,
                results=tuple(
                    search_spots(
                        build_query(session.tree),
                        self.db,
                        limit=self.config.search_limit,
                        weights=self.config.weights,
                    )
                ),
            ),
            self._speak(session, chunks[0]),
        ]
        self._arm_silence_timer(session, event.timestamp_ms)
        return actions

    # -- delivery pacing --------------------------------------------------------

    def _handle_ack(self, session: Session, event: AckEvent) -> list[EngineAction]:
        if session.delivery is None:
            return []
        session.delivery, chunk = on_ack(session.delivery, event)
        if chunk is None:
            return []
        actions = [self._speak(session, chunk)]
        self._arm_silence_timer(session, event.timestamp_ms)
        return actions

    def _handle_timer(self, session: Session, event: TimerEvent) -> list[EngineAction]:
        if event.due_ms != session.silence_deadline_ms:
            return []  # stale timer, superseded by an ack or a new response
        return self._handle_ack(
            session,
            AckEvent(
                session_id=session.id,
                kind=AckKind.SILENCE_TIMEOUT,
                timestamp_ms=event.due_ms,
            ),
        )

    def _barge_in(self, session: Session, event: AsrEvent) -> None:
        if session.delivery is None or not session.delivery.pending_chunks:
            return
        updated = on_barge_in(
            session.delivery, event, min_tokens=self.config.min_barge_in_tokens
        )
        if updated is not session.delivery:
            session.delivery = updated
            session.silence_deadline_ms = None

    def _retire_delivery(self, session: Session) -> None:
        """Fold the previous delivery into session totals, cancelling leftovers."""
        state = session.delivery
        if state is None:
            return
        session.archived_started += state.started_count
        session.archived_delivered += state.delivered_count
        session.archived_cancelled += state.cancelled_count + len(
            state.pending_chunks
        )
        session.delivery = None
        session.silence_deadline_ms = None

    def _arm_silence_timer(self, session: Session, now_ms: int) -> None:
        if session.delivery is not None and session.delivery.pending_chunks:
            session.silence_deadline_ms = now_ms + self.config.silence_timeout_ms
        else:
            session.silence_deadline_ms = None

    def _speak(self, session: Session, chunk: str) -> Speak:
        expression, motion = classify(chunk)
        return self._emit(
            session,
            Speak,
            text=chunk,
            expression=expression.value,
            motion=motion.value,
        )

    def _emit(self, session: Session, action_cls, **payload) -> EngineAction:
        action = action_cls(
            session_id=session.id, index=session.action_index, **payload
        )
        session.action_index += 1
        return action


def create_session(config: EngineConfig) -> Session:
    """Build a single session on a fresh engine (convenience constructor)."""
    return Engine(config).create_session()
