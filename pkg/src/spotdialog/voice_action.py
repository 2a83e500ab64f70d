"""Per-update voice-action selection and paced chunk delivery.

Every revision of the in-progress transcription gets exactly one decision:
speak a full response, nod, nod with a short backchannel token, or do
nothing.  Decisions then pass through an arbitration step that suppresses
nod-family actions fired too soon after the previous audible action, so the
agent never bobs its head in a rapid burst no matter how fast partials
arrive.

Responses are delivered one clause-sized chunk at a time: the first chunk
goes out immediately, every following chunk waits for an acknowledgment
(user nod, backchannel, or a silence timeout), and a substantive new user
utterance cancels whatever is still pending.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Sequence

from .history import DialogueHistory
from .llm_backend import (
    BackendError,
    LlmBackend,
    PromptTemplate,
)


class VoiceActionType(str, Enum):
    RESPONSE = "response"
    NOD = "nod"
    NOD_BACKCHANNEL = "nod_backchannel"
    NONE = "none"


class AckKind(str, Enum):
    USER_NOD = "user_nod"
    USER_BACKCHANNEL = "user_backchannel"
    SILENCE_TIMEOUT = "silence_timeout"


@dataclass(frozen=True)
class AsrEvent:
    """One revision of the transcription in progress."""

    session_id: str
    partial_text: str
    is_final: bool
    sequence: int
    timestamp_ms: int


@dataclass(frozen=True)
class AckEvent:
    session_id: str
    kind: AckKind
    timestamp_ms: int


@dataclass(frozen=True)
class VoiceActionDecision:
    action: VoiceActionType
    triggering_sequence: int
    backchannel_text: str | None = None
    at_ms: int = 0

    def __post_init__(self) -> None:
        needs_token = self.action is VoiceActionType.NOD_BACKCHANNEL
        if needs_token and not self.backchannel_text:
            raise ValueError("nod_backchannel requires a backchannel token")
        if not needs_token and self.backchannel_text is not None:
            raise ValueError(
                f"{self.action.value} must not carry a backchannel token"
            )


DEFAULT_BACKCHANNEL_TOKENS: tuple[str, ...] = ("uh-huh", "I see", "right")

VOICE_ACTION_TEMPLATE = PromptTemplate(
    name="voice_action",
    text=(
        "Transcription in progress (final={is_final}, update #{sequence}, "
        "{new_tokens} new words since the last cue):\n{partial_text}\n\n"
        "Should the listener respond, nod, nod with a short backchannel, or "
        "stay still? Answer 'action: <response|nod|nod_backchannel|none>' "
        "and, for a backchannel, 'backchannel: <token>'."
    ),
    output_schema="action: <label> [backchannel: <token>]",
)

_CUE_MARKERS = re.compile(r"[?!？！]\s*$")
_CLAUSE_END = re.compile(r"[,、]\s*$")


def rule_decide(
    partial_text: str,
    is_final: bool,
    new_tokens: int,
    *,
    token_threshold: int = 8,
) -> str:
    """Offline decision rule; also the stub backend's behavior.

    Finals always answer.  A partial ending on a question or emphatic mark
    earns a backchannel (the stronger cue wins over the plain clause
    boundary); a partial ending on a comma, or one that has grown by at
    least ``token_threshold`` words since the last audible cue, earns a nod;
    anything else stays silent.
    """
    if is_final:
        return VoiceActionType.RESPONSE.value
    stripped = partial_text.rstrip()
    if not stripped:
        return VoiceActionType.NONE.value
    if _CUE_MARKERS.search(stripped):
        return VoiceActionType.NOD_BACKCHANNEL.value
    if _CLAUSE_END.search(stripped) or new_tokens >= token_threshold:
        return VoiceActionType.NOD.value
    return VoiceActionType.NONE.value


class VoiceActionSelector:
    """Per-session decision maker over the stream of transcription updates.

    Tracks how many words the current utterance had at the last audible cue
    so the growth rule fires at most once per burst; the counter resets when
    an utterance finalizes.  Backend trouble of any kind degrades to a
    ``none`` decision — never to a stall.
    """

    def __init__(
        self,
        backend: LlmBackend,
        *,
        template: PromptTemplate = VOICE_ACTION_TEMPLATE,
        token_threshold: int = 8,
        backchannel_tokens: Sequence[str] = DEFAULT_BACKCHANNEL_TOKENS,
    ):
        self._backend = backend
        self._template = template
        self._token_threshold = token_threshold
        self._tokens = tuple(backchannel_tokens)
        self._tokens_at_last_cue = 0

    def decide(self, history: DialogueHistory, event: AsrEvent) -> VoiceActionDecision:
        token_count = len(event.partial_text.split())
        new_tokens = max(0, token_count - self._tokens_at_last_cue)
        bindings: Mapping[str, object] = {
            "partial_text": event.partial_text,
            "is_final": event.is_final,
            "sequence": event.sequence,
            "new_tokens": new_tokens,
        }
        action = VoiceActionType.NONE
        token: str | None = None
        try:
            result = self._backend.complete(self._template, bindings)
            label = result.first("action") or ""
            action = VoiceActionType(label)
            if action is VoiceActionType.NOD_BACKCHANNEL:
                token = result.first("backchannel")
                if not token:
                    raise ValueError("backchannel token missing")
        except (BackendError, ValueError):
            action = VoiceActionType.NONE
            token = None

        if event.is_final:
            self._tokens_at_last_cue = 0
        elif action is not VoiceActionType.NONE:
            self._tokens_at_last_cue = token_count
        return VoiceActionDecision(
            action=action,
            triggering_sequence=event.sequence,
            backchannel_text=token,
            at_ms=event.timestamp_ms,
        )


def arbitrate(
    decision: VoiceActionDecision,
    recent: Sequence[VoiceActionDecision],
    now_ms: int,
    *,
    window_ms: int = 1500,
) -> VoiceActionDecision:
    """Suppress nod-family actions fired inside the rate window.

    Responses always pass.  Idempotent: arbitrating an output again (with
    the same history) yields itself.
    """
    if decision.action in (VoiceActionType.NOD, VoiceActionType.NOD_BACKCHANNEL):
        last_audible = next(
            (
                d
                for d in reversed(recent)
                if d.action is not VoiceActionType.NONE
                and d.triggering_sequence != decision.triggering_sequence
            ),
            None,
        )
        if last_audible is not None and now_ms - last_audible.at_ms < window_ms:
            return replace(
                decision, action=VoiceActionType.NONE, backchannel_text=None
            )
    return decision


@dataclass(frozen=True)
class DeliveryState:
    """Progress of one chunked response."""

    pending_chunks: tuple[str, ...]
    delivered_count: int
    awaiting_ack: bool
    started_count: int
    cancelled_count: int = 0

    def __post_init__(self) -> None:
        if self.delivered_count + self.cancelled_count + len(
            self.pending_chunks
        ) != self.started_count:
            raise ValueError("delivery accounting does not balance")
        if self.awaiting_ack and (
            self.delivered_count < 1 or not self.pending_chunks
        ):
            raise ValueError("awaiting_ack requires progress and pending chunks")

    @property
    def complete(self) -> bool:
        return not self.pending_chunks


def start_delivery(chunks: Sequence[str]) -> DeliveryState:
    """Begin delivery; the caller speaks ``chunks[0]`` immediately."""
    if not chunks:
        raise ValueError("start_delivery requires at least one chunk")
    rest = tuple(chunks[1:])
    return DeliveryState(
        pending_chunks=rest,
        delivered_count=1,
        awaiting_ack=bool(rest),
        started_count=len(chunks),
    )


def on_ack(
    state: DeliveryState, ack: AckEvent
) -> tuple[DeliveryState, str | None]:
    """Release the next chunk, if any; acks with nothing pending are ignored."""
    if not state.pending_chunks:
        return state, None
    chunk, *rest = state.pending_chunks
    new_state = DeliveryState(
        pending_chunks=tuple(rest),
        delivered_count=state.delivered_count + 1,
        awaiting_ack=bool(rest),
        started_count=state.started_count,
        cancelled_count=state.cancelled_count,
    )
    return new_state, chunk


def on_barge_in(
    state: DeliveryState, event: AsrEvent, *, min_tokens: int = 3
) -> DeliveryState:
    """Cancel pending chunks when a substantive new utterance starts."""
    if len(event.partial_text.split()) < min_tokens or not state.pending_chunks:
        return state
    return DeliveryState(
        pending_chunks=(),
        delivered_count=state.delivered_count,
        awaiting_ack=False,
        started_count=state.started_count,
        cancelled_count=state.cancelled_count + len(state.pending_chunks),
    )


def format_decision_line(decision: VoiceActionDecision, is_final: bool) -> str:
    """Byte-stable log line for one arbitrated decision."""
    kind = "final" if is_final else "partial"
    parts = [
        f"seq {decision.triggering_sequence}",
        kind,
        f"action={decision.action.value}",
    ]
    if decision.backchannel_text is not None:
        parts.append(f'bc="{decision.backchannel_text}"')
    parts.append(f"t={decision.at_ms}")
    return " ".join(parts)
