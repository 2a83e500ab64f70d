"""Wire schema: JSON encoding for client events and engine actions.

Client to server::

    {"type": "asr_partial" | "asr_final" | "ack", "session": ..., "text"?: ...,
     "kind"?: ..., "seq": ..., "t_ms": ...}

Server to client::

    {"type": "speak" | "nod" | "backchannel" | "query_update" |
     "ground_update" | "results_update", "session": ..., "idx": ..., "payload": ...}

Encoding is compact and key-sorted so logged action streams are byte-stable.
"""

from __future__ import annotations

import json

from .orchestrator import (
    BackchannelCmd,
    EngineAction,
    GroundUpdate,
    NodCmd,
    QueryUpdate,
    ResultsUpdate,
    Speak,
)
from .spot_search import SearchQuery, SpotRecord
from .voice_action import AckEvent, AckKind, AsrEvent


class WireError(ValueError):
    """A message did not match the schema."""


def encode_action(action: EngineAction) -> dict:
    if isinstance(action, Speak):
        kind = "speak"
        payload: dict = {
            "text": action.text,
            "expression": action.expression,
            "motion": action.motion,
        }
    elif isinstance(action, NodCmd):
        kind, payload = "nod", {}
    elif isinstance(action, BackchannelCmd):
        kind, payload = "backchannel", {"token": action.token}
    elif isinstance(action, QueryUpdate):
        kind, payload = "query_update", action.query.to_dict()
    elif isinstance(action, GroundUpdate):
        kind, payload = "ground_update", action.tree
    elif isinstance(action, ResultsUpdate):
        kind = "results_update"
        payload = {
            "results": [
                {**record.to_dict(), "score": score}
                for record, score in action.results
            ]
        }
    else:
        raise WireError(f"unencodable action {type(action).__name__}")
    return {
        "type": kind,
        "session": action.session_id,
        "idx": action.index,
        "payload": payload,
    }


def encode_action_json(action: EngineAction) -> str:
    return json.dumps(encode_action(action), sort_keys=True, separators=(",", ":"))


def decode_action(message: dict) -> EngineAction:
    try:
        kind = message["type"]
        session = message["session"]
        idx = message["idx"]
        payload = message["payload"]
    except (KeyError, TypeError) as exc:
        raise WireError(f"missing field: {exc}") from exc
    if kind == "speak":
        return Speak(
            session_id=session,
            index=idx,
            text=payload["text"],
            expression=payload["expression"],
            motion=payload["motion"],
        )
    if kind == "nod":
        return NodCmd(session_id=session, index=idx)
    if kind == "backchannel":
        return BackchannelCmd(session_id=session, index=idx, token=payload["token"])
    if kind == "query_update":
        return QueryUpdate(
            session_id=session, index=idx, query=SearchQuery.from_dict(payload)
        )
    if kind == "ground_update":
        return GroundUpdate(session_id=session, index=idx, tree=payload)
    if kind == "results_update":
        return ResultsUpdate(
            session_id=session,
            index=idx,
            results=tuple(
                (SpotRecord.from_dict(item), item["score"])
                for item in payload["results"]
            ),
        )
    raise WireError(f"unknown action type {kind!r}")


def decode_client_message(message: dict) -> AsrEvent | AckEvent:
    try:
        kind = message["type"]
        session = message["session"]
        seq = int(message["seq"])
        t_ms = int(message["t_ms"])
    except (KeyError, TypeError, ValueError) as exc:
        raise WireError(f"bad client message: {exc}") from exc
    if kind in ("asr_partial", "asr_final"):
        text = message.get("text", "")
        if not isinstance(text, str):
            raise WireError("text must be a string")
        return AsrEvent(
            session_id=session,
            partial_text=text,
            is_final=(kind == "asr_final"),
            sequence=seq,
            timestamp_ms=t_ms,
        )
    if kind == "ack":
        try:
            ack_kind = AckKind(message.get("kind", ""))
        except ValueError as exc:
            raise WireError(f"unknown ack kind {message.get('kind')!r}") from exc
        return AckEvent(session_id=session, kind=ack_kind, timestamp_ms=t_ms)
    raise WireError(f"unknown client message type {kind!r}")


def encode_client_message(event: AsrEvent | AckEvent, seq: int | None = None) -> dict:
    if isinstance(event, AsrEvent):
        return {
            "type": "asr_final" if event.is_final else "asr_partial",
            "session": event.session_id,
            "text": event.partial_text,
            "seq": event.sequence,
            "t_ms": event.timestamp_ms,
        }
    return {
        "type": "ack",
        "session": event.session_id,
        "kind": event.kind.value,
        "seq": seq if seq is not None else 0,
        "t_ms": event.timestamp_ms,
    }
