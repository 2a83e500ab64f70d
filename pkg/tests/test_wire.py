from __future__ import annotations

import json

import pytest

from spotdialog.orchestrator import (
    BackchannelCmd,
    GroundUpdate,
    NodCmd,
    QueryUpdate,
    ResultsUpdate,
    Speak,
)
from spotdialog.spot_search import SearchQuery, SpotRecord
from spotdialog.voice_action import AckEvent, AckKind, AsrEvent
from spotdialog.wire import (
    WireError,
    decode_action,
    decode_client_message,
    encode_action,
    encode_action_json,
    encode_client_message,
)

RECORD = SpotRecord(
    id="kyoto-001",
    name="Kiyomizu-dera Temple",
    major_categories=("Sightseeing",),
    subcategories=("Sightseeing -- Shrines and Temples",),
    minor_categories=("Buildings and Historical Sites -- Historical Buildings",),
    description="Hillside temple.",
    opening_hours="6:00-18:00",
    fee="400 yen",
    location_terms=("Kyoto",),
)

ACTIONS = [
    Speak(session_id="s", index=0, text="Alright then,", expression="neutral", motion="nod_motion"),
    NodCmd(session_id="s", index=1),
    BackchannelCmd(session_id="s", index=2, token="uh-huh"),
    QueryUpdate(
        session_id="s",
        index=3,
        query=SearchQuery(major_categories=("Sightseeing",), other=("Kyoto",)),
    ),
    GroundUpdate(session_id="s", index=4, tree={"root": {"topic_key": "root"}, "active_path": ["root"]}),
    ResultsUpdate(session_id="s", index=5, results=((RECORD, 7),)),
]


class TestActions:
    @pytest.mark.parametrize("action", ACTIONS, ids=lambda a: type(a).__name__)
    def test_round_trip(self, action):
        assert decode_action(encode_action(action)) == action

    def test_field_names_exact(self):
        message = encode_action(ACTIONS[0])
        assert set(message) == {"type", "session", "idx", "payload"}
        assert message["type"] == "speak"
        assert set(message["payload"]) == {"text", "expression", "motion"}

    def test_json_is_stable(self):
        assert encode_action_json(ACTIONS[0]) == encode_action_json(ACTIONS[0])
        parsed = json.loads(encode_action_json(ACTIONS[5]))
        assert parsed["payload"]["results"][0]["score"] == 7

    def test_unknown_type_rejected(self):
        with pytest.raises(WireError):
            decode_action({"type": "dance", "session": "s", "idx": 0, "payload": {}})

    def test_missing_field_rejected(self):
        with pytest.raises(WireError):
            decode_action({"type": "nod", "session": "s"})


class TestClientMessages:
    def test_partial_round_trip(self):
        event = AsrEvent(
            session_id="s", partial_text="Yes", is_final=False, sequence=3, timestamp_ms=120
        )
        message = encode_client_message(event)
        assert message["type"] == "asr_partial"
        assert decode_client_message(message) == event

    def test_final_round_trip(self):
        event = AsrEvent(
            session_id="s", partial_text="Yes.", is_final=True, sequence=9, timestamp_ms=880
        )
        message = encode_client_message(event)
        assert message["type"] == "asr_final"
        assert decode_client_message(message) == event

    def test_ack_round_trip(self):
        event = AckEvent(session_id="s", kind=AckKind.USER_NOD, timestamp_ms=500)
        message = encode_client_message(event, seq=4)
        assert message == {
            "type": "ack",
            "session": "s",
            "kind": "user_nod",
            "seq": 4,
            "t_ms": 500,
        }
        assert decode_client_message(message) == event

    def test_bad_ack_kind_rejected(self):
        with pytest.raises(WireError):
            decode_client_message(
                {"type": "ack", "session": "s", "kind": "wink", "seq": 1, "t_ms": 0}
            )

    def test_unknown_type_rejected(self):
        with pytest.raises(WireError):
            decode_client_message(
                {"type": "telepathy", "session": "s", "seq": 1, "t_ms": 0}
            )

    def test_missing_seq_rejected(self):
        with pytest.raises(WireError):
            decode_client_message({"type": "asr_partial", "session": "s", "t_ms": 0})
