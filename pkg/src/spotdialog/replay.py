"""Transcript replay: drive a session from a timed event file.

Transcript format — one event per line::

    <t_ms> partial <seq> <text...>
    <t_ms> final   <seq> <text...>
    <t_ms> ack     <seq> <user_nod|user_backchannel|silence_timeout>

Lines starting with ``#expect action=<label>`` annotate the next event line
with the decision it should produce; other ``#`` lines are comments.
Sequence numbers must increase strictly down the file.

The clock is virtual: silence timers fire whenever their deadline falls at
or before the next event's timestamp, and any deadlines still pending when
the transcript ends are drained so every started delivery finishes.  The
decision log (one line per transcription update, in the byte-stable
``seq <n> <partial|final> action=<label> [bc="<token>"] t=<ms>`` format) is
written to ``out_path`` when given.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import EngineConfig
from .orchestrator import Engine, EngineAction, Session, TimerEvent
from .voice_action import AckEvent, AckKind, AsrEvent, format_decision_line
from .wire import encode_action_json

REPLAY_SESSION_ID = "replay"
_EVENT_KINDS = ("partial", "final", "ack")


class TranscriptError(ValueError):
    """A transcript line did not parse or validate."""


@dataclass(frozen=True)
class TranscriptEntry:
    event: AsrEvent | AckEvent
    expected_action: str | None
    line_no: int


@dataclass
class ReplayReport:
    decision_lines: list[str]
    actions: list[EngineAction]
    final_tree: dict
    matched: int
    mismatched: int
    mismatches: list[str]

    @property
    def ok(self) -> bool:
        return self.mismatched == 0

    def decision_log(self) -> str:
        return "".join(line + "\n" for line in self.decision_lines)


def parse_transcript(path: Path | str) -> list[TranscriptEntry]:
    path = Path(path)
    entries: list[TranscriptEntry] = []
    pending_expect: str | None = None
    last_seq = -1
    last_t = -1
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#expect"):
            body = line[len("#expect"):].strip()
            if not body.startswith("action="):
                raise TranscriptError(
                    f"line {line_no}: expected '#expect action=<label>'"
                )
            pending_expect = body[len("action="):].strip()
            continue
        if line.startswith("#"):
            continue

        parts = line.split(None, 3)
        if len(parts) < 3:
            raise TranscriptError(
                f"line {line_no}: expected '<t_ms> <kind> <seq> <text...>'"
            )
        t_raw, kind, seq_raw = parts[0], parts[1], parts[2]
        text = parts[3] if len(parts) > 3 else ""
        try:
            t_ms = int(t_raw)
            seq = int(seq_raw)
        except ValueError:
            raise TranscriptError(
                f"line {line_no}: t_ms and seq must be integers"
            ) from None
        if kind not in _EVENT_KINDS:
            raise TranscriptError(
                f"line {line_no}: unknown event kind {kind!r}"
            )
        if seq <= last_seq:
            raise TranscriptError(
                f"line {line_no}: sequence {seq} not after {last_seq}"
            )
        if t_ms < last_t:
            raise TranscriptError(
                f"line {line_no}: timestamp {t_ms} goes backwards"
            )
        last_seq, last_t = seq, t_ms

        event: AsrEvent | AckEvent
        if kind == "ack":
            try:
                ack_kind = AckKind(text.strip())
            except ValueError:
                raise TranscriptError(
                    f"line {line_no}: unknown ack kind {text.strip()!r}"
                ) from None
            event = AckEvent(
                session_id=REPLAY_SESSION_ID, kind=ack_kind, timestamp_ms=t_ms
            )
        else:
            event = AsrEvent(
                session_id=REPLAY_SESSION_ID,
                partial_text=text,
                is_final=(kind == "final"),
                sequence=seq,
                timestamp_ms=t_ms,
            )
        if pending_expect is not None and kind == "ack":
            raise TranscriptError(
                f"line {line_no}: '#expect' must precede a partial/final line"
            )
        entries.append(TranscriptEntry(event, pending_expect, line_no))
        pending_expect = None
    if pending_expect is not None:
        raise TranscriptError("trailing '#expect' with no event line")
    return entries


def _fire_due_timers(
    engine: Engine, session: Session, up_to_ms: int | None, actions: list[EngineAction]
) -> None:
    while True:
        due = engine.next_timer_due(session)
        if due is None or (up_to_ms is not None and due > up_to_ms):
            return
        actions.extend(
            engine.handle_event(
                session, TimerEvent(session_id=session.id, due_ms=due)
            )
        )


def replay_transcript(
    path: Path | str,
    config: EngineConfig,
    *,
    out_path: Path | str | None = None,
    actions_out: Path | str | None = None,
) -> ReplayReport:
    """Run the transcript through a fresh engine and report what happened."""
    entries = parse_transcript(path)
    engine = Engine(config)
    session = engine.create_session(REPLAY_SESSION_ID)

    actions: list[EngineAction] = []
    expectations: list[tuple[TranscriptEntry, int]] = []
    for entry in entries:
        _fire_due_timers(engine, session, entry.event.timestamp_ms, actions)
        if entry.expected_action is not None:
            expectations.append((entry, len(session.decision_records)))
        actions.extend(engine.handle_event(session, entry.event))
    _fire_due_timers(engine, session, None, actions)

    decision_lines = [
        format_decision_line(decision, is_final)
        for decision, is_final in session.decision_records
    ]

    matched = 0
    mismatches: list[str] = []
    for entry, record_pos in expectations:
        decision, _ = session.decision_records[record_pos]
        if decision.action.value == entry.expected_action:
            matched += 1
        else:
            mismatches.append(
                f"line {entry.line_no}: expected action={entry.expected_action}, "
                f"got {decision.action.value}"
            )

    report = ReplayReport(
        decision_lines=decision_lines,
        actions=actions,
        final_tree=session.tree.to_dict(),
        matched=matched,
        mismatched=len(mismatches),
        mismatches=mismatches,
    )
    if out_path is not None:
        Path(out_path).write_text(report.decision_log(), encoding="utf-8")
    if actions_out is not None:
        Path(actions_out).write_text(
            "".join(encode_action_json(a) + "\n" for a in actions),
            encoding="utf-8",
        )
    return report
