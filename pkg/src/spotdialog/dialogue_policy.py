"""Response generation in three steps: enumerate, select, realize.

A rule table first enumerates every dialogue act the system could say right
now (spot proposals and detail acts for the top-ranked results, a
confirmation for newly heard preferences, questions, a bare acknowledgment
that is always feasible).  The backend then picks one — but only ever by
index into that list, so an erratic model can never make the system say
something infeasible.  The chosen act is realized from an editable text
template and finally split into clause-sized chunks for paced delivery.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .common_ground import CommonGroundTree, Preference, active_preferences
from .history import DialogueHistory
from .llm_backend import (
    BackendError,
    LlmBackend,
    PromptTemplate,
    load_template_dir,
)
from .spot_search import SpotRecord
from .taxonomy import Facet


class DialogueActType(str, Enum):
    PROPOSE_SPOT = "propose_spot"
    INFORM_DESCRIPTION = "inform_description"
    INFORM_HOURS = "inform_hours"
    INFORM_FEE = "inform_fee"
    ASK_PREFERENCE = "ask_preference"
    CONFIRM_PREFERENCE = "confirm_preference"
    ACKNOWLEDGE = "acknowledge"
    ASK_NEXT_STEP = "ask_next_step"
    FAREWELL = "farewell"


# Offline selection order, highest first.  Among acts of the same type the
# earliest candidate (lowest spot rank) wins.
SELECTION_PRIORITY: tuple[str, ...] = (
    DialogueActType.FAREWELL.value,
    DialogueActType.CONFIRM_PREFERENCE.value,
    DialogueActType.PROPOSE_SPOT.value,
    DialogueActType.INFORM_DESCRIPTION.value,
    DialogueActType.INFORM_HOURS.value,
    DialogueActType.INFORM_FEE.value,
    DialogueActType.ASK_PREFERENCE.value,
    DialogueActType.ASK_NEXT_STEP.value,
    DialogueActType.ACKNOWLEDGE.value,
)

_SPOT_ACT_SLOTS: dict[DialogueActType, str] = {
    DialogueActType.PROPOSE_SPOT: "name",
    DialogueActType.INFORM_DESCRIPTION: "description",
    DialogueActType.INFORM_HOURS: "hours",
    DialogueActType.INFORM_FEE: "fee",
}

_FAREWELL_MARKERS = ("goodbye", "good bye", "bye", "see you", "that is all", "that's all")

_FACET_QUESTION: dict[Facet, str] = {
    Facet.MAJOR: "type of place",
    Facet.SUB: "specific kind of spot",
    Facet.MINOR: "particular feature",
    Facet.OTHER: "area or season",
}


@dataclass(frozen=True)
class DialogueAct:
    """A typed, content-bearing act; spot acts are bound to a record id."""

    act_type: DialogueActType
    spot_id: str | None = None
    content: Mapping[str, str] = field(default_factory=dict)
    feasibility_note: str = ""

    def __post_init__(self) -> None:
        slot = _SPOT_ACT_SLOTS.get(self.act_type)
        if slot is not None:
            if not self.spot_id:
                raise ValueError(f"{self.act_type.value} requires a spot_id")
            if not self.content.get(slot, "").strip():
                raise ValueError(
                    f"{self.act_type.value} requires non-empty slot {slot!r}"
                )
        elif self.spot_id is not None:
            raise ValueError(f"{self.act_type.value} must not carry a spot_id")


SELECT_TEMPLATE = PromptTemplate(
    name="select_da",
    text=(
        "Conversation so far:\n{history}\n\n"
        "Visitor's latest message: {utterance}\n\n"
        "Candidate acts:\n{candidates}\n\n"
        "Reply with the single best act as 'choice: <number>'."
    ),
    output_schema="choice: <1-based index>",
)

REALIZE_TEMPLATE = PromptTemplate(
    name="realize_response",
    text=(
        "Conversation so far:\n{history}\n\n"
        "Phrase the act '{act_type}' for the visitor. Keep every fact from "
        "the draft wording intact.\nDraft: {baseline}"
    ),
    output_schema="free text",
)


def _default_realization_templates() -> dict[str, PromptTemplate]:
    data_dir = resources.files("spotdialog").joinpath("data/templates")
    return load_template_dir(Path(str(data_dir)))


_TEMPLATE_CACHE: dict[str, PromptTemplate] | None = None


def realization_templates(
    directory: Path | str | None = None,
) -> dict[str, PromptTemplate]:
    """Load the per-act-type realization templates (all nine must exist)."""
    global _TEMPLATE_CACHE
    if directory is None:
        if _TEMPLATE_CACHE is None:
            _TEMPLATE_CACHE = _default_realization_templates()
        templates = _TEMPLATE_CACHE
    else:
        templates = load_template_dir(directory)
    missing = {t.value for t in DialogueActType} - set(templates)
    if missing:
        raise FileNotFoundError(
            "missing realization template(s): " + ", ".join(sorted(missing))
        )
    return templates


def generate_candidate_das(
    results: Sequence[tuple[SpotRecord, int]],
    tree: CommonGroundTree,
    history: DialogueHistory,
    new_candidates: Sequence[Preference] = (),
    *,
    top_k: int = 3,
) -> list[DialogueAct]:
    """Enumerate every act the system can say right now.

    Deterministic: confirmation for this turn's new candidates, then per
    top-ranked spot a proposal plus one detail act per non-empty field, then
    questions, then the unconditional acknowledgment.
    """
    acts: list[DialogueAct] = []

    last_user = history.last_user_text().casefold()
    if any(marker in last_user for marker in _FAREWELL_MARKERS):
        acts.append(
            DialogueAct(
                DialogueActType.FAREWELL,
                feasibility_note="visitor said goodbye",
            )
        )

    if new_candidates:
        values = ", ".join(p.value for p in new_candidates)
        acts.append(
            DialogueAct(
                DialogueActType.CONFIRM_PREFERENCE,
                content={"values": values},
                feasibility_note="new preferences heard this turn",
            )
        )

    for record, _score in list(results)[:top_k]:
        acts.append(
            DialogueAct(
                DialogueActType.PROPOSE_SPOT,
                spot_id=record.id,
                content={"name": record.name},
                feasibility_note="ranked search result",
            )
        )
        if record.description.strip():
            acts.append(
                DialogueAct(
                    DialogueActType.INFORM_DESCRIPTION,
                    spot_id=record.id,
                    content={"name": record.name, "description": record.description},
                    feasibility_note="record has a description",
                )
            )
        if record.opening_hours.strip():
            acts.append(
                DialogueAct(
                    DialogueActType.INFORM_HOURS,
                    spot_id=record.id,
                    content={"name": record.name, "hours": record.opening_hours},
                    feasibility_note="record has opening hours",
                )
            )
        if record.fee.strip():
            acts.append(
                DialogueAct(
                    DialogueActType.INFORM_FEE,
                    spot_id=record.id,
                    content={"name": record.name, "fee": record.fee},
                    feasibility_note="record has a fee",
                )
            )

    known_facets = {p.facet for p in active_preferences(tree)}
    unset = [f for f in Facet if f not in known_facets]
    if unset:
        acts.append(
            DialogueAct(
                DialogueActType.ASK_PREFERENCE,
                content={"facet": _FACET_QUESTION[unset[0]]},
                feasibility_note=f"facet {unset[0].value} still unset",
            )
        )

    if any(
        t.act is not None and t.act.act_type is DialogueActType.PROPOSE_SPOT
        for t in history.turns
    ):
        acts.append(
            DialogueAct(
                DialogueActType.ASK_NEXT_STEP,
                feasibility_note="a spot was proposed earlier",
            )
        )

    acts.append(
        DialogueAct(DialogueActType.ACKNOWLEDGE, feasibility_note="always sayable")
    )
    return acts


def serialize_acts(candidates: Sequence[DialogueAct]) -> str:
    lines = []
    for i, act in enumerate(candidates, start=1):
        spot = f" spot={act.spot_id}" if act.spot_id else ""
        lines.append(f"{i}. {act.act_type.value}{spot}")
    return "\n".join(lines)


def priority_choice_index(labels: Sequence[str]) -> int:
    """Index of the highest-priority label, earliest occurrence winning."""
    for wanted in SELECTION_PRIORITY:
        for i, label in enumerate(labels):
            if label == wanted:
                return i
    return 0


def select_da(
    candidates: Sequence[DialogueAct],
    user_utterance: str,
    history: DialogueHistory,
    backend: LlmBackend,
    *,
    template: PromptTemplate = SELECT_TEMPLATE,
) -> DialogueAct:
    """Pick one act from ``candidates`` — and only from ``candidates``.

    The backend answers with an index; anything unparsable, out of range, or
    erroring falls back to the documented priority order, so the returned
    act is a member of the list under every backend behavior.
    """
    if not candidates:
        raise ValueError("select_da requires a non-empty candidate list")

    bindings: Mapping[str, object] = {
        "utterance": user_utterance,
        "history": history.tail_text(),
        "candidates": serialize_acts(candidates),
    }
    try:
        result = backend.complete(template, bindings)
        raw = result.first("choice")
        choice = int(raw) if raw is not None else -1
        if 1 <= choice <= len(candidates):
            return candidates[choice - 1]
    except (BackendError, ValueError):
        pass
    return candidates[priority_choice_index([a.act_type.value for a in candidates])]


def realize_response(
    act: DialogueAct,
    history: DialogueHistory,
    backend: LlmBackend,
    *,
    templates: dict[str, PromptTemplate] | None = None,
    prompt: PromptTemplate = REALIZE_TEMPLATE,
) -> str:
    """Turn the act into text.

    The act's realization template filled from its content slots is the
    baseline; the backend may rephrase it, and any failure (or an empty
    reply) falls back to the baseline, which is never empty.
    """
    templates = templates if templates is not None else realization_templates()
    baseline = templates[act.act_type.value].render(dict(act.content))
    bindings: Mapping[str, object] = {
        "act_type": act.act_type.value,
        "baseline": baseline,
        "history": history.tail_text(),
    }
    try:
        result = backend.complete(prompt, bindings)
        text = result.text.strip()
        return text if text else baseline
    except BackendError:
        return baseline


_CHUNK_BOUNDARY = re.compile(r"(?<=[,.;:!?、。！？])\s+")


def segment_into_chunks(response: str) -> list[str]:
    """Split at clause punctuation followed by whitespace.

    Joining the chunks with single spaces reconstructs the response exactly,
    up to the whitespace runs the split consumed.
    """
    if not response.strip():
        raise ValueError("response must be non-empty")
    return [part for part in _CHUNK_BOUNDARY.split(response.strip()) if part]
