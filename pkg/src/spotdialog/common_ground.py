"""Shared-information record: extract, accept, and store user preferences.

Preferences move through three gates each turn: candidates are extracted
from the user's utterance, only those the system's own response grounds are
accepted, and accepted preferences are recorded in a topic-branching tree.
The tree grows one child of the root per major-category episode, so a change
of topic ("now amusement parks instead of temples") opens a fresh branch and
the active query stops carrying the old branch's facets.

Nothing is ever deleted: the preference count is monotone over a session.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

from . import taxonomy as tx
from .history import DialogueHistory
from .llm_backend import (
    BackendError,
    CompletionResult,
    LlmBackend,
    PromptTemplate,
)

Facet = tx.Facet

EXTRACT_TEMPLATE = PromptTemplate(
    name="extract_preferences",
    text=(
        "Conversation so far:\n{history}\n\n"
        "List every sightseeing preference stated in the visitor's latest "
        "message, one per line as 'facet: value'. Facets: major_category, "
        "subcategory, minor_category, other.\n\nMessage: {utterance}"
    ),
    output_schema="lines of 'facet: value'",
)

FILTER_TEMPLATE = PromptTemplate(
    name="filter_accepted",
    text=(
        "The clerk replied:\n{response}\n\n"
        "Which of these candidate preferences does the reply explicitly take "
        "up? Answer with the matching 'facet: value' lines only.\n\n"
        "Candidates:\n{candidates}"
    ),
    output_schema="subset of the candidate lines",
)

_GENERAL_TOPIC = "general"
_WS = re.compile(r"\s+")


class PreferenceStatus(str, Enum):
    EXTRACTED = "extracted"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class Preference:
    """One facet/value pair attributed to a user turn."""

    facet: Facet
    value: str
    source_turn: int
    status: PreferenceStatus = PreferenceStatus.EXTRACTED

    def __post_init__(self) -> None:
        normalized = _WS.sub(" ", self.value.strip())
        if not normalized:
            raise ValueError("preference value must be non-empty")
        if self.source_turn < 0:
            raise ValueError("source_turn must be >= 0")
        object.__setattr__(self, "value", normalized)

    @property
    def key(self) -> tuple[Facet, str]:
        """Case-insensitive identity used for all subset/duplicate checks."""
        return (self.facet, self.value.casefold())


@dataclass
class TopicNode:
    topic_key: str
    created_turn: int
    preferences: list[Preference] = field(default_factory=list)
    children: list["TopicNode"] = field(default_factory=list)

    def contains(self, pref: Preference) -> bool:
        return any(p.key == pref.key for p in self.preferences)

    def child_by_key(self, topic_key: str) -> "TopicNode | None":
        for child in self.children:
            if child.topic_key == topic_key:
                return child
        return None

    def to_dict(self) -> dict:
        return {
            "topic_key": self.topic_key,
            "created_turn": self.created_turn,
            "preferences": [
                {"facet": p.facet.value, "value": p.value, "source_turn": p.source_turn}
                for p in self.preferences
            ],
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class CommonGroundTree:
    """Topic tree plus the path to the currently active topic node."""

    root: TopicNode
    active_path: list[TopicNode]

    @classmethod
    def fresh(cls) -> "CommonGroundTree":
        root = TopicNode(topic_key="root", created_turn=0)
        return cls(root=root, active_path=[root])

    @property
    def active_node(self) -> TopicNode:
        return self.active_path[-1]

    def nodes(self) -> list[TopicNode]:
        out: list[TopicNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(node.children))
        return out

    def preference_count(self) -> int:
        return sum(len(n.preferences) for n in self.nodes())

    def to_dict(self) -> dict:
        return {
            "root": self.root.to_dict(),
            "active_path": [n.topic_key for n in self.active_path],
        }


def rule_extract(
    utterance: str,
    turn: int,
    lexicon: tuple[tx.LexiconEntry, ...] = tx.DEFAULT_LEXICON,
) -> list[Preference]:
    """Keyword-rule extractor; also the stub backend's behavior."""
    return [
        Preference(facet=facet, value=value, source_turn=turn)
        for facet, value in tx.match_preferences(utterance, lexicon)
    ]


def rule_filter(
    system_response: str, candidates: list[Preference]
) -> list[Preference]:
    """Accept a candidate iff the response names its value or a synonym."""
    return [
        replace(c, status=PreferenceStatus.ACCEPTED)
        for c in candidates
        if tx.mentions(system_response, c.facet, c.value)
    ]


def serialize_candidates(candidates: list[Preference]) -> str:
    return "\n".join(f"{c.facet.value}: {c.value}" for c in candidates)


def _pairs_from_result(result: CompletionResult) -> list[tuple[Facet, str]]:
    facet_names = {f.value: f for f in Facet}
    pairs: list[tuple[Facet, str]] = []
    for key, value in result.fields:
        facet = facet_names.get(key)
        if facet is None:
            continue  # unrelated reply line
        pairs.append((facet, value))
    return pairs


def extract_preferences(
    user_utterance: str,
    history: DialogueHistory,
    backend: LlmBackend,
    *,
    turn: int | None = None,
    template: PromptTemplate = EXTRACT_TEMPLATE,
    category_taxonomy: tx.CategoryTaxonomy = tx.DEFAULT_TAXONOMY,
) -> list[Preference]:
    """Extract preference candidates from a finalized utterance.

    Backend failures fall back to the keyword-rule extractor; the turn never
    aborts.  Category labels the taxonomy does not know are dropped.
    """
    if not user_utterance.strip():
        raise ValueError("utterance must be non-empty and finalized")
    if turn is None:
        turn = history.turns[-1].index if history.turns else 0

    bindings: Mapping[str, object] = {
        "utterance": user_utterance,
        "history": history.tail_text(),
    }
    try:
        result = backend.complete(template, bindings)
        pairs = _pairs_from_result(result)
    except BackendError:
        return rule_extract(user_utterance, turn)

    out: list[Preference] = []
    seen: set[tuple[Facet, str]] = set()
    for facet, value in pairs:
        if facet is not Facet.OTHER and not category_taxonomy.is_valid_label(
            facet, value
        ):
            continue
        pref = Preference(facet=facet, value=value, source_turn=turn)
        if pref.key not in seen:
            seen.add(pref.key)
            out.append(pref)
    return out


def filter_accepted(
    system_response: str,
    candidates: list[Preference],
    backend: LlmBackend,
    *,
    template: PromptTemplate = FILTER_TEMPLATE,
) -> list[Preference]:
    """Keep only the candidates the system response grounds.

    The result is always a subset of ``candidates`` (facet+value identity),
    with status flipped to accepted.
    """
    for c in candidates:
        if c.status is not PreferenceStatus.EXTRACTED:
            raise ValueError("filter_accepted expects extracted candidates")
    if not candidates:
        return []

    bindings: Mapping[str, object] = {
        "response": system_response,
        "candidates": serialize_candidates(candidates),
    }
    try:
        result = backend.complete(template, bindings)
        accepted_keys = {
            (facet, value.casefold()) for facet, value in _pairs_from_result(result)
        }
    except BackendError:
        return rule_filter(system_response, candidates)
    return [
        replace(c, status=PreferenceStatus.ACCEPTED)
        for c in candidates
        if c.key in accepted_keys
    ]


def _dominant_major(
    accepted: list[Preference], category_taxonomy: tx.CategoryTaxonomy
) -> str | None:
    votes: dict[str, int] = {}
    for pref in accepted:
        major = category_taxonomy.major_of(pref.facet, pref.value)
        if major is not None:
            votes[major] = votes.get(major, 0) + 1
    if not votes:
        return None
    best = max(votes.values())
    winners = [major for major, count in votes.items() if count == best]
    return winners[0] if len(winners) == 1 else None  # tie keeps current topic


def record_preferences(
    tree: CommonGroundTree,
    accepted: list[Preference],
    turn: int,
    *,
    category_taxonomy: tx.CategoryTaxonomy = tx.DEFAULT_TAXONOMY,
) -> CommonGroundTree:
    """Record accepted preferences, branching when the dominant major changes.

    Revisiting an earlier major category reactivates its node instead of
    creating a duplicate sibling.  Duplicates within the target node are
    skipped, so the total count never decreases and never double-counts.
    """
    for p in accepted:
        if p.status is not PreferenceStatus.ACCEPTED:
            raise ValueError("record_preferences expects accepted preferences")
    if not accepted:
        return tree

    active = tree.active_node
    dominant = _dominant_major(accepted, category_taxonomy)

    if dominant is not None and dominant != active.topic_key:
        target = tree.root.child_by_key(dominant)
        if target is None:
            target = TopicNode(topic_key=dominant, created_turn=turn)
            tree.root.children.append(target)
        tree.active_path = [tree.root, target]
    elif active is tree.root:
        # The root holds no preferences; pick a branch for facts that arrive
        # before any clear topic (tie or minor/other-only turns).
        fallback = next(
            (
                category_taxonomy.major_of(p.facet, p.value)
                for p in accepted
                if category_taxonomy.major_of(p.facet, p.value) is not None
            ),
            _GENERAL_TOPIC,
        )
        target = tree.root.child_by_key(fallback)
        if target is None:
            target = TopicNode(topic_key=fallback, created_turn=turn)
            tree.root.children.append(target)
        tree.active_path = [tree.root, target]
    else:
        target = active

    for pref in accepted:
        if not target.contains(pref):
            target.preferences.append(pref)
    return tree


def active_preferences(tree: CommonGroundTree) -> list[Preference]:
    """Preferences of the active topic node, in insertion order."""
    return list(tree.active_node.preferences)
