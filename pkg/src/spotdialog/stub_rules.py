"""Deterministic per-template rules backing the offline stub backend.

Each rule answers in the same wire shape a live model is asked for, so the
calling code parses stub and live replies identically.  The rules delegate
to the same pure helpers the callers use for their own failure fallbacks —
one source of truth per behavior.
"""

from __future__ import annotations

import re
from typing import Mapping, Sequence

from . import taxonomy as tx
from .dialogue_policy import priority_choice_index
from .llm_backend import StubBackend
from .voice_action import DEFAULT_BACKCHANNEL_TOKENS, VoiceActionType, rule_decide

_CANDIDATE_LINE = re.compile(r"^\s*\d+\.\s+(\w+)")
_PAIR_LINE = re.compile(r"^\s*(\w+):\s*(.+?)\s*$")


def _extract_rule(lexicon: tuple[tx.LexiconEntry, ...]):
    def rule(bindings: Mapping[str, str]) -> str:
        pairs = tx.match_preferences(bindings["utterance"], lexicon)
        return "\n".join(f"{facet.value}: {value}" for facet, value in pairs)

    return rule


def _filter_rule(lexicon: tuple[tx.LexiconEntry, ...]):
    facet_names = {f.value: f for f in tx.Facet}

    def rule(bindings: Mapping[str, str]) -> str:
        pairs: list[tuple[tx.Facet, str]] = []
        for line in bindings["candidates"].splitlines():
            match = _PAIR_LINE.match(line)
            if match and match.group(1) in facet_names:
                pairs.append((facet_names[match.group(1)], match.group(2)))
        accepted = tx.accepted_pairs(bindings["response"], pairs, lexicon)
        return "\n".join(f"{facet.value}: {value}" for facet, value in accepted)

    return rule


def _select_rule(bindings: Mapping[str, str]) -> str:
    labels = [
        m.group(1)
        for line in bindings["candidates"].splitlines()
        if (m := _CANDIDATE_LINE.match(line))
    ]
    if not labels:
        return "choice: 0"
    return f"choice: {priority_choice_index(labels) + 1}"


def _realize_rule(bindings: Mapping[str, str]) -> str:
    return bindings["baseline"]


def _voice_rule(tokens: Sequence[str], token_threshold: int):
    def rule(bindings: Mapping[str, str]) -> str:
        label = rule_decide(
            bindings["partial_text"],
            bindings["is_final"] == "true",
            int(bindings["new_tokens"]),
            token_threshold=token_threshold,
        )
        if label == VoiceActionType.NOD_BACKCHANNEL.value:
            token = tokens[int(bindings["sequence"]) % len(tokens)]
            return f"action: {label}\nbackchannel: {token}"
        return f"action: {label}"

    return rule


def build_stub_backend(
    *,
    lexicon: tuple[tx.LexiconEntry, ...] = tx.DEFAULT_LEXICON,
    backchannel_tokens: Sequence[str] = DEFAULT_BACKCHANNEL_TOKENS,
    token_threshold: int = 8,
) -> StubBackend:
    """Assemble the stub with every call site's rule registered."""
    return StubBackend(
        rules={
            "extract_preferences": _extract_rule(lexicon),
            "filter_accepted": _filter_rule(lexicon),
            "select_da": _select_rule,
            "realize_response": _realize_rule,
            "voice_action": _voice_rule(tuple(backchannel_tokens), token_threshold),
        }
    )
