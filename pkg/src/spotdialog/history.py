"""Dialogue history: the ordered turn record shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:  # pragma: no cover
    from .dialogue_policy import DialogueAct


class Speaker(str, Enum):
    USER = "user"
    SYSTEM = "system"


@dataclass(frozen=True)
class Turn:
    speaker: Speaker
    text: str
    index: int
    act: Optional["DialogueAct"] = None


@dataclass
class DialogueHistory:
    """Append-only turn list with strictly increasing indices."""

    turns: list[Turn] = field(default_factory=list)

    def _next_index(self) -> int:
        return self.turns[-1].index + 1 if self.turns else 0

    def append_user(self, text: str) -> Turn:
        turn = Turn(Speaker.USER, text, self._next_index())
        self.turns.append(turn)
        return turn

    def append_system(self, text: str, act: Optional["DialogueAct"] = None) -> Turn:
        turn = Turn(Speaker.SYSTEM, text, self._next_index(), act)
        self.turns.append(turn)
        return turn

    def last_user_text(self) -> str:
        for turn in reversed(self.turns):
            if turn.speaker is Speaker.USER:
                return turn.text
        return ""

    def tail_text(self, n: int = 6) -> str:
        """Last ``n`` turns as prompt-ready lines."""
        return "\n".join(
            f"{t.speaker.value}: {t.text}" for t in self.turns[-n:]
        )

    def __len__(self) -> int:
        return len(self.turns)
