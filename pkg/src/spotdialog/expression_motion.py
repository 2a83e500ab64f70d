"""Expression and motion labels for each system utterance.

Any classifier implementing the two-labels-out protocol can be plugged in;
the bundled baseline is a keyword/punctuation rule table, which is also the
fallback whenever an external classifier errors or returns labels outside
the closed sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence


class Expression(str, Enum):
    NEUTRAL = "neutral"
    SMILE = "smile"
    SURPRISED = "surprised"
    TROUBLED = "troubled"


class Motion(str, Enum):
    IDLE = "idle"
    NOD_MOTION = "nod_motion"
    POINT_DISPLAY = "point_display"
    BOW = "bow"
    GREET = "greet"


@dataclass(frozen=True)
class AnnotatedUtterance:
    text: str
    expression: Expression
    motion: Motion

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("annotated utterance text must be non-empty")


class ExpressionMotionClassifier(Protocol):
    """Text in, two label strings out."""

    def classify(self, text: str) -> tuple[str, str]:  # pragma: no cover
        ...


_FAREWELL = ("goodbye", "good bye", "enjoy your trip", "have a great trip", "thank you very much")
_GREETING = ("hello", "hi ", "hi!", "hi,", "welcome", "good morning", "good afternoon", "good evening")
_PROPOSAL = ("i recommend", "how about", "i suggest")
_TROUBLE = ("sorry", "i'm afraid", "i am afraid", "unfortunately", "not sure", "apolog")
_SURPRISE = ("wow", "amazing", "incredible")
_ACKNOWLEDGMENT = ("alright", "i see", "okay", "uh-huh", "understood", "right then")


class RuleClassifier:
    """Deterministic keyword/punctuation baseline; first matching rule wins."""

    def classify(self, text: str) -> tuple[str, str]:
        lowered = text.casefold()
        if any(marker in lowered for marker in _FAREWELL):
            return Expression.SMILE.value, Motion.BOW.value
        if any(marker in lowered for marker in _GREETING):
            return Expression.SMILE.value, Motion.GREET.value
        if any(marker in lowered for marker in _PROPOSAL):
            return Expression.SMILE.value, Motion.POINT_DISPLAY.value
        if any(marker in lowered for marker in _TROUBLE):
            return Expression.TROUBLED.value, Motion.IDLE.value
        if any(marker in lowered for marker in _SURPRISE) or lowered.rstrip().endswith("!"):
            return Expression.SURPRISED.value, Motion.IDLE.value
        if any(lowered.startswith(marker) for marker in _ACKNOWLEDGMENT):
            return Expression.NEUTRAL.value, Motion.NOD_MOTION.value
        return Expression.NEUTRAL.value, Motion.IDLE.value


_RULE_BASELINE = RuleClassifier()


def classify(
    utterance: str,
    classifier: ExpressionMotionClassifier | None = None,
) -> tuple[Expression, Motion]:
    """Classify one utterance; bad classifier output degrades to the rules."""
    if not utterance.strip():
        raise ValueError("utterance must be non-empty")
    chosen = classifier if classifier is not None else _RULE_BASELINE
    try:
        expression_label, motion_label = chosen.classify(utterance)
        return Expression(expression_label), Motion(motion_label)
    except Exception:
        expression_label, motion_label = _RULE_BASELINE.classify(utterance)
        return Expression(expression_label), Motion(motion_label)


def evaluate_classifier(
    classifier: ExpressionMotionClassifier,
    labeled: Sequence[AnnotatedUtterance],
) -> tuple[float, float]:
    """Exact-match accuracy pair (expression, motion) over a labeled set."""
    if not labeled:
        raise ValueError("evaluation requires a non-empty labeled list")
    expression_hits = 0
    motion_hits = 0
    for item in labeled:
        expression, motion = classify(item.text, classifier)
        expression_hits += expression is item.expression
        motion_hits += motion is item.motion
    return expression_hits / len(labeled), motion_hits / len(labeled)
