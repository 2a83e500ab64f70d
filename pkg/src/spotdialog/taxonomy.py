"""Sightseeing-spot category vocabulary and keyword matching.

The offline rule layer is driven by two hand-maintained tables:

* a lexicon mapping surface phrases ("temple", "amusement park") to the
  category labels they signal, used both to extract preference candidates
  from user utterances and, in reverse, to decide whether a system response
  mentions a given preference;
* a gazetteer of free place-name terms that land in the ``other`` facet.

Matching is word-boundary based and case-insensitive.  When phrases overlap
in the text ("amusement parks" vs. a bare "parks"), the longer match wins
and the shorter one is suppressed, so compound phrases never leak their
constituent words as separate preferences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class Facet(str, Enum):
    """The four query facets a preference can belong to."""

    MAJOR = "major_category"
    SUB = "subcategory"
    MINOR = "minor_category"
    OTHER = "other"


@dataclass(frozen=True)
class CategoryTaxonomy:
    """Closed category vocabulary: majors, subs (with parent major), minors."""

    major: frozenset[str]
    sub: dict[str, str]  # sub label -> parent major label
    minor: frozenset[str]

    def __post_init__(self) -> None:
        for label, parent in self.sub.items():
            if parent not in self.major:
                raise ValueError(
                    f"subcategory {label!r} names unknown major {parent!r}"
                )

    def is_valid_label(self, facet: Facet, label: str) -> bool:
        if facet is Facet.MAJOR:
            return label in self.major
        if facet is Facet.SUB:
            return label in self.sub
        if facet is Facet.MINOR:
            return label in self.minor
        return bool(label.strip())  # free terms only need content

    def major_of(self, facet: Facet, label: str) -> str | None:
        """Major category a preference belongs to, if one can be derived."""
        if facet is Facet.MAJOR:
            return label if label in self.major else None
        if facet is Facet.SUB:
            return self.sub.get(label)
        return None


@dataclass(frozen=True)
class LexiconEntry:
    """Surface phrases and the facet/label pairs they signal."""

    phrases: tuple[str, ...]
    pairs: tuple[tuple[Facet, str], ...]


DEFAULT_TAXONOMY = CategoryTaxonomy(
    major=frozenset(
        {"Sightseeing", "Recreation", "Nature", "Dining", "Shopping"}
    ),
    sub={
        "Sightseeing -- Shrines and Temples": "Sightseeing",
        "Sightseeing -- Museums and Galleries": "Sightseeing",
        "Sightseeing -- Castles and Palaces": "Sightseeing",
        "Recreation -- Theme Park": "Recreation",
        "Recreation -- Hot Springs": "Recreation",
        "Nature -- Parks and Gardens": "Nature",
        "Nature -- Mountains and Valleys": "Nature",
        "Dining -- Local Cuisine": "Dining",
        "Shopping -- Markets and Streets": "Shopping",
    },
    minor=frozenset(
        {
            "Buildings and Historical Sites -- Historical Buildings",
            "Buildings and Historical Sites -- Castles",
            "Scenic Views -- Panoramic Views",
            "Family -- Attractions",
        }
    ),
)

DEFAULT_LEXICON: tuple[LexiconEntry, ...] = (
    LexiconEntry(
        phrases=("temple", "temples", "shrine", "shrines"),
        pairs=(
            (Facet.MAJOR, "Sightseeing"),
            (Facet.SUB, "Sightseeing -- Shrines and Temples"),
            (Facet.MINOR, "Buildings and Historical Sites -- Historical Buildings"),
        ),
    ),
    LexiconEntry(
        phrases=("amusement park", "amusement parks", "theme park", "theme parks"),
        pairs=(
            (Facet.MAJOR, "Recreation"),
            (Facet.SUB, "Recreation -- Theme Park"),
        ),
    ),
    LexiconEntry(
        phrases=("museum", "museums", "gallery", "galleries"),
        pairs=(
            (Facet.MAJOR, "Sightseeing"),
            (Facet.SUB, "Sightseeing -- Museums and Galleries"),
        ),
    ),
    LexiconEntry(
        phrases=("castle", "castles", "palace", "palaces"),
        pairs=(
            (Facet.MAJOR, "Sightseeing"),
            (Facet.SUB, "Sightseeing -- Castles and Palaces"),
            (Facet.MINOR, "Buildings and Historical Sites -- Castles"),
        ),
    ),
    LexiconEntry(
        phrases=("hot spring", "hot springs", "onsen"),
        pairs=(
            (Facet.MAJOR, "Recreation"),
            (Facet.SUB, "Recreation -- Hot Springs"),
        ),
    ),
    LexiconEntry(
        phrases=("garden", "gardens", "bamboo grove"),
        pairs=(
            (Facet.MAJOR, "Nature"),
            (Facet.SUB, "Nature -- Parks and Gardens"),
        ),
    ),
    LexiconEntry(
        phrases=("mountain", "mountains", "valley", "hiking"),
        pairs=(
            (Facet.MAJOR, "Nature"),
            (Facet.SUB, "Nature -- Mountains and Valleys"),
        ),
    ),
    LexiconEntry(
        phrases=("market", "markets", "shopping street", "shopping"),
        pairs=(
            (Facet.MAJOR, "Shopping"),
            (Facet.SUB, "Shopping -- Markets and Streets"),
        ),
    ),
    LexiconEntry(
        phrases=("restaurant", "restaurants", "local food", "cuisine"),
        pairs=(
            (Facet.MAJOR, "Dining"),
            (Facet.SUB, "Dining -- Local Cuisine"),
        ),
    ),
    # Place-name gazetteer: free terms for the "other" facet.  Kept to place
    # names on purpose; scenery words like "autumn leaves" stay out so the
    # extractor does not flood the query with every descriptive phrase.
    LexiconEntry(phrases=("kyoto",), pairs=((Facet.OTHER, "Kyoto"),)),
    LexiconEntry(phrases=("osaka",), pairs=((Facet.OTHER, "Osaka"),)),
    LexiconEntry(phrases=("tokyo",), pairs=((Facet.OTHER, "Tokyo"),)),
    LexiconEntry(phrases=("nara",), pairs=((Facet.OTHER, "Nara"),)),
    LexiconEntry(phrases=("hakone",), pairs=((Facet.OTHER, "Hakone"),)),
    LexiconEntry(phrases=("kobe",), pairs=((Facet.OTHER, "Kobe"),)),
    LexiconEntry(phrases=("hiroshima",), pairs=((Facet.OTHER, "Hiroshima"),)),
    LexiconEntry(phrases=("arashiyama",), pairs=((Facet.OTHER, "Arashiyama"),)),
)


def _phrase_pattern(phrase: str) -> re.Pattern[str]:
    return re.compile(r"\b" + re.escape(phrase) + r"\b", re.IGNORECASE)


_PATTERN_CACHE: dict[str, re.Pattern[str]] = {}


def _pattern(phrase: str) -> re.Pattern[str]:
    pat = _PATTERN_CACHE.get(phrase)
    if pat is None:
        pat = _PATTERN_CACHE[phrase] = _phrase_pattern(phrase)
    return pat


def match_preferences(
    text: str, lexicon: tuple[LexiconEntry, ...] = DEFAULT_LEXICON
) -> list[tuple[Facet, str]]:
    """Scan ``text`` for lexicon phrases and return the signalled pairs.

    Matches are resolved left to right; overlapping matches keep the longest
    span.  The resulting pairs are de-duplicated case-insensitively while
    preserving first-occurrence order.
    """
    spans: list[tuple[int, int, LexiconEntry]] = []
    for entry in lexicon:
        for phrase in entry.phrases:
            for m in _pattern(phrase).finditer(text):
                spans.append((m.start(), m.end(), entry))
    spans.sort(key=lambda s: (s[0], -(s[1] - s[0])))

    pairs: list[tuple[Facet, str]] = []
    seen: set[tuple[Facet, str]] = set()
    last_end = -1
    for start, end, entry in spans:
        if start < last_end:
            continue  # covered by a longer, earlier match
        last_end = end
        for facet, label in entry.pairs:
            key = (facet, label.casefold())
            if key not in seen:
                seen.add(key)
                pairs.append((facet, label))
    return pairs


def _synonym_index(
    lexicon: tuple[LexiconEntry, ...],
) -> dict[tuple[Facet, str], tuple[str, ...]]:
    index: dict[tuple[Facet, str], list[str]] = {}
    for entry in lexicon:
        for facet, label in entry.pairs:
            index.setdefault((facet, label.casefold()), []).extend(entry.phrases)
    return {k: tuple(v) for k, v in index.items()}


_SYNONYMS = _synonym_index(DEFAULT_LEXICON)


def mentions(
    response: str,
    facet: Facet,
    value: str,
    lexicon: tuple[LexiconEntry, ...] = DEFAULT_LEXICON,
) -> bool:
    """True if the response text names the value or one of its synonyms."""
    if value.casefold() in response.casefold():
        return True
    synonyms = (
        _SYNONYMS if lexicon is DEFAULT_LEXICON else _synonym_index(lexicon)
    ).get((facet, value.casefold()), ())
    return any(_pattern(p).search(response) for p in synonyms)


def accepted_pairs(
    response: str,
    pairs: list[tuple[Facet, str]],
    lexicon: tuple[LexiconEntry, ...] = DEFAULT_LEXICON,
) -> list[tuple[Facet, str]]:
    """Subset of ``pairs`` the response text grounds, in input order."""
    return [
        (facet, value)
        for facet, value in pairs
        if mentions(response, facet, value, lexicon)
    ]
