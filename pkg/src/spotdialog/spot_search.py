"""Faceted sightseeing-spot search over a local tab-separated POI file.

A query is the active common-ground branch grouped by facet.  Scoring is a
weighted facet-match count (majors 3, subs 2, minors 1, free terms 1, the
last matched case-insensitively against name, description, and location
terms); results sort by score descending with ties broken by id ascending,
and zero-score records never appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import taxonomy as tx
from .common_ground import CommonGroundTree, active_preferences

Facet = tx.Facet

POI_FIELDS = (
    "id",
    "name",
    "major",
    "sub",
    "minor",
    "description",
    "opening_hours",
    "fee",
    "location_terms",
)


class SpotLoadError(ValueError):
    """Raised when the POI file does not parse or validate."""


@dataclass(frozen=True)
class SearchQuery:
    major_categories: tuple[str, ...] = ()
    subcategories: tuple[str, ...] = ()
    minor_categories: tuple[str, ...] = ()
    other: tuple[str, ...] = ()

    def is_empty(self) -> bool:
        return not (
            self.major_categories
            or self.subcategories
            or self.minor_categories
            or self.other
        )

    def validate(self, taxonomy: tx.CategoryTaxonomy) -> None:
        for facet, labels in (
            (Facet.MAJOR, self.major_categories),
            (Facet.SUB, self.subcategories),
            (Facet.MINOR, self.minor_categories),
        ):
            if len({l.casefold() for l in labels}) != len(labels):
                raise ValueError(f"duplicate label in {facet.value} list")
            for label in labels:
                if not taxonomy.is_valid_label(facet, label):
                    raise ValueError(f"unknown {facet.value} label {label!r}")
        if any(not term.strip() for term in self.other):
            raise ValueError("free terms must be non-empty")
        if len({t.casefold() for t in self.other}) != len(self.other):
            raise ValueError("duplicate free term")

    def to_dict(self) -> dict:
        return {
            "major_categories": list(self.major_categories),
            "subcategories": list(self.subcategories),
            "minor_categories": list(self.minor_categories),
            "other": list(self.other),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SearchQuery":
        return cls(
            major_categories=tuple(data.get("major_categories", ())),
            subcategories=tuple(data.get("subcategories", ())),
            minor_categories=tuple(data.get("minor_categories", ())),
            other=tuple(data.get("other", ())),
        )


@dataclass(frozen=True)
class SpotRecord:
    id: str
    name: str
    major_categories: tuple[str, ...]
    subcategories: tuple[str, ...]
    minor_categories: tuple[str, ...]
    description: str
    opening_hours: str
    fee: str
    location_terms: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "major_categories": list(self.major_categories),
            "subcategories": list(self.subcategories),
            "minor_categories": list(self.minor_categories),
            "description": self.description,
            "opening_hours": self.opening_hours,
            "fee": self.fee,
            "location_terms": list(self.location_terms),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpotRecord":
        return cls(
            id=data["id"],
            name=data["name"],
            major_categories=tuple(data.get("major_categories", ())),
            subcategories=tuple(data.get("subcategories", ())),
            minor_categories=tuple(data.get("minor_categories", ())),
            description=data.get("description", ""),
            opening_hours=data.get("opening_hours", ""),
            fee=data.get("fee", ""),
            location_terms=tuple(data.get("location_terms", ())),
        )


@dataclass(frozen=True)
class SearchWeights:
    major: int = 3
    sub: int = 2
    minor: int = 1
    other: int = 1


DEFAULT_WEIGHTS = SearchWeights()


@dataclass(frozen=True)
class SpotDatabase:
    """Immutable after load; safe for concurrent reads."""

    records: tuple[SpotRecord, ...]
    taxonomy: tx.CategoryTaxonomy = field(default=tx.DEFAULT_TAXONOMY)

    def __len__(self) -> int:
        return len(self.records)


def _split_multi(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split("|") if part.strip())


def load_spot_database(
    path: Path | str,
    taxonomy: tx.CategoryTaxonomy = tx.DEFAULT_TAXONOMY,
) -> SpotDatabase:
    """Load and validate the POI file (UTF-8, tab-separated, header line)."""
    path = Path(path)
    if not path.exists():
        raise SpotLoadError(f"POI file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SpotLoadError(f"{path}: empty file, expected a header line")
    header = tuple(h.strip() for h in lines[0].split("\t"))
    if header != POI_FIELDS:
        raise SpotLoadError(
            f"{path}: header must be {' | '.join(POI_FIELDS)}, got {' | '.join(header)}"
        )

    records: list[SpotRecord] = []
    seen_ids: set[str] = set()
    for row_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != len(POI_FIELDS):
            raise SpotLoadError(
                f"row {row_no}: expected {len(POI_FIELDS)} fields, got {len(cells)}"
            )
        row = dict(zip(POI_FIELDS, (c.strip() for c in cells)))
        for required in ("id", "name"):
            if not row[required]:
                raise SpotLoadError(f"row {row_no}: field {required!r} is empty")
        if row["id"] in seen_ids:
            raise SpotLoadError(f"row {row_no}: duplicate id {row['id']!r}")
        seen_ids.add(row["id"])

        majors = _split_multi(row["major"])
        subs = _split_multi(row["sub"])
        minors = _split_multi(row["minor"])
        for facet, labels in (
            (Facet.MAJOR, majors),
            (Facet.SUB, subs),
            (Facet.MINOR, minors),
        ):
            for label in labels:
                if not taxonomy.is_valid_label(facet, label):
                    raise SpotLoadError(
                        f"row {row_no}: unknown {facet.value} label {label!r}"
                    )
        records.append(
            SpotRecord(
                id=row["id"],
                name=row["name"],
                major_categories=majors,
                subcategories=subs,
                minor_categories=minors,
                description=row["description"],
                opening_hours=row["opening_hours"],
                fee=row["fee"],
                location_terms=_split_multi(row["location_terms"]),
            )
        )
    return SpotDatabase(records=tuple(records), taxonomy=taxonomy)


def build_query(tree: CommonGroundTree) -> SearchQuery:
    """Compile the active branch into a query, per facet, order-preserving."""
    buckets: dict[Facet, list[str]] = {f: [] for f in Facet}
    seen: set[tuple[Facet, str]] = set()
    for pref in active_preferences(tree):
        key = (pref.facet, pref.value.casefold())
        if key not in seen:
            seen.add(key)
            buckets[pref.facet].append(pref.value)
    return SearchQuery(
        major_categories=tuple(buckets[Facet.MAJOR]),
        subcategories=tuple(buckets[Facet.SUB]),
        minor_categories=tuple(buckets[Facet.MINOR]),
        other=tuple(buckets[Facet.OTHER]),
    )


def score_spot(
    query: SearchQuery, record: SpotRecord, weights: SearchWeights = DEFAULT_WEIGHTS
) -> int:
    score = 0
    score += weights.major * sum(
        1 for label in query.major_categories if label in record.major_categories
    )
    score += weights.sub * sum(
        1 for label in query.subcategories if label in record.subcategories
    )
    score += weights.minor * sum(
        1 for label in query.minor_categories if label in record.minor_categories
    )
    haystack = " ".join(
        (record.name, record.description, " ".join(record.location_terms))
    ).casefold()
    score += weights.other * sum(
        1 for term in query.other if term.casefold() in haystack
    )
    return score


def search_spots(
    query: SearchQuery,
    db: SpotDatabase,
    limit: int = 5,
    weights: SearchWeights = DEFAULT_WEIGHTS,
) -> list[tuple[SpotRecord, int]]:
    """Ranked matches: score desc, id asc, zero scores dropped, ``limit`` max."""
    if limit <= 0:
        raise ValueError("limit must be positive")
    query.validate(db.taxonomy)
    scored = [
        (record, score)
        for record in db.records
        if (score := score_spot(query, record, weights)) > 0
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return scored[:limit]
