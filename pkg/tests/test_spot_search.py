from __future__ import annotations

import random

import pytest

from conftest import TEMPLE_QUERY
from spotdialog.common_ground import (
    CommonGroundTree,
    Preference,
    PreferenceStatus,
    record_preferences,
)
from spotdialog.config import data_path
from spotdialog.spot_search import (
    SearchQuery,
    SpotLoadError,
    SpotRecord,
    build_query,
    load_spot_database,
    search_spots,
)
from spotdialog.taxonomy import DEFAULT_TAXONOMY, Facet

FIXTURE = data_path("spots.tsv")
HEADER = "id\tname\tmajor\tsub\tminor\tdescription\topening_hours\tfee\tlocation_terms"


def _write(tmp_path, *rows):
    path = tmp_path / "spots.tsv"
    path.write_text("\n".join([HEADER, *rows]) + "\n", encoding="utf-8")
    return path


GOOD_ROW = (
    "x-1\tSample Temple\tSightseeing\tSightseeing -- Shrines and Temples\t"
    "Buildings and Historical Sites -- Historical Buildings\tA temple.\t9:00-17:00\t"
    "500 yen\tKyoto"
)


class TestLoader:
    def test_bundled_fixture_loads(self):
        db = load_spot_database(FIXTURE)
        assert len(db) == 12
        assert len({r.id for r in db.records}) == 12

    def test_header_only_file(self, tmp_path):
        db = load_spot_database(_write(tmp_path))
        assert len(db) == 0

    def test_duplicate_id_names_the_id(self, tmp_path):
        path = _write(tmp_path, GOOD_ROW, GOOD_ROW)
        with pytest.raises(SpotLoadError, match="x-1"):
            load_spot_database(path)

    def test_unknown_label_is_listed(self, tmp_path):
        bad = GOOD_ROW.replace("Sightseeing -- Shrines and Temples", "Moon Tourism")
        with pytest.raises(SpotLoadError, match="Moon Tourism"):
            load_spot_database(_write(tmp_path, bad))

    def test_short_row_names_row_number(self, tmp_path):
        with pytest.raises(SpotLoadError, match="row 3"):
            load_spot_database(_write(tmp_path, GOOD_ROW, "x-2\tonly two fields"))

    def test_empty_name_names_field(self, tmp_path):
        bad = GOOD_ROW.replace("Sample Temple", "")
        with pytest.raises(SpotLoadError, match="name"):
            load_spot_database(_write(tmp_path, bad))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpotLoadError, match="not found"):
            load_spot_database(tmp_path / "nope.tsv")

    def test_bad_header(self, tmp_path):
        path = tmp_path / "spots.tsv"
        path.write_text("id\tname\n", encoding="utf-8")
        with pytest.raises(SpotLoadError, match="header"):
            load_spot_database(path)


def _accepted(facet, value, turn=0):
    return Preference(
        facet=facet, value=value, source_turn=turn, status=PreferenceStatus.ACCEPTED
    )


def temple_tree():
    tree = CommonGroundTree.fresh()
    record_preferences(
        tree,
        [
            _accepted(Facet.MAJOR, "Sightseeing"),
            _accepted(Facet.SUB, "Sightseeing -- Shrines and Temples"),
            _accepted(
                Facet.MINOR, "Buildings and Historical Sites -- Historical Buildings"
            ),
            _accepted(Facet.OTHER, "Kyoto"),
        ],
        0,
    )
    return tree


class TestBuildQuery:
    def test_first_exchange(self):
        assert build_query(temple_tree()).to_dict() == TEMPLE_QUERY

    def test_fresh_tree(self):
        query = build_query(CommonGroundTree.fresh())
        assert query.is_empty()

    def test_after_topic_switch_only_new_branch(self):
        tree = temple_tree()
        record_preferences(
            tree,
            [
                _accepted(Facet.MAJOR, "Recreation", 2),
                _accepted(Facet.SUB, "Recreation -- Theme Park", 2),
            ],
            2,
        )
        assert build_query(tree).to_dict() == {
            "major_categories": ["Recreation"],
            "subcategories": ["Recreation -- Theme Park"],
            "minor_categories": [],
            "other": [],
        }

    def test_faithful_to_active_branch(self):
        tree = temple_tree()
        query = build_query(tree)
        values = sorted(
            query.major_categories
            + query.subcategories
            + query.minor_categories
            + query.other
        )
        assert values == sorted(
            p.value for p in tree.active_path[-1].preferences
        )


@pytest.fixture(scope="module")
def db():
    return load_spot_database(FIXTURE)


class TestSearch:
    def test_empty_query_matches_nothing(self, db):
        assert search_spots(SearchQuery(), db) == []

    def test_temple_query_pinned_ranking(self, db):
        # Hand-scored against the fixture: majors x3, subs x2, minors x1,
        # free terms x1 over name/description/location_terms.
        got = [(r.id, s) for r, s in search_spots(SearchQuery.from_dict(TEMPLE_QUERY), db, limit=10)]
        assert got == [
            ("kyoto-001", 7),
            ("kyoto-002", 7),
            ("kyoto-003", 7),
            ("kyoto-007", 5),
            ("hakone-009", 3),
            ("osaka-008", 3),
            ("kyoto-006", 1),
            ("kyoto-012", 1),
        ]

    def test_temple_query_limit_five(self, db):
        got = [r.id for r, _ in search_spots(SearchQuery.from_dict(TEMPLE_QUERY), db)]
        assert got == ["kyoto-001", "kyoto-002", "kyoto-003", "kyoto-007", "hakone-009"]

    def test_kyoto_only_query_is_exact_scan(self, db):
        got = search_spots(SearchQuery(other=("Kyoto",)), db, limit=12)
        assert [(r.id, s) for r, s in got] == [
            ("kyoto-001", 1),
            ("kyoto-002", 1),
            ("kyoto-003", 1),
            ("kyoto-006", 1),
            ("kyoto-007", 1),
            ("kyoto-012", 1),
        ]

    def test_park_query(self, db):
        query = SearchQuery(
            major_categories=("Recreation",), subcategories=("Recreation -- Theme Park",)
        )
        assert [(r.id, s) for r, s in search_spots(query, db)] == [
            ("osaka-004", 5),
            ("osaka-005", 5),
            ("hakone-010", 3),
        ]

    def test_unknown_label_rejected(self, db):
        with pytest.raises(ValueError, match="Moon"):
            search_spots(SearchQuery(major_categories=("Moon",)), db)

    def test_duplicate_label_rejected(self, db):
        with pytest.raises(ValueError, match="duplicate"):
            search_spots(
                SearchQuery(major_categories=("Sightseeing", "sightseeing")), db
            )

    def test_bad_limit_rejected(self, db):
        with pytest.raises(ValueError, match="limit"):
            search_spots(SearchQuery(other=("Kyoto",)), db, limit=0)

    def test_every_result_matches_some_facet(self, db):
        query = SearchQuery.from_dict(TEMPLE_QUERY)
        for record, score in search_spots(query, db, limit=12):
            assert score > 0


def _random_db(rng: random.Random, n_records: int):
    majors = sorted(DEFAULT_TAXONOMY.major)
    subs = sorted(DEFAULT_TAXONOMY.sub)
    minors = sorted(DEFAULT_TAXONOMY.minor)
    words = ["stone", "river", "garden", "Kyoto", "Nara", "old", "bright", "quiet"]
    records = []
    for i in range(n_records):
        records.append(
            SpotRecord(
                id=f"r-{i:03d}",
                name=" ".join(rng.sample(words, 2)) + f" {i}",
                major_categories=tuple(rng.sample(majors, rng.randint(0, 2))),
                subcategories=tuple(rng.sample(subs, rng.randint(0, 2))),
                minor_categories=tuple(rng.sample(minors, rng.randint(0, 2))),
                description=" ".join(rng.choices(words, k=6)),
                opening_hours="9:00-17:00",
                fee=rng.choice(["", "500 yen", "Free"]),
                location_terms=tuple(rng.sample(words, rng.randint(0, 2))),
            )
        )
    from spotdialog.spot_search import SpotDatabase

    return SpotDatabase(records=tuple(records))


def _random_query(rng: random.Random):
    majors = sorted(DEFAULT_TAXONOMY.major)
    subs = sorted(DEFAULT_TAXONOMY.sub)
    minors = sorted(DEFAULT_TAXONOMY.minor)
    return SearchQuery(
        major_categories=tuple(rng.sample(majors, rng.randint(0, 2))),
        subcategories=tuple(rng.sample(subs, rng.randint(0, 2))),
        minor_categories=tuple(rng.sample(minors, rng.randint(0, 2))),
        other=tuple(rng.sample(["Kyoto", "river", "zzz", "quiet"], rng.randint(0, 2))),
    )


def brute_force_rank(query, db, limit):
    """Independent scorer: plain loops, no shared helpers."""
    rows = []
    for record in db.records:
        points = 0
        for label in query.major_categories:
            if label in record.major_categories:
                points = points + 3
        for label in query.subcategories:
            if label in record.subcategories:
                points = points + 2
        for label in query.minor_categories:
            if label in record.minor_categories:
                points = points + 1
        blob = (
            record.name + " " + record.description + " " + " ".join(record.location_terms)
        ).lower()
        for term in query.other:
            if term.lower() in blob:
                points = points + 1
        if points > 0:
            rows.append((record.id, points))
    rows.sort(key=lambda row: (-row[1], row[0]))
    return rows[:limit]


def test_search_matches_brute_force_oracle():
    rng = random.Random(7)
    for _ in range(60):
        db = _random_db(rng, rng.randint(1, 40))
        query = _random_query(rng)
        limit = rng.randint(1, 10)
        fast = [(r.id, s) for r, s in search_spots(query, db, limit=limit)]
        assert fast == brute_force_rank(query, db, limit)
