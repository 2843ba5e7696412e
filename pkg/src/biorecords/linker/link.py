"""Record linkage against the central store and non-destructive enrichment."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..schema import PersonRecord, birth_year
from .names import name_keys, normalize_name, split_alternatives
from .store import DbPerson, Store

log = logging.getLogger(__name__)

RATING_ORIGINAL = 3
RATING_MATCHED = 2
RATING_NEW = 1


class MatchCondition(str, enum.Enum):
    COND1 = "Cond1"
    COND2 = "Cond2"
    UNCERTAIN = "Uncertain"
    NONE = "None"


@dataclass(frozen=True)
class LinkDecision:
    person_id: int
    new_person: bool
    maybe_same_person: bool
    matched_condition: MatchCondition
    suspected_person_id: Optional[int] = None

    def __post_init__(self):
        cond = self.matched_condition
        if cond in (MatchCondition.COND1, MatchCondition.COND2):
            ok = not self.new_person and not self.maybe_same_person
        elif cond is MatchCondition.UNCERTAIN:
            ok = self.new_person and self.maybe_same_person
        else:
            ok = self.new_person and not self.maybe_same_person
        if not ok:
            raise ValueError(f"inconsistent decision flags for {cond.value}")

    def to_eval_entry(self) -> dict:
        return {
            "person_id": self.person_id,
            "new_person": self.new_person,
            "maybe_same_person": self.maybe_same_person,
        }


# -- matching primitives ---------------------------------------------------------


def first_names_match(a: Optional[str], b: Optional[str]) -> bool:
    """Partial match: some normalized token is shared."""
    return bool(set(normalize_name(a)) & set(normalize_name(b)))


def last_names_match(record_last, record_alts: Sequence[str], db_last, db_alt=None) -> bool:
    """Exact (case- and punctuation-insensitive) match of any spelling on either side."""
    ours = name_keys([record_last, *(record_alts or [])])
    theirs = name_keys([db_last, *split_alternatives(db_alt)])
    return bool(ours & theirs)


def _years_equal(a: Optional[str], b: Optional[str]) -> bool:
    ya, yb = birth_year(a), birth_year(b)
    return ya is not None and yb is not None and ya == yb


def _places_equal(a: Optional[str], b: Optional[str]) -> bool:
    if not a or not b or not a.strip() or not b.strip():
        return False
    return a.strip().casefold() == b.strip().casefold()


def _last(rec: PersonRecord, db: DbPerson) -> bool:
    return last_names_match(rec.last_name, rec.alternative_last_names, db.last_name, db.alternative_last_name)


def match_condition1(rec: PersonRecord, db: DbPerson) -> bool:
    return (
        first_names_match(rec.first_name, db.first_name)
        and _last(rec, db)
        and (_years_equal(rec.birth_date, db.birth_date) or _places_equal(rec.birth_city, db.birth_city))
    )


def match_condition2(rec: PersonRecord, db: DbPerson) -> bool:
    return (
        _last(rec, db)
        and _years_equal(rec.birth_date, db.birth_date)
        and (_places_equal(rec.birth_city, db.birth_city) or _places_equal(rec.birth_country, db.birth_country))
    )


def is_uncertain_match(rec: PersonRecord, db: DbPerson) -> bool:
    """Both names agree but neither birth year nor birth city does."""
    return (
        first_names_match(rec.first_name, db.first_name)
        and _last(rec, db)
        and not _years_equal(rec.birth_date, db.birth_date)
        and not _places_equal(rec.birth_city, db.birth_city)
    )


# -- store mutations -------------------------------------------------------------


def _person_values(rec: PersonRecord) -> Dict[str, object]:
    return {
        "first_name": rec.first_name,
        "last_name": rec.last_name,
        "affix": rec.affix,
        "gender": rec.gender,
        "alternative_last_name": "; ".join(rec.alternative_last_names) or None,
        "faculty": rec.faculty,
        "type_of_person": rec.type_of_person,
        "birth_country": rec.birth_country,
        "birth_city": rec.birth_city,
        "birth_date": rec.birth_date,
        "death_date": rec.death_date,
        "death_city": rec.death_city,
    }


def _insert_new(rec: PersonRecord, store: Store) -> int:
    return store.insert_person({**_person_values(rec), "rating": RATING_NEW})


def link(rec: PersonRecord, store: Store) -> LinkDecision:
    """Find the stored person ``rec`` describes, inserting a new one if none fits.

    Candidates come from the last-name index (every condition requires a
    last-name match). Ties between definitive matches go to the lowest id.
    """
    with store.transaction():
        keys = name_keys([rec.last_name, *rec.alternative_last_names])
        candidates = store.candidates(keys)
        definitive = []
        for cand in candidates:
            if match_condition1(rec, cand):
                definitive.append((cand.id, MatchCondition.COND1))
            elif match_condition2(rec, cand):
                definitive.append((cand.id, MatchCondition.COND2))
        if definitive:
            definitive.sort(key=lambda t: t[0])
            if len(definitive) > 1:
                log.warning(
                    "%s %s matches %d stored persons (%s); using id %d",
                    rec.first_name, rec.last_name, len(definitive),
                    ", ".join(str(i) for i, _ in definitive), definitive[0][0],
                )
            pid, cond = definitive[0]
            return LinkDecision(pid, False, False, cond)

        uncertain = sorted(c.id for c in candidates if is_uncertain_match(rec, c))
        new_id = _insert_new(rec, store)
        if uncertain:
            store.insert_relation(new_id, uncertain[0])
            return LinkDecision(new_id, True, True, MatchCondition.UNCERTAIN, uncertain[0])
        return LinkDecision(new_id, True, False, MatchCondition.NONE)


@dataclass
class EnrichmentSummary:
    person_id: int
    filled_columns: List[str] = field(default_factory=list)
    inserted: Dict[str, int] = field(default_factory=dict)
    skipped_tables: List[str] = field(default_factory=list)
    rating_before: Optional[int] = None
    rating_after: Optional[int] = None

    @property
    def changed(self) -> bool:
        return bool(self.filled_columns or any(self.inserted.values()))


def _child_rows(rec: PersonRecord) -> Dict[str, List[dict]]:
    return {
        "education": [e.model_dump() for e in rec.education],
        "career": [c.model_dump() for c in rec.careers],
        "particularity": [p.model_dump() for p in rec.particularities],
    }


def enrich(store: Store, person_id: int, rec: PersonRecord, matched: bool = True) -> EnrichmentSummary:
    """Add what ``rec`` knows to the stored person without overwriting anything.

    Null columns are filled; a child table is written only when the person has
    no rows there yet. A pipeline-created person (rating 1) that gains data
    through a match is relabelled 2; original rows keep rating 3.
    """
    with store.transaction():
        person = store.get_person(person_id)
        if person is None:
            raise KeyError(f"no person with id {person_id}")
        summary = EnrichmentSummary(person_id, rating_before=person.rating)

        fill = {}
        for column, value in _person_values(rec).items():
            if value is None or getattr(person, column) is not None:
                continue
            fill[column] = value
        if fill:
            store.update_person(person_id, fill)
            summary.filled_columns = sorted(fill)

        for table, rows in _child_rows(rec).items():
            if not rows:
                continue
            if store.count_rows(table, person_id):
                summary.skipped_tables.append(table)
                continue
            summary.inserted[table] = store.insert_rows(table, person_id, rows)

        rating = person.rating
        if matched and summary.changed and rating == RATING_NEW:
            rating = RATING_MATCHED
            store.update_person(person_id, {"rating": rating})
        summary.rating_after = rating
        return summary


def link_and_enrich(rec: PersonRecord, store: Store):
    """Link and enrich in one transaction; returns (decision, summary)."""
    with store.transaction():
        decision = link(rec, store)
        summary = enrich(store, decision.person_id, rec, matched=not decision.new_person)
    return decision, summary

