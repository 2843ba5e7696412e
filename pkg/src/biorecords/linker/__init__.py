from .link import (
    EnrichmentSummary,
    LinkDecision,
    MatchCondition,
    enrich,
    first_names_match,
    is_uncertain_match,
    last_names_match,
    link,
    link_and_enrich,
    match_condition1,
    match_condition2,
)
from .names import name_key, normalize_name
from .store import DbPerson, Store, StoreError

__all__ = [
    "DbPerson", "EnrichmentSummary", "LinkDecision", "MatchCondition", "Store", "StoreError",
    "enrich", "first_names_match", "is_uncertain_match", "last_names_match", "link",
    "link_and_enrich", "match_condition1", "match_condition2", "name_key", "normalize_name",
]
