from __future__ import annotations

import unicodedata
from typing import Iterable, List, Optional, Set


def _strip_punctuation(text: str) -> str:
    return "".join(c for c in text if not unicodedata.category(c).startswith("P"))


def normalize_name(name: Optional[str]) -> List[str]:
    """Lowercase, drop punctuation, split on whitespace."""
    if not name:
        return []
    return _strip_punctuation(name.lower()).split()


def name_key(name: Optional[str]) -> str:
    """Whole-name comparison key ("" for missing names)."""
    return " ".join(normalize_name(name))


def name_keys(names: Iterable[Optional[str]]) -> Set[str]:
    return {k for k in (name_key(n) for n in names) if k}


def split_alternatives(value: Optional[str]) -> List[str]:
    # several alternative surnames are stored in one column, separated by ";"
    if not value:
        return []
    return [part.strip() for part in value.split(";") if part.strip()]
