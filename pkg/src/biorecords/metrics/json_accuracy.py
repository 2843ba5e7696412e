"""Per-key accuracy of a generated person JSON against a hand-made reference.

Values are compared after lowercasing strings. Scalar keys count one value
each; list-of-string keys count every reference item and score the ones found
in the generated list. Entries of nested lists (careers, spouses, ...) are
paired by position after sorting each side by date, then name, and their keys
are reported under the entry's category. Only keys present in the reference
document are scored.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from ..schema import CANONICAL_KEYS

MAIN = "Main person"
CATEGORIES = OrderedDict([
    ("education", "Education"),
    ("careers", "Careers"),
    ("particularities", "Particularities"),
    ("spouses", "Spouses"),
    ("parents", "Parents"),
    ("grand_parents", "Grandparents"),
    ("in_laws", "In-laws"),
    ("children", "Children"),
    ("far_family", "Far family"),
])
CATEGORY_ORDER = [MAIN, *CATEGORIES.values()]

MAIN_KEYS = (
    "first_name", "last_name", "affix", "gender", "second_names", "alternative_last_names",
    "type_of_person", "faculty", "birth_country", "birth_city", "birth_date", "death_date", "death_city",
)
RELATIVE_KEYS = (
    "first_name", "last_name", "affix", "gender", "source", "second_names", "alternative_last_names",
    "birth_country", "birth_city", "birth_date", "death_date", "death_city",
)
ENTRY_KEYS = {
    "education": ("subject", "location", "date", "source"),
    "careers": ("job", "location", "date", "source", "is_side_job"),
    "particularities": ("particularity", "location", "date", "source"),
}
LIST_KEYS = {"second_names", "alternative_last_names"}


class NonConformingDocument(ValueError):
    pass


@dataclass
class KeyAccuracy:
    category: str
    key: str
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.total

    def as_dict(self) -> dict:
        return {"category": self.category, "key": self.key, "correct": self.correct,
                "total": self.total, "accuracy": round(self.accuracy, 4)}

    def __str__(self) -> str:
        return f"{self.category:<16} {self.key:<24} {self.accuracy:6.2f}% ({self.correct}/{self.total})"


def _canonical_keys(doc: dict, allowed: Iterable[str], where: str) -> dict:
    allowed = set(allowed)
    out = {}
    for key, value in doc.items():
        name = CANONICAL_KEYS.get(key, key)
        if name not in allowed:
            raise NonConformingDocument(f"{where}: unexpected key {key!r}")
        out[name] = value
    return out


def canonicalize(doc: Any, where: str = "$") -> dict:
    """Rename golden-layout keys to lowercase and check container types."""
    if not isinstance(doc, dict):
        raise NonConformingDocument(f"{where}: expected an object")
    top = _canonical_keys(doc, (*MAIN_KEYS, *CATEGORIES), where)
    for key in LIST_KEYS & set(top):
        if top[key] is None:
            top[key] = []
        if not isinstance(top[key], list):
            raise NonConformingDocument(f"{where}.{key}: expected a list")
    for cat in set(CATEGORIES) & set(top):
        entries = top[cat] or []
        if not isinstance(entries, list):
            raise NonConformingDocument(f"{where}.{cat}: expected a list")
        keys = ENTRY_KEYS.get(cat, RELATIVE_KEYS)
        fixed = []
        for i, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise NonConformingDocument(f"{where}.{cat}[{i}]: expected an object")
            fixed.append(_canonical_keys(entry, keys, f"{where}.{cat}[{i}]"))
        top[cat] = fixed
    return top


def _norm(value: Any) -> Any:
    return value.lower() if isinstance(value, str) else value


def _score(key: str, correct: Any, generated: Any) -> Tuple[int, int]:
    if key in LIST_KEYS:
        ref = [_norm(v) for v in (correct or [])]
        got = {_norm(v) for v in (generated or [])}
        return sum(1 for v in ref if v in got), len(ref)
    return int(_norm(correct) == _norm(generated)), 1


def _sort_key(cat: str, entry: dict) -> tuple:
    def s(k):
        v = entry.get(k)
        return "" if v is None else str(v).lower()
    if cat == "education":
        return s("date"), s("subject")
    if cat == "careers":
        return s("date"), s("job")
    if cat == "particularities":
        return s("date"), s("particularity")
    return s("birth_date"), s("last_name"), s("first_name")


class _Tally:
    def __init__(self):
        self.rows: "OrderedDict[Tuple[str, str], List[int]]" = OrderedDict()

    def add(self, category: str, key: str, correct: int, total: int):
        if total == 0:
            return
        slot = self.rows.setdefault((category, key), [0, 0])
        slot[0] += correct
        slot[1] += total

    def result(self) -> List[KeyAccuracy]:
        return [KeyAccuracy(c, k, ok, n) for (c, k), (ok, n) in self.rows.items()]


def json_accuracy(correct: dict, generated: dict) -> List[KeyAccuracy]:
    ref = canonicalize(correct, "correct")
    gen = canonicalize(generated, "generated")
    tally = _Tally()
    for key in MAIN_KEYS:
        if key in ref:
            tally.add(MAIN, key, *_score(key, ref[key], gen.get(key)))
    for cat, label in CATEGORIES.items():
        if cat not in ref:
            continue
        keys = ENTRY_KEYS.get(cat, RELATIVE_KEYS)
        ref_entries = sorted(ref[cat], key=lambda e: _sort_key(cat, e))
        gen_entries = sorted(gen.get(cat) or [], key=lambda e: _sort_key(cat, e))
        for i, entry in enumerate(ref_entries):
            other = gen_entries[i] if i < len(gen_entries) else {}
            for key in keys:
                if key in entry:
                    tally.add(label, key, *_score(key, entry[key], other.get(key)))
    return tally.result()


def aggregate(results: Iterable[List[KeyAccuracy]]) -> List[KeyAccuracy]:
    """Pool counts per (category, key) over many documents."""
    tally = _Tally()
    for rows in results:
        for row in rows:
            tally.add(row.category, row.key, row.correct, row.total)
    ordered = tally.result()
    ordered.sort(key=lambda r: CATEGORY_ORDER.index(r.category))
    return ordered


def category_accuracy(rows: Iterable[KeyAccuracy]) -> Dict[str, float]:
    sums: Dict[str, List[int]] = {}
    for row in rows:
        slot = sums.setdefault(row.category, [0, 0])
        slot[0] += row.correct
        slot[1] += row.total
    return {cat: 100.0 * ok / n for cat, (ok, n) in sums.items() if n}


def overall_accuracy(rows: Iterable[KeyAccuracy]) -> Optional[float]:
    rows = list(rows)
    total = sum(r.total for r in rows)
    return 100.0 * sum(r.correct for r in rows) / total if total else None
