"""Accuracy of link decisions against an expected decision map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping

FIELDS = ("person_id", "new_person", "maybe_same_person")


class LinkMapError(ValueError):
    pass


def validate_link_map(doc) -> Dict[str, dict]:
    """Check ``{filename: {"person_id": int, "new_person": bool, "maybe_same_person": bool}}``."""
    if not isinstance(doc, Mapping):
        raise LinkMapError("link map must be an object keyed by file name")
    for name, entry in doc.items():
        if not isinstance(entry, Mapping) or set(entry) != set(FIELDS):
            raise LinkMapError(f"{name}: entry must have exactly the keys {', '.join(FIELDS)}")
        pid = entry["person_id"]
        if not isinstance(pid, int) or isinstance(pid, bool):
            raise LinkMapError(f"{name}: person_id must be an integer")
        for flag in FIELDS[1:]:
            if not isinstance(entry[flag], bool):
                raise LinkMapError(f"{name}: {flag} must be a boolean")
    return dict(doc)


@dataclass
class LinkageReport:
    volume: str
    persons: int
    person_id_accuracy: float
    new_person_accuracy: float
    maybe_same_person_accuracy: float
    expected_new_count: int
    generated_new_count: int

    @property
    def average(self) -> float:
        return (self.person_id_accuracy + self.new_person_accuracy + self.maybe_same_person_accuracy) / 3

    def as_dict(self) -> dict:
        return {
            "volume": self.volume,
            "persons": self.persons,
            "person_id_accuracy": self.person_id_accuracy,
            "new_person_accuracy": self.new_person_accuracy,
            "maybe_same_person_accuracy": self.maybe_same_person_accuracy,
            "average": self.average,
            "expected_new_count": self.expected_new_count,
            "generated_new_count": self.generated_new_count,
        }


def linkage_eval(expected: Mapping, actual: Mapping, volume: str = "") -> LinkageReport:
    """Score ``actual`` against ``expected``; a file missing from ``actual`` is wrong on every field."""
    expected = validate_link_map(expected)
    actual = validate_link_map(actual)
    if not expected:
        raise LinkMapError("no persons to evaluate")
    hits = dict.fromkeys(FIELDS, 0)
    for name, want in expected.items():
        got = actual.get(name)
        if got is None:
            continue
        for f in FIELDS:
            if got[f] == want[f] and type(got[f]) is type(want[f]):
                hits[f] += 1
    n = len(expected)
    return LinkageReport(
        volume=volume,
        persons=n,
        person_id_accuracy=100.0 * hits["person_id"] / n,
        new_person_accuracy=100.0 * hits["new_person"] / n,
        maybe_same_person_accuracy=100.0 * hits["maybe_same_person"] / n,
        expected_new_count=sum(1 for e in expected.values() if e["new_person"]),
        generated_new_count=sum(1 for name in expected if actual.get(name, {}).get("new_person") is True),
    )


def total_row(reports: Iterable[LinkageReport]) -> dict:
    """Mean over volumes of each accuracy column."""
    reports = list(reports)
    if not reports:
        raise LinkMapError("no volumes")
    k = len(reports)
    cols = ("person_id_accuracy", "new_person_accuracy", "maybe_same_person_accuracy", "average")
    row: Dict[str, object] = {"volume": "Total"}
    for c in cols:
        row[c] = sum(getattr(r, c) for r in reports) / k
    row["persons"] = sum(r.persons for r in reports)
    row["expected_new_count"] = sum(r.expected_new_count for r in reports)
    row["generated_new_count"] = sum(r.generated_new_count for r in reports)
    return row


def format_table(reports: List[LinkageReport]) -> str:
    head = f"{'Volume':<12}{'Person_ID':>11}{'New_Person':>12}{'Maybe_Same':>12}{'Average':>10}{'Persons':>9}{'New exp/gen':>13}"
    lines = [head, "-" * len(head)]
    for r in reports:
        lines.append(
            f"{r.volume:<12}{r.person_id_accuracy:>10.2f}%{r.new_person_accuracy:>11.2f}%"
            f"{r.maybe_same_person_accuracy:>11.2f}%{r.average:>9.2f}%{r.persons:>9}"
            f"{f'{r.expected_new_count}/{r.generated_new_count}':>13}"
        )
    if reports:
        t = total_row(reports)
        lines.append(
            f"{'Total':<12}{t['person_id_accuracy']:>10.2f}%{t['new_person_accuracy']:>11.2f}%"
            f"{t['maybe_same_person_accuracy']:>11.2f}%{t['average']:>9.2f}%{t['persons']:>9}"
            f"{str(t['expected_new_count']) + '/' + str(t['generated_new_count']):>13}"
        )
    return "\n".join(lines)
