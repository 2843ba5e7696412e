"""Person record schema for extracted register entries.

Serialized field names follow the golden JSON layout exactly, which mixes
``FirstName``-style keys (names, birth and death data) with snake_case keys
(lists, faculty, type_of_person).  Python attribute names are always
snake_case; ``PersonRecord.canonical()`` gives the all-lowercase view used by
the linker and the evaluation code.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Annotated, Any, List, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StringConstraints,
    ValidationError,
    model_validator,
)

PARTIAL_DATE_PATTERN = r"^\d{4}(-(0[1-9]|1[0-2])(-(0[1-9]|[12]\d|3[01]))?)?$"
_PARTIAL_DATE_RE = re.compile(PARTIAL_DATE_PATTERN)

DateString = Annotated[str, StringConstraints(pattern=PARTIAL_DATE_PATTERN)]
RequiredName = Annotated[str, StringConstraints(min_length=1)]
Flag = Annotated[int, Field(ge=0, le=1)]


@dataclass(frozen=True)
class PartialDate:
    """A date known to year, year-month or full-day precision."""

    year: int
    month: Optional[int] = None
    day: Optional[int] = None

    def __post_init__(self):
        if self.day is not None and self.month is None:
            raise ValueError("day given without month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")
        if self.day is not None and not 1 <= self.day <= 31:
            raise ValueError(f"day out of range: {self.day}")

    @classmethod
    def parse(cls, text: str) -> "PartialDate":
        if not isinstance(text, str) or not _PARTIAL_DATE_RE.match(text):
            raise ValueError(f"not a YYYY, YYYY-MM or YYYY-MM-DD date: {text!r}")
        parts = [int(p) for p in text.split("-")]
        return cls(*parts)

    def __str__(self) -> str:
        out = f"{self.year:04d}"
        if self.month is not None:
            out += f"-{self.month:02d}"
        if self.day is not None:
            out += f"-{self.day:02d}"
        return out


def birth_year(date: Optional[str]) -> Optional[int]:
    """Year component of a partial date string, or None when absent/unparseable."""
    if not date:
        return None
    m = re.match(r"^\s*(\d{4})", date)
    return int(m.group(1)) if m else None


class _Model(BaseModel):
    model_config = ConfigDict(strict=True, populate_by_name=True, extra="ignore")


class EducationEntry(_Model):
    subject: Optional[str] = Field(None, description="The subject studied", examples=["Stud. Litt., Phil., en Theol."])
    location: Optional[str] = Field(None, description="The location of the study", examples=["Leiden"])
    date: Optional[DateString] = Field(None, description="The date of the study", examples=["1601-10-20", "1601"])
    source: Optional[str] = Field(None, description="The source of the info mentioned in parentheses", examples=["6"])

    @model_validator(mode="after")
    def _not_empty(self):
        if all(v is None for v in (self.subject, self.location, self.date, self.source)):
            raise ValueError("education entry has no values")
        return self


class CareerEntry(_Model):
    job: Optional[str] = Field(None, description="The type of job", examples=["Hoogleraar Geschiedenis"])
    location: Optional[str] = Field(None, description="The location of the job", examples=["Leiden"])
    date: Optional[DateString] = Field(None, description="The date of the job.", examples=["1601-10-20", "1601"])
    source: Optional[str] = Field(None, description="The source of the info mentioned in parentheses", examples=["6"])
    is_side_job: Flag = Field(0, description="1 if the job is listed as a side position, else 0", examples=[0])


class ParticularityEntry(_Model):
    particularity: RequiredName = Field(..., description="A particular detail such as a salary or membership", examples=["Salaris: bij aanvang 7 800"])
    location: Optional[str] = Field(None, description="The location related to the particularity")
    date: Optional[DateString] = Field(None, description="The date of the particularity", examples=["1601"])
    source: Optional[str] = Field(None, description="The source of the info mentioned in parentheses", examples=["6"])


class RelatedPerson(_Model):
    first_name: Optional[str] = Field(None, alias="FirstName", description="The first name of the person", examples=["Anna"])
    last_name: Optional[str] = Field(None, alias="LastName", description="The last name of the person")
    affix: Optional[str] = Field(None, alias="Affix", description="Name affix such as 'van' or 'de'")
    gender: Optional[str] = Field(None, alias="Gender", examples=["Man", "Vrouw"])
    source: Optional[str] = Field(None, description="The source of the info mentioned in parentheses")
    second_names: List[str] = Field(default_factory=list)
    alternative_last_names: List[str] = Field(default_factory=list)
    birth_country: Optional[str] = Field(None, alias="BirthCountry")
    birth_city: Optional[str] = Field(None, alias="BirthCity")
    birth_date: Optional[DateString] = Field(None, alias="BirthDate", examples=["1601-10-20", "1601", "1601-10"])
    death_date: Optional[DateString] = Field(None, alias="DeathDate", examples=["1601-10-20", "1601", "1601-10"])
    death_city: Optional[str] = Field(None, alias="DeathCity")


class PersonRecord(_Model):
    first_name: RequiredName = Field(..., alias="FirstName", description="The first name of a person", examples=["Cornelis", "Johannes"])
    last_name: RequiredName = Field(..., alias="LastName", description="The last name of a person", examples=["EKAMA"])
    affix: Optional[str] = Field(None, alias="Affix", description="Name affix such as 'van' or 'de'")
    gender: Optional[str] = Field(None, alias="Gender", examples=["Man"])
    second_names: List[str] = Field(default_factory=list, description="Other given names")
    alternative_last_names: List[str] = Field(default_factory=list, description="Alternative spellings of the last name", examples=[["KOOLHAES"]])
    education: List[EducationEntry] = Field(default_factory=list)
    careers: List[CareerEntry] = Field(default_factory=list)
    particularities: List[ParticularityEntry] = Field(default_factory=list)
    spouses: List[RelatedPerson] = Field(default_factory=list)
    parents: List[RelatedPerson] = Field(default_factory=list)
    grand_parents: List[RelatedPerson] = Field(default_factory=list)
    in_laws: List[RelatedPerson] = Field(default_factory=list)
    children: List[RelatedPerson] = Field(default_factory=list)
    far_family: List[RelatedPerson] = Field(default_factory=list)
    type_of_person: int = Field(1, description="1 means the person is a professor")
    faculty: Optional[str] = Field(None, examples=["Theologie"])
    birth_country: Optional[str] = Field(None, alias="BirthCountry")
    birth_city: Optional[str] = Field(None, alias="BirthCity")
    birth_date: Optional[DateString] = Field(None, alias="BirthDate", description="Birth date, Usually found after Geb.", examples=["1601-10-20", "1601", "1601-10"])
    death_date: Optional[DateString] = Field(None, alias="DeathDate", description="Death date, Usually found after Gest.", examples=["1601-10-20", "1601", "1601-10"])
    death_city: Optional[str] = Field(None, alias="DeathCity")

    def to_json_dict(self) -> dict:
        """Golden-file layout (mixed key casing)."""
        return self.model_dump(mode="json", by_alias=True)

    def canonical(self) -> dict:
        """All-lowercase key view."""
        return self.model_dump(mode="json")

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n"


def tool_schema() -> dict:
    """JSON schema handed to the model as the function definition."""
    return PersonRecord.model_json_schema(by_alias=True)


# --- validation errors -------------------------------------------------------


@dataclass(frozen=True)
class FieldError:
    path: str

    def __str__(self) -> str:
        return f"{type(self).__name__}({self.path})"


@dataclass(frozen=True)
class MissingRequiredField(FieldError):
    pass


@dataclass(frozen=True)
class BadDateFormat(FieldError):
    value: Any = None

    def __str__(self) -> str:
        return f"BadDateFormat({self.path}, {self.value!r})"


@dataclass(frozen=True)
class WrongType(FieldError):
    detail: str = ""

    def __str__(self) -> str:
        return f"WrongType({self.path}: {self.detail})"


class RecordValidationError(ValueError):
    def __init__(self, errors: List[FieldError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors) or "invalid record")


def _format_loc(loc) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out or "$"


def _convert(err: dict) -> FieldError:
    # Optional[...] unions append a branch tag ("str", "constrained-str") to loc
    loc = [p for p in err["loc"] if p not in ("str", "constrained-str", "none", "int", "list[str]")]
    path = _format_loc(loc)
    kind = err["type"]
    if kind == "missing" or kind == "string_too_short":
        return MissingRequiredField(path)
    if kind == "string_pattern_mismatch":
        return BadDateFormat(path, err.get("input"))
    if kind == "value_error":
        return MissingRequiredField(path)
    return WrongType(path, err.get("msg", kind))


def validate(raw: Any) -> PersonRecord:
    """Validate a decoded JSON document, raising RecordValidationError on failure.

    Accepts either the golden key casing or the all-lowercase view.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise RecordValidationError([WrongType("$", f"not JSON: {exc}")]) from exc
    if not isinstance(raw, dict):
        raise RecordValidationError([WrongType("$", "expected an object")])
    try:
        return PersonRecord.model_validate(raw)
    except ValidationError as exc:
        errors = []
        for err in exc.errors():
            conv = _convert(err)
            if conv not in errors:
                errors.append(conv)
        raise RecordValidationError(errors) from None


CANONICAL_KEYS = {
    field.alias: name
    for model in (PersonRecord, RelatedPerson)
    for name, field in model.model_fields.items()
    if field.alias
}
