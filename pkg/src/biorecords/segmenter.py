"""Split a volume's page texts into one document per person.

A page whose first content line carries an all-uppercase surname starts a
new person; any other page continues the most recent one.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from .ocr import PageText

_NUMERIC_ONLY = re.compile(r"^[\W\d_]*\d[\W\d_]*$")
_EDGE_PUNCT = "\"'.,;:!?*‘’“”"


@dataclass
class PersonText:
    person_key: str
    volume_id: str
    start_page: int
    end_page: int
    text: str
    detected_surname: str
    aliases: List[str] = field(default_factory=list)

    @property
    def filename(self) -> str:
        return f"{self.volume_id}_{self.person_key}.txt"

    def meta(self) -> dict:
        d = asdict(self)
        del d["text"]
        d["file"] = self.filename
        return d


def _is_upper_word(token: str) -> bool:
    letters = [c for c in token if c.isalpha()]
    if len(letters) < 2:
        return False
    return all(c.isupper() for c in letters) and all(c.isalpha() or c in "-'’" for c in token)


def parse_name_line(line: str) -> Optional[Tuple[str, List[str]]]:
    """Return (surname, parenthesized aliases) for a person heading line.

    The surname is the first all-uppercase token outside parentheses;
    uppercase tokens inside parentheses are collected as aliases.
    """
    surname: Optional[str] = None
    aliases: List[str] = []
    group: List[str] = []
    depth = 0
    for raw in line.split():
        inside = depth > 0 or raw.startswith("(")
        depth = max(0, depth + raw.count("(") - raw.count(")"))
        word = raw.strip("()" + _EDGE_PUNCT)
        if _is_upper_word(word):
            if inside:
                group.append(word)
            elif surname is None:
                surname = word
        if depth == 0 and group:
            aliases.append(" ".join(group))
            group = []
    if group:
        aliases.append(" ".join(group))
    if surname is None:
        return None
    return surname, aliases


def detect_surname(first_line: str) -> Optional[str]:
    parsed = parse_name_line(first_line)
    return parsed[0] if parsed else None


def first_content_line(lines: Iterable[str]) -> Optional[str]:
    """First line that is neither blank nor only a page number."""
    for line in lines:
        stripped = line.strip()
        if not stripped or _NUMERIC_ONLY.match(stripped):
            continue
        return stripped
    return None


def surname_slug(surname: str) -> str:
    folded = unicodedata.normalize("NFKD", surname)
    ascii_only = "".join(c for c in folded if not unicodedata.combining(c)).encode("ascii", "ignore").decode()
    slug = re.sub(r"[^A-Za-z0-9]+", "_", ascii_only.upper()).strip("_")
    return slug or "UNKNOWN"


@dataclass
class Segmentation:
    persons: List[PersonText]
    preamble: Optional[PersonText] = None


def segment_volume(pages: List[PageText]) -> Segmentation:
    if not pages:
        return Segmentation([])
    persons: List[PersonText] = []
    preamble: Optional[PersonText] = None
    used: dict = {}
    current: Optional[PersonText] = None
    for page in pages:
        line = first_content_line(page.lines)
        parsed = parse_name_line(line) if line else None
        if parsed:
            surname, aliases = parsed
            slug = surname_slug(surname)
            used[slug] = used.get(slug, 0) + 1
            key = slug if used[slug] == 1 else f"{slug}_{used[slug]}"
            current = PersonText(key, page.volume_id, page.page_number, page.page_number,
                                 page.text, surname, aliases)
            persons.append(current)
        elif current is not None:
            current.text += page.text
            current.end_page = page.page_number
        elif preamble is None:
            preamble = PersonText("_preamble", page.volume_id, page.page_number,
                                  page.page_number, page.text, "")
        else:
            preamble.text += page.text
            preamble.end_page = page.page_number
    return Segmentation(persons, preamble)


def segment(pages: List[PageText]) -> List[PersonText]:
    return segment_volume(pages).persons


def write_persons(seg: Segmentation, directory: Path, volume_id: str) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for person in seg.persons:
        out = directory / person.filename
        out.write_text(person.text, encoding="utf-8")
        written.append(out)
    manifest = {
        "volume": volume_id,
        "persons": [p.meta() for p in seg.persons],
        "preamble_pages": [seg.preamble.start_page, seg.preamble.end_page] if seg.preamble else None,
    }
    (directory / f"{volume_id}.manifest.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    if seg.preamble is not None:
        pre_dir = directory / "_preamble"
        pre_dir.mkdir(exist_ok=True)
        (pre_dir / f"{volume_id}.txt").write_text(seg.preamble.text, encoding="utf-8")
    return written
