"""Thin storage interface over the central relational database (SQLite)."""

from __future__ import annotations

import logging
import sqlite3
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import astuple, dataclass
from importlib import resources
from typing import Dict, Iterable, Iterator, List, Optional, Set

from .names import name_key, split_alternatives

log = logging.getLogger(__name__)

PERSON_COLUMNS = (
    "id", "first_name", "last_name", "affix", "gender", "alternative_last_name",
    "rating", "faculty", "type_of_person", "birth_country", "birth_city",
    "birth_date", "death_date", "death_city",
)
CHILD_TABLES = {
    "education": ("subject", "location", "date", "source"),
    "career": ("job", "location", "date", "source", "is_side_job"),
    "particularity": ("particularity", "location", "date", "source"),
}


class StoreError(RuntimeError):
    pass


@dataclass
class DbPerson:
    id: int
    first_name: Optional[str] = None
    last_name: Optional[str] = None
    affix: Optional[str] = None
    gender: Optional[str] = None
    alternative_last_name: Optional[str] = None
    rating: int = 3
    faculty: Optional[str] = None
    type_of_person: Optional[int] = None
    birth_country: Optional[str] = None
    birth_city: Optional[str] = None
    birth_date: Optional[str] = None
    death_date: Optional[str] = None
    death_city: Optional[str] = None

    def __post_init__(self):
        if self.rating not in (1, 2, 3):
            raise ValueError(f"rating must be 1, 2 or 3, got {self.rating}")

    def last_name_keys(self) -> Set[str]:
        return {k for k in [name_key(self.last_name)] + [name_key(a) for a in split_alternatives(self.alternative_last_name)] if k}


def migration_files() -> List[tuple]:
    pkg = resources.files("biorecords.linker") / "migrations"
    out = []
    for entry in sorted(pkg.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".sql"):
            out.append((entry.name, entry.read_text(encoding="utf-8")))
    return out


class Store:
    """SQLite-backed person store.

    Keeps an in-memory index from normalized last name (and alternative
    last names) to person ids so candidate lookup avoids full scans.
    """

    def __init__(self, path=":memory:"):
        self.path = str(path)
        self.conn = sqlite3.connect(self.path, isolation_level=None, check_same_thread=False)
        self.conn.row_factory = sqlite3.Row
        self.conn.execute("PRAGMA foreign_keys = ON")
        self._depth = 0
        self._index: Dict[str, Set[int]] = defaultdict(set)
        self.migrate()
        self._rebuild_index()

    @classmethod
    def open(cls, connection: str) -> "Store":
        if connection.startswith("sqlite:///"):
            connection = connection[len("sqlite:///"):]
        return cls(connection)

    def close(self):
        self.conn.close()

    # -- schema ---------------------------------------------------------------

    def migrate(self) -> List[str]:
        self.conn.execute(
            "CREATE TABLE IF NOT EXISTS schema_migrations (name TEXT PRIMARY KEY)"
        )
        done = {r[0] for r in self.conn.execute("SELECT name FROM schema_migrations")}
        applied = []
        for name, sql in migration_files():
            if name in done:
                continue
            escaped_name = name.replace("'", "''")
            try:
                self.conn.executescript(
                    f"BEGIN;\n{sql}\nINSERT INTO schema_migrations VALUES ('{escaped_name}');\nCOMMIT;"
                )
            except sqlite3.Error as exc:
                if self.conn.in_transaction:
                    self.conn.execute("ROLLBACK")
                raise StoreError(f"migration {name} failed: {exc}") from exc
            applied.append(name)
            log.info("applied migration %s", name)
        return applied

    # -- transactions ---------------------------------------------------------

    @contextmanager
    def transaction(self) -> Iterator["Store"]:
        """Reentrant; only the outermost level commits or rolls back."""
        if self._depth == 0:
            self.conn.execute("BEGIN IMMEDIATE")
        self._depth += 1
        try:
            yield self
        except BaseException:
            self._depth -= 1
            if self._depth == 0:
                self.conn.execute("ROLLBACK")
                self._rebuild_index()
            raise
        else:
            self._depth -= 1
            if self._depth == 0:
                self.conn.execute("COMMIT")

    # -- persons --------------------------------------------------------------

    def _rebuild_index(self):
        self._index = defaultdict(set)
        for person in self.all_persons():
            self._index_person(person)

    def _index_person(self, person: DbPerson):
        for key in person.last_name_keys():
            self._index[key].add(person.id)

    @staticmethod
    def _row_to_person(row) -> DbPerson:
        return DbPerson(**{c: row[c] for c in PERSON_COLUMNS})

    def all_persons(self) -> List[DbPerson]:
        cols = ", ".join(PERSON_COLUMNS)
        return [self._row_to_person(r) for r in self.conn.execute(f"SELECT {cols} FROM person ORDER BY id")]

    def get_person(self, person_id: int) -> Optional[DbPerson]:
        cols = ", ".join(PERSON_COLUMNS)
        row = self.conn.execute(f"SELECT {cols} FROM person WHERE id = ?", (person_id,)).fetchone()
        return self._row_to_person(row) if row else None

    def candidates(self, last_name_keys: Iterable[str]) -> List[DbPerson]:
        ids: Set[int] = set()
        for key in last_name_keys:
            ids |= self._index.get(key, set())
        people = [self.get_person(i) for i in sorted(ids)]
        return [p for p in people if p is not None]

    def insert_person(self, values: dict) -> int:
        values = {k: v for k, v in values.items() if k in PERSON_COLUMNS}
        cols = ", ".join(values)
        marks = ", ".join("?" for _ in values)
        cur = self.conn.execute(f"INSERT INTO person ({cols}) VALUES ({marks})", tuple(values.values()))
        person = self.get_person(cur.lastrowid)
        self._index_person(person)
        return cur.lastrowid

    def update_person(self, person_id: int, values: dict):
        if not values:
            return
        bad = set(values) - set(PERSON_COLUMNS) - {"id"}
        if bad or "id" in values:
            raise StoreError(f"cannot update columns {sorted(bad) or ['id']}")
        assignments = ", ".join(f"{c} = ?" for c in values)
        self.conn.execute(f"UPDATE person SET {assignments} WHERE id = ?", (*values.values(), person_id))
        person = self.get_person(person_id)
        if person is not None:
            self._index_person(person)

    def person_count(self) -> int:
        return self.conn.execute("SELECT COUNT(*) FROM person").fetchone()[0]

    # -- child tables ---------------------------------------------------------

    def count_rows(self, table: str, person_id: int) -> int:
        if table not in CHILD_TABLES:
            raise StoreError(f"unknown table {table}")
        return self.conn.execute(f"SELECT COUNT(*) FROM {table} WHERE person_id = ?", (person_id,)).fetchone()[0]

    def rows(self, table: str, person_id: int) -> List[dict]:
        cols = CHILD_TABLES[table]
        cur = self.conn.execute(
            f"SELECT {', '.join(cols)} FROM {table} WHERE person_id = ? ORDER BY id", (person_id,)
        )
        return [dict(zip(cols, r)) for r in cur]

    def insert_rows(self, table: str, person_id: int, rows: List[dict]) -> int:
        if table not in CHILD_TABLES:
            raise StoreError(f"unknown table {table}")
        cols = CHILD_TABLES[table]
        sql = f"INSERT INTO {table} (person_id, {', '.join(cols)}) VALUES (?, {', '.join('?' for _ in cols)})"
        for row in rows:
            self.conn.execute(sql, (person_id, *(row.get(c) for c in cols)))
        return len(rows)

    def insert_relation(self, new_person_id: int, suspected_person_id: int):
        if new_person_id == suspected_person_id:
            raise StoreError("a person cannot be related to itself")
        self.conn.execute(
            "INSERT OR IGNORE INTO person_relation (new_person_id, suspected_person_id) VALUES (?, ?)",
            (new_person_id, suspected_person_id),
        )

    def relations(self) -> List[tuple]:
        return [tuple(r) for r in self.conn.execute(
            "SELECT new_person_id, suspected_person_id FROM person_relation ORDER BY 1, 2")]

    def table_counts(self) -> Dict[str, int]:
        out = {"person": self.person_count(), "person_relation": len(self.relations())}
        for table in CHILD_TABLES:
            out[table] = self.conn.execute(f"SELECT COUNT(*) FROM {table}").fetchone()[0]
        return out

    def snapshot(self) -> dict:
        """Full dump, for comparing store states in tests and reports."""
        out = {"person": [astuple(p) for p in self.all_persons()], "person_relation": self.relations()}
        for table, cols in CHILD_TABLES.items():
            out[table] = [tuple(r) for r in self.conn.execute(
                f"SELECT person_id, {', '.join(cols)} FROM {table} ORDER BY id")]
        return out
