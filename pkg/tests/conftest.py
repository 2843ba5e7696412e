import json

import pytest

from helpers import FIXTURES, make_stub_ocr, seed_store


@pytest.fixture
def gomarus_text():
    return (FIXTURES / "gomarus_ocr.txt").read_text(encoding="utf-8")


@pytest.fixture
def gomarus_json():
    return json.loads((FIXTURES / "gomarus_record.json").read_text(encoding="utf-8"))


@pytest.fixture
def seeded_store():
    store = seed_store()
    yield store
    store.close()


@pytest.fixture
def stub_ocr(tmp_path):
    canned = tmp_path / "canned"
    canned.mkdir()
    return make_stub_ocr(tmp_path, canned), canned
