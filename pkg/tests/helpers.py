"""Shared constants and builders for the test suite."""
import json
import stat
import sys
from pathlib import Path

from biorecords.linker import Store

FIXTURES = Path(__file__).parent / "fixtures"

# Main-person keys of the hand-made reference and its model-generated counterpart
# used for the accuracy table.
COOLHAES_CORRECT = {
    "first_name": "Caspar Janszoon",
    "last_name": "COOLHAES",
    "affix": None,
    "gender": "Man",
    "alternative_last_names": ["KOOLHAES", "KOOLHAAS", "COELAES"],
    "type_of_person": 1,
    "faculty": "Theologie",
    "birth_country": "Duitsland",
    "birth_city": "Keulen",
    "birth_date": "1534-01-24",
    "death_date": "1615-01-15",
    "death_city": "Leiden",
}
COOLHAES_GENERATED = {
    "first_name": "Caspar Janszoon",
    "last_name": "COOLHAES",
    "affix": None,
    "gender": "Man",
    "alternative_last_names": [],
    "type_of_person": 1,
    "faculty": "Theologie",
    "birth_country": None,
    "birth_city": "Keulen",
    "birth_date": "1534",
    "death_date": "1615",
    "death_city": "Leiden",
}

SEED_PERSONS = [
    dict(first_name="Caspar Janszoon", last_name="COOLHAES", birth_date="1534-01-24",
         birth_city="Keulen", birth_country="Duitsland", death_date="1615-01-15",
         death_city="Leiden", faculty="Theologie", type_of_person=1),
    dict(first_name="Johannes", last_name="HEURNIUS", birth_date="1543",
         birth_city="Utrecht", birth_country="Nederland", type_of_person=1),
    dict(first_name="Pieter", last_name="Koolhaes", birth_date="1560",
         birth_city="Delft", birth_country="Nederland", type_of_person=1),
    dict(first_name="Jacobus", last_name="ARMINIUS", birth_date="1560",
         birth_city="Oudewater", birth_country="Nederland", type_of_person=1),
]


def seed_store(path=":memory:") -> Store:
    store = Store(path)
    with store.transaction():
        for row in SEED_PERSONS:
            # original data: migration default rating 3
            store.insert_person(row)
    return store


def write_executable(path: Path, body: str) -> Path:
    path.write_text(f"#!{sys.executable}\n{body}", encoding="utf-8")
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return path


STUB_OCR = '''
import json, pathlib, sys
CANNED = pathlib.Path({canned!r})
args = sys.argv[1:]
if {echo!r}:
    print(json.dumps(args))
    sys.exit(0)
image = pathlib.Path(args[0])
if not image.is_file():
    sys.stderr.write("cannot read image " + str(image))
    sys.exit(3)
sidecar = CANNED / (image.stem + ".txt")
sys.stdout.buffer.write(sidecar.read_bytes() if sidecar.exists() else b"")
'''


def make_stub_ocr(directory: Path, canned_dir: Path, echo: bool = False, name="stub-ocr") -> Path:
    """An OCR 'engine' that prints the sidecar text for the image it is given."""
    return write_executable(directory / name, STUB_OCR.format(canned=str(canned_dir), echo=echo))


# -- synthetic three-page volume for end-to-end runs ---------------------------

CONTINUATION_PAGE = "10\n\nNevenfuncties (vervolg):\nLid Synode Dordrecht 1618 (a)\n"
COOLHAES_PAGE = (
    "12\n\nCOOLHAES (KOOLHAES), Caspar Janszoon\n\n"
    "Geb. Keulen 24-01-1534 (7)\nGest. Leiden 15-01-1615 (7)\n\n"
    "Opleiding:\nStud. Theol. Keulen (7)\nCarriere:\nPredikant Leiden 1574 (7)\n"
)


def coolhaes_record(generated=True) -> dict:
    """Full record around the main-person values above."""
    main = COOLHAES_GENERATED if generated else COOLHAES_CORRECT
    return {
        "FirstName": main["first_name"],
        "LastName": main["last_name"],
        "Affix": main["affix"],
        "Gender": main["gender"],
        "second_names": [],
        "alternative_last_names": main["alternative_last_names"],
        "education": [{"subject": "Stud. Theol.", "location": "Keulen", "date": None, "source": "7"}],
        "careers": [{"job": "Predikant", "location": "Leiden", "date": "1574", "source": "7", "is_side_job": 0}],
        "particularities": [],
        "spouses": [], "parents": [], "grand_parents": [], "in_laws": [], "children": [], "far_family": [],
        "type_of_person": main["type_of_person"],
        "faculty": main["faculty"],
        "BirthCountry": main["birth_country"],
        "BirthCity": main["birth_city"],
        "BirthDate": main["birth_date"],
        "DeathDate": main["death_date"],
        "DeathCity": main["death_city"],
    }


def write_pdf(path: Path, pages: int, size=(612, 792), blank=False) -> Path:
    from reportlab.pdfgen import canvas

    c = canvas.Canvas(str(path), pagesize=size)
    for i in range(pages):
        if not blank:
            c.setFont("Courier", 14)
            c.drawString(72, size[1] - 96, f"synthetic page {i + 1}")
        c.showPage()
    c.save()
    return path


def build_corpus(root: Path, *, dpi: int = 72) -> dict:
    """Write a 3-page volume (2 persons), stub OCR, replay file, seeded store,
    ground truth and config under ``root``; returns the paths."""
    from biorecords.extractor import build_messages
    from biorecords.llm import message_digest

    root.mkdir(parents=True, exist_ok=True)
    gomarus_page = (FIXTURES / "gomarus_ocr.txt").read_text(encoding="utf-8")
    pages = [gomarus_page, CONTINUATION_PAGE, COOLHAES_PAGE]

    pdf = write_pdf(root / "vol1.pdf", len(pages))
    canned = root / "canned"
    canned.mkdir(exist_ok=True)
    for n, text in enumerate(pages, 1):
        (canned / f"vol1_{n:04d}.txt").write_text(text, encoding="utf-8")
    engine = make_stub_ocr(root, canned)

    gomarus_person_text = gomarus_page + CONTINUATION_PAGE
    gomarus_record = json.loads((FIXTURES / "gomarus_record.json").read_text(encoding="utf-8"))
    replay = {
        message_digest(build_messages(gomarus_person_text)): gomarus_record,
        message_digest(build_messages(COOLHAES_PAGE)): coolhaes_record(generated=True),
    }
    replay_path = root / "replay.json"
    replay_path.write_text(json.dumps(replay, indent=2), encoding="utf-8")

    store_path = root / "store.sqlite"
    seed_store(store_path).close()

    gt = root / "ground_truth"
    (gt / "persons").mkdir(parents=True, exist_ok=True)
    (gt / "records").mkdir(exist_ok=True)
    (gt / "links").mkdir(exist_ok=True)
    (gt / "persons" / "vol1_GOMARUS.txt").write_text(gomarus_person_text, encoding="utf-8")
    (gt / "persons" / "vol1_COOLHAES.txt").write_text(COOLHAES_PAGE.replace("Leiden", "Lden", 1), encoding="utf-8")
    (gt / "records" / "vol1_COOLHAES.json").write_text(json.dumps(coolhaes_record(generated=False)), encoding="utf-8")
    expected_links = {
        "vol1_GOMARUS.json": {"person_id": 5, "new_person": True, "maybe_same_person": False},
        "vol1_COOLHAES.json": {"person_id": 1, "new_person": False, "maybe_same_person": False},
    }
    (gt / "links" / "vol1.json").write_text(json.dumps(expected_links), encoding="utf-8")

    config = {
        "workdir": "work",
        "volumes": [{"id": "vol1", "pdf": "vol1.pdf"}],
        "imaging": {"rasterizer_path": "pypdfium2", "dpi": dpi},
        "ocr": {"engine_path": str(engine)},
        "extractor": {"backend": "replay", "replay_path": "replay.json"},
        "store": str(store_path),
        "jobs": 2,
        "log_level": "WARNING",
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return {"root": root, "config": config_path, "ground_truth": gt, "store": store_path,
            "workdir": root / "work", "pdf": pdf, "canned": canned}


def person(first="Caspar", last="COOLHAES", **kw):
    from biorecords.schema import PersonRecord

    return PersonRecord(first_name=first, last_name=last, **kw)
