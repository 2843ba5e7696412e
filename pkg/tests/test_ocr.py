import json
import shutil
import subprocess

import numpy as np
import pytest

from biorecords.imaging import PageImage
from biorecords.ocr import (
    OcrConfig,
    OcrEngineNotFound,
    OcrError,
    PageText,
    engine_args,
    recognize,
    split_lines,
)
from helpers import make_stub_ocr, write_executable


def saved_page(tmp_path, page_number=1, volume="v1"):
    img = PageImage(volume, page_number, np.full((20, 20), 255, dtype=np.uint8))
    img.path = img.save(tmp_path / "pages")
    return img


def test_engine_receives_dutch_and_single_column_mode(tmp_path):
    stub = make_stub_ocr(tmp_path, tmp_path, echo=True, name="echo-ocr")
    img = saved_page(tmp_path)
    text = recognize(img, OcrConfig(engine_path=str(stub)))
    args = json.loads(text.text)
    assert args[0] == str(img.path) and args[1] == "stdout"
    assert args[args.index("-l") + 1] == "nld"
    assert args[args.index("--psm") + 1] == "4"


def test_trained_data_and_wordlist_args(tmp_path):
    cfg = OcrConfig(trained_data_path="/models/nld_hist.traineddata", wordlist_path="/w/words.txt")
    args = engine_args(tmp_path / "p.png", cfg)
    assert args[args.index("--tessdata-dir") + 1] == "/models"
    assert args[args.index("-l") + 1] == "nld_hist"
    assert args[args.index("--user-words") + 1] == "/w/words.txt"


def test_canned_text_comes_back_as_lines(tmp_path, stub_ocr, gomarus_text):
    stub, canned = stub_ocr
    (canned / "v1_0009.txt").write_text(gomarus_text, encoding="utf-8")
    img = saved_page(tmp_path, 9)
    page = recognize(img, OcrConfig(engine_path=str(stub)))
    assert page.text == gomarus_text
    assert page.lines[2].startswith("GOMARUS")
    again = recognize(img, OcrConfig(engine_path=str(stub)))
    assert again == page


def test_blank_page_gives_empty_text(tmp_path, stub_ocr):
    stub, _ = stub_ocr
    page = recognize(saved_page(tmp_path), OcrConfig(engine_path=str(stub)))
    assert page.lines == [] and page.text == ""


def test_missing_engine(tmp_path):
    with pytest.raises(OcrEngineNotFound):
        recognize(saved_page(tmp_path), OcrConfig(engine_path="no-such-ocr-engine"))


def test_engine_failure_carries_stderr(tmp_path):
    exe = write_executable(tmp_path / "bad-ocr", "import sys\nsys.stderr.write('bad image')\nsys.exit(2)\n")
    with pytest.raises(OcrError, match="v1_0001.*bad image"):
        recognize(saved_page(tmp_path), OcrConfig(engine_path=str(exe)))


def test_image_not_on_disk():
    img = PageImage("v1", 1, np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(OcrError):
        recognize(img)


def test_split_lines_and_save(tmp_path):
    assert split_lines("a\n\nb\n") == ["a", "", "b"]
    assert split_lines("a") == ["a"]
    assert split_lines("") == []
    page = PageText("v1", 3, ["a", "", "b"])
    path = page.save(tmp_path)
    assert path.name == "v1_0003.txt"
    assert PageText.load(path, "v1", 3) == page


@pytest.mark.parametrize("psm", [-1, 14])
def test_psm_range(psm):
    with pytest.raises(ValueError):
        OcrConfig(page_segmentation_mode=psm)


def _has_tesseract_dutch():
    if shutil.which("tesseract") is None:
        return False
    out = subprocess.run(["tesseract", "--list-langs"], capture_output=True, text=True)
    return "nld" in out.stdout


@pytest.mark.skipif(not _has_tesseract_dutch(), reason="tesseract with Dutch data not installed")
def test_real_engine_reads_printed_surname(tmp_path):
    from PIL import Image, ImageDraw, ImageFont

    canvas = Image.new("RGB", (900, 200), "white")
    ImageDraw.Draw(canvas).text((40, 60), "GOMARUS, Franciscus", fill="black",
                                font=ImageFont.load_default(size=48))
    img = PageImage("v1", 1, np.asarray(canvas))
    img.path = img.save(tmp_path)
    assert "GOMARUS" in recognize(img).text
