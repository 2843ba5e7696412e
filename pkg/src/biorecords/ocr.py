"""Subprocess adapter around a Tesseract-compatible OCR executable."""

from __future__ import annotations

import logging
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from .imaging import PageImage, page_stem

log = logging.getLogger(__name__)


class OcrError(RuntimeError):
    pass


class OcrEngineNotFound(OcrError):
    pass


class OcrConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    engine_path: str = "tesseract"
    language: str = "nld"
    # 4 = single column of text of variable sizes
    page_segmentation_mode: int = Field(4, ge=0, le=13)
    trained_data_path: Optional[str] = None
    wordlist_path: Optional[str] = None


@dataclass
class PageText:
    volume_id: str
    page_number: int
    lines: List[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    @property
    def stem(self) -> str:
        return page_stem(self.volume_id, self.page_number)

    def save(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        out = directory / f"{self.stem}.txt"
        out.write_text(self.text, encoding="utf-8")
        return out

    @classmethod
    def load(cls, path: Path, volume_id: str, page_number: int) -> "PageText":
        return cls(volume_id, page_number, split_lines(Path(path).read_text(encoding="utf-8")))


def split_lines(text: str) -> List[str]:
    # only "\n" separates lines; a single trailing newline does not add an empty line
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def engine_args(image_path: Path, cfg: OcrConfig) -> List[str]:
    """Arguments after the executable, in tesseract's CLI dialect."""
    language = cfg.language
    args = [str(image_path), "stdout"]
    if cfg.trained_data_path:
        trained = Path(cfg.trained_data_path)
        if trained.suffix == ".traineddata":
            args += ["--tessdata-dir", str(trained.parent)]
            language = trained.stem
        else:
            args += ["--tessdata-dir", str(trained)]
    args += ["-l", language, "--psm", str(cfg.page_segmentation_mode)]
    if cfg.wordlist_path:
        args += ["--user-words", str(cfg.wordlist_path)]
    # no form feed after the page text
    args += ["-c", "page_separator="]
    return args


def recognize(image: PageImage, cfg: Optional[OcrConfig] = None) -> PageText:
    cfg = cfg or OcrConfig()
    if image.path is None or not Path(image.path).is_file():
        raise OcrError(f"page image {image.stem} is not on disk")
    exe = shutil.which(cfg.engine_path)
    if exe is None:
        raise OcrEngineNotFound(f"OCR engine not found: {cfg.engine_path}")
    cmd = [exe] + engine_args(Path(image.path), cfg)
    log.debug("ocr: %s", cmd)
    proc = subprocess.run(cmd, capture_output=True)
    if proc.returncode != 0:
        raise OcrError(
            f"{image.stem}: OCR engine exited with {proc.returncode}: "
            f"{proc.stderr.decode('utf-8', errors='replace').strip()}"
        )
    try:
        text = proc.stdout.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise OcrError(f"{image.stem}: OCR output is not valid UTF-8") from exc
    return PageText(image.volume_id, image.page_number, split_lines(text))
