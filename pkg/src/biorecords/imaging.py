"""Page rasterization and the denoise -> grayscale -> binarize chain."""

from __future__ import annotations

import logging
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Literal, Optional

import cv2
import numpy as np
from PIL import Image
from pydantic import BaseModel, ConfigDict, Field, field_validator

log = logging.getLogger(__name__)


class ImagingError(RuntimeError):
    pass


class RasterizerNotFound(ImagingError):
    pass


class RasterizerFailed(ImagingError):
    pass


@dataclass
class PageImage:
    volume_id: str
    page_number: int
    pixels: np.ndarray  # HxW uint8 (gray) or HxWx3 uint8 (RGB)
    dpi: int = 300
    path: Optional[Path] = None

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def is_rgb(self) -> bool:
        return self.pixels.ndim == 3 and self.pixels.shape[2] == 3

    @property
    def stem(self) -> str:
        return page_stem(self.volume_id, self.page_number)

    def save(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        out = directory / f"{self.stem}.png"
        Image.fromarray(self.pixels).save(out, format="PNG", dpi=(self.dpi, self.dpi))
        self.path = out
        return out

    @classmethod
    def load(cls, path: Path, volume_id: str, page_number: int, dpi: int = 300) -> "PageImage":
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            pixels = np.array(im, dtype=np.uint8)
        return cls(volume_id, page_number, pixels, dpi=dpi, path=Path(path))


def page_stem(volume_id: str, page_number: int) -> str:
    return f"{volume_id}_{page_number:04d}"


class PreprocessConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # "nlmeans" is OpenCV's colored non-local-means; "median" is the fallback filter
    denoise_method: Literal["nlmeans", "median"] = "nlmeans"
    denoise_strength: float = Field(5, ge=0)
    denoise_color_strength: float = Field(5, ge=0)
    template_window: int = 7
    search_window: int = 21
    binarize_threshold: int = Field(200, gt=0, lt=255)

    @field_validator("template_window", "search_window")
    @classmethod
    def _odd_positive(cls, v: int) -> int:
        if v <= 0 or v % 2 == 0:
            raise ValueError("window sizes must be odd and positive")
        return v


class RasterizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rasterizer_path: str = "pdftoppm"
    # command-line dialect of the executable; "auto" guesses from its name
    rasterizer: Literal["auto", "pdftoppm", "pypdfium2"] = "auto"
    dpi: int = Field(300, gt=0)


def _dialect(cfg: RasterizerConfig) -> str:
    if cfg.rasterizer != "auto":
        return cfg.rasterizer
    return "pypdfium2" if "pdfium" in Path(cfg.rasterizer_path).name else "pdftoppm"


def _rasterizer_command(cfg: RasterizerConfig, exe: str, pdf: Path, outdir: Path, dpi: int) -> List[str]:
    if _dialect(cfg) == "pypdfium2":
        return [exe, "render", str(pdf), "-o", str(outdir), "--prefix", "page-",
                "--scale", repr(dpi / 72.0), "-f", "png"]
    return [exe, "-r", str(dpi), "-png", str(pdf), str(outdir / "page")]


_TRAILING_NUMBER = re.compile(r"(\d+)\.png$")


def rasterize_pdf(
    pdf_path,
    dpi: Optional[int] = None,
    *,
    out_dir,
    volume_id: str,
    cfg: Optional[RasterizerConfig] = None,
) -> List[PageImage]:
    """Render every page of ``pdf_path`` to ``out_dir/<volume>_<page:04d>.png``.

    The rendering itself is done by an external executable (pdftoppm or the
    pypdfium2 CLI). Pages are numbered from 1 in document order.
    """
    cfg = cfg or RasterizerConfig()
    dpi = dpi or cfg.dpi
    pdf = Path(pdf_path)
    if not pdf.is_file():
        raise FileNotFoundError(f"PDF not found: {pdf}")
    exe = shutil.which(cfg.rasterizer_path)
    if exe is None:
        raise RasterizerNotFound(f"rasterizer executable not found: {cfg.rasterizer_path}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="raster-") as tmp:
        tmpdir = Path(tmp)
        cmd = _rasterizer_command(cfg, exe, pdf, tmpdir, dpi)
        log.debug("rasterize: %s", cmd)
        proc = subprocess.run(cmd, capture_output=True)
        rendered = sorted(
            (int(m.group(1)), p)
            for p in tmpdir.glob("*.png")
            if (m := _TRAILING_NUMBER.search(p.name))
        )
        if proc.returncode != 0:
            done = len(rendered)
            raise RasterizerFailed(
                f"{pdf.name}: rasterizer exited with {proc.returncode} after {done} page(s) "
                f"(failing at page {done + 1}): {proc.stderr.decode(errors='replace').strip()}"
            )
        pages = []
        for number, (_, src) in enumerate(rendered, start=1):
            dest = out_dir / f"{page_stem(volume_id, number)}.png"
            shutil.move(str(src), dest)
            page = PageImage.load(dest, volume_id, number, dpi=dpi)
            if not page.is_rgb:
                page.pixels = cv2.cvtColor(page.pixels, cv2.COLOR_GRAY2RGB)
            pages.append(page)
    if not pages:
        raise RasterizerFailed(f"{pdf.name}: rasterizer produced no pages")
    return pages


def denoise(image: PageImage, cfg: Optional[PreprocessConfig] = None) -> PageImage:
    cfg = cfg or PreprocessConfig()
    if not image.is_rgb:
        raise ValueError("denoise expects an RGB image")
    window = cfg.search_window if cfg.denoise_method == "nlmeans" else cfg.template_window
    if window > min(image.width, image.height):
        raise ValueError(
            f"window {window}px larger than image {image.width}x{image.height}"
        )
    src = np.ascontiguousarray(image.pixels)
    if cfg.denoise_method == "nlmeans":
        out = cv2.fastNlMeansDenoisingColored(
            src, None, cfg.denoise_strength, cfg.denoise_color_strength,
            cfg.template_window, cfg.search_window,
        )
    else:
        out = cv2.medianBlur(src, cfg.template_window)
    return replace(image, pixels=out, path=None)


def to_grayscale(image: PageImage) -> PageImage:
    # ITU-R BT.601 luma: 0.299 R + 0.587 G + 0.114 B
    if not image.is_rgb:
        raise ValueError("to_grayscale expects an RGB image")
    gray = cv2.cvtColor(np.ascontiguousarray(image.pixels), cv2.COLOR_RGB2GRAY)
    return replace(image, pixels=gray, path=None)


def binarize(image: PageImage, threshold: int = 200) -> PageImage:
    """Global threshold: value > threshold becomes 255, everything else 0."""
    if image.pixels.ndim != 2:
        raise ValueError("binarize expects a single-channel grayscale image")
    _, out = cv2.threshold(image.pixels, threshold, 255, cv2.THRESH_BINARY)
    return replace(image, pixels=out, path=None)


def preprocess(image: PageImage, cfg: Optional[PreprocessConfig] = None) -> PageImage:
    cfg = cfg or PreprocessConfig()
    return binarize(to_grayscale(denoise(image, cfg)), cfg.binarize_threshold)


class ImagingConfig(RasterizerConfig, PreprocessConfig):
    """Rasterizer and preprocessing settings as one config section."""
