import numpy as np
import pytest

from biorecords.imaging import (
    PageImage,
    PreprocessConfig,
    RasterizerConfig,
    RasterizerFailed,
    RasterizerNotFound,
    binarize,
    denoise,
    preprocess,
    rasterize_pdf,
    to_grayscale,
)
from helpers import write_executable, write_pdf

PDFIUM = RasterizerConfig(rasterizer_path="pypdfium2")


def rgb(pixels):
    return PageImage("v", 1, np.asarray(pixels, dtype=np.uint8))


def test_three_pages_in_order(tmp_path):
    pdf = write_pdf(tmp_path / "doc.pdf", 3)
    pages = rasterize_pdf(pdf, 72, out_dir=tmp_path / "out", volume_id="v1", cfg=PDFIUM)
    assert [p.page_number for p in pages] == [1, 2, 3]
    assert [p.path.name for p in pages] == ["v1_0001.png", "v1_0002.png", "v1_0003.png"]
    assert all(p.is_rgb and p.dpi == 72 for p in pages)


def test_blank_page_is_white(tmp_path):
    pdf = write_pdf(tmp_path / "blank.pdf", 1, blank=True)
    (page,) = rasterize_pdf(pdf, 72, out_dir=tmp_path, volume_id="b", cfg=PDFIUM)
    assert page.pixels.min() == 255


def test_letter_page_width_at_300_dpi(tmp_path):
    pdf = write_pdf(tmp_path / "one.pdf", 1)
    (page,) = rasterize_pdf(pdf, 300, out_dir=tmp_path, volume_id="w", cfg=PDFIUM)
    assert abs(page.width - 2550) <= 1
    assert abs(page.height - 3300) <= 1


def test_missing_pdf(tmp_path):
    with pytest.raises(FileNotFoundError):
        rasterize_pdf(tmp_path / "nope.pdf", out_dir=tmp_path, volume_id="v", cfg=PDFIUM)


def test_missing_rasterizer(tmp_path):
    pdf = write_pdf(tmp_path / "doc.pdf", 1)
    cfg = RasterizerConfig(rasterizer_path="definitely-not-installed-raster")
    with pytest.raises(RasterizerNotFound):
        rasterize_pdf(pdf, out_dir=tmp_path, volume_id="v", cfg=cfg)


def test_rasterizer_failure_reports_page(tmp_path):
    pdf = write_pdf(tmp_path / "doc.pdf", 1)
    exe = write_executable(tmp_path / "broken-raster", "import sys\nsys.stderr.write('corrupt xref')\nsys.exit(1)\n")
    cfg = RasterizerConfig(rasterizer_path=str(exe), rasterizer="pdftoppm")
    with pytest.raises(RasterizerFailed, match="page 1.*corrupt xref"):
        rasterize_pdf(pdf, out_dir=tmp_path, volume_id="v", cfg=cfg)


def test_uniform_image_unchanged_by_denoise():
    img = rgb(np.full((40, 40, 3), 180))
    assert np.array_equal(denoise(img).pixels, img.pixels)


@pytest.mark.parametrize("method,speck", [("nlmeans", 100), ("median", 100), ("median", 0)])
def test_denoise_pulls_stray_pixel_toward_white(method, speck):
    white = np.full((48, 48, 3), 255, dtype=np.uint8)
    noisy = white.copy()
    noisy[24, 24] = speck
    out = denoise(rgb(noisy), PreprocessConfig(denoise_method=method)).pixels
    assert out.shape == noisy.shape
    assert out[24, 24].min() > speck
    # deviation from white around the speck
    win = np.s_[23:26, 23:26]
    assert np.abs(out[win].astype(int) - 255).mean() < np.abs(noisy[win].astype(int) - 255).mean()


def test_denoise_window_larger_than_image():
    with pytest.raises(ValueError):
        denoise(rgb(np.zeros((10, 10, 3))))


def test_grayscale_weights():
    img = rgb([[[0, 0, 0], [90, 90, 90], [255, 255, 255], [255, 0, 0], [0, 255, 0], [0, 0, 255]]])
    assert to_grayscale(img).pixels.tolist() == [[0, 90, 255, 76, 150, 29]]


def test_threshold_boundary():
    img = PageImage("v", 1, np.array([[199, 200, 201, 255, 0]], dtype=np.uint8))
    assert binarize(img).pixels.tolist() == [[0, 0, 255, 255, 0]]


def test_binarize_is_idempotent():
    rng = np.random.default_rng(3)
    img = PageImage("v", 1, rng.integers(0, 256, (30, 30), dtype=np.uint8))
    once = binarize(img)
    assert np.array_equal(binarize(once).pixels, once.pixels)


def test_checkerboard_survives():
    board = (np.indices((32, 32)).sum(axis=0) // 4 % 2 * 255).astype(np.uint8)
    img = PageImage("v", 1, board)
    assert np.array_equal(binarize(img).pixels, board)


def test_preprocess_outputs_only_black_and_white(tmp_path):
    pdf = write_pdf(tmp_path / "doc.pdf", 1)
    (page,) = rasterize_pdf(pdf, 72, out_dir=tmp_path, volume_id="v", cfg=PDFIUM)
    out = preprocess(page)
    assert out.pixels.ndim == 2
    assert set(np.unique(out.pixels)) <= {0, 255}
    assert out.pixels.shape == page.pixels.shape[:2]
    assert (out.pixels == 0).any()


def test_save_and_load_round_trip(tmp_path):
    img = rgb(np.random.default_rng(1).integers(0, 256, (8, 9, 3)))
    path = img.save(tmp_path)
    assert path.name == "v_0001.png"
    assert np.array_equal(PageImage.load(path, "v", 1).pixels, img.pixels)


@pytest.mark.parametrize("bad", [{"template_window": 6}, {"search_window": 0}, {"binarize_threshold": 255}])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        PreprocessConfig(**bad)
