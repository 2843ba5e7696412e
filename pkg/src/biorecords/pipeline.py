"""Stage orchestration over a resumable working directory.

Layout::

    pages/     preprocessed page images (raw renders in pages/raw/)
    text/      OCR text per page
    persons/   text per person + <volume>.manifest.json
    records/   extracted person JSON
    links/     <volume>.json link decisions (+ .details.json)
    reports/   evaluation output
"""

from __future__ import annotations

import csv
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional

from . import imaging, ocr
from .config import PipelineConfig
from .extractor import extract, make_client
from .linker import Store, link_and_enrich
from .metrics.json_accuracy import (
    NonConformingDocument,
    aggregate,
    category_accuracy,
    json_accuracy,
    overall_accuracy,
)
from .metrics.linkage import format_table, linkage_eval, total_row
from .metrics.text import EmptyReference, text_metrics, volume_average
from .schema import validate
from .segmenter import segment_volume, write_persons

log = logging.getLogger(__name__)

STAGES = ("ingest", "ocr", "segment", "extract", "link", "evaluate")
_PAGE_FILE = re.compile(r"^(?P<vol>.+)_(?P<page>\d{4,})\.(?P<ext>png|txt)$")


class StageError(RuntimeError):
    """A stage cannot start (bad invocation, missing inputs)."""


class MissingArtifacts(StageError):
    """A stage was run before the stage it depends on."""


@dataclass
class StageResult:
    stage: str
    processed: int = 0
    skipped: int = 0
    failures: List[dict] = field(default_factory=list)

    def fail(self, item: str, exc: BaseException):
        log.error("%s: %s failed: %s", self.stage, item, exc)
        self.failures.append({"item": item, "error": f"{type(exc).__name__}: {exc}"})

    def as_dict(self) -> dict:
        return {"processed": self.processed, "skipped": self.skipped, "failures": self.failures}


def _dump_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _pages_of(directory: Path, volume: str, ext: str) -> List[tuple]:
    found = []
    if not directory.is_dir():
        return found
    for p in directory.iterdir():
        m = _PAGE_FILE.match(p.name)
        if m and m["vol"] == volume and m["ext"] == ext:
            found.append((int(m["page"]), p))
    return sorted(found)


class Pipeline:
    def __init__(self, cfg: PipelineConfig, *, force: bool = False, jobs: Optional[int] = None,
                 volumes: Optional[Iterable[str]] = None):
        self.cfg = cfg
        self.force = force
        self.jobs = jobs or cfg.jobs
        wanted = set(volumes or [])
        unknown = wanted - {v.id for v in cfg.volumes}
        if unknown:
            raise ValueError(f"unknown volume(s): {', '.join(sorted(unknown))}")
        self.volumes = [v for v in cfg.volumes if not wanted or v.id in wanted]
        self.root = cfg.workdir_path
        self.results: Dict[str, StageResult] = {}

    def dir(self, name: str) -> Path:
        return self.root / name

    def _map(self, fn: Callable, items: list) -> list:
        if self.jobs <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, items))

    # -- stages ---------------------------------------------------------------

    def ingest(self) -> StageResult:
        res = StageResult("ingest")
        pages_dir, raw_dir = self.dir("pages"), self.dir("pages") / "raw"
        for vol in self.volumes:
            if _pages_of(pages_dir, vol.id, "png") and not self.force:
                res.skipped += 1
                continue
            if not vol.pdf:
                raise MissingArtifacts(f"volume {vol.id} has no pdf configured")
            try:
                raw = imaging.rasterize_pdf(vol.pdf, self.cfg.imaging.dpi, out_dir=raw_dir,
                                            volume_id=vol.id, cfg=self.cfg.imaging)
            except (imaging.ImagingError, OSError) as exc:
                res.fail(vol.id, exc)
                continue

            def work(page):
                try:
                    imaging.preprocess(page, self.cfg.imaging).save(pages_dir)
                    return None
                except Exception as exc:  # reported per page
                    return page.stem, exc

            for outcome in self._map(work, raw):
                if outcome:
                    res.fail(*outcome)
                else:
                    res.processed += 1
        return self._done(res)

    def ocr(self) -> StageResult:
        res = StageResult("ocr")
        text_dir = self.dir("text")
        for vol in self.volumes:
            pages = _pages_of(self.dir("pages"), vol.id, "png")
            if not pages:
                raise MissingArtifacts(f"no page images for volume {vol.id}; run ingest first")
            todo = [(n, p) for n, p in pages
                    if self.force or not (text_dir / f"{imaging.page_stem(vol.id, n)}.txt").exists()]
            res.skipped += len(pages) - len(todo)

            def work(item, vol_id=vol.id):
                n, path = item
                try:
                    image = imaging.PageImage.load(path, vol_id, n, dpi=self.cfg.imaging.dpi)
                    ocr.recognize(image, self.cfg.ocr).save(text_dir)
                    return None
                except Exception as exc:
                    return imaging.page_stem(vol_id, n), exc

            for outcome in self._map(work, todo):
                if outcome:
                    res.fail(*outcome)
                else:
                    res.processed += 1
        return self._done(res)

    def segment(self) -> StageResult:
        res = StageResult("segment")
        persons_dir = self.dir("persons")
        for vol in self.volumes:
            manifest = persons_dir / f"{vol.id}.manifest.json"
            if manifest.exists() and not self.force:
                res.skipped += 1
                continue
            pages = _pages_of(self.dir("text"), vol.id, "txt")
            if not pages:
                raise MissingArtifacts(f"no OCR text for volume {vol.id}; run ocr first")
            texts = [ocr.PageText.load(p, vol.id, n) for n, p in pages]
            for old in persons_dir.glob(f"{vol.id}_*.txt"):
                old.unlink()
            seg = segment_volume(texts)
            write_persons(seg, persons_dir, vol.id)
            res.processed += len(seg.persons)
        return self._done(res)

    def _manifest(self, vol_id: str) -> dict:
        path = self.dir("persons") / f"{vol_id}.manifest.json"
        if not path.exists():
            raise MissingArtifacts(f"no segmented persons for volume {vol_id}; run segment first")
        return json.loads(path.read_text(encoding="utf-8"))

    def extract(self) -> StageResult:
        res = StageResult("extract")
        records_dir = self.dir("records")
        records_dir.mkdir(parents=True, exist_ok=True)
        todo = []
        for vol in self.volumes:
            for person in self._manifest(vol.id)["persons"]:
                out = records_dir / (Path(person["file"]).stem + ".json")
                if out.exists() and not self.force:
                    res.skipped += 1
                else:
                    todo.append((self.dir("persons") / person["file"], out))
        if not todo:
            return self._done(res)
        try:
            client = make_client(self.cfg.extractor)
        except (ValueError, OSError) as exc:
            raise StageError(f"cannot set up the LLM client: {exc}") from exc

        def work(item):
            src, out = item
            try:
                result = extract(src.read_text(encoding="utf-8"), client, self.cfg.extractor)
            except Exception as exc:
                return src.name, exc, None
            out.write_text(result.record.dumps(), encoding="utf-8")
            return src.name, None, result.attempts

        attempts = {}
        for name, exc, n in self._map(work, todo):
            if exc is not None:
                res.fail(name, exc)
            else:
                res.processed += 1
                attempts[name] = n
        if attempts:
            log.info("extraction attempts: %s", attempts)
        return self._done(res)

    def link(self) -> StageResult:
        res = StageResult("link")
        links_dir = self.dir("links")
        store = None
        try:
            for vol in self.volumes:
                out = links_dir / f"{vol.id}.json"
                if out.exists() and not self.force:
                    res.skipped += 1
                    continue
                manifest = self._manifest(vol.id)
                if store is None:
                    self.cfg.store_path.parent.mkdir(parents=True, exist_ok=True)
                    store = Store(self.cfg.store_path)
                decisions, details = {}, {}
                for person in manifest["persons"]:
                    rec_path = self.dir("records") / (Path(person["file"]).stem + ".json")
                    if not rec_path.exists():
                        res.fail(rec_path.name, MissingArtifacts("no extracted record"))
                        continue
                    try:
                        record = validate(json.loads(rec_path.read_text(encoding="utf-8")))
                        decision, summary = link_and_enrich(record, store)
                    except Exception as exc:
                        res.fail(rec_path.name, exc)
                        continue
                    decisions[rec_path.name] = decision.to_eval_entry()
                    details[rec_path.name] = {
                        "matched_condition": decision.matched_condition.value,
                        "suspected_person_id": decision.suspected_person_id,
                        "filled_columns": summary.filled_columns,
                        "inserted": summary.inserted,
                        "skipped_tables": summary.skipped_tables,
                        "rating": summary.rating_after,
                    }
                    res.processed += 1
                _dump_json(out, decisions)
                _dump_json(links_dir / f"{vol.id}.details.json", details)
        finally:
            if store is not None:
                store.close()
        return self._done(res)

    def evaluate(self, ground_truth) -> StageResult:
        res = StageResult("evaluate")
        gt = Path(ground_truth)
        if not gt.is_dir():
            raise MissingArtifacts(f"ground-truth directory not found: {gt}")
        reports = self.dir("reports")
        reports.mkdir(parents=True, exist_ok=True)
        summary_lines: List[str] = []

        text_docs, text_volumes = [], []
        for vol in self.volumes:
            per_doc = []
            for ref in sorted((gt / "persons").glob(f"{vol.id}_*.txt")):
                hyp = self.dir("persons") / ref.name
                hyp_text = hyp.read_text(encoding="utf-8") if hyp.exists() else ""
                try:
                    m = text_metrics(ref.read_text(encoding="utf-8"), hyp_text)
                except EmptyReference as exc:
                    res.fail(ref.name, exc)
                    continue
                per_doc.append(m)
                text_docs.append({"volume": vol.id, "file": ref.name, "missing": not hyp.exists(), **m.as_dict()})
                res.processed += 1
            if per_doc:
                text_volumes.append(volume_average(per_doc, vol.id).as_dict())
        if text_docs:
            _dump_json(reports / "text_metrics.json", {"documents": text_docs, "volumes": text_volumes})
            _write_csv(reports / "text_metrics.csv", text_docs)
            summary_lines.append("OCR text (mean per volume)")
            for v in text_volumes:
                summary_lines.append(f"  {v['volume']:<12} CER {100 * v['cer']:6.2f}%  WER {100 * v['wer']:6.2f}%  ({v['documents']} docs)")

        json_rows, json_volumes = [], {}
        for vol in self.volumes:
            results = []
            for ref in sorted((gt / "records").glob(f"{vol.id}_*.json")):
                gen_path = self.dir("records") / ref.name
                generated = json.loads(gen_path.read_text(encoding="utf-8")) if gen_path.exists() else {}
                try:
                    results.append(json_accuracy(json.loads(ref.read_text(encoding="utf-8")), generated))
                except (NonConformingDocument, ValueError) as exc:
                    res.fail(ref.name, exc)
                    continue
                res.processed += 1
            if results:
                rows = aggregate(results)
                json_volumes[vol.id] = {
                    "documents": len(results),
                    "keys": [r.as_dict() for r in rows],
                    "categories": category_accuracy(rows),
                    "overall": overall_accuracy(rows),
                }
                json_rows += [{"volume": vol.id, **r.as_dict()} for r in rows]
        if json_rows:
            _dump_json(reports / "json_accuracy.json", json_volumes)
            _write_csv(reports / "json_accuracy.csv", json_rows)
            summary_lines.append("JSON accuracy per category")
            for vol_id, data in json_volumes.items():
                cats = ", ".join(f"{c} {a:.2f}%" for c, a in data["categories"].items())
                summary_lines.append(f"  {vol_id:<12} overall {data['overall']:.2f}%  [{cats}]")

        link_reports = []
        for vol in self.volumes:
            ref = gt / "links" / f"{vol.id}.json"
            if not ref.exists():
                continue
            got = self.dir("links") / f"{vol.id}.json"
            actual = json.loads(got.read_text(encoding="utf-8")) if got.exists() else {}
            try:
                link_reports.append(linkage_eval(json.loads(ref.read_text(encoding="utf-8")), actual, vol.id))
            except ValueError as exc:
                res.fail(ref.name, exc)
                continue
            res.processed += 1
        if link_reports:
            _dump_json(reports / "linkage.json", {
                "volumes": [r.as_dict() for r in link_reports], "total": total_row(link_reports)})
            _write_csv(reports / "linkage.csv", [r.as_dict() for r in link_reports])
            summary_lines += ["Linkage accuracy", format_table(link_reports)]

        (reports / "summary.txt").write_text("\n".join(summary_lines) + "\n", encoding="utf-8")
        return self._done(res)

    def run(self, stage: str, ground_truth=None) -> Dict[str, StageResult]:
        ground_truth = ground_truth or self.cfg.ground_truth
        if stage == "all":
            for name in STAGES[:-1]:
                getattr(self, name)()
            if ground_truth:
                self.evaluate(ground_truth)
        elif stage == "evaluate":
            if not ground_truth:
                raise MissingArtifacts("evaluate needs --ground-truth")
            self.evaluate(ground_truth)
        elif stage in STAGES:
            getattr(self, stage)()
        else:
            raise ValueError(f"unknown stage {stage!r}")
        return self.results

    def _done(self, res: StageResult) -> StageResult:
        self.results[res.stage] = res
        log.info("%s: %d processed, %d skipped, %d failed",
                 res.stage, res.processed, res.skipped, len(res.failures))
        return res

    def write_summary(self) -> Path:
        path = self.root / "run_summary.json"
        _dump_json(path, {name: r.as_dict() for name, r in self.results.items()})
        return path

    @property
    def failed(self) -> bool:
        return any(r.failures for r in self.results.values())


def _write_csv(path: Path, rows: List[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
