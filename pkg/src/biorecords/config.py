"""Pipeline configuration: one JSON document, secrets from the environment."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .extractor import ExtractorConfig
from .imaging import ImagingConfig
from .ocr import OcrConfig


class ConfigError(ValueError):
    pass


class VolumeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., pattern=r"^[A-Za-z0-9][A-Za-z0-9-]*$")
    pdf: Optional[str] = None


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    workdir: str
    volumes: List[VolumeSpec] = Field(default_factory=list)
    imaging: ImagingConfig = Field(default_factory=ImagingConfig)
    ocr: OcrConfig = Field(default_factory=OcrConfig)
    extractor: ExtractorConfig = Field(default_factory=ExtractorConfig)
    # SQLite path (optionally "sqlite:///..."); relative paths live in the workdir
    store: str = "store.sqlite"
    jobs: int = Field(1, ge=1)
    log_level: str = "INFO"
    ground_truth: Optional[str] = None

    @field_validator("log_level")
    @classmethod
    def _level(cls, v: str) -> str:
        if not isinstance(logging.getLevelName(v.upper()), int):
            raise ValueError(f"unknown logging level {v!r}")
        return v.upper()

    @field_validator("volumes")
    @classmethod
    def _unique(cls, v: List[VolumeSpec]) -> List[VolumeSpec]:
        ids = [vol.id for vol in v]
        if len(ids) != len(set(ids)):
            raise ValueError("volume ids must be unique")
        return v

    @property
    def workdir_path(self) -> Path:
        return Path(self.workdir)

    @property
    def store_path(self) -> Path:
        raw = self.store[len("sqlite:///"):] if self.store.startswith("sqlite:///") else self.store
        path = Path(raw)
        return path if path.is_absolute() else self.workdir_path / path


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    p = Path(value).expanduser()
    return str(p if p.is_absolute() else (base / p).resolve())


def _resolve_exe(base: Path, value: str) -> str:
    # bare command names are looked up on PATH; anything with a slash is a path
    return _resolve(base, value) if ("/" in value or os.sep in value) else value


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    try:
        cfg = PipelineConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{path}: invalid config:\n{exc}") from exc

    base = path.resolve().parent
    cfg.workdir = _resolve(base, cfg.workdir)
    cfg.ground_truth = _resolve(base, cfg.ground_truth)
    for vol in cfg.volumes:
        vol.pdf = _resolve(base, vol.pdf)
    cfg.imaging.rasterizer_path = _resolve_exe(base, cfg.imaging.rasterizer_path)
    cfg.ocr.engine_path = _resolve_exe(base, cfg.ocr.engine_path)
    cfg.ocr.trained_data_path = _resolve(base, cfg.ocr.trained_data_path)
    cfg.ocr.wordlist_path = _resolve(base, cfg.ocr.wordlist_path)
    cfg.extractor.replay_path = _resolve(base, cfg.extractor.replay_path)

    workdir = cfg.workdir_path
    try:
        workdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"workdir {workdir} cannot be created: {exc}") from exc
    if not os.access(workdir, os.W_OK):
        raise ConfigError(f"workdir {workdir} is not writable")
    return cfg
