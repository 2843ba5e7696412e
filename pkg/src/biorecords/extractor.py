"""Person text -> validated PersonRecord via a function-calling chat model."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, SecretStr

from .llm import HttpChatClient, LlmClient, MalformedToolCall, ReplayClient
from .schema import PersonRecord, RecordValidationError, tool_schema, validate
from .segmenter import PersonText

log = logging.getLogger(__name__)

SYSTEM_PROMPT = (
    "You are an advanced data extraction system.\n"
    "- You can identify each person by surname\n"
    "- The surname is always in uppercase letters, followed by the middle and/or first name\n"
    "- If you can't determine the field value, refer to the examples"
)
USER_PREFIX = "Please extract the data for the following person: "


class ExtractorConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    backend: Literal["http", "replay"] = "http"
    model_name: str = "gpt-3.5-turbo"
    temperature: float = Field(0.7, ge=0, le=2)
    max_retries: int = Field(3, ge=1)
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    api_key_env: str = "OPENAI_API_KEY"
    api_key: Optional[SecretStr] = Field(None, exclude=True)
    # "function" forces the Person tool; "auto" lets the model decide
    tool_choice: str = "function"
    max_concurrency: int = Field(4, ge=1)
    timeout: float = Field(120.0, gt=0)
    replay_path: Optional[str] = None

    def resolved_api_key(self) -> Optional[str]:
        if self.api_key is not None:
            return self.api_key.get_secret_value()
        return os.environ.get(self.api_key_env)


def make_client(cfg: ExtractorConfig) -> LlmClient:
    if cfg.backend == "replay":
        if not cfg.replay_path:
            raise ValueError("replay backend needs replay_path")
        return ReplayClient.from_file(cfg.replay_path)
    return HttpChatClient(
        cfg.endpoint_url,
        cfg.model_name,
        temperature=cfg.temperature,
        api_key=cfg.resolved_api_key(),
        tool_choice=cfg.tool_choice,
        timeout=cfg.timeout,
        max_concurrency=cfg.max_concurrency,
    )


def build_messages(person_info: str) -> List[dict]:
    if not person_info or not person_info.strip():
        raise ValueError("person_info is empty")
    return [
        {"role": "system", "content": SYSTEM_PROMPT},
        {"role": "user", "content": USER_PREFIX + person_info},
    ]


class ExhaustedRetries(RuntimeError):
    def __init__(self, attempt_errors: List[List[str]]):
        self.attempt_errors = attempt_errors
        lines = [f"attempt {i}: {'; '.join(errs)}" for i, errs in enumerate(attempt_errors, 1)]
        super().__init__(f"no valid record after {len(attempt_errors)} attempt(s): " + " | ".join(lines))


@dataclass
class ExtractionResult:
    record: PersonRecord
    attempts: int
    attempt_errors: List[List[str]] = field(default_factory=list)


def extract(person, client: LlmClient, cfg: Optional[ExtractorConfig] = None) -> ExtractionResult:
    """Prompt ``client`` until it returns a schema-valid record.

    ``cfg.max_retries`` is the total number of attempts. Validation failures
    and malformed tool calls are retried; transport errors propagate.
    """
    cfg = cfg or ExtractorConfig()
    text = person.text if isinstance(person, PersonText) else str(person)
    messages = build_messages(text)
    schema = tool_schema()
    failures: List[List[str]] = []
    for attempt in range(1, cfg.max_retries + 1):
        try:
            raw = client.send(messages, schema)
            record = validate(raw)
        except RecordValidationError as exc:
            failures.append([str(e) for e in exc.errors])
        except MalformedToolCall as exc:
            failures.append([f"MalformedToolCall({exc})"])
        else:
            return ExtractionResult(record, attempt, failures)
        log.info("attempt %d/%d rejected: %s", attempt, cfg.max_retries, failures[-1])
    raise ExhaustedRetries(failures)
