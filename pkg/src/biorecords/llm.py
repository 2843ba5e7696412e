"""Chat-completion clients: an HTTP function-calling backend and a replay mock."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Protocol, Union

import httpx

log = logging.getLogger(__name__)

TOOL_NAME = "Person"


class LlmError(RuntimeError):
    pass


class TransportError(LlmError):
    """The endpoint could not be reached or answered with a non-2xx status."""


class MalformedToolCall(LlmError):
    """The response carried no usable tool-call arguments."""


class ReplayNotFound(LlmError, LookupError):
    pass


class LlmClient(Protocol):
    def send(self, messages: List[dict], schema: dict) -> Any:
        """Return the decoded JSON arguments the model produced for the tool."""


def user_content(messages: List[dict]) -> str:
    for msg in messages:
        if msg.get("role") == "user":
            return msg["content"]
    raise ValueError("no user message")


def message_digest(messages_or_text: Union[List[dict], str]) -> str:
    text = messages_or_text if isinstance(messages_or_text, str) else user_content(messages_or_text)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ReplayClient:
    """Returns canned responses keyed by the SHA-256 of the user message.

    A replay entry is either one response document, or a list of documents
    handed out in order on successive calls (the last one repeats).
    """

    def __init__(self, entries: Dict[str, Any]):
        self.entries = dict(entries)
        self._calls: Dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path) -> "ReplayClient":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: replay file must be a JSON object")
        return cls(data)

    def send(self, messages: List[dict], schema: dict) -> Any:
        key = message_digest(messages)
        if key not in self.entries:
            raise ReplayNotFound(f"no replay entry for message digest {key}")
        entry = self.entries[key]
        if not isinstance(entry, list):
            return entry
        with self._lock:
            n = self._calls.get(key, 0)
            self._calls[key] = n + 1
        return entry[min(n, len(entry) - 1)]


def tool_definition(schema: dict) -> dict:
    return {
        "type": "function",
        "function": {
            "name": TOOL_NAME,
            "description": "Record the biographical data extracted for one person",
            "parameters": schema,
        },
    }


class HttpChatClient:
    """OpenAI-compatible ``/chat/completions`` client using function calling."""

    def __init__(
        self,
        endpoint_url: str,
        model_name: str,
        temperature: float = 0.7,
        api_key: Optional[str] = None,
        tool_choice: str = "function",
        timeout: float = 120.0,
        max_concurrency: int = 4,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint_url = endpoint_url
        self.model_name = model_name
        self.temperature = temperature
        self.tool_choice = tool_choice
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._http = httpx.Client(timeout=timeout, headers=headers, transport=transport)
        self._slots = threading.BoundedSemaphore(max_concurrency)

    def request_body(self, messages: List[dict], schema: dict) -> dict:
        if self.tool_choice == "function":
            choice: Any = {"type": "function", "function": {"name": TOOL_NAME}}
        else:
            choice = self.tool_choice
        return {
            "model": self.model_name,
            "messages": messages,
            "temperature": self.temperature,
            "tools": [tool_definition(schema)],
            "tool_choice": choice,
        }

    def send(self, messages: List[dict], schema: dict) -> Any:
        body = self.request_body(messages, schema)
        with self._slots:
            try:
                resp = self._http.post(self.endpoint_url, json=body)
            except httpx.HTTPError as exc:
                raise TransportError(f"request to {self.endpoint_url} failed: {exc}") from exc
        if not resp.is_success:
            raise TransportError(f"HTTP {resp.status_code} from {self.endpoint_url}: {resp.text[:500]}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise MalformedToolCall("response body is not JSON") from exc
        return parse_tool_arguments(payload)

    def close(self):
        self._http.close()


def parse_tool_arguments(payload: Any) -> Any:
    try:
        message = payload["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedToolCall("response has no choices[0].message") from exc
    calls = message.get("tool_calls") or []
    if not calls:
        raise MalformedToolCall("model answered without a tool call")
    try:
        arguments = calls[0]["function"]["arguments"]
    except (KeyError, TypeError) as exc:
        raise MalformedToolCall("tool call has no function arguments") from exc
    if isinstance(arguments, (dict, list)):
        return arguments
    try:
        return json.loads(arguments)
    except (TypeError, json.JSONDecodeError) as exc:
        raise MalformedToolCall(f"tool-call arguments are not JSON: {exc}") from exc
