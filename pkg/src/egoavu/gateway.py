"""Uniform client for chat-completion-style inference endpoints.

One client fronts every stage's model calls: text prompts with optional
image/audio/frame-sequence attachments go out, completion text comes back.
The client owns retries with exponential backoff, a bounded in-flight
window, per-endpoint rate limiting, and the structured-output repair loop.
A deterministic mock backend keyed by request digests makes every pipeline
stage runnable and byte-reproducible offline.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

import requests

from .errors import (
    FixtureMissError,
    GatewayError,
    RequestError,
    StructuredOutputError,
    TransportError,
)
from .schemas import extract_json_value, load_schema, validate

logger = logging.getLogger(__name__)

ATTACHMENT_KINDS = ("image_frame", "audio_span", "frame_sequence")


@dataclass(frozen=True)
class Attachment:
    """Reference to registered media; bytes are never carried in-process."""

    kind: str
    locator: str
    time: float | None = None       # image_frame
    start: float | None = None      # audio_span / frame_sequence
    end: float | None = None
    fps: float | None = None        # frame_sequence sampling rate
    max_frames: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ATTACHMENT_KINDS:
            raise RequestError(f"unknown attachment kind {self.kind!r}")

    def canonical(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class Message:
    role: str
    text: str
    attachments: tuple[Attachment, ...] = ()

    def canonical(self) -> dict[str, Any]:
        return {
            "role": self.role,
            "text": self.text,
            "attachments": [a.canonical() for a in self.attachments],
        }


@dataclass(frozen=True)
class DecodeParams:
    temperature: float = 0.0
    max_tokens: int = 1024
    seed: int | None = 0


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    messages: tuple[Message, ...]
    decode: DecodeParams = DecodeParams()
    schema_hint: str | None = None

    def validated(self) -> "ChatRequest":
        if not any(m.role == "user" for m in self.messages):
            raise RequestError("request needs at least one user message")
        if self.decode.temperature < 0:
            raise RequestError("temperature must be >= 0")
        return self

    def with_followup(self, text: str) -> "ChatRequest":
        return replace(self, messages=self.messages + (Message("user", text),))


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str = "complete"
    latency_ms: int = 0
    attempt: int = 1


def user_request(model_id: str, text: str, *, attachments: tuple[Attachment, ...] = (),
                 system: str | None = None, decode: DecodeParams | None = None,
                 schema_hint: str | None = None) -> ChatRequest:
    messages: tuple[Message, ...] = ()
    if system:
        messages += (Message("system", system),)
    messages += (Message("user", text, attachments),)
    return ChatRequest(model_id, messages, decode or DecodeParams(), schema_hint)


def request_digest(request: ChatRequest) -> str:
    """Stable digest of (model id, canonicalized messages, schema hint)."""
    payload = json.dumps(
        {
            "model_id": request.model_id,
            "messages": [m.canonical() for m in request.messages],
            "schema_hint": request.schema_hint,
        },
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class MockBackend:
    """Deterministic offline backend.

    Responses come from a fixture table keyed by request digest; unmatched
    requests fall through to ``default`` (a string, or a callable over the
    request for scripted corpora). Strict mode turns misses into errors.
    Every request is recorded so tests can assert on what was sent.
    """

    def __init__(
        self,
        fixtures: dict[str, str] | None = None,
        default: str | Callable[[ChatRequest], str] | None = None,
        strict: bool = False,
    ):
        self.fixtures = dict(fixtures or {})
        self.default = default
        self.strict = strict
        self.calls: list[ChatRequest] = []
        self._lock = threading.Lock()

    def register(self, request: ChatRequest, response: str) -> str:
        digest = request_digest(request)
        self.fixtures[digest] = response
        return digest

    def send(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.calls.append(request)
        digest = request_digest(request)
        if digest in self.fixtures:
            return ChatResponse(self.fixtures[digest])
        if self.strict or self.default is None:
            raise FixtureMissError(f"no fixture for request digest {digest[:12]}")
        text = self.default(request) if callable(self.default) else self.default
        return ChatResponse(text)


class SequenceBackend:
    """Scripted backend replaying responses in order (for repair-path tests)."""

    def __init__(self, responses: list[str]):
        self.responses = list(responses)
        self.calls: list[ChatRequest] = []

    def send(self, request: ChatRequest) -> ChatResponse:
        self.calls.append(request)
        if not self.responses:
            raise FixtureMissError("scripted backend ran out of responses")
        return ChatResponse(self.responses.pop(0))


class HttpBackend:
    """Chat-completion-compatible HTTP transport.

    The request body carries model, messages (role plus content parts, with
    media parts by URL reference or inline base64), temperature, max_tokens
    and seed; the completion text is read from the first choice.
    """

    def __init__(
        self,
        endpoint_url: str,
        *,
        api_key: str | None = None,
        timeout_s: float = 120.0,
        attachment_mode: str = "url",
        session: requests.Session | None = None,
    ):
        self.endpoint_url = endpoint_url
        self.api_key = api_key
        self.timeout_s = timeout_s
        if attachment_mode not in ("url", "base64"):
            raise RequestError(f"unknown attachment mode {attachment_mode!r}")
        self.attachment_mode = attachment_mode
        self.session = session or requests.Session()

    def _media_part(self, att: Attachment) -> dict[str, Any]:
        if self.attachment_mode == "base64" and Path(att.locator).is_file():
            data = base64.b64encode(Path(att.locator).read_bytes()).decode("ascii")
            ref = f"data:application/octet-stream;base64,{data}"
        else:
            ref = att.locator
        if att.kind == "image_frame":
            if att.time is not None and self.attachment_mode == "url":
                ref = f"{ref}#t={att.time:g}"
            return {"type": "image_url", "image_url": {"url": ref}}
        if att.kind == "audio_span":
            part: dict[str, Any] = {"type": "audio_url", "audio_url": {"url": ref}}
            if att.start is not None:
                part["audio_url"]["start_s"] = att.start
                part["audio_url"]["end_s"] = att.end
            return part
        part = {"type": "video_url", "video_url": {"url": ref}}
        if att.start is not None:
            part["video_url"]["start_s"] = att.start
            part["video_url"]["end_s"] = att.end
        if att.fps is not None:
            part["video_url"]["fps"] = att.fps
        if att.max_frames is not None:
            part["video_url"]["max_frames"] = att.max_frames
        return part

    def _body(self, request: ChatRequest) -> dict[str, Any]:
        messages = []
        for msg in request.messages:
            content: list[dict[str, Any]] = [{"type": "text", "text": msg.text}]
            content.extend(self._media_part(a) for a in msg.attachments)
            messages.append({"role": msg.role, "content": content})
        body: dict[str, Any] = {
            "model": request.model_id,
            "messages": messages,
            "temperature": request.decode.temperature,
            "max_tokens": request.decode.max_tokens,
        }
        if request.decode.seed is not None:
            body["seed"] = request.decode.seed
        return body

    def send(self, request: ChatRequest) -> ChatResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        started = time.monotonic()
        try:
            resp = self.session.post(
                self.endpoint_url,
                json=self._body(request),
                headers=headers,
                timeout=self.timeout_s,
            )
        except requests.Timeout as exc:
            raise TransportError(f"request timed out after {self.timeout_s}s") from exc
        except requests.RequestException as exc:
            raise TransportError(f"transport failure: {exc}") from exc
        latency_ms = int((time.monotonic() - started) * 1000)

        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"endpoint returned {resp.status_code}", status=resp.status_code)
        if resp.status_code >= 400:
            raise RequestError(f"endpoint rejected request: {resp.status_code} {resp.text[:200]}",
                               status=resp.status_code)
        try:
            payload = resp.json()
            choice = payload["choices"][0]
            text = choice["message"]["content"]
            finish = choice.get("finish_reason", "complete") or "complete"
        except (ValueError, LookupError, TypeError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from exc
        if finish == "stop":
            finish = "complete"
        return ChatResponse(text=text, finish_reason=finish, latency_ms=latency_ms)


@dataclass
class RetryPolicy:
    max_attempts: int = 3
    backoff_base_s: float = 0.25
    backoff_cap_s: float = 8.0

    def delay(self, attempt: int) -> float:
        return min(self.backoff_cap_s, self.backoff_base_s * (2 ** (attempt - 1)))


class GatewayClient:
    """Thread-safe front for a backend: retries, rate limit, repair loop."""

    def __init__(
        self,
        backend: Any,
        *,
        retry: RetryPolicy | None = None,
        max_in_flight: int = 4,
        min_request_interval_s: float = 0.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend = backend
        self.retry = retry or RetryPolicy()
        self._in_flight = threading.BoundedSemaphore(max_in_flight)
        self._interval = min_request_interval_s
        self._rate_lock = threading.Lock()
        self._last_start = 0.0
        self._sleep = sleep

    def _throttle(self) -> None:
        if self._interval <= 0:
            return
        with self._rate_lock:
            now = time.monotonic()
            wait = self._last_start + self._interval - now
            if wait > 0:
                self._sleep(wait)
                now = time.monotonic()
            self._last_start = now

    def complete(self, request: ChatRequest) -> ChatResponse:
        """Run one completion, retrying retryable failures up to the budget."""
        request = request.validated()
        last_error: Exception | None = None
        for attempt in range(1, self.retry.max_attempts + 1):
            self._throttle()
            try:
                with self._in_flight:
                    response = self.backend.send(request)
                return replace(response, attempt=attempt)
            except RequestError:
                raise
            except TransportError as exc:
                if not exc.retryable:
                    raise
                last_error = exc
                logger.warning("attempt %d/%d failed (%s); backing off",
                               attempt, self.retry.max_attempts, exc)
                if attempt < self.retry.max_attempts:
                    self._sleep(self.retry.delay(attempt))
        raise GatewayError(
            f"endpoint failed after {self.retry.max_attempts} attempts: {last_error}",
            attempts=self.retry.max_attempts,
            last_error=last_error,
        )

    def complete_structured(self, request: ChatRequest, schema_id: str, max_repair: int = 1) -> Any:
        """Completion that must parse under a registered schema.

        On a violation the request is re-issued with the validation errors
        appended, up to max_repair times; a value that still fails raises
        with the final raw text and every diagnostic gathered.
        """
        load_schema(schema_id)  # unknown ids fail before any model call
        request = replace(request, schema_hint=schema_id)
        all_problems: list[str] = []
        raw = ""
        for round_no in range(max_repair + 1):
            response = self.complete(request)
            raw = response.text
            try:
                value = extract_json_value(raw)
                problems = validate(schema_id, value)
            except StructuredOutputError as exc:
                problems = exc.diagnostics or [str(exc)]
                value = None
            if not problems:
                return value
            all_problems.extend(problems)
            if round_no < max_repair:
                request = request.with_followup(
                    "The previous response was not valid. Fix these problems and reply "
                    f"with only the corrected JSON: {'; '.join(problems)}"
                )
        raise StructuredOutputError(
            f"output never satisfied schema {schema_id} after {max_repair} repair attempt(s)",
            raw_text=raw,
            diagnostics=all_problems,
        )


def mock_complete(backend: MockBackend, request: ChatRequest) -> ChatResponse:
    """Resolve a request against the mock fixture table (pure function)."""
    return backend.send(request.validated())
