"""Gateway client: mock determinism, retries, structured-output repair."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from egoavu.errors import (
    ConfigurationError,
    FixtureMissError,
    GatewayError,
    RequestError,
    StructuredOutputError,
)
from egoavu.gateway import (
    Attachment,
    ChatRequest,
    DecodeParams,
    GatewayClient,
    HttpBackend,
    Message,
    MockBackend,
    RetryPolicy,
    SequenceBackend,
    mock_complete,
    request_digest,
    user_request,
)
from egoavu.schemas import extract_json_value, strip_trailing_commas, validate


def _request(text: str = "hello", model: str = "m1") -> ChatRequest:
    return user_request(model, text)


class TestMockBackend:
    def test_same_request_same_response(self):
        backend = MockBackend()
        backend.register(_request(), "fixed reply")
        first = mock_complete(backend, _request())
        second = mock_complete(backend, _request())
        assert first.text == second.text == "fixed reply"

    def test_digest_sensitivity_over_fixture_set(self):
        texts = [f"prompt {i}" for i in range(200)] + ["prompt 0!"]
        digests = {request_digest(_request(t)) for t in texts}
        assert len(digests) == len(texts)
        # one-character difference flips the digest
        assert request_digest(_request("abc")) != request_digest(_request("abd"))

    def test_digest_covers_model_and_schema_hint(self):
        base = _request("same")
        assert request_digest(base) != request_digest(_request("same", model="m2"))
        hinted = ChatRequest(base.model_id, base.messages, base.decode, schema_hint="mcg/v1")
        assert request_digest(base) != request_digest(hinted)

    def test_strict_mode_miss_errors(self):
        backend = MockBackend(strict=True)
        with pytest.raises(FixtureMissError):
            mock_complete(backend, _request())

    def test_default_callable(self):
        backend = MockBackend(default=lambda req: req.messages[-1].text.upper())
        assert mock_complete(backend, _request("shout")).text == "SHOUT"

    def test_requests_are_recorded(self):
        backend = MockBackend(default="ok")
        mock_complete(backend, _request("one"))
        mock_complete(backend, _request("two"))
        assert [c.messages[-1].text for c in backend.calls] == ["one", "two"]

    def test_request_needs_user_message(self):
        request = ChatRequest("m", (Message("system", "sys"),))
        with pytest.raises(RequestError):
            mock_complete(MockBackend(default="x"), request)


class _ScriptedHandler(BaseHTTPRequestHandler):
    script: list[int] = []
    calls = 0

    def do_POST(self):  # noqa: N802 (http.server API)
        cls = type(self)
        status = cls.script[min(cls.calls, len(cls.script) - 1)]
        cls.calls += 1
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        if status == 200:
            body = json.dumps({
                "choices": [{"message": {"content": "served"}, "finish_reason": "stop"}]
            }).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
        else:
            self.send_response(status)
            self.send_header("Content-Length", "0")
            self.end_headers()

    def log_message(self, *args):  # silence test output
        pass


@pytest.fixture
def scripted_server():
    server = HTTPServer(("127.0.0.1", 0), _ScriptedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    thread.join(timeout=2)


def _client_for(server, attempts=3) -> GatewayClient:
    backend = HttpBackend(f"http://127.0.0.1:{server.server_address[1]}/v1/chat", timeout_s=5)
    return GatewayClient(
        backend,
        retry=RetryPolicy(max_attempts=attempts, backoff_base_s=0.0, backoff_cap_s=0.0),
        sleep=lambda _: None,
    )


class TestHttpRetries:
    def test_rate_limit_then_success(self, scripted_server):
        _ScriptedHandler.script, _ScriptedHandler.calls = [429, 200], 0
        response = _client_for(scripted_server).complete(_request())
        assert response.text == "served"
        assert response.attempt == 2

    def test_persistent_server_error_exhausts_budget(self, scripted_server):
        _ScriptedHandler.script, _ScriptedHandler.calls = [500], 0
        with pytest.raises(GatewayError) as excinfo:
            _client_for(scripted_server, attempts=3).complete(_request())
        assert not isinstance(excinfo.value, RequestError)
        assert excinfo.value.attempts == 3
        assert _ScriptedHandler.calls == 3

    def test_client_error_is_not_retried(self, scripted_server):
        _ScriptedHandler.script, _ScriptedHandler.calls = [404], 0
        with pytest.raises(RequestError):
            _client_for(scripted_server).complete(_request())
        assert _ScriptedHandler.calls == 1

    def test_media_parts_serialized(self, scripted_server):
        _ScriptedHandler.script, _ScriptedHandler.calls = [200], 0
        attachment = Attachment(kind="audio_span", locator="media/v.mp4", start=3.0, end=9.0)
        request = user_request("m", "describe", attachments=(attachment,))
        assert _client_for(scripted_server).complete(request).text == "served"


class TestJsonExtraction:
    def test_fenced_block(self):
        assert extract_json_value('Here is the JSON: ```json\n{"a": 1}\n```') == {"a": 1}

    def test_balanced_value_with_prose(self):
        assert extract_json_value('Sure! {"x": [1, 2]} hope that helps') == {"x": [1, 2]}

    def test_trailing_commas_tolerated(self):
        assert extract_json_value('{"a": [1, 2,],}') == {"a": [1, 2]}

    def test_trailing_comma_inside_string_untouched(self):
        assert strip_trailing_commas('{"a": "x,]"}') == '{"a": "x,]"}'

    def test_no_json_raises(self):
        with pytest.raises(StructuredOutputError):
            extract_json_value("I cannot help with that")

    def test_unknown_schema_id(self):
        with pytest.raises(ConfigurationError):
            validate("nope/v9", {})


class TestStructuredCompletion:
    def test_valid_first_try(self):
        backend = SequenceBackend(['{"rating": 4, "reason": "fine"}'])
        client = GatewayClient(backend)
        value = client.complete_structured(_request(), "judge/v1", max_repair=1)
        assert value == {"rating": 4, "reason": "fine"}
        assert len(backend.calls) == 1

    def test_repair_prompt_carries_diagnostics(self):
        backend = SequenceBackend(['{"rating": 9, "reason": "?"}', '{"rating": 2, "reason": "ok"}'])
        client = GatewayClient(backend)
        value = client.complete_structured(_request(), "judge/v1", max_repair=1)
        assert value["rating"] == 2
        repair_text = backend.calls[1].messages[-1].text
        assert "rating" in repair_text and "not valid" in repair_text

    def test_exhausted_repairs_raise_with_raw_text(self):
        backend = SequenceBackend(["I cannot help", "still not JSON"])
        client = GatewayClient(backend)
        with pytest.raises(StructuredOutputError) as excinfo:
            client.complete_structured(_request(), "judge/v1", max_repair=1)
        assert excinfo.value.raw_text == "still not JSON"
        assert excinfo.value.diagnostics
        assert len(backend.calls) == 2

    def test_never_returns_schema_violations(self):
        backend = SequenceBackend(['{"rating": "high", "reason": 3}'])
        client = GatewayClient(backend)
        with pytest.raises(StructuredOutputError):
            client.complete_structured(_request(), "judge/v1", max_repair=0)

    def test_decode_defaults_are_deterministic(self):
        request = _request()
        assert request.decode == DecodeParams(temperature=0.0, max_tokens=1024, seed=0)
