"""Backend behavior: replay queues, recording, retries, batch degradation."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from icicl.backends import (
    HttpBackend,
    RecordingBackend,
    ReplayBackend,
    generate_diverse,
    generate_greedy,
    prompt_digest,
)
from icicl.contexts import ContextSet, PromptContext, Shot
from icicl.errors import AllCallsFailed, BackendRejected, BackendUnavailable
from icicl.model import ExampleValue
from icicl.prompts import GenerationRequest

from support import make_param


def write_replay(tmp_path, responses, default=""):
    path = tmp_path / "replay.json"
    path.write_text(json.dumps({"default": default, "responses": responses}), encoding="utf-8")
    return path


def req(prompt, temperature=0.5):
    return GenerationRequest(prompt=prompt, temperature=temperature)


def tiny_context_set(n):
    target = make_param(param_name="q")
    shot = Shot(parameter=target, example=ExampleValue.from_raw("USD"), origin="greedy_self")
    ctx = PromptContext(shots=(shot,), target=target)
    return ContextSet(contexts=tuple(ctx for _ in range(n)), seed=0)


class TestReplay:
    def test_queue_consumed_in_call_order(self, tmp_path):
        digest = prompt_digest("p")
        path = write_replay(tmp_path, {digest: ['"a"', '"b"']}, default="fallback")
        backend = ReplayBackend(path)
        assert backend.complete(req("p")).text == '"a"'
        assert backend.complete(req("p")).text == '"b"'
        assert backend.complete(req("p")).text == "fallback"  # exhausted

    def test_unknown_prompt_gets_default(self, tmp_path):
        backend = ReplayBackend(write_replay(tmp_path, {}, default="dflt"))
        assert backend.complete(req("never seen")).text == "dflt"

    def test_distinct_prompts_have_independent_cursors(self, tmp_path):
        path = write_replay(
            tmp_path, {prompt_digest("a"): ["1"], prompt_digest("b"): ["2", "3"]}
        )
        backend = ReplayBackend(path)
        assert backend.complete(req("b")).text == "2"
        assert backend.complete(req("a")).text == "1"
        assert backend.complete(req("b")).text == "3"

    def test_flags(self, tmp_path):
        backend = ReplayBackend(write_replay(tmp_path, {}))
        assert backend.is_deterministic is True
        assert backend.supports_temperature is False


class _ScriptedBackend:
    """Test double returning queued texts, optionally raising."""

    is_deterministic = True
    supports_temperature = True

    def __init__(self, texts):
        self.texts = list(texts)
        self.calls = []

    def complete(self, request):
        self.calls.append(request.prompt)
        item = self.texts.pop(0)
        if isinstance(item, Exception):
            raise item
        from icicl.prompts import RawGeneration

        return RawGeneration(text=item, backend_id="scripted")


class TestRecording:
    def test_roundtrip_through_replay(self, tmp_path):
        inner = _ScriptedBackend(['"x"', '"y"', '"z"'])
        out = tmp_path / "rec.json"
        rec = RecordingBackend(inner, out, default="d")
        rec.complete(req("p1"))
        rec.complete(req("p1"))
        rec.complete(req("p2"))
        rec.flush()

        replay = ReplayBackend(out)
        assert replay.complete(req("p1")).text == '"x"'
        assert replay.complete(req("p1")).text == '"y"'
        assert replay.complete(req("p2")).text == '"z"'
        assert replay.complete(req("p3")).text == "d"

    def test_flush_is_sorted_and_atomic(self, tmp_path):
        inner = _ScriptedBackend(["1", "2"])
        out = tmp_path / "rec.json"
        rec = RecordingBackend(inner, out)
        rec.complete(req("zz"))
        rec.complete(req("aa"))
        rec.flush()
        body = out.read_text(encoding="utf-8")
        data = json.loads(body)
        keys = list(data["responses"])
        assert keys == sorted(keys)
        assert not (tmp_path / "rec.json.tmp").exists()

    def test_inherits_determinism_flag(self, tmp_path):
        inner = _ScriptedBackend([])
        rec = RecordingBackend(inner, tmp_path / "r.json")
        assert rec.is_deterministic is True


class TestGenerateDiverse:
    def test_results_follow_context_order(self):
        backend = _ScriptedBackend(["r0", "r1", "r2"])
        results = generate_diverse(backend, tiny_context_set(3))
        assert [r.text for r in results] == ["r0", "r1", "r2"]
        assert len(backend.calls) == 3

    def test_individual_failure_degrades_to_empty(self):
        backend = _ScriptedBackend(["ok", BackendRejected(500, "boom"), "ok2"])
        results = generate_diverse(backend, tiny_context_set(3))
        assert [r.text for r in results] == ["ok", "", "ok2"]

    def test_all_failed_raises(self):
        backend = _ScriptedBackend(
            [BackendUnavailable("x"), BackendUnavailable("y"), BackendUnavailable("z")]
        )
        with pytest.raises(AllCallsFailed):
            generate_diverse(backend, tiny_context_set(3))

    def test_all_empty_text_raises(self):
        backend = _ScriptedBackend(["", "", ""])
        with pytest.raises(AllCallsFailed):
            generate_diverse(backend, tiny_context_set(3))

    def test_greedy_uses_temperature_zero(self):
        seen = {}

        class Probe:
            is_deterministic = True
            supports_temperature = True

            def complete(self, request):
                seen["temperature"] = request.temperature
                from icicl.prompts import RawGeneration

                return RawGeneration(text="v")

        generate_greedy(Probe(), tiny_context_set(1).contexts[0])
        assert seen["temperature"] == 0.0


class _HttpScript(BaseHTTPRequestHandler):
    script = []  # list of (status, body_dict_or_text); shared per server instance
    seen = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        type(self).seen.append((dict(self.headers), payload))
        status, body = type(self).script.pop(0) if type(self).script else (200, {"text": "ok"})
        data = json.dumps(body).encode() if isinstance(body, dict) else body.encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_script():
    class Handler(_HttpScript):
        script = []
        seen = []

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    endpoint = f"http://127.0.0.1:{server.server_address[1]}/complete"
    try:
        yield Handler, endpoint
    finally:
        server.shutdown()
        server.server_close()


class TestHttpBackend:
    def test_success_payload_and_text(self, http_script):
        handler, endpoint = http_script
        handler.script.append((200, {"text": "hello"}))
        backend = HttpBackend(endpoint)
        result = backend.complete(req("the prompt", temperature=0.25))
        assert result.text == "hello"
        assert result.backend_id == "http"

        headers, payload = handler.seen[0]
        assert payload == {
            "prompt": "the prompt",
            "temperature": 0.25,
            "max_tokens": 64,
            "stop": ["\n"],
        }
        assert "authorization" not in {k.lower() for k in headers}

    def test_api_key_sent_as_bearer(self, http_script):
        handler, endpoint = http_script
        handler.script.append((200, {"text": "x"}))
        HttpBackend(endpoint, api_key="sekrit").complete(req("p"))
        headers, _ = handler.seen[0]
        lowered = {k.lower(): v for k, v in headers.items()}
        assert lowered.get("authorization") == "Bearer sekrit"

    def test_non_2xx_rejected_without_retry(self, http_script):
        handler, endpoint = http_script
        handler.script.append((503, {"error": "down"}))
        backend = HttpBackend(endpoint)
        with pytest.raises(BackendRejected) as exc_info:
            backend.complete(req("p"))
        assert exc_info.value.status == 503
        assert len(handler.seen) == 1  # a rejection is not retried

    def test_malformed_body_rejected(self, http_script):
        handler, endpoint = http_script
        handler.script.append((200, "not json"))
        with pytest.raises(BackendRejected):
            HttpBackend(endpoint).complete(req("p"))

    def test_missing_text_key_rejected(self, http_script):
        handler, endpoint = http_script
        handler.script.append((200, {"output": "x"}))
        with pytest.raises(BackendRejected):
            HttpBackend(endpoint).complete(req("p"))

    def test_transport_error_exhausts_retries(self):
        # nothing listens on this port; three attempts then unavailable
        backend = HttpBackend("http://127.0.0.1:1/never", timeout_ms=200, retry_base_ms=1)
        with pytest.raises(BackendUnavailable) as exc_info:
            backend.complete(req("p"))
        assert "3 attempts" in str(exc_info.value)

    def test_flags(self):
        backend = HttpBackend("http://example.invalid")
        assert backend.is_deterministic is False
        assert backend.supports_temperature is True
