"""Mock backend determinism and the remote client's retry contract."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from gradebench.backends import BackendConfig, MockBackend, RemoteBackend, remote_complete
from gradebench.errors import GradebenchError, RequestError, TransportError
from gradebench.prompts import default_template_for, render_prompt
from gradebench.testbank import generation_prompt, parse_generation_completion


# ---------------------------------------------------------------------------
# Mock backend


def rate(entry, context):
    template = default_template_for("question")
    return MockBackend().complete(render_prompt(template, entry, context))


def test_mock_full_overlap_rates_five():
    assert rate("water table rise?", "The water table will rise in spring.") == "5"


def test_mock_zero_overlap_rates_zero():
    assert rate("bleach clothes?", "Rock and roll started in the 1950s.") == "0"


def test_mock_partial_overlap_between():
    # entry words {water, table, rise, wet}; context covers 2 of 4
    rating = rate("water table rise wet?", "The water table is deep.")
    assert rating in {"2", "3"}
    assert rating == str(round(5 * 2 / 4))


def test_mock_extraction_best_sentence_or_unanswerable():
    template = default_template_for("question", self_rated=False)
    context = "Rock began early. Bleach whitens clothes. Nothing else matters."
    prompt = render_prompt(template, "how does bleach affect clothes?", context)
    assert MockBackend().complete(prompt) == "Bleach whitens clothes."
    prompt = render_prompt(template, "quantum tunneling?", context)
    assert MockBackend().complete(prompt) == "unanswerable"


def test_mock_deterministic():
    template = default_template_for("nugget")
    prompt = render_prompt(template, "early 1950s innovation", "The early 1950s saw innovation.")
    outputs = {MockBackend().complete(prompt) for _ in range(5)}
    assert len(outputs) == 1


def test_mock_equivalence_yes_on_exact_match():
    from gradebench.prompts import EQUIVALENCE_PROMPT

    backend = MockBackend()
    same = EQUIVALENCE_PROMPT.format(question="Q?", correct_answer="rise", answer="Rise")
    other = EQUIVALENCE_PROMPT.format(question="Q?", correct_answer="rise", answer="increase")
    assert backend.complete(same) == "yes"
    assert backend.complete(other) == "no"


def test_mock_generation_round_trips_through_parser():
    prompt = generation_prompt("questions", query_text="when did rock n roll begin?")
    completion = MockBackend().complete(prompt)
    assert "```json" in completion
    items = parse_generation_completion(completion, "questions")
    assert items and all(item.endswith("?") for item in items)

    prompt = generation_prompt("nuggets", query_text="when did rock n roll begin?")
    items = parse_generation_completion(MockBackend().complete(prompt), "nuggets")
    assert "rock" in items


# ---------------------------------------------------------------------------
# Remote backend against a local stub server


class _StubHandler(BaseHTTPRequestHandler):
    script = []  # list of status codes; the last one repeats
    calls = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).calls.append(body)
        status = self.script[min(len(self.calls) - 1, len(self.script) - 1)]
        if status != 200:
            self.send_response(status)
            self.end_headers()
            return
        payload = {
            "choices": [{"message": {"content": "echo: " + body["messages"][0]["content"]}}]
        }
        raw = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.calls = []
    yield server
    server.shutdown()


def _config(server, retries=2):
    return BackendConfig(
        endpoint_url=f"http://127.0.0.1:{server.server_port}/v1/chat/completions",
        model_name="stub-model",
        max_retries=retries,
        retry_backoff=0.01,
        request_timeout=5.0,
    )


def test_remote_echo(stub_server):
    _StubHandler.script = [200]
    text = remote_complete(_config(stub_server), "hello there")
    assert text == "echo: hello there"
    assert _StubHandler.calls[0]["model"] == "stub-model"
    assert "max_tokens" in _StubHandler.calls[0]
    assert "temperature" in _StubHandler.calls[0]


def test_remote_retries_on_429_then_succeeds(stub_server):
    _StubHandler.script = [429, 429, 200]
    assert remote_complete(_config(stub_server), "retry me") == "echo: retry me"
    assert len(_StubHandler.calls) == 3


def test_remote_exhausts_retries_on_500(stub_server):
    _StubHandler.script = [500]
    with pytest.raises(TransportError) as err:
        remote_complete(_config(stub_server), "doomed")
    assert len(_StubHandler.calls) == 3  # max_retries=2 means 3 attempts
    assert err.value.status == 500


def test_remote_never_retries_client_errors(stub_server):
    for status in (400, 401, 404):
        _StubHandler.calls = []
        _StubHandler.script = [status]
        with pytest.raises(RequestError):
            remote_complete(_config(stub_server), "bad request")
        assert len(_StubHandler.calls) == 1


def test_remote_backend_sends_api_key(stub_server, monkeypatch):
    monkeypatch.setenv("GRADER_API_KEY", "sekrit")
    _StubHandler.script = [200]

    captured = {}
    original = _StubHandler.do_POST

    def spy(self):
        captured["auth"] = self.headers.get("Authorization")
        original(self)

    _StubHandler.do_POST = spy
    try:
        backend = RemoteBackend(_config(stub_server))
        assert backend.identifier == "stub-model"
        backend.complete("with key")
    finally:
        _StubHandler.do_POST = original
    assert captured["auth"] == "Bearer sekrit"


def test_remote_connection_failure_retries_then_transport_error():
    # nothing listens on this port; every attempt is a transport failure
    config = BackendConfig(
        endpoint_url="http://127.0.0.1:9/v1/chat/completions",
        model_name="m",
        max_retries=1,
        retry_backoff=0.01,
        request_timeout=0.3,
    )
    with pytest.raises(TransportError) as err:
        remote_complete(config, "anyone home?")
    assert err.value.status is None


def test_backend_config_validation():
    with pytest.raises(GradebenchError):
        BackendConfig(endpoint_url="http://x", model_name="m", max_input_tokens=32)
    with pytest.raises(GradebenchError):
        BackendConfig(endpoint_url="http://x", model_name="m", concurrency_budget=0)


def test_mock_complete_module_function():
    from gradebench.backends import mock_complete

    template = default_template_for("question")
    prompt = render_prompt(template, "water rise?", "The water will rise.")
    assert mock_complete(prompt) == MockBackend().complete(prompt)
