"""Grading backends: a chat-completion HTTP client and a deterministic mock.

A backend only needs ``complete(prompt) -> str`` plus a stable ``identifier``
string (recorded into every grade).  The remote backend talks to any
chat-completion-compatible endpoint and enforces its own concurrency budget,
so callers may grade from many threads without extra coordination.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass
from typing import Optional, Protocol

import requests

from .errors import GradebenchError, RequestError, TransportError


class Backend(Protocol):
    @property
    def identifier(self) -> str: ...

    def complete(self, prompt: str) -> str: ...


@dataclass
class BackendConfig:
    endpoint_url: str
    model_name: str
    api_key_source: str = "GRADER_API_KEY"  # env var name, never the key itself
    max_input_tokens: int = 512
    request_timeout: float = 30.0
    max_retries: int = 3
    concurrency_budget: int = 4
    max_completion_tokens: int = 512
    temperature: float = 0.0
    retry_backoff: float = 0.5

    def __post_init__(self):
        if self.max_input_tokens < 64:
            raise GradebenchError("max_input_tokens must be at least 64")
        if self.concurrency_budget < 1:
            raise GradebenchError("concurrency_budget must be at least 1")


_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


def remote_complete(
    config: BackendConfig,
    prompt: str,
    session: Optional[requests.Session] = None,
) -> str:
    """One completion with exponential backoff on timeouts, 429, and 5xx."""
    http = session if session is not None else requests
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.api_key_source, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "max_tokens": config.max_completion_tokens,
        "temperature": config.temperature,
    }

    last_status: Optional[int] = None
    last_error = "unknown error"
    for attempt in range(config.max_retries + 1):
        if attempt > 0:
            time.sleep(config.retry_backoff * (2 ** (attempt - 1)))
        try:
            response = http.post(
                config.endpoint_url, json=body, headers=headers, timeout=config.request_timeout
            )
        except requests.RequestException as exc:
            last_status, last_error = None, f"transport failure: {exc}"
            continue
        if response.status_code in _RETRYABLE_STATUS:
            last_status, last_error = response.status_code, f"HTTP {response.status_code}"
            continue
        if response.status_code >= 400:
            raise RequestError(
                f"backend rejected request: HTTP {response.status_code}: {response.text[:200]}",
                status=response.status_code,
            )
        return _extract_completion(response)
    raise TransportError(
        f"giving up after {config.max_retries + 1} attempts: {last_error}", status=last_status
    )


def _extract_completion(response: requests.Response) -> str:
    try:
        payload = response.json()
        choice = payload["choices"][0]
        if "message" in choice:
            return choice["message"]["content"]
        return choice["text"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"unexpected completion payload: {exc}") from exc


class RemoteBackend:
    """Chat-completion backend; admission-controls its own concurrency."""

    def __init__(self, config: BackendConfig):
        self.config = config
        self._session = requests.Session()
        self._slots = threading.Semaphore(config.concurrency_budget)

    @property
    def identifier(self) -> str:
        return self.config.model_name

    def complete(self, prompt: str) -> str:
        with self._slots:
            return remote_complete(self.config, prompt, session=self._session)


# ---------------------------------------------------------------------------
# Deterministic offline mock

_STOPWORDS = frozenset(
    """a an the is are was were be been being of in on to for with and or do
    does did which what who whom when where how why it its this that these
    those as at by from will would can could should must about into not""".split()
)

_WORD_PATTERN = re.compile(r"[a-z0-9]+")


def content_words(text: str) -> list[str]:
    """Lowercased alphanumeric tokens minus stopwords, first occurrence order."""
    seen = []
    for token in _WORD_PATTERN.findall(text.lower()):
        if token not in _STOPWORDS and token not in seen:
            seen.append(token)
    return seen


def _overlap_rating(entry_text: str, context: str) -> int:
    entry = set(content_words(entry_text))
    if not entry:
        return 0
    overlap = len(entry & set(content_words(context)))
    return max(0, min(5, round(5 * overlap / len(entry))))


def _best_sentence(entry_text: str, context: str) -> str:
    entry = set(content_words(entry_text))
    sentences = [s for s in re.split(r"(?<=[.!?])\s+", context) if s.strip()]
    best, best_score = "", 0
    for sentence in sentences:
        score = len(entry & set(content_words(sentence)))
        if score > best_score:
            best, best_score = sentence.strip(), score
    return best if best_score > 0 else "unanswerable"


_EQUIVALENCE_PATTERN = re.compile(
    r'^For the question "(?P<question>.*)" the correct answer is '
    r'"(?P<gold>.*)"\. Is "(?P<answer>.*)" an equally correct response',
    re.DOTALL,
)
_ENTRY_CONTEXT_PATTERN = re.compile(
    r"(?:Question|Key Fact|Query):\s*(?P<entry>.*?)\n\s*\nContext:\s*(?P<context>.*)\Z",
    re.DOTALL,
)
_GENERATION_QUERY_PATTERN = re.compile(r"query '(?P<query>[^']*)'")
_GENERATION_TITLE_PATTERN = re.compile(
    r"between '(?P<title>[^']*)' with a specific focus on the subtopic '(?P<subtopic>[^']*)'"
)


class MockBackend:
    """Offline test double driven by content-word overlap.

    Fully deterministic: ratings are round(5 * overlap / |entry words|)
    (Python round, ties to even), extraction returns the context sentence
    with maximal overlap, equivalence says yes only on an exact
    (case-insensitive) match, and test-bank generation derives one item per
    content word of the query.
    """

    identifier = "mock"

    def complete(self, prompt: str) -> str:
        if '"questions"' in prompt and "JSON format" in prompt:
            return self._generate(prompt, "questions")
        if '"nuggets"' in prompt and "JSON format" in prompt:
            return self._generate(prompt, "nuggets")
        equivalence = _EQUIVALENCE_PATTERN.match(prompt)
        if equivalence:
            gold = equivalence.group("gold").strip().casefold()
            answer = equivalence.group("answer").strip().casefold()
            return "yes" if gold == answer else "no"

        parsed = _ENTRY_CONTEXT_PATTERN.search(prompt)
        if not parsed:
            return "unanswerable"
        entry, context = parsed.group("entry"), parsed.group("context")
        if "Does the passage answer the query?" in prompt:
            words = set(content_words(entry))
            hit = len(words & set(content_words(context)))
            return "yes" if words and 2 * hit >= len(words) else "no"
        if "choose one:" in prompt or "Use this scale:" in prompt:
            return str(_overlap_rating(entry, context))
        return _best_sentence(entry, context)

    def _generate(self, prompt: str, key: str) -> str:
        match = _GENERATION_QUERY_PATTERN.search(prompt)
        if match:
            query = match.group("query")
        else:
            title = _GENERATION_TITLE_PATTERN.search(prompt)
            query = f"{title.group('title')} {title.group('subtopic')}" if title else ""
        words = content_words(query)[:10]
        if key == "questions":
            items = [f"{w}?" for w in words] if words else [f"{query}?"]
        else:
            items = words if words else [query or "answer"]
        block = json.dumps({key: items}, ensure_ascii=False)
        return f"Here is the {key} set.\n```json\n{block}\n```\n"


_MOCK = MockBackend()


def mock_complete(prompt: str) -> str:
    """Module-level shorthand for the shared mock backend's completion."""
    return _MOCK.complete(prompt)
