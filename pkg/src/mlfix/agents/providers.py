"""Chat-completion providers behind one tiny interface.

Two implementations ship: a generic HTTP client speaking the de-facto
messages/choices JSON shape, and a deterministic stub that replays fixture
completions keyed by prompt hash. The stub errors on unknown prompts so test
fixtures stay explicit.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Callable, Mapping, Protocol
from urllib.parse import urlparse

import requests

from ..model import LLMRequest, LLMResponse

RETRY_BACKOFF_SECONDS = (1.0, 2.0, 4.0)


class ProviderError(Exception):
    pass


class ProviderUnavailable(ProviderError):
    """The provider could not produce a completion after retries."""


class FixtureMiss(ProviderUnavailable):
    """The stub has no scripted completion for this prompt."""


def prompt_hash(request: LLMRequest) -> str:
    """SHA-256 over the canonical message list; the stub fixture key."""
    payload = json.dumps(
        [{"role": m.role, "content": m.content} for m in request.messages],
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class Provider(Protocol):
    provider_id: str

    def complete(self, request: LLMRequest) -> LLMResponse: ...

    def reachable(self) -> bool: ...


class StubProvider:
    """Replays completions from a fixture map prompt-hash -> text."""

    provider_id = "stub"

    def __init__(self, fixtures: Mapping[str, str] | None = None):
        self.fixtures = dict(fixtures or {})

    @classmethod
    def from_file(cls, path: str | Path) -> "StubProvider":
        with open(path, "r", encoding="utf-8") as handle:
            return cls(json.load(handle))

    def complete(self, request: LLMRequest) -> LLMResponse:
        key = prompt_hash(request)
        if key not in self.fixtures:
            raise FixtureMiss(f"no fixture for prompt hash {key}")
        content = self.fixtures[key]
        return LLMResponse(
            content=content,
            provider_id=self.provider_id,
            prompt_tokens=sum(len(m.content.split()) for m in request.messages),
            completion_tokens=len(content.split()),
        )

    def reachable(self) -> bool:
        return True


class HttpChatProvider:
    """Generic chat-completion HTTP client with exponential backoff."""

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        model: str | None = None,
        timeout: float = 30.0,
        backoff: tuple[float, ...] = RETRY_BACKOFF_SECONDS,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.timeout = timeout
        self.backoff = backoff
        self._sleep = sleep
        self.provider_id = model or urlparse(endpoint).netloc or "http"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, request: LLMRequest) -> LLMResponse:
        payload: dict = {
            "messages": [m.to_dict() for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if self.model:
            payload["model"] = self.model
        last_error: Exception | None = None
        for attempt in range(len(self.backoff) + 1):
            try:
                response = requests.post(
                    self.endpoint, json=payload, headers=self._headers(), timeout=self.timeout
                )
                if response.status_code >= 500:
                    raise ProviderError(f"server error {response.status_code}")
                if response.status_code != 200:
                    raise ProviderUnavailable(
                        f"provider rejected the request: {response.status_code} {response.text[:200]}"
                    )
                return self._parse(response.json())
            except ProviderUnavailable:
                raise
            except Exception as exc:  # network errors, 5xx, malformed bodies
                last_error = exc
                if attempt < len(self.backoff):
                    self._sleep(self.backoff[attempt])
        raise ProviderUnavailable(f"provider failed after {len(self.backoff) + 1} tries: {last_error}")

    def _parse(self, body: Mapping) -> LLMResponse:
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed provider response: {exc}") from exc
        usage = body.get("usage", {}) or {}
        return LLMResponse(
            content=str(content),
            provider_id=str(body.get("model", self.provider_id)),
            prompt_tokens=int(usage.get("prompt_tokens", 0) or 0),
            completion_tokens=int(usage.get("completion_tokens", 0) or 0),
        )

    def reachable(self) -> bool:
        try:
            requests.head(self.endpoint, timeout=1.0)
            return True
        except requests.RequestException:
            return False
