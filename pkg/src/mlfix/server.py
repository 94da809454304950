"""Stateless HTTP analysis service.

POST /analyze validates an artifact bundle, runs the agents pipeline and
returns the diagnosis; an in-memory LRU keyed by the bundle hash memoizes
responses without ever changing their content. GET /healthz and GET /metrics
expose liveness and counters. No request mutates the knowledge base or any
persistent state, so any number of replicas behave identically.
"""

from __future__ import annotations

import asyncio
import json
import os
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from .agents import AgentRegistry, HttpChatProvider, PipelineConfig, Provider, StubProvider, run_pipeline
from .kb import KBIndex, default_index
from .model import ArtifactBundle, WireError, bundle_hash, encode_diagnosis

MAX_BODY_BYTES = 32 * 1024 * 1024
HEALTH_PROBE_TTL_SECONDS = 30.0

ENV_API_KEY = "MLFIX_LLM_API_KEY"
ENV_ENDPOINT = "MLFIX_LLM_ENDPOINT"
ENV_KB_PATH = "MLFIX_KB_PATH"
ENV_STUB_FIXTURES = "MLFIX_STUB_FIXTURES"


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    llm_endpoint: str | None = None
    llm_api_key: str | None = None
    llm_model: str | None = None
    kb_path: str | None = None
    stub_fixtures_path: str | None = None
    cache_capacity: int = 256
    consensus_k: int = 5
    request_timeout_secs: float = 120.0

    def __post_init__(self) -> None:
        if self.cache_capacity < 0:
            raise ValueError("cache_capacity must be >= 0 (0 disables caching)")
        if self.consensus_k < 1 or self.consensus_k % 2 == 0:
            raise ValueError("consensus_k must be an odd integer >= 1")
        if self.request_timeout_secs <= 0:
            raise ValueError("request_timeout_secs must be positive")

    @classmethod
    def load(cls, path: str | Path | None = None, env: Mapping[str, str] | None = None) -> "ServerConfig":
        """Config file values overridden by environment variables."""
        env = os.environ if env is None else env
        data: dict[str, Any] = {}
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            unknown = set(data) - {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
            if unknown:
                raise ValueError(f"unknown server config field(s): {', '.join(sorted(unknown))}")
        config = cls(**data)
        if env.get(ENV_ENDPOINT):
            config.llm_endpoint = env[ENV_ENDPOINT]
        if env.get(ENV_API_KEY):
            config.llm_api_key = env[ENV_API_KEY]
        if env.get(ENV_KB_PATH):
            config.kb_path = env[ENV_KB_PATH]
        if env.get(ENV_STUB_FIXTURES):
            config.stub_fixtures_path = env[ENV_STUB_FIXTURES]
        return config


class LRUCache:
    """Bounded thread-safe LRU; capacity 0 disables storage entirely."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._entries: OrderedDict[str, bytes] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: str) -> bytes | None:
        with self._lock:
            value = self._entries.get(key)
            if value is not None:
                self._entries.move_to_end(key)
            return value

    def put(self, key: str, value: bytes) -> None:
        if self.capacity == 0:
            return
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
            elif len(self._entries) >= self.capacity:
                self._entries.popitem(last=False)
            self._entries[key] = value

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


@dataclass
class Metrics:
    requests_total: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    diagnosis_seconds_total: float = 0.0
    diagnoses_completed: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record_hit(self) -> None:
        with self._lock:
            self.requests_total += 1
            self.cache_hits += 1

    def record_miss(self, seconds: float) -> None:
        with self._lock:
            self.requests_total += 1
            self.cache_misses += 1
            self.diagnosis_seconds_total += seconds
            self.diagnoses_completed += 1

    def record_rejected(self) -> None:
        with self._lock:
            self.requests_total += 1

    def render(self) -> str:
        with self._lock:
            mean = self.diagnosis_seconds_total / self.diagnoses_completed if self.diagnoses_completed else 0.0
            return (
                f"requests_total {self.requests_total}\n"
                f"cache_hits {self.cache_hits}\n"
                f"cache_misses {self.cache_misses}\n"
                f"mean_diagnosis_seconds {mean:.6f}\n"
            )


def build_provider(config: ServerConfig) -> Provider:
    if config.llm_endpoint:
        return HttpChatProvider(
            endpoint=config.llm_endpoint, api_key=config.llm_api_key, model=config.llm_model
        )
    if config.stub_fixtures_path:
        return StubProvider.from_file(config.stub_fixtures_path)
    return StubProvider()


def create_app(
    config: ServerConfig | None = None,
    provider: Provider | None = None,
    kb_index: KBIndex | None = None,
    registry: AgentRegistry | None = None,
) -> FastAPI:
    config = config or ServerConfig()
    provider = provider if provider is not None else build_provider(config)
    kb = kb_index if kb_index is not None else default_index(config.kb_path)
    pipeline_config = PipelineConfig(consensus_k=config.consensus_k)
    cache = LRUCache(config.cache_capacity)
    metrics = Metrics()
    health_lock = threading.Lock()
    health_state = {"checked_at": 0.0, "reachable": False}

    app = FastAPI(title="mlfix analysis server", docs_url=None, redoc_url=None)
    app.state.cache = cache
    app.state.metrics = metrics
    app.state.provider = provider

    def provider_reachable() -> bool:
        now = time.monotonic()
        with health_lock:
            if now - health_state["checked_at"] < HEALTH_PROBE_TTL_SECONDS:
                return health_state["reachable"]
        reachable = bool(provider.reachable())
        with health_lock:
            health_state["checked_at"] = time.monotonic()
            health_state["reachable"] = reachable
        return reachable

    @app.post("/analyze")
    async def analyze(request: Request) -> Response:
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            metrics.record_rejected()
            return JSONResponse({"error": "request body exceeds 32 MiB"}, status_code=413)
        try:
            document = json.loads(body)
        except json.JSONDecodeError as err:
            metrics.record_rejected()
            return JSONResponse({"error": f"malformed JSON: {err}"}, status_code=400)
        try:
            bundle = ArtifactBundle.from_dict(document)
            key = bundle_hash(bundle)
        except WireError as err:
            metrics.record_rejected()
            return JSONResponse({"error": err.message, "field_path": err.path}, status_code=422)

        cached = cache.get(key)
        if cached is not None:
            metrics.record_hit()
            return Response(content=cached, media_type="application/json", headers={"X-Cache": "hit"})

        loop = asyncio.get_running_loop()
        started = time.perf_counter()
        try:
            diagnosis = await asyncio.wait_for(
                loop.run_in_executor(
                    None, lambda: run_pipeline(bundle, provider, kb, pipeline_config, registry)
                ),
                timeout=config.request_timeout_secs,
            )
        except asyncio.TimeoutError:
            metrics.record_rejected()
            return JSONResponse({"error": "analysis timed out"}, status_code=504)
        payload = encode_diagnosis(diagnosis)
        cache.put(key, payload)
        metrics.record_miss(time.perf_counter() - started)
        return Response(content=payload, media_type="application/json", headers={"X-Cache": "miss"})

    @app.get("/healthz")
    async def healthz() -> JSONResponse:
        return JSONResponse(
            {"status": "ok", "provider_reachable": provider_reachable(), "kb_documents": len(kb)}
        )

    @app.get("/metrics")
    async def metrics_endpoint() -> PlainTextResponse:
        return PlainTextResponse(metrics.render())

    return app


def serve(config: ServerConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="warning")
