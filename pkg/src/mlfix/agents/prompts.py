"""Prompt assembly from the shipped template files.

Templates are data, not code: plain text with named placeholders under
mlfix/data/prompts. All dynamic content is rendered as canonical JSON so a
given input always produces byte-identical prompts (the stub provider keys
fixtures on the prompt hash).
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any

from ..model import LLMMessage, LLMRequest


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files("mlfix").joinpath(f"data/prompts/{name}.txt").read_text(encoding="utf-8")


def _canonical(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def build_request(
    template: str,
    fields: dict[str, str],
    schema: str,
    temperature: float = 0.2,
    max_tokens: int = 1024,
) -> LLMRequest:
    body = load_template(template).format(**fields)
    return LLMRequest(
        messages=(
            LLMMessage(role="system", content=load_template("system").strip()),
            LLMMessage(role="user", content=body),
        ),
        temperature=temperature,
        max_tokens=max_tokens,
        response_format_hint=schema,
    )


def dataset_analyzer_request(train_stats: dict, test_stats: dict) -> LLMRequest:
    return build_request(
        "dataset_analyzer",
        {"train_stats": _canonical(train_stats), "test_stats": _canonical(test_stats)},
        schema="findings_v1",
    )


def checks_analyzer_request(results: list[dict]) -> LLMRequest:
    return build_request("checks_analyzer", {"results": _canonical(results)}, schema="findings_v1")


def checkpoint_analyzer_request(checkpoint: dict, train_stats: dict) -> LLMRequest:
    return build_request(
        "checkpoint_analyzer",
        {"checkpoint": _canonical(checkpoint), "train_stats": _canonical(train_stats)},
        schema="findings_v1",
    )


def hypothesis_request(narrative: str, evidence: list[dict], references: list[dict]) -> LLMRequest:
    return build_request(
        "hypothesis",
        {"narrative": narrative, "evidence": _canonical(evidence), "references": _canonical(references)},
        schema="hypothesis_v1",
    )


def synthesis_request(clusters: list[dict], hypotheses: list[dict], temperature: float = 0.7) -> LLMRequest:
    return build_request(
        "synthesis",
        {"clusters": _canonical(clusters), "hypotheses": _canonical(hypotheses)},
        schema="synthesis_v1",
        temperature=temperature,
    )


def with_sample_marker(request: LLMRequest, sample_index: int, total: int) -> LLMRequest:
    """Distinct prompt per self-consistency sample so scripted stubs can vary
    the completion across reasoning paths."""
    marker = LLMMessage(role="user", content=f"Reasoning path {sample_index} of {total}.")
    return LLMRequest(
        messages=request.messages + (marker,),
        temperature=request.temperature,
        max_tokens=request.max_tokens,
        response_format_hint=request.response_format_hint,
    )


def with_repair_instruction(request: LLMRequest, schema: str, attempt: int) -> LLMRequest:
    note = LLMMessage(
        role="user",
        content=f"Repair attempt {attempt}: return only valid JSON matching the {schema} schema.",
    )
    return LLMRequest(
        messages=request.messages + (note,),
        temperature=request.temperature,
        max_tokens=request.max_tokens,
        response_format_hint=schema,
    )


def extract_json_object(text: str) -> dict | None:
    """First balanced top-level JSON object in a completion, or None."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        parsed = json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
                    return parsed if isinstance(parsed, dict) else None
        start = text.find("{", start + 1)
    return None
