"""Rendering contexts into completion prompts and parsing what comes back."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .contexts import PromptContext
from .model import ApiParameter, ExampleValue

HEADER = "# Given an OpenAPI parameter, generate a unique example of the parameter."

DEFAULT_MAX_NEW_TOKENS = 64
DEFAULT_STOP_SEQUENCES = ("\n",)

_QUOTE_STRIPPED_KINDS = frozenset({"string", "datetime", "enum", "unknown"})


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    temperature: float
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS
    stop_sequences: tuple[str, ...] = DEFAULT_STOP_SEQUENCES


@dataclass(frozen=True)
class RawGeneration:
    text: str
    backend_id: str = ""
    latency_ms: int = 0


def _input_block(index: int, param: ApiParameter) -> str:
    fields = {
        "param_name": param.param_name,
        "type": param.declared_type.kind,
        "operation_id": param.operation_id,
        "description": param.description,
        "api_name": param.api_name,
    }
    body = json.dumps(fields, indent=4, ensure_ascii=False)
    comment = f"# must generate a unique {param.param_name} {param.declared_type.kind}"
    return f"input_{index} = {body}\n{comment}\n"


def render_prompt(context: PromptContext) -> str:
    """Byte-deterministic prompt: header, one block per shot, dangling target.

    Every shot contributes an input_i object, a "# must generate a unique ..."
    comment, and its example as a JSON literal. The target repeats the shape
    but ends at "example_n = " (with the trailing space) for the model to
    complete.
    """
    parts = [HEADER + "\n"]
    for i, shot in enumerate(context.shots):
        parts.append(_input_block(i, shot.parameter))
        parts.append(f"example_{i} = {shot.example.to_json_text()}\n")
    n = len(context.shots)
    parts.append(_input_block(n, context.target))
    parts.append(f"example_{n} = ")
    return "".join(parts)


def parse_generation(raw: RawGeneration, declared_kind: str) -> ExampleValue | None:
    """First line of the completion as an ExampleValue, or None when empty.

    String-like kinds lose one layer of matching quotes so that a model
    completing `example_6 = "USD"` yields the value USD.
    """
    text = raw.text.split("\n", 1)[0].strip()
    if declared_kind in _QUOTE_STRIPPED_KINDS and len(text) >= 2:
        if text[0] == text[-1] and text[0] in ('"', "'"):
            text = text[1:-1]
    if not text.strip():
        return None
    return ExampleValue.from_raw(text)
