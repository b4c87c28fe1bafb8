"""Filtering model generations down to at most three final examples."""

from __future__ import annotations

import calendar
import json
import re
from dataclasses import dataclass
from typing import Any

from .embeddings import EmbeddingProvider, cosine
from .errors import GreedyMissing
from .model import ExampleValue, SchemaType

PROVENANCE = ("greedy", "repeated", "embedding_selected", "copied")

MAX_EXAMPLES = 3

_FULL_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_DATE_TIME_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt](\d{2}):(\d{2}):(\d{2})(?:\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)


def _valid_date(year: int, month: int, day: int) -> bool:
    if not 1 <= month <= 12:
        return False
    return 1 <= day <= calendar.monthrange(year, month)[1]


def is_rfc3339(text: str) -> bool:
    """RFC 3339 full-date or date-time, including leap seconds and offsets."""
    m = _FULL_DATE_RE.match(text)
    if m:
        return _valid_date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    m = _DATE_TIME_RE.match(text)
    if not m:
        return False
    year, month, day, hour, minute, second = (int(m.group(i)) for i in range(1, 7))
    if not _valid_date(year, month, day):
        return False
    if hour > 23 or minute > 59 or second > 60:
        return False
    offset = m.group(7)
    if offset not in ("Z", "z"):
        if int(offset[1:3]) > 23 or int(offset[4:6]) > 59:
            return False
    return True


def type_check(value: ExampleValue, schema_type: SchemaType) -> bool:
    """Does the value's textual form satisfy the declared type?

    A bare JSON number, array, or object never passes as a string; enum
    membership is case-sensitive; unknown kinds accept anything.
    """
    kind = schema_type.kind
    if kind == "string":
        return value.parsed_kind == "string"
    if kind == "integer":
        return value.parsed_kind == "integer"
    if kind == "number":
        return value.parsed_kind in ("integer", "number")
    if kind == "boolean":
        return value.parsed_kind == "boolean"
    if kind == "object":
        return value.parsed_kind == "object"
    if kind == "datetime":
        return value.parsed_kind == "string" and is_rfc3339(value.raw_text)
    if kind == "enum":
        return value.raw_text in schema_type.enum_values
    if kind == "array":
        if value.parsed_kind != "array":
            return False
        item_kind = schema_type.item_kind
        assert item_kind is not None
        if item_kind.kind == "unknown":
            return True
        items: list[Any] = json.loads(value.raw_text)
        for item in items:
            try:
                item_value = ExampleValue.from_python(item)
            except ValueError:
                return False
            if not type_check(item_value, item_kind):
                return False
        return True
    return True  # unknown: nothing to falsify


@dataclass(frozen=True)
class CandidatePool:
    """Parsed generations for one parameter, before selection."""

    greedy: ExampleValue | None
    diverse: tuple[ExampleValue, ...]
    target_type: SchemaType


@dataclass(frozen=True)
class ExampleSet:
    """The final one-to-three examples with where each one came from."""

    examples: tuple[ExampleValue, ...]
    greedy_included: bool
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.examples) <= MAX_EXAMPLES:
            raise ValueError("an example set holds between 1 and 3 examples")
        if len(self.provenance) != len(self.examples):
            raise ValueError("provenance must parallel examples")
        for p in self.provenance:
            if p not in PROVENANCE:
                raise ValueError(f"bad provenance: {p!r}")
        if self.greedy_included and self.provenance[0] != "greedy":
            raise ValueError("greedy example must come first")

    def to_dict(self) -> dict[str, Any]:
        return {
            "examples": [e.to_dict() for e in self.examples],
            "greedy_included": self.greedy_included,
            "provenance": list(self.provenance),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExampleSet":
        return cls(
            examples=tuple(ExampleValue.from_dict(e) for e in d["examples"]),
            greedy_included=bool(d["greedy_included"]),
            provenance=tuple(d["provenance"]),
        )


def _fold(value: ExampleValue) -> str:
    return value.raw_text.casefold()


def select_examples(pool: CandidatePool, embedder: EmbeddingProvider) -> ExampleSet:
    """Reduce a pool to at most three examples.

    Type-incorrect diverse candidates are dropped first. Values the model
    produced more than once (counting the greedy) are kept by descending
    multiplicity; any remaining slots are filled by cosine similarity to the
    greedy example. Value identity is case-insensitive, keeping the first-seen
    casing. Raises GreedyMissing when there is no type-correct greedy example.
    """
    if pool.greedy is None:
        raise GreedyMissing("no greedy example was generated")
    if not type_check(pool.greedy, pool.target_type):
        raise GreedyMissing(f"greedy example {pool.greedy.raw_text!r} fails the declared type")

    survivors = [d for d in pool.diverse if type_check(d, pool.target_type)]
    sequence = [pool.greedy, *survivors]

    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    representative: dict[str, ExampleValue] = {}
    for position, value in enumerate(sequence):
        key = _fold(value)
        counts[key] = counts.get(key, 0) + 1
        if key not in first_seen:
            first_seen[key] = position
            representative[key] = value

    greedy_key = _fold(pool.greedy)
    chosen = [greedy_key]

    repeated = sorted(
        (k for k, c in counts.items() if c >= 2 and k != greedy_key),
        key=lambda k: (-counts[k], first_seen[k]),
    )
    for key in repeated:
        if len(chosen) == MAX_EXAMPLES:
            break
        chosen.append(key)

    if len(chosen) < MAX_EXAMPLES:
        remaining = sorted((k for k in counts if k not in chosen), key=lambda k: first_seen[k])
        if remaining:
            texts = [representative[greedy_key].raw_text] + [representative[k].raw_text for k in remaining]
            vectors = embedder.embed(texts)
            greedy_vec = vectors[0]
            by_similarity = sorted(
                zip(remaining, vectors[1:]),
                key=lambda kv: (-cosine(kv[1], greedy_vec), first_seen[kv[0]]),
            )
            for key, _vec in by_similarity:
                if len(chosen) == MAX_EXAMPLES:
                    break
                chosen.append(key)

    provenance = ["greedy"] + [
        "repeated" if counts[k] >= 2 else "embedding_selected" for k in chosen[1:]
    ]
    return ExampleSet(
        examples=tuple(representative[k] for k in chosen),
        greedy_included=True,
        provenance=tuple(provenance),
    )
