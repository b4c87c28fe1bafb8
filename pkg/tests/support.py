"""Shared test helpers: independent oracles, a structural validator, fixtures.

The oracle functions intentionally re-derive results from first principles
(no imports from the package internals beyond plain data types) so the tests
compare two unrelated implementations.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from icicl.model import ApiParameter, BankEntry, ExampleValue, ParameterBank, SchemaType


# ---------------------------------------------------------------------------
# builders

def make_param(
    param_name: str = "currency",
    description: str = "Search by ISO 4217 currency code",
    operation_id: str = "v2Currency",
    api_name: str = "rest-countries",
    kind: str = "string",
    enum_values: tuple[str, ...] = (),
    item_kind: SchemaType | None = None,
    location: str = "query",
    required: bool = False,
    examples: tuple[str, ...] = (),
    source_pointer: str = "/paths/~1x/get/parameters/0",
) -> ApiParameter:
    return ApiParameter(
        api_name=api_name,
        operation_id=operation_id,
        param_name=param_name,
        description=description,
        location=location,
        required=required,
        declared_type=SchemaType(kind=kind, enum_values=enum_values, item_kind=item_kind),
        existing_examples=tuple(ExampleValue.from_raw(e) for e in examples),
        source_pointer=source_pointer,
    )


def make_bank(*specs: tuple[str, str, str, str, str], digest: str = "f" * 64) -> ParameterBank:
    """Each spec is (api_name, param_name, description, operation_id, example)."""
    entries = []
    for i, (api, name, desc, opid, example) in enumerate(specs):
        param = make_param(
            param_name=name,
            description=desc,
            operation_id=opid,
            api_name=api,
            examples=(example,),
            source_pointer=f"/paths/~1p{i}/get/parameters/0",
        )
        entries.append(BankEntry(parameter=param, canonical_example=param.existing_examples[0]))
    return ParameterBank(entries=entries, source_digest=digest)


# ---------------------------------------------------------------------------
# BM25 oracle: the textbook formula, computed directly per (doc, query) pair

def bm25_oracle(
    doc_tokens: list[list[str]], query_tokens: list[str], k1: float = 1.2, b: float = 0.75
) -> list[float]:
    n = len(doc_tokens)
    avg_len = sum(len(d) for d in doc_tokens) / n
    scores = []
    for doc in doc_tokens:
        score = 0.0
        for term in query_tokens:
            tf = doc.count(term)
            if tf == 0:
                continue
            df = sum(1 for other in doc_tokens if term in other)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len(doc) / avg_len))
        scores.append(score)
    return scores


# ---------------------------------------------------------------------------
# selection oracle: the five postprocess steps, written as literal scans

def select_oracle(
    greedy: str | None,
    diverse: list[str],
    type_ok,
    embed_fn,
) -> tuple[list[str], list[str]] | None:
    """Returns (examples, provenance) or None when the greedy anchor is unusable.

    `type_ok(text) -> bool` stands in for the declared-type check; `embed_fn`
    maps a text to a unit-vector list for the similarity stage.
    """
    if greedy is None or not type_ok(greedy):
        return None

    survivors = [d for d in diverse if type_ok(d)]  # step 1
    multiset = [greedy] + survivors  # step 2

    def fold(t: str) -> str:
        return t.casefold()

    order: list[str] = []
    casing: dict[str, str] = {}
    for t in multiset:
        if fold(t) not in casing:
            casing[fold(t)] = t
            order.append(fold(t))

    picked = [fold(greedy)]  # step 3
    prov = ["greedy"]

    repeats = [k for k in order if multiset_count(multiset, k) >= 2 and k != fold(greedy)]
    repeats.sort(key=lambda k: (-multiset_count(multiset, k), order.index(k)))
    for k in repeats:  # step 4
        if len(picked) >= 3:
            break
        picked.append(k)
        prov.append("repeated")

    if len(picked) < 3:  # step 5
        rest = [k for k in order if k not in picked]
        gv = embed_fn(casing[fold(greedy)])
        scored = []
        for k in rest:
            v = embed_fn(casing[k])
            if v == gv:
                sim = 1.0
            else:
                sim = max(-1.0, min(1.0, sum(x * y for x, y in zip(gv, v))))
            scored.append((k, sim))
        scored.sort(key=lambda kv: (-kv[1], order.index(kv[0])))
        for k, _sim in scored:
            if len(picked) >= 3:
                break
            picked.append(k)
            prov.append("embedding_selected")

    return [casing[k] for k in picked], prov


def multiset_count(values: list[str], folded: str) -> int:
    return sum(1 for v in values if v.casefold() == folded)


# ---------------------------------------------------------------------------
# sampling oracle: independent without-replacement sampler over exp(score/T)

def sample_oracle_draw(
    scores: list[float], temperature: float, rng: random.Random, count: int
) -> list[int]:
    """One context's worth of draws; renormalizes over the remaining entries."""
    remaining = list(range(len(scores)))
    out = []
    for _ in range(count):
        weights = [math.exp(scores[i] / temperature) for i in remaining]
        total = sum(weights)
        r = rng.random() * total
        cum = 0.0
        pick = remaining[-1]
        for i, w in zip(remaining, weights):
            cum += w
            if r < cum:
                pick = i
                break
        out.append(pick)
        remaining.remove(pick)
    return out


# ---------------------------------------------------------------------------
# diversity oracle

def diversity_oracle(texts: list[str], embed_fn) -> float:
    vectors = [embed_fn(t) for t in texts]
    sims = []
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            sims.append(sum(x * y for x, y in zip(vectors[i], vectors[j])))
    value = 1.0 - sum(sims) / len(sims)
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# structural OpenAPI 3.x validation (subset, but strict about what it checks)

_METHODS = {"get", "put", "post", "delete", "options", "head", "patch", "trace"}
_PATH_ITEM_EXTRAS = {"summary", "description", "servers", "parameters", "$ref"}
_PARAM_LOCATIONS = {"query", "header", "path", "cookie"}
_SCHEMA_TYPES = {"string", "number", "integer", "boolean", "array", "object", "null"}


def validate_openapi(tree) -> list[str]:
    """Structural problems of an OpenAPI 3.x document; empty list means valid."""
    problems: list[str] = []

    def err(msg: str) -> None:
        problems.append(msg)

    if not isinstance(tree, dict):
        return ["document root must be an object"]
    version = tree.get("openapi")
    if not isinstance(version, str) or not version.startswith("3."):
        err(f"openapi version missing or not 3.x: {version!r}")
    info = tree.get("info")
    if not isinstance(info, dict):
        err("info object missing")
    else:
        if not isinstance(info.get("title"), str) or not info["title"]:
            err("info.title missing")
        if not isinstance(info.get("version"), str) or not info["version"]:
            err("info.version missing")

    paths = tree.get("paths")
    if paths is None:
        return problems
    if not isinstance(paths, dict):
        return problems + ["paths must be an object"]

    seen_op_ids: dict[str, str] = {}
    for path, item in paths.items():
        where = f"paths.{path}"
        if not isinstance(path, str) or not path.startswith("/"):
            err(f"{where}: path must start with '/'")
        if not isinstance(item, dict):
            err(f"{where}: path item must be an object")
            continue
        for key, value in item.items():
            if key in _PATH_ITEM_EXTRAS or key.startswith("x-"):
                if key == "parameters":
                    problems.extend(_check_parameters(value, where, version))
                continue
            if key not in _METHODS:
                err(f"{where}: unknown path item key {key!r}")
                continue
            op = value
            opw = f"{where}.{key}"
            if not isinstance(op, dict):
                err(f"{opw}: operation must be an object")
                continue
            opid = op.get("operationId")
            if opid is not None:
                if opid in seen_op_ids:
                    err(f"{opw}: duplicate operationId {opid!r} (also at {seen_op_ids[opid]})")
                else:
                    seen_op_ids[opid] = opw
            if "parameters" in op:
                problems.extend(_check_parameters(op["parameters"], opw, version))
            responses = op.get("responses")
            if responses is not None and not isinstance(responses, dict):
                err(f"{opw}: responses must be an object")
            if responses is None and not version.startswith("3.1"):
                err(f"{opw}: responses required before 3.1")
    return problems


def _check_parameters(params, where: str, version: str) -> list[str]:
    problems: list[str] = []
    if not isinstance(params, list):
        return [f"{where}: parameters must be a list"]
    seen: set[tuple[str, str]] = set()
    for i, p in enumerate(params):
        pw = f"{where}.parameters[{i}]"
        if not isinstance(p, dict):
            problems.append(f"{pw}: parameter must be an object")
            continue
        if "$ref" in p:
            continue
        name, loc = p.get("name"), p.get("in")
        if not isinstance(name, str) or not name:
            problems.append(f"{pw}: name missing")
        if loc not in _PARAM_LOCATIONS:
            problems.append(f"{pw}: bad location {loc!r}")
        if (str(name), str(loc)) in seen:
            problems.append(f"{pw}: duplicate (name, in)")
        seen.add((str(name), str(loc)))
        if loc == "path" and p.get("required") is not True:
            problems.append(f"{pw}: path parameters must be required")
        if "schema" in p:
            problems.extend(_check_schema(p["schema"], pw + ".schema", version))
        elif "content" not in p:
            problems.append(f"{pw}: needs schema or content")
    return problems


def _check_schema(schema, where: str, version: str) -> list[str]:
    problems: list[str] = []
    if not isinstance(schema, dict):
        return [f"{where}: schema must be an object"]
    t = schema.get("type")
    if t is not None:
        types = t if isinstance(t, list) else [t]
        if isinstance(t, list) and not version.startswith("3.1"):
            problems.append(f"{where}: type lists need 3.1")
        for member in types:
            if member not in _SCHEMA_TYPES:
                problems.append(f"{where}: bad type {member!r}")
    enum = schema.get("enum")
    if enum is not None and not isinstance(enum, list):
        problems.append(f"{where}: enum must be a list")
    if "examples" in schema and not version.startswith("3.1"):
        problems.append(f"{where}: schema examples list needs 3.1")
    examples = schema.get("examples")
    if examples is not None and not isinstance(examples, list):
        problems.append(f"{where}: schema examples must be a list")
    if "items" in schema:
        problems.extend(_check_schema(schema["items"], where + ".items", version))
    return problems


# ---------------------------------------------------------------------------
# embedding fixtures

EMBED_TABLE: dict[str, list[float]] = {
    "USD": [1.0, 0.0, 0.0, 0.0],
    "EUR": [0.96, 0.28, 0.0, 0.0],
    "CAD": [0.6, 0.8, 0.0, 0.0],
    "GPP": [0.0, 1.0, 0.0, 0.0],
    "ZAR": [0.0, 0.6, 0.8, 0.0],
    "INR": [0.0, 0.0, 1.0, 0.0],
    "MXN": [0.0, 0.0, 0.0, 1.0],
    "CNY": [0.0, 0.8, 0.6, 0.0],
}


def table_vector(text: str, table: dict[str, list[float]] | None = None) -> list[float]:
    """Unit vector from the fixture table, falling back to a hash direction."""
    table = EMBED_TABLE if table is None else table
    if text in table:
        return list(table[text])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    raw = [1.0 + digest[i] for i in range(4)]
    norm = math.sqrt(sum(v * v for v in raw))
    return [v / norm for v in raw]


class FixtureEmbedder:
    """In-process EmbeddingProvider over the canned table."""

    provider_id = "fixture-table"
    is_deterministic = True

    def __init__(self, table: dict[str, list[float]] | None = None):
        self.table = EMBED_TABLE if table is None else table

    def embed(self, texts):
        from icicl.embeddings import EmbeddingVector

        return [EmbeddingVector(components=tuple(table_vector(t, self.table))) for t in texts]


class _EmbedHandler(BaseHTTPRequestHandler):
    table: dict[str, list[float]] = EMBED_TABLE

    def do_POST(self):  # noqa: N802 (http.server naming)
        length = int(self.headers.get("Content-Length", "0"))
        payload = json.loads(self.rfile.read(length).decode("utf-8"))
        vectors = [table_vector(t, self.table) for t in payload.get("texts", [])]
        body = json.dumps({"vectors": vectors}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):  # keep test output quiet
        pass


class EmbedServer:
    """Context manager exposing the table embedder over HTTP on a local port."""

    def __init__(self, table: dict[str, list[float]] | None = None):
        handler = type("Handler", (_EmbedHandler,), {"table": table or EMBED_TABLE})
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self.endpoint = f"http://127.0.0.1:{self._server.server_port}/embed"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def __enter__(self) -> "EmbedServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)
