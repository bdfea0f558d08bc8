"""Authenticated JSON API for the copilot UI: map, suggest, documents, edit.

Tokens are HMAC-signed bearer payloads (user id + expiry) checked on every
request; all retrieval and indexing is scoped to the authenticated user, and
/v1/suggest never mutates anything.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import condlogic
from .answer import construct_query, format_answer, synthesize
from .chunker import ChunkConfig, SourceType, chunk_text
from .condlogic import FormState, Visibility, build_dependency_graph, evaluate_visibility
from .doctree import DocTree, build_doc_tree
from .fieldmap import (
    ContextNode,
    FieldDescriptor,
    InputKind,
    MappingCache,
    MappingConfig,
    MappingTier,
    map_field,
)
from .index import LexicalIndex, RetrievalRequest
from .model import DeterministicExtractor, ModelClient
from .schema import CanonicalSchema

TOKEN_TTL_S = 3600
MAX_DOC_BYTES = 1_000_000
MULTI_VALUED_PREFIXES = ("user.activities.",)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _b64(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def _unb64(text: str) -> bytes:
    padding = "=" * (-len(text) % 4)
    return base64.urlsafe_b64decode(text + padding)


def issue_token(user_id: str, secret: str, now: float, ttl_s: int = TOKEN_TTL_S) -> str:
    payload = _b64(json.dumps({"user_id": user_id, "expiry": now + ttl_s}).encode())
    signature = _b64(hmac.new(secret.encode(), payload.encode(), hashlib.sha256).digest())
    return f"{payload}.{signature}"


def verify_token(token: str, secret: str, now: float) -> str:
    """Returns the user id; raises ApiError(401) on any defect."""
    try:
        payload, signature = token.split(".")
        expected = _b64(hmac.new(secret.encode(), payload.encode(), hashlib.sha256).digest())
        if not hmac.compare_digest(signature, expected):
            raise ValueError("bad signature")
        claims = json.loads(_unb64(payload))
        if now >= float(claims["expiry"]):
            raise ValueError("expired")
        return str(claims["user_id"])
    except ApiError:
        raise
    except Exception:
        raise ApiError(401, "unauthorized", "missing, invalid, or expired token") from None


_CONTRACTIONS = {
    "don't": "do not",
    "can't": "cannot",
    "won't": "will not",
    "it's": "it is",
    "i'm": "I am",
    "isn't": "is not",
    "didn't": "did not",
    "wasn't": "was not",
    "couldn't": "could not",
    "i've": "I have",
    "we're": "we are",
    "they're": "they are",
}
_FILLERS = ("really", "very", "basically", "actually", "just")
_SYNONYMS = {
    "helped": "assisted",
    "made": "created",
    "got": "received",
    "big": "substantial",
    "good": "strong",
}


class RuleBasedEditor:
    """Deterministic stand-in for the editing model: five preset transforms.

    Unknown instructions are a no-op so the diff degenerates to all-keep.
    """

    PRESETS = ("improve", "rephrase", "shorten", "formalize", "fix_grammar")

    def revise(self, text: str, instruction: str) -> str:
        key = instruction.strip().lower().replace(" ", "_")
        if key == "shorten":
            sentences = re.split(r"(?<=[.!?])\s+", text)
            kept = [s.split(",")[0].rstrip() for s in sentences]
            return " ".join(
                k if k.endswith((".", "!", "?")) else k + "." for k in kept if k
            )
        if key == "formalize":
            out = text
            for contraction, expansion in _CONTRACTIONS.items():
                out = re.sub(re.escape(contraction), expansion, out, flags=re.IGNORECASE)
            return out
        if key == "improve":
            words = [w for w in text.split() if w.lower().strip(".,!?") not in _FILLERS]
            return " ".join(words)
        if key == "rephrase":
            return " ".join(_SYNONYMS.get(w.lower(), w) for w in text.split())
        if key == "fix_grammar":
            out = text.strip()
            if out and out[0].islower():
                out = out[0].upper() + out[1:]
            if out and out[-1] not in ".!?":
                out += "."
            return out
        return text


def lcs_diff(original: str, revised: str) -> list[dict]:
    """Word-level keep/del/ins opcodes from an LCS alignment."""
    a = original.split()
    b = revised.split()
    n, m = len(a), len(b)
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                lcs[i][j] = lcs[i + 1][j + 1] + 1
            else:
                lcs[i][j] = max(lcs[i + 1][j], lcs[i][j + 1])

    ops: list[dict] = []

    def emit(op: str, word: str) -> None:
        if ops and ops[-1]["op"] == op:
            ops[-1]["text"] += " " + word
        else:
            ops.append({"op": op, "text": word})

    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            emit("keep", a[i])
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            emit("del", a[i])
            i += 1
        else:
            emit("ins", b[j])
            j += 1
    while i < n:
        emit("del", a[i])
        i += 1
    while j < m:
        emit("ins", b[j])
        j += 1
    return ops


@dataclass
class ServiceConfig:
    schema: CanonicalSchema
    users: dict[str, str] = field(default_factory=lambda: {"student": "open-sesame"})
    token_secret: str = "groundfill-dev-secret"
    token_ttl_s: int = TOKEN_TTL_S
    index: LexicalIndex = field(default_factory=LexicalIndex)
    model: ModelClient = field(default_factory=DeterministicExtractor)
    editor: RuleBasedEditor = field(default_factory=RuleBasedEditor)
    clock: Callable[[], float] = time.time
    max_doc_bytes: int = MAX_DOC_BYTES
    mapping: MappingConfig = field(default_factory=MappingConfig)
    chunking: ChunkConfig = field(default_factory=ChunkConfig)


def parse_descriptor(payload: dict) -> FieldDescriptor:
    try:
        ancestors = tuple(
            ContextNode(
                tag=node["tag"],
                id_attr=node.get("id_attr"),
                class_list=tuple(node.get("class_list", ())),
                heading_text=node.get("heading_text"),
            )
            for node in payload.get("ancestors", ())
        )
        return FieldDescriptor(
            element_id=payload.get("element_id"),
            name_attr=payload.get("name_attr"),
            label_text=payload.get("label_text"),
            placeholder=payload.get("placeholder"),
            aria_label=payload.get("aria_label"),
            nearby_text=tuple(payload.get("nearby_text", ())),
            input_kind=InputKind(payload.get("input_kind", "TextInput")),
            options=tuple(payload.get("options", ())),
            ancestors=ancestors,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, "bad_descriptor", str(exc)) from None


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="groundfill", docs_url=None, redoc_url=None)
    graph = build_dependency_graph(config.schema)
    mapping_cache = MappingCache()
    # user -> list of {doc_name, status, chunks}; user -> doc trees
    documents: dict[str, list[dict]] = {}
    trees: dict[str, dict[str, DocTree]] = {}
    upload_seq: dict[str, int] = {}
    upload_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error_code": exc.code, "message": exc.message},
        )

    async def read_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "bad_request", "body must be a JSON object") from None
        if not isinstance(body, dict):
            raise ApiError(400, "bad_request", "body must be a JSON object")
        return body

    def authenticate(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "unauthorized", "missing bearer token")
        return verify_token(header[7:].strip(), config.token_secret, config.clock())

    @app.post("/v1/auth/login")
    async def login(request: Request):
        body = await read_body(request)
        user_id = body.get("user_id")
        secret = body.get("secret")
        if not isinstance(user_id, str) or config.users.get(user_id) != secret:
            raise ApiError(401, "unauthorized", "unknown user or wrong secret")
        token = issue_token(user_id, config.token_secret, config.clock(), config.token_ttl_s)
        return {"token": token}

    @app.post("/v1/map")
    async def map_endpoint(request: Request):
        authenticate(request)
        body = await read_body(request)
        if "field_descriptor" not in body:
            raise ApiError(400, "bad_request", "field_descriptor is required")
        descriptor = parse_descriptor(body["field_descriptor"])
        result = map_field(descriptor, config.schema, config.mapping, mapping_cache)
        return {
            "mapping_result": {
                "field_id": result.field_id,
                "tier": result.tier.value,
                "confidence": result.confidence,
                "evidence": result.evidence,
            }
        }

    @app.post("/v1/suggest")
    async def suggest(request: Request):
        user_id = authenticate(request)
        body = await read_body(request)
        if "field" not in body:
            raise ApiError(400, "bad_request", "field is required")
        descriptor = parse_descriptor(body["field"])
        context_values = (body.get("form_context") or {}).get("values", {})
        if not isinstance(context_values, dict):
            raise ApiError(400, "bad_request", "form_context.values must be an object")

        mapping = map_field(descriptor, config.schema, config.mapping, mapping_cache)
        if mapping.tier is MappingTier.UNMAPPED:
            return {"status": "Unmapped", "candidates": [], "field_id": None}
        fid = mapping.field_id

        state = evaluate_visibility(
            graph, FormState(values=dict(context_values)), config.schema
        )
        if state.visibility.get(fid) is Visibility.HIDDEN:
            raise ApiError(409, "field_hidden", f"{fid} is hidden under this form context")

        fld = config.schema.fields[fid]
        query = construct_query(fld, descriptor.label_text or "")
        scored = config.index.search(
            RetrievalRequest(query=query, top_k=5, user_scope=user_id)
        )
        multi_valued = any(fid.startswith(p) for p in MULTI_VALUED_PREFIXES)
        limit = 5 if multi_valued else 1

        candidates = []
        seen_values = set()
        for hit in scored:
            draft = synthesize(query, fld, [hit.chunk], config.model)
            if draft.refused:
                continue
            formatted = format_answer(draft, fld)
            if formatted.violations or formatted.value in seen_values:
                continue
            seen_values.add(formatted.value)
            candidates.append(
                {
                    "value": formatted.value,
                    "citations": list(draft.citations),
                    "source_type": hit.chunk.source_type.value,
                }
            )
            if len(candidates) >= limit:
                break

        if not candidates:
            return {"status": "NoData", "candidates": [], "field_id": fid}
        return {"status": "Suggestions", "candidates": candidates, "field_id": fid}

    @app.post("/v1/documents")
    async def upload_document(request: Request):
        user_id = authenticate(request)
        body = await read_body(request)
        doc_name = body.get("doc_name")
        text = body.get("text")
        if not isinstance(doc_name, str) or not doc_name or not isinstance(text, str):
            raise ApiError(400, "bad_request", "doc_name and text are required")
        if len(text.encode("utf-8")) > config.max_doc_bytes:
            raise ApiError(413, "payload_too_large", "document exceeds size limit")

        with upload_lock:
            upload_seq[user_id] = upload_seq.get(user_id, 0) + 1
            seq = upload_seq[user_id]
        page_id = f"{_safe_doc_id(doc_name)}_{seq}"
        chunks = chunk_text(
            text,
            config.chunking,
            institution=user_id,
            page_id=page_id,
            source_url=f"upload://{doc_name}",
            page_title=doc_name,
            source_type=SourceType.PERSONAL,
            user_id=user_id,
        )
        if chunks:
            config.index.index_chunks(chunks)
            trees.setdefault(user_id, {})[doc_name] = build_doc_tree([text])
        documents.setdefault(user_id, []).append(
            {"doc_name": doc_name, "status": "ready", "chunks": len(chunks)}
        )
        return {"chunks_indexed": len(chunks), "status": "ready"}

    @app.get("/v1/documents")
    async def list_documents(request: Request):
        user_id = authenticate(request)
        return {"documents": documents.get(user_id, [])}

    @app.post("/v1/edit")
    async def edit(request: Request):
        authenticate(request)
        body = await read_body(request)
        selected = body.get("selected_text")
        instruction = body.get("instruction", "")
        if not isinstance(selected, str) or not selected.strip():
            raise ApiError(400, "bad_request", "selected_text must be non-empty")
        revised = config.editor.revise(selected, str(instruction))
        return {
            "original": selected,
            "revised_text": revised,
            "diff": lcs_diff(selected, revised),
        }

    @app.get("/v1/profile/snapshot")
    async def profile_snapshot(request: Request):
        authenticate(request)
        raise ApiError(501, "reserved", "profile snapshot endpoint is reserved")

    app.state.config = config
    app.state.documents = documents
    app.state.trees = trees
    return app


def _safe_doc_id(doc_name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in doc_name).strip("_").lower() or "doc"
