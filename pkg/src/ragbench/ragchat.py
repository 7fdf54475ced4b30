"""Query orchestration: embed the question, retrieve context, call a backend.

Model backends are pluggable: an HTTP client for a locally hosted inference
server, plus two mocks (echo and reference-lookup) that make the full
pipeline testable without model weights. Latency is measured around backend
generation only; retrieval time is recorded separately.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Mapping

import httpx

from .docstore import Chunk, ChunkingConfig, Document, chunk_document
from .embedindex import EmbedderConfig, RetrievalHit, VectorIndex, embed
from .errors import (
    BackendError,
    BackendTimeout,
    EmptyQuestion,
    InvalidConfig,
    TemplateInvalid,
    UnknownModel,
)

CONTEXT_SEPARATOR = "\n---\n"

DEFAULT_SYSTEM_TEXT = (
    "You are a careful assistant for clinical guideline documents. "
    "Answer using only the provided context; say so when the context "
    "does not contain the answer."
)
DEFAULT_TEMPLATE = "Context:\n{context}\n\nQuestion: {question}\nAnswer:"


@dataclass(frozen=True)
class ModelBackendConfig:
    model_id: str
    kind: str = "http_generate"  # "http_generate" | "mock_echo" | "mock_reference"
    endpoint: str | None = None
    max_tokens: int = 512
    temperature: float = 0.0
    timeout_s: float = 120.0
    # mock knobs (ignored by http_generate)
    mock_delay_s: float = 0.0
    reference_lookup: Mapping[str, str] | None = None

    def __post_init__(self):
        if self.kind not in ("http_generate", "mock_echo", "mock_reference"):
            raise InvalidConfig(f"unknown backend kind: {self.kind!r}")
        if (self.endpoint is not None) != (self.kind == "http_generate"):
            raise InvalidConfig("endpoint must be set exactly when kind is http_generate")
        if self.max_tokens <= 0 or self.temperature < 0 or self.timeout_s <= 0:
            raise InvalidConfig("bad sampling/timeout parameters")


@dataclass(frozen=True)
class PromptTemplate:
    system_text: str = DEFAULT_SYSTEM_TEXT
    template: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        for placeholder in ("{context}", "{question}"):
            if self.template.count(placeholder) != 1:
                raise TemplateInvalid(
                    f"template must contain exactly one {placeholder}")


@dataclass
class ContextHit:
    """A retrieval hit enriched with the chunk text it points at."""
    chunk_id: str
    similarity: float
    text: str


@dataclass
class Answer:
    text: str
    hits: list[ContextHit]
    model_id: str
    latency_s: float
    retrieval_s: float = 0.0


@dataclass
class Session:
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    doc_ids: set[str] = field(default_factory=set)
    history: list[tuple[str, Answer]] = field(default_factory=list)


def build_prompt(question: str, hits: list[ContextHit], tpl: PromptTemplate) -> str:
    """Fill the template; hits join in given (descending-similarity) order."""
    context = CONTEXT_SEPARATOR.join(h.text for h in hits)
    filled = tpl.template.replace("{context}", context).replace("{question}", question)
    if tpl.system_text:
        return tpl.system_text + "\n\n" + filled
    return filled


def _call_backend(cfg: ModelBackendConfig, prompt: str, question: str,
                  context: str) -> str:
    if cfg.kind == "mock_echo":
        if cfg.mock_delay_s:
            time.sleep(cfg.mock_delay_s)
        return context
    if cfg.kind == "mock_reference":
        if cfg.mock_delay_s:
            time.sleep(cfg.mock_delay_s)
        lookup = cfg.reference_lookup or {}
        return lookup.get(question, "")
    # http_generate
    payload = {
        "model": cfg.model_id,
        "prompt": prompt,
        "max_tokens": cfg.max_tokens,
        "temperature": cfg.temperature,
    }
    try:
        resp = httpx.post(cfg.endpoint, json=payload, timeout=cfg.timeout_s)
    except httpx.TimeoutException as exc:
        raise BackendTimeout(f"{cfg.model_id}: {exc}") from exc
    except httpx.TransportError as exc:
        raise BackendError(f"{cfg.model_id}: {exc}") from exc
    if resp.status_code != 200:
        raise BackendError(f"{cfg.model_id}: backend returned {resp.status_code}")
    try:
        return resp.json()["text"]
    except (KeyError, ValueError) as exc:
        raise BackendError(f"{cfg.model_id}: malformed response: {exc}") from exc


class ModelRegistry:
    """Registered model backends, preserved in registration order."""

    def __init__(self):
        self._configs: dict[str, ModelBackendConfig] = {}

    def register(self, cfg: ModelBackendConfig) -> None:
        self._configs[cfg.model_id] = cfg

    def get(self, model_id: str) -> ModelBackendConfig:
        if model_id not in self._configs:
            raise UnknownModel(f"model not registered: {model_id}")
        return self._configs[model_id]

    def list_models(self) -> list[ModelBackendConfig]:
        return list(self._configs.values())


class ChatEngine:
    """Ties the document index, embedder and model registry into one pipeline."""

    def __init__(
        self,
        embedder: EmbedderConfig = EmbedderConfig(),
        chunking: ChunkingConfig = ChunkingConfig(),
        registry: ModelRegistry | None = None,
        template: PromptTemplate = PromptTemplate(),
        default_k: int = 4,
        include_history_in_prompt: bool = False,
    ):
        self.embedder = embedder
        self.chunking = chunking
        self.registry = registry or ModelRegistry()
        self.template = template
        self.default_k = default_k
        self.include_history_in_prompt = include_history_in_prompt
        self.index = VectorIndex(embedder.dim)
        self.chunks: dict[str, Chunk] = {}
        self.documents: dict[str, Document] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    def add_document(self, doc: Document) -> list[Chunk]:
        """Chunk, embed and index a document; returns the chunks added.

        Re-adding a document with identical content is a no-op (doc ids are
        content-derived).
        """
        if doc.doc_id in self.documents:
            return [c for c in self.chunks.values() if c.doc_id == doc.doc_id]
        chunks = chunk_document(doc, self.chunking)
        for chunk in chunks:
            self.index.add(chunk.chunk_id, embed(chunk.text, self.embedder))
            self.chunks[chunk.chunk_id] = chunk
        self.documents[doc.doc_id] = doc
        return chunks

    def list_models(self) -> list[ModelBackendConfig]:
        return self.registry.list_models()

    def _session_lock(self, session: Session) -> threading.Lock:
        with self._lock:
            return self._session_locks.setdefault(session.session_id, threading.Lock())

    def retrieve(self, question: str, k: int) -> list[ContextHit]:
        query = embed(question, self.embedder)
        hits = self.index.search(query, k)
        return [ContextHit(h.chunk_id, h.similarity, self.chunks[h.chunk_id].text)
                for h in hits]

    def answer_query(self, session: Session, question: str, model_id: str,
                     k: int | None = None) -> Answer:
        if not question.strip():
            raise EmptyQuestion("question is empty")
        cfg = self.registry.get(model_id)
        k = self.default_k if k is None else k

        with self._session_lock(session):
            t0 = time.monotonic()
            hits = self.retrieve(question, k)
            retrieval_s = time.monotonic() - t0

            prompt = build_prompt(question, hits, self.template)
            context = CONTEXT_SEPARATOR.join(h.text for h in hits)

            t1 = time.monotonic()
            text = _call_backend(cfg, prompt, question, context)
            latency_s = time.monotonic() - t1

            answer = Answer(text=text, hits=hits, model_id=model_id,
                            latency_s=latency_s, retrieval_s=retrieval_s)
            session.history.append((question, answer))
            return answer
