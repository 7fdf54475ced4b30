"""Text embedding and exact top-k cosine-similarity search with persistence.

Two embedders are provided: a fully deterministic hashed character-n-gram
embedder (used throughout the test suite, no model weights needed) and an
HTTP client for a locally hosted embedding endpoint. The index is a flat
exhaustive store: search results are exactly the brute-force cosine ranking.
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
import threading
import unicodedata
import zlib
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np

from .errors import (
    CorruptIndex,
    DimensionMismatch,
    DuplicateId,
    EmptyText,
    InvalidConfig,
    IoFailure,
    RemoteEmbedderUnavailable,
)

MAGIC = b"MDBIDX1\0"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EmbedderConfig:
    kind: str = "reference_hash"  # "reference_hash" | "http_remote"
    dim: int = 384
    endpoint: str | None = None
    char_ngram_n: int = 3
    timeout_s: float = 30.0

    def __post_init__(self):
        if self.kind not in ("reference_hash", "http_remote"):
            raise InvalidConfig(f"unknown embedder kind: {self.kind!r}")
        if self.dim <= 0:
            raise InvalidConfig("dim must be positive")
        if (self.endpoint is not None) != (self.kind == "http_remote"):
            raise InvalidConfig("endpoint must be set exactly when kind is http_remote")
        if self.char_ngram_n <= 0:
            raise InvalidConfig("char_ngram_n must be positive")


@dataclass(frozen=True)
class RetrievalHit:
    chunk_id: str
    similarity: float


_WS = re.compile(r"\s+")


def _hash_bucket(gram: str, dim: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def embed(text: str, cfg: EmbedderConfig) -> np.ndarray:
    """Embed text into a unit-norm float32 vector of cfg.dim dimensions."""
    if not text.strip():
        raise EmptyText("cannot embed empty or whitespace-only text")
    if cfg.kind == "reference_hash":
        return _embed_hash(text, cfg)
    return _embed_remote(text, cfg)


def _embed_hash(text: str, cfg: EmbedderConfig) -> np.ndarray:
    normalized = _WS.sub(" ", unicodedata.normalize("NFC", text).lower()).strip()
    n = cfg.char_ngram_n
    vec = np.zeros(cfg.dim, dtype=np.float64)
    if len(normalized) < n:
        vec[_hash_bucket(normalized, cfg.dim)] += 1.0
    else:
        for i in range(len(normalized) - n + 1):
            vec[_hash_bucket(normalized[i:i + n], cfg.dim)] += 1.0
    vec /= np.linalg.norm(vec)
    return vec.astype(np.float32)


def _embed_remote(text: str, cfg: EmbedderConfig) -> np.ndarray:
    try:
        resp = httpx.post(cfg.endpoint, json={"input": text}, timeout=cfg.timeout_s)
    except (httpx.TimeoutException, httpx.TransportError) as exc:
        raise RemoteEmbedderUnavailable(str(exc)) from exc
    if resp.status_code >= 500:
        raise RemoteEmbedderUnavailable(f"embedding endpoint returned {resp.status_code}")
    if resp.status_code != 200:
        raise RemoteEmbedderUnavailable(f"unexpected status {resp.status_code}")
    try:
        values = resp.json()["embedding"]
    except (KeyError, ValueError) as exc:
        raise RemoteEmbedderUnavailable(f"malformed embedding response: {exc}") from exc
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != cfg.dim:
        raise DimensionMismatch(
            f"endpoint returned dim {vec.shape}, expected ({cfg.dim},)")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise RemoteEmbedderUnavailable("endpoint returned a zero vector")
    return (vec / norm).astype(np.float32)


class VectorIndex:
    """Flat exact-search vector index over unit-norm float32 vectors.

    Concurrent searches are safe; insertions and save/load take the writer
    lock. Ties in similarity break by ascending insertion order (argsort is
    stable over the insertion-ordered matrix).
    """

    def __init__(self, dim: int):
        if dim <= 0:
            raise InvalidConfig("dim must be positive")
        self.dim = dim
        self._ids: list[str] = []
        self._id_set: set[str] = set()
        self._vectors: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None  # rebuilt lazily after inserts
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def count(self) -> int:
        return len(self._ids)

    def add(self, chunk_id: str, vector: np.ndarray) -> int:
        vec = np.asarray(vector, dtype=np.float32)
        if vec.ndim != 1 or vec.shape[0] != self.dim:
            raise DimensionMismatch(f"vector dim {vec.shape} != index dim {self.dim}")
        with self._lock:
            if chunk_id in self._id_set:
                raise DuplicateId(f"chunk_id already indexed: {chunk_id}")
            norm = float(np.linalg.norm(vec))
            if norm > 0:
                vec = vec / norm
            self._ids.append(chunk_id)
            self._id_set.add(chunk_id)
            self._vectors.append(vec)
            self._matrix = None
            return len(self._ids)

    def _get_matrix(self) -> np.ndarray:
        with self._lock:
            if self._matrix is None:
                self._matrix = np.vstack(self._vectors) if self._vectors else \
                    np.zeros((0, self.dim), dtype=np.float32)
            return self._matrix

    def search(self, query: np.ndarray, k: int) -> list[RetrievalHit]:
        q = np.asarray(query, dtype=np.float32)
        if q.ndim != 1 or q.shape[0] != self.dim:
            raise DimensionMismatch(f"query dim {q.shape} != index dim {self.dim}")
        if k <= 0 or not self._ids:
            return []
        norm = float(np.linalg.norm(q))
        if norm > 0:
            q = q / norm
        matrix = self._get_matrix()
        sims = matrix.astype(np.float64) @ q.astype(np.float64)
        order = np.argsort(-sims, kind="stable")[:min(k, len(self._ids))]
        return [RetrievalHit(self._ids[int(i)], float(sims[int(i)])) for i in order]

    def save(self, path: str | Path) -> None:
        """Write the binary index file plus the ordinal->chunk_id sidecar JSON."""
        path = Path(path)
        with self._lock:
            buf = bytearray()
            buf += MAGIC
            buf += struct.pack("<IIQ", FORMAT_VERSION, self.dim, len(self._ids))
            for ordinal, vec in enumerate(self._vectors):
                buf += struct.pack("<Q", ordinal)
                buf += vec.astype("<f4").tobytes()
            buf += struct.pack("<I", zlib.crc32(bytes(buf)) & 0xFFFFFFFF)
            sidecar = {str(i): cid for i, cid in enumerate(self._ids)}
            try:
                path.write_bytes(bytes(buf))
                path.with_suffix(path.suffix + ".ids.json").write_text(
                    json.dumps(sidecar), encoding="utf-8")
            except OSError as exc:
                raise IoFailure(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        path = Path(path)
        try:
            data = path.read_bytes()
            sidecar = json.loads(
                path.with_suffix(path.suffix + ".ids.json").read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(str(exc)) from exc

        if len(data) < len(MAGIC) + 16 + 4:
            raise CorruptIndex("file too short")
        if data[:len(MAGIC)] != MAGIC:
            raise CorruptIndex("bad magic bytes")
        payload, (crc_stored,) = data[:-4], struct.unpack("<I", data[-4:])
        if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
            raise CorruptIndex("checksum mismatch")
        version, dim, count = struct.unpack_from("<IIQ", payload, len(MAGIC))
        if version != FORMAT_VERSION:
            raise CorruptIndex(f"unsupported version {version}")
        record_size = 8 + 4 * dim
        offset = len(MAGIC) + 16
        if len(payload) != offset + count * record_size:
            raise CorruptIndex("truncated payload")

        index = cls(dim)
        for _ in range(count):
            (ordinal,) = struct.unpack_from("<Q", payload, offset)
            vec = np.frombuffer(payload, dtype="<f4", count=dim, offset=offset + 8).copy()
            chunk_id = sidecar.get(str(ordinal))
            if chunk_id is None:
                raise CorruptIndex(f"sidecar missing ordinal {ordinal}")
            index._ids.append(chunk_id)
            index._id_set.add(chunk_id)
            index._vectors.append(vec)
            offset += record_size
        return index
