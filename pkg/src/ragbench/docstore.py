"""Document ingestion, normalization and sliding-window chunking.

Uploaded files (PDF, plain text or markdown) are normalized into a single
page-ordered text body, then split into fixed-size overlapping character
chunks that serve as the retrieval unit.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
import threading
import time
import unicodedata
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import EmptyDocument, ExtractionFailed, InvalidConfig, UnsupportedFormat

SOURCE_FORMATS = ("pdf", "text", "markdown")

# bytes -> ordered list of page strings
PageExtractor = Callable[[bytes], list[str]]

_MULTI_NEWLINE = re.compile(r"\n{3,}")


def normalize_text(text: str) -> str:
    """NFC-normalize, strip carriage returns, collapse 3+ newlines to 2."""
    text = unicodedata.normalize("NFC", text)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    return _MULTI_NEWLINE.sub("\n\n", text)


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = 1000
    overlap: int = 200

    def __post_init__(self):
        if self.chunk_size <= 0:
            raise InvalidConfig(f"chunk_size must be positive, got {self.chunk_size}")
        if self.overlap < 0:
            raise InvalidConfig(f"overlap must be non-negative, got {self.overlap}")
        if self.overlap >= self.chunk_size:
            raise InvalidConfig(
                f"overlap ({self.overlap}) must be smaller than chunk_size ({self.chunk_size})"
            )


@dataclass
class Document:
    doc_id: str
    title: str
    source_format: str
    body: str
    page_offsets: list[int]
    created_at: float = field(default_factory=time.time)


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    seq: int
    char_start: int
    char_end: int
    text: str


def extract_pdf_pages_basic(data: bytes) -> list[str]:
    """Extract page texts from simple PDFs (Flate or raw content streams).

    Minimal reference extractor: walks the object table, resolves each page's
    /Contents streams and pulls literal strings from Tj/TJ operators. Handles
    PDFs produced by common generators (e.g. reportlab); complex layouts,
    encryption and CID fonts are out of scope — plug in a richer extractor
    through the PageExtractor interface for those.
    """
    if not data.startswith(b"%PDF"):
        raise ExtractionFailed("not a PDF file (missing %PDF header)")
    if b"/Encrypt" in data:
        raise ExtractionFailed("encrypted PDFs are not supported")

    objects: dict[int, bytes] = {}
    for m in re.finditer(rb"(\d+)\s+\d+\s+obj\b(.*?)endobj", data, re.DOTALL):
        objects[int(m.group(1))] = m.group(2)

    pages: list[str] = []
    for num in sorted(objects):
        body = objects[num]
        if re.search(rb"/Type\s*/Page\b(?!s)", body) is None:
            continue
        content_refs = []
        cm = re.search(rb"/Contents\s*(\d+)\s+\d+\s+R", body)
        if cm:
            content_refs.append(int(cm.group(1)))
        else:
            am = re.search(rb"/Contents\s*\[(.*?)\]", body, re.DOTALL)
            if am:
                content_refs.extend(int(r) for r in re.findall(rb"(\d+)\s+\d+\s+R", am.group(1)))
        parts = []
        for ref in content_refs:
            obj = objects.get(ref)
            if obj is None:
                continue
            sm = re.search(rb"stream\r?\n(.*?)endstream", obj, re.DOTALL)
            if sm is None:
                continue
            raw = sm.group(1)
            try:
                if b"/ASCII85Decode" in obj:
                    raw = base64.a85decode(raw.strip(), adobe=b"~>" in raw)
                if b"/FlateDecode" in obj:
                    raw = zlib.decompress(raw)
            except (ValueError, zlib.error) as exc:
                raise ExtractionFailed(f"corrupt content stream: {exc}") from exc
            parts.append(_text_from_content_stream(raw))
        pages.append("\n".join(p for p in parts if p))
    if not pages:
        raise ExtractionFailed("no pages found in PDF")
    return pages


def _text_from_content_stream(stream: bytes) -> str:
    """Pull literal strings used by Tj/TJ/' operators out of one content stream."""
    out: list[str] = []
    for strings, op in re.findall(rb"((?:\((?:\\.|[^\\()])*\)\s*-?[\d.]*\s*)+)(Tj|TJ|')", stream):
        for lit in re.findall(rb"\((?:\\.|[^\\()])*\)", strings):
            out.append(_unescape_pdf_string(lit[1:-1]))
        if op in (b"Tj", b"'"):
            out.append(" ")
    return "".join(out).strip()


_PDF_ESCAPES = {b"n": "\n", b"r": "\r", b"t": "\t", b"b": "\b", b"f": "\f",
                b"(": "(", b")": ")", b"\\": "\\"}


def _unescape_pdf_string(raw: bytes) -> str:
    out = []
    i = 0
    while i < len(raw):
        c = raw[i:i + 1]
        if c == b"\\" and i + 1 < len(raw):
            nxt = raw[i + 1:i + 2]
            if nxt in _PDF_ESCAPES:
                out.append(_PDF_ESCAPES[nxt])
                i += 2
                continue
            if nxt.isdigit():  # octal escape
                oct_digits = re.match(rb"[0-7]{1,3}", raw[i + 1:]).group(0)
                out.append(chr(int(oct_digits, 8)))
                i += 1 + len(oct_digits)
                continue
            i += 1
            continue
        out.append(c.decode("latin-1"))
        i += 1
    return "".join(out)


def ingest_document(
    data: bytes,
    source_format: str,
    title: str,
    extractor: PageExtractor | None = None,
) -> Document:
    """Decode/extract, normalize and wrap raw bytes into a Document.

    PDF pages go through `extractor` (defaults to the built-in basic one);
    each page is normalized independently so page_offsets stay stable.
    """
    if source_format not in SOURCE_FORMATS:
        raise UnsupportedFormat(f"unsupported format: {source_format!r}")
    if not data:
        raise EmptyDocument("empty upload")

    if source_format == "pdf":
        extractor = extractor or extract_pdf_pages_basic
        try:
            raw_pages = extractor(data)
        except ExtractionFailed:
            raise
        except Exception as exc:
            raise ExtractionFailed(str(exc)) from exc
        pages = [normalize_text(p).strip("\n") for p in raw_pages]
        page_offsets: list[int] = []
        parts: list[str] = []
        pos = 0
        for i, page in enumerate(pages):
            if i > 0:
                parts.append("\n\n")
                pos += 2
            page_offsets.append(pos)
            parts.append(page)
            pos += len(page)
        body = "".join(parts)
    else:
        body = normalize_text(data.decode("utf-8", errors="replace"))
        page_offsets = [0]

    if not body.strip():
        raise EmptyDocument("document contains only whitespace")

    # content-derived id keeps chunk ids reproducible across runs
    digest = hashlib.sha256(title.encode("utf-8") + b"\0" + body.encode("utf-8"))
    return Document(
        doc_id=digest.hexdigest()[:16],
        title=title,
        source_format=source_format,
        body=body,
        page_offsets=page_offsets,
    )


def chunk_document(doc: Document, cfg: ChunkingConfig) -> list[Chunk]:
    """Split doc.body into overlapping chunks.

    Chunk i starts at i * (chunk_size - overlap) and spans at most chunk_size
    characters; emission stops with the first chunk that reaches the end of
    the body.
    """
    body = doc.body
    n = len(body)
    if n == 0:
        raise EmptyDocument("cannot chunk an empty document")
    step = cfg.chunk_size - cfg.overlap
    chunks: list[Chunk] = []
    i = 0
    while True:
        start = i * step
        end = min(start + cfg.chunk_size, n)
        chunks.append(Chunk(
            chunk_id=f"{doc.doc_id}:{i}",
            doc_id=doc.doc_id,
            seq=i,
            char_start=start,
            char_end=end,
            text=body[start:end],
        ))
        if end >= n:
            break
        i += 1
    return chunks


class DocumentCatalog:
    """On-disk catalog: one JSON metadata record plus a UTF-8 body file per doc.

    Reads are lock-free on immutable files; writes are serialized.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def save(self, doc: Document) -> None:
        meta = {
            "doc_id": doc.doc_id,
            "title": doc.title,
            "source_format": doc.source_format,
            "page_offsets": doc.page_offsets,
            "created_at": doc.created_at,
        }
        with self._write_lock:
            (self.root / f"{doc.doc_id}.txt").write_text(doc.body, encoding="utf-8")
            (self.root / f"{doc.doc_id}.json").write_text(
                json.dumps(meta, indent=2), encoding="utf-8")

    def load(self, doc_id: str) -> Document:
        meta = json.loads((self.root / f"{doc_id}.json").read_text(encoding="utf-8"))
        body = (self.root / f"{doc_id}.txt").read_text(encoding="utf-8")
        return Document(
            doc_id=meta["doc_id"],
            title=meta["title"],
            source_format=meta["source_format"],
            body=body,
            page_offsets=list(meta["page_offsets"]),
            created_at=meta["created_at"],
        )

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))
