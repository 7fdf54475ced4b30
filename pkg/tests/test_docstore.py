import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ragbench.docstore import (
    Chunk,
    ChunkingConfig,
    Document,
    DocumentCatalog,
    chunk_document,
    extract_pdf_pages_basic,
    ingest_document,
    normalize_text,
)
from ragbench.errors import (
    EmptyDocument,
    ExtractionFailed,
    InvalidConfig,
    UnsupportedFormat,
)


def make_doc(body: str) -> Document:
    return Document(doc_id="d1", title="t", source_format="text",
                    body=body, page_offsets=[0])


class TestIngest:
    def test_crlf_normalized(self):
        doc = ingest_document(b"hello\r\nworld", "text", "t")
        assert doc.body == "hello\nworld"
        assert doc.page_offsets == [0]

    def test_triple_newlines_collapsed(self):
        doc = ingest_document(b"a\n\n\n\nb", "text", "t")
        assert doc.body == "a\n\nb"

    def test_whitespace_only_rejected(self):
        with pytest.raises(EmptyDocument):
            ingest_document(b"   \n\t  ", "text", "t")

    def test_empty_bytes_rejected(self):
        with pytest.raises(EmptyDocument):
            ingest_document(b"", "text", "t")

    def test_unsupported_format(self):
        with pytest.raises(UnsupportedFormat):
            ingest_document(b"x", "docx", "t")

    def test_markdown_single_page(self):
        doc = ingest_document("# Title\n\nBody".encode(), "markdown", "t")
        assert doc.page_offsets == [0]
        assert doc.source_format == "markdown"

    def test_pdf_page_offsets_via_fake_extractor(self):
        pages = [f"page {i} text" for i in range(12)]
        doc = ingest_document(b"%PDF-fake", "pdf", "guideline",
                              extractor=lambda data: pages)
        assert len(doc.page_offsets) == 12
        assert doc.page_offsets[0] == 0
        assert all(a < b for a, b in zip(doc.page_offsets, doc.page_offsets[1:]))
        for off, page in zip(doc.page_offsets, pages):
            assert doc.body[off:off + len(page)] == page

    def test_pdf_extractor_failure(self):
        def broken(data):
            raise ValueError("boom")
        with pytest.raises(ExtractionFailed):
            ingest_document(b"%PDF-fake", "pdf", "t", extractor=broken)


@pytest.fixture(scope="module")
def twelve_page_pdf() -> bytes:
    from io import BytesIO

    from reportlab.pdfgen import canvas
    buf = BytesIO()
    c = canvas.Canvas(buf)
    for i in range(12):
        c.drawString(72, 720, f"Guideline page {i + 1} content")
        c.showPage()
    c.save()
    return buf.getvalue()


class TestBuiltinPdfExtractor:
    def test_twelve_pages(self, twelve_page_pdf):
        doc = ingest_document(twelve_page_pdf, "pdf", "guideline")
        assert len(doc.page_offsets) == 12
        assert "Guideline page 7 content" in doc.body

    def test_not_a_pdf(self):
        with pytest.raises(ExtractionFailed):
            extract_pdf_pages_basic(b"not a pdf at all")


class TestChunking:
    def test_config_validation(self):
        with pytest.raises(InvalidConfig):
            ChunkingConfig(chunk_size=100, overlap=100)
        with pytest.raises(InvalidConfig):
            ChunkingConfig(chunk_size=0, overlap=0)
        with pytest.raises(InvalidConfig):
            ChunkingConfig(chunk_size=10, overlap=-1)

    def test_spec_example_2500(self):
        doc = make_doc("x" * 2500)
        chunks = chunk_document(doc, ChunkingConfig(1000, 200))
        spans = [(c.char_start, c.char_end) for c in chunks]
        assert spans == [(0, 1000), (800, 1800), (1600, 2500)]
        assert [c.seq for c in chunks] == [0, 1, 2]

    def test_short_body_single_chunk(self):
        chunks = chunk_document(make_doc("x" * 500), ChunkingConfig(1000, 200))
        assert [(c.char_start, c.char_end) for c in chunks] == [(0, 500)]

    def test_exact_fit_single_chunk(self):
        chunks = chunk_document(make_doc("x" * 1000), ChunkingConfig(1000, 200))
        assert [(c.char_start, c.char_end) for c in chunks] == [(0, 1000)]

    def test_round_trip_identity(self):
        body = "".join(chr(ord("a") + i % 26) for i in range(3333))
        doc = make_doc(body)
        for chunk in chunk_document(doc, ChunkingConfig(500, 120)):
            assert chunk.text == body[chunk.char_start:chunk.char_end]

    @given(
        length=st.integers(1, 5000),
        chunk_size=st.integers(2, 1200),
        overlap_frac=st.floats(0, 0.99),
    )
    @settings(max_examples=200, deadline=None)
    def test_coverage_and_overlap_properties(self, length, chunk_size, overlap_frac):
        overlap = int(overlap_frac * chunk_size)
        assert overlap < chunk_size
        doc = make_doc("a" * length)
        cfg = ChunkingConfig(chunk_size, overlap)
        chunks = chunk_document(doc, cfg)

        # coverage: union of intervals is [0, length)
        covered = set()
        for c in chunks:
            assert 0 <= c.char_start < c.char_end <= length
            assert c.char_end - c.char_start <= chunk_size
            covered.update(range(c.char_start, c.char_end))
        assert covered == set(range(length))

        # overlap: consecutive starts differ by exactly the step
        step = chunk_size - overlap
        for a, b in zip(chunks, chunks[1:]):
            assert b.char_start == a.char_start + step

        # non-overlapped prefixes reconstruct the body
        rebuilt = "".join(c.text[:step] for c in chunks[:-1]) + chunks[-1].text
        assert rebuilt == doc.body

    def test_determinism(self):
        doc = make_doc("abc" * 700)
        cfg = ChunkingConfig(400, 100)
        assert chunk_document(doc, cfg) == chunk_document(doc, cfg)


class TestCatalog:
    def test_save_load_round_trip(self, tmp_path):
        catalog = DocumentCatalog(tmp_path)
        doc = ingest_document("some body text".encode(), "text", "my title")
        catalog.save(doc)
        loaded = catalog.load(doc.doc_id)
        assert loaded == doc
        assert catalog.list_ids() == [doc.doc_id]


def test_normalize_is_idempotent():
    s = normalize_text("a\r\nb\n\n\n\nc\r")
    assert normalize_text(s) == s
    assert "\r" not in s
