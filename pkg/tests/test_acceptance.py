"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import json
import random
import time

import numpy as np
import pytest

from ragbench.benchharness import (
    RatingStore,
    build_report,
    bundled_dataset_path,
    load_dataset,
    render_markdown,
    run_benchmark,
)
from ragbench.docstore import ChunkingConfig, Document, chunk_document, ingest_document
from ragbench.embedindex import EmbedderConfig, VectorIndex
from ragbench.errors import StrictShapeViolation
from ragbench.evalmetrics import chrf, meteor, tokenize
from ragbench.ragchat import ChatEngine, ModelBackendConfig, Session

from oracles import brute_chrf, exhaustive_alignment
from test_benchharness import PUBLISHED_CELLS, fixture_records


def _passed(name: str, started: float):
    print(f"ACCEPTANCE PASS: {name} ({time.monotonic() - started:.2f}s)")


def test_chrf_correctness():
    t0 = time.monotonic()
    assert chrf("abc", "abc") == 1.0
    assert chrf("xyz", "abc") == 0.0
    assert chrf("ab", "abc") == pytest.approx(0.4242, abs=1e-4)

    rng = random.Random(20240501)
    alphabet = "abcdef g"
    checked = 0
    while checked < 500:
        hyp = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        ref = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))
        if not ref.strip():
            continue
        assert chrf(hyp, ref) == pytest.approx(brute_chrf(hyp, ref), abs=1e-9)
        checked += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    _passed("chrF correctness (exact values + 500-pair oracle equivalence)", t0)


def test_meteor_correctness():
    t0 = time.monotonic()
    assert meteor("cat", "cat").score == 0.5

    text = " ".join(f"tok{i}" for i in range(10))
    assert meteor(text, text).score == pytest.approx(0.9995, abs=1e-9)

    rng = random.Random(20240502)
    vocab = ["a", "b", "c", "d", "e"]
    for _ in range(500):
        hyp = [rng.choice(vocab) for _ in range(rng.randint(0, 8))]
        ref = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
        got = meteor(" ".join(hyp), " ".join(ref))
        assert (got.m, got.chunks) == exhaustive_alignment(hyp, ref)
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    _passed("METEOR correctness (exact values + 500-pair alignment oracle)", t0)


def _oracle_top_k(vectors32: list[np.ndarray], query: np.ndarray, k: int) -> list[int]:
    """Brute-force full-scan cosine sort, ties by ascending insertion order."""
    q = query.astype(np.float32)
    q = (q / np.linalg.norm(q)).astype(np.float64)
    scored = []
    for pos, vec in enumerate(vectors32):
        v = (vec / np.linalg.norm(vec)).astype(np.float32).astype(np.float64)
        scored.append((-float(np.dot(v, q)), pos))
    scored.sort()
    return [pos for _, pos in scored[:k]]


def test_vector_search_exactness_and_persistence(tmp_path):
    t0 = time.monotonic()
    rng = np.random.default_rng(20240503)

    for trial in range(200):
        dim = int(rng.integers(16, 385))
        n = int(rng.integers(1, 2001))
        index = VectorIndex(dim)
        vectors = []
        for i in range(n):
            v = rng.normal(size=dim).astype(np.float32)
            vectors.append(v)
            index.add(f"c{i}", v)
        query = rng.normal(size=dim).astype(np.float32)
        k = int(rng.integers(1, min(n, 20) + 1))
        got = [h.chunk_id for h in index.search(query, k)]
        want = [f"c{p}" for p in _oracle_top_k(vectors, query, k)]
        assert got == want, f"trial {trial}: search disagrees with brute force"

    # persistence round-trip preserves all top-10 results over 50 queries
    dim = 48
    index = VectorIndex(dim)
    for i in range(300):
        index.add(f"c{i}", rng.normal(size=dim).astype(np.float32))
    path = tmp_path / "acceptance.idx"
    index.save(path)
    loaded = VectorIndex.load(path)
    for _ in range(50):
        q = rng.normal(size=dim).astype(np.float32)
        assert index.search(q, 10) == loaded.search(q, 10)

    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    _passed("vector search oracle equivalence (200 indexes) + persistence", t0)


def test_chunker_invariants():
    t0 = time.monotonic()
    doc = Document(doc_id="d", title="t", source_format="text",
                   body="x" * 2500, page_offsets=[0])
    spans = [(c.char_start, c.char_end)
             for c in chunk_document(doc, ChunkingConfig(1000, 200))]
    assert spans == [(0, 1000), (800, 1800), (1600, 2500)]

    rng = random.Random(20240504)
    for _ in range(1000):
        length = rng.randint(1, 8000)
        chunk_size = rng.randint(1, 2000)
        overlap = rng.randint(0, chunk_size - 1)
        doc = Document(doc_id="d", title="t", source_format="text",
                       body="x" * length, page_offsets=[0])
        chunks = chunk_document(doc, ChunkingConfig(chunk_size, overlap))

        assert chunks[0].char_start == 0
        assert chunks[-1].char_end == length
        step = chunk_size - overlap
        for a, b in zip(chunks, chunks[1:]):
            assert b.char_start == a.char_start + step
            assert b.char_start <= a.char_end  # no gaps (abut when overlap = 0)
        for c in chunks:
            assert 0 <= c.char_start < c.char_end <= length
            assert c.char_end - c.char_start <= chunk_size
    _passed("chunker coverage/overlap invariants (1000 random configs)", t0)


def _run_pipeline_once():
    dataset = load_dataset(bundled_dataset_path(), strict=True)
    model_ids = ["llama-2-13b", "medalpaca-13b", "meditron-7b",
                 "mistral-7b-instruct"]
    lookup = {item.question: item.reference for item in dataset.items}
    engine = ChatEngine(embedder=EmbedderConfig(dim=384),
                        chunking=ChunkingConfig(1000, 200))
    for mid in model_ids:
        engine.registry.register(ModelBackendConfig(
            model_id=mid, kind="mock_reference", reference_lookup=lookup))
    corpus = "\n\n".join(item.reference for item in dataset.items)
    engine.add_document(ingest_document(corpus.encode(), "text", "corpus"))
    records = run_benchmark(dataset, model_ids, engine, Session())
    return dataset, records


def test_end_to_end_pipeline_determinism():
    t0 = time.monotonic()
    dataset, records = _run_pipeline_once()
    assert len(records) == 48
    refs = {item.item_id: item.reference for item in dataset.items}
    for rec in records:
        assert rec.error is None
        assert rec.scores.chrf == pytest.approx(1.0, abs=1e-12)
        m = len(tokenize(refs[rec.item_id]))
        assert rec.scores.meteor == pytest.approx(1 - 0.5 / m ** 3, abs=1e-12)

    def fingerprint(recs):
        # wall-clock latency fields are the only nondeterministic part
        return json.dumps([{
            "record_id": r.record_id, "item_id": r.item_id,
            "model_id": r.model_id, "group": r.group,
            "answer_text": r.answer_text,
            "meteor": r.scores.meteor, "chrf": r.scores.chrf,
        } for r in recs], sort_keys=True).encode()

    _, records2 = _run_pipeline_once()
    assert fingerprint(records) == fingerprint(records2)
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    _passed("end-to-end pipeline: 48 records, identity scores, deterministic", t0)


def test_report_fidelity():
    t0 = time.monotonic()
    records = fixture_records(PUBLISHED_CELLS, per_cell=4, latency_s=90.0)
    text = render_markdown(build_report(records))

    lines = [l for l in text.splitlines() if l.startswith("|")]
    models = ["Llama-2", "MedAlpaca", "Meditron", "Mistral"]
    group_rows = {"G1 (clinical)": "clinical", "G2 (visual)": "visual",
                  "G3 (general)": "general"}
    grid = {}
    for line in lines[2:5]:
        cols = [c.strip() for c in line.strip("|").split("|")]
        group = group_rows[cols[0]]
        for j, m in enumerate(models):
            grid[(group, m)] = (cols[1 + 2 * j], cols[2 + 2 * j])
    for key, (met, chf) in PUBLISHED_CELLS.items():
        assert grid[key] == (f"{met:.2f}", f"{chf:.2f}"), f"cell {key} mismatch"

    assert "1.50" in text  # 90 s mean latency in minutes
    _passed("report fidelity: all 24 published cells + latency conversion", t0)


def test_dataset_strictness():
    t0 = time.monotonic()
    dataset = load_dataset(bundled_dataset_path(), strict=True)
    assert len(dataset.items) == 12
    groups = {g: sum(1 for i in dataset.items if i.group == g)
              for g in ("clinical", "visual", "general")}
    assert groups == {"clinical": 4, "visual": 4, "general": 4}

    broken = {
        "name": "broken",
        "items": [{"id": i.item_id, "group": i.group, "question": i.question,
                   "reference": i.reference} for i in dataset.items[1:]],
    }
    from ragbench.benchharness import parse_dataset
    with pytest.raises(StrictShapeViolation):
        parse_dataset(broken, strict=True)
    _passed("dataset strictness: 3 groups x 4 items enforced", t0)


def test_gateway_scripted_flow():
    import io

    from fastapi.testclient import TestClient

    from ragbench.config import AppConfig
    from ragbench.gateway import create_app

    t0 = time.monotonic()
    token = "acceptance-token"
    config = AppConfig()
    config.backends = [ModelBackendConfig(model_id="echo-model", kind="mock_echo")]
    app = create_app(config, token=token)

    with TestClient(app) as client:
        # unauthorized requests get 401 with ApiError bodies
        for method, path in [("post", "/api/sessions"), ("get", "/api/models"),
                             ("post", "/api/ratings")]:
            resp = getattr(client, method)(path)
            assert resp.status_code == 401
            assert set(resp.json()) == {"code", "message"}

        client.headers["Authorization"] = f"Bearer {token}"
        session_id = client.post("/api/sessions").json()["session_id"]

        corpus = ("Hypertension in children is diagnosed from blood pressure "
                  "percentiles. Echocardiography assesses left ventricular "
                  "hypertrophy. Lifestyle modification comes first.")
        up = client.post("/api/documents",
                         data={"session_id": session_id, "title": "guideline"},
                         files={"file": ("guideline.txt",
                                         io.BytesIO(corpus.encode()),
                                         "text/plain")})
        assert up.status_code == 200 and up.json()["chunks"] >= 1

        q = client.post(f"/api/sessions/{session_id}/query",
                        json={"question": "How is LVH assessed?",
                              "model_id": "echo-model"})
        assert q.status_code == 200 and q.json()["contexts"]

        dataset = {"name": "flow", "items": [
            {"id": f"{g}-{i}", "group": g,
             "question": f"{g} question {i}?",
             "reference": f"Reference answer {g} {i}."}
            for g in ("clinical", "visual", "general") for i in range(2)]}
        run = client.post("/api/benchmark/run", json={
            "session_id": session_id, "model_ids": ["echo-model"],
            "dataset": dataset})
        assert run.status_code == 202
        run_id = run.json()["run_id"]

        deadline = time.monotonic() + 30
        while True:
            rep = client.get(f"/api/benchmark/{run_id}/report",
                             params={"format": "json"})
            if rep.status_code != 202:
                break
            assert time.monotonic() < deadline
            time.sleep(0.05)
        assert rep.status_code == 200

        records = client.get(f"/api/benchmark/{run_id}/records").json()["records"]
        rate = client.post("/api/ratings", json={
            "record_id": records[0]["record_id"], "fidelity_pct": 75,
            "relevance_pct": 85, "rater_id": "expert1"})
        assert rate.status_code == 204

        for fmt, content_type in (("markdown", "text/markdown"),
                                  ("csv", "text/csv"),
                                  ("json", "application/json")):
            rep = client.get(f"/api/benchmark/{run_id}/report",
                             params={"format": fmt})
            assert rep.status_code == 200
            assert rep.headers["content-type"].startswith(content_type)
    _passed("gateway scripted flow: upload, query, benchmark, rate, report", t0)
