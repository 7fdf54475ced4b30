"""Local document QA with retrieval, pluggable model backends and evaluation."""

from .benchharness import (
    BenchmarkDataset,
    BenchmarkItem,
    EvaluationReport,
    HumanRating,
    RatingStore,
    RunRecord,
    build_report,
    bundled_dataset_path,
    load_dataset,
    parse_dataset,
    render_report,
    run_benchmark,
)
from .config import AppConfig, load_config
from .docstore import (
    Chunk,
    ChunkingConfig,
    Document,
    DocumentCatalog,
    chunk_document,
    ingest_document,
)
from .embedindex import EmbedderConfig, RetrievalHit, VectorIndex, embed
from .evalmetrics import (
    ChrfConfig,
    MeteorBreakdown,
    MetricScores,
    average_scores,
    chrf,
    meteor,
    score_response,
)
from .ragchat import (
    Answer,
    ChatEngine,
    ContextHit,
    ModelBackendConfig,
    ModelRegistry,
    PromptTemplate,
    Session,
    build_prompt,
)

__version__ = "0.1.0"
